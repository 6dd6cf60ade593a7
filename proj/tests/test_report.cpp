#include <doctest.h>

#include <nlohmann/json.hpp>

#include <map>
#include <string>
#include <vector>

#include "rationeval/core.hpp"
#include "rationeval/errors.hpp"
#include "rationeval/report.hpp"
#include "support/test_support.hpp"

using namespace rationeval;

namespace {

ScoreCard uniform_card(double value) {
  ScoreCard card;
  for (Attribute a : all_attributes()) card.set(a, value);
  return card;
}

PreferencePair pref_pair(const std::string& id, Verdict verdict) {
  PreferencePair pair;
  pair.pair_id = id;
  pair.question = "q";
  pair.side_a = {id, "model-x", "q", "a"};
  pair.side_b = {id, "model-y", "q", "b"};
  pair.human_verdict = verdict;
  return pair;
}

// Five decided pairs whose Faithfulness gaps are the hand-checked sample
// {0.2, -0.1, 0.4, 0.0, 0.3}; every other attribute gap is exactly 0.1.
struct DiffFixture {
  std::vector<PreferencePair> pairs;
  std::map<std::string, elo::PairCards> cards;
};

DiffFixture diff_fixture() {
  DiffFixture fx;
  const double gaps[5] = {0.2, -0.1, 0.4, 0.0, 0.3};
  for (int k = 0; k < 5; ++k) {
    std::string id = "p" + std::to_string(k);
    // Alternate the winning side so both chosen-side branches are exercised.
    bool a_wins = k % 2 == 0;
    fx.pairs.push_back(pref_pair(id, a_wins ? Verdict::kAWins : Verdict::kBWins));
    ScoreCard chosen = uniform_card(0.6);
    ScoreCard rejected = uniform_card(0.5);
    chosen.set(Attribute::kFaithfulness, 0.5 + gaps[k]);
    rejected.set(Attribute::kFaithfulness, 0.5);
    fx.cards[id] = a_wins ? elo::PairCards{chosen, rejected}
                          : elo::PairCards{rejected, chosen};
  }
  return fx;
}

elo::LeaderboardResult tiny_leaderboards(bool grammar_missing_one_model = false) {
  elo::LeaderboardResult result;
  auto fill = [&](elo::Basis basis, std::map<std::string, double> ratings) {
    elo::RatingTable table;
    table.basis = basis;
    for (const auto& [model, r] : ratings) {
      table.ratings[model] = r;
      table.ci_low[model] = r - 5.0;
      table.ci_high[model] = r + 5.0;
      table.games_played[model] = 10;
    }
    result.tables[basis] = std::move(table);
  };
  fill(elo::Basis{}, {{"alpha", 1020.0}, {"beta", 1000.0}, {"gamma", 980.0}});
  for (Attribute a : all_attributes()) {
    std::map<std::string, double> ratings{
        {"alpha", 1005.0}, {"beta", 1010.0}, {"gamma", 985.0}};
    if (grammar_missing_one_model && a == Attribute::kGrammar) ratings.erase("alpha");
    fill(elo::Basis{a}, std::move(ratings));
  }
  return result;
}

int count_occurrences(const std::string& haystack, const std::string& needle) {
  int n = 0;
  for (std::size_t at = haystack.find(needle); at != std::string::npos;
       at = haystack.find(needle, at + needle.size())) {
    ++n;
  }
  return n;
}

}  // namespace

TEST_CASE("five_number matches the hand-computed quartiles") {
  report::FiveNumber f = report::five_number({0.2, -0.1, 0.4, 0.0, 0.3});
  CHECK(f.min == -0.1);
  CHECK(f.q1 == 0.0);
  CHECK(f.median == 0.2);
  CHECK(f.q3 == 0.3);
  CHECK(f.max == 0.4);

  report::FiveNumber single = report::five_number({0.7});
  CHECK(single.min == 0.7);
  CHECK(single.q1 == 0.7);
  CHECK(single.median == 0.7);
  CHECK(single.q3 == 0.7);
  CHECK(single.max == 0.7);

  // Interpolated case: quartiles of {1,2,3,4} sit between samples.
  report::FiveNumber four = report::five_number({1.0, 2.0, 3.0, 4.0});
  CHECK(four.q1 == doctest::Approx(1.75));
  CHECK(four.median == doctest::Approx(2.5));
  CHECK(four.q3 == doctest::Approx(3.25));

  CHECK_THROWS_AS(report::five_number({}), DataError);
}

TEST_CASE("export_diff_distribution flips the gap onto the chosen side") {
  DiffFixture fx = diff_fixture();
  report::DiffDistribution diff = report::export_diff_distribution(fx.pairs, fx.cards);
  REQUIRE(diff.pair_ids.size() == 5);
  CHECK(diff.ties_excluded == 0);

  const auto& faith = diff.samples[attribute_index(Attribute::kFaithfulness)];
  CHECK(faith[0] == doctest::Approx(0.2));
  CHECK(faith[1] == doctest::Approx(-0.1));
  CHECK(faith[2] == doctest::Approx(0.4));
  CHECK(faith[3] == doctest::Approx(0.0));
  CHECK(faith[4] == doctest::Approx(0.3));
  // Other attributes carry the constant chosen-minus-rejected edge.
  for (double v : diff.samples[attribute_index(Attribute::kGrammar)]) {
    CHECK(v == doctest::Approx(0.1));
  }
}

TEST_CASE("export_diff_distribution counts ties and skips unscored pairs") {
  DiffFixture fx = diff_fixture();
  fx.pairs.push_back(pref_pair("tied", Verdict::kTie));
  fx.cards["tied"] = {uniform_card(0.5), uniform_card(0.5)};
  fx.pairs.push_back(pref_pair("bothbad", Verdict::kTieBothBad));
  fx.cards["bothbad"] = {uniform_card(0.2), uniform_card(0.2)};
  fx.pairs.push_back(pref_pair("unscored", Verdict::kAWins));

  report::DiffDistribution diff = report::export_diff_distribution(fx.pairs, fx.cards);
  CHECK(diff.pair_ids.size() == 5);
  CHECK(diff.ties_excluded == 2);

  std::vector<PreferencePair> only_ties{pref_pair("t", Verdict::kTie)};
  std::map<std::string, elo::PairCards> cards{{"t", {uniform_card(0.5), uniform_card(0.5)}}};
  CHECK_THROWS_AS(report::export_diff_distribution(only_ties, cards), DataError);
}

TEST_CASE("diff summary table freezes the quartiles") {
  DiffFixture fx = diff_fixture();
  report::DiffDistribution diff = report::export_diff_distribution(fx.pairs, fx.cards);
  csv::Table t = report::diff_summary_table(diff);
  REQUIRE(t.rows.size() == kAttributeCount);
  CHECK(t.header == std::vector<std::string>{"attribute", "count", "min", "q1", "median", "q3",
                                             "max", "ties_excluded"});
  const auto& row = t.rows[attribute_index(Attribute::kFaithfulness)];
  CHECK(row[0] == "Faithfulness");
  CHECK(row[1] == "5");
  CHECK(csv::parse_double(row[2]) == doctest::Approx(-0.1));
  CHECK(csv::parse_double(row[3]) == doctest::Approx(0.0));
  CHECK(csv::parse_double(row[4]) == doctest::Approx(0.2));
  CHECK(csv::parse_double(row[5]) == doctest::Approx(0.3));
  CHECK(csv::parse_double(row[6]) == doctest::Approx(0.4));
  CHECK(row[7] == "0");
}

TEST_CASE("diff samples round-trip through their table") {
  DiffFixture fx = diff_fixture();
  report::DiffDistribution diff = report::export_diff_distribution(fx.pairs, fx.cards);
  csv::Table t = report::diff_samples_table(diff);
  CHECK(t.rows.size() == 5 * kAttributeCount);

  report::DiffDistribution back = report::diff_from_samples_table(t);
  CHECK(back.pair_ids == diff.pair_ids);
  for (std::size_t i = 0; i < kAttributeCount; ++i) {
    REQUIRE(back.samples[i].size() == diff.samples[i].size());
    for (std::size_t k = 0; k < diff.samples[i].size(); ++k) {
      CHECK(back.samples[i][k] == diff.samples[i][k]);  // format_double is exact
    }
  }

  // The reloaded distribution renders the same chart bytes.
  CHECK(report::render_svg(report::diff_box_chart(back)) ==
        report::render_svg(report::diff_box_chart(diff)));

  csv::Table truncated = t;
  truncated.rows.pop_back();
  CHECK_THROWS_AS(report::diff_from_samples_table(truncated), DataError);
}

TEST_CASE("histogram32 assigns edges and the top boundary") {
  auto bins = report::histogram32({0.0, 0.03124, 0.03125, 0.5, 0.999, 1.0});
  CHECK(bins[0] == 2);   // 0.0 and 0.03124
  CHECK(bins[1] == 1);   // 0.03125 is the exact lower edge of bin 1
  CHECK(bins[16] == 1);  // 0.5 opens the upper half
  CHECK(bins[31] == 2);  // 0.999 and the closed top boundary 1.0
  int total = 0;
  for (int b : bins) total += b;
  CHECK(total == 6);
  CHECK_THROWS_AS(report::histogram32({1.1}), DataError);
  CHECK_THROWS_AS(report::histogram32({-0.01}), DataError);
}

TEST_CASE("score density exports and reloads") {
  DiffFixture fx = diff_fixture();
  report::ScoreDensity density = report::export_score_density(fx.pairs, fx.cards);
  REQUIRE(density.pair_ids.size() == 5);
  // Chosen Faithfulness scores are 0.5 + gap, rejected all 0.5.
  CHECK(density.chosen[attribute_index(Attribute::kFaithfulness)][2] == doctest::Approx(0.9));
  CHECK(density.rejected[attribute_index(Attribute::kFaithfulness)][2] ==
        doctest::Approx(0.5));

  csv::Table samples = report::density_samples_table(density);
  report::ScoreDensity back = report::density_from_samples_table(samples);
  CHECK(back.pair_ids == density.pair_ids);
  for (std::size_t i = 0; i < kAttributeCount; ++i) {
    CHECK(back.chosen[i] == density.chosen[i]);
    CHECK(back.rejected[i] == density.rejected[i]);
  }

  csv::Table bins = report::density_bins_table(density);
  CHECK(bins.rows.size() == kAttributeCount * report::ScoreDensity::kBins);
  long chosen_total = 0;
  std::size_t count_col = bins.column("chosen_count");
  for (const auto& row : bins.rows) chosen_total += std::stol(row[count_col]);
  CHECK(chosen_total == 5 * static_cast<long>(kAttributeCount));

  report::ChartSpec chart = report::density_chart(density, Attribute::kFaithfulness);
  CHECK(chart.axis_labels.size() == report::ScoreDensity::kBins);
  REQUIRE(chart.series.size() == 2);
  CHECK(chart.series[0].name == "chosen");
  CHECK(chart.series[1].name == "rejected");
  CHECK(report::render_svg(report::density_chart(back, Attribute::kFaithfulness)) ==
        report::render_svg(chart));
}

TEST_CASE("importance and beeswarm tables round-trip") {
  shap::AttributionResult result;
  result.per_instance = {{}, {}};
  result.per_instance[0][0] = 0.4;
  result.per_instance[1][0] = -0.2;
  result.per_instance[0][5] = 0.1;
  result.mean_abs[0] = 0.3;
  result.mean_abs[5] = 0.05;
  result.direction[0] = 0.4;
  result.direction[5] = -0.1;

  auto rows = shap::attribute_importance(result);
  csv::Table t = report::importance_table(rows, result);
  CHECK(t.rows[0][t.column("attribute")] == "Faithfulness");
  CHECK(t.rows[0][t.column("rank")] == "1");

  auto back = report::importance_from_table(t);
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].attribute == rows[i].attribute);
    CHECK(back[i].mean_abs == rows[i].mean_abs);
    CHECK(back[i].direction_sign == rows[i].direction_sign);
  }
  CHECK(report::render_svg(report::importance_bar_chart(back)) ==
        report::render_svg(report::importance_bar_chart(rows)));

  std::vector<FeatureVector> features(2);
  features[0][0] = 0.9;
  auto bee = shap::export_beeswarm(result, features);
  csv::Table bt = report::beeswarm_table(bee);
  auto bee_back = report::beeswarm_from_table(bt);
  REQUIRE(bee_back.size() == bee.size());
  for (std::size_t i = 0; i < bee.size(); ++i) {
    CHECK(bee_back[i].instance == bee[i].instance);
    CHECK(bee_back[i].attribute == bee[i].attribute);
    CHECK(bee_back[i].phi == bee[i].phi);
    CHECK(bee_back[i].feature_value == bee[i].feature_value);
  }
  CHECK(report::render_svg(report::beeswarm_chart(bee_back)) ==
        report::render_svg(report::beeswarm_chart(bee)));
}

TEST_CASE("leaderboard table lists models in rank order and reloads") {
  elo::LeaderboardResult result = tiny_leaderboards();
  csv::Table t = report::leaderboard_table(result);
  CHECK(t.rows.size() == 13 * 3);
  CHECK(t.rows[0][t.column("basis")] == "human_preference");
  CHECK(t.rows[0][t.column("model")] == "alpha");  // rank 1 first
  CHECK(t.rows[1][t.column("model")] == "beta");

  elo::LeaderboardResult back = report::leaderboards_from_table(t);
  REQUIRE(back.tables.size() == 13);
  for (const auto& [basis, table] : result.tables) {
    const elo::RatingTable& b = back.tables.at(basis);
    CHECK(b.ratings == table.ratings);
    CHECK(b.ci_low == table.ci_low);
    CHECK(b.ci_high == table.ci_high);
    CHECK(b.games_played == table.games_played);
  }

  report::ChartSpec bars = report::leaderboard_bar_chart(back.tables.at(elo::Basis{}));
  CHECK(bars.title == "ELO ratings: human_preference");
  CHECK(bars.axis_labels == std::vector<std::string>{"alpha", "beta", "gamma"});
  REQUIRE(bars.series.size() == 3);
  CHECK(bars.series[0].values[0] == 1020.0);
}

TEST_CASE("radar export picks top models by human rank") {
  elo::LeaderboardResult result = tiny_leaderboards();
  report::RadarExport rank_mode = report::export_radar(result, report::RadarMode::kRank, 2);
  CHECK(rank_mode.spec.invert_axis);
  CHECK(rank_mode.dropped_models.empty());
  REQUIRE(rank_mode.spec.series.size() == 2);
  CHECK(rank_mode.spec.series[0].name == "alpha");
  CHECK(rank_mode.spec.series[1].name == "beta");
  REQUIRE(rank_mode.spec.axis_labels.size() == kAttributeCount);
  // In every attribute table beta leads alpha, so their ranks are 1 and 2.
  CHECK(rank_mode.spec.series[0].values[0] == 2.0);
  CHECK(rank_mode.spec.series[1].values[0] == 1.0);

  report::RadarExport score_mode = report::export_radar(result, report::RadarMode::kScore, 2);
  CHECK_FALSE(score_mode.spec.invert_axis);
  CHECK(score_mode.spec.series[0].values[0] == 1005.0);
}

TEST_CASE("radar export drops models missing from an attribute table") {
  elo::LeaderboardResult result = tiny_leaderboards(true);
  report::RadarExport out = report::export_radar(result, report::RadarMode::kRank, 3);
  REQUIRE(out.dropped_models.size() == 1);
  CHECK(out.dropped_models[0] == "alpha");
  REQUIRE(out.spec.series.size() == 2);
  CHECK(out.spec.series[0].name == "beta");

  // Missing attribute table is a hard error, not a dropped polygon.
  elo::LeaderboardResult broken = tiny_leaderboards();
  broken.tables.erase(elo::Basis{Attribute::kConciseness});
  CHECK_THROWS_AS(report::export_radar(broken, report::RadarMode::kRank, 3), DataError);

  elo::LeaderboardResult no_human = tiny_leaderboards();
  no_human.tables.erase(elo::Basis{});
  CHECK_THROWS_AS(report::export_radar(no_human, report::RadarMode::kRank, 3), DataError);
}

TEST_CASE("chart validation rejects malformed specs") {
  report::ChartSpec spec;
  spec.kind = report::ChartKind::kRadar;
  spec.title = "bad";
  CHECK_THROWS_AS(report::validate(spec), DataError);  // no series at all

  for (Attribute a : all_attributes()) {
    spec.axis_labels.push_back(std::string(attribute_name(a)));
  }
  spec.series.push_back({"m", std::vector<double>(11, 1.0)});
  CHECK_THROWS_AS(report::validate(spec), DataError);  // 11 values on 12 axes
  spec.series[0].values.push_back(1.0);
  CHECK_NOTHROW(report::validate(spec));

  std::swap(spec.axis_labels[0], spec.axis_labels[1]);
  CHECK_THROWS_AS(report::validate(spec), DataError);  // non-canonical order

  report::ChartSpec box;
  box.kind = report::ChartKind::kBox;
  box.title = "box";
  box.axis_labels = {"min", "q1", "median", "q3", "max"};
  box.series.push_back({"s", {1.0, 2.0, 3.0}});
  CHECK_THROWS_AS(report::validate(box), DataError);

  report::ChartSpec bar;
  bar.kind = report::ChartKind::kBar;
  bar.title = "bar";
  bar.axis_labels = {"a", "b"};
  bar.series.push_back({"values", {1.0}});
  CHECK_THROWS_AS(report::validate(bar), DataError);  // length mismatch

  report::ChartSpec bee;
  bee.kind = report::ChartKind::kBeeswarm;
  bee.title = "bee";
  bee.axis_labels = {"a"};
  bee.series.push_back({"a phi", {1.0}});
  CHECK_THROWS_AS(report::validate(bee), DataError);  // phi without value series
}

TEST_CASE("svg rendering is deterministic and self-describing") {
  DiffFixture fx = diff_fixture();
  report::DiffDistribution diff = report::export_diff_distribution(fx.pairs, fx.cards);
  report::ChartSpec spec = report::diff_box_chart(diff);

  std::string svg = report::render_svg(spec);
  CHECK(svg == report::render_svg(spec));
  CHECK(svg.find("<svg xmlns=") != std::string::npos);
  CHECK(svg.find("<metadata id=\"chart-data\">") != std::string::npos);
  CHECK(svg.find("Chosen minus rejected") != std::string::npos);
  CHECK(svg.find("width=\"800.00\"") != std::string::npos);
  CHECK(svg.find("height=\"600.00\"") != std::string::npos);

  testsup::TempDir tmp;
  auto path = tmp.path() / "chart.svg";
  report::render_svg_file(spec, path);
  CHECK(testsup::read_file(path) == svg);
}

TEST_CASE("radar svg shows all twelve axis labels") {
  elo::LeaderboardResult result = tiny_leaderboards();
  report::RadarExport radar = report::export_radar(result, report::RadarMode::kRank, 3);
  std::string svg = report::render_svg(radar.spec);
  for (Attribute a : all_attributes()) {
    std::string label = ">" + std::string(attribute_name(a)) + "<";
    CHECK_MESSAGE(count_occurrences(svg, label) >= 1, "missing axis label for "
                                                          << attribute_name(a));
  }
  // Legend carries every polygon name.
  for (const char* model : {"alpha", "beta", "gamma"}) {
    CHECK(svg.find(model) != std::string::npos);
  }
}

TEST_CASE("all chart kinds render through the same entry point") {
  DiffFixture fx = diff_fixture();
  report::DiffDistribution diff = report::export_diff_distribution(fx.pairs, fx.cards);
  report::ScoreDensity density = report::export_score_density(fx.pairs, fx.cards);

  shap::AttributionResult result;
  result.per_instance = {{}};
  result.mean_abs[3] = 0.2;
  auto importance = shap::attribute_importance(result);
  std::vector<FeatureVector> features(1);
  auto bee = shap::export_beeswarm(result, features);

  elo::LeaderboardResult boards = tiny_leaderboards();

  for (const report::ChartSpec& spec :
       {report::diff_box_chart(diff), report::density_chart(density, Attribute::kCorrectness),
        report::importance_bar_chart(importance), report::beeswarm_chart(bee),
        report::leaderboard_bar_chart(boards.tables.at(elo::Basis{})),
        report::export_radar(boards, report::RadarMode::kScore, 3).spec}) {
    std::string svg = report::render_svg(spec);
    CHECK(svg.substr(0, 4) == "<svg");
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("<metadata id=\"chart-data\">") != std::string::npos);
  }
}

TEST_CASE("chart kind names are stable") {
  CHECK(report::chart_kind_name(report::ChartKind::kRadar) == "radar");
  CHECK(report::chart_kind_name(report::ChartKind::kBar) == "bar");
  CHECK(report::chart_kind_name(report::ChartKind::kBox) == "box");
  CHECK(report::chart_kind_name(report::ChartKind::kDensity) == "density");
  CHECK(report::chart_kind_name(report::ChartKind::kBeeswarm) == "beeswarm");
}
