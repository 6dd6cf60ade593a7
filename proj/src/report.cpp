#include "rationeval/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "rationeval/core.hpp"
#include "rationeval/errors.hpp"

namespace rationeval::report {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 600.0;

const std::array<const char*, 10> kPalette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                              "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                              "#bcbd22", "#17becf"};

// Fixed two decimals for geometry; exact shortest form stays in the data
// tables and the metadata block.
std::string fmt2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string esc(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

const char* palette(std::size_t i) { return kPalette[i % kPalette.size()]; }

struct Range {
  double lo = 0.0;
  double hi = 1.0;

  double t(double v) const { return hi == lo ? 0.5 : (v - lo) / (hi - lo); }
};

Range value_range(const ChartSpec& spec, bool include_zero) {
  bool first = true;
  Range r;
  for (const Series& s : spec.series) {
    for (double v : s.values) {
      if (first) {
        r.lo = r.hi = v;
        first = false;
      } else {
        r.lo = std::min(r.lo, v);
        r.hi = std::max(r.hi, v);
      }
    }
  }
  if (include_zero) {
    r.lo = std::min(r.lo, 0.0);
    r.hi = std::max(r.hi, 0.0);
  }
  return r;
}

const Series* find_series(const ChartSpec& spec, const std::string& name) {
  for (const Series& s : spec.series) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

}  // namespace

std::string chart_kind_name(ChartKind kind) {
  switch (kind) {
    case ChartKind::kRadar: return "radar";
    case ChartKind::kBar: return "bar";
    case ChartKind::kBox: return "box";
    case ChartKind::kDensity: return "density";
    case ChartKind::kBeeswarm: return "beeswarm";
  }
  throw InternalError("unreachable chart kind");
}

void validate(const ChartSpec& spec) {
  if (spec.series.empty()) throw DataError("chart \"" + spec.title + "\": no series");
  switch (spec.kind) {
    case ChartKind::kRadar: {
      if (spec.axis_labels.size() != kAttributeCount) {
        throw DataError("radar chart needs exactly 12 axes");
      }
      for (std::size_t i = 0; i < kAttributeCount; ++i) {
        if (spec.axis_labels[i] != attribute_name(all_attributes()[i])) {
          throw DataError("radar axes must follow canonical attribute order");
        }
      }
      for (const Series& s : spec.series) {
        if (s.values.size() != kAttributeCount) {
          throw DataError("radar series " + s.name + " must have 12 values");
        }
      }
      break;
    }
    case ChartKind::kBar: {
      if (spec.axis_labels.empty()) throw DataError("bar chart needs axis labels");
      for (std::size_t i = 0; i < spec.series.size(); ++i) {
        const Series& s = spec.series[i];
        if (s.values.size() != spec.axis_labels.size()) {
          throw DataError("bar series " + s.name + " length differs from axis labels");
        }
        if (i > 0 && s.name != "ci_low" && s.name != "ci_high" && s.name != "direction_sign") {
          throw DataError("bar chart: unexpected extra series " + s.name);
        }
      }
      break;
    }
    case ChartKind::kBox: {
      if (spec.series.empty()) throw DataError("box chart needs series");
      for (const Series& s : spec.series) {
        if (s.values.size() != 5) {
          throw DataError("box series " + s.name + " must hold five numbers");
        }
      }
      break;
    }
    case ChartKind::kDensity: {
      if (spec.axis_labels.empty()) throw DataError("density chart needs bin labels");
      for (const Series& s : spec.series) {
        if (s.values.size() != spec.axis_labels.size()) {
          throw DataError("density series " + s.name + " length differs from bins");
        }
      }
      break;
    }
    case ChartKind::kBeeswarm: {
      if (spec.axis_labels.empty()) throw DataError("beeswarm chart needs axis labels");
      if (spec.series.size() != 2 * spec.axis_labels.size()) {
        throw DataError("beeswarm chart needs a (phi, value) series pair per axis");
      }
      for (std::size_t i = 0; i < spec.axis_labels.size(); ++i) {
        if (spec.series[2 * i].values.size() != spec.series[2 * i + 1].values.size()) {
          throw DataError("beeswarm phi/value lengths differ for " + spec.axis_labels[i]);
        }
      }
      break;
    }
  }
}

FiveNumber five_number(const std::vector<double>& values) {
  if (values.empty()) throw DataError("five_number of empty sample");
  FiveNumber f;
  f.min = quantile_type7(values, 0.0);
  f.q1 = quantile_type7(values, 0.25);
  f.median = quantile_type7(values, 0.5);
  f.q3 = quantile_type7(values, 0.75);
  f.max = quantile_type7(values, 1.0);
  return f;
}

namespace {

// chosen side of a decided pair, or nullopt on ties.
std::optional<ingest::Side> chosen_side(const PreferencePair& pair) {
  switch (pair.human_verdict) {
    case Verdict::kAWins: return ingest::Side::kA;
    case Verdict::kBWins: return ingest::Side::kB;
    case Verdict::kTie:
    case Verdict::kTieBothBad: return std::nullopt;
  }
  throw InternalError("unreachable verdict");
}

}  // namespace

DiffDistribution export_diff_distribution(std::span<const PreferencePair> pairs,
                                          const std::map<std::string, elo::PairCards>& cards) {
  DiffDistribution diff;
  for (const PreferencePair& pair : pairs) {
    auto it = cards.find(pair.pair_id);
    if (it == cards.end()) continue;
    auto side = chosen_side(pair);
    if (!side) {
      ++diff.ties_excluded;
      continue;
    }
    const ScoreCard& chosen = *side == ingest::Side::kA ? it->second.a : it->second.b;
    const ScoreCard& rejected = *side == ingest::Side::kA ? it->second.b : it->second.a;
    diff.pair_ids.push_back(pair.pair_id);
    for (Attribute a : all_attributes()) {
      diff.samples[attribute_index(a)].push_back(chosen.at(a) - rejected.at(a));
    }
  }
  if (diff.pair_ids.empty()) throw DataError("no decided scored pairs to plot");
  return diff;
}

csv::Table diff_summary_table(const DiffDistribution& diff) {
  csv::Table t;
  t.header = {"attribute", "count", "min", "q1", "median", "q3", "max", "ties_excluded"};
  for (Attribute a : all_attributes()) {
    const auto& samples = diff.samples[attribute_index(a)];
    FiveNumber f = five_number(samples);
    t.rows.push_back({std::string(attribute_name(a)), std::to_string(samples.size()),
                      csv::format_double(f.min), csv::format_double(f.q1),
                      csv::format_double(f.median), csv::format_double(f.q3),
                      csv::format_double(f.max), std::to_string(diff.ties_excluded)});
  }
  return t;
}

csv::Table diff_samples_table(const DiffDistribution& diff) {
  csv::Table t;
  t.header = {"pair_id", "attribute", "chosen_minus_rejected"};
  for (std::size_t k = 0; k < diff.pair_ids.size(); ++k) {
    for (Attribute a : all_attributes()) {
      t.rows.push_back({diff.pair_ids[k], std::string(attribute_name(a)),
                        csv::format_double(diff.samples[attribute_index(a)][k])});
    }
  }
  return t;
}

DiffDistribution diff_from_samples_table(const csv::Table& table) {
  DiffDistribution diff;
  std::size_t id_col = table.column("pair_id");
  std::size_t attr_col = table.column("attribute");
  std::size_t value_col = table.column("chosen_minus_rejected");
  std::map<std::string, std::size_t> seen;
  for (const auto& row : table.rows) {
    const std::string& pair_id = row[id_col];
    if (!seen.count(pair_id)) {
      seen.emplace(pair_id, diff.pair_ids.size());
      diff.pair_ids.push_back(pair_id);
    }
    auto attr = parse_attribute(row[attr_col]);
    if (!attr) throw DataError("unknown attribute in samples table: " + row[attr_col]);
    diff.samples[attribute_index(*attr)].push_back(csv::parse_double(row[value_col]));
  }
  for (const auto& samples : diff.samples) {
    if (samples.size() != diff.pair_ids.size()) {
      throw DataError("diff samples table is not a complete pair x attribute grid");
    }
  }
  return diff;
}

ChartSpec diff_box_chart(const DiffDistribution& diff) {
  ChartSpec spec;
  spec.kind = ChartKind::kBox;
  spec.title = "Chosen minus rejected score by attribute";
  spec.axis_labels = {"min", "q1", "median", "q3", "max"};
  for (Attribute a : all_attributes()) {
    FiveNumber f = five_number(diff.samples[attribute_index(a)]);
    spec.series.push_back(
        {std::string(attribute_name(a)), {f.min, f.q1, f.median, f.q3, f.max}});
  }
  return spec;
}

ScoreDensity export_score_density(std::span<const PreferencePair> pairs,
                                  const std::map<std::string, elo::PairCards>& cards) {
  ScoreDensity density;
  for (const PreferencePair& pair : pairs) {
    auto it = cards.find(pair.pair_id);
    if (it == cards.end()) continue;
    auto side = chosen_side(pair);
    if (!side) {
      ++density.ties_excluded;
      continue;
    }
    const ScoreCard& chosen = *side == ingest::Side::kA ? it->second.a : it->second.b;
    const ScoreCard& rejected = *side == ingest::Side::kA ? it->second.b : it->second.a;
    density.pair_ids.push_back(pair.pair_id);
    for (Attribute a : all_attributes()) {
      density.chosen[attribute_index(a)].push_back(chosen.at(a));
      density.rejected[attribute_index(a)].push_back(rejected.at(a));
    }
  }
  if (density.pair_ids.empty()) throw DataError("no decided scored pairs to plot");
  return density;
}

std::array<int, ScoreDensity::kBins> histogram32(const std::vector<double>& values) {
  std::array<int, ScoreDensity::kBins> bins{};
  for (double v : values) {
    if (!(v >= 0.0 && v <= 1.0)) throw DataError("histogram32: value outside [0,1]");
    int bin = std::min(static_cast<int>(v * ScoreDensity::kBins), ScoreDensity::kBins - 1);
    ++bins[bin];
  }
  return bins;
}

csv::Table density_samples_table(const ScoreDensity& density) {
  csv::Table t;
  t.header = {"pair_id", "attribute", "chosen", "rejected"};
  for (std::size_t k = 0; k < density.pair_ids.size(); ++k) {
    for (Attribute a : all_attributes()) {
      std::size_t i = attribute_index(a);
      t.rows.push_back({density.pair_ids[k], std::string(attribute_name(a)),
                        csv::format_double(density.chosen[i][k]),
                        csv::format_double(density.rejected[i][k])});
    }
  }
  return t;
}

ScoreDensity density_from_samples_table(const csv::Table& table) {
  ScoreDensity density;
  std::size_t id_col = table.column("pair_id");
  std::size_t attr_col = table.column("attribute");
  std::size_t chosen_col = table.column("chosen");
  std::size_t rejected_col = table.column("rejected");
  std::map<std::string, std::size_t> seen;
  for (const auto& row : table.rows) {
    if (!seen.count(row[id_col])) {
      seen.emplace(row[id_col], density.pair_ids.size());
      density.pair_ids.push_back(row[id_col]);
    }
    auto attr = parse_attribute(row[attr_col]);
    if (!attr) throw DataError("unknown attribute in density table: " + row[attr_col]);
    std::size_t i = attribute_index(*attr);
    density.chosen[i].push_back(csv::parse_double(row[chosen_col]));
    density.rejected[i].push_back(csv::parse_double(row[rejected_col]));
  }
  for (const auto& samples : density.chosen) {
    if (samples.size() != density.pair_ids.size()) {
      throw DataError("density samples table is not a complete pair x attribute grid");
    }
  }
  return density;
}

csv::Table density_bins_table(const ScoreDensity& density) {
  csv::Table t;
  t.header = {"attribute", "bin", "bin_lo", "bin_hi", "chosen_count", "rejected_count"};
  for (Attribute a : all_attributes()) {
    std::size_t i = attribute_index(a);
    auto chosen = histogram32(density.chosen[i]);
    auto rejected = histogram32(density.rejected[i]);
    for (int b = 0; b < ScoreDensity::kBins; ++b) {
      t.rows.push_back({std::string(attribute_name(a)), std::to_string(b),
                        csv::format_double(b / 32.0), csv::format_double((b + 1) / 32.0),
                        std::to_string(chosen[b]), std::to_string(rejected[b])});
    }
  }
  return t;
}

ChartSpec density_chart(const ScoreDensity& density, Attribute attribute) {
  std::size_t i = attribute_index(attribute);
  ChartSpec spec;
  spec.kind = ChartKind::kDensity;
  spec.title = "Score density (chosen vs rejected): " + std::string(attribute_name(attribute));
  auto chosen = histogram32(density.chosen[i]);
  auto rejected = histogram32(density.rejected[i]);
  Series s_chosen{"chosen", {}};
  Series s_rejected{"rejected", {}};
  for (int b = 0; b < ScoreDensity::kBins; ++b) {
    spec.axis_labels.push_back(csv::format_double((2 * b + 1) / 64.0));
    s_chosen.values.push_back(chosen[b]);
    s_rejected.values.push_back(rejected[b]);
  }
  spec.series.push_back(std::move(s_chosen));
  spec.series.push_back(std::move(s_rejected));
  return spec;
}

csv::Table importance_table(const std::vector<shap::ImportanceRow>& rows,
                            const shap::AttributionResult& result) {
  csv::Table t;
  t.header = {"rank", "attribute", "mean_abs_shap", "direction", "direction_sign"};
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::size_t i = attribute_index(rows[r].attribute);
    t.rows.push_back({std::to_string(r + 1), std::string(attribute_name(rows[r].attribute)),
                      csv::format_double(rows[r].mean_abs),
                      csv::format_double(result.direction[i]),
                      std::to_string(rows[r].direction_sign)});
  }
  return t;
}

std::vector<shap::ImportanceRow> importance_from_table(const csv::Table& table) {
  std::vector<shap::ImportanceRow> rows;
  std::size_t attr_col = table.column("attribute");
  std::size_t mean_col = table.column("mean_abs_shap");
  std::size_t sign_col = table.column("direction_sign");
  for (const auto& row : table.rows) {
    auto attr = parse_attribute(row[attr_col]);
    if (!attr) throw DataError("unknown attribute in importance table: " + row[attr_col]);
    rows.push_back({*attr, csv::parse_double(row[mean_col]),
                    static_cast<int>(csv::parse_double(row[sign_col]))});
  }
  return rows;
}

ChartSpec importance_bar_chart(const std::vector<shap::ImportanceRow>& rows) {
  ChartSpec spec;
  spec.kind = ChartKind::kBar;
  spec.title = "Mean |SHAP| by attribute";
  Series values{"mean_abs_shap", {}};
  Series signs{"direction_sign", {}};
  for (const auto& row : rows) {
    spec.axis_labels.push_back(std::string(attribute_name(row.attribute)));
    values.values.push_back(row.mean_abs);
    signs.values.push_back(row.direction_sign);
  }
  spec.series.push_back(std::move(values));
  spec.series.push_back(std::move(signs));
  return spec;
}

csv::Table beeswarm_table(const std::vector<shap::BeeswarmRow>& rows) {
  csv::Table t;
  t.header = {"instance", "attribute", "phi", "feature_value"};
  for (const auto& row : rows) {
    t.rows.push_back({std::to_string(row.instance), std::string(attribute_name(row.attribute)),
                      csv::format_double(row.phi), csv::format_double(row.feature_value)});
  }
  return t;
}

std::vector<shap::BeeswarmRow> beeswarm_from_table(const csv::Table& table) {
  std::vector<shap::BeeswarmRow> rows;
  std::size_t instance_col = table.column("instance");
  std::size_t attr_col = table.column("attribute");
  std::size_t phi_col = table.column("phi");
  std::size_t value_col = table.column("feature_value");
  for (const auto& row : table.rows) {
    auto attr = parse_attribute(row[attr_col]);
    if (!attr) throw DataError("unknown attribute in beeswarm table: " + row[attr_col]);
    rows.push_back({static_cast<std::size_t>(std::stoull(row[instance_col])), *attr,
                    csv::parse_double(row[phi_col]), csv::parse_double(row[value_col])});
  }
  return rows;
}

ChartSpec beeswarm_chart(const std::vector<shap::BeeswarmRow>& rows) {
  if (rows.empty()) throw DataError("beeswarm chart: no rows");
  ChartSpec spec;
  spec.kind = ChartKind::kBeeswarm;
  spec.title = "SHAP value distribution by attribute";
  std::array<Series, kAttributeCount> phi;
  std::array<Series, kAttributeCount> value;
  for (Attribute a : all_attributes()) {
    std::size_t i = attribute_index(a);
    phi[i].name = std::string(attribute_name(a)) + " phi";
    value[i].name = std::string(attribute_name(a)) + " value";
  }
  for (const auto& row : rows) {
    std::size_t i = attribute_index(row.attribute);
    phi[i].values.push_back(row.phi);
    value[i].values.push_back(row.feature_value);
  }
  for (Attribute a : all_attributes()) {
    std::size_t i = attribute_index(a);
    spec.axis_labels.push_back(std::string(attribute_name(a)));
    spec.series.push_back(std::move(phi[i]));
    spec.series.push_back(std::move(value[i]));
  }
  return spec;
}

csv::Table leaderboard_table(const elo::LeaderboardResult& leaderboards) {
  csv::Table t;
  t.header = {"basis", "model", "rating", "ci_low", "ci_high", "games"};
  for (const auto& [basis, table] : leaderboards.tables) {
    for (const auto& [model, rank] : elo::rank_models(table)) {
      (void)rank;
      t.rows.push_back({basis.to_string(), model, csv::format_double(table.ratings.at(model)),
                        csv::format_double(table.ci_low.at(model)),
                        csv::format_double(table.ci_high.at(model)),
                        std::to_string(table.games_played.at(model))});
    }
  }
  return t;
}

elo::LeaderboardResult leaderboards_from_table(const csv::Table& table) {
  elo::LeaderboardResult result;
  std::size_t basis_col = table.column("basis");
  std::size_t model_col = table.column("model");
  std::size_t rating_col = table.column("rating");
  std::size_t lo_col = table.column("ci_low");
  std::size_t hi_col = table.column("ci_high");
  std::size_t games_col = table.column("games");
  for (const auto& row : table.rows) {
    elo::Basis basis = elo::Basis::from_string(row[basis_col]);
    elo::RatingTable& t = result.tables[basis];
    t.basis = basis;
    const std::string& model = row[model_col];
    t.ratings[model] = csv::parse_double(row[rating_col]);
    t.ci_low[model] = csv::parse_double(row[lo_col]);
    t.ci_high[model] = csv::parse_double(row[hi_col]);
    t.games_played[model] = static_cast<int>(std::stol(row[games_col]));
  }
  if (result.tables.empty()) throw DataError("leaderboard table is empty");
  return result;
}

ChartSpec leaderboard_bar_chart(const elo::RatingTable& table) {
  ChartSpec spec;
  spec.kind = ChartKind::kBar;
  spec.title = "ELO ratings: " + table.basis.to_string();
  Series rating{"rating", {}};
  Series lo{"ci_low", {}};
  Series hi{"ci_high", {}};
  for (const auto& [model, rank] : elo::rank_models(table)) {
    (void)rank;
    spec.axis_labels.push_back(model);
    rating.values.push_back(table.ratings.at(model));
    lo.values.push_back(table.ci_low.at(model));
    hi.values.push_back(table.ci_high.at(model));
  }
  spec.series.push_back(std::move(rating));
  spec.series.push_back(std::move(lo));
  spec.series.push_back(std::move(hi));
  return spec;
}

RadarExport export_radar(const elo::LeaderboardResult& leaderboards, RadarMode mode,
                         std::size_t top_k) {
  auto human = leaderboards.tables.find(elo::Basis{});
  if (human == leaderboards.tables.end()) {
    throw DataError("export_radar: human preference table missing");
  }
  for (Attribute a : all_attributes()) {
    if (!leaderboards.tables.count(elo::Basis{a})) {
      throw DataError("export_radar: missing attribute table " +
                      std::string(attribute_name(a)));
    }
  }

  RadarExport out;
  out.spec.kind = ChartKind::kRadar;
  out.spec.invert_axis = mode == RadarMode::kRank;
  out.spec.title = mode == RadarMode::kRank ? "Per-attribute ELO rank (rank 1 outermost)"
                                            : "Per-attribute ELO rating";
  for (Attribute a : all_attributes()) {
    out.spec.axis_labels.push_back(std::string(attribute_name(a)));
  }

  // rank maps per attribute table, built once
  std::map<Attribute, std::map<std::string, int>> ranks;
  for (Attribute a : all_attributes()) {
    auto& table = leaderboards.tables.at(elo::Basis{a});
    for (const auto& [model, rank] : elo::rank_models(table)) ranks[a][model] = rank;
  }

  std::size_t taken = 0;
  for (const auto& [model, rank] : elo::rank_models(human->second)) {
    (void)rank;
    if (taken >= top_k) break;
    Series series{model, {}};
    bool complete = true;
    for (Attribute a : all_attributes()) {
      const auto& table = leaderboards.tables.at(elo::Basis{a});
      auto it = table.ratings.find(model);
      if (it == table.ratings.end()) {
        complete = false;
        break;
      }
      series.values.push_back(mode == RadarMode::kRank
                                  ? static_cast<double>(ranks.at(a).at(model))
                                  : it->second);
    }
    if (!complete) {
      out.dropped_models.push_back(model);
      continue;
    }
    out.spec.series.push_back(std::move(series));
    ++taken;
  }
  if (out.spec.series.empty()) throw DataError("export_radar: no complete polygons");
  return out;
}

// ---------------------------------------------------------------------------
// SVG rendering

namespace {

std::string svg_head(const ChartSpec& spec) {
  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt2(kWidth) + "\" height=\"" +
         fmt2(kHeight) + "\" viewBox=\"0 0 " + fmt2(kWidth) + " " + fmt2(kHeight) + "\">\n";
  out += "<title>" + esc(spec.title) + "</title>\n";

  ojson meta;
  meta["kind"] = chart_kind_name(spec.kind);
  meta["title"] = spec.title;
  meta["invert_axis"] = spec.invert_axis;
  meta["axis_labels"] = spec.axis_labels;
  ojson series = ojson::array();
  for (const Series& s : spec.series) {
    series.push_back(ojson{{"name", s.name}, {"values", s.values}});
  }
  meta["series"] = std::move(series);
  out += "<metadata id=\"chart-data\">" + esc(meta.dump()) + "</metadata>\n";

  out += "<rect x=\"0\" y=\"0\" width=\"" + fmt2(kWidth) + "\" height=\"" + fmt2(kHeight) +
         "\" fill=\"#ffffff\"/>\n";
  out += "<text x=\"" + fmt2(kWidth / 2) +
         "\" y=\"28\" font-family=\"monospace\" font-size=\"16\" text-anchor=\"middle\">" +
         esc(spec.title) + "</text>\n";
  return out;
}

std::string line(double x1, double y1, double x2, double y2, const std::string& stroke,
                 const std::string& extra = "") {
  return "<line x1=\"" + fmt2(x1) + "\" y1=\"" + fmt2(y1) + "\" x2=\"" + fmt2(x2) + "\" y2=\"" +
         fmt2(y2) + "\" stroke=\"" + stroke + "\"" + extra + "/>\n";
}

std::string text(double x, double y, const std::string& content, int size,
                 const std::string& anchor, const std::string& extra = "") {
  return "<text x=\"" + fmt2(x) + "\" y=\"" + fmt2(y) +
         "\" font-family=\"monospace\" font-size=\"" + std::to_string(size) +
         "\" text-anchor=\"" + anchor + "\"" + extra + ">" + esc(content) + "</text>\n";
}

std::string legend(const std::vector<std::string>& names, double x, double y) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    double row_y = y + 18.0 * static_cast<double>(i);
    out += "<rect x=\"" + fmt2(x) + "\" y=\"" + fmt2(row_y - 9) +
           "\" width=\"12\" height=\"12\" fill=\"" + std::string(palette(i)) + "\"/>\n";
    out += text(x + 18, row_y + 1, names[i], 11, "start");
  }
  return out;
}

std::string render_radar(const ChartSpec& spec) {
  const double cx = 360.0, cy = 320.0, radius = 210.0;
  std::string out = svg_head(spec);

  Range range = value_range(spec, false);
  auto to_radius = [&](double v) {
    double t = range.t(v);
    if (spec.invert_axis) t = 1.0 - t;
    return (0.15 + 0.8 * t) * radius;
  };

  for (double ring : {0.25, 0.5, 0.75, 1.0}) {
    std::string points;
    for (std::size_t k = 0; k < spec.axis_labels.size(); ++k) {
      double angle = -M_PI / 2 + 2 * M_PI * static_cast<double>(k) /
                                     static_cast<double>(spec.axis_labels.size());
      double r = ring * radius;
      points += fmt2(cx + r * std::cos(angle)) + "," + fmt2(cy + r * std::sin(angle)) + " ";
    }
    out += "<polygon points=\"" + points + "\" fill=\"none\" stroke=\"#dddddd\"/>\n";
  }

  for (std::size_t k = 0; k < spec.axis_labels.size(); ++k) {
    double angle = -M_PI / 2 + 2 * M_PI * static_cast<double>(k) /
                                   static_cast<double>(spec.axis_labels.size());
    double ax = cx + radius * std::cos(angle);
    double ay = cy + radius * std::sin(angle);
    out += line(cx, cy, ax, ay, "#bbbbbb");
    double lx = cx + (radius + 26.0) * std::cos(angle);
    double ly = cy + (radius + 26.0) * std::sin(angle);
    out += text(lx, ly + 4, spec.axis_labels[k], 10, "middle");
  }

  std::vector<std::string> names;
  for (std::size_t i = 0; i < spec.series.size(); ++i) {
    const Series& s = spec.series[i];
    names.push_back(s.name);
    std::string points;
    for (std::size_t k = 0; k < s.values.size(); ++k) {
      double angle = -M_PI / 2 + 2 * M_PI * static_cast<double>(k) /
                                     static_cast<double>(s.values.size());
      double r = to_radius(s.values[k]);
      points += fmt2(cx + r * std::cos(angle)) + "," + fmt2(cy + r * std::sin(angle)) + " ";
    }
    out += "<polygon points=\"" + points + "\" fill=\"" + std::string(palette(i)) +
           "\" fill-opacity=\"0.08\" stroke=\"" + std::string(palette(i)) +
           "\" stroke-width=\"2\"/>\n";
  }
  out += legend(names, 660.0, 70.0);
  out += "</svg>\n";
  return out;
}

std::string render_bar(const ChartSpec& spec) {
  const double left = 70.0, right = 740.0, top = 60.0, bottom = 500.0;
  std::string out = svg_head(spec);

  const Series& values = spec.series.front();
  const Series* lo = find_series(spec, "ci_low");
  const Series* hi = find_series(spec, "ci_high");
  const Series* signs = find_series(spec, "direction_sign");

  Range range;
  {
    bool first = true;
    auto feed = [&](double v) {
      if (first) {
        range.lo = range.hi = v;
        first = false;
      } else {
        range.lo = std::min(range.lo, v);
        range.hi = std::max(range.hi, v);
      }
    };
    for (double v : values.values) feed(v);
    if (lo) {
      for (double v : lo->values) feed(v);
    }
    if (hi) {
      for (double v : hi->values) feed(v);
    }
    feed(0.0);
    if (range.hi == range.lo) range.hi = range.lo + 1.0;
  }
  auto to_y = [&](double v) { return bottom - (bottom - top) * range.t(v); };

  out += line(left, to_y(0.0), right, to_y(0.0), "#333333");
  out += text(left - 8, to_y(0.0) + 4, "0", 10, "end");
  out += text(left - 8, top + 4, csv::format_double(range.hi), 10, "end");

  const std::size_t n = spec.axis_labels.size();
  const double slot = (right - left) / static_cast<double>(n);
  const double bar_width = slot * 0.6;
  for (std::size_t k = 0; k < n; ++k) {
    double center = left + slot * (static_cast<double>(k) + 0.5);
    double v = values.values[k];
    double y0 = to_y(std::max(0.0, v));
    double y1 = to_y(std::min(0.0, v));
    out += "<rect x=\"" + fmt2(center - bar_width / 2) + "\" y=\"" + fmt2(y0) + "\" width=\"" +
           fmt2(bar_width) + "\" height=\"" + fmt2(std::max(0.5, y1 - y0)) + "\" fill=\"" +
           std::string(palette(0)) + "\"/>\n";
    if (lo && hi) {
      double wy0 = to_y(hi->values[k]);
      double wy1 = to_y(lo->values[k]);
      out += line(center, wy0, center, wy1, "#333333");
      out += line(center - 6, wy0, center + 6, wy0, "#333333");
      out += line(center - 6, wy1, center + 6, wy1, "#333333");
    }
    out += text(center, to_y(std::max(0.0, v)) - 6, csv::format_double(v), 9, "middle");
    if (signs && signs->values[k] < 0.0) {
      out += text(center, bottom + 46, "Neg", 9, "middle", " fill=\"#d62728\"");
    }
    out += text(center, bottom + 16, spec.axis_labels[k], 9, "end",
                " transform=\"rotate(-35 " + fmt2(center) + " " + fmt2(bottom + 16) + ")\"");
  }
  out += "</svg>\n";
  return out;
}

std::string render_box(const ChartSpec& spec) {
  const double left = 70.0, right = 740.0, top = 60.0, bottom = 500.0;
  std::string out = svg_head(spec);

  Range range = value_range(spec, true);
  if (range.hi == range.lo) range.hi = range.lo + 1.0;
  auto to_y = [&](double v) { return bottom - (bottom - top) * range.t(v); };

  out += line(left, to_y(0.0), right, to_y(0.0), "#999999", " stroke-dasharray=\"4 3\"");
  out += text(left - 8, to_y(0.0) + 4, "0", 10, "end");
  out += text(left - 8, top + 4, csv::format_double(range.hi), 10, "end");
  out += text(left - 8, bottom + 4, csv::format_double(range.lo), 10, "end");

  const std::size_t n = spec.series.size();
  const double slot = (right - left) / static_cast<double>(n);
  const double box_width = slot * 0.5;
  for (std::size_t k = 0; k < n; ++k) {
    const auto& v = spec.series[k].values;  // min q1 median q3 max
    double center = left + slot * (static_cast<double>(k) + 0.5);
    out += line(center, to_y(v[0]), center, to_y(v[1]), "#333333");
    out += line(center, to_y(v[3]), center, to_y(v[4]), "#333333");
    out += line(center - box_width / 4, to_y(v[0]), center + box_width / 4, to_y(v[0]),
                "#333333");
    out += line(center - box_width / 4, to_y(v[4]), center + box_width / 4, to_y(v[4]),
                "#333333");
    out += "<rect x=\"" + fmt2(center - box_width / 2) + "\" y=\"" + fmt2(to_y(v[3])) +
           "\" width=\"" + fmt2(box_width) + "\" height=\"" +
           fmt2(std::max(0.5, to_y(v[1]) - to_y(v[3]))) + "\" fill=\"" +
           std::string(palette(0)) + "\" fill-opacity=\"0.35\" stroke=\"#333333\"/>\n";
    out += line(center - box_width / 2, to_y(v[2]), center + box_width / 2, to_y(v[2]),
                "#d62728", " stroke-width=\"2\"");
    out += text(center, bottom + 16, spec.series[k].name, 9, "end",
                " transform=\"rotate(-35 " + fmt2(center) + " " + fmt2(bottom + 16) + ")\"");
  }
  out += "</svg>\n";
  return out;
}

std::string render_density(const ChartSpec& spec) {
  const double left = 70.0, right = 740.0, top = 60.0, bottom = 500.0;
  std::string out = svg_head(spec);

  Range range = value_range(spec, true);
  if (range.hi == range.lo) range.hi = range.lo + 1.0;
  auto to_y = [&](double v) { return bottom - (bottom - top) * range.t(v); };
  const std::size_t bins = spec.axis_labels.size();
  auto to_x = [&](std::size_t b) {
    return left + (right - left) * (static_cast<double>(b) + 0.5) / static_cast<double>(bins);
  };

  out += line(left, bottom, right, bottom, "#333333");
  out += text(left - 8, top + 4, csv::format_double(range.hi), 10, "end");
  out += text(left - 8, bottom + 4, "0", 10, "end");
  for (std::size_t b = 0; b < bins; b += 8) {
    out += text(to_x(b), bottom + 16, spec.axis_labels[b], 9, "middle");
  }
  if (bins > 0) out += text(to_x(bins - 1), bottom + 16, spec.axis_labels[bins - 1], 9, "middle");

  std::vector<std::string> names;
  for (std::size_t i = 0; i < spec.series.size(); ++i) {
    const Series& s = spec.series[i];
    names.push_back(s.name);
    std::string points;
    for (std::size_t b = 0; b < s.values.size(); ++b) {
      points += fmt2(to_x(b)) + "," + fmt2(to_y(s.values[b])) + " ";
    }
    out += "<polyline points=\"" + points + "\" fill=\"none\" stroke=\"" +
           std::string(palette(i)) + "\" stroke-width=\"2\"/>\n";
  }
  out += legend(names, 660.0, 70.0);
  out += "</svg>\n";
  return out;
}

std::string gradient_color(double t) {
  // #1f77b4 (low) to #d62728 (high)
  auto channel = [&](int lo, int hi) {
    int v = static_cast<int>(std::lround(lo + t * (hi - lo)));
    char buf[8];
    std::snprintf(buf, sizeof buf, "%02x", std::clamp(v, 0, 255));
    return std::string(buf);
  };
  return "#" + channel(0x1f, 0xd6) + channel(0x77, 0x27) + channel(0xb4, 0x28);
}

std::string render_beeswarm(const ChartSpec& spec) {
  const double left = 170.0, right = 740.0, top = 60.0, bottom = 540.0;
  std::string out = svg_head(spec);

  Range range;
  {
    bool first = true;
    for (std::size_t i = 0; i < spec.axis_labels.size(); ++i) {
      for (double v : spec.series[2 * i].values) {
        if (first) {
          range.lo = range.hi = v;
          first = false;
        } else {
          range.lo = std::min(range.lo, v);
          range.hi = std::max(range.hi, v);
        }
      }
    }
    range.lo = std::min(range.lo, 0.0);
    range.hi = std::max(range.hi, 0.0);
    if (range.hi == range.lo) range.hi = range.lo + 1.0;
  }
  auto to_x = [&](double v) { return left + (right - left) * range.t(v); };

  out += line(to_x(0.0), top, to_x(0.0), bottom, "#999999", " stroke-dasharray=\"4 3\"");
  out += text(to_x(0.0), bottom + 16, "0", 10, "middle");
  out += text(to_x(range.lo), bottom + 16, csv::format_double(range.lo), 10, "middle");
  out += text(to_x(range.hi), bottom + 16, csv::format_double(range.hi), 10, "middle");

  const std::size_t n = spec.axis_labels.size();
  const double row_height = (bottom - top) / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    double row_center = top + row_height * (static_cast<double>(i) + 0.5);
    out += text(left - 10, row_center + 3, spec.axis_labels[i], 10, "end");
    const auto& phi = spec.series[2 * i].values;
    const auto& val = spec.series[2 * i + 1].values;
    double vlo = 0.0, vhi = 0.0;
    if (!val.empty()) {
      vlo = *std::min_element(val.begin(), val.end());
      vhi = *std::max_element(val.begin(), val.end());
    }
    for (std::size_t k = 0; k < phi.size(); ++k) {
      double jitter =
          (static_cast<double>((k * 2654435761u) % 2000u) / 2000.0 - 0.5) * row_height * 0.7;
      double t = vhi == vlo ? 0.5 : (val[k] - vlo) / (vhi - vlo);
      out += "<circle cx=\"" + fmt2(to_x(phi[k])) + "\" cy=\"" + fmt2(row_center + jitter) +
             "\" r=\"2.2\" fill=\"" + gradient_color(t) + "\" fill-opacity=\"0.75\"/>\n";
    }
  }
  out += "</svg>\n";
  return out;
}

}  // namespace

std::string render_svg(const ChartSpec& spec) {
  validate(spec);
  switch (spec.kind) {
    case ChartKind::kRadar: return render_radar(spec);
    case ChartKind::kBar: return render_bar(spec);
    case ChartKind::kBox: return render_box(spec);
    case ChartKind::kDensity: return render_density(spec);
    case ChartKind::kBeeswarm: return render_beeswarm(spec);
  }
  throw InternalError("unreachable chart kind");
}

void render_svg_file(const ChartSpec& spec, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << render_svg(spec);
  if (!out) throw DataError("write failed: " + path.string());
}

}  // namespace rationeval::report
