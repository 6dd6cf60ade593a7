#include "rationeval/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "rationeval/csv.hpp"
#include "rationeval/errors.hpp"
#include "rationeval/gbdt.hpp"
#include "rationeval/hashing.hpp"
#include "rationeval/report.hpp"
#include "rationeval/shapley.hpp"

namespace rationeval::pipeline {

namespace {

void require_artifact(const std::filesystem::path& path, const std::string& stage) {
  if (!std::filesystem::is_regular_file(path)) {
    throw DataError("missing artifact " + path.string() + "; run stage '" + stage + "' first");
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed: " + path.string());
}

void write_json(const std::filesystem::path& path, const ojson& doc) {
  write_text(path, doc.dump(2) + "\n");
}

ojson read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return ojson::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

// Records provenance after each stage: config echo, input hashes, model and
// cache state, completed stage list. Output paths never appear, so replay
// trees rooted elsewhere stay byte-identical.
void update_run_meta(const config::RunConfig& cfg, const std::string& stage) {
  StagePaths paths{cfg.out_dir};
  ojson doc;
  doc["format"] = "rationeval-run";
  doc["version"] = 1;
  std::vector<std::string> stages;
  if (std::filesystem::is_regular_file(paths.run_meta())) {
    ojson previous = read_json(paths.run_meta());
    if (previous.contains("stages") && previous["stages"].is_array()) {
      for (const auto& s : previous["stages"]) stages.push_back(s.get<std::string>());
    }
  }
  if (std::find(stages.begin(), stages.end(), stage) == stages.end()) {
    stages.push_back(stage);
  }
  doc["stages"] = stages;
  doc["config"] = cfg.to_json();
  ojson inputs = ojson::object();
  for (const auto& dataset : cfg.datasets) {
    inputs[dataset.path.generic_string()] = sha256_file(dataset.path);
  }
  doc["inputs"] = std::move(inputs);
  doc["model_sha256"] = std::filesystem::is_regular_file(paths.model())
                            ? ojson(sha256_file(paths.model()))
                            : ojson(nullptr);
  doc["cache_sha256"] = std::filesystem::is_directory(cfg.cache_dir)
                            ? ojson(sha256_tree(cfg.cache_dir))
                            : ojson(nullptr);
  write_json(paths.run_meta(), doc);
}

std::vector<PreferencePair> load_all_datasets(const config::RunConfig& cfg) {
  std::vector<PreferencePair> pairs;
  std::map<std::string, int> seen;
  for (const auto& dataset : cfg.datasets) {
    for (PreferencePair& pair : ingest::load_pairs(dataset.path, dataset.format)) {
      int& count = seen[pair.pair_id];
      ++count;
      if (count > 1) pair.pair_id += "#" + std::to_string(count);
      pairs.push_back(std::move(pair));
    }
  }
  if (pairs.empty()) throw DataError("datasets contain no pairs");
  return pairs;
}

const judge::JudgeConfig& find_judge(const config::RunConfig& cfg, const std::string& id) {
  for (const auto& j : cfg.judges) {
    if (j.judge_id == id) return j;
  }
  throw ConfigError("judge " + id + " is not on the panel");
}

std::vector<PreferencePair> load_filtered_pairs(const config::RunConfig& cfg) {
  StagePaths paths{cfg.out_dir};
  require_artifact(paths.pairs(), "filter");
  return ingest::pairs_from_jsonl_file(paths.pairs());
}

std::vector<judge::PairScore> load_verdict_store(const config::RunConfig& cfg) {
  StagePaths paths{cfg.out_dir};
  require_artifact(paths.verdicts(), "judge");
  return judge::load_verdicts(paths.verdicts());
}

ScoreCard mean_card(const std::vector<JudgeVerdict>& verdicts) {
  ScoreCard card;
  for (Attribute a : all_attributes()) {
    double total = 0.0;
    for (const JudgeVerdict& v : verdicts) total += v.card.at(a);
    card.set(a, total / static_cast<double>(verdicts.size()));
  }
  return card;
}

}  // namespace

std::map<std::string, elo::PairCards> panel_mean_cards(
    const std::vector<judge::PairScore>& scores) {
  std::map<std::string, elo::PairCards> cards;
  for (const judge::PairScore& score : scores) {
    if (!score.scored()) continue;
    cards[score.pair_id] = {mean_card(score.a.verdicts), mean_card(score.b.verdicts)};
  }
  return cards;
}

TrainingData build_training_data(const std::vector<PreferencePair>& pairs,
                                 const std::map<std::string, elo::PairCards>& cards) {
  TrainingData data;
  for (const PreferencePair& pair : pairs) {
    auto it = cards.find(pair.pair_id);
    if (it == cards.end()) continue;
    FeatureVector diff{};
    for (Attribute a : all_attributes()) {
      diff[attribute_index(a)] = it->second.a.at(a) - it->second.b.at(a);
    }
    data.features.push_back(diff);
    data.labels.push_back(verdict_label(pair.human_verdict));
    data.pair_ids.push_back(pair.pair_id);
  }
  if (data.features.empty()) {
    throw DataError("no scored pairs available; run stage 'judge' first");
  }
  return data;
}

void symmetrize(TrainingData& data) {
  const std::size_t n = data.features.size();
  for (std::size_t i = 0; i < n; ++i) {
    FeatureVector mirrored;
    for (std::size_t f = 0; f < kAttributeCount; ++f) mirrored[f] = -data.features[i][f];
    data.features.push_back(mirrored);
    data.labels.push_back(1.0 - data.labels[i]);
    data.pair_ids.push_back(data.pair_ids[i] + "/mirror");
  }
}

std::string slug(const std::string& name) {
  std::string out;
  bool pending = false;
  for (char c : name) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      if (pending && !out.empty()) out += '_';
      pending = false;
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else {
      pending = true;
    }
  }
  return out;
}

void cmd_filter(const config::RunConfig& cfg) {
  StagePaths paths{cfg.out_dir};
  std::vector<PreferencePair> pairs = load_all_datasets(cfg);

  const judge::JudgeConfig& classifier = find_judge(cfg, cfg.filter_judge);
  judge::ChatClient client(cfg.cache_dir, cfg.offline);
  const std::string& prompt_template = ingest::filter_prompt_template();
  ingest::CategoryFn classify = [&](const std::string& question) {
    std::string prompt = prompt_template;
    auto at = prompt.find("{question}");
    if (at == std::string::npos) throw InternalError("filter prompt lost its placeholder");
    prompt.replace(at, std::string("{question}").size(), question);
    return client.call_judge(classifier, prompt);
  };
  ingest::FilterResult result = ingest::filter_reasoning_pairs(pairs, classify, cfg.filter);
  if (result.kept.empty()) {
    if (cfg.offline && result.undecided == pairs.size()) {
      throw EndpointError("offline run with a cold judge cache; run once online to prime it");
    }
    throw DataError("reasoning filter kept no pairs; check [filter] keep categories");
  }

  std::filesystem::create_directories(cfg.out_dir);
  write_text(paths.decisions(), ingest::decisions_to_jsonl(result.decisions));
  ingest::save_pairs(result.kept, paths.pairs());
  update_run_meta(cfg, "filter");
  std::cerr << "filter: kept " << result.kept.size() << "/" << pairs.size() << " pairs ("
            << result.dropped << " dropped, " << result.undecided << " undecided)\n";
}

void cmd_judge(const config::RunConfig& cfg) {
  StagePaths paths{cfg.out_dir};
  std::vector<PreferencePair> pairs = load_filtered_pairs(cfg);

  judge::ChatClient client(cfg.cache_dir, cfg.offline);
  auto templates = judge::default_templates(cfg.judges);
  std::vector<judge::PairScore> scores;
  scores.reserve(pairs.size());
  std::size_t failures = 0;
  std::size_t successes = 0;
  for (const PreferencePair& pair : pairs) {
    scores.push_back(
        judge::score_pair_with_panel(client, pair, cfg.judges, templates, cfg.panel));
    failures += scores.back().a.failures.size() + scores.back().b.failures.size();
    successes += scores.back().a.verdicts.size() + scores.back().b.verdicts.size();
  }
  if (successes == 0 && !pairs.empty()) {
    if (cfg.offline) {
      throw EndpointError("offline run with a cold judge cache; run once online to prime it");
    }
    throw DataError("every judge call failed; inspect the endpoint and retry");
  }
  judge::save_verdicts(paths.verdicts(), scores);
  update_run_meta(cfg, "judge");
  std::cerr << "judge: scored " << pairs.size() << " pairs with " << cfg.judges.size()
            << " judge(s), " << failures << " failed call(s), " << client.network_calls()
            << " network call(s), " << client.cache_hits() << " cache hit(s)\n";
}

void cmd_train(const config::RunConfig& cfg) {
  StagePaths paths{cfg.out_dir};
  std::vector<PreferencePair> pairs = load_filtered_pairs(cfg);
  auto cards = panel_mean_cards(load_verdict_store(cfg));

  TrainingData data = build_training_data(pairs, cards);
  symmetrize(data);
  gbdt::Ensemble model = gbdt::train(data.features, data.labels, cfg.train);

  // Newton steps on the full gradient cannot increase the training loss;
  // subsampled rounds may, so the guard only applies to exact fits.
  if (cfg.train.subsample >= 1.0) {
    for (std::size_t i = 1; i < model.train_loss.size(); ++i) {
      if (model.train_loss[i] > model.train_loss[i - 1] + 1e-12) {
        throw InternalError("training loss increased at round " + std::to_string(i));
      }
    }
  }

  model.save(paths.model());
  gbdt::Metrics metrics = gbdt::evaluate(model, data.features, data.labels);
  update_run_meta(cfg, "train");
  std::cerr << "train: " << data.features.size() << " samples (mirrored), accuracy "
            << metrics.accuracy << ", log loss " << metrics.log_loss << "\n";
}

void cmd_shap(const config::RunConfig& cfg) {
  StagePaths paths{cfg.out_dir};
  require_artifact(paths.model(), "train");
  std::vector<PreferencePair> pairs = load_filtered_pairs(cfg);
  auto cards = panel_mean_cards(load_verdict_store(cfg));
  gbdt::Ensemble model = gbdt::Ensemble::load(paths.model());

  TrainingData data = build_training_data(pairs, cards);
  shap::Background background =
      shap::sample_background(data.features, cfg.attribution.background_size,
                              cfg.attribution.seed);
  shap::AttributionResult result = shap::attribute_shapley(model, data.features, background);
  auto importance = shap::attribute_importance(result);
  auto beeswarm = shap::export_beeswarm(result, data.features);

  csv::write(paths.table("shap_importance"), report::importance_table(importance, result));
  csv::write(paths.table("shap_beeswarm"), report::beeswarm_table(beeswarm));
  ojson meta;
  meta["format"] = "rationeval-shap-metadata";
  meta["version"] = 1;
  meta["base_value"] = result.base_value;
  meta["background_rows"] = background.rows.size();
  meta["background_origin"] = background.origin;
  meta["instances"] = result.per_instance.size();
  write_json(paths.shap_metadata(), meta);
  update_run_meta(cfg, "shap");
  std::cerr << "shap: " << result.per_instance.size() << " instances against "
            << background.rows.size() << " background rows; top attribute "
            << attribute_name(importance.front().attribute) << "\n";
}

void cmd_elo(const config::RunConfig& cfg) {
  StagePaths paths{cfg.out_dir};
  std::vector<PreferencePair> pairs = load_filtered_pairs(cfg);
  auto cards = panel_mean_cards(load_verdict_store(cfg));

  elo::LeaderboardResult leaderboards =
      elo::per_attribute_leaderboard(pairs, cards, cfg.elo, cfg.tie_epsilon);
  csv::write(paths.table("leaderboard"), report::leaderboard_table(leaderboards));
  write_json(paths.ranks(), elo::ranks_json(leaderboards));
  update_run_meta(cfg, "elo");
  std::cerr << "elo: " << leaderboards.tables.size() << " leaderboards, "
            << leaderboards.skipped_pairs << " unscored pair(s) skipped\n";
}

void cmd_report(const config::RunConfig& cfg, const std::optional<Attribute>& only) {
  StagePaths paths{cfg.out_dir};
  std::vector<PreferencePair> pairs = load_filtered_pairs(cfg);
  auto cards = panel_mean_cards(load_verdict_store(cfg));
  require_artifact(paths.table("shap_importance"), "shap");
  require_artifact(paths.table("shap_beeswarm"), "shap");
  require_artifact(paths.table("leaderboard"), "elo");

  report::DiffDistribution diff = report::export_diff_distribution(pairs, cards);
  csv::write(paths.table("diff_samples"), report::diff_samples_table(diff));
  csv::write(paths.table("diff_summary"), report::diff_summary_table(diff));
  report::ScoreDensity density = report::export_score_density(pairs, cards);
  csv::write(paths.table("density_samples"), report::density_samples_table(density));
  csv::write(paths.table("density_bins"), report::density_bins_table(density));

  // Charts render from the data files just written, never from live state:
  // re-rendering from <out>/tables alone reproduces every SVG byte.
  diff = report::diff_from_samples_table(csv::read(paths.table("diff_samples")));
  density = report::density_from_samples_table(csv::read(paths.table("density_samples")));
  auto importance = report::importance_from_table(csv::read(paths.table("shap_importance")));
  auto beeswarm = report::beeswarm_from_table(csv::read(paths.table("shap_beeswarm")));
  elo::LeaderboardResult leaderboards =
      report::leaderboards_from_table(csv::read(paths.table("leaderboard")));

  std::filesystem::create_directories(paths.charts());
  report::render_svg_file(report::diff_box_chart(diff), paths.chart("diff_box"));
  report::render_svg_file(report::importance_bar_chart(importance),
                          paths.chart("shap_importance"));
  report::render_svg_file(report::beeswarm_chart(beeswarm), paths.chart("shap_beeswarm"));
  for (Attribute a : all_attributes()) {
    if (only && *only != a) continue;
    report::render_svg_file(report::density_chart(density, a),
                            paths.chart("density_" + slug(std::string(attribute_name(a)))));
  }
  for (const auto& [basis, table] : leaderboards.tables) {
    if (only && !(basis.human() || *basis.attribute == *only)) continue;
    report::render_svg_file(report::leaderboard_bar_chart(table),
                            paths.chart("elo_" + slug(basis.to_string())));
  }
  for (auto mode : {report::RadarMode::kRank, report::RadarMode::kScore}) {
    report::RadarExport radar = report::export_radar(leaderboards, mode);
    for (const std::string& model : radar.dropped_models) {
      std::cerr << "warning: radar polygon dropped for " << model
                << " (absent from some attribute table)\n";
    }
    report::render_svg_file(radar.spec,
                            paths.chart(mode == report::RadarMode::kRank ? "radar_rank"
                                                                         : "radar_score"));
  }
  update_run_meta(cfg, "report");
  std::cerr << "report: tables and charts written under " << cfg.out_dir.string() << "\n";
}

void cmd_all(const config::RunConfig& cfg, const std::optional<Attribute>& only) {
  cmd_filter(cfg);
  cmd_judge(cfg);
  cmd_train(cfg);
  cmd_shap(cfg);
  cmd_elo(cfg);
  cmd_report(cfg, only);
}

}  // namespace rationeval::pipeline
