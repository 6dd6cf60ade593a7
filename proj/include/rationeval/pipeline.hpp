#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <vector>

#include "rationeval/config.hpp"
#include "rationeval/elo.hpp"
#include "rationeval/panel.hpp"

namespace rationeval::pipeline {

// Fixed artifact layout under the output directory.
struct StagePaths {
  std::filesystem::path out;

  std::filesystem::path pairs() const { return out / "pairs.jsonl"; }
  std::filesystem::path decisions() const { return out / "decisions.jsonl"; }
  std::filesystem::path verdicts() const { return out / "verdicts.jsonl"; }
  std::filesystem::path model() const { return out / "model.json"; }
  std::filesystem::path ranks() const { return out / "ranks.json"; }
  std::filesystem::path shap_metadata() const { return out / "shap_metadata.json"; }
  std::filesystem::path tables() const { return out / "tables"; }
  std::filesystem::path charts() const { return out / "charts"; }
  std::filesystem::path run_meta() const { return out / "run.json"; }

  std::filesystem::path table(const std::string& name) const {
    return tables() / (name + ".csv");
  }
  std::filesystem::path chart(const std::string& name) const {
    return charts() / (name + ".svg");
  }
};

// Panel-mean cards per scored pair; pairs with an empty side are skipped.
std::map<std::string, elo::PairCards> panel_mean_cards(
    const std::vector<judge::PairScore>& scores);

// Per-attribute panel-mean differences (side a minus side b) and soft labels
// for the scored subset of `pairs`, in pair order.
struct TrainingData {
  std::vector<FeatureVector> features;
  std::vector<double> labels;
  std::vector<std::string> pair_ids;
};

TrainingData build_training_data(const std::vector<PreferencePair>& pairs,
                                 const std::map<std::string, elo::PairCards>& cards);

// Appends the mirrored copy (-diff, 1 - label) of every sample.
void symmetrize(TrainingData& data);

// lowercase, non-alphanumerics collapsed to '_'
std::string slug(const std::string& name);

void cmd_filter(const config::RunConfig& cfg);
void cmd_judge(const config::RunConfig& cfg);
void cmd_train(const config::RunConfig& cfg);
void cmd_shap(const config::RunConfig& cfg);
void cmd_elo(const config::RunConfig& cfg);
void cmd_report(const config::RunConfig& cfg,
                const std::optional<Attribute>& only = std::nullopt);
void cmd_all(const config::RunConfig& cfg,
             const std::optional<Attribute>& only = std::nullopt);

}  // namespace rationeval::pipeline
