#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "rationeval/attributes.hpp"
#include "rationeval/csv.hpp"
#include "rationeval/elo.hpp"
#include "rationeval/shapley.hpp"
#include "rationeval/types.hpp"

namespace rationeval::report {

enum class ChartKind { kRadar, kBar, kBox, kDensity, kBeeswarm };

std::string chart_kind_name(ChartKind kind);

struct Series {
  std::string name;
  std::vector<double> values;
};

struct ChartSpec {
  ChartKind kind = ChartKind::kBar;
  std::string title;
  std::vector<Series> series;
  std::vector<std::string> axis_labels;
  // Radar rank mode: low values plot outermost.
  bool invert_axis = false;
};

// Kind-specific shape rules; renderers call this first.
//  radar    12 axes in canonical attribute order, series lengths match
//  bar      series "values" per axis label; optional ci_low/ci_high whiskers
//  box      every series is a five-number summary
//  density  series lengths match the bin-label count
//  beeswarm series in (phi, feature value) pairs per axis label
void validate(const ChartSpec& spec);

struct FiveNumber {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

FiveNumber five_number(const std::vector<double>& values);

// Chosen-minus-rejected panel-mean gaps per attribute, one sample per decided
// pair. Tie verdicts cannot name a chosen side; they are counted, not used.
struct DiffDistribution {
  std::vector<std::string> pair_ids;
  std::array<std::vector<double>, kAttributeCount> samples;
  std::size_t ties_excluded = 0;
};

DiffDistribution export_diff_distribution(std::span<const PreferencePair> pairs,
                                          const std::map<std::string, elo::PairCards>& cards);

csv::Table diff_summary_table(const DiffDistribution& diff);
csv::Table diff_samples_table(const DiffDistribution& diff);
DiffDistribution diff_from_samples_table(const csv::Table& table);
ChartSpec diff_box_chart(const DiffDistribution& diff);

// Raw chosen/rejected score samples per attribute plus fixed 32-bin
// histograms over [0,1]; no kernel smoothing.
struct ScoreDensity {
  static constexpr int kBins = 32;
  std::vector<std::string> pair_ids;
  std::array<std::vector<double>, kAttributeCount> chosen;
  std::array<std::vector<double>, kAttributeCount> rejected;
  std::size_t ties_excluded = 0;
};

ScoreDensity export_score_density(std::span<const PreferencePair> pairs,
                                  const std::map<std::string, elo::PairCards>& cards);

std::array<int, ScoreDensity::kBins> histogram32(const std::vector<double>& values);

csv::Table density_samples_table(const ScoreDensity& density);
ScoreDensity density_from_samples_table(const csv::Table& table);
csv::Table density_bins_table(const ScoreDensity& density);
ChartSpec density_chart(const ScoreDensity& density, Attribute attribute);

csv::Table importance_table(const std::vector<shap::ImportanceRow>& rows,
                            const shap::AttributionResult& result);
std::vector<shap::ImportanceRow> importance_from_table(const csv::Table& table);
csv::Table beeswarm_table(const std::vector<shap::BeeswarmRow>& rows);
std::vector<shap::BeeswarmRow> beeswarm_from_table(const csv::Table& table);
ChartSpec importance_bar_chart(const std::vector<shap::ImportanceRow>& rows);
ChartSpec beeswarm_chart(const std::vector<shap::BeeswarmRow>& rows);

csv::Table leaderboard_table(const elo::LeaderboardResult& leaderboards);
elo::LeaderboardResult leaderboards_from_table(const csv::Table& table);
ChartSpec leaderboard_bar_chart(const elo::RatingTable& table);

enum class RadarMode { kRank, kScore };

struct RadarExport {
  ChartSpec spec;
  std::vector<std::string> dropped_models;  // absent from some attribute table
};

// One polygon per model across the 12 attribute tables; models picked by
// human-preference rank, best `top_k` kept.
RadarExport export_radar(const elo::LeaderboardResult& leaderboards, RadarMode mode,
                         std::size_t top_k = 7);

// Deterministic bytes: fixed canvas, fixed palette, no timestamps; the
// chart's data table is embedded in a <metadata> block for audit.
std::string render_svg(const ChartSpec& spec);
void render_svg_file(const ChartSpec& spec, const std::filesystem::path& path);

}  // namespace rationeval::report
