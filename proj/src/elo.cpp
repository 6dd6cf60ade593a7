#include "rationeval/elo.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "rationeval/core.hpp"
#include "rationeval/errors.hpp"
#include "rationeval/rng.hpp"

namespace rationeval::elo {

namespace {

constexpr const char* kHumanBasis = "human_preference";

// One sequential ELO pass in the given order. The paired +delta/-delta makes
// every update conserve total rating exactly.
void run_pass(std::span<const MatchOutcome> outcomes, std::span<const std::size_t> order,
              const EloConfig& config, std::map<std::string, double>& ratings) {
  for (auto& [id, r] : ratings) r = config.initial_rating;
  for (std::size_t i : order) {
    const MatchOutcome& m = outcomes[i];
    double& ra = ratings.at(m.model_a);
    double& rb = ratings.at(m.model_b);
    double delta = config.k_factor * (m.score_a - expected_score(ra, rb, config.scale));
    ra += delta;
    rb -= delta;
  }
}

// Permutation-averaged final ratings for one outcome list.
std::map<std::string, double> averaged_ratings(std::span<const MatchOutcome> outcomes,
                                               std::span<const std::size_t> base_order,
                                               const EloConfig& config, Rng rng) {
  std::map<std::string, double> totals;
  for (std::size_t i : base_order) {
    totals.emplace(outcomes[i].model_a, 0.0);
    totals.emplace(outcomes[i].model_b, 0.0);
  }
  std::map<std::string, double> ratings = totals;
  std::vector<std::size_t> order(base_order.begin(), base_order.end());
  for (int p = 0; p < config.permutations; ++p) {
    order.assign(base_order.begin(), base_order.end());
    Rng perm_rng = rng.fork("perm", static_cast<std::uint64_t>(p));
    perm_rng.shuffle(order);
    run_pass(outcomes, order, config, ratings);
    for (const auto& [id, r] : ratings) totals.at(id) += r;
  }
  for (auto& [id, total] : totals) total /= static_cast<double>(config.permutations);
  return totals;
}

}  // namespace

std::string Basis::to_string() const {
  return attribute ? std::string(attribute_name(*attribute)) : kHumanBasis;
}

Basis Basis::from_string(const std::string& text) {
  if (text == kHumanBasis) return Basis{};
  if (auto attr = parse_attribute(text)) return Basis{*attr};
  throw DataError("unknown rating basis: " + text);
}

MatchOutcome derive_outcome(const PreferencePair& pair, const ScoreCard& card_a,
                            const ScoreCard& card_b, Attribute attribute, double epsilon) {
  if (epsilon < 0.0) throw ConfigError("tie epsilon must be >= 0");
  double diff = card_a.at(attribute) - card_b.at(attribute);
  double score_a = 0.5;
  if (diff > epsilon) {
    score_a = 1.0;
  } else if (diff < -epsilon) {
    score_a = 0.0;
  }
  return {pair.pair_id, pair.side_a.model_id, pair.side_b.model_id, score_a, Basis{attribute}};
}

MatchOutcome derive_human_outcome(const PreferencePair& pair) {
  return {pair.pair_id, pair.side_a.model_id, pair.side_b.model_id,
          verdict_label(pair.human_verdict), Basis{}};
}

double expected_score(double r_a, double r_b, double scale) {
  if (!(scale > 0.0)) throw ConfigError("elo scale must be > 0");
  return 1.0 / (1.0 + std::pow(10.0, (r_b - r_a) / scale));
}

RatingTable run_tournament(std::span<const MatchOutcome> outcomes, const EloConfig& config) {
  if (outcomes.empty()) throw DataError("run_tournament: no outcomes");
  if (!(config.k_factor > 0.0)) throw ConfigError("k_factor must be > 0");
  if (!(config.scale > 0.0)) throw ConfigError("elo scale must be > 0");
  if (config.permutations < 1) throw ConfigError("permutations must be >= 1");
  if (config.bootstrap_samples < 0) throw ConfigError("bootstrap_samples must be >= 0");
  for (const MatchOutcome& m : outcomes) {
    if (m.score_a != 0.0 && m.score_a != 0.5 && m.score_a != 1.0) {
      throw DataError("match " + m.pair_id + ": score_a must be 0, 0.5 or 1");
    }
    if (m.basis != outcomes.front().basis) {
      throw DataError("run_tournament: mixed bases in one tournament");
    }
  }

  RatingTable table;
  table.basis = outcomes.front().basis;

  std::vector<std::size_t> identity(outcomes.size());
  for (std::size_t i = 0; i < identity.size(); ++i) identity[i] = i;

  Rng rng(config.seed);
  table.ratings = averaged_ratings(outcomes, identity, config, rng.fork("point", 0));

  for (const MatchOutcome& m : outcomes) {
    table.games_played[m.model_a] += 1;
    table.games_played[m.model_b] += 1;
  }

  // Bootstrap over resampled outcome lists. A model absent from a resample
  // contributes no sample for that draw.
  std::map<std::string, std::vector<double>> samples;
  for (int s = 0; s < config.bootstrap_samples; ++s) {
    Rng boot_rng = rng.fork("bootstrap", static_cast<std::uint64_t>(s));
    std::vector<std::size_t> resample(outcomes.size());
    for (std::size_t& i : resample) {
      i = static_cast<std::size_t>(boot_rng.below(outcomes.size()));
    }
    auto ratings = averaged_ratings(outcomes, resample, config, boot_rng.fork("avg", 0));
    for (const auto& [id, r] : ratings) samples[id].push_back(r);
  }

  for (const auto& [id, rating] : table.ratings) {
    auto it = samples.find(id);
    if (it == samples.end() || it->second.empty()) {
      table.ci_low[id] = rating;
      table.ci_high[id] = rating;
      continue;
    }
    double lo = quantile_type7(it->second, 0.025);
    double hi = quantile_type7(it->second, 0.975);
    // Percentile intervals need not cover the point estimate; clamp so the
    // published invariant ci_low <= rating <= ci_high always holds.
    table.ci_low[id] = std::min(lo, rating);
    table.ci_high[id] = std::max(hi, rating);
  }
  return table;
}

LeaderboardResult per_attribute_leaderboard(std::span<const PreferencePair> pairs,
                                            const std::map<std::string, PairCards>& cards,
                                            const EloConfig& config, double epsilon) {
  LeaderboardResult result;
  std::vector<const PreferencePair*> scored;
  scored.reserve(pairs.size());
  for (const PreferencePair& pair : pairs) {
    if (cards.count(pair.pair_id)) {
      scored.push_back(&pair);
    } else {
      ++result.skipped_pairs;
    }
  }
  if (scored.empty()) throw DataError("per_attribute_leaderboard: no scored pairs");

  std::vector<MatchOutcome> outcomes;
  outcomes.reserve(scored.size());
  for (const PreferencePair* pair : scored) outcomes.push_back(derive_human_outcome(*pair));
  result.tables.emplace(Basis{}, run_tournament(outcomes, config));

  for (Attribute attribute : all_attributes()) {
    outcomes.clear();
    for (const PreferencePair* pair : scored) {
      const PairCards& pc = cards.at(pair->pair_id);
      outcomes.push_back(derive_outcome(*pair, pc.a, pc.b, attribute, epsilon));
    }
    result.tables.emplace(Basis{attribute}, run_tournament(outcomes, config));
  }
  return result;
}

std::vector<std::pair<std::string, int>> rank_models(const RatingTable& table) {
  std::vector<std::pair<std::string, double>> by_rating(table.ratings.begin(),
                                                        table.ratings.end());
  std::sort(by_rating.begin(), by_rating.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::pair<std::string, int>> ranks;
  ranks.reserve(by_rating.size());
  for (std::size_t i = 0; i < by_rating.size(); ++i) {
    ranks.emplace_back(by_rating[i].first, static_cast<int>(i) + 1);
  }
  return ranks;
}

ojson ranks_json(const LeaderboardResult& leaderboards) {
  ojson doc;
  doc["format"] = "rationeval-ranks";
  doc["version"] = 1;
  doc["skipped_pairs"] = leaderboards.skipped_pairs;
  ojson tables = ojson::array();
  for (const auto& [basis, table] : leaderboards.tables) {
    ojson entry;
    entry["basis"] = basis.to_string();
    ojson models = ojson::array();
    for (const auto& [id, rank] : rank_models(table)) {
      ojson row;
      row["model"] = id;
      row["rank"] = rank;
      row["rating"] = table.ratings.at(id);
      row["ci_low"] = table.ci_low.at(id);
      row["ci_high"] = table.ci_high.at(id);
      row["games"] = table.games_played.at(id);
      models.push_back(std::move(row));
    }
    entry["models"] = std::move(models);
    tables.push_back(std::move(entry));
  }
  doc["tables"] = std::move(tables);
  return doc;
}

}  // namespace rationeval::elo
