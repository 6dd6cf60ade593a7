#include "rationeval/shapley.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>

#include "rationeval/core.hpp"
#include "rationeval/errors.hpp"
#include "rationeval/rng.hpp"

namespace rationeval::shap {

namespace {

constexpr std::size_t kCoalitions = std::size_t{1} << kAttributeCount;

// w[s] = s! (11-s)! / 12!, the Shapley weight of a coalition of size s not
// containing the player. 12! = 479001600 is exact in double.
std::array<double, kAttributeCount> shapley_weights() {
  std::array<double, kAttributeCount + 1> factorial{};
  factorial[0] = 1.0;
  for (std::size_t i = 1; i <= kAttributeCount; ++i) {
    factorial[i] = factorial[i - 1] * static_cast<double>(i);
  }
  std::array<double, kAttributeCount> w{};
  for (std::size_t s = 0; s < kAttributeCount; ++s) {
    w[s] = factorial[s] * factorial[kAttributeCount - 1 - s] / factorial[kAttributeCount];
  }
  return w;
}

double walk_composite(const gbdt::Tree& tree, const FeatureVector& x, const FeatureVector& b,
                      std::uint32_t mask) {
  int i = 0;
  while (!tree.nodes[i].is_leaf()) {
    const gbdt::TreeNode& n = tree.nodes[i];
    double value = (mask >> n.feature) & 1u ? x[n.feature] : b[n.feature];
    i = value < n.threshold ? n.left : n.right;
  }
  return tree.nodes[i].value;
}

}  // namespace

Background sample_background(std::span<const FeatureVector> features, std::size_t max_rows,
                             std::uint64_t seed) {
  if (features.empty()) throw DataError("background source is empty");
  if (max_rows == 0) throw ConfigError("background size must be >= 1");
  Background bg;
  if (features.size() <= max_rows) {
    bg.rows.assign(features.begin(), features.end());
    bg.origin = "train[all " + std::to_string(features.size()) + "]";
    return bg;
  }
  std::vector<std::size_t> index(features.size());
  std::iota(index.begin(), index.end(), 0);
  Rng rng = Rng(seed).fork("background", 0);
  rng.shuffle(index);
  index.resize(max_rows);
  std::sort(index.begin(), index.end());
  bg.rows.reserve(max_rows);
  for (std::size_t i : index) bg.rows.push_back(features[i]);
  bg.origin = "train[" + std::to_string(max_rows) + "/" + std::to_string(features.size()) +
              " seed=" + std::to_string(seed) + "]";
  return bg;
}

std::array<double, kAttributeCount> shapley_exact(const gbdt::Ensemble& model,
                                                  const FeatureVector& x,
                                                  const Background& background) {
  if (background.rows.empty()) throw DataError("shapley_exact: empty background");

  // Trees sharing a live-feature set share one submask table. Each tree is
  // evaluated only on submasks of its live set; every other bit of the
  // coalition routes through the background and cannot change the walk.
  std::map<std::uint32_t, std::vector<const gbdt::Tree*>> groups;
  for (const gbdt::Tree& t : model.trees) groups[t.live_features()].push_back(&t);

  std::vector<double> v(kCoalitions, 0.0);
  const double inv_rows = 1.0 / static_cast<double>(background.rows.size());
  std::vector<double> table(kCoalitions);
  for (const auto& [live, trees] : groups) {
    std::fill(table.begin(), table.end(), 0.0);
    for (const gbdt::Tree* tree : trees) {
      for (const FeatureVector& b : background.rows) {
        // Enumerates submasks of `live` descending, then the empty mask.
        std::uint32_t sub = live;
        while (true) {
          table[sub] += walk_composite(*tree, x, b, sub);
          if (sub == 0) break;
          sub = (sub - 1) & live;
        }
      }
    }
    for (std::size_t mask = 0; mask < kCoalitions; ++mask) {
      v[mask] += table[static_cast<std::uint32_t>(mask) & live] * inv_rows;
    }
  }
  for (std::size_t mask = 0; mask < kCoalitions; ++mask) {
    v[mask] = model.prior + model.learning_rate * v[mask];
  }

  static const std::array<double, kAttributeCount> weights = shapley_weights();
  std::array<double, kAttributeCount> phi{};
  for (std::size_t mask = 0; mask < kCoalitions; ++mask) {
    int size = std::popcount(static_cast<std::uint32_t>(mask));
    for (std::size_t i = 0; i < kAttributeCount; ++i) {
      if (mask & (std::size_t{1} << i)) continue;
      phi[i] += weights[size] * (v[mask | (std::size_t{1} << i)] - v[mask]);
    }
  }
  return phi;
}

AttributionResult attribute_shapley(const gbdt::Ensemble& model,
                                    std::span<const FeatureVector> instances,
                                    const Background& background) {
  if (instances.empty()) throw DataError("attribute_shapley: no instances");
  if (background.rows.empty()) throw DataError("attribute_shapley: empty background");

  AttributionResult result;
  double base = 0.0;
  for (const FeatureVector& b : background.rows) base += model.predict_margin(b);
  result.base_value = base / static_cast<double>(background.rows.size());

  result.per_instance.reserve(instances.size());
  for (const FeatureVector& x : instances) {
    auto phi = shapley_exact(model, x, background);
    double total = std::accumulate(phi.begin(), phi.end(), 0.0);
    double expected = model.predict_margin(x) - result.base_value;
    if (std::abs(total - expected) >= 1e-9) {
      throw InternalError("shapley efficiency violated: residual " +
                          std::to_string(total - expected));
    }
    result.per_instance.push_back(phi);
  }

  const double inv_n = 1.0 / static_cast<double>(instances.size());
  for (std::size_t i = 0; i < kAttributeCount; ++i) {
    double abs_sum = 0.0;
    for (const auto& phi : result.per_instance) abs_sum += std::abs(phi[i]);
    result.mean_abs[i] = abs_sum * inv_n;

    std::vector<double> values;
    values.reserve(instances.size());
    for (const FeatureVector& x : instances) values.push_back(x[i]);
    double q75 = quantile_type7(values, 0.75);
    double signed_sum = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < instances.size(); ++k) {
      if (instances[k][i] >= q75) {
        signed_sum += result.per_instance[k][i];
        ++count;
      }
    }
    result.direction[i] = count > 0 ? signed_sum / static_cast<double>(count) : 0.0;
  }
  return result;
}

std::vector<ImportanceRow> attribute_importance(const AttributionResult& result) {
  std::vector<ImportanceRow> rows;
  rows.reserve(kAttributeCount);
  for (Attribute a : all_attributes()) {
    std::size_t i = attribute_index(a);
    double d = result.direction[i];
    rows.push_back({a, result.mean_abs[i], d > 0.0 ? 1 : d < 0.0 ? -1 : 0});
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const ImportanceRow& a, const ImportanceRow& b) {
                     return a.mean_abs > b.mean_abs;
                   });
  return rows;
}

std::vector<BeeswarmRow> export_beeswarm(const AttributionResult& result,
                                         std::span<const FeatureVector> features) {
  if (features.size() != result.per_instance.size()) {
    throw DataError("export_beeswarm: feature/attribution count mismatch");
  }
  std::vector<BeeswarmRow> rows;
  rows.reserve(features.size() * kAttributeCount);
  for (std::size_t k = 0; k < features.size(); ++k) {
    for (Attribute a : all_attributes()) {
      std::size_t i = attribute_index(a);
      rows.push_back({k, a, result.per_instance[k][i], features[k][i]});
    }
  }
  return rows;
}

}  // namespace rationeval::shap
