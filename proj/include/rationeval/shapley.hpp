#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rationeval/attributes.hpp"
#include "rationeval/gbdt.hpp"
#include "rationeval/types.hpp"

namespace rationeval::shap {

struct Background {
  std::vector<FeatureVector> rows;
  std::string origin;
};

// Up to max_rows drawn without replacement (fixed seed), original order
// preserved; the whole set when it already fits.
Background sample_background(std::span<const FeatureVector> features, std::size_t max_rows,
                             std::uint64_t seed);

// Exact interventional Shapley values on the margin. The value function is
// v(S) = mean over background rows b of margin(x on S, b off S), enumerated
// over all 2^12 coalitions. Per tree, v only depends on S intersected with
// the tree's live features, so the enumeration memoizes per-tree submask
// tables; the result is exact, not sampled.
std::array<double, kAttributeCount> shapley_exact(const gbdt::Ensemble& model,
                                                  const FeatureVector& x,
                                                  const Background& background);

struct AttributionResult {
  std::vector<std::array<double, kAttributeCount>> per_instance;
  double base_value = 0.0;  // mean background margin, v(empty set)
  std::array<double, kAttributeCount> mean_abs{};
  // Mean signed phi over instances whose feature value sits in the top
  // quartile; the scalar stand-in for a beeswarm color gradient.
  std::array<double, kAttributeCount> direction{};
};

AttributionResult attribute_shapley(const gbdt::Ensemble& model,
                                    std::span<const FeatureVector> instances,
                                    const Background& background);

struct ImportanceRow {
  Attribute attribute;
  double mean_abs = 0.0;
  int direction_sign = 0;  // -1, 0, +1
};

// Descending mean_abs; exact ties fall back to canonical attribute order.
std::vector<ImportanceRow> attribute_importance(const AttributionResult& result);

struct BeeswarmRow {
  std::size_t instance = 0;
  Attribute attribute = Attribute::kFaithfulness;
  double phi = 0.0;
  double feature_value = 0.0;
};

// n x 12 rows, instance-major, attributes in canonical order.
std::vector<BeeswarmRow> export_beeswarm(const AttributionResult& result,
                                         std::span<const FeatureVector> features);

}  // namespace rationeval::shap
