#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "rationeval/core.hpp"
#include "rationeval/types.hpp"

namespace rationeval::gbdt {

struct TrainConfig {
  int num_rounds = 200;
  int max_depth = 4;
  double learning_rate = 0.1;
  int min_samples_leaf = 5;
  double subsample = 1.0;
  std::uint64_t seed = 0;
  // Emits every fitted tree together with its mirror image (scaled 0.5 each),
  // making the margin an odd function of x and the prior 0. Meant for
  // symmetrized difference data; see Ensemble notes.
  bool antisymmetric = false;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;

  bool is_leaf() const { return feature < 0; }
};

// Flat pre-order array, root at index 0; children always follow the parent.
// Routing: x[feature] < threshold goes left.
struct Tree {
  std::vector<TreeNode> nodes;

  double evaluate(const FeatureVector& x) const;
  // Bitmask of feature indices referenced by internal nodes.
  std::uint32_t live_features() const;
};

// mirror(T)(x) = -T(-x) for all x off split boundaries. Swapping children
// around a negated threshold reverses the comparison; leaves negate.
Tree mirror_tree(const Tree& tree);

struct Metrics {
  double accuracy = 0.0;
  double log_loss = 0.0;
};

class Ensemble {
 public:
  double prior = 0.0;
  double learning_rate = 0.1;
  std::vector<Tree> trees;
  // train_loss[0] is the prior-only loss; one entry per boosting round after.
  std::vector<double> train_loss;
  TrainConfig config;

  double predict_margin(const FeatureVector& x) const;
  double predict_proba(const FeatureVector& x) const;

  ojson to_json() const;
  static Ensemble from_json(const ojson& doc);
  void save(const std::filesystem::path& path) const;
  static Ensemble load(const std::filesystem::path& path);
};

// Newton boosting on logistic loss. Labels are soft targets in {0, 0.5, 1};
// ties enter the gradients as 0.5. Deterministic for fixed (data, config).
Ensemble train(std::span<const FeatureVector> features, std::span<const double> labels,
               const TrainConfig& config);

// accuracy treats tie labels as correct under either prediction; log_loss is
// the soft-label logistic loss.
Metrics evaluate(const Ensemble& model, std::span<const FeatureVector> features,
                 std::span<const double> labels);

double sigmoid(double margin);
double logistic_loss(std::span<const double> margins, std::span<const double> labels);

}  // namespace rationeval::gbdt
