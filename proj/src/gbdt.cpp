#include "rationeval/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "rationeval/attributes.hpp"
#include "rationeval/errors.hpp"
#include "rationeval/rng.hpp"

namespace rationeval::gbdt {

namespace {

// Guards Newton denominators when a node's hessian mass vanishes.
constexpr double kHessianGuard = 1e-12;
constexpr double kMinGain = 1e-12;
constexpr double kPriorClamp = 1e-6;

double softplus(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

void validate_labels(std::span<const double> labels) {
  for (size_t i = 0; i < labels.size(); ++i) {
    double y = labels[i];
    if (y != 0.0 && y != 0.5 && y != 1.0) {
      throw DataError("label " + std::to_string(i) + " is " + std::to_string(y) +
                      ", expected 0, 0.5 or 1");
    }
  }
}

struct SplitCandidate {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

double leaf_score(double g, double h) { return (g * g) / (h + kHessianGuard); }

class TreeBuilder {
 public:
  TreeBuilder(std::span<const FeatureVector> features, const std::vector<double>& gradients,
              const std::vector<double>& hessians, const TrainConfig& config)
      : features_(features), gradients_(gradients), hessians_(hessians), config_(config) {}

  Tree build(std::vector<int> samples) {
    Tree tree;
    grow(tree, std::move(samples), 0);
    return tree;
  }

 private:
  // Pre-order growth: the node is appended before its subtrees, so child
  // indices always exceed the parent's.
  int grow(Tree& tree, std::vector<int> samples, int depth) {
    double g = 0.0, h = 0.0;
    for (int i : samples) {
      g += gradients_[i];
      h += hessians_[i];
    }
    int index = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();

    SplitCandidate best;
    if (depth < config_.max_depth) best = best_split(samples, g, h);
    if (best.feature < 0) {
      tree.nodes[index].value = -g / (h + kHessianGuard);
      return index;
    }

    std::vector<int> left, right;
    left.reserve(samples.size());
    right.reserve(samples.size());
    for (int i : samples) {
      (features_[i][best.feature] < best.threshold ? left : right).push_back(i);
    }
    samples.clear();
    samples.shrink_to_fit();

    tree.nodes[index].feature = best.feature;
    tree.nodes[index].threshold = best.threshold;
    int l = grow(tree, std::move(left), depth + 1);
    tree.nodes[index].left = l;
    int r = grow(tree, std::move(right), depth + 1);
    tree.nodes[index].right = r;
    return index;
  }

  // Exact greedy over sorted unique values; candidate thresholds are
  // midpoints between consecutive distinct values. Strict improvement keeps
  // the lowest feature index and lowest threshold on gain ties, because
  // candidates are visited in exactly that order.
  SplitCandidate best_split(const std::vector<int>& samples, double g_total, double h_total) {
    SplitCandidate best;
    const int m = static_cast<int>(samples.size());
    if (m < 2 * config_.min_samples_leaf) return best;
    const double parent = leaf_score(g_total, h_total);

    std::vector<std::pair<double, int>> order(samples.size());
    for (int f = 0; f < static_cast<int>(kAttributeCount); ++f) {
      for (size_t k = 0; k < samples.size(); ++k) {
        order[k] = {features_[samples[k]][f], samples[k]};
      }
      std::sort(order.begin(), order.end());

      double gl = 0.0, hl = 0.0;
      for (int k = 0; k + 1 < m; ++k) {
        gl += gradients_[order[k].second];
        hl += hessians_[order[k].second];
        double v = order[k].first;
        double next = order[k + 1].first;
        if (v == next) continue;
        int left_count = k + 1;
        if (left_count < config_.min_samples_leaf || m - left_count < config_.min_samples_leaf) {
          continue;
        }
        double gain =
            0.5 * (leaf_score(gl, hl) + leaf_score(g_total - gl, h_total - hl) - parent);
        // Strict > keeps the first candidate on exact ties, and candidates
        // arrive in (feature index, threshold) order.
        if ((best.feature < 0 && gain > kMinGain) || (best.feature >= 0 && gain > best.gain)) {
          best = {gain, f, v + (next - v) / 2.0};
        }
      }
    }
    return best;
  }

  std::span<const FeatureVector> features_;
  const std::vector<double>& gradients_;
  const std::vector<double>& hessians_;
  const TrainConfig& config_;
};

}  // namespace

double sigmoid(double margin) { return 1.0 / (1.0 + std::exp(-margin)); }

double logistic_loss(std::span<const double> margins, std::span<const double> labels) {
  if (margins.size() != labels.size() || margins.empty()) {
    throw DataError("logistic_loss needs equal-length non-empty inputs");
  }
  double total = 0.0;
  for (size_t i = 0; i < margins.size(); ++i) {
    total += softplus(-margins[i]) + (1.0 - labels[i]) * margins[i];
  }
  return total / static_cast<double>(margins.size());
}

double Tree::evaluate(const FeatureVector& x) const {
  int i = 0;
  while (!nodes[i].is_leaf()) {
    const TreeNode& n = nodes[i];
    i = x[n.feature] < n.threshold ? n.left : n.right;
  }
  return nodes[i].value;
}

std::uint32_t Tree::live_features() const {
  std::uint32_t mask = 0;
  for (const TreeNode& n : nodes) {
    if (!n.is_leaf()) mask |= 1u << n.feature;
  }
  return mask;
}

Tree mirror_tree(const Tree& tree) {
  Tree out;
  out.nodes.reserve(tree.nodes.size());
  // Rebuild in pre-order so the flat-array invariant survives the swap.
  auto copy = [&](auto&& self, int from) -> int {
    const TreeNode& n = tree.nodes[from];
    int index = static_cast<int>(out.nodes.size());
    out.nodes.emplace_back();
    if (n.is_leaf()) {
      out.nodes[index].value = -n.value;
      return index;
    }
    out.nodes[index].feature = n.feature;
    out.nodes[index].threshold = -n.threshold;
    int l = self(self, n.right);
    out.nodes[index].left = l;
    int r = self(self, n.left);
    out.nodes[index].right = r;
    return index;
  };
  copy(copy, 0);
  return out;
}

double Ensemble::predict_margin(const FeatureVector& x) const {
  double total = 0.0;
  for (const Tree& t : trees) total += t.evaluate(x);
  return prior + learning_rate * total;
}

double Ensemble::predict_proba(const FeatureVector& x) const { return sigmoid(predict_margin(x)); }

Ensemble train(std::span<const FeatureVector> features, std::span<const double> labels,
               const TrainConfig& config) {
  if (features.empty()) throw DataError("train: empty dataset");
  if (features.size() != labels.size()) {
    throw DataError("train: feature/label length mismatch");
  }
  if (config.num_rounds < 0) throw ConfigError("num_rounds must be >= 0");
  if (config.max_depth < 1) throw ConfigError("max_depth must be >= 1");
  if (config.learning_rate <= 0.0) throw ConfigError("learning_rate must be > 0");
  if (config.min_samples_leaf < 1) throw ConfigError("min_samples_leaf must be >= 1");
  if (!(config.subsample > 0.0 && config.subsample <= 1.0)) {
    throw ConfigError("subsample must be in (0, 1]");
  }
  validate_labels(labels);

  const size_t n = features.size();
  Ensemble model;
  model.learning_rate = config.learning_rate;
  model.config = config;

  if (config.antisymmetric) {
    // Odd margins need a zero intercept; symmetrized data has base rate 1/2
    // anyway, so this is the log-odds it would produce.
    model.prior = 0.0;
  } else {
    double mean = std::accumulate(labels.begin(), labels.end(), 0.0) / static_cast<double>(n);
    double p = std::clamp(mean, kPriorClamp, 1.0 - kPriorClamp);
    model.prior = std::log(p / (1.0 - p));
  }

  std::vector<double> margins(n, model.prior);
  std::vector<double> gradients(n), hessians(n);
  model.train_loss.push_back(logistic_loss(margins, labels));

  Rng rng(config.seed);
  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);

  for (int round = 0; round < config.num_rounds; ++round) {
    for (size_t i = 0; i < n; ++i) {
      double p = sigmoid(margins[i]);
      gradients[i] = p - labels[i];
      hessians[i] = p * (1.0 - p);
    }

    std::vector<int> samples = all;
    if (config.subsample < 1.0) {
      size_t keep = std::max<size_t>(1, static_cast<size_t>(config.subsample * n));
      Rng round_rng = rng.fork("subsample", static_cast<std::uint64_t>(round));
      round_rng.shuffle(samples);
      samples.resize(keep);
      std::sort(samples.begin(), samples.end());
    }

    TreeBuilder builder(features, gradients, hessians, config);
    Tree tree = builder.build(std::move(samples));

    if (config.antisymmetric) {
      Tree mirrored = mirror_tree(tree);
      for (TreeNode& node : tree.nodes) {
        if (node.is_leaf()) node.value *= 0.5;
      }
      for (TreeNode& node : mirrored.nodes) {
        if (node.is_leaf()) node.value *= 0.5;
      }
      for (size_t i = 0; i < n; ++i) {
        margins[i] +=
            config.learning_rate * (tree.evaluate(features[i]) + mirrored.evaluate(features[i]));
      }
      model.trees.push_back(std::move(tree));
      model.trees.push_back(std::move(mirrored));
    } else {
      for (size_t i = 0; i < n; ++i) {
        margins[i] += config.learning_rate * tree.evaluate(features[i]);
      }
      model.trees.push_back(std::move(tree));
    }
    model.train_loss.push_back(logistic_loss(margins, labels));
  }
  return model;
}

Metrics evaluate(const Ensemble& model, std::span<const FeatureVector> features,
                 std::span<const double> labels) {
  if (features.empty()) throw DataError("evaluate: empty dataset");
  if (features.size() != labels.size()) {
    throw DataError("evaluate: feature/label length mismatch");
  }
  validate_labels(labels);

  std::vector<double> margins(features.size());
  for (size_t i = 0; i < features.size(); ++i) margins[i] = model.predict_margin(features[i]);

  size_t correct = 0;
  for (size_t i = 0; i < features.size(); ++i) {
    double y = labels[i];
    int predicted = margins[i] > 0.0 ? 1 : 0;
    if (y == 0.5 || predicted == static_cast<int>(y)) ++correct;
  }
  return {static_cast<double>(correct) / static_cast<double>(features.size()),
          logistic_loss(margins, labels)};
}

namespace {

ojson tree_to_json(const Tree& tree) {
  ojson nodes = ojson::array();
  for (const TreeNode& n : tree.nodes) {
    if (n.is_leaf()) {
      nodes.push_back(ojson{{"value", n.value}});
    } else {
      nodes.push_back(
          ojson{{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left}, {"right", n.right}});
    }
  }
  return ojson{{"nodes", std::move(nodes)}};
}

Tree tree_from_json(const ojson& doc, size_t tree_index) {
  auto fail = [&](const std::string& why) -> DataError {
    return DataError("ensemble tree " + std::to_string(tree_index) + ": " + why);
  };
  if (!doc.contains("nodes") || !doc["nodes"].is_array() || doc["nodes"].empty()) {
    throw fail("missing nodes");
  }
  Tree tree;
  const auto& nodes = doc["nodes"];
  const int size = static_cast<int>(nodes.size());
  for (int i = 0; i < size; ++i) {
    const auto& n = nodes[i];
    TreeNode node;
    if (n.contains("value")) {
      node.value = n["value"].get<double>();
      if (!std::isfinite(node.value)) throw fail("non-finite leaf value");
    } else {
      node.feature = n.at("feature").get<int>();
      node.threshold = n.at("threshold").get<double>();
      node.left = n.at("left").get<int>();
      node.right = n.at("right").get<int>();
      if (node.feature < 0 || node.feature >= static_cast<int>(kAttributeCount)) {
        throw fail("feature index out of range");
      }
      if (!std::isfinite(node.threshold)) throw fail("non-finite threshold");
      // children strictly after the parent: guarantees a well-formed DAG-free tree
      if (node.left <= i || node.left >= size || node.right <= i || node.right >= size) {
        throw fail("child index out of order");
      }
    }
    tree.nodes.push_back(node);
  }
  return tree;
}

}  // namespace

ojson Ensemble::to_json() const {
  ojson doc;
  doc["format"] = "rationeval-ensemble";
  doc["version"] = 1;
  doc["prior"] = prior;
  doc["learning_rate"] = learning_rate;
  ojson names = ojson::array();
  for (Attribute a : all_attributes()) names.push_back(std::string(attribute_name(a)));
  doc["feature_names"] = std::move(names);
  doc["config"] = ojson{{"num_rounds", config.num_rounds},
                        {"max_depth", config.max_depth},
                        {"learning_rate", config.learning_rate},
                        {"min_samples_leaf", config.min_samples_leaf},
                        {"subsample", config.subsample},
                        {"seed", config.seed},
                        {"antisymmetric", config.antisymmetric}};
  doc["train_loss"] = train_loss;
  ojson trees_json = ojson::array();
  for (const Tree& t : trees) trees_json.push_back(tree_to_json(t));
  doc["trees"] = std::move(trees_json);
  return doc;
}

Ensemble Ensemble::from_json(const ojson& doc) {
  try {
    if (!doc.contains("format") || doc["format"] != "rationeval-ensemble") {
      throw DataError("not an ensemble document");
    }
    if (doc.at("version").get<int>() != 1) {
      throw DataError("unsupported ensemble version");
    }
    Ensemble model;
    model.prior = doc.at("prior").get<double>();
    model.learning_rate = doc.at("learning_rate").get<double>();
    const auto& names = doc.at("feature_names");
    if (names.size() != kAttributeCount) throw DataError("feature_names must list 12 attributes");
    for (size_t i = 0; i < kAttributeCount; ++i) {
      if (names[i].get<std::string>() != attribute_name(all_attributes()[i])) {
        throw DataError("feature_names not in canonical attribute order");
      }
    }
    const auto& c = doc.at("config");
    model.config.num_rounds = c.at("num_rounds").get<int>();
    model.config.max_depth = c.at("max_depth").get<int>();
    model.config.learning_rate = c.at("learning_rate").get<double>();
    model.config.min_samples_leaf = c.at("min_samples_leaf").get<int>();
    model.config.subsample = c.at("subsample").get<double>();
    model.config.seed = c.at("seed").get<std::uint64_t>();
    model.config.antisymmetric = c.at("antisymmetric").get<bool>();
    model.train_loss = doc.at("train_loss").get<std::vector<double>>();
    const auto& trees = doc.at("trees");
    for (size_t i = 0; i < trees.size(); ++i) {
      model.trees.push_back(tree_from_json(trees[i], i));
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed ensemble document: ") + e.what());
  }
}

void Ensemble::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_json().dump(2) << '\n';
}

Ensemble Ensemble::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  ojson doc;
  try {
    doc = ojson::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed ensemble JSON in " + path.string() + ": " + e.what());
  }
  return from_json(doc);
}

}  // namespace rationeval::gbdt
