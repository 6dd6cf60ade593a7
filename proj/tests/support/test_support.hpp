#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "rationeval/gbdt.hpp"
#include "rationeval/rng.hpp"
#include "rationeval/shapley.hpp"

namespace testsup {

std::filesystem::path fixtures_dir();
std::filesystem::path rationeval_binary();

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& text);

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Scripted OpenAI-style chat endpoint:
// - verdicts are a pure function of the prompt (hash-derived scores)
// - models with "ten" in the name answer on the 0-10 scale
// - every 3rd verdict is wrapped in a ```json fence
// - filter prompts (no rationale section) get a one-word category
// - flaky mode 429s the first occurrence of every distinct request body
class MockJudgeServer {
 public:
  MockJudgeServer();
  ~MockJudgeServer();

  std::string base_url() const;  // http://127.0.0.1:<port>/v1
  void set_flaky(bool on);
  long requests() const;
  long rejected() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Monte-Carlo permutation oracle for interventional Shapley values, sharing
// shapley_exact's value function. Coalition values are precomputed exactly
// over the ensemble's live-feature union, so the permutation loop is pure
// table lookups.
struct PermutationEstimate {
  std::array<double, rationeval::kAttributeCount> phi{};
  std::array<double, rationeval::kAttributeCount> stderr_{};
};

PermutationEstimate shapley_permutation(const rationeval::gbdt::Ensemble& model,
                                        const rationeval::FeatureVector& x,
                                        const rationeval::shap::Background& background,
                                        int permutations, std::uint64_t seed);

// Random pre-order trees whose split features come from `allowed`.
rationeval::gbdt::Tree random_tree(rationeval::Rng& rng, int max_depth,
                                   const std::vector<int>& allowed_features);

// Random ensemble whose live-feature union has at most `max_live_features`
// members (the feature subset is drawn once per ensemble).
rationeval::gbdt::Ensemble random_ensemble(rationeval::Rng& rng, int max_trees, int max_depth,
                                           int max_live_features);

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

// Runs the installed CLI binary with the caller's environment.
RunResult run_cli_binary(const std::vector<std::string>& args);

}  // namespace testsup
