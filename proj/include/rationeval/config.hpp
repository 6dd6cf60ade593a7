#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rationeval/core.hpp"
#include "rationeval/elo.hpp"
#include "rationeval/gbdt.hpp"
#include "rationeval/ingest.hpp"
#include "rationeval/panel.hpp"

namespace rationeval::config {

struct DatasetSpec {
  std::filesystem::path path;
  ingest::Format format;
};

struct AttributionConfig {
  std::size_t background_size = 256;
  std::uint64_t seed = 0;
};

struct RunConfig {
  std::vector<DatasetSpec> datasets;
  std::vector<judge::JudgeConfig> judges;
  std::string filter_judge;  // judge id used by the question classifier
  ingest::FilterConfig filter;
  gbdt::TrainConfig train;
  AttributionConfig attribution;
  elo::EloConfig elo;
  double tie_epsilon = 1e-9;
  judge::PanelOptions panel;
  std::filesystem::path out_dir;
  std::filesystem::path cache_dir;
  bool offline = false;  // set by flag only, never read from the file

  // Config echo for run.json. Output and cache locations are omitted on
  // purpose: replaying into a different directory must still produce a
  // byte-identical tree, and the cache is captured by its content hash.
  ojson to_json() const;
};

// CLI flag overrides; every flag wins over its config key.
struct Overrides {
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::vector<std::string>> judges;  // subset of configured ids
  std::optional<std::uint64_t> seed;               // train, attribution and elo
  bool offline = false;
};

// Parses, resolves and validates a TOML run config. Relative paths resolve
// against the config file's directory; --out resolves against the caller's
// working directory.
RunConfig load_run_config(const std::filesystem::path& config_path, const Overrides& overrides);

}  // namespace rationeval::config
