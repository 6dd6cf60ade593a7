#include "rationeval/config.hpp"

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

#include "rationeval/errors.hpp"
#include "rationeval/toml_lite.hpp"

namespace rationeval::config {

namespace {

[[noreturn]] void bad(const std::string& what) { throw ConfigError(what); }

const ojson* maybe(const ojson& obj, const std::string& key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

std::string get_string(const ojson& obj, const std::string& key, const std::string& where) {
  const ojson* v = maybe(obj, key);
  if (!v || !v->is_string()) bad(where + ": missing or non-string key " + key);
  return v->get<std::string>();
}

double get_double(const ojson& obj, const std::string& key, double fallback,
                  const std::string& where) {
  const ojson* v = maybe(obj, key);
  if (!v) return fallback;
  if (!v->is_number()) bad(where + ": key " + key + " must be a number");
  return v->get<double>();
}

long long get_int(const ojson& obj, const std::string& key, long long fallback,
                  const std::string& where) {
  const ojson* v = maybe(obj, key);
  if (!v) return fallback;
  if (!v->is_number_integer()) bad(where + ": key " + key + " must be an integer");
  return v->get<long long>();
}

std::uint64_t get_seed(const ojson& obj, const std::string& key, std::uint64_t fallback,
                       const std::string& where) {
  long long v = get_int(obj, key, static_cast<long long>(fallback), where);
  if (v < 0) bad(where + ": key " + key + " must be non-negative");
  return static_cast<std::uint64_t>(v);
}

bool get_bool(const ojson& obj, const std::string& key, bool fallback,
              const std::string& where) {
  const ojson* v = maybe(obj, key);
  if (!v) return fallback;
  if (!v->is_boolean()) bad(where + ": key " + key + " must be a boolean");
  return v->get<bool>();
}

std::vector<std::string> get_string_array(const ojson& obj, const std::string& key,
                                          const std::string& where) {
  const ojson* v = maybe(obj, key);
  if (!v) return {};
  if (!v->is_array()) bad(where + ": key " + key + " must be an array");
  std::vector<std::string> out;
  for (const auto& item : *v) {
    if (!item.is_string()) bad(where + ": key " + key + " must hold strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

std::filesystem::path resolve(const std::filesystem::path& base,
                              const std::filesystem::path& path) {
  return path.is_absolute() ? path : base / path;
}

judge::JudgeConfig parse_judge(const std::string& id, const ojson& obj) {
  const std::string where = "judge " + id;
  if (!obj.is_object()) bad(where + ": expected a table");
  judge::JudgeConfig j;
  j.judge_id = id;
  j.model_name = get_string(obj, "model", where);
  if (const ojson* url = maybe(obj, "base_url")) {
    if (!url->is_string()) bad(where + ": base_url must be a string");
    j.endpoint_url = url->get<std::string>();
  }
  j.native_scale_max = get_double(obj, "scale_max", 1.0, where);
  if (j.native_scale_max != 1.0 && j.native_scale_max != 10.0) {
    bad(where + ": scale_max must be 1.0 or 10.0");
  }
  j.temperature = get_double(obj, "temperature", 0.0, where);
  j.max_retries = static_cast<int>(get_int(obj, "max_retries", 2, where));
  if (j.max_retries < 0) bad(where + ": max_retries must be non-negative");
  j.timeout = std::chrono::milliseconds(get_int(obj, "timeout_ms", 30000, where));
  j.initial_backoff =
      std::chrono::milliseconds(get_int(obj, "initial_backoff_ms", 250, where));
  if (j.timeout.count() <= 0 || j.initial_backoff.count() < 0) {
    bad(where + ": timeouts must be positive");
  }
  return j;
}

}  // namespace

ojson RunConfig::to_json() const {
  ojson doc;
  ojson data = ojson::array();
  for (const DatasetSpec& d : datasets) {
    data.push_back(ojson{
        {"path", d.path.generic_string()},
        {"format",
         d.format == ingest::Format::kArenaJsonl ? "arena_jsonl" : "mtbench_jsonl"}});
  }
  doc["datasets"] = std::move(data);
  ojson judges_json = ojson::array();
  for (const auto& j : judges) {
    judges_json.push_back(ojson{{"judge_id", j.judge_id},
                                {"model", j.model_name},
                                {"base_url", j.endpoint_url},
                                {"scale_max", j.native_scale_max},
                                {"temperature", j.temperature},
                                {"max_retries", j.max_retries},
                                {"timeout_ms", j.timeout.count()},
                                {"initial_backoff_ms", j.initial_backoff.count()}});
  }
  doc["judges"] = std::move(judges_json);
  doc["filter"] = ojson{{"judge", filter_judge}, {"keep", filter.keep}};
  doc["train"] = ojson{{"rounds", train.num_rounds},
                       {"max_depth", train.max_depth},
                       {"learning_rate", train.learning_rate},
                       {"min_samples_leaf", train.min_samples_leaf},
                       {"subsample", train.subsample},
                       {"antisymmetric", train.antisymmetric},
                       {"seed", train.seed}};
  doc["attribution"] =
      ojson{{"background_size", attribution.background_size}, {"seed", attribution.seed}};
  doc["elo"] = ojson{{"initial_rating", elo.initial_rating},
                     {"k_factor", elo.k_factor},
                     {"scale", elo.scale},
                     {"permutations", elo.permutations},
                     {"bootstrap_samples", elo.bootstrap_samples},
                     {"seed", elo.seed},
                     {"tie_epsilon", tie_epsilon}};
  doc["panel"] = ojson{{"max_in_flight", panel.max_in_flight}};
  return doc;
}

RunConfig load_run_config(const std::filesystem::path& config_path, const Overrides& overrides) {
  ojson doc = toml::parse_file(config_path);
  std::filesystem::path base = std::filesystem::absolute(config_path).parent_path();
  RunConfig cfg;

  const ojson* data = maybe(doc, "data");
  if (!data || !data->is_object()) bad("config: missing [data] table");
  for (const auto& [format_name, _] : data->items()) {
    ingest::Format format = ingest::format_from_string(format_name);
    for (const std::string& path : get_string_array(*data, format_name, "[data]")) {
      cfg.datasets.push_back({resolve(base, path), format});
    }
  }
  if (cfg.datasets.empty()) bad("config: [data] lists no dataset files");
  for (const DatasetSpec& d : cfg.datasets) {
    if (!std::filesystem::is_regular_file(d.path)) {
      bad("config: dataset file does not exist: " + d.path.string());
    }
  }

  const ojson* judges = maybe(doc, "judges");
  if (!judges || !judges->is_object() || judges->empty()) {
    bad("config: missing [judges.<id>] tables");
  }
  for (const auto& [id, body] : judges->items()) {
    cfg.judges.push_back(parse_judge(id, body));
  }
  if (overrides.judges) {
    std::set<std::string> wanted(overrides.judges->begin(), overrides.judges->end());
    for (const std::string& id : wanted) {
      if (std::none_of(cfg.judges.begin(), cfg.judges.end(),
                       [&](const auto& j) { return j.judge_id == id; })) {
        bad("--judges: unknown judge id " + id);
      }
    }
    std::erase_if(cfg.judges, [&](const auto& j) { return !wanted.count(j.judge_id); });
    if (cfg.judges.empty()) bad("--judges selected an empty panel");
  }

  if (const ojson* filter = maybe(doc, "filter")) {
    if (!filter->is_object()) bad("config: [filter] must be a table");
    auto keep = get_string_array(*filter, "keep", "[filter]");
    if (!keep.empty()) cfg.filter.keep = std::move(keep);
    if (maybe(*filter, "judge")) cfg.filter_judge = get_string(*filter, "judge", "[filter]");
  }
  if (cfg.filter.keep.empty()) bad("config: [filter] keep-set is empty");
  if (cfg.filter_judge.empty()) cfg.filter_judge = cfg.judges.front().judge_id;
  if (std::none_of(cfg.judges.begin(), cfg.judges.end(),
                   [&](const auto& j) { return j.judge_id == cfg.filter_judge; })) {
    bad("config: filter judge " + cfg.filter_judge + " is not on the panel");
  }

  if (const ojson* train = maybe(doc, "train")) {
    if (!train->is_object()) bad("config: [train] must be a table");
    cfg.train.num_rounds = static_cast<int>(get_int(*train, "rounds", 200, "[train]"));
    cfg.train.max_depth = static_cast<int>(get_int(*train, "max_depth", 4, "[train]"));
    cfg.train.learning_rate = get_double(*train, "learning_rate", 0.1, "[train]");
    cfg.train.min_samples_leaf =
        static_cast<int>(get_int(*train, "min_samples_leaf", 5, "[train]"));
    cfg.train.subsample = get_double(*train, "subsample", 1.0, "[train]");
    cfg.train.antisymmetric = get_bool(*train, "antisymmetric", true, "[train]");
    cfg.train.seed = get_seed(*train, "seed", 0, "[train]");
  } else {
    cfg.train.antisymmetric = true;
  }

  if (const ojson* attribution = maybe(doc, "attribution")) {
    if (!attribution->is_object()) bad("config: [attribution] must be a table");
    long long size = get_int(*attribution, "background_size", 256, "[attribution]");
    if (size <= 0) bad("config: background_size must be positive");
    cfg.attribution.background_size = static_cast<std::size_t>(size);
    cfg.attribution.seed = get_seed(*attribution, "seed", 0, "[attribution]");
  }

  if (const ojson* elo = maybe(doc, "elo")) {
    if (!elo->is_object()) bad("config: [elo] must be a table");
    cfg.elo.initial_rating = get_double(*elo, "initial_rating", 1000.0, "[elo]");
    cfg.elo.k_factor = get_double(*elo, "k_factor", 4.0, "[elo]");
    cfg.elo.scale = get_double(*elo, "scale", 400.0, "[elo]");
    cfg.elo.permutations = static_cast<int>(get_int(*elo, "permutations", 100, "[elo]"));
    cfg.elo.bootstrap_samples =
        static_cast<int>(get_int(*elo, "bootstrap_samples", 1000, "[elo]"));
    cfg.elo.seed = get_seed(*elo, "seed", 0, "[elo]");
    cfg.tie_epsilon = get_double(*elo, "tie_epsilon", 1e-9, "[elo]");
    if (cfg.tie_epsilon < 0.0) bad("config: tie_epsilon must be non-negative");
  }

  if (const ojson* panel = maybe(doc, "panel")) {
    if (!panel->is_object()) bad("config: [panel] must be a table");
    cfg.panel.max_in_flight =
        static_cast<int>(get_int(*panel, "max_in_flight", 4, "[panel]"));
    if (cfg.panel.max_in_flight <= 0) bad("config: max_in_flight must be positive");
  }

  const ojson* output = maybe(doc, "output");
  if (!output || !output->is_object()) bad("config: missing [output] table");
  cfg.out_dir = resolve(base, get_string(*output, "dir", "[output]"));
  if (overrides.out_dir) {
    cfg.out_dir = std::filesystem::absolute(*overrides.out_dir);
  }

  if (const ojson* cache = maybe(doc, "cache")) {
    if (!cache->is_object()) bad("config: [cache] must be a table");
    cfg.cache_dir = resolve(base, get_string(*cache, "dir", "[cache]"));
  } else {
    cfg.cache_dir = cfg.out_dir / "judge_cache";
  }

  if (overrides.seed) {
    cfg.train.seed = *overrides.seed;
    cfg.attribution.seed = *overrides.seed;
    cfg.elo.seed = *overrides.seed;
  }
  cfg.offline = overrides.offline;
  return cfg;
}

}  // namespace rationeval::config
