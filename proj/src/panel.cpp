#include "rationeval/panel.hpp"

#include <atomic>
#include <fstream>
#include <optional>
#include <thread>

#include <nlohmann/json.hpp>

#include "rationeval/core.hpp"
#include "rationeval/errors.hpp"

namespace rationeval::judge {

namespace {

using ingest::Side;

JudgeVerdict judge_one_side(ChatClient& client, const JudgeConfig& config,
                            const PromptTemplate& tmpl, const PreferencePair& pair, Side side) {
  const RationaleRecord& record = side == Side::kA ? pair.side_a : pair.side_b;
  const std::string prompt = render_prompt(tmpl, pair.question, record.rationale_text);
  std::string last_error;
  for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
    const std::string raw = client.call_judge(config, prompt, attempt);
    try {
      return parse_verdict(raw, config);
    } catch (const DataError& e) {
      last_error = e.what();
    }
  }
  throw DataError("judge " + config.judge_id + " gave no usable verdict after " +
                  std::to_string(config.max_retries + 1) + " attempts; last: " + last_error);
}

}  // namespace

std::map<std::string, PromptTemplate> default_templates(std::span<const JudgeConfig> panel) {
  std::map<std::string, PromptTemplate> out;
  for (const auto& config : panel) {
    out.emplace(config.judge_id, template_for_scale(config.native_scale_max));
  }
  return out;
}

PairScore score_pair_with_panel(ChatClient& client, const PreferencePair& pair,
                                std::span<const JudgeConfig> panel,
                                const std::map<std::string, PromptTemplate>& templates,
                                const PanelOptions& options) {
  if (panel.empty()) throw ConfigError("judge panel is empty");
  for (const auto& config : panel) {
    if (!templates.count(config.judge_id)) {
      throw ConfigError("no prompt template for judge " + config.judge_id);
    }
  }

  struct Job {
    const JudgeConfig* config;
    Side side;
  };
  std::vector<Job> jobs;
  jobs.reserve(panel.size() * 2);
  for (Side side : {Side::kA, Side::kB}) {
    for (const auto& config : panel) jobs.push_back({&config, side});
  }

  std::vector<std::optional<JudgeVerdict>> verdicts(jobs.size());
  std::vector<std::optional<std::string>> errors(jobs.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1)) {
      const Job& job = jobs[i];
      try {
        verdicts[i] =
            judge_one_side(client, *job.config, templates.at(job.config->judge_id), pair, job.side);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };

  size_t n_threads = std::min<size_t>(std::max(options.max_in_flight, 1), jobs.size());
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  PairScore score;
  score.pair_id = pair.pair_id;
  for (size_t i = 0; i < jobs.size(); ++i) {
    SideScore& side = jobs[i].side == Side::kA ? score.a : score.b;
    if (verdicts[i]) {
      side.verdicts.push_back(std::move(*verdicts[i]));
    } else {
      side.failures.push_back({jobs[i].config->judge_id, *errors[i]});
    }
  }
  return score;
}

std::string side_to_string(Side side) { return side == Side::kA ? "a" : "b"; }

Side side_from_string(const std::string& text) {
  if (text == "a") return Side::kA;
  if (text == "b") return Side::kB;
  throw DataError("unknown side: " + text);
}

namespace {

ojson verdict_record(const std::string& pair_id, Side side, const JudgeVerdict& v) {
  ojson rec;
  rec["pair_id"] = pair_id;
  rec["side"] = side_to_string(side);
  rec["judge_id"] = v.judge_id;
  rec["native_scale_max"] = v.native_scale_max;
  rec["scores"] = card_to_json(v.card);
  if (!v.explanations.empty()) {
    ojson ex;
    for (Attribute a : all_attributes()) {
      auto it = v.explanations.find(a);
      if (it != v.explanations.end()) ex[std::string(attribute_name(a))] = it->second;
    }
    rec["explanations"] = ex;
  }
  return rec;
}

ojson failure_record(const std::string& pair_id, Side side, const JudgeFailure& f) {
  ojson rec;
  rec["pair_id"] = pair_id;
  rec["side"] = side_to_string(side);
  rec["judge_id"] = f.judge_id;
  rec["error"] = f.message;
  return rec;
}

}  // namespace

void save_verdicts(const std::filesystem::path& path, std::span<const PairScore> scores) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& score : scores) {
    for (Side side : {Side::kA, Side::kB}) {
      const SideScore& s = score.side(side);
      for (const auto& v : s.verdicts) out << verdict_record(score.pair_id, side, v).dump() << '\n';
      for (const auto& f : s.failures) out << failure_record(score.pair_id, side, f).dump() << '\n';
    }
  }
}

std::vector<PairScore> load_verdicts(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::vector<PairScore> out;
  std::map<std::string, size_t> index;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    ojson rec;
    try {
      rec = ojson::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": bad JSON: " + e.what());
    }
    const std::string pair_id = rec.at("pair_id").get<std::string>();
    auto [it, inserted] = index.emplace(pair_id, out.size());
    if (inserted) {
      out.emplace_back();
      out.back().pair_id = pair_id;
    }
    PairScore& score = out[it->second];
    SideScore& side =
        side_from_string(rec.at("side").get<std::string>()) == Side::kA ? score.a : score.b;
    const std::string judge_id = rec.at("judge_id").get<std::string>();
    if (rec.contains("error")) {
      side.failures.push_back({judge_id, rec["error"].get<std::string>()});
      continue;
    }
    JudgeVerdict v;
    v.judge_id = judge_id;
    v.native_scale_max = rec.at("native_scale_max").get<double>();
    v.card = card_from_json(rec.at("scores"));
    if (rec.contains("explanations")) {
      for (const auto& [key, value] : rec["explanations"].items()) {
        auto attr = parse_attribute(key);
        if (!attr) throw DataError("unknown attribute in explanations: " + key);
        v.explanations[*attr] = value.get<std::string>();
      }
    }
    side.verdicts.push_back(std::move(v));
  }
  return out;
}

}  // namespace rationeval::judge
