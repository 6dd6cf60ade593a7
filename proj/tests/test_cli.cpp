#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rationeval/attributes.hpp"
#include "rationeval/core.hpp"
#include "rationeval/ingest.hpp"
#include "rationeval/panel.hpp"
#include "support/test_support.hpp"

using namespace rationeval;
namespace fs = std::filesystem;

namespace {

std::string config_toml(const std::string& base_url) {
  std::string fixtures = testsup::fixtures_dir().string();
  std::string text;
  text += "[data]\n";
  text += "arena_jsonl = [\"" + fixtures + "/arena_mini.jsonl\"]\n";
  text += "mtbench_jsonl = [\"" + fixtures + "/mtbench_mini.jsonl\"]\n\n";
  text += "[judges.mock_one]\n";
  text += "model = \"mock-small\"\n";
  text += "base_url = \"" + base_url + "\"\n";
  text += "scale_max = 1.0\n";
  text += "max_retries = 2\n";
  text += "timeout_ms = 10000\n";
  text += "initial_backoff_ms = 10\n\n";
  text += "[judges.mock_ten]\n";
  text += "model = \"mock-ten-large\"\n";
  text += "base_url = \"" + base_url + "\"\n";
  text += "scale_max = 10.0\n";
  text += "max_retries = 2\n";
  text += "timeout_ms = 10000\n";
  text += "initial_backoff_ms = 10\n\n";
  text += "[filter]\njudge = \"mock_one\"\n\n";
  text += "[train]\n";
  text += "rounds = 60\nmax_depth = 3\nlearning_rate = 0.2\n";
  text += "min_samples_leaf = 2\nantisymmetric = true\nseed = 11\n\n";
  text += "[attribution]\nbackground_size = 64\nseed = 11\n\n";
  text += "[elo]\npermutations = 50\nbootstrap_samples = 200\nseed = 11\n\n";
  text += "[output]\ndir = \"out\"\n\n";
  text += "[cache]\ndir = \"cache\"\n";
  return text;
}

fs::path write_config(const testsup::TempDir& tmp, const std::string& base_url) {
  fs::path path = tmp.path() / "run.toml";
  testsup::write_file(path, config_toml(base_url));
  return path;
}

std::size_t line_count(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

// Relative paths of every regular file under root, sorted.
std::vector<fs::path> tree_files(const fs::path& root) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file()) files.push_back(fs::relative(entry.path(), root));
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

TEST_CASE("cli rejects bad invocations before any work") {
  testsup::TempDir tmp;
  fs::path config = write_config(tmp, "http://127.0.0.1:1/v1");

  SUBCASE("help exits zero") {
    auto r = testsup::run_cli_binary({"--help"});
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("--stage") != std::string::npos);
  }
  SUBCASE("missing --config") {
    auto r = testsup::run_cli_binary({"--stage", "filter"});
    CHECK(r.exit_code == 2);
  }
  SUBCASE("nonexistent config file") {
    auto r = testsup::run_cli_binary({"--config", (tmp.path() / "nope.toml").string()});
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("nope.toml") != std::string::npos);
  }
  SUBCASE("unknown stage name") {
    auto r = testsup::run_cli_binary({"--config", config.string(), "--stage", "embiggen"});
    CHECK(r.exit_code == 2);
  }
  SUBCASE("--stage disagrees with subcommand") {
    auto r = testsup::run_cli_binary({"--config", config.string(), "--stage", "judge", "elo"});
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("stage") != std::string::npos);
  }
  SUBCASE("unknown attribute") {
    auto r = testsup::run_cli_binary(
        {"--config", config.string(), "--stage", "report", "--attribute", "Sparkle"});
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("Sparkle") != std::string::npos);
  }
  SUBCASE("unknown judge id") {
    auto r = testsup::run_cli_binary(
        {"--config", config.string(), "--stage", "judge", "--judges", "bogus"});
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("bogus") != std::string::npos);
  }
}

TEST_CASE("cli surfaces config file problems as exit 2") {
  testsup::TempDir tmp;

  SUBCASE("unsupported judge scale") {
    std::string text = config_toml("http://127.0.0.1:1/v1");
    auto at = text.find("scale_max = 10.0");
    REQUIRE(at != std::string::npos);
    text.replace(at, std::string("scale_max = 10.0").size(), "scale_max = 5.0");
    fs::path config = tmp.path() / "run.toml";
    testsup::write_file(config, text);
    auto r = testsup::run_cli_binary({"--config", config.string()});
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("scale_max") != std::string::npos);
  }
  SUBCASE("dataset file missing") {
    std::string text = config_toml("http://127.0.0.1:1/v1");
    auto at = text.find("arena_mini.jsonl");
    text.replace(at, std::string("arena_mini.jsonl").size(), "arena_gone.jsonl");
    fs::path config = tmp.path() / "run.toml";
    testsup::write_file(config, text);
    auto r = testsup::run_cli_binary({"--config", config.string()});
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("arena_gone.jsonl") != std::string::npos);
  }
  SUBCASE("malformed toml") {
    fs::path config = tmp.path() / "run.toml";
    testsup::write_file(config, "[data\narena_jsonl = [\"x\"]\n");
    auto r = testsup::run_cli_binary({"--config", config.string()});
    CHECK(r.exit_code == 2);
  }
}

TEST_CASE("cli reports missing upstream artifacts as exit 3") {
  testsup::MockJudgeServer server;
  testsup::TempDir tmp;
  fs::path config = write_config(tmp, server.base_url());
  auto r = testsup::run_cli_binary({"--config", config.string(), "--stage", "train"});
  CHECK(r.exit_code == 3);
  CHECK(r.output.find("filter") != std::string::npos);
}

TEST_CASE("offline run with a cold cache is an endpoint failure") {
  testsup::TempDir tmp;
  fs::path config = write_config(tmp, "http://127.0.0.1:1/v1");
  auto r = testsup::run_cli_binary(
      {"--config", config.string(), "--stage", "filter", "--offline"});
  CHECK(r.exit_code == 4);
  CHECK(r.output.find("offline") != std::string::npos);
}

TEST_CASE("cli pipeline end to end against the mock endpoint") {
  testsup::MockJudgeServer server;
  testsup::TempDir tmp;
  fs::path config = write_config(tmp, server.base_url());
  fs::path out = tmp.path() / "out";

  // Stage by stage, starting with the bare subcommand spelling.
  auto filter = testsup::run_cli_binary({"filter", "--config", config.string()});
  REQUIRE_MESSAGE(filter.exit_code == 0, filter.output);
  CHECK(filter.output.find("kept 18/24") != std::string::npos);
  CHECK(line_count(testsup::read_file(out / "pairs.jsonl")) == 18);
  CHECK(line_count(testsup::read_file(out / "decisions.jsonl")) == 24);
  auto decisions = ingest::decisions_from_jsonl_file(out / "decisions.jsonl");
  std::size_t kept = 0;
  for (const auto& d : decisions) {
    kept += d.keep ? 1 : 0;
    CHECK(d.category != "undecided");
  }
  CHECK(kept == 18);
  CHECK(server.requests() == 24);

  for (const char* stage : {"judge", "train", "shap", "elo", "report"}) {
    auto r = testsup::run_cli_binary({"--config", config.string(), "--stage", stage});
    REQUIRE_MESSAGE(r.exit_code == 0, (std::string(stage) + ": " + r.output));
  }
  // 24 filter calls plus 18 pairs x 2 sides x 2 judges, every prompt distinct.
  CHECK(server.requests() == 96);

  auto verdicts = judge::load_verdicts(out / "verdicts.jsonl");
  REQUIRE(verdicts.size() == 18);
  for (const auto& score : verdicts) {
    CHECK(score.a.verdicts.size() == 2);
    CHECK(score.b.verdicts.size() == 2);
  }

  ojson model = ojson::parse(testsup::read_file(out / "model.json"));
  CHECK(model.at("format") == "rationeval-ensemble");
  CHECK(model.at("prior").get<double>() == 0.0);
  CHECK(model.at("trees").size() % 2 == 0);

  ojson shap_meta = ojson::parse(testsup::read_file(out / "shap_metadata.json"));
  CHECK(shap_meta.at("background_rows") == 18);
  CHECK(shap_meta.at("background_origin") == "train[all 18]");
  CHECK(shap_meta.at("instances") == 18);

  ojson ranks = ojson::parse(testsup::read_file(out / "ranks.json"));
  CHECK(ranks.at("format") == "rationeval-ranks");
  CHECK(ranks.at("skipped_pairs") == 0);
  REQUIRE(ranks.at("tables").size() == 13);
  CHECK(ranks.at("tables").at(0).at("basis") == "human_preference");
  for (const auto& table : ranks.at("tables")) {
    CHECK(table.at("models").size() == 6);
  }
  CHECK(line_count(testsup::read_file(out / "tables" / "leaderboard.csv")) == 79);

  std::vector<fs::path> charts = tree_files(out / "charts");
  CHECK(charts.size() == 30);  // 3 fixed + 12 density + 13 elo + 2 radar
  std::string radar = testsup::read_file(out / "charts" / "radar_rank.svg");
  for (Attribute a : all_attributes()) {
    CAPTURE(attribute_name(a));
    CHECK(radar.find(std::string(attribute_name(a))) != std::string::npos);
  }

  ojson run_meta = ojson::parse(testsup::read_file(out / "run.json"));
  std::vector<std::string> stages = run_meta.at("stages").get<std::vector<std::string>>();
  CHECK(stages == std::vector<std::string>{"filter", "judge", "train", "shap", "elo",
                                           "report"});
  CHECK(!run_meta.contains("offline"));
  CHECK(run_meta.dump().find(out.string()) == std::string::npos);

  // Offline replay from the shared cache into a second directory must
  // reproduce every artifact byte without touching the endpoint.
  long before_replay = server.requests();
  fs::path out2 = tmp.path() / "out2";
  auto replay = testsup::run_cli_binary({"--config", config.string(), "--stage", "all",
                                         "--out", out2.string(), "--offline"});
  REQUIRE_MESSAGE(replay.exit_code == 0, replay.output);
  CHECK(server.requests() == before_replay);
  auto original_files = tree_files(out);
  REQUIRE(tree_files(out2) == original_files);
  for (const fs::path& rel : original_files) {
    CAPTURE(rel.string());
    CHECK(testsup::read_file(out / rel) == testsup::read_file(out2 / rel));
  }

  // A judge subset reuses the same cache entries.
  fs::path out3 = tmp.path() / "out3";
  auto f3 = testsup::run_cli_binary(
      {"--config", config.string(), "--stage", "filter", "--out", out3.string()});
  REQUIRE_MESSAGE(f3.exit_code == 0, f3.output);
  auto j3 = testsup::run_cli_binary({"--config", config.string(), "--stage", "judge",
                                     "--out", out3.string(), "--judges", "mock_one"});
  REQUIRE_MESSAGE(j3.exit_code == 0, j3.output);
  CHECK(server.requests() == before_replay);
  auto subset = judge::load_verdicts(out3 / "verdicts.jsonl");
  REQUIRE(subset.size() == 18);
  for (const auto& score : subset) {
    REQUIRE(score.a.verdicts.size() == 1);
    CHECK(score.a.verdicts.front().judge_id == "mock_one");
  }

  // --attribute narrows report charts to one attribute (human elo stays).
  fs::path out4 = tmp.path() / "out4";
  fs::copy(out, out4, fs::copy_options::recursive);
  fs::remove_all(out4 / "charts");
  auto grammar = testsup::run_cli_binary({"--config", config.string(), "--stage", "report",
                                          "--out", out4.string(), "--attribute", "Grammar"});
  REQUIRE_MESSAGE(grammar.exit_code == 0, grammar.output);
  std::set<std::string> names;
  for (const fs::path& rel : tree_files(out4 / "charts")) names.insert(rel.string());
  CHECK(names == std::set<std::string>{"diff_box.svg", "density_grammar.svg",
                                       "elo_grammar.svg", "elo_human_preference.svg",
                                       "radar_rank.svg", "radar_score.svg",
                                       "shap_beeswarm.svg", "shap_importance.svg"});

  // --seed reroutes the stochastic stages.
  auto reseeded = testsup::run_cli_binary({"--config", config.string(), "--stage", "elo",
                                           "--out", out4.string(), "--seed", "123"});
  REQUIRE_MESSAGE(reseeded.exit_code == 0, reseeded.output);
  CHECK(testsup::read_file(out4 / "tables" / "leaderboard.csv") !=
        testsup::read_file(out / "tables" / "leaderboard.csv"));
}
