#include "rationeval/chat_client.hpp"

#include <unistd.h>

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "rationeval/errors.hpp"
#include "rationeval/hashing.hpp"

namespace rationeval::judge {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::string out((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return out;
}

std::optional<std::string> env_value(const std::string& name) {
  const char* v = std::getenv(name.c_str());
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

struct SplitUrl {
  std::string scheme_host_port;
  std::string path_prefix;  // no trailing slash
};

SplitUrl split_base_url(const std::string& url) {
  size_t scheme = url.find("://");
  if (scheme == std::string::npos) {
    throw ConfigError("endpoint url must include a scheme: " + url);
  }
  size_t path = url.find('/', scheme + 3);
  if (path == std::string::npos) return {url, ""};
  std::string prefix = url.substr(path);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {url.substr(0, path), prefix};
}

bool retryable_status(int status) {
  return status == 429 || (status >= 500 && status < 600);
}

std::string body_excerpt(const std::string& body) {
  if (body.size() <= 200) return body;
  return body.substr(0, 200) + "...";
}

}  // namespace

JudgeCache::JudgeCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::filesystem::path JudgeCache::path_for(const std::string& key) const {
  return dir_ / (key + ".json");
}

std::optional<ojson> JudgeCache::lookup(const std::string& key) const {
  auto path = path_for(key);
  if (!std::filesystem::exists(path)) return std::nullopt;
  try {
    return ojson::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("corrupt cache entry " + path.string() + ": " + e.what());
  }
}

void JudgeCache::store(const std::string& key, const ojson& record) {
  auto path = path_for(key);
  std::string bytes = record.dump(2);
  bytes.push_back('\n');
  if (std::filesystem::exists(path)) {
    if (read_file(path) != bytes) {
      throw InternalError("cache key collision with divergent content: " + path.string());
    }
    return;
  }
  auto tmp = path;
  tmp += ".tmp." + std::to_string(static_cast<unsigned long>(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write cache entry " + tmp.string());
    out << bytes;
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    // Lost the race: another writer renamed first. Verify agreement.
    if (std::filesystem::exists(path)) {
      if (read_file(path) != bytes) {
        throw InternalError("cache key collision with divergent content: " + path.string());
      }
      return;
    }
    throw InternalError("cache rename failed: " + ec.message());
  }
}

ojson canonical_request(const JudgeConfig& config, const std::string& prompt) {
  ojson req;
  req["model"] = config.model_name;
  req["temperature"] = config.temperature;
  req["messages"] = ojson::array({ojson{{"role", "user"}, {"content", prompt}}});
  return req;
}

std::string cache_key(const JudgeConfig& config, const std::string& prompt, int attempt) {
  std::string material = canonical_request(config, prompt).dump();
  if (attempt > 0) material += "\nattempt=" + std::to_string(attempt);
  return sha256_hex(material);
}

std::string env_var_name(const std::string& judge_id, const std::string& suffix) {
  std::string out;
  out.reserve(judge_id.size() + suffix.size() + 1);
  for (char c : judge_id) {
    out += std::isalnum(static_cast<unsigned char>(c))
               ? static_cast<char>(std::toupper(static_cast<unsigned char>(c)))
               : '_';
  }
  out += '_';
  out += suffix;
  return out;
}

ChatClient::ChatClient(std::filesystem::path cache_dir, bool offline)
    : cache_(std::move(cache_dir)), offline_(offline) {}

std::string ChatClient::post_once(const JudgeConfig& config, const std::string& body) {
  std::string base = config.endpoint_url;
  if (auto override_url = env_value(env_var_name(config.judge_id, "BASE_URL"))) {
    base = *override_url;
  }
  if (base.empty()) {
    throw ConfigError("judge " + config.judge_id + " has no endpoint url");
  }
  SplitUrl url = split_base_url(base);

  httplib::Client client(url.scheme_host_port);
  auto timeout = config.timeout;
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  if (auto key = env_value(env_var_name(config.judge_id, "API_KEY"))) {
    client.set_bearer_token_auth(*key);
  }

  auto res = client.Post(url.path_prefix + "/chat/completions", body, "application/json");
  if (!res) {
    throw EndpointError("judge " + config.judge_id + ": transport failure: " +
                            httplib::to_string(res.error()),
                        /*retryable=*/true);
  }
  if (res->status < 200 || res->status >= 300) {
    throw EndpointError("judge " + config.judge_id + ": HTTP " + std::to_string(res->status) +
                        ": " + body_excerpt(res->body),
                        retryable_status(res->status));
  }

  ojson parsed;
  try {
    parsed = ojson::parse(res->body);
  } catch (const nlohmann::json::exception& e) {
    throw EndpointError("judge " + config.judge_id + ": malformed response JSON: " + e.what());
  }
  if (!parsed.contains("choices") || !parsed["choices"].is_array() || parsed["choices"].empty()) {
    throw EndpointError("judge " + config.judge_id + ": response has no choices");
  }
  const auto& message = parsed["choices"][0];
  if (!message.contains("message") || !message["message"].contains("content") ||
      !message["message"]["content"].is_string()) {
    throw EndpointError("judge " + config.judge_id + ": response has no message content");
  }
  return message["message"]["content"].get<std::string>();
}

std::string ChatClient::call_judge(const JudgeConfig& config, const std::string& prompt,
                                   int attempt) {
  const std::string key = cache_key(config, prompt, attempt);
  if (auto cached = cache_.lookup(key)) {
    cache_hits_.fetch_add(1);
    if (!cached->contains("content") || !(*cached)["content"].is_string()) {
      throw DataError("cache entry " + key + " has no content field");
    }
    return (*cached)["content"].get<std::string>();
  }
  if (offline_) {
    throw EndpointError("offline mode: cache miss for judge " + config.judge_id + " (key " +
                        key + ")");
  }

  std::string body = canonical_request(config, prompt).dump();
  std::string content;
  auto backoff = config.initial_backoff;
  for (int tries = 0;; ++tries) {
    network_calls_.fetch_add(1);
    try {
      content = post_once(config, body);
      break;
    } catch (const EndpointError& e) {
      if (!e.retryable() || tries >= config.max_retries) throw;
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }

  ojson record;
  record["key"] = key;
  record["attempt"] = attempt;
  record["request"] = canonical_request(config, prompt);
  record["content"] = content;
  cache_.store(key, record);
  return content;
}

}  // namespace rationeval::judge
