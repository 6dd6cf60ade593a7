#pragma once

#include <atomic>
#include <filesystem>
#include <optional>
#include <string>

#include "rationeval/core.hpp"
#include "rationeval/judge.hpp"

namespace rationeval::judge {

// One JSON file per key. Write-once: a second write under the same key must
// carry identical bytes or it is an error, which makes the store safe for
// concurrent writers without locking (temp file + atomic rename).
class JudgeCache {
 public:
  explicit JudgeCache(std::filesystem::path dir);

  std::optional<ojson> lookup(const std::string& key) const;
  void store(const std::string& key, const ojson& record);
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path path_for(const std::string& key) const;
  std::filesystem::path dir_;
};

// The canonical chat-completions request body; its bytes are the cache key
// material, so field order here is fixed.
ojson canonical_request(const JudgeConfig& config, const std::string& prompt);

// attempt > 0 marks a whole-verdict retry; it must miss the cache entry of
// the attempt before it, so it is folded into the key.
std::string cache_key(const JudgeConfig& config, const std::string& prompt, int attempt = 0);

// Resolved per judge from <JUDGE_ID>_API_KEY / <JUDGE_ID>_BASE_URL with the
// id uppercased and punctuation mapped to '_'.
std::string env_var_name(const std::string& judge_id, const std::string& suffix);

class ChatClient {
 public:
  ChatClient(std::filesystem::path cache_dir, bool offline = false);

  // Returns the assistant message content. Consults the cache first; on a
  // miss, POSTs <base>/chat/completions and persists the response before
  // returning. Retries 429/5xx/transport failures with exponential backoff.
  std::string call_judge(const JudgeConfig& config, const std::string& prompt, int attempt = 0);

  bool offline() const { return offline_; }
  long network_calls() const { return network_calls_.load(); }
  long cache_hits() const { return cache_hits_.load(); }

 private:
  std::string post_once(const JudgeConfig& config, const std::string& body);

  JudgeCache cache_;
  bool offline_;
  std::atomic<long> network_calls_{0};
  std::atomic<long> cache_hits_{0};
};

}  // namespace rationeval::judge
