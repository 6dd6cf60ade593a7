#include "rationeval/hashing.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <vector>

#include "rationeval/errors.hpp"

namespace rationeval {

namespace {

std::string to_hex(const unsigned char* digest, size_t len) {
  static const char* kHex = "0123456789abcdef";
  std::string out(len * 2, '0');
  for (size_t i = 0; i < len; ++i) {
    out[2 * i] = kHex[digest[i] >> 4];
    out[2 * i + 1] = kHex[digest[i] & 0xf];
  }
  return out;
}

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) {
      throw InternalError("SHA-256 init failed");
    }
  }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(std::string_view bytes) {
    if (EVP_DigestUpdate(ctx_, bytes.data(), bytes.size()) != 1) {
      throw InternalError("SHA-256 update failed");
    }
  }

  std::string hex() {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_, digest, &len) != 1) {
      throw InternalError("SHA-256 final failed");
    }
    return to_hex(digest, len);
  }

 private:
  EVP_MD_CTX* ctx_;
};

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  Sha256 h;
  h.update(bytes);
  return h.hex();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open for hashing: " + path.string());
  Sha256 h;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    h.update(std::string_view(buf, static_cast<size_t>(in.gcount())));
  }
  return h.hex();
}

std::string sha256_tree(const std::filesystem::path& root) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::vector<std::pair<std::string, std::filesystem::path>> entries;
  entries.reserve(files.size());
  for (const auto& f : files) {
    entries.emplace_back(f.lexically_relative(root).generic_string(), f);
  }
  std::sort(entries.begin(), entries.end());
  Sha256 h;
  const std::string_view sep("\0", 1);
  for (const auto& [rel, path] : entries) {
    h.update(rel);
    h.update(sep);
    h.update(sha256_file(path));
    h.update(sep);
  }
  return h.hex();
}

}  // namespace rationeval
