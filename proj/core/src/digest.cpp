#include "confbench/digest.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <memory>
#include <stdexcept>

#include "confbench/errors.hpp"

namespace confbench {

namespace {

struct DigestContext {
  DigestContext() : ctx(EVP_MD_CTX_new()) {
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
      throw std::runtime_error("sha256: failed to initialize digest");
    }
  }
  ~DigestContext() { EVP_MD_CTX_free(ctx); }

  void update(const void* data, std::size_t len) {
    if (EVP_DigestUpdate(ctx, data, len) != 1) {
      throw std::runtime_error("sha256: digest update failed");
    }
  }

  std::string finish() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx, digest.data(), &len) != 1) {
      throw std::runtime_error("sha256: digest finalization failed");
    }
    std::string hex(2 * len, '0');
    static const char* alphabet = "0123456789abcdef";
    for (unsigned int i = 0; i < len; ++i) {
      hex[2 * i] = alphabet[digest[i] >> 4];
      hex[2 * i + 1] = alphabet[digest[i] & 0xF];
    }
    return hex;
  }

  EVP_MD_CTX* ctx;
};

}  // namespace

std::string sha256_hex(std::span<const unsigned char> bytes) {
  DigestContext ctx;
  ctx.update(bytes.data(), bytes.size());
  return ctx.finish();
}

std::string sha256_hex(const std::string& text) {
  DigestContext ctx;
  ctx.update(text.data(), text.size());
  return ctx.finish();
}

std::string sha256_hex(std::span<const double> values) {
  DigestContext ctx;
  ctx.update(values.data(), values.size() * sizeof(double));
  return ctx.finish();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open file for hashing: " + path.string());
  }
  DigestContext ctx;
  std::array<char, 1 << 16> buffer;
  while (in) {
    in.read(buffer.data(), buffer.size());
    const std::streamsize got = in.gcount();
    if (got > 0) ctx.update(buffer.data(), static_cast<std::size_t>(got));
  }
  return ctx.finish();
}

}  // namespace confbench
