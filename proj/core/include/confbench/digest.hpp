#ifndef CONFBENCH_DIGEST_HPP
#define CONFBENCH_DIGEST_HPP

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace confbench {

/// SHA-256 of a byte buffer as lowercase hex.
std::string sha256_hex(std::span<const unsigned char> bytes);
std::string sha256_hex(const std::string& text);

/// SHA-256 over the raw little-endian bytes of a double array. Used for the
/// freeze contract: two parameter sets hash equal iff they are bit-identical.
std::string sha256_hex(std::span<const double> values);

/// SHA-256 of a file's contents (streamed).
std::string sha256_file(const std::filesystem::path& path);

}  // namespace confbench

#endif  // CONFBENCH_DIGEST_HPP
