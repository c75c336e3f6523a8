#include "confbench/idx.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>

#include "confbench/errors.hpp"

namespace confbench {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::string hex_bytes(std::uint32_t word) {
  std::ostringstream out;
  out << std::hex;
  for (int shift = 24; shift >= 0; shift -= 8) {
    out << ((word >> shift) & 0xFF);
    if (shift) out << ' ';
  }
  return out.str();
}

class BigEndianReader {
 public:
  explicit BigEndianReader(const std::filesystem::path& path)
      : path_(path), in_(path, std::ios::binary) {
    if (!in_) {
      throw IoError("cannot open IDX file: " + path.string());
    }
  }

  std::uint32_t read_u32() {
    unsigned char bytes[4];
    in_.read(reinterpret_cast<char*>(bytes), 4);
    if (in_.gcount() != 4) {
      throw FormatError("IDX file truncated in header: " + path_.string());
    }
    return (static_cast<std::uint32_t>(bytes[0]) << 24) |
           (static_cast<std::uint32_t>(bytes[1]) << 16) |
           (static_cast<std::uint32_t>(bytes[2]) << 8) |
           static_cast<std::uint32_t>(bytes[3]);
  }

  std::vector<std::uint8_t> read_payload(std::size_t expected) {
    std::vector<std::uint8_t> payload(expected);
    in_.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(expected));
    const std::size_t got = static_cast<std::size_t>(in_.gcount());
    if (got != expected) {
      throw FormatError("IDX payload truncated: expected " + std::to_string(expected) +
                        " bytes, found " + std::to_string(got) + " in " + path_.string());
    }
    // A trailing byte would mean the header lied about the sizes.
    char extra;
    if (in_.read(&extra, 1); in_.gcount() != 0) {
      throw FormatError("IDX payload longer than header describes: " + path_.string());
    }
    return payload;
  }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
};

}  // namespace

Tensor parse_idx_images(const std::filesystem::path& path) {
  BigEndianReader reader(path);
  const std::uint32_t magic = reader.read_u32();
  if (magic != kImageMagic) {
    throw FormatError("IDX image file has bad magic (" + hex_bytes(magic) + ", expected " +
                      hex_bytes(kImageMagic) + "): " + path.string());
  }
  const std::size_t count = reader.read_u32();
  const std::size_t height = reader.read_u32();
  const std::size_t width = reader.read_u32();
  const auto payload = reader.read_payload(count * height * width);

  Tensor images({count, 1, height, width});
  for (std::size_t i = 0; i < payload.size(); ++i) {
    images.data[i] = static_cast<double>(payload[i]) / 255.0;
  }
  return images;
}

std::vector<int> parse_idx_labels(const std::filesystem::path& path) {
  BigEndianReader reader(path);
  const std::uint32_t magic = reader.read_u32();
  if (magic != kLabelMagic) {
    throw FormatError("IDX label file has bad magic (" + hex_bytes(magic) + ", expected " +
                      hex_bytes(kLabelMagic) + "): " + path.string());
  }
  const std::size_t count = reader.read_u32();
  const auto payload = reader.read_payload(count);

  std::vector<int> labels(count);
  for (std::size_t i = 0; i < count; ++i) labels[i] = payload[i];
  return labels;
}

}  // namespace confbench
