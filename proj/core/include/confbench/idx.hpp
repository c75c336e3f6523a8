#ifndef CONFBENCH_IDX_HPP
#define CONFBENCH_IDX_HPP

#include <filesystem>
#include <vector>

#include "confbench/tensor.hpp"

namespace confbench {

/// Reads a big-endian IDX image file (magic 0x00000803, three uint32
/// dimension sizes N, H, W, then N*H*W uint8 pixels). Returns a
/// [N x 1 x H x W] tensor with pixel values scaled to [0, 1] by /255.
Tensor parse_idx_images(const std::filesystem::path& path);

/// Reads a big-endian IDX label file (magic 0x00000801, one uint32 count,
/// then `count` uint8 labels).
std::vector<int> parse_idx_labels(const std::filesystem::path& path);

}  // namespace confbench

#endif  // CONFBENCH_IDX_HPP
