#ifndef CONFBENCH_TENSOR_HPP
#define CONFBENCH_TENSOR_HPP

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace confbench {

/// Dense row-major array of 64-bit floats with an optional gradient buffer
/// of the same shape (empty `grad` means "no gradient attached").
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;
  std::vector<double> grad;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> dims);
  Tensor(std::vector<std::size_t> dims, std::vector<double> values);
  Tensor(std::initializer_list<std::size_t> dims, std::vector<double> values);

  static Tensor zeros(std::vector<std::size_t> dims) { return Tensor(std::move(dims)); }

  std::size_t size() const { return data.size(); }
  std::size_t rank() const { return shape.size(); }
  std::size_t dim(std::size_t axis) const { return shape[axis]; }

  /// Number of rows / row width when viewed as a 2-D [rows x cols] array.
  /// For rank > 2 the row width is the product of the trailing dimensions.
  std::size_t rows() const;
  std::size_t cols() const;

  double& at(std::size_t i) { return data[i]; }
  double at(std::size_t i) const { return data[i]; }
  double& at(std::size_t i, std::size_t j) { return data[i * cols() + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols() + j]; }

  void ensure_grad();
  void clear_grad();
  bool has_grad() const { return !grad.empty(); }

  bool all_finite() const;
  bool same_shape(const Tensor& other) const { return shape == other.shape; }

  std::string shape_string() const;
};

/// Product of dimension sizes.
std::size_t shape_size(const std::vector<std::size_t>& dims);

std::string shape_string(const std::vector<std::size_t>& dims);

/// Throws ShapeError naming both shapes when they differ.
void require_same_shape(const Tensor& a, const Tensor& b, const char* context);

}  // namespace confbench

#endif  // CONFBENCH_TENSOR_HPP
