#include "confbench/tensor.hpp"

#include <cmath>
#include <sstream>

#include "confbench/errors.hpp"

namespace confbench {

std::size_t shape_size(const std::vector<std::size_t>& dims) {
  std::size_t n = 1;
  for (std::size_t d : dims) n *= d;
  return dims.empty() ? 0 : n;
}

std::string shape_string(const std::vector<std::size_t>& dims) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) out << " x ";
    out << dims[i];
  }
  out << ']';
  return out.str();
}

Tensor::Tensor(std::vector<std::size_t> dims)
    : shape(std::move(dims)), data(shape_size(shape), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> dims, std::vector<double> values)
    : shape(std::move(dims)), data(std::move(values)) {
  if (data.size() != shape_size(shape)) {
    throw ShapeError("tensor data length " + std::to_string(data.size()) +
                     " does not match shape " + confbench::shape_string(shape));
  }
}

Tensor::Tensor(std::initializer_list<std::size_t> dims, std::vector<double> values)
    : Tensor(std::vector<std::size_t>(dims), std::move(values)) {}

std::size_t Tensor::rows() const { return shape.empty() ? 0 : shape[0]; }

std::size_t Tensor::cols() const {
  if (shape.size() < 2) return shape.size() == 1 ? 1 : 0;
  std::size_t width = 1;
  for (std::size_t axis = 1; axis < shape.size(); ++axis) width *= shape[axis];
  return width;
}

void Tensor::ensure_grad() {
  if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
}

void Tensor::clear_grad() {
  grad.assign(grad.size(), 0.0);
}

bool Tensor::all_finite() const {
  for (double v : data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::string Tensor::shape_string() const { return confbench::shape_string(shape); }

void require_same_shape(const Tensor& a, const Tensor& b, const char* context) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(context) + ": shapes " + a.shape_string() +
                     " and " + b.shape_string() + " do not match");
  }
}

}  // namespace confbench
