#include "ssvep/tensor.hpp"

#include "ssvep/error.hpp"

namespace ssvep {

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

Tensor::Tensor(Shape s, std::vector<double> values) : shape(std::move(s)), data(std::move(values)) {
  if (data.size() != shape_size(shape)) {
    throw DataError("tensor data length " + std::to_string(data.size()) +
                    " does not match shape " + shape_string(shape));
  }
}

}  // namespace ssvep
