#include "semgan/tensor.hpp"

#include <algorithm>
#include <stdexcept>

namespace semgan {

std::string Shape::str() const {
  return "[" + std::to_string(n) + "," + std::to_string(c) + "," +
         std::to_string(h) + "," + std::to_string(w) + "]";
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> data)
    : shape_(shape), data_(std::move(data)) {
  if (data_.size() != shape_.numel()) {
    throw std::invalid_argument("tensor data size " +
                                std::to_string(data_.size()) +
                                " does not match shape " + shape_.str());
  }
}

template <typename T>
void Tensor<T>::fill(T value) {
  std::fill(data_.begin(), data_.end(), value);
}

template <typename T>
T Tensor<T>::item() const {
  if (data_.size() != 1) {
    throw std::logic_error("item() on tensor of shape " + shape_.str());
  }
  return data_[0];
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace semgan
