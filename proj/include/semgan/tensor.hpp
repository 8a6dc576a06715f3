#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace semgan {

// NCHW extent of a dense tensor. Scalars are 1x1x1x1.
struct Shape {
  int n = 0;
  int c = 0;
  int h = 0;
  int w = 0;

  std::size_t numel() const {
    return static_cast<std::size_t>(n) * c * h * w;
  }
  std::size_t plane() const { return static_cast<std::size_t>(h) * w; }
  bool operator==(const Shape&) const = default;
  std::string str() const;

  static Shape scalar() { return {1, 1, 1, 1}; }
};

template <typename T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T{0})
      : shape_(shape), data_(shape.numel(), fill) {}
  Tensor(Shape shape, std::vector<T> data);

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  T& operator[](std::size_t i) { return data_[i]; }
  T operator[](std::size_t i) const { return data_[i]; }

  std::size_t offset(int n, int c, int h, int w) const {
    return ((static_cast<std::size_t>(n) * shape_.c + c) * shape_.h + h) *
               shape_.w + w;
  }
  T& at(int n, int c, int h, int w) { return data_[offset(n, c, h, w)]; }
  T at(int n, int c, int h, int w) const { return data_[offset(n, c, h, w)]; }

  T* sample(int n) { return data_.data() + offset(n, 0, 0, 0); }
  const T* sample(int n) const { return data_.data() + offset(n, 0, 0, 0); }

  void fill(T value);
  T item() const;  // requires exactly one element

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out(shape_);
    for (std::size_t i = 0; i < data_.size(); ++i)
      out[i] = static_cast<U>(data_[i]);
    return out;
  }

 private:
  Shape shape_{};
  std::vector<T> data_;
};

// Per-pixel integer class ids for a batch: N x H x W, row-major.
struct LabelBatch {
  int n = 0;
  int h = 0;
  int w = 0;
  std::vector<std::int32_t> ids;
};

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace semgan
