#pragma once

#include <string>
#include <vector>

#include "semgan/graph.hpp"
#include "semgan/random.hpp"

namespace semgan {

template <typename T>
class Conv2d {
 public:
  Conv2d(const std::string& name, int in_channels, int out_channels, int kernel,
         int stride, int pad);

  // He-style normal init, std = gain / sqrt(fan_in); bias zero.
  void init(Rng& rng, double gain);
  Var operator()(Graph<T>& g, Var x);

  int in_channels() const { return weight.value.shape().c; }
  int out_channels() const { return weight.value.shape().n; }

  Parameter<T> weight;
  Parameter<T> bias;

 private:
  int stride_;
  int pad_;
};

template <typename T>
void collect(std::vector<Conv2d<T>>& layers, std::vector<Parameter<T>*>& out) {
  for (auto& layer : layers) {
    out.push_back(&layer.weight);
    out.push_back(&layer.bias);
  }
}

extern template class Conv2d<float>;
extern template class Conv2d<double>;

}  // namespace semgan
