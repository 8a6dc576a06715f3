#include "semgan/layers.hpp"

#include <cmath>

namespace semgan {

template <typename T>
Conv2d<T>::Conv2d(const std::string& name, int in_channels, int out_channels,
                  int kernel, int stride, int pad)
    : weight(name + ".weight", Shape{out_channels, in_channels, kernel, kernel}),
      bias(name + ".bias", Shape{1, out_channels, 1, 1}),
      stride_(stride),
      pad_(pad) {}

template <typename T>
void Conv2d<T>::init(Rng& rng, double gain) {
  const Shape s = weight.value.shape();
  const double fan_in = static_cast<double>(s.c) * s.h * s.w;
  const double std = gain / std::sqrt(fan_in);
  for (T& v : weight.value.values()) v = static_cast<T>(std * standard_normal(rng));
  bias.value.fill(T{0});
}

template <typename T>
Var Conv2d<T>::operator()(Graph<T>& g, Var x) {
  return g.conv2d(x, g.param(weight), g.param(bias), stride_, pad_);
}

template class Conv2d<float>;
template class Conv2d<double>;

}  // namespace semgan
