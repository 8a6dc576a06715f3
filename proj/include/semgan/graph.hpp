#pragma once

// Tape-based reverse-mode differentiation over NCHW tensors.
//
// A Graph records every operation applied during one forward pass. Calling
// backward() on a scalar node propagates gradients only along paths that
// reach the requested parameter set, so discriminator and generator
// objectives built on one shared forward pass can be differentiated
// independently. Gradients are accumulated into Parameter::grad.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "semgan/tensor.hpp"

namespace semgan {

template <typename T>
struct Parameter {
  Parameter() = default;
  Parameter(std::string param_name, Shape shape)
      : name(std::move(param_name)), value(shape), grad(shape) {}

  std::string name;
  Tensor<T> value;
  Tensor<T> grad;

  void zero_grad() { grad.fill(T{0}); }
};

struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

template <typename T>
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor<T> value);
  // The same Parameter always maps to the same node within one graph.
  Var param(Parameter<T>& p);

  // Convolution with square kernel; w is Cout x Cin x k x k, b is 1 x Cout.
  Var conv2d(Var x, Var w, Var b, int stride, int pad);
  Var upsample2x(Var x);
  Var concat_channels(Var a, Var b);
  // Per-sample, per-channel normalization without affine terms.
  Var instance_norm(Var x, T eps = T(1e-5));
  Var leaky_relu(Var x, T slope);
  Var relu(Var x) { return leaky_relu(x, T{0}); }
  Var tanh(Var x);
  Var sigmoid(Var x);
  // atanh(clamp(x, -bound, bound)); zero gradient where clamped.
  Var atanh(Var x, T bound);
  Var add(Var a, Var b);
  // x * s for a single-element s.
  Var scale(Var x, Var s);

  // mean over all elements of log(clamp(p)) or, with `complement`,
  // log(1 - clamp(p)); clamp to [eps, 1 - eps].
  Var mean_log(Var p, bool complement, T eps);
  // Mean per-pixel cross entropy of softmax(logits) against integer labels.
  Var softmax_cross_entropy(Var logits, const LabelBatch& labels);
  // mean over N*C*H*W of mask * |a - b|; the N x 1 x H x W mask is broadcast
  // over channels. Without a mask every weight is 1.
  Var weighted_l1(Var a, Var b, const Tensor<T>* mask);
  Var weighted_sum(std::span<const Var> terms, std::span<const T> coefs);

  const Tensor<T>& value(Var v) const { return nodes_.at(v.id).value; }
  // Gradient of the most recent backward() with respect to node v; empty if
  // v was not on a relevant path.
  const Tensor<T>& grad(Var v) const { return nodes_.at(v.id).grad; }

  // d(loss)/d(p) accumulated into p.grad for every p in wrt.
  void backward(Var loss, std::span<Parameter<T>* const> wrt);

  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor<T> value;
    Tensor<T> grad;
    std::vector<int> inputs;
    std::function<void(int)> backward;
    Parameter<T>* param = nullptr;
  };

  Var push(Tensor<T> value, std::vector<int> inputs,
           std::function<void(int)> backward);
  // Gradient buffer for input id, or nullptr when it needs no gradient.
  Tensor<T>* grad_sink(int id);
  const Tensor<T>& upstream(int id) const { return nodes_[id].grad; }

  std::vector<Node> nodes_;
  std::vector<char> relevant_;
  std::unordered_map<const Parameter<T>*, int> param_nodes_;
};

extern template class Graph<float>;
extern template class Graph<double>;

}  // namespace semgan
