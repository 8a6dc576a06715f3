#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "semgan/graph.hpp"
#include "semgan/snapshot.hpp"

namespace semgan {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename T>
class Adam {
 public:
  Adam(std::vector<Parameter<T>*> params, AdamConfig config);

  void zero_grad();
  void step();
  std::int64_t steps() const { return t_; }
  const std::vector<Parameter<T>*>& parameters() const { return params_; }

  void save(SnapshotFile& file, const std::string& prefix) const;
  void load(const SnapshotFile& file, const std::string& prefix);

 private:
  std::vector<Parameter<T>*> params_;
  AdamConfig config_;
  std::vector<Tensor<T>> m_;
  std::vector<Tensor<T>> v_;
  std::int64_t t_ = 0;
};

extern template class Adam<float>;
extern template class Adam<double>;

}  // namespace semgan
