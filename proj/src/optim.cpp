#include "semgan/optim.hpp"

#include <cmath>

#include "semgan/errors.hpp"
#include "semgan/kernels.hpp"

namespace semgan {

namespace {

// Parameter names repeat across models sharing an optimizer, so the
// position is part of the key.
std::string state_key(const std::string& prefix, const char* moment, std::size_t index,
                      const std::string& name) {
  return prefix + moment + "/" + std::to_string(index) + "/" + name;
}

}  // namespace

template <typename T>
Adam<T>::Adam(std::vector<Parameter<T>*> params, AdamConfig config)
    : params_(std::move(params)), config_(config) {
  for (const auto* p : params_) {
    m_.emplace_back(p->value.shape());
    v_.emplace_back(p->value.shape());
  }
}

template <typename T>
void Adam<T>::zero_grad() {
  for (auto* p : params_) p->zero_grad();
}

template <typename T>
void Adam<T>::step() {
  ++t_;
  kernels::AdamCoefficients coef;
  coef.learning_rate = config_.learning_rate;
  coef.beta1 = config_.beta1;
  coef.beta2 = config_.beta2;
  coef.epsilon = config_.epsilon;
  coef.bias_correction1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  coef.bias_correction2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    kernels::adam_update(coef, params_[i]->value.values(),
                         std::span<const T>(params_[i]->grad.values()),
                         m_[i].values(), v_[i].values());
  }
}

template <typename T>
void Adam<T>::save(SnapshotFile& file, const std::string& prefix) const {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    file.put(state_key(prefix, "m", i, params_[i]->name), m_[i]);
    file.put(state_key(prefix, "v", i, params_[i]->name), v_[i]);
  }
  file.meta()["optimizers"][prefix] = t_;
}

template <typename T>
void Adam<T>::load(const SnapshotFile& file, const std::string& prefix) {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Tensor<T> m = file.get<T>(state_key(prefix, "m", i, params_[i]->name));
    Tensor<T> v = file.get<T>(state_key(prefix, "v", i, params_[i]->name));
    if (!(m.shape() == m_[i].shape()) || !(v.shape() == v_[i].shape())) {
      throw Error(ErrorCategory::kSpecMismatch,
                  "optimizer state shape mismatch for " + params_[i]->name);
    }
    m_[i] = std::move(m);
    v_[i] = std::move(v);
  }
  t_ = file.meta().at("optimizers").at(prefix).get<std::int64_t>();
}

template class Adam<float>;
template class Adam<double>;

}  // namespace semgan
