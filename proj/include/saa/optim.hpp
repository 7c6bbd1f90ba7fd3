#pragma once

// SGD with classic momentum, cosine learning-rate decay, and the parameter
// EMA used as the evaluation model.

#include <cmath>
#include <cstdint>

#include "saa/errors.hpp"
#include "saa/net.hpp"
#include "saa/tensor.hpp"

namespace saa {

// lr(step) = base * cos(7*pi*step / (16*total)) — decays to cos(7pi/16), not 0.
inline double cosine_lr(std::uint64_t step, std::uint64_t total_steps, double base_lr) {
  if (total_steps == 0 || step > total_steps)
    throw TrainError("cosine_lr: step outside schedule");
  constexpr double kPi = 3.14159265358979323846;
  return base_lr * std::cos(7.0 * kPi * static_cast<double>(step) /
                            (16.0 * static_cast<double>(total_steps)));
}

// v <- momentum*v + g + wd*p ; p <- p - lr*v
template <typename T>
void sgd_momentum_step(Tensor<T>& param, Tensor<T>& velocity, const Tensor<T>& grad,
                       double lr, double momentum, double weight_decay) {
  for (std::size_t i = 0; i < param.numel(); ++i) {
    T v = static_cast<T>(momentum) * velocity[i] + grad[i] +
          static_cast<T>(weight_decay) * param[i];
    velocity[i] = v;
    param[i] -= static_cast<T>(lr) * v;
  }
}

template <typename T>
void sgd_momentum_step(NetParams<T>& params, NetParams<T>& velocity,
                       const NetParams<T>& grads, double lr, double momentum,
                       double weight_decay) {
  auto p = params.named();
  auto v = velocity.named();
  auto g = grads.named();
  for (std::size_t i = 0; i < p.size(); ++i)
    sgd_momentum_step(*p[i].second, *v[i].second, *g[i].second, lr, momentum, weight_decay);
}

// ema <- decay*ema + (1-decay)*param
template <typename T>
void ema_update(Tensor<T>& ema, const Tensor<T>& param, double decay) {
  for (std::size_t i = 0; i < ema.numel(); ++i)
    ema[i] = static_cast<T>(decay) * ema[i] + static_cast<T>(1.0 - decay) * param[i];
}

template <typename T>
void ema_update(NetParams<T>& ema, const NetParams<T>& params, double decay) {
  auto e = ema.named();
  auto p = params.named();
  for (std::size_t i = 0; i < e.size(); ++i) ema_update(*e[i].second, *p[i].second, decay);
}

} // namespace saa
