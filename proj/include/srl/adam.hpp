#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "srl/errors.hpp"
#include "srl/tape.hpp"
#include "srl/tensor.hpp"

namespace srl {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.9;
  double epsilon = 1e-8;
  // The rate is multiplied by anneal_factor every anneal_period steps,
  // continuously (real-valued exponent). Both are held in extended precision
  // so the schedule is rounded to double once.
  long double learning_rate = 0.002L;
  long double anneal_factor = 0.75L;
  std::uint64_t anneal_period = 5000;
};

inline double learning_rate(const AdamConfig& cfg, std::uint64_t step) {
  const long double exponent = static_cast<long double>(step) /
                               static_cast<long double>(cfg.anneal_period);
  return static_cast<double>(cfg.learning_rate * std::pow(cfg.anneal_factor, exponent));
}

inline double learning_rate(std::uint64_t step) { return learning_rate(AdamConfig{}, step); }

struct AdamState {
  explicit AdamState(AdamConfig config = {}) : config(config) {}

  AdamConfig config;
  std::uint64_t step = 0;
  // First and second moments, parallel to the parameter store order.
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
  double last_learning_rate = 0.0;
};

// One bias-corrected Adam update over every trainable parameter, using the
// annealed rate for the current step. Increments the step counter and clears
// all gradient accumulators (frozen parameters included).
inline void adam_step(ParameterStore& params, AdamState& state) {
  if (state.first_moment.size() != params.size()) {
    if (!state.first_moment.empty()) {
      throw ArgumentError("optimizer state does not match the parameter store");
    }
    for (const Parameter& p : params) {
      state.first_moment.emplace_back(p.value.shape());
      state.second_moment.emplace_back(p.value.shape());
    }
  }
  const AdamConfig& cfg = state.config;
  const double lr = learning_rate(cfg, state.step);
  const double t = static_cast<double>(state.step + 1);
  const double correction1 = 1.0 - std::pow(cfg.beta1, t);
  const double correction2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = params[k];
    if (p.trainable) {
      Tensor& m = state.first_moment[k];
      Tensor& v = state.second_moment[k];
      m.require_same_shape(p.value, "adam moment");
      for (std::size_t i = 0; i < p.value.size(); ++i) {
        const double g = p.grad[i];
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
        const double m_hat = m[i] / correction1;
        const double v_hat = v[i] / correction2;
        p.value[i] -= lr * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
      }
    }
    p.zero_grad();
  }
  state.last_learning_rate = lr;
  ++state.step;
}

// Rescales all gradients so their global L2 norm is at most max_norm.
// Returns the norm before clipping.
inline double clip_gradients(ParameterStore& params, double max_norm) {
  double sq = 0.0;
  for (const Parameter& p : params) {
    if (!p.trainable) continue;
    for (double g : p.grad.data()) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double factor = max_norm / norm;
    for (Parameter& p : params) {
      if (!p.trainable) continue;
      for (double& g : p.grad.data()) g *= factor;
    }
  }
  return norm;
}

}  // namespace srl
