#pragma once

#include <cmath>

#include "posh/tape.hpp"

namespace posh::nn {

/// Adam with bias correction. Moment buffers are aligned with the parameter
/// store entry order.
template <typename T>
struct AdamState {
  T lr = static_cast<T>(3e-4);
  T beta1 = static_cast<T>(0.9);
  T beta2 = static_cast<T>(0.999);
  T eps = static_cast<T>(1e-8);
  std::int64_t step_count = 0;
  std::vector<Tensor<T>> m, v;

  void init(const ParamStore<T>& store) {
    m.clear();
    v.clear();
    for (const auto& e : store.entries) {
      m.push_back(Tensor<T>::zeros(e.value.shape));
      v.push_back(Tensor<T>::zeros(e.value.shape));
    }
    step_count = 0;
  }

  /// One update from the gradients currently held in the store.
  void step(ParamStore<T>& store) {
    if (m.size() != store.size()) raise(Errc::ShapeMismatch, "adam state not initialized");
    ++step_count;
    const T bc1 = T{1} - std::pow(beta1, static_cast<T>(step_count));
    const T bc2 = T{1} - std::pow(beta2, static_cast<T>(step_count));
    for (std::size_t p = 0; p < store.size(); ++p) {
      auto& e = store.entries[p];
      if (!e.grad.same_shape(e.value)) raise(Errc::ShapeMismatch, "grad shape for " + e.name);
      Tensor<T>& mp = m[p];
      Tensor<T>& vp = v[p];
      for (std::size_t i = 0; i < e.value.v.size(); ++i) {
        const T g = e.grad.v[i];
        mp.v[i] = beta1 * mp.v[i] + (T{1} - beta1) * g;
        vp.v[i] = beta2 * vp.v[i] + (T{1} - beta2) * g * g;
        const T mhat = mp.v[i] / bc1;
        const T vhat = vp.v[i] / bc2;
        e.value.v[i] -= lr * mhat / (std::sqrt(vhat) + eps);
      }
    }
  }
};

/// Averages per-micro-batch gradients over a fixed number of calls; the
/// caller fires the optimizer step when add() reports the window complete.
template <typename T>
class GradAccumulator {
 public:
  GradAccumulator() = default;
  GradAccumulator(const ParamStore<T>& store, int steps) : steps_(steps) {
    if (steps < 1) raise(Errc::ConfigError, "accumulation steps must be >= 1");
    for (const auto& e : store.entries) buf_.push_back(Tensor<T>::zeros(e.value.shape));
  }

  /// Folds the store's current gradients into the running mean. On the final
  /// call of the window the mean is written back into the store's gradient
  /// buffers and true is returned.
  bool add(ParamStore<T>& store) {
    if (buf_.size() != store.size()) raise(Errc::ShapeMismatch, "accumulator not initialized");
    const T w = T{1} / static_cast<T>(steps_);
    for (std::size_t p = 0; p < store.size(); ++p) {
      const Tensor<T>& g = store.entries[p].grad;
      for (std::size_t i = 0; i < g.v.size(); ++i) buf_[p].v[i] += w * g.v[i];
    }
    if (++count_ < steps_) return false;
    for (std::size_t p = 0; p < store.size(); ++p) {
      store.entries[p].grad = buf_[p];
      std::fill(buf_[p].v.begin(), buf_[p].v.end(), T{});
    }
    count_ = 0;
    return true;
  }

  int steps() const { return steps_; }

 private:
  int steps_ = 1;
  int count_ = 0;
  std::vector<Tensor<T>> buf_;
};

}  // namespace posh::nn
