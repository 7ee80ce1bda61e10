#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "posh/featurize.hpp"
#include "posh/kernels.hpp"
#include "posh/tensor.hpp"

// Minimal reverse-mode engine: exactly the ops the structure encoder and its
// losses need, recorded on a tape and differentiated by reverse traversal.
// Everything is templated on the scalar type so the same graph can run in
// f32 for training and f64 for finite-difference checks.

namespace posh::nn {

namespace detail {

template <typename T>
void matmul_nn(const T* a, const T* b, T* c, std::size_t n, std::size_t k, std::size_t p,
               bool accumulate) {
  if constexpr (std::is_same_v<T, float>) {
    kernels::active_table().matmul_nn(a, b, c, n, k, p, accumulate);
  } else {
    if (!accumulate)
      for (std::size_t i = 0; i < n * p; ++i) c[i] = T{};
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t kk = 0; kk < k; ++kk) {
        const T av = a[i * k + kk];
        for (std::size_t j = 0; j < p; ++j) c[i * p + j] += av * b[kk * p + j];
      }
  }
}

template <typename T>
void matmul_nt(const T* a, const T* b, T* c, std::size_t n, std::size_t k, std::size_t p,
               bool accumulate) {
  if constexpr (std::is_same_v<T, float>) {
    kernels::active_table().matmul_nt(a, b, c, n, k, p, accumulate);
  } else {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < p; ++j) {
        T s{};
        for (std::size_t kk = 0; kk < k; ++kk) s += a[i * k + kk] * b[j * k + kk];
        c[i * p + j] = accumulate ? c[i * p + j] + s : s;
      }
  }
}

template <typename T>
void matmul_tn(const T* a, const T* b, T* c, std::size_t n, std::size_t k, std::size_t p,
               bool accumulate) {
  if constexpr (std::is_same_v<T, float>) {
    kernels::active_table().matmul_tn(a, b, c, n, k, p, accumulate);
  } else {
    if (!accumulate)
      for (std::size_t i = 0; i < k * p; ++i) c[i] = T{};
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t kk = 0; kk < k; ++kk) {
        const T av = a[i * k + kk];
        for (std::size_t j = 0; j < p; ++j) c[kk * p + j] += av * b[i * p + j];
      }
  }
}

}  // namespace detail

/// Named learnable tensors plus their gradient buffers.
template <typename T>
struct ParamStore {
  struct Entry {
    std::string name;
    Tensor<T> value;
    Tensor<T> grad;
  };
  std::vector<Entry> entries;

  int add(std::string name, Tensor<T> init) {
    Entry e;
    e.name = std::move(name);
    e.grad = Tensor<T>::zeros(init.shape);
    e.value = std::move(init);
    entries.push_back(std::move(e));
    return static_cast<int>(entries.size()) - 1;
  }

  Entry& operator[](int id) { return entries[static_cast<std::size_t>(id)]; }
  const Entry& operator[](int id) const { return entries[static_cast<std::size_t>(id)]; }
  std::size_t size() const { return entries.size(); }

  void zero_grads() {
    for (Entry& e : entries) std::fill(e.grad.v.begin(), e.grad.v.end(), T{});
  }

  template <typename U>
  ParamStore<U> cast() const {
    ParamStore<U> out;
    for (const Entry& e : entries) out.add(e.name, e.value.template cast<U>());
    return out;
  }
};

/// Batchnorm running statistics (not learnable).
template <typename T>
struct BnStats {
  Tensor<T> running_mean;
  Tensor<T> running_var;

  BnStats() = default;
  explicit BnStats(std::int64_t dim) {
    running_mean = Tensor<T>::zeros({dim});
    running_var = Tensor<T>::zeros({dim});
    std::fill(running_var.v.begin(), running_var.v.end(), T{1});
  }

  template <typename U>
  BnStats<U> cast() const {
    BnStats<U> s;
    s.running_mean = running_mean.template cast<U>();
    s.running_var = running_var.template cast<U>();
    return s;
  }
};

enum class Mode { Train, Infer };

struct Var {
  int id = -1;
};

struct Segment {
  std::int64_t begin = 0;
  std::int64_t end = 0;
};

template <typename T>
class Tape {
 public:
  static constexpr T kBnEps = static_cast<T>(1e-5);
  static constexpr T kBnMomentum = static_cast<T>(0.1);

  explicit Tape(ParamStore<T>* store = nullptr) : store_(store) {}

  const Tensor<T>& val(Var v) const { return vals_[static_cast<std::size_t>(v.id)]; }
  Tensor<T>& grad(Var v) {
    auto& g = grads_[static_cast<std::size_t>(v.id)];
    if (g.v.empty()) g = Tensor<T>::zeros(vals_[static_cast<std::size_t>(v.id)].shape);
    return g;
  }

  Var input(Tensor<T> x) { return push(std::move(x), "input"); }

  Var param(int param_id) {
    if (auto it = param_vars_.find(param_id); it != param_vars_.end()) return it->second;
    Var v = push(Tensor<T>((*store_)[param_id].value), "param");
    const Var leaf = v;
    record([this, leaf, param_id] {
      Tensor<T>& g = grad(leaf);
      Tensor<T>& pg = (*store_)[param_id].grad;
      for (std::size_t i = 0; i < g.v.size(); ++i) pg.v[i] += g.v[i];
    });
    param_vars_.emplace(param_id, v);
    return v;
  }

  /// y = x W + bias; x is [n x a], W [a x b], bias [b].
  Var linear(Var xv, Var wv, Var bv) {
    const Tensor<T>& x = val(xv);
    const Tensor<T>& w = val(wv);
    const Tensor<T>& bias = val(bv);
    const auto n = x.rows(), a = x.cols(), b = w.cols();
    if (w.rows() != a || bias.rows() != b)
      raise(Errc::ShapeMismatch, "linear: incompatible shapes");
    Tensor<T> y = Tensor<T>::zeros({n, b});
    detail::matmul_nn(x.data(), w.data(), y.data(), static_cast<std::size_t>(n),
                      static_cast<std::size_t>(a), static_cast<std::size_t>(b), false);
    for (std::int64_t i = 0; i < n; ++i)
      for (std::int64_t j = 0; j < b; ++j) y.at(i, j) += bias[static_cast<std::size_t>(j)];
    Var out = push(std::move(y), "linear");
    record([this, xv, wv, bv, out, n, a, b] {
      const Tensor<T>& gy = grad(out);
      const Tensor<T>& x2 = val(xv);
      const Tensor<T>& w2 = val(wv);
      detail::matmul_nt(gy.data(), w2.data(), grad(xv).data(), static_cast<std::size_t>(n),
                        static_cast<std::size_t>(b), static_cast<std::size_t>(a), true);
      detail::matmul_tn(x2.data(), gy.data(), grad(wv).data(), static_cast<std::size_t>(n),
                        static_cast<std::size_t>(a), static_cast<std::size_t>(b), true);
      Tensor<T>& gb = grad(bv);
      for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = 0; j < b; ++j) gb[static_cast<std::size_t>(j)] += gy.at(i, j);
    });
    return out;
  }

  Var relu(Var xv) {
    const Tensor<T>& x = val(xv);
    Tensor<T> y = x;
    for (T& t : y.v) t = t > T{} ? t : T{};
    Var out = push(std::move(y), "relu");
    record([this, xv, out] {
      const Tensor<T>& gy = grad(out);
      const Tensor<T>& x2 = val(xv);
      Tensor<T>& gx = grad(xv);
      for (std::size_t i = 0; i < gx.v.size(); ++i)
        if (x2.v[i] > T{}) gx.v[i] += gy.v[i];
    });
    return out;
  }

  Var add(Var av, Var bv) {
    const Tensor<T>& a = val(av);
    const Tensor<T>& b = val(bv);
    if (!a.same_shape(b)) raise(Errc::ShapeMismatch, "add: shapes differ");
    Tensor<T> y = a;
    for (std::size_t i = 0; i < y.v.size(); ++i) y.v[i] += b.v[i];
    Var out = push(std::move(y), "add");
    record([this, av, bv, out] {
      const Tensor<T>& gy = grad(out);
      Tensor<T>& ga = grad(av);
      Tensor<T>& gb = grad(bv);
      for (std::size_t i = 0; i < gy.v.size(); ++i) {
        ga.v[i] += gy.v[i];
        gb.v[i] += gy.v[i];
      }
    });
    return out;
  }

  /// Two-layer feed-forward: linear -> ReLU -> linear.
  Var mlp2(Var x, Var w1, Var b1, Var w2, Var b2) {
    return linear(relu(linear(x, w1, b1)), w2, b2);
  }

  /// Rows h[src] || h[dst] || e[edge] for every edge.
  Var gather_concat(Var hv, Var ev, const std::vector<Edge>& edges) {
    const Tensor<T>& h = val(hv);
    const Tensor<T>& e = val(ev);
    const std::int64_t hd = h.cols(), ed = e.cols();
    const std::int64_t m = static_cast<std::int64_t>(edges.size());
    if (e.rows() != m) raise(Errc::ShapeMismatch, "gather_concat: edge feature count");
    Tensor<T> y = Tensor<T>::zeros({m, 2 * hd + ed});
    for (std::int64_t r = 0; r < m; ++r) {
      const Edge& eg = edges[static_cast<std::size_t>(r)];
      if (eg.src >= static_cast<std::uint32_t>(h.rows()) ||
          eg.dst >= static_cast<std::uint32_t>(h.rows()))
        raise(Errc::IndexOutOfRange, "gather_concat: edge endpoint out of range");
      T* row = y.data() + static_cast<std::size_t>(r * (2 * hd + ed));
      const T* hs = h.data() + static_cast<std::size_t>(eg.src) * static_cast<std::size_t>(hd);
      const T* ht = h.data() + static_cast<std::size_t>(eg.dst) * static_cast<std::size_t>(hd);
      const T* er = e.data() + static_cast<std::size_t>(r * ed);
      std::copy(hs, hs + hd, row);
      std::copy(ht, ht + hd, row + hd);
      std::copy(er, er + ed, row + 2 * hd);
    }
    Var out = push(std::move(y), "gather_concat");
    auto edges_copy = std::make_shared<std::vector<Edge>>(edges);
    record([this, hv, ev, out, edges_copy, hd, ed, m] {
      const Tensor<T>& gy = grad(out);
      Tensor<T>& gh = grad(hv);
      Tensor<T>& ge = grad(ev);
      for (std::int64_t r = 0; r < m; ++r) {
        const Edge& eg = (*edges_copy)[static_cast<std::size_t>(r)];
        const T* row = gy.data() + static_cast<std::size_t>(r * (2 * hd + ed));
        T* hs = gh.data() + static_cast<std::size_t>(eg.src) * static_cast<std::size_t>(hd);
        T* ht = gh.data() + static_cast<std::size_t>(eg.dst) * static_cast<std::size_t>(hd);
        T* er = ge.data() + static_cast<std::size_t>(r * ed);
        for (std::int64_t c = 0; c < hd; ++c) hs[c] += row[c];
        for (std::int64_t c = 0; c < hd; ++c) ht[c] += row[hd + c];
        for (std::int64_t c = 0; c < ed; ++c) er[c] += row[2 * hd + c];
      }
    });
    return out;
  }

  /// Row i of the result is the mean of message rows whose target index is i;
  /// nodes with no messages get zeros.
  Var mean_aggregate(Var mv, const std::vector<std::uint32_t>& targets, std::int64_t n) {
    const Tensor<T>& msgs = val(mv);
    const std::int64_t d = msgs.cols();
    if (msgs.rows() != static_cast<std::int64_t>(targets.size()))
      raise(Errc::ShapeMismatch, "mean_aggregate: target count");
    Tensor<T> y = Tensor<T>::zeros({n, d});
    std::vector<std::int64_t> counts(static_cast<std::size_t>(n), 0);
    for (std::size_t r = 0; r < targets.size(); ++r) {
      if (targets[r] >= static_cast<std::uint32_t>(n))
        raise(Errc::IndexOutOfRange, "mean_aggregate: target out of range");
      ++counts[targets[r]];
      const T* src = msgs.data() + r * static_cast<std::size_t>(d);
      T* dst = y.data() + static_cast<std::size_t>(targets[r]) * static_cast<std::size_t>(d);
      for (std::int64_t c = 0; c < d; ++c) dst[c] += src[c];
    }
    for (std::int64_t i = 0; i < n; ++i) {
      if (counts[static_cast<std::size_t>(i)] == 0) continue;
      const T inv = T{1} / static_cast<T>(counts[static_cast<std::size_t>(i)]);
      T* dst = y.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(d);
      for (std::int64_t c = 0; c < d; ++c) dst[c] *= inv;
    }
    Var out = push(std::move(y), "mean_aggregate");
    auto targets_copy = std::make_shared<std::vector<std::uint32_t>>(targets);
    record([this, mv, out, targets_copy, d, counts = std::move(counts)] {
      const Tensor<T>& gy = grad(out);
      Tensor<T>& gm = grad(mv);
      const auto& tg = *targets_copy;
      for (std::size_t r = 0; r < tg.size(); ++r) {
        const T inv = T{1} / static_cast<T>(counts[tg[r]]);
        const T* src = gy.data() + static_cast<std::size_t>(tg[r]) * static_cast<std::size_t>(d);
        T* dst = gm.data() + r * static_cast<std::size_t>(d);
        for (std::int64_t c = 0; c < d; ++c) dst[c] += src[c] * inv;
      }
    });
    return out;
  }

  /// Batch normalization over rows. Train mode normalizes with batch
  /// statistics and updates the running stats in `stats`; infer mode uses the
  /// running stats and records no statistics gradient coupling.
  Var batchnorm(Var xv, Var gammav, Var betav, BnStats<T>& stats, Mode mode) {
    const Tensor<T>& x = val(xv);
    const std::int64_t n = x.rows(), d = x.cols();
    const Tensor<T>& gamma = val(gammav);
    const Tensor<T>& beta = val(betav);
    if (gamma.rows() != d || beta.rows() != d)
      raise(Errc::ShapeMismatch, "batchnorm: parameter dims");

    if (mode == Mode::Infer) {
      Tensor<T> y = Tensor<T>::zeros({n, d});
      for (std::int64_t j = 0; j < d; ++j) {
        const T inv = T{1} / std::sqrt(stats.running_var[static_cast<std::size_t>(j)] + kBnEps);
        const T mu = stats.running_mean[static_cast<std::size_t>(j)];
        const T g = gamma[static_cast<std::size_t>(j)], be = beta[static_cast<std::size_t>(j)];
        for (std::int64_t i = 0; i < n; ++i) y.at(i, j) = (x.at(i, j) - mu) * inv * g + be;
      }
      Var out = push(std::move(y), "batchnorm");
      // Infer-mode backward: dx = dy * gamma * inv_std (stats are constants).
      auto frozen = std::make_shared<BnStats<T>>(stats);
      record([this, xv, gammav, betav, out, frozen, n, d] {
        const Tensor<T>& gy = grad(out);
        const Tensor<T>& x2 = val(xv);
        Tensor<T>& gx = grad(xv);
        Tensor<T>& gg = grad(gammav);
        Tensor<T>& gb = grad(betav);
        const Tensor<T>& gamma2 = val(gammav);
        for (std::int64_t j = 0; j < d; ++j) {
          const T inv =
              T{1} / std::sqrt(frozen->running_var[static_cast<std::size_t>(j)] + kBnEps);
          const T mu = frozen->running_mean[static_cast<std::size_t>(j)];
          for (std::int64_t i = 0; i < n; ++i) {
            gx.at(i, j) += gy.at(i, j) * gamma2[static_cast<std::size_t>(j)] * inv;
            gg[static_cast<std::size_t>(j)] += gy.at(i, j) * (x2.at(i, j) - mu) * inv;
            gb[static_cast<std::size_t>(j)] += gy.at(i, j);
          }
        }
      });
      return out;
    }

    if (n < 2) raise(Errc::BatchTooSmall, "batchnorm train mode needs n >= 2");

    Tensor<T> mean = Tensor<T>::zeros({d});
    Tensor<T> var = Tensor<T>::zeros({d});
    for (std::int64_t j = 0; j < d; ++j) {
      T s{};
      for (std::int64_t i = 0; i < n; ++i) s += x.at(i, j);
      mean[static_cast<std::size_t>(j)] = s / static_cast<T>(n);
    }
    for (std::int64_t j = 0; j < d; ++j) {
      T s{};
      for (std::int64_t i = 0; i < n; ++i) {
        const T dlt = x.at(i, j) - mean[static_cast<std::size_t>(j)];
        s += dlt * dlt;
      }
      var[static_cast<std::size_t>(j)] = s / static_cast<T>(n);  // biased, used to normalize
    }

    auto xhat = std::make_shared<Tensor<T>>(Tensor<T>::zeros({n, d}));
    auto inv_std = std::make_shared<Tensor<T>>(Tensor<T>::zeros({d}));
    Tensor<T> y = Tensor<T>::zeros({n, d});
    for (std::int64_t j = 0; j < d; ++j) {
      const T inv = T{1} / std::sqrt(var[static_cast<std::size_t>(j)] + kBnEps);
      (*inv_std)[static_cast<std::size_t>(j)] = inv;
      const T g = gamma[static_cast<std::size_t>(j)], be = beta[static_cast<std::size_t>(j)];
      for (std::int64_t i = 0; i < n; ++i) {
        const T xh = (x.at(i, j) - mean[static_cast<std::size_t>(j)]) * inv;
        xhat->at(i, j) = xh;
        y.at(i, j) = xh * g + be;
      }
    }

    // Running stats: unbiased variance, momentum 0.1.
    const T unbias = n > 1 ? static_cast<T>(n) / static_cast<T>(n - 1) : T{1};
    for (std::int64_t j = 0; j < d; ++j) {
      auto js = static_cast<std::size_t>(j);
      stats.running_mean[js] =
          (T{1} - kBnMomentum) * stats.running_mean[js] + kBnMomentum * mean[js];
      stats.running_var[js] =
          (T{1} - kBnMomentum) * stats.running_var[js] + kBnMomentum * var[js] * unbias;
    }

    Var out = push(std::move(y), "batchnorm");
    record([this, xv, gammav, betav, out, xhat, inv_std, n, d] {
      const Tensor<T>& gy = grad(out);
      const Tensor<T>& gamma2 = val(gammav);
      Tensor<T>& gx = grad(xv);
      Tensor<T>& gg = grad(gammav);
      Tensor<T>& gb = grad(betav);
      for (std::int64_t j = 0; j < d; ++j) {
        const auto js = static_cast<std::size_t>(j);
        T sum_gy{}, sum_gy_xhat{};
        for (std::int64_t i = 0; i < n; ++i) {
          sum_gy += gy.at(i, j);
          sum_gy_xhat += gy.at(i, j) * xhat->at(i, j);
        }
        gg[js] += sum_gy_xhat;
        gb[js] += sum_gy;
        const T c1 = sum_gy / static_cast<T>(n);
        const T c2 = sum_gy_xhat / static_cast<T>(n);
        const T scale = gamma2[js] * (*inv_std)[js];
        for (std::int64_t i = 0; i < n; ++i)
          gx.at(i, j) += scale * (gy.at(i, j) - c1 - xhat->at(i, j) * c2);
      }
    });
    return out;
  }

  /// Columnwise max over each row segment; gradient goes to the first argmax.
  Var segment_max_pool(Var xv, const std::vector<Segment>& segments) {
    const Tensor<T>& x = val(xv);
    const std::int64_t d = x.cols();
    const std::int64_t s = static_cast<std::int64_t>(segments.size());
    Tensor<T> y = Tensor<T>::zeros({s, d});
    auto argmax = std::make_shared<std::vector<std::int64_t>>(
        static_cast<std::size_t>(s * d), std::int64_t{-1});
    for (std::int64_t si = 0; si < s; ++si) {
      const Segment seg = segments[static_cast<std::size_t>(si)];
      if (seg.begin >= seg.end || seg.end > x.rows())
        raise(Errc::EmptyInput, "segment_max_pool: empty or invalid segment");
      for (std::int64_t j = 0; j < d; ++j) {
        T best = -std::numeric_limits<T>::infinity();
        std::int64_t best_i = seg.begin;
        for (std::int64_t i = seg.begin; i < seg.end; ++i) {
          if (x.at(i, j) > best) {
            best = x.at(i, j);
            best_i = i;
          }
        }
        y.at(si, j) = best;
        (*argmax)[static_cast<std::size_t>(si * d + j)] = best_i;
      }
    }
    Var out = push(std::move(y), "segment_max_pool");
    record([this, xv, out, argmax, s, d] {
      const Tensor<T>& gy = grad(out);
      Tensor<T>& gx = grad(xv);
      for (std::int64_t si = 0; si < s; ++si)
        for (std::int64_t j = 0; j < d; ++j)
          gx.at((*argmax)[static_cast<std::size_t>(si * d + j)], j) += gy.at(si, j);
    });
    return out;
  }

  /// Rowwise y / ||y||; raises on an exactly zero row.
  Var l2_normalize_rows(Var yv) {
    const Tensor<T>& y = val(yv);
    const std::int64_t n = y.rows(), d = y.cols();
    auto norms = std::make_shared<std::vector<T>>(static_cast<std::size_t>(n), T{});
    Tensor<T> out_t = Tensor<T>::zeros({n, d});
    for (std::int64_t i = 0; i < n; ++i) {
      T s{};
      for (std::int64_t j = 0; j < d; ++j) s += y.at(i, j) * y.at(i, j);
      const T nrm = std::sqrt(s);
      if (nrm == T{}) raise(Errc::ZeroVector, "l2_normalize of zero vector");
      (*norms)[static_cast<std::size_t>(i)] = nrm;
      for (std::int64_t j = 0; j < d; ++j) out_t.at(i, j) = y.at(i, j) / nrm;
    }
    Var out = push(std::move(out_t), "l2_normalize");
    record([this, yv, out, norms, n, d] {
      const Tensor<T>& gy = grad(out);
      const Tensor<T>& yh = val(out);
      Tensor<T>& gx = grad(yv);
      for (std::int64_t i = 0; i < n; ++i) {
        T dotv{};
        for (std::int64_t j = 0; j < d; ++j) dotv += yh.at(i, j) * gy.at(i, j);
        const T inv = T{1} / (*norms)[static_cast<std::size_t>(i)];
        for (std::int64_t j = 0; j < d; ++j)
          gx.at(i, j) += (gy.at(i, j) - yh.at(i, j) * dotv) * inv;
      }
    });
    return out;
  }

  /// logits[j] = dot(row 0, row j+1) * inv_tau for j = 0..n-2.
  Var query_dots(Var yv, T inv_tau) {
    const Tensor<T>& y = val(yv);
    const std::int64_t n = y.rows(), d = y.cols();
    if (n < 2) raise(Errc::ShapeMismatch, "query_dots needs at least two rows");
    Tensor<T> logits = Tensor<T>::zeros({n - 1});
    for (std::int64_t j = 1; j < n; ++j) {
      T s{};
      for (std::int64_t c = 0; c < d; ++c) s += y.at(0, c) * y.at(j, c);
      logits[static_cast<std::size_t>(j - 1)] = s * inv_tau;
    }
    Var out = push(std::move(logits), "query_dots");
    record([this, yv, out, inv_tau, n, d] {
      const Tensor<T>& gl = grad(out);
      const Tensor<T>& y2 = val(yv);
      Tensor<T>& gy = grad(yv);
      for (std::int64_t j = 1; j < n; ++j) {
        const T g = gl[static_cast<std::size_t>(j - 1)] * inv_tau;
        for (std::int64_t c = 0; c < d; ++c) {
          gy.at(0, c) += g * y2.at(j, c);
          gy.at(j, c) += g * y2.at(0, c);
        }
      }
    });
    return out;
  }

  /// -log softmax(logits)[0], max-shifted for stability. logits[0] is the
  /// positive pair, the rest are negatives.
  Var nce_from_logits(Var lv) {
    const Tensor<T>& l = val(lv);
    const std::size_t n = l.v.size();
    if (n < 2) raise(Errc::ShapeMismatch, "nce needs positive and negatives");
    T mx = l.v[0];
    for (T x : l.v) mx = std::max(mx, x);
    T denom{};
    auto soft = std::make_shared<std::vector<T>>(n);
    for (std::size_t i = 0; i < n; ++i) {
      (*soft)[i] = std::exp(l.v[i] - mx);
      denom += (*soft)[i];
    }
    for (std::size_t i = 0; i < n; ++i) (*soft)[i] /= denom;
    Tensor<T> loss = Tensor<T>::zeros({1});
    loss[0] = std::log(denom) + mx - l.v[0];
    Var out = push(std::move(loss), "nce");
    record([this, lv, out, soft, n] {
      const T g = grad(out)[0];
      Tensor<T>& gl = grad(lv);
      for (std::size_t i = 0; i < n; ++i) gl.v[i] += g * ((*soft)[i] - (i == 0 ? T{1} : T{}));
    });
    return out;
  }

  /// sum_t ||y_t - sign(y_t)||^2 + gamma * sum_t (sum_k y_tk)^2 with sign()
  /// treated as a constant; sign(0) counts as -1.
  Var hash_loss(Var yv, T gamma) {
    const Tensor<T>& y = val(yv);
    const std::int64_t n = y.rows(), d = y.cols();
    if (n < 1) raise(Errc::EmptyInput, "hash_loss on empty batch");
    T quant{}, balance{};
    auto rowsum = std::make_shared<std::vector<T>>(static_cast<std::size_t>(n), T{});
    for (std::int64_t i = 0; i < n; ++i) {
      T rs{};
      for (std::int64_t j = 0; j < d; ++j) {
        const T v = y.at(i, j);
        const T b = v > T{} ? T{1} : T{-1};
        quant += (v - b) * (v - b);
        rs += v;
      }
      (*rowsum)[static_cast<std::size_t>(i)] = rs;
      balance += rs * rs;
    }
    Tensor<T> loss = Tensor<T>::zeros({1});
    loss[0] = quant + gamma * balance;
    Var out = push(std::move(loss), "hash_loss");
    record([this, yv, out, gamma, rowsum, n, d] {
      const T g = grad(out)[0];
      const Tensor<T>& y2 = val(yv);
      Tensor<T>& gy = grad(yv);
      for (std::int64_t i = 0; i < n; ++i) {
        const T rs = (*rowsum)[static_cast<std::size_t>(i)];
        for (std::int64_t j = 0; j < d; ++j) {
          const T v = y2.at(i, j);
          const T b = v > T{} ? T{1} : T{-1};
          gy.at(i, j) += g * (T{2} * (v - b) + T{2} * gamma * rs);
        }
      }
    });
    return out;
  }

  /// total = a + lam * b for scalar vars.
  Var axpy(Var av, T lam, Var bv) {
    Tensor<T> y = Tensor<T>::zeros({1});
    y[0] = val(av)[0] + lam * val(bv)[0];
    Var out = push(std::move(y), "axpy");
    record([this, av, bv, out, lam] {
      const T g = grad(out)[0];
      grad(av)[0] += g;
      grad(bv)[0] += lam * g;
    });
    return out;
  }

  /// Reverse pass from a scalar loss; parameter gradients accumulate into the
  /// store. Raises NonFiniteGradient if any parameter gradient is not finite.
  void backward(Var loss) {
    if (val(loss).numel() != 1) raise(Errc::ShapeMismatch, "backward needs a scalar loss");
    grad(loss)[0] = T{1};
    for (std::size_t i = backops_.size(); i-- > 0;) backops_[i]();
    if (store_) {
      for (const auto& e : store_->entries)
        for (T g : e.grad.v)
          if (!std::isfinite(static_cast<double>(g)))
            raise(Errc::NonFiniteGradient, "non-finite gradient for " + e.name);
    }
  }

  std::size_t size() const { return vals_.size(); }

 private:
  Var push(Tensor<T> value, const char* what) {
    check_finite(value, what);
    vals_.push_back(std::move(value));
    grads_.emplace_back();
    return Var{static_cast<int>(vals_.size()) - 1};
  }

  template <typename F>
  void record(F&& f) {
    backops_.push_back(std::forward<F>(f));
  }

  ParamStore<T>* store_;
  std::vector<Tensor<T>> vals_;
  std::vector<Tensor<T>> grads_;
  std::vector<std::function<void()>> backops_;
  std::unordered_map<int, Var> param_vars_;
};

}  // namespace posh::nn
