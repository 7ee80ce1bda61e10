#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <vector>

#include "posh/errors.hpp"

namespace posh {

/// Dense row-major tensor. Only rank 1 and 2 are used in practice.
template <typename T>
struct Tensor {
  std::vector<std::int64_t> shape;
  std::vector<T> v;

  Tensor() = default;
  Tensor(std::initializer_list<std::int64_t> s) : shape(s) { v.assign(numel_of(shape), T{}); }

  static std::size_t numel_of(const std::vector<std::int64_t>& s) {
    std::size_t n = 1;
    for (std::int64_t d : s) {
      if (d < 0) raise(Errc::ShapeMismatch, "negative dimension");
      n *= static_cast<std::size_t>(d);
    }
    return n;
  }

  static Tensor zeros(std::vector<std::int64_t> s) {
    Tensor t;
    t.shape = std::move(s);
    t.v.assign(numel_of(t.shape), T{});
    return t;
  }

  static Tensor row_vector(std::vector<T> data) {
    Tensor t;
    t.shape = {static_cast<std::int64_t>(data.size())};
    t.v = std::move(data);
    return t;
  }

  std::size_t numel() const { return v.size(); }
  std::int64_t rows() const { return shape.empty() ? 0 : shape[0]; }
  std::int64_t cols() const {
    if (shape.size() == 1) return 1;
    return shape.size() >= 2 ? shape[1] : 0;
  }

  T* data() { return v.data(); }
  const T* data() const { return v.data(); }

  T& at(std::int64_t r, std::int64_t c) {
    return v[static_cast<std::size_t>(r * cols() + c)];
  }
  T at(std::int64_t r, std::int64_t c) const {
    return v[static_cast<std::size_t>(r * cols() + c)];
  }
  T& operator[](std::size_t i) { return v[i]; }
  T operator[](std::size_t i) const { return v[i]; }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> t;
    t.shape = shape;
    t.v.reserve(v.size());
    for (T x : v) t.v.push_back(static_cast<U>(x));
    return t;
  }
};

template <typename T>
void check_finite(const Tensor<T>& t, const char* what) {
  for (T x : t.v)
    if (!std::isfinite(static_cast<double>(x)))
      raise(Errc::NonFiniteValue, std::string("non-finite value in ") + what);
}

}  // namespace posh
