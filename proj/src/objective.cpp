#include "posh/objective.hpp"

#include <cmath>

namespace posh {

template <typename T>
T hash_loss_value(const std::vector<Tensor<T>>& ys, T gamma) {
  if (ys.empty()) raise(Errc::EmptyInput, "hash loss over empty batch");
  T quant{}, balance{};
  for (const Tensor<T>& y : ys) {
    T rowsum{};
    for (T v : y.v) {
      const T b = v > T{} ? T{1} : T{-1};
      quant += (v - b) * (v - b);
      rowsum += v;
    }
    balance += rowsum * rowsum;
  }
  return quant + gamma * balance;
}

namespace {

template <typename T>
std::vector<T> normalize_copy(const Tensor<T>& y) {
  T s{};
  for (T v : y.v) s += v * v;
  const T n = std::sqrt(s);
  if (n == T{}) raise(Errc::ZeroVector, "cannot normalize zero embedding");
  std::vector<T> out(y.v);
  for (T& v : out) v /= n;
  return out;
}

template <typename T>
T dot_vec(const std::vector<T>& a, const std::vector<T>& b) {
  T s{};
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

template <typename T>
T infonce_value(const BatchEmbeddings<T>& batch, T tau) {
  const auto q = normalize_copy(batch.query);
  const auto p = normalize_copy(batch.positive);
  std::vector<T> logits;
  logits.push_back(dot_vec(q, p) / tau);
  for (const Tensor<T>& f : batch.negatives) {
    const auto fn = normalize_copy(f);
    logits.push_back(dot_vec(q, fn) / tau);
  }
  T mx = logits[0];
  for (T l : logits) mx = std::max(mx, l);
  T denom{};
  for (T l : logits) denom += std::exp(l - mx);
  return std::log(denom) + mx - logits[0];
}

template <typename T>
T total_loss_value(const BatchEmbeddings<T>& batch, const LossConfig& cfg) {
  cfg.validate();
  std::vector<Tensor<T>> ys;
  ys.push_back(batch.query);
  ys.push_back(batch.positive);
  for (const Tensor<T>& f : batch.negatives) ys.push_back(f);
  return infonce_value(batch, static_cast<T>(cfg.tau)) +
         static_cast<T>(cfg.lambda) * hash_loss_value(ys, static_cast<T>(cfg.gamma));
}

template <typename T>
LossVars attach_losses(nn::Tape<T>& tape, nn::Var y, const LossConfig& cfg) {
  cfg.validate();
  LossVars out;
  nn::Var yn = tape.l2_normalize_rows(y);
  nn::Var logits = tape.query_dots(yn, static_cast<T>(1.0 / cfg.tau));
  out.sim = tape.nce_from_logits(logits);
  out.hash = tape.hash_loss(y, static_cast<T>(cfg.gamma));
  out.total = tape.axpy(out.sim, static_cast<T>(cfg.lambda), out.hash);
  return out;
}

template float hash_loss_value<float>(const std::vector<Tensor<float>>&, float);
template double hash_loss_value<double>(const std::vector<Tensor<double>>&, double);
template float infonce_value<float>(const BatchEmbeddings<float>&, float);
template double infonce_value<double>(const BatchEmbeddings<double>&, double);
template float total_loss_value<float>(const BatchEmbeddings<float>&, const LossConfig&);
template double total_loss_value<double>(const BatchEmbeddings<double>&, const LossConfig&);
template LossVars attach_losses<float>(nn::Tape<float>&, nn::Var, const LossConfig&);
template LossVars attach_losses<double>(nn::Tape<double>&, nn::Var, const LossConfig&);

}  // namespace posh
