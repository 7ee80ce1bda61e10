#pragma once

#include <vector>

#include "posh/tape.hpp"

namespace posh {

struct LossConfig {
  double gamma = 0.2;    // balance-penalty weight
  double lambda = 0.5;   // hash-loss weight
  double tau = 0.07;     // InfoNCE temperature
  int negatives = 62;    // K

  void validate() const {
    if (gamma < 0 || lambda < 0 || tau <= 0 || negatives < 1)
      raise(Errc::ConfigError, "invalid loss configuration");
  }
};

/// Query, positive and K negative embeddings of a contrastive batch.
template <typename T>
struct BatchEmbeddings {
  Tensor<T> query;                  // [d]
  Tensor<T> positive;               // [d]
  std::vector<Tensor<T>> negatives; // K x [d]
};

/// Quantization + balance loss over a batch of embeddings:
/// sum_t ||y_t - sign(y_t)||^2 + gamma sum_t (y_t . 1)^2, sign(0) = -1.
template <typename T>
T hash_loss_value(const std::vector<Tensor<T>>& ys, T gamma);

/// InfoNCE over L2-normalized embeddings with temperature tau, stabilized by
/// subtracting the max logit before exponentiation.
template <typename T>
T infonce_value(const BatchEmbeddings<T>& batch, T tau);

template <typename T>
T total_loss_value(const BatchEmbeddings<T>& batch, const LossConfig& cfg);

/// Wire the combined objective onto a tape from the stacked embeddings
/// [S x d] with row 0 = query, row 1 = positive, rows 2.. = negatives.
struct LossVars {
  nn::Var total, sim, hash;
};
template <typename T>
LossVars attach_losses(nn::Tape<T>& tape, nn::Var y, const LossConfig& cfg);

extern template float hash_loss_value<float>(const std::vector<Tensor<float>>&, float);
extern template double hash_loss_value<double>(const std::vector<Tensor<double>>&, double);
extern template float infonce_value<float>(const BatchEmbeddings<float>&, float);
extern template double infonce_value<double>(const BatchEmbeddings<double>&, double);
extern template float total_loss_value<float>(const BatchEmbeddings<float>&, const LossConfig&);
extern template double total_loss_value<double>(const BatchEmbeddings<double>&,
                                                const LossConfig&);
extern template LossVars attach_losses<float>(nn::Tape<float>&, nn::Var, const LossConfig&);
extern template LossVars attach_losses<double>(nn::Tape<double>&, nn::Var, const LossConfig&);

}  // namespace posh
