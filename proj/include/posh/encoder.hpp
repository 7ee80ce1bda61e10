#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "posh/featurize.hpp"
#include "posh/optim.hpp"
#include "posh/rng.hpp"
#include "posh/tape.hpp"

namespace posh {

struct EncoderConfig {
  int hidden = 128;
  int n_layers = 6;
  int code_length = 400;
  int k_nn = 30;
  int n_rbf = 16;
  double rbf_min = 0.0;
  double rbf_max = 20.0;
  KnnMetric knn_metric = KnnMetric::CaDistance;

  int d_v() const { return kNodeFeatureDim; }
  int d_e() const { return kAtomPairs * n_rbf; }
  RbfBank bank() const { return RbfBank::linear(n_rbf, rbf_min, rbf_max); }

  void validate() const {
    if (hidden < 1 || n_layers < 1 || code_length < 1 || k_nn < 1 || n_rbf < 1)
      raise(Errc::ConfigError, "encoder config values must be positive");
  }
};

/// Parameter ids for one node+edge update layer.
struct LayerIds {
  int node_w1, node_b1, node_w2, node_b2;  // NodeMLP
  int mlp_w1, mlp_b1, mlp_w2, mlp_b2;      // MLP after aggregation
  int bn_node_gamma, bn_node_beta;
  int edge_w1, edge_b1, edge_w2, edge_b2;  // EdgeMLP
  int bn_edge_gamma, bn_edge_beta;
};

template <typename T>
struct EncoderParams {
  EncoderConfig config;
  nn::ParamStore<T> store;
  int node_proj_w = -1, node_proj_b = -1;
  int edge_proj_w = -1, edge_proj_b = -1;
  std::vector<LayerIds> layers;
  std::vector<nn::BnStats<T>> bn_node_stats, bn_edge_stats;
  int head_w = -1, head_b = -1;

  template <typename U>
  EncoderParams<U> cast() const {
    EncoderParams<U> out;
    out.config = config;
    out.store = store.template cast<U>();
    out.node_proj_w = node_proj_w;
    out.node_proj_b = node_proj_b;
    out.edge_proj_w = edge_proj_w;
    out.edge_proj_b = edge_proj_b;
    out.layers = layers;
    for (const auto& s : bn_node_stats) out.bn_node_stats.push_back(s.template cast<U>());
    for (const auto& s : bn_edge_stats) out.bn_edge_stats.push_back(s.template cast<U>());
    out.head_w = head_w;
    out.head_b = head_b;
    return out;
  }
};

/// Weights uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)], biases zero,
/// batchnorm gamma 1 / beta 0. Deterministic in the seed.
template <typename T>
EncoderParams<T> init_params(const EncoderConfig& config, std::uint64_t seed);

/// Several protein graphs packed into one disjoint block-diagonal graph so a
/// whole contrastive batch runs as a single forward pass.
struct BatchGraphs {
  Tensor<float> node_feats;           // sum(n_i) x d_v
  Tensor<float> edge_feats;           // sum(m_i) x d_e
  std::vector<Edge> edges;            // indices shifted per structure
  std::vector<std::uint32_t> agg_targets;  // edge source node (message recipient)
  std::vector<nn::Segment> segments;  // node row range per structure
  std::vector<std::uint32_t> n_residues;

  static BatchGraphs merge(const std::vector<const ProteinGraph*>& graphs);
};

/// Full encoder forward on a tape: projections, n_layers node+edge updates,
/// per-structure max pooling and the output head. Returns [S x code_length].
template <typename T>
nn::Var encode_batch(nn::Tape<T>& tape, const BatchGraphs& batch, EncoderParams<T>& params,
                     nn::Mode mode);

/// Real-valued structure representation plus its residue count.
struct StructureEmbedding {
  Tensor<float> y;  // [code_length]
  std::uint32_t n_residues = 0;
};

/// Infer-mode encoding of a single structure (frozen running stats).
StructureEmbedding encode(const ProteinGraph& graph, EncoderParams<float>& params);

/// Packed binary code: bit k (byte k/8, position k%8) is 1 iff y_k > 0.
struct HashCode {
  std::vector<std::uint8_t> bits;
  std::uint32_t n_bits = 0;
  std::uint32_t n_residues = 0;
  std::string id;

  bool bit(std::size_t k) const { return (bits[k / 8] >> (k % 8)) & 1; }
  std::uint32_t popcount() const;
};

HashCode binarize(const StructureEmbedding& emb, const std::string& id = "");

// Single node/edge update layers on plain tensors (train-mode batchnorm over
// the given stats). Exposed so the update rules can be tested in isolation.
template <typename T>
Tensor<T> node_update(const Tensor<T>& h, const Tensor<T>& e, const std::vector<Edge>& edges,
                      EncoderParams<T>& params, int layer, nn::Mode mode);
template <typename T>
Tensor<T> edge_update(const Tensor<T>& h_new, const Tensor<T>& e, const std::vector<Edge>& edges,
                      EncoderParams<T>& params, int layer, nn::Mode mode);

// Checkpoint: magic "POSHCKP1", version, config digest + text, named f32
// parameters, batchnorm running stats, optional Adam state.
void save_checkpoint(const std::string& path, const EncoderParams<float>& params,
                     const std::string& config_text, const nn::AdamState<float>* adam = nullptr);
struct Checkpoint {
  EncoderParams<float> params;
  std::string config_text;
  bool has_adam = false;
  nn::AdamState<float> adam;
};
Checkpoint load_checkpoint(const std::string& path);

extern template EncoderParams<float> init_params<float>(const EncoderConfig&, std::uint64_t);
extern template EncoderParams<double> init_params<double>(const EncoderConfig&, std::uint64_t);
extern template nn::Var encode_batch<float>(nn::Tape<float>&, const BatchGraphs&,
                                            EncoderParams<float>&, nn::Mode);
extern template nn::Var encode_batch<double>(nn::Tape<double>&, const BatchGraphs&,
                                             EncoderParams<double>&, nn::Mode);
extern template Tensor<float> node_update<float>(const Tensor<float>&, const Tensor<float>&,
                                                 const std::vector<Edge>&, EncoderParams<float>&,
                                                 int, nn::Mode);
extern template Tensor<double> node_update<double>(const Tensor<double>&, const Tensor<double>&,
                                                   const std::vector<Edge>&,
                                                   EncoderParams<double>&, int, nn::Mode);
extern template Tensor<float> edge_update<float>(const Tensor<float>&, const Tensor<float>&,
                                                 const std::vector<Edge>&, EncoderParams<float>&,
                                                 int, nn::Mode);
extern template Tensor<double> edge_update<double>(const Tensor<double>&, const Tensor<double>&,
                                                   const std::vector<Edge>&,
                                                   EncoderParams<double>&, int, nn::Mode);

}  // namespace posh
