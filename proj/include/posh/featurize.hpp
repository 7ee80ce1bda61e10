#pragma once

#include <optional>
#include <string>
#include <vector>

#include "posh/binio.hpp"
#include "posh/chain.hpp"
#include "posh/tensor.hpp"

namespace posh {

/// Gaussian radial basis bank over distances: component k of rbf_encode(x)
/// is exp(-(x - mu_k)^2 / (2 sigma^2)).
struct RbfBank {
  std::vector<double> centers;  // strictly increasing, Angstrom
  double sigma = 1.0;

  static RbfBank linear(int n_rbf, double lo, double hi);
  int size() const { return static_cast<int>(centers.size()); }
};

struct Edge {
  std::uint32_t src = 0;
  std::uint32_t dst = 0;
  bool operator==(const Edge&) const = default;
};

constexpr int kNodeFeatureDim = 12;  // {sin,cos} of alpha,beta,gamma,phi,psi,omega
constexpr int kAtomPairs = 25;       // (X,Y) over [C, CA, N, O, CB]^2, row-major

struct ProteinGraph {
  Tensor<float> node_feats;  // n x 12
  std::vector<Edge> edges;   // each node: min(k, n-1) out-edges, rank order
  Tensor<float> edge_feats;  // m x (25 * n_rbf), row order matches edges
  std::uint32_t n_residues = 0;
};

struct BondAngles {
  std::optional<double> alpha, beta, gamma;
};
struct DihedralAngles {
  std::optional<double> phi, psi, omega;
};

/// Bond angles per residue: alpha at CA between N and C; beta at N between
/// C(prev) and CA (absent for the first residue); gamma at C between CA and
/// N(next) (absent for the last residue).
std::vector<BondAngles> bond_angles(const ProteinChain& chain);

/// Torsions per residue, range (-pi, pi]: phi from C(prev)-N-CA-C, psi from
/// N-CA-C-N(next), omega from CA(prev)-C(prev)-N-CA. Termini absent.
std::vector<DihedralAngles> dihedral_angles(const ProteinChain& chain);

/// n x 12 matrix of (sin, cos) pairs in layout [a, b, g, phi, psi, omega];
/// absent angles encode as (0, 0).
Tensor<float> node_features(const ProteinChain& chain);

enum class KnnMetric {
  CaDistance,       // Euclidean distance between CA coordinates (default)
  NodeFeatureSpace  // Euclidean distance between 12-dim raw node features
};

/// Directed kNN edges: for each node, the min(k, n-1) nearest others,
/// ties broken toward the smaller index, sorted by (node, distance rank).
std::vector<Edge> knn_graph(const ProteinChain& chain, int k,
                            KnnMetric metric = KnnMetric::CaDistance);

std::vector<float> rbf_encode(double distance, const RbfBank& bank);

/// m x (25 * n_rbf): for edge (i, j), distances ||X_i - Y_j|| over the fixed
/// atom-pair order, each RBF-encoded. Requires CB present on every residue.
Tensor<float> edge_features(const ProteinChain& chain, const std::vector<Edge>& edges,
                            const RbfBank& bank);

ProteinGraph build_graph(const ProteinChain& chain, int k, const RbfBank& bank,
                         KnnMetric metric = KnnMetric::CaDistance);

// Graph cache record: magic "POSHGRF1", header (n, m, d_v, d_e, k, n_rbf as
// u32; center range and sigma as f64), then f32 node features, u32 edge
// pairs, f32 edge features.
void write_graph(std::ostream& os, const ProteinGraph& g, int k, const RbfBank& bank);
ProteinGraph read_graph(binio::Reader& r);

// Container: magic "POSHGRS1", u32 count, then (id, record) pairs.
struct GraphSet {
  std::vector<std::string> ids;
  std::vector<ProteinGraph> graphs;
};
void save_graph_set(const std::string& path, const GraphSet& set, int k, const RbfBank& bank);
GraphSet load_graph_set(const std::string& path);

}  // namespace posh
