#include "posh/featurize.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace posh {

RbfBank RbfBank::linear(int n_rbf, double lo, double hi) {
  if (n_rbf < 1) raise(Errc::ConfigError, "rbf bank needs at least one center");
  RbfBank b;
  b.centers.resize(static_cast<std::size_t>(n_rbf));
  if (n_rbf == 1) {
    b.centers[0] = lo;
    b.sigma = (hi - lo) > 0 ? (hi - lo) : 1.0;
  } else {
    const double step = (hi - lo) / (n_rbf - 1);
    for (int i = 0; i < n_rbf; ++i) b.centers[static_cast<std::size_t>(i)] = lo + step * i;
    b.sigma = step;
  }
  if (b.sigma <= 0) raise(Errc::ConfigError, "rbf sigma must be positive");
  return b;
}

std::vector<BondAngles> bond_angles(const ProteinChain& chain) {
  const std::size_t n = chain.size();
  if (n < 2) raise(Errc::ChainTooShort, "bond angles need at least 2 residues");
  std::vector<BondAngles> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Residue& r = chain.residues[i];
    out[i].alpha = angle_between(r.n - r.ca, r.c - r.ca);
    if (i > 0) {
      const Residue& p = chain.residues[i - 1];
      out[i].beta = angle_between(p.c - r.n, r.ca - r.n);
    }
    if (i + 1 < n) {
      const Residue& q = chain.residues[i + 1];
      out[i].gamma = angle_between(r.ca - r.c, q.n - r.c);
    }
  }
  return out;
}

std::vector<DihedralAngles> dihedral_angles(const ProteinChain& chain) {
  const std::size_t n = chain.size();
  if (n < 2) raise(Errc::ChainTooShort, "dihedral angles need at least 2 residues");
  std::vector<DihedralAngles> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Residue& r = chain.residues[i];
    if (i > 0) {
      const Residue& p = chain.residues[i - 1];
      out[i].phi = dihedral(p.c, r.n, r.ca, r.c);
      out[i].omega = dihedral(p.ca, p.c, r.n, r.ca);
    }
    if (i + 1 < n) {
      const Residue& q = chain.residues[i + 1];
      out[i].psi = dihedral(r.n, r.ca, r.c, q.n);
    }
  }
  return out;
}

Tensor<float> node_features(const ProteinChain& chain) {
  const auto bonds = bond_angles(chain);
  const auto dihedrals = dihedral_angles(chain);
  const std::int64_t n = static_cast<std::int64_t>(chain.size());
  Tensor<float> feats = Tensor<float>::zeros({n, kNodeFeatureDim});
  auto put = [&](std::int64_t row, int slot, const std::optional<double>& angle) {
    if (!angle) return;  // absent angles stay (0, 0)
    feats.at(row, 2 * slot) = static_cast<float>(std::sin(*angle));
    feats.at(row, 2 * slot + 1) = static_cast<float>(std::cos(*angle));
  };
  for (std::int64_t i = 0; i < n; ++i) {
    const auto& b = bonds[static_cast<std::size_t>(i)];
    const auto& d = dihedrals[static_cast<std::size_t>(i)];
    put(i, 0, b.alpha);
    put(i, 1, b.beta);
    put(i, 2, b.gamma);
    put(i, 3, d.phi);
    put(i, 4, d.psi);
    put(i, 5, d.omega);
  }
  return feats;
}

std::vector<Edge> knn_graph(const ProteinChain& chain, int k, KnnMetric metric) {
  const std::size_t n = chain.size();
  if (n < 2) raise(Errc::ChainTooShort, "knn graph needs at least 2 residues");
  if (k < 1) raise(Errc::ConfigError, "k must be >= 1");

  Tensor<float> feats;
  if (metric == KnnMetric::NodeFeatureSpace) feats = node_features(chain);

  auto dist2 = [&](std::size_t i, std::size_t j) -> double {
    if (metric == KnnMetric::CaDistance) {
      const Coord3 d = chain.residues[i].ca - chain.residues[j].ca;
      return dot(d, d);
    }
    double s = 0;
    for (int c = 0; c < kNodeFeatureDim; ++c) {
      const double d = static_cast<double>(feats.at(static_cast<std::int64_t>(i), c)) -
                       static_cast<double>(feats.at(static_cast<std::int64_t>(j), c));
      s += d * d;
    }
    return s;
  };

  const std::size_t deg = std::min<std::size_t>(static_cast<std::size_t>(k), n - 1);
  std::vector<Edge> edges;
  edges.reserve(n * deg);
  std::vector<std::pair<double, std::uint32_t>> cand;
  cand.reserve(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    cand.clear();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) cand.emplace_back(dist2(i, j), static_cast<std::uint32_t>(j));
    std::sort(cand.begin(), cand.end());  // (distance, index): ties pick smaller index
    for (std::size_t r = 0; r < deg; ++r)
      edges.push_back(Edge{static_cast<std::uint32_t>(i), cand[r].second});
  }
  return edges;
}

std::vector<float> rbf_encode(double distance, const RbfBank& bank) {
  if (distance < 0) raise(Errc::ConfigError, "distance must be nonnegative");
  std::vector<float> out(static_cast<std::size_t>(bank.size()));
  const double inv = 1.0 / (2.0 * bank.sigma * bank.sigma);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double d = distance - bank.centers[i];
    out[i] = static_cast<float>(std::exp(-d * d * inv));
  }
  return out;
}

namespace {
// Fixed atom order shared by edge features and the graph file format.
inline const Coord3* atom_by_slot(const Residue& r, int slot) {
  switch (slot) {
    case 0: return &r.c;
    case 1: return &r.ca;
    case 2: return &r.n;
    case 3: return &r.o;
    default: return &r.cb;
  }
}
}  // namespace

Tensor<float> edge_features(const ProteinChain& chain, const std::vector<Edge>& edges,
                            const RbfBank& bank) {
  const int n_rbf = bank.size();
  const std::int64_t d_e = static_cast<std::int64_t>(kAtomPairs) * n_rbf;
  Tensor<float> feats = Tensor<float>::zeros({static_cast<std::int64_t>(edges.size()), d_e});
  const double inv = 1.0 / (2.0 * bank.sigma * bank.sigma);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const Residue& ri = chain.residues[edges[e].src];
    const Residue& rj = chain.residues[edges[e].dst];
    float* row = feats.data() + static_cast<std::size_t>(d_e) * e;
    int col = 0;
    for (int x = 0; x < 5; ++x) {
      const Coord3* xi = atom_by_slot(ri, x);
      for (int y = 0; y < 5; ++y) {
        const Coord3* yj = atom_by_slot(rj, y);
        const double dist = distance(*xi, *yj);
        for (int kk = 0; kk < n_rbf; ++kk) {
          const double d = dist - bank.centers[static_cast<std::size_t>(kk)];
          row[col++] = static_cast<float>(std::exp(-d * d * inv));
        }
      }
    }
  }
  return feats;
}

ProteinGraph build_graph(const ProteinChain& chain, int k, const RbfBank& bank,
                         KnnMetric metric) {
  for (const Residue& r : chain.residues)
    if (!r.cb.finite()) raise(Errc::NonFiniteValue, "chain has non-finite CB");
  ProteinGraph g;
  g.node_feats = node_features(chain);
  g.edges = knn_graph(chain, k, metric);
  g.edge_feats = edge_features(chain, g.edges, bank);
  g.n_residues = static_cast<std::uint32_t>(chain.size());
  check_finite(g.node_feats, "node features");
  check_finite(g.edge_feats, "edge features");
  return g;
}

namespace {
constexpr std::string_view kGraphMagic = "POSHGRF1";
constexpr std::string_view kGraphSetMagic = "POSHGRS1";
}  // namespace

void write_graph(std::ostream& os, const ProteinGraph& g, int k, const RbfBank& bank) {
  binio::put_bytes(os, kGraphMagic.data(), kGraphMagic.size());
  binio::put_u32(os, g.n_residues);
  binio::put_u32(os, static_cast<std::uint32_t>(g.edges.size()));
  binio::put_u32(os, static_cast<std::uint32_t>(g.node_feats.cols()));
  binio::put_u32(os, static_cast<std::uint32_t>(g.edge_feats.cols()));
  binio::put_u32(os, static_cast<std::uint32_t>(k));
  binio::put_u32(os, static_cast<std::uint32_t>(bank.size()));
  binio::put_f64(os, bank.centers.front());
  binio::put_f64(os, bank.centers.back());
  binio::put_f64(os, bank.sigma);
  for (float x : g.node_feats.v) binio::put_f32(os, x);
  for (const Edge& e : g.edges) {
    binio::put_u32(os, e.src);
    binio::put_u32(os, e.dst);
  }
  for (float x : g.edge_feats.v) binio::put_f32(os, x);
}

ProteinGraph read_graph(binio::Reader& r) {
  r.expect_magic(kGraphMagic, "graph");
  ProteinGraph g;
  g.n_residues = r.u32();
  const std::uint32_t m = r.u32();
  const std::uint32_t d_v = r.u32();
  const std::uint32_t d_e = r.u32();
  r.u32();  // k
  r.u32();  // n_rbf
  r.f64();  // center range / sigma: informational
  r.f64();
  r.f64();
  g.node_feats = Tensor<float>::zeros({g.n_residues, d_v});
  for (float& x : g.node_feats.v) x = r.f32();
  g.edges.resize(m);
  for (Edge& e : g.edges) {
    e.src = r.u32();
    e.dst = r.u32();
  }
  g.edge_feats = Tensor<float>::zeros({m, d_e});
  for (float& x : g.edge_feats.v) x = r.f32();
  return g;
}

void save_graph_set(const std::string& path, const GraphSet& set, int k, const RbfBank& bank) {
  if (set.ids.size() != set.graphs.size())
    raise(Errc::ShapeMismatch, "graph set ids/graphs mismatch");
  std::ostringstream os;
  binio::put_bytes(os, kGraphSetMagic.data(), kGraphSetMagic.size());
  binio::put_u32(os, static_cast<std::uint32_t>(set.graphs.size()));
  for (std::size_t i = 0; i < set.graphs.size(); ++i) {
    binio::put_str(os, set.ids[i], "graph id");
    write_graph(os, set.graphs[i], k, bank);
  }
  binio::write_file(path, os.str());
}

GraphSet load_graph_set(const std::string& path) {
  const std::string buf = binio::read_file(path);
  binio::Reader r(buf);
  r.expect_magic(kGraphSetMagic, "graph set");
  const std::uint32_t n = r.u32();
  GraphSet set;
  for (std::uint32_t i = 0; i < n; ++i) {
    set.ids.push_back(r.str());
    set.graphs.push_back(read_graph(r));
  }
  return set;
}

}  // namespace posh
