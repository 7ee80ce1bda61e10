#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "posh/chain.hpp"

namespace posh {

/// Rigid transform mapping one point set onto another, with the residual.
struct Superposition {
  Mat3 rotation;       // proper: det = +1
  Coord3 translation;
  double rmsd = 0.0;

  Coord3 apply(const Coord3& p) const { return rotation.apply(p) + translation; }
};

struct TmResult {
  double score = 0.0;       // in (0, 1]
  std::size_t aligned_length = 0;  // pairs within d0 at the best superposition
  double d0 = 0.0;
};

/// Least-squares rigid superposition of X onto Y (covariance SVD with
/// determinant sign correction). Requires >= 3 non-collinear points.
Superposition kabsch(const std::vector<Coord3>& x, const std::vector<Coord3>& y);

/// Length-dependent distance scale: max(1.24 (L-15)^(1/3) - 1.8, 0.5).
double tm_d0(std::size_t l_target);

using Correspondence = std::vector<std::pair<std::uint32_t, std::uint32_t>>;  // (a_idx, b_idx)

struct TmOptions {
  std::size_t min_seed = 4;
  std::size_t max_iterations = 20;
  double cutoff_growth = 1.0;  // added to d0 until >= 3 pairs selected
};

/// Iterative TM-score over a fixed residue correspondence, normalized by the
/// length of B (the reference). Seeds superpositions from contiguous
/// correspondence windows of the full, half and quarter lengths, then
/// alternates scoring with re-superposition on the close pairs.
TmResult tm_score_identity(const ProteinChain& a, const ProteinChain& b,
                           const Correspondence& correspondence, const TmOptions& opt = {});

/// TM of the contiguous substructure [start, start+length) of p against p
/// itself, normalized by |p|.
TmResult tm_fragment(const ProteinChain& p, std::size_t start, std::size_t length,
                     const TmOptions& opt = {});

}  // namespace posh
