#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "posh/chain.hpp"
#include "posh/rng.hpp"
#include "posh/simmatrix.hpp"
#include "posh/tmscore.hpp"

namespace posh {

/// All b != a whose score clears rho times the row maximum (the argmax always
/// qualifies, so the result is never empty).
std::vector<std::size_t> positives(const SimilarityMatrix& matrix, std::size_t a, double rho);

/// Precomputed positive sets for every structure.
struct PositiveSets {
  double rho = 0.9;
  std::vector<std::vector<std::size_t>> sets;

  static PositiveSets build(const SimilarityMatrix& matrix, double rho);
};

struct TrainingBatch {
  std::size_t query = 0;
  std::size_t positive = 0;
  std::vector<std::size_t> negatives;
};

/// Positive drawn uniformly from positives(query); negatives drawn uniformly
/// without replacement from the complement of positives(query) + {query}.
TrainingBatch sample_batch(const SimilarityMatrix& matrix, const PositiveSets& positive_sets,
                           std::size_t query, int k_negatives, Rng& rng);

/// Per-structure substructure constraint: the smallest window length whose
/// every placement keeps the fragment within alpha of the full structure.
struct SubstructurePlan {
  std::vector<std::string> ids;
  std::vector<std::uint32_t> min_length;

  std::string to_tsv() const;
  static SubstructurePlan from_tsv(const std::string& text);
};

/// Binary search over candidate lengths; each candidate is validated by
/// exhaustively checking every window of that length.
std::uint32_t precompute_min_length(const ProteinChain& p, double alpha,
                                    const TmOptions& opt = {});

struct Window {
  std::uint32_t start = 0;
  std::uint32_t length = 0;
};

/// Anchor residue uniform, length uniform in [min_length, |p|]; the window
/// grows from the anchor alternately toward both ends, clamping at chain
/// boundaries.
Window sample_substructure(const ProteinChain& p, std::uint32_t min_length, Rng& rng);

}  // namespace posh
