#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "posh/chain.hpp"

namespace posh {

struct ParseStats {
  std::size_t dropped_incomplete = 0;  // residues missing one of N/CA/C/O
  std::size_t dropped_duplicate_ca = 0;
};

/// Parse one chain from PDB fixed-column text. Reads ATOM records for
/// N, CA, C, O, CB only; alternate locations resolved by highest occupancy
/// then first occurrence; residues missing any of N/CA/C/O are dropped.
/// With no chain_id the first chain encountered is returned.
ProteinChain parse_pdb(std::string_view text, std::optional<char> chain_id = std::nullopt,
                       ParseStats* stats = nullptr);

/// Synthesize a virtual C-beta on every residue that lacks one:
///   cb = ca + wa*a + wb*b + wc*c,  b = ca-n, c = c-ca, a = b x c.
struct CbetaWeights {
  double wa = -0.58273431;
  double wb = 0.56802827;
  double wc = -0.54067466;
};
ProteinChain ensure_cbeta(ProteinChain chain, const CbetaWeights& w = {});

/// Minimal PDB writer for backbone atoms (N, CA, C, O).
void write_pdb(std::ostream& os, const ProteinChain& chain);

}  // namespace posh
