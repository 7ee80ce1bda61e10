#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "posh/geom.hpp"

namespace posh {

/// One residue's backbone atoms. n/ca/c/o always present after parsing;
/// cb is either the real atom or a synthesized virtual position.
struct Residue {
  std::int32_t index = 0;  // ordinal position in the chain
  Coord3 n, ca, c, o, cb;
  bool cb_is_virtual = false;
};

struct ProteinChain {
  std::string id;
  std::vector<Residue> residues;

  std::size_t size() const { return residues.size(); }

  /// Contiguous window [start, start+length) re-indexed from zero.
  ProteinChain slice(std::size_t start, std::size_t length, const std::string& new_id) const;
};

bool chains_equal(const ProteinChain& a, const ProteinChain& b);

// Single-chain binary record: magic "POSHCHN1", id (u16 length + bytes),
// residue count u32, then per residue 5x3 f64 coordinates (n, ca, c, o, cb)
// and one flag byte (bit 0 = cb_is_virtual).
void write_chain(std::ostream& os, const ProteinChain& chain);
ProteinChain read_chain(class binio::Reader& r);

// Multi-chain pack: magic "POSHCHS1", u32 count, then chain records.
void write_chain_pack(std::ostream& os, const std::vector<ProteinChain>& chains);
std::vector<ProteinChain> read_chain_pack(const std::string& buf);
std::vector<ProteinChain> load_chain_pack(const std::string& path);
void save_chain_pack(const std::string& path, const std::vector<ProteinChain>& chains);

}  // namespace posh
