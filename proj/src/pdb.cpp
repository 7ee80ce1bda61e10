#include "posh/pdb.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <map>
#include <ostream>

namespace posh {

namespace {

std::string_view field(std::string_view line, std::size_t col1, std::size_t col2) {
  // 1-based inclusive PDB columns; short lines yield a truncated view.
  if (line.size() < col1) return {};
  const std::size_t end = std::min(line.size(), col2);
  return line.substr(col1 - 1, end - col1 + 1);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_coord(std::string_view raw, std::string_view line) {
  const std::string_view s = trim(raw);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size() || !std::isfinite(v))
    raise(Errc::MalformedRecord, "bad coordinate field in: " + std::string(line.substr(0, 30)));
  return v;
}

enum Atom : int { kN = 0, kCA, kC, kO, kCB, kOther };

Atom atom_kind(std::string_view name) {
  if (name == "N") return kN;
  if (name == "CA") return kCA;
  if (name == "C") return kC;
  if (name == "O") return kO;
  if (name == "CB") return kCB;
  return kOther;
}

struct PendingAtom {
  Coord3 pos;
  double occupancy = -1.0;  // unset
};

struct PendingResidue {
  char icode = ' ';
  std::array<PendingAtom, 5> atoms{};
};

}  // namespace

ProteinChain parse_pdb(std::string_view text, std::optional<char> chain_id, ParseStats* stats) {
  char selected = chain_id.value_or('\0');
  bool chain_locked = chain_id.has_value();
  bool chain_seen = false;

  // resSeq -> residue, in file order.
  std::vector<std::pair<int, PendingResidue>> residues;
  std::map<int, std::size_t> by_seq;

  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;

    if (field(line, 1, 6) != "ATOM  ") continue;

    const char cid = line.size() >= 22 ? line[21] : ' ';
    if (!chain_locked) {
      selected = cid;
      chain_locked = true;
    }
    if (cid != selected) continue;
    chain_seen = true;

    const Atom kind = atom_kind(trim(field(line, 13, 16)));
    if (kind == kOther) continue;  // side chains and hydrogens ignored

    const std::string_view seq_str = trim(field(line, 23, 26));
    int seq = 0;
    const auto seq_res = std::from_chars(seq_str.data(), seq_str.data() + seq_str.size(), seq);
    if (seq_str.empty() || seq_res.ec != std::errc{})
      raise(Errc::MalformedRecord, "bad residue number in: " + std::string(line.substr(0, 30)));

    const char icode = line.size() >= 27 ? line[26] : ' ';

    Coord3 p{parse_coord(field(line, 31, 38), line), parse_coord(field(line, 39, 46), line),
             parse_coord(field(line, 47, 54), line)};

    double occ = 1.0;
    const std::string_view occ_str = trim(field(line, 55, 60));
    if (!occ_str.empty()) {
      const auto r = std::from_chars(occ_str.data(), occ_str.data() + occ_str.size(), occ);
      if (r.ec != std::errc{}) occ = 1.0;
    }

    auto it = by_seq.find(seq);
    if (it == by_seq.end()) {
      by_seq.emplace(seq, residues.size());
      residues.emplace_back(seq, PendingResidue{icode, {}});
      it = by_seq.find(seq);
    }
    PendingResidue& res = residues[it->second].second;
    if (res.icode != icode) continue;  // only the first insertion code is kept

    PendingAtom& slot = res.atoms[static_cast<std::size_t>(kind)];
    // Alternate locations: highest occupancy wins, first occurrence on ties.
    if (slot.occupancy < 0.0 || occ > slot.occupancy) slot = PendingAtom{p, occ};
  }

  if (!chain_seen) {
    const std::string want = chain_id ? std::string(1, *chain_id) : std::string("<first>");
    raise(Errc::NoChainFound, "no ATOM records for chain " + want);
  }

  ProteinChain chain;
  chain.id = std::string(1, selected == ' ' ? '_' : selected);
  ParseStats local;
  for (const auto& [seq, res] : residues) {
    (void)seq;
    bool complete = true;
    for (int a : {kN, kCA, kC, kO})
      if (res.atoms[static_cast<std::size_t>(a)].occupancy < 0.0) complete = false;
    if (!complete) {
      ++local.dropped_incomplete;
      continue;
    }
    Residue r;
    r.n = res.atoms[kN].pos;
    r.ca = res.atoms[kCA].pos;
    r.c = res.atoms[kC].pos;
    r.o = res.atoms[kO].pos;
    if (res.atoms[kCB].occupancy >= 0.0) {
      r.cb = res.atoms[kCB].pos;
      r.cb_is_virtual = false;
    } else {
      r.cb = r.ca;  // placeholder until ensure_cbeta
      r.cb_is_virtual = true;
    }
    if (!chain.residues.empty()) {
      const Coord3& prev = chain.residues.back().ca;
      if (prev.x == r.ca.x && prev.y == r.ca.y && prev.z == r.ca.z) {
        ++local.dropped_duplicate_ca;
        continue;
      }
    }
    r.index = static_cast<std::int32_t>(chain.residues.size());
    chain.residues.push_back(r);
  }

  if (stats) *stats = local;
  if (chain.residues.size() < 3)
    raise(Errc::ChainTooShort, "chain " + chain.id + " has " +
                                   std::to_string(chain.residues.size()) + " usable residues");
  return chain;
}

ProteinChain ensure_cbeta(ProteinChain chain, const CbetaWeights& w) {
  for (Residue& r : chain.residues) {
    if (!r.cb_is_virtual) continue;
    const Coord3 b = r.ca - r.n;
    const Coord3 c = r.c - r.ca;
    const Coord3 a = cross(b, c);
    r.cb = r.ca + a * w.wa + b * w.wb + c * w.wc;
  }
  return chain;
}

void write_pdb(std::ostream& os, const ProteinChain& chain) {
  int serial = 1;
  const char* names[4] = {"N", "CA", "C", "O"};
  char buf[96];
  for (const Residue& r : chain.residues) {
    const Coord3* atoms[4] = {&r.n, &r.ca, &r.c, &r.o};
    for (int a = 0; a < 4; ++a) {
      std::snprintf(buf, sizeof(buf),
                    "ATOM  %5d  %-3s ALA A%4d    %8.3f%8.3f%8.3f  1.00  0.00           %c\n",
                    serial++, names[a], r.index + 1, atoms[a]->x, atoms[a]->y, atoms[a]->z,
                    names[a][0]);
      os << buf;
    }
  }
  os << "TER\nEND\n";
}

}  // namespace posh
