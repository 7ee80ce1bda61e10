#include "posh/chain.hpp"

#include <ostream>
#include <sstream>

#include "posh/binio.hpp"

namespace posh {

namespace {
constexpr std::string_view kChainMagic = "POSHCHN1";
constexpr std::string_view kPackMagic = "POSHCHS1";
}  // namespace

ProteinChain ProteinChain::slice(std::size_t start, std::size_t length,
                                 const std::string& new_id) const {
  if (start + length > residues.size())
    raise(Errc::WindowOutOfRange, "slice past end of chain");
  ProteinChain out;
  out.id = new_id;
  out.residues.assign(residues.begin() + static_cast<std::ptrdiff_t>(start),
                      residues.begin() + static_cast<std::ptrdiff_t>(start + length));
  for (std::size_t i = 0; i < out.residues.size(); ++i)
    out.residues[i].index = static_cast<std::int32_t>(i);
  return out;
}

bool chains_equal(const ProteinChain& a, const ProteinChain& b) {
  if (a.id != b.id || a.residues.size() != b.residues.size()) return false;
  auto eq = [](const Coord3& u, const Coord3& v) {
    return u.x == v.x && u.y == v.y && u.z == v.z;
  };
  for (std::size_t i = 0; i < a.residues.size(); ++i) {
    const Residue& r = a.residues[i];
    const Residue& s = b.residues[i];
    if (r.index != s.index || r.cb_is_virtual != s.cb_is_virtual) return false;
    if (!eq(r.n, s.n) || !eq(r.ca, s.ca) || !eq(r.c, s.c) || !eq(r.o, s.o) || !eq(r.cb, s.cb))
      return false;
  }
  return true;
}

void write_chain(std::ostream& os, const ProteinChain& chain) {
  binio::put_bytes(os, kChainMagic.data(), kChainMagic.size());
  binio::put_str(os, chain.id, "chain id");
  binio::put_u32(os, static_cast<std::uint32_t>(chain.residues.size()));
  for (const Residue& r : chain.residues) {
    for (const Coord3* a : {&r.n, &r.ca, &r.c, &r.o, &r.cb}) {
      binio::put_f64(os, a->x);
      binio::put_f64(os, a->y);
      binio::put_f64(os, a->z);
    }
    binio::put_u8(os, r.cb_is_virtual ? 1 : 0);
  }
}

ProteinChain read_chain(binio::Reader& r) {
  r.expect_magic(kChainMagic, "chain");
  ProteinChain chain;
  chain.id = r.str();
  const std::uint32_t n = r.u32();
  chain.residues.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    Residue& res = chain.residues[i];
    res.index = static_cast<std::int32_t>(i);
    for (Coord3* a : {&res.n, &res.ca, &res.c, &res.o, &res.cb}) {
      a->x = r.f64();
      a->y = r.f64();
      a->z = r.f64();
    }
    res.cb_is_virtual = (r.u8() & 1) != 0;
  }
  return chain;
}

void write_chain_pack(std::ostream& os, const std::vector<ProteinChain>& chains) {
  binio::put_bytes(os, kPackMagic.data(), kPackMagic.size());
  binio::put_u32(os, static_cast<std::uint32_t>(chains.size()));
  for (const ProteinChain& c : chains) write_chain(os, c);
}

std::vector<ProteinChain> read_chain_pack(const std::string& buf) {
  binio::Reader r(buf);
  r.expect_magic(kPackMagic, "chain pack");
  const std::uint32_t n = r.u32();
  std::vector<ProteinChain> out;
  out.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) out.push_back(read_chain(r));
  return out;
}

std::vector<ProteinChain> load_chain_pack(const std::string& path) {
  return read_chain_pack(binio::read_file(path));
}

void save_chain_pack(const std::string& path, const std::vector<ProteinChain>& chains) {
  std::ostringstream os;
  write_chain_pack(os, chains);
  binio::write_file(path, os.str());
}

}  // namespace posh
