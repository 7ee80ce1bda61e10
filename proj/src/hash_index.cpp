#include "posh/hash_index.hpp"

#include <zlib.h>

#include <algorithm>
#include <sstream>
#include <unordered_set>

#include "posh/binio.hpp"
#include "posh/kernels.hpp"
#include "posh/threadpool.hpp"

namespace posh {

double scaled_distance(std::uint32_t hamming, std::uint32_t l_q, std::uint32_t l_t,
                       std::uint32_t l_max, ScalePenalty penalty) {
  if (l_q < 1 || l_t < 1 || l_max < l_t)
    raise(Errc::ConfigError, "scaled_distance length arguments out of range");
  const double factor =
      1.0 + std::abs(static_cast<double>(l_q) - static_cast<double>(l_t)) / l_max;
  return penalty == ScalePenalty::Divide ? hamming / factor : hamming * factor;
}

CodeDatabase::CodeDatabase(std::uint32_t code_length) : d_(code_length) {
  if (d_ < 1) raise(Errc::ConfigError, "code length must be positive");
}

void CodeDatabase::add(const HashCode& code) {
  if (code.n_bits != d_) raise(Errc::LengthMismatch, "code length does not match database");
  if (code.bits.size() != code_bytes()) raise(Errc::LengthMismatch, "packed size mismatch");
  if (code.n_residues < 1) raise(Errc::ConfigError, "entry needs a positive residue count");
  for (const std::string& id : ids_)
    if (id == code.id) raise(Errc::ConfigError, "duplicate id in database: " + code.id);
  ids_.push_back(code.id);
  lengths_.push_back(code.n_residues);
  codes_.insert(codes_.end(), code.bits.begin(), code.bits.end());
  l_max_ = std::max(l_max_, code.n_residues);
}

void CodeDatabase::scan(const HashCode& query, std::vector<std::uint32_t>& out,
                        unsigned threads) const {
  if (query.n_bits != d_) raise(Errc::LengthMismatch, "query code length mismatch");
  out.resize(size());
  const auto& table = kernels::active_table();
  const std::size_t stride = code_bytes();
  parallel_blocks(size(), threads, [&](std::size_t begin, std::size_t end, std::size_t) {
    table.hamming_scan(query.bits.data(), codes_.data() + begin * stride, end - begin, stride,
                       d_, out.data() + begin);
  });
}

std::vector<SearchHit> CodeDatabase::search(const HashCode& query, std::size_t k,
                                            unsigned threads, ScalePenalty penalty) const {
  if (k < 1) raise(Errc::ConfigError, "k must be >= 1");
  if (query.n_bits != d_) raise(Errc::LengthMismatch, "query code length mismatch");

  struct Cand {
    double scaled;
    std::uint32_t hamming;
    std::uint32_t entry;
  };
  const auto better = [this](const Cand& a, const Cand& b) {
    if (a.scaled != b.scaled) return a.scaled < b.scaled;
    if (a.hamming != b.hamming) return a.hamming < b.hamming;
    return ids_[a.entry] < ids_[b.entry];
  };

  std::vector<std::uint32_t> dists;
  scan(query, dists, threads);

  // Per-block top-k heaps merged afterward; the union of block top-ks always
  // contains the global top-k.
  const unsigned nthreads = resolve_threads(threads);
  std::vector<std::vector<Cand>> block_tops(nthreads > 0 ? nthreads : 1);
  parallel_blocks(size(), threads, [&](std::size_t begin, std::size_t end, std::size_t block) {
    auto worse = [&](const Cand& a, const Cand& b) { return better(b, a); };
    std::vector<Cand>& heap = block_tops[block];
    for (std::size_t i = begin; i < end; ++i) {
      Cand c{scaled_distance(dists[i], query.n_residues, lengths_[i], std::max(l_max_, lengths_[i]),
                             penalty),
             dists[i], static_cast<std::uint32_t>(i)};
      if (heap.size() < k) {
        heap.push_back(c);
        std::push_heap(heap.begin(), heap.end(), worse);
      } else if (better(c, heap.front())) {
        std::pop_heap(heap.begin(), heap.end(), worse);
        heap.back() = c;
        std::push_heap(heap.begin(), heap.end(), worse);
      }
    }
  });

  std::vector<Cand> all;
  for (const auto& block : block_tops) all.insert(all.end(), block.begin(), block.end());
  std::sort(all.begin(), all.end(), better);
  if (all.size() > k) all.resize(k);

  std::vector<SearchHit> hits;
  hits.reserve(all.size());
  for (const Cand& c : all)
    hits.push_back(SearchHit{ids_[c.entry], c.hamming, c.scaled, lengths_[c.entry]});
  return hits;
}

namespace {
constexpr std::string_view kIndexMagic = "POSHIDX1";
constexpr std::uint16_t kIndexVersion = 1;
}  // namespace

void CodeDatabase::save(const std::string& path) const {
  std::ostringstream payload;
  for (std::size_t i = 0; i < size(); ++i) {
    binio::put_str(payload, ids_[i], "entry id");
    binio::put_u32(payload, lengths_[i]);
    binio::put_bytes(payload, codes_.data() + i * code_bytes(), code_bytes());
  }
  const std::string body = payload.str();
  const auto crc = static_cast<std::uint32_t>(
      crc32(0, reinterpret_cast<const Bytef*>(body.data()), static_cast<uInt>(body.size())));

  std::ostringstream os;
  binio::put_bytes(os, kIndexMagic.data(), kIndexMagic.size());
  binio::put_u16(os, kIndexVersion);
  binio::put_u32(os, d_);
  binio::put_u64(os, size());
  binio::put_u32(os, l_max_);
  binio::put_bytes(os, body.data(), body.size());
  binio::put_u32(os, crc);
  binio::write_file(path, os.str());
}

CodeDatabase CodeDatabase::load(const std::string& path) {
  const std::string buf = binio::read_file(path);
  binio::Reader r(buf);
  r.expect_magic(kIndexMagic, "index");
  if (r.u16() != kIndexVersion) raise(Errc::VersionMismatch, "unsupported index version");
  const std::uint32_t d = r.u32();
  const std::uint64_t count = r.u64();
  const std::uint32_t l_max = r.u32();

  const std::size_t body_begin = r.pos();
  CodeDatabase db(d);
  const std::size_t nb = db.code_bytes();
  db.ids_.reserve(count);
  db.lengths_.reserve(count);
  db.codes_.reserve(count * nb);
  std::unordered_set<std::string> seen;
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string id = r.str();
    if (!seen.insert(id).second) raise(Errc::ConfigError, "duplicate id in index: " + id);
    const std::uint32_t len = r.u32();
    const unsigned char* code = r.bytes(nb);
    db.ids_.push_back(std::move(id));
    db.lengths_.push_back(len);
    db.codes_.insert(db.codes_.end(), code, code + nb);
  }
  const std::size_t body_end = r.pos();
  const std::uint32_t stored_crc = r.u32();
  const auto crc = static_cast<std::uint32_t>(
      crc32(0, reinterpret_cast<const Bytef*>(buf.data() + body_begin),
            static_cast<uInt>(body_end - body_begin)));
  if (crc != stored_crc) raise(Errc::ChecksumMismatch, "index payload checksum mismatch");
  if (db.lengths_.empty()) {
    db.l_max_ = l_max;  // header value is authoritative for an empty index
  } else {
    db.l_max_ = 0;
    for (std::uint32_t len : db.lengths_) db.l_max_ = std::max(db.l_max_, len);
    if (db.l_max_ != l_max) raise(Errc::ChecksumMismatch, "index l_max disagrees with entries");
  }
  return db;
}

}  // namespace posh
