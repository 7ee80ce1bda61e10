#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "posh/encoder.hpp"

namespace posh {

/// How the length penalty of the scaled distance is applied. The printed
/// formula divides (bringing length-mismatched pairs closer); multiply is the
/// penalty direction suggested by the surrounding description.
enum class ScalePenalty { Divide, Multiply };

double scaled_distance(std::uint32_t hamming, std::uint32_t l_q, std::uint32_t l_t,
                       std::uint32_t l_max, ScalePenalty penalty = ScalePenalty::Divide);

struct SearchHit {
  std::string id;
  std::uint32_t hamming = 0;
  double scaled = 0.0;
  std::uint32_t n_residues = 0;
};

/// Immutable packed-code database scanned exhaustively. Codes are stored
/// contiguously (ceil(d/8) bytes each) so the scan is one linear pass.
class CodeDatabase {
 public:
  explicit CodeDatabase(std::uint32_t code_length);

  void add(const HashCode& code);

  std::uint32_t code_length() const { return d_; }
  std::size_t size() const { return ids_.size(); }
  std::uint32_t l_max() const { return l_max_; }
  std::size_t code_bytes() const { return (d_ + 7) / 8; }

  const std::string& id_at(std::size_t i) const { return ids_[i]; }
  std::uint32_t length_at(std::size_t i) const { return lengths_[i]; }
  const std::uint8_t* code_at(std::size_t i) const { return codes_.data() + i * code_bytes(); }

  /// Top-k by ascending (scaled distance, hamming, id). Exhaustive scan,
  /// sharded over a worker pool; the result is independent of thread count.
  std::vector<SearchHit> search(const HashCode& query, std::size_t k, unsigned threads = 1,
                                ScalePenalty penalty = ScalePenalty::Divide) const;

  /// All distances in entry order (used by evaluation for full rankings).
  void scan(const HashCode& query, std::vector<std::uint32_t>& out, unsigned threads = 1) const;

  // Index file: magic "POSHIDX1", version u16, d u32, count u64, l_max u32,
  // then per entry (id, n_residues u32, code bytes); trailing CRC32 of the
  // entry payload.
  void save(const std::string& path) const;
  static CodeDatabase load(const std::string& path);

 private:
  std::uint32_t d_;
  std::uint32_t l_max_ = 0;
  std::vector<std::string> ids_;
  std::vector<std::uint32_t> lengths_;
  std::vector<std::uint8_t> codes_;
};

}  // namespace posh
