#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "posh/errors.hpp"

namespace posh {

/// Dense pairwise ground-truth similarity. scores[a][b] is the TM-score of
/// (P_a, P_b) normalized by the length of P_a; the diagonal is unused.
class SimilarityMatrix {
 public:
  SimilarityMatrix() = default;
  explicit SimilarityMatrix(std::vector<std::string> ids);

  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }

  std::size_t index_of(const std::string& id) const;
  bool has(const std::string& id) const { return by_id_.count(id) != 0; }

  float at(std::size_t a, std::size_t b) const { return scores_[a * ids_.size() + b]; }
  void set(std::size_t a, std::size_t b, float v);

  /// Text format: one line per pair "id_a<TAB>id_b<TAB>tm_ab<TAB>tm_ba".
  std::string to_tsv() const;
  static SimilarityMatrix from_tsv(const std::string& text);

  /// Binary cache, magic "POSHTMM1".
  void save_cache(const std::string& path) const;
  static SimilarityMatrix load_cache(const std::string& path);

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::vector<float> scores_;
};

}  // namespace posh
