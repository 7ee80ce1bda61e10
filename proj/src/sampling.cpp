#include "posh/sampling.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace posh {

std::vector<std::size_t> positives(const SimilarityMatrix& matrix, std::size_t a, double rho) {
  const std::size_t n = matrix.size();
  if (n < 2) raise(Errc::SingletonDataset, "positives need at least 2 structures");
  if (rho <= 0.0 || rho >= 1.0) raise(Errc::ConfigError, "rho must be in (0, 1)");
  float row_max = 0.0f;
  for (std::size_t c = 0; c < n; ++c)
    if (c != a) row_max = std::max(row_max, matrix.at(a, c));
  const double threshold = rho * row_max;
  std::vector<std::size_t> out;
  for (std::size_t b = 0; b < n; ++b)
    if (b != a && matrix.at(a, b) >= threshold) out.push_back(b);
  return out;
}

PositiveSets PositiveSets::build(const SimilarityMatrix& matrix, double rho) {
  PositiveSets ps;
  ps.rho = rho;
  ps.sets.reserve(matrix.size());
  for (std::size_t a = 0; a < matrix.size(); ++a) ps.sets.push_back(positives(matrix, a, rho));
  return ps;
}

TrainingBatch sample_batch(const SimilarityMatrix& matrix, const PositiveSets& positive_sets,
                           std::size_t query, int k_negatives, Rng& rng) {
  const std::vector<std::size_t>& pos = positive_sets.sets[query];
  if (pos.empty()) raise(Errc::NoPositives, "query has no positives");

  std::vector<bool> excluded(matrix.size(), false);
  excluded[query] = true;
  for (std::size_t p : pos) excluded[p] = true;
  std::vector<std::size_t> complement;
  for (std::size_t i = 0; i < matrix.size(); ++i)
    if (!excluded[i]) complement.push_back(i);
  if (complement.size() < static_cast<std::size_t>(k_negatives))
    raise(Errc::NotEnoughNegatives,
          "need " + std::to_string(k_negatives) + " negatives, have " +
              std::to_string(complement.size()));

  TrainingBatch batch;
  batch.query = query;
  batch.positive = pos[rng.below(pos.size())];
  // Partial Fisher-Yates for sampling without replacement.
  for (int i = 0; i < k_negatives; ++i) {
    const std::size_t j = static_cast<std::size_t>(i) +
                          rng.below(complement.size() - static_cast<std::size_t>(i));
    std::swap(complement[static_cast<std::size_t>(i)], complement[j]);
    batch.negatives.push_back(complement[static_cast<std::size_t>(i)]);
  }
  return batch;
}

std::string SubstructurePlan::to_tsv() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < ids.size(); ++i) os << ids[i] << '\t' << min_length[i] << '\n';
  return os.str();
}

SubstructurePlan SubstructurePlan::from_tsv(const std::string& text) {
  SubstructurePlan plan;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string_view line(text.data() + pos, eol - pos);
    pos = eol + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line[0] == '#') continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos)
      raise(Errc::MalformedRecord, "plan line needs id<TAB>min_length");
    std::uint32_t len = 0;
    const std::string_view num = line.substr(tab + 1);
    const auto r = std::from_chars(num.data(), num.data() + num.size(), len);
    if (r.ec != std::errc{}) raise(Errc::MalformedRecord, "bad min_length in plan");
    plan.ids.emplace_back(line.substr(0, tab));
    plan.min_length.push_back(len);
  }
  return plan;
}

namespace {

bool all_windows_pass(const ProteinChain& p, std::size_t length, double alpha,
                      const TmOptions& opt) {
  for (std::size_t start = 0; start + length <= p.size(); ++start)
    if (tm_fragment(p, start, length, opt).score < alpha) return false;
  return true;
}

}  // namespace

std::uint32_t precompute_min_length(const ProteinChain& p, double alpha, const TmOptions& opt) {
  const std::size_t n = p.size();
  if (n < 3) raise(Errc::ChainTooShort, "substructure plan needs length >= 3");
  // Binary search for the smallest admissible length; the worst-case window
  // score is monotone in the window length for identity fragments.
  std::size_t lo = 3, hi = n;
  if (!all_windows_pass(p, hi, alpha, opt)) return static_cast<std::uint32_t>(n);
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (all_windows_pass(p, mid, alpha, opt))
      hi = mid;
    else
      lo = mid + 1;
  }
  return static_cast<std::uint32_t>(hi);
}

Window sample_substructure(const ProteinChain& p, std::uint32_t min_length, Rng& rng) {
  const std::uint32_t n = static_cast<std::uint32_t>(p.size());
  if (min_length < 1 || min_length > n)
    raise(Errc::ConfigError, "min_length outside [1, chain length]");
  const std::uint32_t anchor = static_cast<std::uint32_t>(rng.below(n));
  const std::uint32_t length =
      min_length + static_cast<std::uint32_t>(rng.below(n - min_length + 1));

  // Grow alternately right then left from the anchor, clamping at the ends.
  std::uint32_t lo = anchor, hi = anchor + 1;  // [lo, hi)
  bool right_turn = true;
  while (hi - lo < length) {
    const bool can_right = hi < n;
    const bool can_left = lo > 0;
    if ((right_turn && can_right) || !can_left)
      ++hi;
    else
      --lo;
    right_turn = !right_turn;
  }
  return Window{lo, length};
}

}  // namespace posh
