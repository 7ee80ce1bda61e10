#include "posh/simmatrix.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "posh/binio.hpp"

namespace posh {

SimilarityMatrix::SimilarityMatrix(std::vector<std::string> ids) : ids_(std::move(ids)) {
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (!by_id_.emplace(ids_[i], i).second)
      raise(Errc::ConfigError, "duplicate id in similarity matrix: " + ids_[i]);
  }
  scores_.assign(ids_.size() * ids_.size(), 0.0f);
}

std::size_t SimilarityMatrix::index_of(const std::string& id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) raise(Errc::ConfigError, "unknown structure id: " + id);
  return it->second;
}

void SimilarityMatrix::set(std::size_t a, std::size_t b, float v) {
  if (v < 0.0f || v > 1.0f || !std::isfinite(v))
    raise(Errc::ConfigError, "similarity score outside [0, 1]");
  scores_[a * ids_.size() + b] = v;
}

std::string SimilarityMatrix::to_tsv() const {
  std::ostringstream os;
  char buf[64];
  for (std::size_t a = 0; a < size(); ++a)
    for (std::size_t b = a + 1; b < size(); ++b) {
      std::snprintf(buf, sizeof(buf), "%.6f\t%.6f", at(a, b), at(b, a));
      os << ids_[a] << '\t' << ids_[b] << '\t' << buf << '\n';
    }
  return os.str();
}

SimilarityMatrix SimilarityMatrix::from_tsv(const std::string& text) {
  struct Row {
    std::string a, b;
    float ab, ba;
  };
  std::vector<Row> rows;
  std::vector<std::string> ids;
  std::unordered_map<std::string, std::size_t> seen;

  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string_view line(text.data() + pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line[0] == '#') continue;

    std::array<std::string_view, 4> cols;
    std::size_t start = 0;
    for (int c = 0; c < 4; ++c) {
      const std::size_t tab = line.find('\t', start);
      if (c < 3 && tab == std::string_view::npos)
        raise(Errc::MalformedRecord,
              "similarity line " + std::to_string(line_no) + " needs 4 tab-separated fields");
      cols[static_cast<std::size_t>(c)] =
          line.substr(start, (tab == std::string_view::npos ? line.size() : tab) - start);
      start = tab + 1;
    }
    auto parse = [&](std::string_view s) {
      float v = 0.0f;
      const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
      if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
        raise(Errc::MalformedRecord, "bad score on line " + std::to_string(line_no));
      return v;
    };
    Row row{std::string(cols[0]), std::string(cols[1]), parse(cols[2]), parse(cols[3])};
    for (const std::string* id : {&row.a, &row.b})
      if (seen.emplace(*id, ids.size()).second) ids.push_back(*id);
    rows.push_back(std::move(row));
  }

  SimilarityMatrix m(ids);
  for (const Row& r : rows) {
    const std::size_t a = m.index_of(r.a), b = m.index_of(r.b);
    m.set(a, b, r.ab);
    m.set(b, a, r.ba);
  }
  return m;
}

namespace {
constexpr std::string_view kCacheMagic = "POSHTMM1";
}

void SimilarityMatrix::save_cache(const std::string& path) const {
  std::ostringstream os;
  binio::put_bytes(os, kCacheMagic.data(), kCacheMagic.size());
  binio::put_u32(os, static_cast<std::uint32_t>(size()));
  for (const std::string& id : ids_) binio::put_str(os, id, "matrix id");
  for (float v : scores_) binio::put_f32(os, v);
  binio::write_file(path, os.str());
}

SimilarityMatrix SimilarityMatrix::load_cache(const std::string& path) {
  const std::string buf = binio::read_file(path);
  binio::Reader r(buf);
  r.expect_magic(kCacheMagic, "similarity cache");
  const std::uint32_t n = r.u32();
  std::vector<std::string> ids;
  ids.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) ids.push_back(r.str());
  SimilarityMatrix m(std::move(ids));
  for (float& v : m.scores_) v = r.f32();
  return m;
}

}  // namespace posh
