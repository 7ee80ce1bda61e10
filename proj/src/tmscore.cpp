#include "posh/tmscore.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace posh {

namespace {

/// Jacobi eigensolver for a symmetric 3x3 matrix. Returns eigenvalues
/// (descending) and the matching orthonormal eigenvectors as Mat3 columns.
void sym_eigen3(const Mat3& s, std::array<double, 3>& evals, Mat3& evecs) {
  Mat3 a = s;
  Mat3 v = Mat3::identity();
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = std::abs(a.at(0, 1)) + std::abs(a.at(0, 2)) + std::abs(a.at(1, 2));
    if (off < 1e-30) break;
    for (int p = 0; p < 2; ++p)
      for (int q = p + 1; q < 3; ++q) {
        const double apq = a.at(p, q);
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (int k = 0; k < 3; ++k) {
          const double akp = a.at(k, p), akq = a.at(k, q);
          a.at(k, p) = c * akp - sn * akq;
          a.at(k, q) = sn * akp + c * akq;
        }
        for (int k = 0; k < 3; ++k) {
          const double apk = a.at(p, k), aqk = a.at(q, k);
          a.at(p, k) = c * apk - sn * aqk;
          a.at(q, k) = sn * apk + c * aqk;
        }
        for (int k = 0; k < 3; ++k) {
          const double vkp = v.at(k, p), vkq = v.at(k, q);
          v.at(k, p) = c * vkp - sn * vkq;
          v.at(k, q) = sn * vkp + c * vkq;
        }
      }
  }
  std::array<int, 3> order{0, 1, 2};
  std::array<double, 3> raw{a.at(0, 0), a.at(1, 1), a.at(2, 2)};
  std::sort(order.begin(), order.end(), [&](int i, int j) { return raw[static_cast<std::size_t>(i)] > raw[static_cast<std::size_t>(j)]; });
  Mat3 sorted;
  for (int c = 0; c < 3; ++c) {
    evals[static_cast<std::size_t>(c)] = raw[static_cast<std::size_t>(order[static_cast<std::size_t>(c)])];
    for (int r = 0; r < 3; ++r) sorted.at(r, c) = v.at(r, order[static_cast<std::size_t>(c)]);
  }
  evecs = sorted;
}

Coord3 column(const Mat3& m, int c) { return {m.at(0, c), m.at(1, c), m.at(2, c)}; }

void set_column(Mat3& m, int c, const Coord3& v) {
  m.at(0, c) = v.x;
  m.at(1, c) = v.y;
  m.at(2, c) = v.z;
}

}  // namespace

Superposition kabsch(const std::vector<Coord3>& x, const std::vector<Coord3>& y) {
  if (x.size() != y.size()) raise(Errc::ShapeMismatch, "point sets differ in size");
  const std::size_t n = x.size();
  if (n < 3) raise(Errc::DegeneratePointSet, "superposition needs at least 3 points");

  Coord3 cx{}, cy{};
  for (std::size_t i = 0; i < n; ++i) {
    cx += x[i];
    cy += y[i];
  }
  cx = cx * (1.0 / static_cast<double>(n));
  cy = cy * (1.0 / static_cast<double>(n));

  // Covariance H = sum (x - cx)(y - cy)^T.
  Mat3 h;
  h.m.fill(0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const Coord3 a = x[i] - cx;
    const Coord3 b = y[i] - cy;
    h.at(0, 0) += a.x * b.x;
    h.at(0, 1) += a.x * b.y;
    h.at(0, 2) += a.x * b.z;
    h.at(1, 0) += a.y * b.x;
    h.at(1, 1) += a.y * b.y;
    h.at(1, 2) += a.y * b.z;
    h.at(2, 0) += a.z * b.x;
    h.at(2, 1) += a.z * b.y;
    h.at(2, 2) += a.z * b.z;
  }

  // SVD via the eigensystem of H^T H; U columns recovered as H v / sigma.
  const Mat3 hth = h.transposed() * h;
  std::array<double, 3> evals{};
  Mat3 vmat;
  sym_eigen3(hth, evals, vmat);
  for (double& e : evals) e = std::max(e, 0.0);
  const std::array<double, 3> sigma{std::sqrt(evals[0]), std::sqrt(evals[1]),
                                    std::sqrt(evals[2])};
  if (sigma[1] <= 1e-9 * std::max(sigma[0], 1e-300))
    raise(Errc::DegeneratePointSet, "point set is collinear or coincident");

  Mat3 umat;
  for (int c = 0; c < 2; ++c)
    set_column(umat, c, h.apply(column(vmat, c)) * (1.0 / sigma[static_cast<std::size_t>(c)]));
  // Third left vector completes the right-handed frame even when sigma_3 ~ 0
  // (planar point sets).
  set_column(umat, 2, cross(column(umat, 0), column(umat, 1)));

  // R = U' diag(1,1,s) V'^T maximizing trace, with s flipping the smallest
  // direction when needed to keep det(R) = +1.
  Mat3 r_candidate = umat * vmat.transposed();
  const double s = r_candidate.det() < 0.0 ? -1.0 : 1.0;
  Mat3 d = Mat3::identity();
  d.at(2, 2) = s;
  Mat3 rot = umat * d * vmat.transposed();

  Superposition sp;
  sp.rotation = rot;
  sp.translation = cy - rot.apply(cx);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Coord3 diff = sp.apply(x[i]) - y[i];
    ss += dot(diff, diff);
  }
  sp.rmsd = std::sqrt(ss / static_cast<double>(n));
  return sp;
}

double tm_d0(std::size_t l_target) {
  if (l_target < 1) raise(Errc::ConfigError, "d0 needs a positive length");
  const double l = static_cast<double>(l_target);
  const double raw = l > 15.0 ? 1.24 * std::cbrt(l - 15.0) - 1.8 : -1.8;
  return std::max(raw, 0.5);
}

namespace {

struct ScoredPose {
  double tm = 0.0;
  std::size_t close_pairs = 0;
};

/// Score one superposition over all corresponded pairs.
ScoredPose score_pose(const Superposition& sp, const std::vector<Coord3>& xa,
                      const std::vector<Coord3>& yb, double d0, std::size_t l_target,
                      std::vector<double>* dists) {
  ScoredPose out;
  double sum = 0.0;
  for (std::size_t i = 0; i < xa.size(); ++i) {
    const Coord3 diff = sp.apply(xa[i]) - yb[i];
    const double d = norm(diff);
    if (dists) (*dists)[i] = d;
    sum += 1.0 / (1.0 + (d / d0) * (d / d0));
    if (d < d0) ++out.close_pairs;
  }
  out.tm = sum / static_cast<double>(l_target);
  return out;
}

}  // namespace

TmResult tm_score_identity(const ProteinChain& a, const ProteinChain& b,
                           const Correspondence& correspondence, const TmOptions& opt) {
  if (correspondence.size() < 3)
    raise(Errc::CorrespondenceTooShort, "need at least 3 corresponded pairs");
  const std::size_t lf = correspondence.size();
  const std::size_t l_target = b.size();

  std::vector<Coord3> xa(lf), yb(lf);
  for (std::size_t i = 0; i < lf; ++i) {
    const auto [ia, ib] = correspondence[i];
    if (ia >= a.size() || ib >= b.size())
      raise(Errc::IndexOutOfRange, "correspondence index out of range");
    xa[i] = a.residues[ia].ca;
    yb[i] = b.residues[ib].ca;
  }

  const double d0 = tm_d0(l_target);
  TmResult best;
  best.d0 = d0;

  std::vector<std::size_t> seed_lengths;
  for (std::size_t len : {lf, lf / 2, lf / 4}) {
    len = std::max(len, std::min(opt.min_seed, lf));
    if (std::find(seed_lengths.begin(), seed_lengths.end(), len) == seed_lengths.end())
      seed_lengths.push_back(len);
  }
  const std::size_t stride = std::max<std::size_t>(lf / 10, 1);

  std::vector<double> dists(lf);
  std::vector<Coord3> sel_x, sel_y;
  std::vector<std::size_t> selected, prev_selected;

  for (std::size_t seed_len : seed_lengths) {
    for (std::size_t start = 0; start + seed_len <= lf; start += stride) {
      sel_x.assign(xa.begin() + static_cast<std::ptrdiff_t>(start),
                   xa.begin() + static_cast<std::ptrdiff_t>(start + seed_len));
      sel_y.assign(yb.begin() + static_cast<std::ptrdiff_t>(start),
                   yb.begin() + static_cast<std::ptrdiff_t>(start + seed_len));
      Superposition sp;
      try {
        sp = kabsch(sel_x, sel_y);
      } catch (const Error&) {
        continue;  // degenerate seed window
      }

      prev_selected.clear();
      for (std::size_t iter = 0; iter < opt.max_iterations; ++iter) {
        const ScoredPose scored = score_pose(sp, xa, yb, d0, l_target, &dists);
        if (scored.tm > best.score) {
          best.score = scored.tm;
          best.aligned_length = scored.close_pairs;
        }

        // Select pairs under the cutoff, growing it until at least 3 qualify.
        selected.clear();
        double cutoff = d0;
        while (true) {
          selected.clear();
          for (std::size_t i = 0; i < lf; ++i)
            if (dists[i] < cutoff) selected.push_back(i);
          if (selected.size() >= 3 || cutoff > 1e6) break;
          cutoff += opt.cutoff_growth;
        }
        if (selected.size() < 3 || selected == prev_selected) break;
        prev_selected = selected;

        sel_x.clear();
        sel_y.clear();
        for (std::size_t i : selected) {
          sel_x.push_back(xa[i]);
          sel_y.push_back(yb[i]);
        }
        try {
          sp = kabsch(sel_x, sel_y);
        } catch (const Error&) {
          break;
        }
      }
    }
  }

  if (best.score <= 0.0) raise(Errc::DegeneratePointSet, "no valid superposition seed");
  return best;
}

TmResult tm_fragment(const ProteinChain& p, std::size_t start, std::size_t length,
                     const TmOptions& opt) {
  if (start + length > p.size() || length < 1)
    raise(Errc::WindowOutOfRange, "fragment window outside chain");
  const ProteinChain sub = p.slice(start, length, p.id + ":frag");
  Correspondence corr;
  corr.reserve(length);
  for (std::size_t i = 0; i < length; ++i)
    corr.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(start + i));
  return tm_score_identity(sub, p, corr, opt);
}

}  // namespace posh
