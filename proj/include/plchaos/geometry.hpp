#pragma once

// Nearest-distance queries between planar point sets and polylines, used for
// Hausdorff-type comparisons of attractors and manifolds.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "plchaos/poincare.hpp"

namespace plchaos {

namespace detail {

inline double point_segment_distance(const Vector2& q, const Vector2& a, const Vector2& b) {
  const Vector2 ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (q - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (q - (a + t * ab)).norm();
}

// Uniform grid over segment bounding boxes.
class SegmentGrid {
 public:
  SegmentGrid(std::vector<Vector2> a, std::vector<Vector2> b) : a_(std::move(a)), b_(std::move(b)) {
    if (a_.empty()) return;
    lo_ = Vector2::Constant(std::numeric_limits<double>::infinity());
    Vector2 hi = -lo_;
    for (std::size_t i = 0; i < a_.size(); ++i) {
      lo_ = lo_.cwiseMin(a_[i]).cwiseMin(b_[i]);
      hi = hi.cwiseMax(a_[i]).cwiseMax(b_[i]);
    }
    const double extent = std::max({hi[0] - lo_[0], hi[1] - lo_[1], 1e-12});
    cell_ = extent / std::max(1.0, std::sqrt(static_cast<double>(a_.size())));
    nx_ = static_cast<long>((hi[0] - lo_[0]) / cell_) + 1;
    ny_ = static_cast<long>((hi[1] - lo_[1]) / cell_) + 1;
    cells_.resize(static_cast<std::size_t>(nx_ * ny_));
    for (std::size_t i = 0; i < a_.size(); ++i) {
      const auto [i0, j0] = cell_of(a_[i].cwiseMin(b_[i]));
      const auto [i1, j1] = cell_of(a_[i].cwiseMax(b_[i]));
      for (long ii = std::max(i0, 0L); ii <= std::min(i1, nx_ - 1); ++ii)
        for (long jj = std::max(j0, 0L); jj <= std::min(j1, ny_ - 1); ++jj)
          cells_[static_cast<std::size_t>(ii * ny_ + jj)].push_back(i);
    }
  }

  double nearest(const Vector2& q) const {
    double best = std::numeric_limits<double>::infinity();
    if (a_.empty()) return best;
    const auto [ci, cj] = cell_of(q);
    // Rings closer than the grid box are empty.
    const long dx = std::max({0L, -ci, ci - (nx_ - 1)});
    const long dy = std::max({0L, -cj, cj - (ny_ - 1)});
    const long k_first = std::max(dx, dy);
    const long k_last = std::max({ci, nx_ - 1 - ci, cj, ny_ - 1 - cj});
    auto visit = [&](long ii, long jj) {
      for (auto s : cells_[static_cast<std::size_t>(ii * ny_ + jj)])
        best = std::min(best, point_segment_distance(q, a_[s], b_[s]));
    };
    for (long k = k_first; k <= k_last; ++k) {
      // Ring k: cells at Chebyshev index distance exactly k, clipped to the grid.
      const long jlo = std::max(cj - k, 0L), jhi = std::min(cj + k, ny_ - 1);
      for (long ii : {ci - k, ci + k}) {
        if (ii < 0 || ii >= nx_) continue;
        for (long jj = jlo; jj <= jhi; ++jj) visit(ii, jj);
        if (k == 0) break;
      }
      const long ilo = std::max(ci - k + 1, 0L), ihi = std::min(ci + k - 1, nx_ - 1);
      for (long jj : {cj - k, cj + k}) {
        if (k == 0 || jj < 0 || jj >= ny_) continue;
        for (long ii = ilo; ii <= ihi; ++ii) visit(ii, jj);
      }
      // Unvisited cells are at least k * cell away from q.
      if (best <= static_cast<double>(k) * cell_) break;
    }
    return best;
  }

 private:
  std::pair<long, long> cell_of(const Vector2& p) const {
    return {static_cast<long>(std::floor((p[0] - lo_[0]) / cell_)),
            static_cast<long>(std::floor((p[1] - lo_[1]) / cell_))};
  }

  std::vector<Vector2> a_, b_;
  Vector2 lo_ = Vector2::Zero();
  double cell_ = 1.0;
  long nx_ = 0, ny_ = 0;
  std::vector<std::vector<std::size_t>> cells_;
};

}  // namespace detail

/// max over q in `from` of the distance from q to the point set `to`.
inline double directed_hausdorff(const std::vector<SectionPoint>& from,
                                 const std::vector<SectionPoint>& to) {
  std::vector<Vector2> pts;
  pts.reserve(to.size());
  for (const auto& s : to) pts.push_back(s.vec());
  detail::SegmentGrid grid(pts, pts);
  double worst = 0.0;
  for (const auto& q : from) worst = std::max(worst, grid.nearest(q.vec()));
  return worst;
}

inline double hausdorff(const std::vector<SectionPoint>& A, const std::vector<SectionPoint>& B) {
  return std::max(directed_hausdorff(A, B), directed_hausdorff(B, A));
}

/// max over q in `from` of the distance from q to the polyline through `line`.
inline double directed_hausdorff_to_polyline(const std::vector<SectionPoint>& from,
                                             const std::vector<SectionPoint>& line) {
  std::vector<Vector2> a, b;
  if (line.size() == 1) {
    a.push_back(line[0].vec());
    b.push_back(line[0].vec());
  }
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    a.push_back(line[i].vec());
    b.push_back(line[i + 1].vec());
  }
  detail::SegmentGrid grid(a, b);
  double worst = 0.0;
  for (const auto& q : from) worst = std::max(worst, grid.nearest(q.vec()));
  return worst;
}

/// Number of clusters among scalar values separated by gaps larger than tol.
inline std::size_t distinct_count(std::vector<double> values, double tol = 1e-6) {
  if (values.empty()) return 0;
  std::sort(values.begin(), values.end());
  std::size_t n = 1;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] - values[i - 1] > tol) ++n;
  return n;
}

}  // namespace plchaos
