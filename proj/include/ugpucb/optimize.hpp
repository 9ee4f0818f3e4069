#ifndef UGPUCB_OPTIMIZE_HPP
#define UGPUCB_OPTIMIZE_HPP

#include "common.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

namespace ugpucb {

/// Axis-aligned search box; lower < upper per dimension.
struct Bounds {
  std::vector<std::pair<double, double>> box;

  static Bounds uniform(Eigen::Index dim, double lo, double hi) {
    return {std::vector<std::pair<double, double>>(static_cast<std::size_t>(dim), {lo, hi})};
  }

  Eigen::Index dim() const { return static_cast<Eigen::Index>(box.size()); }
  double lower(Eigen::Index i) const { return box[static_cast<std::size_t>(i)].first; }
  double upper(Eigen::Index i) const { return box[static_cast<std::size_t>(i)].second; }
  double width(Eigen::Index i) const { return upper(i) - lower(i); }

  void validate() const {
    require(!box.empty(), "Bounds: at least one dimension required");
    for (const auto& [lo, hi] : box)
      require(std::isfinite(lo) && std::isfinite(hi) && lo < hi, "Bounds: lower must be < upper");
  }

  bool contains(const Vector& x) const {
    if (x.size() != dim()) return false;
    for (Eigen::Index i = 0; i < dim(); ++i)
      if (x(i) < lower(i) || x(i) > upper(i)) return false;
    return true;
  }

  Vector sample(Rng& rng) const {
    Vector x(dim());
    for (Eigen::Index i = 0; i < dim(); ++i) {
      std::uniform_real_distribution<double> u(lower(i), upper(i));
      x(i) = u(rng);
    }
    return x;
  }
};

/// Scores a batch of points (columns) in one call.
using BatchObjective = std::function<Vector(const std::vector<Vector>&)>;

struct LocalResult {
  Vector x;
  double value;
};

/// Coordinate-wise golden-section ascent run in lockstep over several starts,
/// so every probe round is a single batched call. Sweep s searches each
/// coordinate on [x_i - w_s, x_i + w_s] clipped to the box, w_s = w0 * shrink^s,
/// and keeps a probe only if it improves on the current value.
inline std::vector<LocalResult> golden_coordinate_ascent(const BatchObjective& fn, std::vector<LocalResult> starts,
                                                        const Bounds& bounds, int sweeps, double w0_fraction,
                                                        double shrink, int golden_iters = 12) {
  constexpr double kInvPhi = 0.6180339887498949;
  const std::size_t k = starts.size();
  if (k == 0 || sweeps <= 0) return starts;
  std::vector<double> a(k), b(k), c(k), d(k), fc(k), fd(k);
  std::vector<Vector> probes(k);

  auto eval_coord = [&](Eigen::Index i, const std::vector<double>& pos) {
    for (std::size_t s = 0; s < k; ++s) {
      probes[s] = starts[s].x;
      probes[s](i) = pos[s];
    }
    return fn(probes);
  };

  double w_frac = w0_fraction;
  for (int sweep = 0; sweep < sweeps; ++sweep, w_frac *= shrink) {
    for (Eigen::Index i = 0; i < bounds.dim(); ++i) {
      const double w = w_frac * bounds.width(i);
      for (std::size_t s = 0; s < k; ++s) {
        a[s] = std::max(bounds.lower(i), starts[s].x(i) - w);
        b[s] = std::min(bounds.upper(i), starts[s].x(i) + w);
        c[s] = b[s] - kInvPhi * (b[s] - a[s]);
        d[s] = a[s] + kInvPhi * (b[s] - a[s]);
      }
      Vector vc = eval_coord(i, c);
      Vector vd = eval_coord(i, d);
      for (std::size_t s = 0; s < k; ++s) {
        fc[s] = vc(static_cast<Eigen::Index>(s));
        fd[s] = vd(static_cast<Eigen::Index>(s));
      }
      std::vector<double> best_x(k), best_f(k);
      for (std::size_t s = 0; s < k; ++s) {
        best_x[s] = fc[s] >= fd[s] ? c[s] : d[s];
        best_f[s] = std::max(fc[s], fd[s]);
      }
      std::vector<double> pos(k);
      std::vector<bool> new_is_c(k);
      for (int it = 0; it < golden_iters; ++it) {
        for (std::size_t s = 0; s < k; ++s) {
          if (fc[s] >= fd[s]) {
            b[s] = d[s];
            d[s] = c[s];
            fd[s] = fc[s];
            c[s] = b[s] - kInvPhi * (b[s] - a[s]);
            pos[s] = c[s];
            new_is_c[s] = true;
          } else {
            a[s] = c[s];
            c[s] = d[s];
            fc[s] = fd[s];
            d[s] = a[s] + kInvPhi * (b[s] - a[s]);
            pos[s] = d[s];
            new_is_c[s] = false;
          }
        }
        Vector v = eval_coord(i, pos);
        for (std::size_t s = 0; s < k; ++s) {
          const double fv = v(static_cast<Eigen::Index>(s));
          (new_is_c[s] ? fc[s] : fd[s]) = fv;
          if (fv > best_f[s]) {
            best_f[s] = fv;
            best_x[s] = pos[s];
          }
        }
      }
      for (std::size_t s = 0; s < k; ++s) {
        if (best_f[s] > starts[s].value) {
          starts[s].x(i) = best_x[s];
          starts[s].value = best_f[s];
        }
      }
    }
  }
  return starts;
}

}  // namespace ugpucb

#endif  // UGPUCB_OPTIMIZE_HPP
