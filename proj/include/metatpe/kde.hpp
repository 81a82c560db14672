#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "metatpe/errors.hpp"
#include "metatpe/random.hpp"
#include "metatpe/search_space.hpp"

namespace metatpe {

// Bandwidth contract: numerical dimensions use the normal-reference rule
// 1.06 * sigma * n^(-1/(D+4)) clamped into [b_min, b_max] (sigma taken as 1
// when n < 2); categorical dimensions use (K-1)/K * min(1, n^(-1/(D+4))).
struct BandwidthRule {
  double b_min = 1e-3;
  double b_max = 1.0;
};

// Multivariate product-kernel density estimator over unit-scaled
// configurations. Numerical dimensions use a Gaussian kernel truncated to
// [0, 1] and renormalized per center; categorical dimensions use the
// Aitchison-Aitken kernel. The estimator can be restricted to a subset of
// active dimensions; inactive numerical dimensions contribute a constant
// density of 1 (and are sampled uniformly), so the reduced estimator is the
// product over the active set only.
//
// Immutable after construction: pdf and marginal_pdf are safe to call
// concurrently; sample only needs the caller's stream to be exclusive.
class Kde {
 public:
  Kde(const SearchSpace& space, std::vector<UnitConfig> points, BandwidthRule rule = {})
      : Kde(space, points, select_bandwidths(space, points, rule)) {}

  Kde(const SearchSpace& space, const std::vector<UnitConfig>& points,
      std::vector<double> bandwidths)
      : n_(points.size()), dims_(space.size()), bw_(std::move(bandwidths)) {
    if (n_ == 0) throw std::invalid_argument("kernel density estimate needs >= 1 point");
    if (bw_.size() != dims_) throw std::invalid_argument("one bandwidth per dimension required");
    category_counts_.resize(dims_, 0);
    for (std::size_t d = 0; d < dims_; ++d) {
      const ParamDomain& p = space.param(d);
      if (!p.is_numerical()) category_counts_[d] = p.category_count();
    }
    for (const auto& u : points) {
      if (u.coords.size() != dims_)
        throw std::invalid_argument("kernel density point of wrong dimension");
    }
    for (std::size_t d = 0; d < dims_; ++d) {
      if (category_counts_[d] > 0) {
        const double cap = (static_cast<double>(category_counts_[d]) - 1.0) /
                           static_cast<double>(category_counts_[d]);
        if (!(bw_[d] >= 0.0 && bw_[d] <= cap + 1e-12))
          throw std::invalid_argument("categorical bandwidth outside [0, (K-1)/K]");
      } else if (!(bw_[d] > 0.0)) {
        throw std::invalid_argument("numerical bandwidth must be positive");
      }
    }
    active_.resize(dims_);
    std::iota(active_.begin(), active_.end(), std::size_t{0});
    active_mask_.assign(dims_, 1);
    build_groups(points);
    precompute();
  }

  std::size_t size() const { return n_; }
  std::size_t dims() const { return dims_; }
  const std::vector<double>& bandwidths() const { return bw_; }
  const std::vector<std::size_t>& active_dims() const { return active_; }

  // Density at u: mean over points of the product of per-dimension kernels
  // over the active set. An empty active set yields the constant density 1.
  double pdf(const UnitConfig& u) const {
    double acc = 0.0;
    for (std::size_t g = 0; g < counts_.size(); ++g) {
      acc += counts_[g] * group_kernel(g, u);
    }
    return acc / static_cast<double>(n_);
  }

  // Marginal density on one active dimension: the 1D kernel mean on that
  // coordinate (for categorical dimensions, the probability of the category
  // with index `coord`).
  double marginal_pdf(std::size_t dim, double coord) const {
    if (dim >= dims_ || !active_mask_[dim])
      throw std::invalid_argument("marginal requested on an inactive dimension");
    double acc = 0.0;
    for (std::size_t g = 0; g < counts_.size(); ++g) {
      acc += counts_[g] * dim_kernel(g, dim, coord);
    }
    return acc / static_cast<double>(n_);
  }

  // Draws `n_samples` configurations: choose a center uniformly among the
  // points, then per dimension draw a truncated Gaussian around the center
  // (rejection with a clip fallback after 100 tries) or resample the category
  // with probability b. Inactive dimensions are drawn uniformly.
  std::vector<UnitConfig> sample(std::size_t n_samples, RandomStream& rng) const {
    std::vector<UnitConfig> out(n_samples);
    for (auto& u : out) {
      u.coords.resize(dims_);
      const std::size_t g = group_for(rng.uniform_int(n_));
      for (std::size_t d = 0; d < dims_; ++d) {
        const bool categorical = category_counts_[d] > 0;
        if (!active_mask_[d]) {
          u.coords[d] = categorical
                            ? static_cast<double>(rng.uniform_int(category_counts_[d]))
                            : rng.uniform();
          continue;
        }
        const double center = centers_[g * dims_ + d];
        if (categorical) {
          const std::size_t k = category_counts_[d];
          if (rng.uniform() < 1.0 - bw_[d]) {
            u.coords[d] = center;
          } else {
            const auto j = rng.uniform_int(k - 1);
            u.coords[d] = static_cast<double>(j >= static_cast<std::uint64_t>(center) ? j + 1 : j);
          }
        } else {
          double x = center + bw_[d] * rng.normal();
          for (int attempt = 1; attempt < 100 && !(x >= 0.0 && x <= 1.0); ++attempt) {
            x = center + bw_[d] * rng.normal();
          }
          u.coords[d] = std::clamp(x, 0.0, 1.0);
        }
      }
    }
    return out;
  }

  // Same points and bandwidths, restricted to `dims`. An empty set gives the
  // constant density 1 over the unit cube.
  Kde reduced(std::vector<std::size_t> dims) const {
    std::sort(dims.begin(), dims.end());
    dims.erase(std::unique(dims.begin(), dims.end()), dims.end());
    for (const std::size_t d : dims) {
      if (d >= dims_) throw std::invalid_argument("reduced dimension index out of range");
    }
    Kde out(*this);
    out.active_ = std::move(dims);
    out.active_mask_.assign(dims_, 0);
    for (const std::size_t d : out.active_) out.active_mask_[d] = 1;
    return out;
  }

  bool same_layout(const Kde& other) const {
    return dims_ == other.dims_ && category_counts_ == other.category_counts_ &&
           active_ == other.active_;
  }

  static std::vector<double> select_bandwidths(const SearchSpace& space,
                                               const std::vector<UnitConfig>& points,
                                               BandwidthRule rule) {
    if (points.empty()) throw std::invalid_argument("bandwidth selection needs >= 1 point");
    if (!(rule.b_min > 0.0 && rule.b_min <= rule.b_max))
      throw std::invalid_argument("bandwidth clamps must satisfy 0 < b_min <= b_max");
    const std::size_t n = points.size();
    const std::size_t dim_count = space.size();
    const double shrink =
        std::pow(static_cast<double>(n), -1.0 / (static_cast<double>(dim_count) + 4.0));
    std::vector<double> bw(dim_count);
    for (std::size_t d = 0; d < dim_count; ++d) {
      const ParamDomain& p = space.param(d);
      if (p.is_numerical()) {
        double sigma = 1.0;
        if (n >= 2) {
          double mean = 0.0;
          for (const auto& u : points) mean += u.coords[d];
          mean /= static_cast<double>(n);
          double ss = 0.0;
          for (const auto& u : points) {
            const double diff = u.coords[d] - mean;
            ss += diff * diff;
          }
          sigma = std::sqrt(ss / static_cast<double>(n - 1));
        }
        bw[d] = std::clamp(1.06 * sigma * shrink, rule.b_min, rule.b_max);
      } else {
        const double k = static_cast<double>(p.category_count());
        bw[d] = (k - 1.0) / k * std::min(1.0, shrink);
      }
    }
    return bw;
  }

 private:
  void build_groups(const std::vector<UnitConfig>& points) {
    // Collapse duplicate points into weighted groups; pure bookkeeping, the
    // density and sampling distributions are unchanged.
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return points[a].coords < points[b].coords;
    });
    for (std::size_t i = 0; i < order.size();) {
      std::size_t j = i;
      while (j < order.size() && points[order[j]].coords == points[order[i]].coords) ++j;
      for (std::size_t d = 0; d < dims_; ++d) centers_.push_back(points[order[i]].coords[d]);
      counts_.push_back(static_cast<double>(j - i));
      i = j;
    }
    count_prefix_.resize(counts_.size());
    std::size_t running = 0;
    for (std::size_t g = 0; g < counts_.size(); ++g) {
      running += static_cast<std::size_t>(counts_[g]);
      count_prefix_[g] = running;
    }
  }

  void precompute() {
    constexpr double sqrt_two = 1.4142135623730950488;
    constexpr double sqrt_two_pi = 2.5066282746310005024;
    auto phi = [](double z) { return 0.5 * std::erfc(-z / sqrt_two); };
    coef_.assign(centers_.size(), 0.0);
    inv_bw_.assign(dims_, 0.0);
    for (std::size_t d = 0; d < dims_; ++d) {
      if (category_counts_[d] > 0) continue;
      inv_bw_[d] = 1.0 / bw_[d];
      for (std::size_t g = 0; g < counts_.size(); ++g) {
        const double c = centers_[g * dims_ + d];
        const double mass = phi((1.0 - c) * inv_bw_[d]) - phi((0.0 - c) * inv_bw_[d]);
        coef_[g * dims_ + d] = 1.0 / (bw_[d] * sqrt_two_pi * mass);
      }
    }
  }

  double dim_kernel(std::size_t g, std::size_t d, double x) const {
    if (category_counts_[d] > 0) {
      const double k = static_cast<double>(category_counts_[d]);
      return x == centers_[g * dims_ + d] ? 1.0 - bw_[d] : bw_[d] / (k - 1.0);
    }
    const double z = (x - centers_[g * dims_ + d]) * inv_bw_[d];
    return coef_[g * dims_ + d] * std::exp(-0.5 * z * z);
  }

  double group_kernel(std::size_t g, const UnitConfig& u) const {
    double prod = 1.0;
    for (const std::size_t d : active_) prod *= dim_kernel(g, d, u.coords[d]);
    return prod;
  }

  std::size_t group_for(std::uint64_t point_index) const {
    const auto it = std::upper_bound(count_prefix_.begin(), count_prefix_.end(),
                                     static_cast<std::size_t>(point_index));
    return static_cast<std::size_t>(it - count_prefix_.begin());
  }

  std::size_t n_ = 0;
  std::size_t dims_ = 0;
  std::vector<double> bw_;
  std::vector<std::size_t> category_counts_;  // 0 for numerical dimensions
  std::vector<std::size_t> active_;
  std::vector<char> active_mask_;
  std::vector<double> centers_;       // group-major, dims_ per group
  std::vector<double> counts_;        // multiplicity per group
  std::vector<std::size_t> count_prefix_;
  std::vector<double> coef_;          // per (group, numerical dim) normalization
  std::vector<double> inv_bw_;
};

}  // namespace metatpe
