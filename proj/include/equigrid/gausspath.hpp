#pragma once

// Finite-dimensional Gaussian machinery on a grid: covariance assembly,
// one-time factorization, unconditional path sampling and conditioning on a
// single coordinate by a rank-one correction of an unconditional draw.

#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "equigrid/grids.hpp"
#include "equigrid/random.hpp"
#include "equigrid/stochastic.hpp"

namespace equigrid {

class PathDistribution {
 public:
  /// Jitter levels tried in order when the covariance does not factor.
  static constexpr double kJitterLadder[] = {0.0, 1e-12, 1e-10, 1e-8};

  /// Covariance of the process (its Gaussian part for BM with jumps) on the
  /// grid, factored once. Brownian kernels use independent increments and an
  /// exact closed-form factor.
  static PathDistribution assemble(const Grid& grid, const ProcessSpec& process) {
    if (grid.points.empty()) throw std::invalid_argument("assemble: empty grid");
    for (std::size_t i = 0; i < grid.size(); ++i) {
      require_time(grid[i], "assemble");
      if (i > 0 && !(grid[i] - grid[i - 1] >= kMinGridSpacing))
        throw std::runtime_error("assemble: grid points must be strictly increasing and at least 1e-15 apart");
    }
    PathDistribution d;
    d.times_ = grid.points;
    const auto n = static_cast<Eigen::Index>(grid.size());
    d.mean_ = Eigen::VectorXd::Zero(n);
    d.cov_.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j <= i; ++j) d.cov_(i, j) = d.cov_(j, i) = process.covariance(d.times_[i], d.times_[j]);

    const bool brownian = process.kind() == ProcessKind::BM || process.kind() == ProcessKind::BMJumps;
    if (brownian) {
      d.increments_ = true;
      d.step_sd_.resize(d.times_.size());
      double prev = 0.0;
      for (std::size_t i = 0; i < d.times_.size(); ++i) {
        d.step_sd_[i] = std::sqrt(d.times_[i] - prev);
        prev = d.times_[i];
      }
      d.factor_ = Eigen::MatrixXd::Zero(n, n);
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j <= i; ++j) d.factor_(i, j) = d.step_sd_[static_cast<std::size_t>(j)];
      return d;
    }

    for (double jitter : kJitterLadder) {
      Eigen::MatrixXd m = d.cov_;
      m.diagonal().array() += jitter;
      Eigen::LLT<Eigen::MatrixXd> llt(m);
      if (llt.info() == Eigen::Success) {
        d.factor_ = llt.matrixL();
        d.jitter_ = jitter;
        return d;
      }
    }
    throw std::runtime_error("assemble: covariance not positive definite even with jitter 1e-8 (n=" +
                             std::to_string(n) + "); grid points too close?");
  }

  std::size_t size() const noexcept { return times_.size(); }
  const std::vector<double>& times() const noexcept { return times_; }
  const Eigen::VectorXd& mean() const noexcept { return mean_; }
  const Eigen::MatrixXd& covariance() const noexcept { return cov_; }
  const Eigen::MatrixXd& factor() const noexcept { return factor_; }
  double jitter_used() const noexcept { return jitter_; }
  bool uses_increments() const noexcept { return increments_; }

  /// Zero-mean draw into `out` (size n). `z` is scratch of size n.
  void sample_centered(SeededRng& rng, std::span<double> out, std::span<double> z) const {
    const std::size_t n = times_.size();
    if (increments_) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += step_sd_[i] * rng.normal();
        out[i] = acc;
      }
      return;
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = rng.normal();
    Eigen::Map<const Eigen::VectorXd> zv(z.data(), static_cast<Eigen::Index>(n));
    Eigen::Map<Eigen::VectorXd> ov(out.data(), static_cast<Eigen::Index>(n));
    ov.noalias() = factor_.triangularView<Eigen::Lower>() * zv;
  }

  /// mean + factor * (iid standard normals).
  Eigen::VectorXd sample_path(SeededRng& rng) const {
    const std::size_t n = times_.size();
    Eigen::VectorXd out(static_cast<Eigen::Index>(n));
    std::vector<double> z(n);
    sample_centered(rng, std::span<double>(out.data(), n), z);
    return out + mean_;
  }

 private:
  PathDistribution() = default;

  std::vector<double> times_;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  Eigen::MatrixXd factor_;
  std::vector<double> step_sd_;
  double jitter_ = 0.0;
  bool increments_ = false;
};

/// Samples the path conditioned on one coordinate: draw Z unconditionally,
/// then return Z + g (x - Z_k) with gain g = Sigma_{.k} / Sigma_kk. Linear in
/// n per draw once the unconditional draw is available.
class ConditionalSampler {
 public:
  ConditionalSampler(std::shared_ptr<const PathDistribution> base, std::size_t index)
      : base_(std::move(base)), index_(index) {
    if (!base_) throw std::invalid_argument("ConditionalSampler: null distribution");
    if (index_ >= base_->size()) throw std::out_of_range("ConditionalSampler: index out of range");
    const auto k = static_cast<Eigen::Index>(index_);
    const double var = base_->covariance()(k, k);
    if (!(var > 0.0)) throw std::domain_error("ConditionalSampler: conditioned variance must be positive");
    gain_.resize(base_->size());
    for (std::size_t i = 0; i < gain_.size(); ++i)
      gain_[i] = base_->covariance()(static_cast<Eigen::Index>(i), k) / var;
    gain_[index_] = 1.0;
  }

  const PathDistribution& base() const noexcept { return *base_; }
  std::shared_ptr<const PathDistribution> shared_base() const noexcept { return base_; }
  std::size_t conditioned_index() const noexcept { return index_; }
  std::span<const double> gain() const noexcept { return gain_; }

  /// Fills `out` with a path whose coordinate `index` equals `pinned`
  /// exactly, under the mean vector `mean` (empty span = zero mean).
  void sample_into(SeededRng& rng, double pinned, std::span<const double> mean, std::span<double> out,
                   std::span<double> scratch) const {
    base_->sample_centered(rng, out, scratch);
    const double mk = mean.empty() ? 0.0 : mean[index_];
    const double shift = (pinned - mk) - out[index_];
    const std::size_t n = gain_.size();
    for (std::size_t i = 0; i < n; ++i) out[i] += gain_[i] * shift + (mean.empty() ? 0.0 : mean[i]);
    out[index_] = pinned;
  }

  Eigen::VectorXd sample_conditional(SeededRng& rng, double pinned) const {
    const std::size_t n = gain_.size();
    Eigen::VectorXd out(static_cast<Eigen::Index>(n));
    std::vector<double> scratch(n);
    const Eigen::VectorXd& m = base_->mean();
    sample_into(rng, pinned, std::span<const double>(m.data(), n), std::span<double>(out.data(), n), scratch);
    return out;
  }

 private:
  std::shared_ptr<const PathDistribution> base_;
  std::size_t index_;
  std::vector<double> gain_;
};

}  // namespace equigrid
