#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include <Eigen/Dense>

namespace pgspec {

// Welford accumulator with Chan et al.'s pairwise merge.
class RunningStats {
 public:
  void add(double x) {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
    if (x > max_) max_ = x;
  }

  void merge(const RunningStats& other) {
    if (other.n_ == 0) return;
    if (n_ == 0) {
      *this = other;
      return;
    }
    const double na = static_cast<double>(n_);
    const double nb = static_cast<double>(other.n_);
    const double delta = other.mean_ - mean_;
    const double total = na + nb;
    mean_ += delta * nb / total;
    m2_ += other.m2_ + delta * delta * na * nb / total;
    n_ += other.n_;
    if (other.max_ > max_) max_ = other.max_;
  }

  std::uint64_t count() const { return n_; }
  double mean() const { return mean_; }
  double max() const { return max_; }

  // Sample variance (1/(n-1)); NaN below two observations.
  double variance() const {
    if (n_ < 2) return std::numeric_limits<double>::quiet_NaN();
    return m2_ / static_cast<double>(n_ - 1);
  }

  double standard_error() const { return std::sqrt(variance() / static_cast<double>(n_)); }

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
  double max_ = -std::numeric_limits<double>::infinity();
};

class RunningCovariance {
 public:
  explicit RunningCovariance(Eigen::Index dim)
      : mean_(Eigen::VectorXd::Zero(dim)), m2_(Eigen::MatrixXd::Zero(dim, dim)) {}

  void add(const Eigen::VectorXd& x) {
    ++n_;
    const Eigen::VectorXd delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_.noalias() += delta * (x - mean_).transpose();
  }

  void merge(const RunningCovariance& other) {
    if (other.n_ == 0) return;
    if (n_ == 0) {
      *this = other;
      return;
    }
    const double na = static_cast<double>(n_);
    const double nb = static_cast<double>(other.n_);
    const Eigen::VectorXd delta = other.mean_ - mean_;
    mean_ += delta * (nb / (na + nb));
    m2_ += other.m2_ + delta * delta.transpose() * (na * nb / (na + nb));
    n_ += other.n_;
  }

  std::uint64_t count() const { return n_; }
  const Eigen::VectorXd& mean() const { return mean_; }

  // 1/(n-1) normalizer; all zeros with fewer than two observations.
  Eigen::MatrixXd covariance() const {
    if (n_ < 2) return Eigen::MatrixXd::Zero(m2_.rows(), m2_.cols());
    Eigen::MatrixXd cov = m2_ / static_cast<double>(n_ - 1);
    return 0.5 * (cov + cov.transpose());
  }

 private:
  std::uint64_t n_ = 0;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd m2_;
};

}  // namespace pgspec
