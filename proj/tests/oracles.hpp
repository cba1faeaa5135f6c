#pragma once

// Reference computations for the tests. These deliberately avoid the library
// code paths they check: long-double brute-force series, direct quadrature,
// dense inverses, plain batch means.

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace oracle {

// g(z) = density of PG(1, 0) from 200 terms of the small-z series.
inline long double g_small_z(long double z) {
  const long double pi = std::numbers::pi_v<long double>;
  long double sum = 0.0L;
  for (int k = 0; k < 200; ++k) {
    const long double a = 2.0L * k + 1.0L;
    const long double term = a / std::sqrt(2.0L * pi * z * z * z) * std::exp(-a * a / (8.0L * z));
    sum += (k % 2 == 0) ? term : -term;
  }
  return sum;
}

// Same density from 200 terms of the theta (dual) series.
inline long double g_dual(long double z) {
  const long double pi = std::numbers::pi_v<long double>;
  long double sum = 0.0L;
  for (int k = 0; k < 200; ++k) {
    const long double a = 2.0L * k + 1.0L;
    const long double term = 2.0L * pi * a * std::exp(-pi * pi * a * a * z / 2.0L);
    sum += (k % 2 == 0) ? term : -term;
  }
  return sum;
}

// Brute-force g: each form where its terms do not cancel badly.
inline double g(double z) {
  return static_cast<double>(z < 0.5 ? g_small_z(z) : g_dual(z));
}

inline double pg(double z, double d) { return std::cosh(0.5 * d) * std::exp(-0.5 * d * d * z) * g(z); }

// Posterior of beta for a one-covariate logistic model with prior N(b, B):
// returns {E[beta | y], E[beta^2 | y]} by adaptive quadrature on a finite
// window wide enough that the remaining mass is negligible.
struct Moments1D {
  double mean;
  double second;
};

inline Moments1D logistic_posterior_1d(const std::vector<double>& x, const std::vector<int>& y, double b, double B,
                                       double lo = -60.0, double hi = 60.0) {
  using boost::math::quadrature::gauss_kronrod;
  auto log_post = [&](double beta) {
    double lp = -0.5 * (beta - b) * (beta - b) / B;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double eta = x[i] * beta;
      // log sigma(eta) if y = 1, log(1 - sigma(eta)) otherwise
      const double s = y[i] == 1 ? eta : -eta;
      lp += -std::log1p(std::exp(-s));
    }
    return lp;
  };
  auto f0 = [&](double t) { return std::exp(log_post(t)); };
  auto f1 = [&](double t) { return t * std::exp(log_post(t)); };
  auto f2 = [&](double t) { return t * t * std::exp(log_post(t)); };
  const double z0 = gauss_kronrod<double, 61>::integrate(f0, lo, hi, 15, 1e-13);
  const double z1 = gauss_kronrod<double, 61>::integrate(f1, lo, hi, 15, 1e-13);
  const double z2 = gauss_kronrod<double, 61>::integrate(f2, lo, hi, 15, 1e-13);
  return {z1 / z0, z2 / z0};
}

// Non-overlapping batch means standard error of the mean of a series.
inline double batch_means_se(const std::vector<double>& series, std::size_t batches = 50) {
  const std::size_t size = series.size() / batches;
  std::vector<double> means(batches, 0.0);
  for (std::size_t b = 0; b < batches; ++b) {
    for (std::size_t i = 0; i < size; ++i) means[b] += series[b * size + i];
    means[b] /= static_cast<double>(size);
  }
  double grand = 0.0;
  for (double m : means) grand += m;
  grand /= static_cast<double>(batches);
  double ss = 0.0;
  for (double m : means) ss += (m - grand) * (m - grand);
  const double var_batch = ss / static_cast<double>(batches - 1);
  return std::sqrt(var_batch / static_cast<double>(batches));
}

// Two-pass sample mean and variance.
inline std::pair<double, double> mean_var(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return {m, ss / static_cast<double>(v.size() - 1)};
}

// Dense-inverse form of the conditional normal of beta given w:
// Sigma = (X^T diag(w) X + B^{-1})^{-1}, mu = Sigma (X^T (y - 1/2) + B^{-1} b).
struct DenseCond {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

inline DenseCond dense_cond(const Eigen::MatrixXd& X, const Eigen::VectorXi& y, const Eigen::VectorXd& b,
                            const Eigen::MatrixXd& B, const Eigen::VectorXd& w) {
  const Eigen::MatrixXd Binv = B.inverse();
  const Eigen::MatrixXd prec = X.transpose() * w.asDiagonal() * X + Binv;
  const Eigen::MatrixXd cov = prec.inverse();
  const Eigen::VectorXd kappa = y.cast<double>().array() - 0.5;
  return {cov * (X.transpose() * kappa + Binv * b), cov};
}

}  // namespace oracle
