#pragma once

#include "pgspec/rng.hpp"

namespace pgspec {

// Tilting parameter d >= 0 of PG(1, d). Callers pass |x_i^T beta|.
class Tilt {
 public:
  explicit Tilt(double d);
  double value() const { return d_; }

 private:
  double d_;
};

struct SeriesConfig {
  double abs_tol = 1e-12;
  int max_terms = 200;

  void validate() const;
};

// Below this point g is evaluated with the small-z series
// sum (-1)^k (2k+1)/sqrt(2 pi z^3) exp(-(2k+1)^2/(8z)); above it with the
// dual theta series sum (-1)^k 2 pi (2k+1) exp(-pi^2 (2k+1)^2 z / 2).
inline constexpr double kSeriesSwitch = 0.40528473456935108578;  // 4 / pi^2

// Density of PG(1, 0). Absolute error <= cfg.abs_tol.
double g_density(double z, const SeriesConfig& cfg = {});
double g_log_density(double z, const SeriesConfig& cfg = {});

// Evaluate g with an explicitly chosen representation, for cross-validation.
enum class SeriesForm { kSmallZ, kDual };
double g_density_with(SeriesForm form, double z, const SeriesConfig& cfg = {});

// cosh(d/2) exp(-d^2 z / 2) g(z).
double pg_density(double z, Tilt tilt, const SeriesConfig& cfg = {});
double pg_log_density(double z, Tilt tilt, const SeriesConfig& cfg = {});

// Exact draw from PG(1, d) by Devroye-style alternating-series accept-reject
// (Polson, Scott & Windle 2013), with the crossover at 0.64 on the J*(1, d/2)
// scale, i.e. z = 0.16 on the PG scale.
double pg_sample(Tilt tilt, Rng& rng);

// E[PG(1, d)] by adaptive quadrature of z * pg_density(z, d), rel. tol 1e-8.
double pg_mean_oracle(Tilt tilt);

// E[PG(1, d)] from the termwise-integrated dual series,
// cosh(d/2) sum_k (-1)^k 2 pi (2k+1) / (lambda_k + d^2/2)^2.
double pg_mean_series(Tilt tilt);

// P(Z <= z) by adaptive quadrature of pg_density; 0 at z = 0.
double pg_cdf(double z, Tilt tilt);

}  // namespace pgspec
