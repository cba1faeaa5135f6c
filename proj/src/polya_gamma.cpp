#include "pgspec/polya_gamma.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "pgspec/errors.hpp"

namespace pgspec {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kLog2Pi = 1.83787706640934548356;
// Proposal crossover on the J*(1, z) scale.
constexpr double kTrunc = 0.64;
constexpr double kTruncRecip = 1.0 / kTrunc;
constexpr long kMaxProposals = 1'000'000;
constexpr int kMaxInnerTerms = 10'000;

void check_z(double z, const char* where) {
  if (!(z > 0.0) || !std::isfinite(z)) {
    std::ostringstream os;
    os << where << ": z must be positive and finite, got " << z;
    fail(ErrorCode::kDomain, os.str());
  }
}

double log_cosh(double x) {
  x = std::abs(x);
  return x + std::log1p(std::exp(-2.0 * x)) - std::numbers::ln2;
}

struct SeriesValue {
  double log_lead;  // log of the k = 0 term
  double ratio_sum;  // sum_k (-1)^k t_k / t_0
};

// Both representations share the form t_0 * sum (-1)^k (2k+1) exp(-c k (k+1)).
SeriesValue alternating_series(SeriesForm form, double z, const SeriesConfig& cfg) {
  double log_lead = 0.0;
  double c = 0.0;
  if (form == SeriesForm::kSmallZ) {
    log_lead = -0.5 * kLog2Pi - 1.5 * std::log(z) - 1.0 / (8.0 * z);
    c = 1.0 / (2.0 * z);
  } else {
    log_lead = kLog2Pi - 0.5 * kPi * kPi * z;
    c = 2.0 * kPi * kPi * z;
  }
  const double lead = std::exp(log_lead);
  double sum = 1.0;
  for (int k = 1; k < cfg.max_terms; ++k) {
    const double kk = static_cast<double>(k);
    const double ratio = (2.0 * kk + 1.0) * std::exp(-c * kk * (kk + 1.0));
    // Terms below 1e-17 of the leading term cannot change a double.
    if (ratio * lead < cfg.abs_tol || ratio < 1e-17) {
      return {log_lead, sum};
    }
    sum += (k % 2 == 1) ? -ratio : ratio;
  }
  std::ostringstream os;
  os << "g series at z=" << z << " did not reach abs_tol=" << cfg.abs_tol << " within "
     << cfg.max_terms << " terms";
  fail(ErrorCode::kTruncation, os.str());
}

SeriesForm form_for(double z) { return z < kSeriesSwitch ? SeriesForm::kSmallZ : SeriesForm::kDual; }

// log Phi(x), accurate far into the lower tail.
double log_norm_cdf(double x) {
  if (x > -35.0) return std::log(0.5 * std::erfc(-x / std::numbers::sqrt2));
  const double x2 = x * x;
  const double inv = 1.0 / x2;
  const double series = 1.0 - inv * (1.0 - 3.0 * inv * (1.0 - 5.0 * inv * (1.0 - 7.0 * inv)));
  return -0.5 * x2 - std::log(-x) - 0.5 * kLog2Pi + std::log(series);
}

// n-th term of the J*(1, 0) density series; piecewise representation.
double jstar_term(int n, double x) {
  const double k = (n + 0.5) * kPi;
  if (x > kTrunc) return k * std::exp(-0.5 * k * k * x);
  const double expnt = -1.5 * (std::log(0.5 * kPi) + std::log(x)) + std::log(k) -
                       2.0 * (n + 0.5) * (n + 0.5) / x;
  return std::exp(expnt);
}

// Probability of choosing the truncated-exponential proposal (x > kTrunc).
double texpon_mass(double z) {
  const double fz = 0.125 * kPi * kPi + 0.5 * z * z;
  const double root = std::sqrt(1.0 / kTrunc);
  const double b = root * (kTrunc * z - 1.0);
  const double a = -root * (kTrunc * z + 1.0);
  const double x0 = std::log(fz) + fz * kTrunc;
  const double xb = x0 - z + log_norm_cdf(b);
  const double xa = x0 + z + log_norm_cdf(a);
  const double q_over_p = 4.0 / kPi * (std::exp(xb) + std::exp(xa));
  return 1.0 / (1.0 + q_over_p);
}

[[noreturn]] void sampler_guard(const char* where, double z) {
  std::ostringstream os;
  os << "PG sampler guard tripped in " << where << " (z=" << z << "); this is a bug";
  fail(ErrorCode::kInternal, os.str());
}

// Inverse-Gaussian(1/z, 1) truncated to (0, kTrunc).
double truncated_inverse_gaussian(double z, Rng& rng) {
  double x = kTrunc + 1.0;
  if (z < kTruncRecip) {
    // Mean above the truncation point: propose from the z = 0 law, then
    // accept with exp(-z^2 x / 2).
    for (long it = 0; it < kMaxProposals; ++it) {
      double e1 = rng.exponential();
      double e2 = rng.exponential();
      long inner = 0;
      while (e1 * e1 > 2.0 * e2 / kTrunc) {
        if (++inner > kMaxProposals) sampler_guard("truncated_inverse_gaussian", z);
        e1 = rng.exponential();
        e2 = rng.exponential();
      }
      x = 1.0 + e1 * kTrunc;
      x = kTrunc / (x * x);
      if (rng.uniform() <= std::exp(-0.5 * z * z * x)) return x;
    }
    sampler_guard("truncated_inverse_gaussian", z);
  }
  const double mu = 1.0 / z;
  for (long it = 0; it < kMaxProposals; ++it) {
    double y = rng.normal();
    y *= y;
    const double half_mu = 0.5 * mu;
    const double mu_y = mu * y;
    x = mu + half_mu * mu_y - half_mu * std::sqrt(4.0 * mu_y + mu_y * mu_y);
    if (rng.uniform() > mu / (mu + x)) x = mu * mu / x;
    if (x < kTrunc) return x;
  }
  sampler_guard("truncated_inverse_gaussian", z);
}

}  // namespace

Tilt::Tilt(double d) : d_(d) {
  if (!(d >= 0.0) || !std::isfinite(d)) {
    std::ostringstream os;
    os << "tilt must be finite and nonnegative, got " << d;
    fail(ErrorCode::kDomain, os.str());
  }
}

void SeriesConfig::validate() const {
  if (!(abs_tol > 0.0)) fail(ErrorCode::kInvalidArgument, "SeriesConfig.abs_tol must be > 0");
  if (max_terms < 2) fail(ErrorCode::kInvalidArgument, "SeriesConfig.max_terms must be >= 2");
}

double g_density_with(SeriesForm form, double z, const SeriesConfig& cfg) {
  check_z(z, "g_density");
  cfg.validate();
  const SeriesValue s = alternating_series(form, z, cfg);
  return std::exp(s.log_lead) * s.ratio_sum;
}

double g_density(double z, const SeriesConfig& cfg) {
  check_z(z, "g_density");
  return g_density_with(form_for(z), z, cfg);
}

double g_log_density(double z, const SeriesConfig& cfg) {
  check_z(z, "g_log_density");
  cfg.validate();
  const SeriesValue s = alternating_series(form_for(z), z, cfg);
  return s.log_lead + std::log(s.ratio_sum);
}

double pg_log_density(double z, Tilt tilt, const SeriesConfig& cfg) {
  const double d = tilt.value();
  return log_cosh(0.5 * d) - 0.5 * d * d * z + g_log_density(z, cfg);
}

double pg_density(double z, Tilt tilt, const SeriesConfig& cfg) {
  if (tilt.value() == 0.0) return g_density(z, cfg);
  return std::exp(pg_log_density(z, tilt, cfg));
}

double pg_sample(Tilt tilt, Rng& rng) {
  // Work with J*(1, z), z = d/2; PG(1, d) = J*(1, d/2) / 4.
  const double z = 0.5 * tilt.value();
  const double fz = 0.125 * kPi * kPi + 0.5 * z * z;
  const double mass = texpon_mass(z);

  for (long it = 0; it < kMaxProposals; ++it) {
    const double x = (rng.uniform() < mass) ? kTrunc + rng.exponential() / fz
                                            : truncated_inverse_gaussian(z, rng);
    double s = jstar_term(0, x);
    const double y = rng.uniform() * s;
    for (int n = 1; n < kMaxInnerTerms; ++n) {
      if (n % 2 == 1) {
        s -= jstar_term(n, x);
        if (y <= s) return 0.25 * x;
      } else {
        s += jstar_term(n, x);
        if (y > s) break;
      }
    }
  }
  sampler_guard("pg_sample", z);
}

double pg_mean_oracle(Tilt tilt) {
  using boost::math::quadrature::gauss_kronrod;
  const auto integrand = [tilt](double z) { return z > 0.0 ? z * pg_density(z, tilt) : 0.0; };
  double err_lo = 0.0;
  double err_hi = 0.0;
  const double lo = gauss_kronrod<double, 61>::integrate(integrand, 0.0, 1.0, 15, 1e-10, &err_lo);
  const double hi = gauss_kronrod<double, 61>::integrate(
      integrand, 1.0, std::numeric_limits<double>::infinity(), 15, 1e-10, &err_hi);
  const double value = lo + hi;
  if (!std::isfinite(value) || err_lo + err_hi > 1e-8 * value) {
    std::ostringstream os;
    os << "pg_mean_oracle: quadrature did not converge for d=" << tilt.value()
       << " (error estimate " << err_lo + err_hi << ")";
    fail(ErrorCode::kNumerical, os.str());
  }
  return value;
}

double pg_mean_series(Tilt tilt) {
  const double d = tilt.value();
  const double half_d2 = 0.5 * d * d;
  constexpr int kTerms = 200'000;
  double prev = 0.0;
  double sum = 0.0;
  for (int k = 0; k < kTerms; ++k) {
    const double m = 2.0 * k + 1.0;
    const double rate = 0.5 * kPi * kPi * m * m + half_d2;
    const double term = 2.0 * kPi * m / (rate * rate);
    prev = sum;
    sum += (k % 2 == 0) ? term : -term;
  }
  // Mean of the last two partial sums cancels the leading alternating error.
  return std::cosh(0.5 * d) * 0.5 * (sum + prev);
}

double pg_cdf(double z, Tilt tilt) {
  if (z == 0.0) return 0.0;
  check_z(z, "pg_cdf");
  using boost::math::quadrature::gauss_kronrod;
  const auto f = [tilt](double u) { return u > 0.0 ? pg_density(u, tilt) : 0.0; };
  double err = 0.0;
  return gauss_kronrod<double, 61>::integrate(f, 0.0, z, 15, 1e-12, &err);
}

}  // namespace pgspec
