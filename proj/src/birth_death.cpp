#include "pgspec/birth_death.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "pgspec/errors.hpp"

namespace pgspec {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(1 + e^t)
double softplus(double t) {
  if (t == kNegInf) return 0.0;
  return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

double log_add(double x, double y) {
  if (x == kNegInf) return y;
  if (y == kNegInf) return x;
  const double hi = std::max(x, y);
  return hi + std::log1p(std::exp(std::min(x, y) - hi));
}

// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Probability that Y stays at x given X = x.
double stay_given_x(const BirthDeathSpec& spec, std::uint64_t x) {
  return 1.0 / (1.0 + std::exp(spec.log_b(static_cast<double>(x) - 1.0) - spec.log_a(static_cast<double>(x))));
}

// Probability that Y drops to x - 1 given X = x.
double drop_given_x(const BirthDeathSpec& spec, std::uint64_t x) {
  return 1.0 / (1.0 + std::exp(spec.log_a(static_cast<double>(x)) - spec.log_b(static_cast<double>(x) - 1.0)));
}

// Probability that X stays at y given Y = y.
double stay_given_y(const BirthDeathSpec& spec, std::uint64_t y) {
  return 1.0 / (1.0 + std::exp(spec.log_b(static_cast<double>(y)) - spec.log_a(static_cast<double>(y))));
}

// Probability that X moves to y + 1 given Y = y.
double move_given_y(const BirthDeathSpec& spec, std::uint64_t y) {
  return 1.0 / (1.0 + std::exp(spec.log_a(static_cast<double>(y)) - spec.log_b(static_cast<double>(y))));
}

}  // namespace

BirthDeathSpec::BirthDeathSpec(LogSequence log_a_raw, LogSequence log_b_raw, TailBound tail_bound)
    : log_a_raw_(std::move(log_a_raw)), log_b_raw_(std::move(log_b_raw)), tail_bound_(std::move(tail_bound)) {
  if (!log_a_raw_ || !log_b_raw_) fail(ErrorCode::kInvalidArgument, "BirthDeathSpec: sequences required");
  // Normalizer: stop once both terms are below 1e-300 of the running sum for
  // several consecutive x (the intended sequences decay at least geometrically).
  double log_sum = kNegInf;
  int negligible_run = 0;
  constexpr std::uint64_t kMaxTerms = 10'000'000;
  std::uint64_t x = 1;
  for (; x <= kMaxTerms && negligible_run < 8; ++x) {
    const double la = log_a_raw_(static_cast<double>(x));
    const double lb = log_b_raw_(static_cast<double>(x));
    if (!(std::isfinite(la) && std::isfinite(lb))) {
      std::ostringstream os;
      os << "BirthDeathSpec: a_x and b_x must be strictly positive and finite (x=" << x << ")";
      fail(ErrorCode::kInvalidArgument, os.str());
    }
    const double term = log_add(la, lb);
    negligible_run = (log_sum != kNegInf && term - log_sum < std::log(1e-300)) ? negligible_run + 1 : 0;
    log_sum = log_add(log_sum, term);
  }
  if (negligible_run < 8) fail(ErrorCode::kInvalidArgument, "BirthDeathSpec: normalizing series does not converge");
  log_c_ = log_sum;
}

double BirthDeathSpec::log_b(double x) const {
  if (x < 0.5) return kNegInf;
  return log_b_raw_(x) - log_c_;
}

double BirthDeathSpec::a(double x) const { return std::exp(log_a(x)); }
double BirthDeathSpec::b(double x) const { return std::exp(log_b(x)); }

double BirthDeathSpec::log_pi_x(std::uint64_t x) const {
  return log_add(log_a(static_cast<double>(x)), log_b(static_cast<double>(x) - 1.0));
}

double BirthDeathSpec::log_pi_y(std::uint64_t y) const {
  return log_add(log_a(static_cast<double>(y)), log_b(static_cast<double>(y)));
}

BirthDeathSpec power_sequences() {
  auto log_a = [](double x) { return -(4.0 * x - 2.0) * std::log(2.0 * x - 1.0); };
  auto log_b = [](double x) { return -4.0 * x * std::log(2.0 * x); };
  // sum_{x > M} r_x <= (1/2) sum_{j >= M} 1/j^2 <= 1 / (2 (M - 1)) for M >= 2.
  auto tail = [](std::uint64_t M) {
    if (M < 2) return std::numbers::pi * std::numbers::pi / 12.0;
    return 0.5 / static_cast<double>(M - 1);
  };
  return BirthDeathSpec(log_a, log_b, tail);
}

Moves pqr(const BirthDeathSpec& spec, std::uint64_t x) {
  if (x < 1) fail(ErrorCode::kInvalidArgument, "pqr: x must be >= 1");
  const double xd = static_cast<double>(x);
  const double la = spec.log_a(xd);
  const double lb = spec.log_b(xd);
  const double lb_prev = spec.log_b(xd - 1.0);
  // p_x = a_x b_x / ((a_x + b_{x-1})(a_x + b_x))
  const double p = std::exp(-softplus(lb_prev - la) - softplus(la - lb));
  if (x == 1) return {p, 0.0, 1.0 - p};
  // q_x = a_{x-1} b_{x-1} / ((a_x + b_{x-1})(a_{x-1} + b_{x-1}))
  const double la_prev = spec.log_a(xd - 1.0);
  const double q = std::exp(-softplus(la - lb_prev) - softplus(lb_prev - la_prev));
  return {p, q, 1.0 - p - q};
}

double r_two_fraction(const BirthDeathSpec& spec, double x) {
  const double la = spec.log_a(x);
  const double lb = spec.log_b(x);
  const double la_prev = spec.log_a(x - 1.0);
  const double lb_prev = spec.log_b(x - 1.0);
  return std::exp(-softplus(lb_prev - la) - softplus(lb - la)) +
         std::exp(-softplus(la - lb_prev) - softplus(la_prev - lb_prev));
}

double kernel_from_conditionals(const BirthDeathSpec& spec, std::uint64_t x, std::uint64_t x_next) {
  if (x < 1 || x_next < 1) fail(ErrorCode::kInvalidArgument, "kernel_from_conditionals: states start at 1");
  double total = 0.0;
  // y = x, then X | Y = x is x or x + 1.
  const double stay = stay_given_x(spec, x);
  if (x_next == x) total += stay * stay_given_y(spec, x);
  if (x_next == x + 1) total += stay * move_given_y(spec, x);
  if (x >= 2) {
    // y = x - 1, then X | Y = x - 1 is x - 1 or x.
    const double drop = drop_given_x(spec, x);
    if (x_next == x - 1) total += drop * stay_given_y(spec, x - 1);
    if (x_next == x) total += drop * move_given_y(spec, x - 1);
  }
  return total;
}

double tail_sum_estimate(const BirthDeathSpec& spec, std::uint64_t M) {
  if (M < 2) fail(ErrorCode::kInvalidArgument, "tail_sum_estimate: M must be >= 2");
  const double m = static_cast<double>(M);
  const auto f = [&spec](double x) { return r_two_fraction(spec, x); };
  // int_M^T f(t) dt with t = 1/u; beyond T the smooth extension is no longer
  // evaluable in floating point and f(t) ~ c / t^2 is integrated in closed form.
  const double T = std::max(1e9, 16.0 * m);
  const auto integrand = [&f](double u) { return f(1.0 / u) / (u * u); };
  double err = 0.0;
  const double integral =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 1.0 / T, 1.0 / m, 15, 1e-15, &err) +
      f(T) * T;
  const double h = 0.25;
  const double d1 = (f(m - 2 * h) - 8 * f(m - h) + 8 * f(m + h) - f(m + 2 * h)) / (12 * h);
  // sum_{x=M+1}^inf f(x) = int_M^inf f - f(M)/2 - f'(M)/12 + f'''(M)/720 - ...
  return integral - 0.5 * f(m) - d1 / 12.0;
}

TraceSum trace_sum(const BirthDeathSpec& spec, double rel_tol) {
  if (!(rel_tol > 0.0)) fail(ErrorCode::kInvalidArgument, "trace_sum: rel_tol must be > 0");
  TraceSum out;
  const Moves first = pqr(spec, 1);
  CompensatedSum sum;
  sum.add(1.0 - first.p);

  constexpr std::uint64_t kFirstCheck = 1024;
  constexpr std::uint64_t kMaxTerms = std::uint64_t{1} << 24;
  std::uint64_t x = 2;
  double previous = std::numeric_limits<double>::quiet_NaN();
  for (std::uint64_t checkpoint = kFirstCheck; checkpoint <= kMaxTerms; checkpoint *= 2) {
    for (; x <= checkpoint; ++x) sum.add(r_two_fraction(spec, static_cast<double>(x)));
    const double partial = sum.value();
    out.partial_sum = partial;
    out.terms = checkpoint;
    const double tail = tail_sum_estimate(spec, checkpoint);
    const double estimate = partial + tail;
    out.tail_estimate = tail;
    out.value = estimate;
    out.tail_bound = spec.tail_bound() ? spec.tail_bound()(checkpoint) : std::numeric_limits<double>::infinity();
    if (std::isfinite(previous)) {
      out.error_estimate = std::abs(estimate - previous);
      if (out.error_estimate <= rel_tol * std::abs(estimate)) break;
    }
    previous = estimate;
  }
  out.is_trace_class = std::isfinite(out.tail_bound);
  if (!spec.tail_bound()) {
    out.warning = "no dominating tail bound for r_x; the tail is an estimate only and the trace-class property is not established";
  } else if (!(out.error_estimate <= rel_tol * std::abs(out.value))) {
    out.warning = "tail-corrected sum did not settle to rel_tol";
  }
  return out;
}

Eigen::VectorXd TruncatedKernel::pi() const {
  const double top = log_pi.maxCoeff();
  Eigen::VectorXd v = (log_pi.array() - top).exp();
  return v / v.sum();
}

TruncatedKernel build_truncated(const BirthDeathSpec& spec, std::uint64_t m) {
  if (m < 2) fail(ErrorCode::kInvalidArgument, "build_truncated: m must be >= 2");
  TruncatedKernel tk;
  tk.m = m;
  const auto size = static_cast<Eigen::Index>(m);
  tk.K = Eigen::MatrixXd::Zero(size, size);
  tk.log_pi.resize(size);
  for (std::uint64_t x = 1; x <= m; ++x) {
    const auto i = static_cast<Eigen::Index>(x - 1);
    const Moves mv = pqr(spec, x);
    tk.log_pi[i] = spec.log_pi_x(x);
    tk.K(i, i) = mv.r;
    if (x >= 2) tk.K(i, i - 1) = mv.q;
    if (x < m) {
      tk.K(i, i + 1) = mv.p;
    } else {
      tk.K(i, i) += mv.p;  // reflect the escaping mass
    }
  }
  return tk;
}

double reversibility_defect(const TruncatedKernel& tk) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i + 1 < tk.K.rows(); ++i) {
    const double up = tk.K(i, i + 1);
    const double down = tk.K(i + 1, i);
    if (up == 0.0 && down == 0.0) continue;
    const double lhs = tk.log_pi[i] + std::log(up);
    const double rhs = tk.log_pi[i + 1] + std::log(down);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

double Spectrum::s(unsigned l) const {
  double total = 0.0;
  for (double lambda : eigenvalues) {
    if (lambda > 0.0) total += std::pow(lambda, static_cast<double>(l));
  }
  return total;
}

double Spectrum::power_trace(unsigned l) const {
  double total = 0.0;
  for (double lambda : eigenvalues) total += std::pow(lambda, static_cast<double>(l));
  return total;
}

double Spectrum::u(unsigned l) const {
  const double s_l = s(l);
  if (!(s_l > 1.0)) return std::numeric_limits<double>::quiet_NaN();
  return std::pow(s_l - 1.0, 1.0 / static_cast<double>(l));
}

Spectrum exact_spectrum(const TruncatedKernel& tk) {
  const Eigen::Index m = tk.K.rows();
  Eigen::VectorXd diag = tk.K.diagonal();
  Eigen::VectorXd sub(m - 1);
  // D^{1/2} K D^{-1/2} is symmetric tridiagonal for a reversible K.
  for (Eigen::Index i = 0; i + 1 < m; ++i) {
    const double half = 0.5 * (tk.log_pi[i] - tk.log_pi[i + 1]);
    const double upper = std::exp(half) * tk.K(i, i + 1);
    const double lower = std::exp(-half) * tk.K(i + 1, i);
    if (std::abs(upper - lower) > 1e-10) {
      std::ostringstream os;
      os << "exact_spectrum: symmetrized kernel asymmetric at state " << (i + 1) << " (" << upper << " vs "
         << lower << "); kernel is not reversible";
      fail(ErrorCode::kNumerical, os.str());
    }
    sub[i] = std::sqrt(tk.K(i, i + 1) * tk.K(i + 1, i));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) fail(ErrorCode::kNumerical, "exact_spectrum: eigensolver failed");
  Spectrum spec;
  spec.eigenvalues.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + m);
  std::sort(spec.eigenvalues.begin(), spec.eigenvalues.end(), std::greater<>());
  spec.lambda_star = spec.eigenvalues.size() > 1 ? spec.eigenvalues[1] : 0.0;
  return spec;
}

double diagonal_power_sum(const BirthDeathSpec& spec, std::uint64_t m, unsigned l) {
  if (l < 1) fail(ErrorCode::kInvalidArgument, "diagonal_power_sum: l must be >= 1");
  // From x <= m the chain reaches at most m + l in l steps, so the reflecting
  // boundary at m + l + 1 is never felt.
  const TruncatedKernel tk = build_truncated(spec, m + l + 1);
  Eigen::MatrixXd power = tk.K;
  for (unsigned j = 1; j < l; ++j) power = power * tk.K;
  return power.diagonal().head(static_cast<Eigen::Index>(m)).sum();
}

DiscreteEstimate mc_estimate_s_l_discrete(const BirthDeathSpec& spec, std::uint64_t m, unsigned l,
                                          std::uint64_t N, std::span<const double> h_pmf, Rng& rng) {
  if (l < 1 || N < 1) fail(ErrorCode::kInvalidArgument, "mc_estimate_s_l_discrete: need l >= 1 and N >= 1");
  if (h_pmf.size() != m) fail(ErrorCode::kInvalidArgument, "mc_estimate_s_l_discrete: h_pmf must have m entries");
  std::vector<double> cumulative(m);
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (!(h_pmf[i] > 0.0) || !std::isfinite(h_pmf[i])) {
      std::ostringstream os;
      os << "mc_estimate_s_l_discrete: h_pmf must be strictly positive (state " << (i + 1) << ")";
      fail(ErrorCode::kDomain, os.str());
    }
    total += h_pmf[i];
    cumulative[i] = total;
  }

  double mean = 0.0;
  double m2 = 0.0;
  for (std::uint64_t n = 1; n <= N; ++n) {
    const double target = rng.uniform() * total;
    const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), target);
    const std::uint64_t x_star = std::min<std::uint64_t>(static_cast<std::uint64_t>(it - cumulative.begin()), m - 1) + 1;

    std::uint64_t y = (rng.uniform() < stay_given_x(spec, x_star)) ? x_star : x_star - 1;
    for (unsigned step = 1; step < l; ++step) {
      const std::uint64_t x = (rng.uniform() < stay_given_y(spec, y)) ? y : y + 1;
      y = (rng.uniform() < stay_given_x(spec, x)) ? x : x - 1;
    }
    double cond = 0.0;
    if (y == x_star) cond = stay_given_y(spec, y);
    if (y + 1 == x_star) cond = move_given_y(spec, y);
    const double term = cond * total / h_pmf[x_star - 1];

    const double delta = term - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (term - mean);
  }
  DiscreteEstimate est;
  est.N = N;
  est.s_hat = mean;
  est.se_defined = N >= 2;
  est.s_se = est.se_defined ? std::sqrt(m2 / static_cast<double>(N - 1) / static_cast<double>(N))
                            : std::numeric_limits<double>::quiet_NaN();
  return est;
}

}  // namespace pgspec
