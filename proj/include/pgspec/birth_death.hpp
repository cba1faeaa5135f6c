#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pgspec/rng.hpp"

namespace pgspec {

// Normalized sequences {a_x}, {b_x} (x >= 1, b_0 = 0) defining the Gibbs pair
// pi(x, x) = a_x, pi(x + 1, x) = b_x and its X-marginal birth-death chain.
// Sequences are held as logs of the unnormalized values, evaluated at real
// x so that smooth tail corrections can be applied.
class BirthDeathSpec {
 public:
  using LogSequence = std::function<double(double)>;
  // Upper bound on sum_{x > M} r_x; empty when no dominating bound is known.
  using TailBound = std::function<double(std::uint64_t)>;

  BirthDeathSpec(LogSequence log_a_raw, LogSequence log_b_raw, TailBound tail_bound = {});

  double log_a(double x) const { return log_a_raw_(x) - log_c_; }
  // -infinity at x = 0.
  double log_b(double x) const;
  double a(double x) const;
  double b(double x) const;
  // log of sum a' + sum b' over x >= 1.
  double log_normalizer() const { return log_c_; }
  // log pi_X(x) = log(a_x + b_{x-1}).
  double log_pi_x(std::uint64_t x) const;
  // log pi_Y(y) = log(a_y + b_y).
  double log_pi_y(std::uint64_t y) const;

  const TailBound& tail_bound() const { return tail_bound_; }

 private:
  LogSequence log_a_raw_;
  LogSequence log_b_raw_;
  TailBound tail_bound_;
  double log_c_ = 0.0;
};

// a'_x = (2x-1)^{-(4x-2)}, b'_x = (2x)^{-4x}, normalized; tail bound from
// r_x <= 1 / (2 (x-1)^2).
BirthDeathSpec power_sequences();

struct Moves {
  double p;  // up
  double q;  // down (0 at x = 1)
  double r;  // hold: 1 - p - q, or 1 - p_1 at x = 1
};

Moves pqr(const BirthDeathSpec& spec, std::uint64_t x);

// r_x from the cancellation-free two-fraction representation (x >= 2).
double r_two_fraction(const BirthDeathSpec& spec, double x);

// k(x, x') = sum_y pi_{X|Y}(x'|y) pi_{Y|X}(y|x), straight from the conditionals.
double kernel_from_conditionals(const BirthDeathSpec& spec, std::uint64_t x, std::uint64_t x_next);

struct TraceSum {
  double value = 0.0;          // 1 - p_1 + sum_{x>=2} r_x
  double partial_sum = 0.0;    // through x = terms + 1
  double tail_estimate = 0.0;  // Euler-Maclaurin estimate of the remainder
  double error_estimate = 0.0;
  double tail_bound = 0.0;     // dominating bound on the remainder, if known
  std::uint64_t terms = 0;
  bool is_trace_class = false;
  std::string warning;
};

// Sum_{x > M} r_x via Euler-Maclaurin on the smooth extension of r_x.
double tail_sum_estimate(const BirthDeathSpec& spec, std::uint64_t M);

TraceSum trace_sum(const BirthDeathSpec& spec, double rel_tol);

// Reflecting truncation on states 1..m (index x - 1).
struct TruncatedKernel {
  std::uint64_t m = 0;
  Eigen::MatrixXd K;
  Eigen::VectorXd log_pi;  // log pi_X(x), unnormalized over the truncation

  Eigen::VectorXd pi() const;
};

TruncatedKernel build_truncated(const BirthDeathSpec& spec, std::uint64_t m);

// Largest |log(pi_x K[x][x']) - log(pi_x' K[x'][x])| over nonzero pairs.
double reversibility_defect(const TruncatedKernel& tk);

struct Spectrum {
  std::vector<double> eigenvalues;  // descending
  double lambda_star = 0.0;

  // Sum of the positive eigenvalues' l-th powers.
  double s(unsigned l) const;
  // Sum over all eigenvalues, i.e. trace(K^l).
  double power_trace(unsigned l) const;
  // (s_l - 1)^{1/l}
  double u(unsigned l) const;
};

Spectrum exact_spectrum(const TruncatedKernel& tk);

// sum_{x <= m} k^{(l)}(x, x) for the untruncated chain.
double diagonal_power_sum(const BirthDeathSpec& spec, std::uint64_t m, unsigned l);

struct DiscreteEstimate {
  double s_hat = 0.0;
  double s_se = 0.0;
  bool se_defined = false;
  std::uint64_t N = 0;
};

// Discrete analog of the continuous estimator: x* ~ h, y ~ pi_{Y|X}(.|x*),
// l - 1 conjugate steps on y, average pi_{X|Y}(x*|y*) / h(x*).
// h_pmf[i] is the mass of state i + 1.
DiscreteEstimate mc_estimate_s_l_discrete(const BirthDeathSpec& spec, std::uint64_t m, unsigned l,
                                          std::uint64_t N, std::span<const double> h_pmf, Rng& rng);

}  // namespace pgspec
