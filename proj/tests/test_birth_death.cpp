#include <doctest.h>

#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "pgspec/birth_death.hpp"
#include "pgspec/errors.hpp"

using namespace pgspec;

namespace {

// Direct long-double evaluation of the sequences and of p_x, q_x, r_x from
// the two conditionals; no log-domain tricks.
struct Direct {
  std::vector<long double> a;
  std::vector<long double> b;  // b[0] = 0

  explicit Direct(int n) : a(n + 2, 0.0L), b(n + 2, 0.0L) {
    long double c = 0.0L;
    for (int x = 1; x <= n + 1; ++x) {
      a[x] = std::pow(2.0L * x - 1.0L, -(4.0L * x - 2.0L));
      b[x] = std::pow(2.0L * x, -4.0L * x);
      c += a[x] + b[x];
    }
    for (int x = 1; x <= n + 1; ++x) {
      a[x] /= c;
      b[x] /= c;
    }
  }

  long double p(int x) const { return a[x] / (a[x] + b[x - 1]) * b[x] / (a[x] + b[x]); }
  long double q(int x) const {
    if (x == 1) return 0.0L;
    return b[x - 1] / (a[x] + b[x - 1]) * a[x - 1] / (a[x - 1] + b[x - 1]);
  }
  long double r(int x) const {
    const long double stay = a[x] / (a[x] + b[x - 1]) * a[x] / (a[x] + b[x]);
    if (x == 1) return stay;
    return stay + b[x - 1] / (a[x] + b[x - 1]) * b[x - 1] / (a[x - 1] + b[x - 1]);
  }
};

}  // namespace

TEST_CASE("normalized sequences sum to one") {
  const BirthDeathSpec spec = power_sequences();
  long double total = 0.0L;
  for (int x = 1; x <= 60; ++x) total += static_cast<long double>(spec.a(x)) + spec.b(x);
  CHECK(static_cast<double>(total) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(spec.b(0) == 0.0);
}

TEST_CASE("p, q, r agree with direct long-double evaluation") {
  const BirthDeathSpec spec = power_sequences();
  const Direct ref(40);
  for (int x = 1; x <= 30; ++x) {
    CAPTURE(x);
    const Moves mv = pqr(spec, x);
    CHECK(mv.p == doctest::Approx(static_cast<double>(ref.p(x))).epsilon(1e-12));
    CHECK(mv.q == doctest::Approx(static_cast<double>(ref.q(x))).epsilon(1e-12));
    CHECK(mv.r == doctest::Approx(static_cast<double>(ref.r(x))).epsilon(1e-11));
  }
}

TEST_CASE("p + q + r = 1 and the hold probability bound") {
  const BirthDeathSpec spec = power_sequences();
  for (std::uint64_t x = 2; x <= 100; ++x) {
    CAPTURE(x);
    const Moves mv = pqr(spec, x);
    CHECK(std::abs(mv.p + mv.q + mv.r - 1.0) <= 1e-14);
    const double xm1 = static_cast<double>(x - 1);
    CHECK(mv.r <= 1.0 / (2.0 * xm1 * xm1));
    CHECK(mv.r == doctest::Approx(r_two_fraction(spec, static_cast<double>(x))).epsilon(1e-12));
  }
  const Moves first = pqr(spec, 1);
  CHECK(first.q == 0.0);
  CHECK(first.r == doctest::Approx(1.0 - first.p).epsilon(1e-15));
}

TEST_CASE("kernel from the conditionals reproduces the moves") {
  const BirthDeathSpec spec = power_sequences();
  for (std::uint64_t x = 1; x <= 20; ++x) {
    const Moves mv = pqr(spec, x);
    CHECK(kernel_from_conditionals(spec, x, x + 1) == doctest::Approx(mv.p).epsilon(1e-13));
    CHECK(kernel_from_conditionals(spec, x, x) == doctest::Approx(mv.r).epsilon(1e-12));
    if (x > 1) CHECK(kernel_from_conditionals(spec, x, x - 1) == doctest::Approx(mv.q).epsilon(1e-13));
    CHECK(kernel_from_conditionals(spec, x, x + 2) == 0.0);
  }
}

TEST_CASE("truncated kernel is stochastic, tridiagonal and reversible") {
  const BirthDeathSpec spec = power_sequences();
  const TruncatedKernel tk = build_truncated(spec, 200);
  CHECK(tk.K.rows() == 200);
  CHECK((tk.K.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-14);
  CHECK(tk.K.minCoeff() >= 0.0);
  for (Eigen::Index i = 0; i < 200; ++i) {
    for (Eigen::Index j = 0; j < 200; ++j) {
      if (std::abs(i - j) > 1) REQUIRE(tk.K(i, j) == 0.0);
    }
  }
  CHECK(reversibility_defect(tk) <= 1e-12);
  CHECK(std::abs(tk.pi().sum() - 1.0) < 1e-14);
}

TEST_CASE("spectrum matches an independently built symmetric form") {
  const BirthDeathSpec spec = power_sequences();
  const int m = 60;
  const Direct ref(m + 1);
  // D^{1/2} K D^{-1/2} is symmetric tridiagonal with off-diagonal sqrt(p_x q_{x+1})
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(m, m);
  for (int x = 1; x <= m; ++x) {
    S(x - 1, x - 1) = static_cast<double>(x == m ? ref.r(x) + ref.p(x) : ref.r(x));
    if (x < m) {
      const double off = static_cast<double>(std::sqrt(ref.p(x) * ref.q(x + 1)));
      S(x - 1, x) = off;
      S(x, x - 1) = off;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  std::vector<double> expected(es.eigenvalues().data(), es.eigenvalues().data() + m);
  std::sort(expected.rbegin(), expected.rend());
  const Spectrum sp = exact_spectrum(build_truncated(spec, m));
  REQUIRE(sp.eigenvalues.size() == expected.size());
  for (int i = 0; i < m; ++i) CHECK(std::abs(expected[i] - sp.eigenvalues[i]) < 1e-12);
}

TEST_CASE("spectral facts at m = 200") {
  const BirthDeathSpec spec = power_sequences();
  const TruncatedKernel tk = build_truncated(spec, 200);
  const Spectrum sp = exact_spectrum(tk);
  CHECK(std::abs(sp.eigenvalues.front() - 1.0) < 1e-10);
  CHECK(sp.eigenvalues.back() >= -1e-8);
  CHECK(sp.lambda_star == sp.eigenvalues[1]);
  CHECK(std::abs(sp.power_trace(1) - tk.K.trace()) < 1e-10);
  const Eigen::MatrixXd K3 = tk.K * tk.K * tk.K;
  CHECK(std::abs(sp.power_trace(3) - K3.trace()) < 1e-10);

  double prev = 2.0;
  for (unsigned l = 1; l <= 8; ++l) {
    CAPTURE(l);
    CHECK(sp.s(l) > 1.0);
    CHECK(sp.u(l) < prev);
    CHECK(sp.u(l) >= sp.lambda_star);
    prev = sp.u(l);
  }
}

TEST_CASE("diagonal power sums of the untruncated chain") {
  const BirthDeathSpec spec = power_sequences();
  const Spectrum sp = exact_spectrum(build_truncated(spec, 200));
  for (unsigned l = 1; l <= 6; ++l) {
    CAPTURE(l);
    CHECK(std::abs(diagonal_power_sum(spec, 200, l) - sp.s(l)) < 1e-10);
  }
}

TEST_CASE("trace sum equals the truncated trace plus the remaining holds") {
  const BirthDeathSpec spec = power_sequences();
  const TraceSum ts = trace_sum(spec, 1e-13);
  CHECK(ts.is_trace_class);
  CHECK(ts.warning.empty());
  const TruncatedKernel tk = build_truncated(spec, 200);
  const double p_m = pqr(spec, 200).p;
  const double tail = tail_sum_estimate(spec, 200);
  CHECK(tail >= 0.0);
  CHECK(tail <= spec.tail_bound()(200));
  CHECK(std::abs(ts.value - (tk.K.trace() - p_m + tail)) < 1e-10);
}

TEST_CASE("tail estimate agrees with brute-force partial sums") {
  const BirthDeathSpec spec = power_sequences();
  long double brute = 0.0L;
  for (std::uint64_t x = 201; x <= 20'000; ++x) brute += r_two_fraction(spec, static_cast<double>(x));
  const double combined = static_cast<double>(brute) + tail_sum_estimate(spec, 20'000);
  CHECK(std::abs(combined - tail_sum_estimate(spec, 200)) < 1e-12);
}

TEST_CASE("without a dominating bound the trace sum is only a warning") {
  const BirthDeathSpec base = power_sequences();
  const BirthDeathSpec unbounded([](double x) { return -(4.0 * x - 2.0) * std::log(2.0 * x - 1.0); },
                                 [](double x) { return -4.0 * x * std::log(2.0 * x); });
  const TraceSum ts = trace_sum(unbounded, 1e-13);
  CHECK_FALSE(ts.is_trace_class);
  CHECK_FALSE(ts.warning.empty());
  CHECK(ts.value == doctest::Approx(trace_sum(base, 1e-13).value).epsilon(1e-12));
}

TEST_CASE("discrete estimator: l = 1 on a small truncation") {
  const BirthDeathSpec spec = power_sequences();
  const std::uint64_t m = 6;
  const TruncatedKernel tk = build_truncated(spec, m);
  const std::vector<double> uniform(m, 1.0 / m);
  Rng rng(1, stream_id(StreamDomain::kDiscreteDraw, 0));
  const DiscreteEstimate est = mc_estimate_s_l_discrete(spec, m, 1, 100'000, uniform, rng);
  CHECK(est.se_defined);
  CHECK(std::abs(est.s_hat - tk.K.trace()) < 3.0 * est.s_se);
}

TEST_CASE("discrete estimator: l = 3 against the eigenvalues") {
  const BirthDeathSpec spec = power_sequences();
  const std::uint64_t m = 200;
  const Spectrum sp = exact_spectrum(build_truncated(spec, m));
  const std::vector<double> uniform(m, 1.0 / m);
  Rng rng(2, stream_id(StreamDomain::kDiscreteDraw, 3));
  const DiscreteEstimate est = mc_estimate_s_l_discrete(spec, m, 3, 100'000, uniform, rng);
  CHECK(std::abs(est.s_hat - sp.power_trace(3)) < 3.0 * est.s_se);
}

TEST_CASE("discrete estimator: degenerate and invalid input") {
  const BirthDeathSpec spec = power_sequences();
  std::vector<double> pmf(5, 0.2);
  Rng rng(0, 0);
  const DiscreteEstimate one = mc_estimate_s_l_discrete(spec, 5, 2, 1, pmf, rng);
  CHECK_FALSE(one.se_defined);
  CHECK(std::isnan(one.s_se));
  pmf[3] = 0.0;
  try {
    mc_estimate_s_l_discrete(spec, 5, 2, 10, pmf, rng);
    FAIL("expected a domain error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDomain);
  }
}
