#include "pgspec/validation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "pgspec/birth_death.hpp"
#include "pgspec/errors.hpp"
#include "pgspec/logit_model.hpp"
#include "pgspec/running_stats.hpp"
#include "pgspec/spectral_gap.hpp"

namespace pgspec {

namespace {

using boost::math::quadrature::gauss_kronrod;

std::string fmt(std::initializer_list<std::pair<const char*, double>> items) {
  std::ostringstream os;
  os.precision(6);
  bool first = true;
  for (const auto& [k, v] : items) {
    os << (first ? "" : ", ") << k << "=" << v;
    first = false;
  }
  return os.str();
}

}  // namespace

double ks_statistic_pg(std::vector<double> draws, Tilt tilt) {
  if (draws.empty()) fail(ErrorCode::kInvalidArgument, "ks_statistic_pg: no draws");
  std::sort(draws.begin(), draws.end());
  const auto density = [tilt](double z) { return z > 0.0 ? pg_density(z, tilt) : 0.0; };
  const double n = static_cast<double>(draws.size());
  double cdf = 0.0;
  double previous = 0.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    const double x = draws[i];
    if (x > previous) {
      cdf += gauss_kronrod<double, 31>::integrate(density, previous, x, previous == 0.0 ? 15 : 3, 1e-13);
      previous = x;
    }
    const double f = std::min(cdf, 1.0);
    worst = std::max({worst, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return worst;
}

double ks_critical_value(std::size_t n, double alpha) {
  return std::sqrt(-0.5 * std::log(0.5 * alpha)) / std::sqrt(static_cast<double>(n));
}

Normalization pg_normalization(Tilt tilt, double z_max) {
  const auto density = [tilt](double z) { return z > 0.0 ? pg_density(z, tilt) : 0.0; };
  Normalization out;
  double err = 0.0;
  out.integral = gauss_kronrod<double, 61>::integrate(density, 0.0, z_max, 20, 1e-13, &err);
  const double d = tilt.value();
  const double rate = 0.5 * std::numbers::pi * std::numbers::pi + 0.5 * d * d;
  out.tail_bound = std::cosh(0.5 * d) * 2.0 * std::numbers::pi * std::exp(-rate * z_max) / rate;
  return out;
}

std::vector<CheckResult> run_self_checks(const ValidationOptions& options) {
  std::vector<CheckResult> checks;
  auto record = [&checks](std::string name, bool ok, std::string detail) {
    checks.push_back({std::move(name), ok, std::move(detail)});
  };
  auto guarded = [&record](const std::string& name, auto&& body) {
    try {
      body();
    } catch (const std::exception& e) {
      record(name, false, std::string("exception: ") + e.what());
    }
  };

  for (double d : {0.0, 0.5, 1.0, 2.0, 4.0}) {
    const Tilt tilt(d);
    const std::string tag = "d=" + std::to_string(d).substr(0, 4);

    guarded("pg_normalization " + tag, [&] {
      const Normalization norm = pg_normalization(tilt);
      const double total = norm.integral + norm.tail_bound;
      record("pg_normalization " + tag, std::abs(norm.integral - 1.0) < 1e-6 && norm.tail_bound < 1e-6,
             fmt({{"integral", norm.integral}, {"tail_bound", norm.tail_bound}, {"total", total}}));
    });

    guarded("pg_mean_oracle " + tag, [&] {
      const double quad = pg_mean_oracle(tilt);
      const double series = pg_mean_series(tilt);
      const double closed = d == 0.0 ? 0.25 : std::tanh(0.5 * d) / (2.0 * d);
      record("pg_mean_oracle " + tag, std::abs(quad - series) < 1e-6 && std::abs(quad - closed) < 1e-6,
             fmt({{"quadrature", quad}, {"series", series}, {"closed_form", closed}}));
    });

    guarded("pg_sampler " + tag, [&] {
      Rng rng(options.seed, stream_id(StreamDomain::kValidation, static_cast<std::uint64_t>(d * 100)));
      RunningStats stats;
      std::vector<double> draws;
      draws.reserve(options.ks_draws);
      for (std::uint64_t i = 0; i < options.pg_draws; ++i) {
        const double z = pg_sample(tilt, rng);
        stats.add(z);
        if (i < options.ks_draws) draws.push_back(z);
      }
      const double mean = pg_mean_oracle(tilt);
      const double zscore = (stats.mean() - mean) / stats.standard_error();
      const double ks = ks_statistic_pg(draws, tilt);
      const double crit = ks_critical_value(draws.size(), 1e-3);
      record("pg_sampler " + tag, std::abs(zscore) < 4.0 && ks < crit,
             fmt({{"mean", stats.mean()}, {"oracle", mean}, {"z", zscore}, {"ks", ks}, {"ks_crit", crit}}));
    });
  }

  guarded("g_series_forms_agree", [&] {
    double worst = 0.0;
    for (double z : {0.25, 0.3, 0.35, kSeriesSwitch, 0.5, 0.6}) {
      worst = std::max(worst, std::abs(g_density_with(SeriesForm::kSmallZ, z) - g_density_with(SeriesForm::kDual, z)));
    }
    record("g_series_forms_agree", worst < 1e-12, fmt({{"max_abs_diff", worst}}));
  });

  guarded("cond_normal_scalar", [&] {
    Matrix X(1, 1);
    X << 1.0;
    Eigen::VectorXi y(1);
    y << 1;
    const Dataset data(X, y);
    const Prior prior(Vector::Zero(1), Matrix::Identity(1, 1));
    Vector w(1);
    w << 1.0;
    const CondNormal cn = cond_normal(data, prior, AuxVector(w));
    const double mu = cn.mean()[0];
    const double sigma = cn.covariance()(0, 0);
    record("cond_normal_scalar", std::abs(mu - 0.25) < 1e-14 && std::abs(sigma - 0.5) < 1e-14,
           fmt({{"mean", mu}, {"variance", sigma}}));
  });

  guarded("birth_death", [&] {
    const BirthDeathSpec spec = power_sequences();
    double worst_sum = 0.0;
    double worst_bound = -1.0;
    for (std::uint64_t x = 2; x <= 100; ++x) {
      const Moves mv = pqr(spec, x);
      worst_sum = std::max(worst_sum, std::abs(mv.p + mv.q + mv.r - 1.0));
      const double xm1 = static_cast<double>(x - 1);
      worst_bound = std::max(worst_bound, mv.r - 1.0 / (2.0 * xm1 * xm1));
    }
    const TruncatedKernel tk = build_truncated(spec, 200);
    const Spectrum spectrum = exact_spectrum(tk);
    std::vector<std::pair<unsigned, double>> s_values;
    bool above_lambda = true;
    for (unsigned l = 1; l <= 8; ++l) {
      s_values.emplace_back(l, spectrum.s(l));
      above_lambda = above_lambda && spectrum.u(l) >= spectrum.lambda_star;
    }
    const double defect = reversibility_defect(tk);
    const bool ok = worst_sum <= 1e-14 && worst_bound <= 0.0 && defect <= 1e-12 && above_lambda &&
                    u_monotone_check(s_values) && std::abs(spectrum.eigenvalues.front() - 1.0) < 1e-10;
    record("birth_death", ok,
           fmt({{"max_pqr_defect", worst_sum},
                {"max_r_minus_bound", worst_bound},
                {"reversibility_defect", defect},
                {"lambda_star", spectrum.lambda_star}}));
  });

  guarded("birth_death_discrete_estimator", [&] {
    const BirthDeathSpec spec = power_sequences();
    const std::uint64_t m = 200;
    const Spectrum spectrum = exact_spectrum(build_truncated(spec, m));
    const std::vector<double> uniform(m, 1.0 / static_cast<double>(m));
    Rng rng(options.seed, stream_id(StreamDomain::kValidation, 1000));
    const DiscreteEstimate est = mc_estimate_s_l_discrete(spec, m, 3, 20'000, uniform, rng);
    const double exact = spectrum.power_trace(3);
    const double z = (est.s_hat - exact) / est.s_se;
    record("birth_death_discrete_estimator", std::abs(z) < 4.0,
           fmt({{"s_hat", est.s_hat}, {"s_se", est.s_se}, {"exact", exact}, {"z", z}}));
  });

  return checks;
}

nlohmann::json checks_to_json(const std::vector<CheckResult>& checks) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& c : checks) out.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  return out;
}

}  // namespace pgspec
