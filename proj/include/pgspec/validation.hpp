#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pgspec/polya_gamma.hpp"

namespace pgspec {

// Kolmogorov-Smirnov statistic of draws against the quadrature CDF of PG(1, d).
double ks_statistic_pg(std::vector<double> draws, Tilt tilt);

// Asymptotic one-sample KS critical value sqrt(-ln(alpha/2)/2) / sqrt(n).
double ks_critical_value(std::size_t n, double alpha);

// Normalization of pg_density over (0, z_max) plus the dual-series tail bound
// cosh(d/2) 2 pi exp(-(pi^2/2 + d^2/2) z_max) / (pi^2/2 + d^2/2).
struct Normalization {
  double integral = 0.0;
  double tail_bound = 0.0;
};
Normalization pg_normalization(Tilt tilt, double z_max = 8.0);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ValidationOptions {
  std::uint64_t seed = 20240917;
  std::uint64_t pg_draws = 100'000;
  std::uint64_t ks_draws = 20'000;
};

// Quick oracle self-checks backing the CLI `validate` command.
std::vector<CheckResult> run_self_checks(const ValidationOptions& options = {});

nlohmann::json checks_to_json(const std::vector<CheckResult>& checks);

}  // namespace pgspec
