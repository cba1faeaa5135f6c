#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "pgspec/gibbs_chain.hpp"
#include "pgspec/logit_model.hpp"

namespace pgspec {

// p-variate Student's t with location d, SPD scale C and nu degrees of freedom.
class StudentT {
 public:
  StudentT(Vector location, Matrix scale, double dof);

  const Vector& location() const { return location_; }
  const Matrix& scale() const { return scale_; }
  double dof() const { return dof_; }
  Eigen::Index p() const { return location_.size(); }

  double log_density(const Vector& beta) const;
  // location + L z / sqrt(chi2_nu / nu), with C = L L^T.
  Vector sample(Rng& rng) const;

 private:
  Vector location_;
  Matrix scale_;
  double dof_;
  Eigen::LLT<Matrix> factor_;
  double log_norm_;
};

double student_t_log_density(const StudentT& h, const Vector& beta);

struct PairDraw {
  Vector beta_star;
  AuxVector w_star;
  unsigned conjugate_steps = 0;
};

// One (beta*, w*) pair: beta* ~ h, w ~ pi_1(. | beta*), then l - 1 conjugate steps.
PairDraw draw_pair(const Dataset& data, const Prior& prior, const StudentT& h, unsigned l, Rng& rng);

struct EstimatorConfig {
  unsigned l = 5;
  std::uint64_t N = 100'000;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  double confidence_level = 0.95;
  // Prefix sizes at which running statistics are recorded (rounded down to
  // a multiple of block_size).
  std::vector<std::uint64_t> snapshots;
  std::uint64_t block_size = 256;

  void validate() const;
};

struct EstimateSnapshot {
  std::uint64_t n_terms = 0;
  double s_hat = 0.0;
  double variance = 0.0;
  double max_log_ratio = 0.0;
};

struct GapEstimate {
  double s_hat = 0.0;
  double s_se = 0.0;
  bool u_defined = false;  // false when s_hat <= 1
  double u_hat = 0.0;
  double u_se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double gap_lower_bound = 0.0;  // 1 - ci_high
  std::uint64_t n_terms = 0;
  // max over draws of log(pi(beta*|w*)/h(beta*)) - log|X^T Omega(w*) X + B^{-1}| / 2
  double max_log_ratio = 0.0;
  unsigned l = 0;
  double confidence_level = 0.0;
  double z_multiplier = 0.0;
  std::vector<EstimateSnapshot> snapshots;

  nlohmann::json to_json() const;
};

// Fill u_hat, u_se, CI and gap bound from s_hat and s_se (delta method).
void finalize_upper_bound(GapEstimate& est, unsigned l, double confidence_level);

using EstimatorProgress = std::function<void(std::uint64_t done, std::uint64_t total)>;

GapEstimate estimate_s_l(const Dataset& data, const Prior& prior, const StudentT& h,
                         const EstimatorConfig& cfg, const EstimatorProgress& progress = {},
                         double progress_interval_seconds = 0.0);

// Ergodic mean/covariance of a pilot run, ridge-regularized only if needed.
StudentT auxiliary_from_summary(const ChainSummary& summary, double nu);

StudentT tune_auxiliary(const Dataset& data, const Prior& prior, const ChainConfig& cfg, double nu,
                        const ChainProgress& progress = {}, std::uint64_t progress_every = 0);

// True iff (s_l - 1)^{1/l} is nonincreasing in l. Entries need s_l > 1.
bool u_monotone_check(std::vector<std::pair<unsigned, double>> s_values);

double upper_bound_from_power_sum(double s_l, unsigned l);

}  // namespace pgspec
