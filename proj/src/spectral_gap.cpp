#include "pgspec/spectral_gap.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include <boost/math/distributions/normal.hpp>

#include "pgspec/errors.hpp"
#include "pgspec/running_stats.hpp"

namespace pgspec {

namespace {

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

// JSON has no NaN; undefined quantities are emitted as null.
nlohmann::json number_or_null(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

}  // namespace

StudentT::StudentT(Vector location, Matrix scale, double dof)
    : location_(std::move(location)), scale_(std::move(scale)), dof_(dof) {
  if (!(dof_ > 0.0) || !std::isfinite(dof_)) fail(ErrorCode::kInvalidArgument, "StudentT: dof must be > 0");
  if (scale_.rows() != scale_.cols() || scale_.rows() != location_.size() || location_.size() < 1) {
    fail(ErrorCode::kInvalidArgument, "StudentT: location/scale dimension mismatch");
  }
  factor_.compute(scale_);
  if (factor_.info() != Eigen::Success) fail(ErrorCode::kInvalidArgument, "StudentT: scale is not positive definite");
  const double p = static_cast<double>(location_.size());
  const double log_det = 2.0 * factor_.matrixLLT().diagonal().array().log().sum();
  log_norm_ = std::lgamma(0.5 * (dof_ + p)) - std::lgamma(0.5 * dof_) -
              0.5 * p * std::log(dof_ * std::numbers::pi) - 0.5 * log_det;
}

double StudentT::log_density(const Vector& beta) const {
  if (beta.size() != location_.size()) fail(ErrorCode::kInvalidArgument, "StudentT: dimension mismatch");
  const Vector r = factor_.matrixL().solve(beta - location_);
  const double p = static_cast<double>(location_.size());
  return log_norm_ - 0.5 * (dof_ + p) * std::log1p(r.squaredNorm() / dof_);
}

Vector StudentT::sample(Rng& rng) const {
  Vector z(location_.size());
  for (Eigen::Index j = 0; j < z.size(); ++j) z[j] = rng.normal();
  const double chi2 = 2.0 * rng.gamma(0.5 * dof_);
  return location_ + (factor_.matrixL() * z) * std::sqrt(dof_ / chi2);
}

double student_t_log_density(const StudentT& h, const Vector& beta) { return h.log_density(beta); }

PairDraw draw_pair(const Dataset& data, const Prior& prior, const StudentT& h, unsigned l, Rng& rng) {
  if (l < 1) fail(ErrorCode::kInvalidArgument, "draw_pair: l must be >= 1");
  if (h.p() != data.p()) fail(ErrorCode::kInvalidArgument, "draw_pair: auxiliary density has wrong dimension");
  Vector beta_star = h.sample(rng);
  AuxVector w = sample_w(data, beta_star, rng);
  unsigned steps = 0;
  for (unsigned j = 1; j < l; ++j) {
    w = conjugate_step(data, prior, w, rng);
    ++steps;
  }
  return PairDraw{std::move(beta_star), std::move(w), steps};
}

void EstimatorConfig::validate() const {
  if (l < 1) fail(ErrorCode::kInvalidArgument, "l must be >= 1");
  if (N < 2) fail(ErrorCode::kInvalidArgument, "N must be >= 2");
  if (workers < 1) fail(ErrorCode::kInvalidArgument, "workers must be >= 1");
  if (!(confidence_level > 0.0 && confidence_level < 1.0)) {
    fail(ErrorCode::kInvalidArgument, "confidence_level must lie in (0, 1)");
  }
  if (block_size < 1) fail(ErrorCode::kInvalidArgument, "block_size must be >= 1");
}

double upper_bound_from_power_sum(double s_l, unsigned l) {
  if (!(s_l > 1.0)) return nan();
  return std::pow(s_l - 1.0, 1.0 / static_cast<double>(l));
}

void finalize_upper_bound(GapEstimate& est, unsigned l, double confidence_level) {
  est.l = l;
  est.confidence_level = confidence_level;
  const boost::math::normal_distribution<double> standard;
  est.z_multiplier = boost::math::quantile(standard, 0.5 + 0.5 * confidence_level);
  est.u_defined = est.s_hat > 1.0;
  if (!est.u_defined) {
    est.u_hat = est.u_se = est.ci_low = est.ci_high = est.gap_lower_bound = nan();
    return;
  }
  const double inv_l = 1.0 / static_cast<double>(l);
  est.u_hat = std::pow(est.s_hat - 1.0, inv_l);
  est.u_se = est.s_se * inv_l * std::pow(est.s_hat - 1.0, (1.0 - static_cast<double>(l)) * inv_l);
  est.ci_low = est.u_hat - est.z_multiplier * est.u_se;
  est.ci_high = est.u_hat + est.z_multiplier * est.u_se;
  est.gap_lower_bound = 1.0 - est.ci_high;
}

nlohmann::json GapEstimate::to_json() const {
  nlohmann::json snaps = nlohmann::json::array();
  for (const auto& s : snapshots) {
    snaps.push_back({{"n_terms", s.n_terms},
                     {"s_hat", number_or_null(s.s_hat)},
                     {"variance", number_or_null(s.variance)},
                     {"max_log_ratio", number_or_null(s.max_log_ratio)}});
  }
  return {{"s_hat", number_or_null(s_hat)},
          {"s_se", number_or_null(s_se)},
          {"u_defined", u_defined},
          {"u_hat", number_or_null(u_hat)},
          {"u_se", number_or_null(u_se)},
          {"ci_low", number_or_null(ci_low)},
          {"ci_high", number_or_null(ci_high)},
          {"gap_lower_bound", number_or_null(gap_lower_bound)},
          {"n_terms", n_terms},
          {"max_log_ratio", number_or_null(max_log_ratio)},
          {"l", l},
          {"confidence_level", confidence_level},
          {"z_multiplier", z_multiplier},
          {"snapshots", snaps}};
}

GapEstimate estimate_s_l(const Dataset& data, const Prior& prior, const StudentT& h,
                         const EstimatorConfig& cfg, const EstimatorProgress& progress,
                         double progress_interval_seconds) {
  cfg.validate();
  if (h.p() != data.p() || prior.p() != data.p()) {
    fail(ErrorCode::kInvalidArgument, "estimate_s_l: dimension mismatch");
  }

  struct Block {
    RunningStats terms;
    double max_log_ratio = -std::numeric_limits<double>::infinity();
  };
  const std::uint64_t n_blocks = (cfg.N + cfg.block_size - 1) / cfg.block_size;
  std::vector<Block> blocks(n_blocks);

  std::atomic<std::uint64_t> next_block{0};
  std::atomic<std::uint64_t> done{0};
  std::atomic<bool> abort{false};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&]() {
    try {
      for (;;) {
        const std::uint64_t b = next_block.fetch_add(1);
        if (b >= n_blocks || abort.load()) return;
        Block& block = blocks[b];
        const std::uint64_t first = b * cfg.block_size;
        const std::uint64_t last = std::min(cfg.N, first + cfg.block_size);
        for (std::uint64_t i = first; i < last; ++i) {
          Rng rng(cfg.seed, stream_id(StreamDomain::kEstimatorDraw, i));
          const PairDraw pair = draw_pair(data, prior, h, cfg.l, rng);
          const CondNormal cn = cond_normal(data, prior, pair.w_star);
          const double log_term = log_cond_beta_density(cn, pair.beta_star) - h.log_density(pair.beta_star);
          const double term = std::exp(log_term);
          if (!std::isfinite(term)) {
            std::ostringstream os;
            os << "estimate_s_l: non-finite term at draw " << i << " (seed " << cfg.seed
               << ", log term " << log_term << ")";
            fail(ErrorCode::kNumerical, os.str());
          }
          block.terms.add(term);
          block.max_log_ratio = std::max(block.max_log_ratio, log_term - 0.5 * cn.log_det_precision());
        }
        done.fetch_add(last - first);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      abort.store(true);
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(cfg.workers);
  for (unsigned t = 0; t < cfg.workers; ++t) pool.emplace_back(worker);
  if (progress) {
    using clock = std::chrono::steady_clock;
    auto last_report = clock::now();
    while (done.load() < cfg.N && !abort.load()) {
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
      if (std::chrono::duration<double>(clock::now() - last_report).count() >= progress_interval_seconds) {
        progress(done.load(), cfg.N);
        last_report = clock::now();
      }
    }
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  std::vector<std::uint64_t> snapshot_targets;
  for (std::uint64_t s : cfg.snapshots) {
    const std::uint64_t rounded = std::min(cfg.N, s - s % cfg.block_size);
    if (rounded > 0) snapshot_targets.push_back(rounded);
  }
  std::sort(snapshot_targets.begin(), snapshot_targets.end());
  snapshot_targets.erase(std::unique(snapshot_targets.begin(), snapshot_targets.end()), snapshot_targets.end());

  GapEstimate est;
  RunningStats total;
  double running_max = -std::numeric_limits<double>::infinity();
  std::size_t next_snapshot = 0;
  for (const Block& block : blocks) {
    total.merge(block.terms);
    running_max = std::max(running_max, block.max_log_ratio);
    while (next_snapshot < snapshot_targets.size() && total.count() >= snapshot_targets[next_snapshot]) {
      est.snapshots.push_back({total.count(), total.mean(), total.variance(), running_max});
      ++next_snapshot;
    }
  }

  est.s_hat = total.mean();
  est.s_se = total.standard_error();
  est.n_terms = total.count();
  est.max_log_ratio = running_max;
  finalize_upper_bound(est, cfg.l, cfg.confidence_level);
  return est;
}

StudentT auxiliary_from_summary(const ChainSummary& summary, double nu) {
  Matrix scale = summary.covariance;
  const Eigen::Index p = scale.rows();
  Eigen::LLT<Matrix> llt(scale);
  if (llt.info() != Eigen::Success) {
    const double eps = 1e-8 * scale.trace() / static_cast<double>(p);
    scale += eps * Matrix::Identity(p, p);
    llt.compute(scale);
    if (llt.info() != Eigen::Success || !(eps > 0.0)) {
      fail(ErrorCode::kNumerical, "tune_auxiliary: ergodic covariance is not positive definite after regularization");
    }
  }
  return StudentT(summary.mean, scale, nu);
}

StudentT tune_auxiliary(const Dataset& data, const Prior& prior, const ChainConfig& cfg, double nu,
                        const ChainProgress& progress, std::uint64_t progress_every) {
  if (!(nu > 0.0)) fail(ErrorCode::kInvalidArgument, "tune_auxiliary: nu must be > 0");
  return auxiliary_from_summary(run_chain(data, prior, cfg, progress, progress_every), nu);
}

bool u_monotone_check(std::vector<std::pair<unsigned, double>> s_values) {
  std::sort(s_values.begin(), s_values.end());
  double previous = std::numeric_limits<double>::infinity();
  for (const auto& [l, s] : s_values) {
    if (l < 1 || !(s > 1.0)) fail(ErrorCode::kInvalidArgument, "u_monotone_check: need l >= 1 and s_l > 1");
    const double u = upper_bound_from_power_sum(s, l);
    if (u > previous * (1.0 + 1e-12)) return false;
    previous = u;
  }
  return true;
}

}  // namespace pgspec
