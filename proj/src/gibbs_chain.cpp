#include "pgspec/gibbs_chain.hpp"

#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "pgspec/errors.hpp"
#include "pgspec/running_stats.hpp"

namespace pgspec {

namespace {

nlohmann::json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

nlohmann::json matrix_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const Vector row = m.row(i).transpose();
    rows.push_back(vector_json(row));
  }
  return rows;
}

class CsvSink {
 public:
  CsvSink(const std::filesystem::path& path, Eigen::Index p) : out_(path) {
    if (!out_) fail(ErrorCode::kIo, "cannot open draws file " + path.string());
    out_ << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (Eigen::Index j = 0; j < p; ++j) out_ << (j ? "," : "") << "beta_" << (j + 1);
    out_ << '\n';
  }

  void write(const Vector& beta) {
    for (Eigen::Index j = 0; j < beta.size(); ++j) out_ << (j ? "," : "") << beta[j];
    out_ << '\n';
  }

  void close() {
    out_.close();
    if (out_.fail()) fail(ErrorCode::kIo, "error writing draws file");
  }

 private:
  std::ofstream out_;
};

}  // namespace

void ChainConfig::validate(Eigen::Index p) const {
  if (total_iterations < 1) fail(ErrorCode::kInvalidArgument, "total_iterations must be positive");
  if (burn_in >= total_iterations) fail(ErrorCode::kInvalidArgument, "burn_in must be < total_iterations");
  if (init_beta.size() != p) {
    std::ostringstream os;
    os << "init_beta has length " << init_beta.size() << ", expected " << p;
    fail(ErrorCode::kInvalidArgument, os.str());
  }
  if (keep_draws && (total_iterations - burn_in) * static_cast<std::uint64_t>(p) > keep_budget) {
    fail(ErrorCode::kInvalidArgument,
         "kept draws exceed the in-memory budget; stream them to a CSV file instead");
  }
}

nlohmann::json ChainSummary::to_json() const {
  return {{"mean", vector_json(mean)},
          {"covariance", matrix_json(covariance)},
          {"iterations", iterations},
          {"burn_in", burn_in},
          {"kept", kept},
          {"seed", seed}};
}

Vector gibbs_step(const Dataset& data, const Prior& prior, const Vector& beta, Rng& rng) {
  const AuxVector w = sample_w(data, beta, rng);
  return sample_beta(cond_normal(data, prior, w), rng);
}

AuxVector conjugate_step(const Dataset& data, const Prior& prior, const AuxVector& w, Rng& rng) {
  const Vector beta = sample_beta(cond_normal(data, prior, w), rng);
  return sample_w(data, beta, rng);
}

ChainSummary run_chain(const Dataset& data, const Prior& prior, const ChainConfig& cfg,
                       const ChainProgress& progress, std::uint64_t progress_every) {
  cfg.validate(data.p());
  Rng rng(cfg.seed, stream_id(StreamDomain::kChain, cfg.chain_id));
  RunningCovariance stats(data.p());
  std::optional<CsvSink> sink;
  if (cfg.draws_csv) sink.emplace(*cfg.draws_csv, data.p());

  ChainSummary summary;
  const std::uint64_t kept = cfg.total_iterations - cfg.burn_in;
  if (cfg.keep_draws) summary.draws = Matrix(static_cast<Eigen::Index>(kept), data.p());

  Vector beta = cfg.init_beta;
  for (std::uint64_t it = 0; it < cfg.total_iterations; ++it) {
    beta = gibbs_step(data, prior, beta, rng);
    if (it >= cfg.burn_in) {
      stats.add(beta);
      if (sink) sink->write(beta);
      if (summary.draws) summary.draws->row(static_cast<Eigen::Index>(it - cfg.burn_in)) = beta.transpose();
    }
    if (progress && progress_every > 0 && (it + 1) % progress_every == 0) progress(it + 1, cfg.total_iterations);
  }
  if (sink) sink->close();

  summary.mean = stats.mean();
  summary.covariance = stats.covariance();
  summary.kept = stats.count();
  summary.iterations = cfg.total_iterations;
  summary.burn_in = cfg.burn_in;
  summary.seed = cfg.seed;
  return summary;
}

}  // namespace pgspec
