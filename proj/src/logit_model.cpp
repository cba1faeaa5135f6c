#include "pgspec/logit_model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "pgspec/errors.hpp"

namespace pgspec {

namespace {

constexpr double kLog2Pi = 1.83787706640934548356;

double log_det_from_llt(const Eigen::LLT<Matrix>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

std::string describe_w(const Vector& w) {
  std::ostringstream os;
  os << "w (n=" << w.size() << ", min=" << w.minCoeff() << ", max=" << w.maxCoeff() << ", head=[";
  for (Eigen::Index i = 0; i < std::min<Eigen::Index>(w.size(), 5); ++i) os << (i ? ", " : "") << w[i];
  os << "])";
  return os.str();
}

// log(1 + exp(x)) without overflow.
double log1p_exp(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

}  // namespace

Dataset::Dataset(Matrix X, Eigen::VectorXi y) : X_(std::move(X)), y_(std::move(y)) {
  if (X_.rows() < 1 || X_.cols() < 1) fail(ErrorCode::kInvalidArgument, "Dataset: need n >= 1 and p >= 1");
  if (y_.size() != X_.rows()) {
    fail(ErrorCode::kInvalidArgument, "Dataset: y length does not match rows of X");
  }
  if (!X_.allFinite()) fail(ErrorCode::kInvalidArgument, "Dataset: X has non-finite entries");
  for (Eigen::Index i = 0; i < y_.size(); ++i) {
    if (y_[i] != 0 && y_[i] != 1) {
      std::ostringstream os;
      os << "Dataset: y[" << i << "] = " << y_[i] << " is not 0/1";
      fail(ErrorCode::kInvalidArgument, os.str());
    }
  }
  kappa_ = y_.cast<double>().array() - 0.5;
  xt_kappa_ = X_.transpose() * kappa_;
}

Prior::Prior(Vector b, Matrix B) : b_(std::move(b)), B_(std::move(B)) {
  if (B_.rows() != B_.cols() || B_.rows() != b_.size() || b_.size() < 1) {
    fail(ErrorCode::kInvalidArgument, "Prior: b must have length p and B must be p x p");
  }
  if (!B_.allFinite() || !b_.allFinite()) fail(ErrorCode::kInvalidArgument, "Prior: non-finite entries");
  if (!B_.isApprox(B_.transpose(), 1e-12)) fail(ErrorCode::kInvalidArgument, "Prior: B is not symmetric");
  Eigen::LLT<Matrix> llt(B_);
  if (llt.info() != Eigen::Success) fail(ErrorCode::kInvalidArgument, "Prior: B is not positive definite");
  B_inv_ = llt.solve(Matrix::Identity(B_.rows(), B_.cols()));
  B_inv_ = 0.5 * (B_inv_ + B_inv_.transpose());
  B_inv_b_ = llt.solve(b_);
}

Prior Prior::isotropic(Eigen::Index p, double variance) {
  return Prior(Vector::Zero(p), variance * Matrix::Identity(p, p));
}

AuxVector::AuxVector(Vector w) : w_(std::move(w)) {
  for (Eigen::Index i = 0; i < w_.size(); ++i) {
    if (!(w_[i] > 0.0) || !std::isfinite(w_[i])) {
      std::ostringstream os;
      os << "AuxVector: entry " << i << " = " << w_[i] << " is not strictly positive";
      fail(ErrorCode::kDomain, os.str());
    }
  }
}

CondNormal::CondNormal(Vector mean, Eigen::LLT<Matrix> precision_factor)
    : mean_(std::move(mean)),
      factor_(std::move(precision_factor)),
      log_det_precision_(log_det_from_llt(factor_)) {}

Matrix CondNormal::covariance() const {
  const Eigen::Index p = mean_.size();
  Matrix cov = factor_.solve(Matrix::Identity(p, p));
  return 0.5 * (cov + cov.transpose());
}

CondNormal cond_normal(const Dataset& data, const Prior& prior, const AuxVector& w) {
  if (w.size() != data.n() || prior.p() != data.p()) {
    fail(ErrorCode::kInvalidArgument, "cond_normal: dimension mismatch");
  }
  const Matrix scaled = data.X().array().colwise() * w.values().array().sqrt();
  Matrix precision = prior.precision();
  precision.selfadjointView<Eigen::Lower>().rankUpdate(scaled.transpose());
  Eigen::LLT<Matrix> llt(precision);
  if (llt.info() != Eigen::Success) {
    fail(ErrorCode::kNumerical, "cond_normal: precision not positive definite for " + describe_w(w.values()));
  }
  Vector mean = llt.solve(data.score_offset() + prior.precision_times_mean());
  return CondNormal(std::move(mean), std::move(llt));
}

Vector sample_beta(const CondNormal& cn, Rng& rng) {
  Vector z(cn.p());
  for (Eigen::Index j = 0; j < z.size(); ++j) z[j] = rng.normal();
  // Sigma = L^{-T} L^{-1}, so L^{-T} z ~ N(0, Sigma).
  cn.precision_factor().matrixU().solveInPlace(z);
  return cn.mean() + z;
}

AuxVector sample_w(const Dataset& data, const Vector& beta, Rng& rng) {
  if (beta.size() != data.p()) fail(ErrorCode::kInvalidArgument, "sample_w: dimension mismatch");
  const Vector eta = data.X() * beta;
  Vector w(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) w[i] = pg_sample(Tilt(std::abs(eta[i])), rng);
  return AuxVector(std::move(w));
}

double log_cond_beta_density(const CondNormal& cn, const Vector& beta) {
  if (beta.size() != cn.p()) fail(ErrorCode::kInvalidArgument, "log_cond_beta_density: dimension mismatch");
  // (beta - mu)^T L L^T (beta - mu) = |L^T (beta - mu)|^2
  const Vector r = cn.precision_factor().matrixU() * (beta - cn.mean());
  return -0.5 * static_cast<double>(cn.p()) * kLog2Pi + 0.5 * cn.log_det_precision() - 0.5 * r.squaredNorm();
}

double log_cond_w_density(const Dataset& data, const Vector& beta, const AuxVector& w,
                          const SeriesConfig& cfg) {
  if (beta.size() != data.p() || w.size() != data.n()) {
    fail(ErrorCode::kInvalidArgument, "log_cond_w_density: dimension mismatch");
  }
  const Vector eta = data.X() * beta;
  double total = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    total += pg_log_density(w.values()[i], Tilt(std::abs(eta[i])), cfg);
  }
  return total;
}

Vector logistic_mle(const Dataset& data, int max_iterations, double tol) {
  const Matrix& X = data.X();
  const Vector y = data.y().cast<double>();
  auto log_lik = [&](const Vector& beta) {
    const Vector eta = X * beta;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) ll += y[i] * eta[i] - log1p_exp(eta[i]);
    return ll;
  };

  Vector beta = Vector::Zero(data.p());
  double current = log_lik(beta);
  for (int it = 0; it < max_iterations; ++it) {
    const Vector eta = X * beta;
    const Vector prob = eta.unaryExpr([](double e) { return 1.0 / (1.0 + std::exp(-e)); });
    const Vector weight = prob.array() * (1.0 - prob.array());
    const Vector grad = X.transpose() * (y - prob);
    const Matrix scaled = X.array().colwise() * weight.array().sqrt();
    Matrix info = Matrix::Zero(data.p(), data.p());
    info.selfadjointView<Eigen::Lower>().rankUpdate(scaled.transpose());
    Eigen::LDLT<Matrix> ldlt(info.selfadjointView<Eigen::Lower>());
    if (ldlt.info() != Eigen::Success) fail(ErrorCode::kNumerical, "logistic_mle: singular information matrix");
    const Vector step = ldlt.solve(grad);

    double scale = 1.0;
    Vector next = beta + step;
    double candidate = log_lik(next);
    while (!(candidate >= current) && scale > 1e-10) {
      scale *= 0.5;
      next = beta + scale * step;
      candidate = log_lik(next);
    }
    beta = next;
    const double gain = candidate - current;
    current = candidate;
    if (std::abs(gain) < tol * (1.0 + std::abs(current)) && (scale * step).norm() < 1e-6 * (1.0 + beta.norm())) {
      // Fitted probabilities saturated at the labels: the likelihood has no
      // maximizer (complete separation) and beta has merely run off.
      const Vector fitted = (X * beta).unaryExpr([](double e) { return 1.0 / (1.0 + std::exp(-e)); });
      if ((y - fitted).cwiseAbs().maxCoeff() < 1e-6) {
        fail(ErrorCode::kNumerical, "logistic_mle: fitted probabilities saturate at the labels (data separable)");
      }
      return beta;
    }
  }
  fail(ErrorCode::kNumerical, "logistic_mle: Newton iterations did not converge (data may be separable)");
}

}  // namespace pgspec
