#pragma once

#include <Eigen/Dense>

#include "pgspec/polya_gamma.hpp"
#include "pgspec/rng.hpp"

namespace pgspec {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Design matrix X (row i is x_i^T) and 0/1 responses.
class Dataset {
 public:
  Dataset(Matrix X, Eigen::VectorXi y);

  const Matrix& X() const { return X_; }
  const Eigen::VectorXi& y() const { return y_; }
  // y - 1/2, precomputed.
  const Vector& centered_response() const { return kappa_; }
  // X^T (y - 1/2).
  const Vector& score_offset() const { return xt_kappa_; }

  Eigen::Index n() const { return X_.rows(); }
  Eigen::Index p() const { return X_.cols(); }

 private:
  Matrix X_;
  Eigen::VectorXi y_;
  Vector kappa_;
  Vector xt_kappa_;
};

// N_p(b, B) prior on beta. B must be SPD.
class Prior {
 public:
  Prior(Vector b, Matrix B);

  static Prior isotropic(Eigen::Index p, double variance);

  const Vector& mean() const { return b_; }
  const Matrix& covariance() const { return B_; }
  const Matrix& precision() const { return B_inv_; }
  const Vector& precision_times_mean() const { return B_inv_b_; }
  Eigen::Index p() const { return b_.size(); }

 private:
  Vector b_;
  Matrix B_;
  Matrix B_inv_;
  Vector B_inv_b_;
};

// Strictly positive auxiliary vector w in R_+^n.
class AuxVector {
 public:
  explicit AuxVector(Vector w);

  const Vector& values() const { return w_; }
  Eigen::Index size() const { return w_.size(); }

 private:
  Vector w_;
};

// N_p(mu(w), Sigma(w)) held in precision form: Sigma(w)^{-1} = L L^T.
class CondNormal {
 public:
  CondNormal(Vector mean, Eigen::LLT<Matrix> precision_factor);

  const Vector& mean() const { return mean_; }
  const Eigen::LLT<Matrix>& precision_factor() const { return factor_; }
  // log |X^T Omega(w) X + B^{-1}|
  double log_det_precision() const { return log_det_precision_; }
  // Sigma(w), formed by triangular solves.
  Matrix covariance() const;
  Eigen::Index p() const { return mean_.size(); }

 private:
  Vector mean_;
  Eigen::LLT<Matrix> factor_;
  double log_det_precision_;
};

CondNormal cond_normal(const Dataset& data, const Prior& prior, const AuxVector& w);

Vector sample_beta(const CondNormal& cn, Rng& rng);

AuxVector sample_w(const Dataset& data, const Vector& beta, Rng& rng);

double log_cond_beta_density(const CondNormal& cn, const Vector& beta);

double log_cond_w_density(const Dataset& data, const Vector& beta, const AuxVector& w,
                          const SeriesConfig& cfg = {});

// Frequentist MLE of the logistic regression by damped Newton iterations.
Vector logistic_mle(const Dataset& data, int max_iterations = 100, double tol = 1e-10);

}  // namespace pgspec
