#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "pgspec/errors.hpp"
#include "pgspec/logit_model.hpp"
#include "pgspec/running_stats.hpp"

using namespace pgspec;

namespace {

Dataset small_data() {
  Matrix X(5, 3);
  X << 1.0, 0.3, -1.2,  //
      1.0, -0.8, 0.4,   //
      1.0, 1.5, 0.0,    //
      1.0, 0.1, 2.2,    //
      1.0, -1.1, -0.7;
  Eigen::VectorXi y(5);
  y << 1, 0, 0, 1, 1;
  return Dataset(X, y);
}

Prior small_prior() {
  Matrix B(3, 3);
  B << 4.0, 0.5, 0.0,  //
      0.5, 2.0, 0.3,   //
      0.0, 0.3, 3.0;
  Vector b(3);
  b << 0.1, -0.2, 0.3;
  return Prior(b, B);
}

bool throws_code(ErrorCode code, auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code() == code;
  }
  return false;
}

}  // namespace

TEST_CASE("dataset validation") {
  Matrix X = Matrix::Ones(3, 2);
  Eigen::VectorXi bad(3);
  bad << 0, 1, 2;
  CHECK(throws_code(ErrorCode::kInvalidArgument, [&] { Dataset(X, bad); }));
  Eigen::VectorXi short_y(2);
  short_y << 0, 1;
  CHECK(throws_code(ErrorCode::kInvalidArgument, [&] { Dataset(X, short_y); }));
  Matrix nan = X;
  nan(1, 1) = std::nan("");
  Eigen::VectorXi y(3);
  y << 0, 1, 1;
  CHECK(throws_code(ErrorCode::kInvalidArgument, [&] { Dataset(nan, y); }));

  const Dataset d(X, y);
  CHECK(d.centered_response()[0] == -0.5);
  CHECK(d.score_offset()[0] == doctest::Approx(0.5));
}

TEST_CASE("prior must be symmetric positive definite") {
  Matrix B(2, 2);
  B << 1.0, 2.0, 2.0, 1.0;
  CHECK(throws_code(ErrorCode::kInvalidArgument, [&] { Prior(Vector::Zero(2), B); }));
  Matrix asym(2, 2);
  asym << 1.0, 0.1, 0.0, 1.0;
  CHECK(throws_code(ErrorCode::kInvalidArgument, [&] { Prior(Vector::Zero(2), asym); }));
  const Prior iso = Prior::isotropic(4, 10.0);
  CHECK(iso.precision()(2, 2) == doctest::Approx(0.1));
  CHECK(iso.mean().isZero());
}

TEST_CASE("auxiliary vector entries must be positive") {
  Vector w(2);
  w << 1.0, 0.0;
  CHECK(throws_code(ErrorCode::kDomain, [&] { AuxVector{w}; }));
  w << 1.0, -1.0;
  CHECK(throws_code(ErrorCode::kDomain, [&] { AuxVector{w}; }));
}

TEST_CASE("conditional normal matches the dense-inverse formula") {
  const Dataset data = small_data();
  const Prior prior = small_prior();
  Vector w(5);
  w << 0.2, 0.05, 1.3, 0.4, 0.9;
  const CondNormal cn = cond_normal(data, prior, AuxVector(w));
  const auto ref = oracle::dense_cond(data.X(), data.y(), prior.mean(), prior.covariance(), w);
  CHECK((cn.mean() - ref.mean).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((cn.covariance() - ref.cov).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(cn.log_det_precision() == doctest::Approx(-std::log(ref.cov.determinant())).epsilon(1e-12));
}

TEST_CASE("scalar case by hand") {
  Matrix X(1, 1);
  X << 1.0;
  Eigen::VectorXi y(1);
  y << 1;
  const Dataset data(X, y);
  const Prior prior(Vector::Zero(1), Matrix::Identity(1, 1));
  Vector w(1);
  w << 1.0;
  const CondNormal cn = cond_normal(data, prior, AuxVector(w));
  // precision 1 + 1 = 2, mean (1/2) / 2
  CHECK(cn.mean()[0] == doctest::Approx(0.25));
  CHECK(cn.covariance()(0, 0) == doctest::Approx(0.5));
}

TEST_CASE("larger w shrinks the conditional covariance (Loewner order)") {
  const Dataset data = small_data();
  const Prior prior = small_prior();
  Vector w(5);
  w << 0.2, 0.05, 1.3, 0.4, 0.9;
  const Matrix small = cond_normal(data, prior, AuxVector(w)).covariance();
  const Matrix large = cond_normal(data, prior, AuxVector(Vector(w.array() * 3.0))).covariance();
  const Eigen::SelfAdjointEigenSolver<Matrix> es(small - large);
  CHECK(es.eigenvalues().minCoeff() > -1e-14);
  // and is always dominated by the prior covariance
  const Eigen::SelfAdjointEigenSolver<Matrix> es_prior(prior.covariance() - small);
  CHECK(es_prior.eigenvalues().minCoeff() > -1e-14);
}

TEST_CASE("permuting observations together with w changes nothing") {
  const Dataset data = small_data();
  const Prior prior = small_prior();
  Vector w(5);
  w << 0.2, 0.05, 1.3, 0.4, 0.9;
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(5);
  perm.indices() << 3, 0, 4, 1, 2;
  const Dataset shuffled(perm * data.X(), perm * data.y());
  const Vector w_shuffled = perm * w;
  const CondNormal a = cond_normal(data, prior, AuxVector(w));
  const CondNormal b = cond_normal(shuffled, prior, AuxVector(w_shuffled));
  CHECK((a.mean() - b.mean()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((a.covariance() - b.covariance()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("beta draws have the conditional moments") {
  const Dataset data = small_data();
  const Prior prior = small_prior();
  Vector w(5);
  w << 0.2, 0.05, 1.3, 0.4, 0.9;
  const CondNormal cn = cond_normal(data, prior, AuxVector(w));
  Rng rng(3, 3);
  RunningCovariance acc(3);
  for (int i = 0; i < 100000; ++i) acc.add(sample_beta(cn, rng));
  const Matrix cov = cn.covariance();
  for (int j = 0; j < 3; ++j) {
    CHECK(std::abs(acc.mean()[j] - cn.mean()[j]) < 4.0 * std::sqrt(cov(j, j) / 1e5));
  }
  CHECK((acc.covariance() - cov).cwiseAbs().maxCoeff() < 0.03 * cov.cwiseAbs().maxCoeff());
}

TEST_CASE("conditional beta log density is the normal log density") {
  const Dataset data = small_data();
  const Prior prior = small_prior();
  Vector w(5);
  w << 0.2, 0.05, 1.3, 0.4, 0.9;
  const CondNormal cn = cond_normal(data, prior, AuxVector(w));
  const auto ref = oracle::dense_cond(data.X(), data.y(), prior.mean(), prior.covariance(), w);
  Vector beta(3);
  beta << 0.4, -1.0, 0.2;
  const Vector r = beta - ref.mean;
  const double expected = -1.5 * std::log(2.0 * std::numbers::pi) - 0.5 * std::log(ref.cov.determinant()) -
                          0.5 * r.dot(ref.cov.inverse() * r);
  CHECK(log_cond_beta_density(cn, beta) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("w draws use |x_i^T beta| as the tilt") {
  const Dataset data = small_data();
  Vector beta(3);
  beta << 0.5, -1.0, 0.8;
  Rng rng(11, 0);
  std::vector<RunningStats> stats(5);
  for (int k = 0; k < 40000; ++k) {
    const AuxVector w = sample_w(data, beta, rng);
    for (int i = 0; i < 5; ++i) stats[i].add(w.values()[i]);
  }
  for (int i = 0; i < 5; ++i) {
    const double d = std::abs(data.X().row(i).dot(beta));
    const double mean = d == 0.0 ? 0.25 : std::tanh(0.5 * d) / (2.0 * d);
    CHECK(std::abs(stats[i].mean() - mean) < 4.0 * stats[i].standard_error());
  }
}

TEST_CASE("conditional w log density factorizes over observations") {
  const Dataset data = small_data();
  Vector beta(3);
  beta << 0.5, -1.0, 0.8;
  Vector w(5);
  w << 0.2, 0.05, 1.3, 0.4, 0.9;
  double expected = 0.0;
  for (int i = 0; i < 5; ++i) expected += std::log(oracle::pg(w[i], std::abs(data.X().row(i).dot(beta))));
  CHECK(log_cond_w_density(data, beta, AuxVector(w)) == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("logistic MLE solves the score equation") {
  const Dataset data = small_data();
  // no hyperplane separates or weakly separates the labels, so the MLE is finite
  const Vector beta = logistic_mle(data);
  const Vector prob = (1.0 / (1.0 + (-(data.X() * beta).array()).exp())).matrix();
  const Vector score = data.X().transpose() * (data.y().cast<double>() - prob);
  CHECK(score.cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("logistic MLE reports separable data") {
  Matrix X(4, 2);
  X << 1, -2, 1, -1, 1, 1, 1, 2;
  Eigen::VectorXi y(4);
  y << 0, 0, 1, 1;
  CHECK(throws_code(ErrorCode::kNumerical, [&] { logistic_mle(Dataset(X, y)); }));
}
