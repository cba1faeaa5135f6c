#include "pgspec/pgspec.h"

#include <cmath>
#include <cstring>
#include <new>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pgspec/birth_death.hpp"
#include "pgspec/credit_data.hpp"
#include "pgspec/errors.hpp"
#include "pgspec/gibbs_chain.hpp"
#include "pgspec/spectral_gap.hpp"
#include "pgspec/validation.hpp"

struct pgs_dataset {
  pgspec::Dataset data;
};

struct pgs_prior {
  pgspec::Prior prior;
};

struct pgs_auxiliary {
  pgspec::StudentT h;
};

namespace {

thread_local std::string g_last_error;

pgs_status to_status(pgspec::ErrorCode code) {
  switch (code) {
    case pgspec::ErrorCode::kInvalidArgument: return PGS_INVALID_ARGUMENT;
    case pgspec::ErrorCode::kDomain: return PGS_DOMAIN;
    case pgspec::ErrorCode::kTruncation: return PGS_TRUNCATION;
    case pgspec::ErrorCode::kNumerical: return PGS_NUMERICAL;
    case pgspec::ErrorCode::kParse: return PGS_PARSE;
    case pgspec::ErrorCode::kValidation: return PGS_VALIDATION;
    case pgspec::ErrorCode::kEncoding: return PGS_ENCODING;
    case pgspec::ErrorCode::kIo: return PGS_IO;
    case pgspec::ErrorCode::kInternal: return PGS_INTERNAL;
  }
  return PGS_INTERNAL;
}

// Runs body, translating exceptions into a status plus thread-local message.
template <class F>
pgs_status guard(F&& body) {
  g_last_error.clear();
  try {
    body();
    return PGS_OK;
  } catch (const pgspec::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const nlohmann::json::exception& e) {
    g_last_error = e.what();
    return PGS_PARSE;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return PGS_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PGS_INTERNAL;
  } catch (...) {
    g_last_error = "unknown exception";
    return PGS_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) pgspec::fail(pgspec::ErrorCode::kInvalidArgument, what);
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

pgspec::Matrix row_major(const double* values, std::size_t rows, std::size_t cols) {
  pgspec::Matrix M(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * cols + j];
  }
  return M;
}

pgspec::ChainConfig chain_config(const pgspec::Dataset& data, const pgs_chain_options* opts) {
  pgspec::ChainConfig cfg;
  cfg.total_iterations = opts->total_iterations;
  cfg.burn_in = opts->burn_in;
  cfg.seed = opts->seed;
  cfg.chain_id = opts->chain_id;
  if (opts->init_beta != nullptr) {
    cfg.init_beta = Eigen::Map<const pgspec::Vector>(opts->init_beta, data.p());
  } else {
    cfg.init_beta = pgspec::logistic_mle(data);
  }
  if (opts->draws_csv != nullptr) cfg.draws_csv = opts->draws_csv;
  return cfg;
}

pgspec::ChainProgress chain_progress(pgs_progress_fn fn, void* user) {
  if (fn == nullptr) return {};
  return [fn, user](std::uint64_t done, std::uint64_t total) { fn("chain", done, total, user); };
}

nlohmann::json finite_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}  // namespace

extern "C" {

const char* pgs_last_error(void) { return g_last_error.c_str(); }

const char* pgs_status_name(pgs_status status) {
  switch (status) {
    case PGS_OK: return "ok";
    case PGS_INVALID_ARGUMENT: return "invalid_argument";
    case PGS_DOMAIN: return "domain";
    case PGS_TRUNCATION: return "truncation";
    case PGS_NUMERICAL: return "numerical";
    case PGS_PARSE: return "parse";
    case PGS_VALIDATION: return "validation";
    case PGS_ENCODING: return "encoding";
    case PGS_IO: return "io";
    case PGS_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* pgs_version(void) { return "0.1.0"; }

void pgs_string_free(char* s) { delete[] s; }

pgs_status pgs_dataset_load_german(const char* path, int standardize_numeric, pgs_dataset** out) {
  return guard([&] {
    require(path != nullptr && out != nullptr, "pgs_dataset_load_german: null argument");
    *out = new pgs_dataset{pgspec::load_german_dataset(path, standardize_numeric != 0)};
  });
}

pgs_status pgs_dataset_create(const double* X, const int* y, size_t n, size_t p, pgs_dataset** out) {
  return guard([&] {
    require(X != nullptr && y != nullptr && out != nullptr, "pgs_dataset_create: null argument");
    Eigen::VectorXi yy = Eigen::Map<const Eigen::VectorXi>(y, static_cast<Eigen::Index>(n));
    *out = new pgs_dataset{pgspec::Dataset(row_major(X, n, p), std::move(yy))};
  });
}

void pgs_dataset_free(pgs_dataset* data) { delete data; }

pgs_status pgs_dataset_shape(const pgs_dataset* data, size_t* n, size_t* p, size_t* positives) {
  return guard([&] {
    require(data != nullptr, "pgs_dataset_shape: null dataset");
    if (n != nullptr) *n = static_cast<size_t>(data->data.n());
    if (p != nullptr) *p = static_cast<size_t>(data->data.p());
    if (positives != nullptr) *positives = static_cast<size_t>(data->data.y().sum());
  });
}

pgs_status pgs_dataset_fingerprint(const pgs_dataset* data, uint64_t* out) {
  return guard([&] {
    require(data != nullptr && out != nullptr, "pgs_dataset_fingerprint: null argument");
    *out = pgspec::dataset_fingerprint(data->data);
  });
}

pgs_status pgs_dataset_mle(const pgs_dataset* data, double* beta_out) {
  return guard([&] {
    require(data != nullptr && beta_out != nullptr, "pgs_dataset_mle: null argument");
    const pgspec::Vector beta = pgspec::logistic_mle(data->data);
    std::copy(beta.data(), beta.data() + beta.size(), beta_out);
  });
}

pgs_status pgs_prior_isotropic(size_t p, double mean, double variance, pgs_prior** out) {
  return guard([&] {
    require(out != nullptr, "pgs_prior_isotropic: null argument");
    require(p > 0, "pgs_prior_isotropic: p must be positive");
    require(variance > 0.0 && std::isfinite(variance), "pgs_prior_isotropic: variance must be positive");
    const auto pp = static_cast<Eigen::Index>(p);
    *out = new pgs_prior{pgspec::Prior(pgspec::Vector::Constant(pp, mean), variance * pgspec::Matrix::Identity(pp, pp))};
  });
}

pgs_status pgs_prior_create(const double* b, const double* B, size_t p, pgs_prior** out) {
  return guard([&] {
    require(b != nullptr && B != nullptr && out != nullptr, "pgs_prior_create: null argument");
    *out = new pgs_prior{pgspec::Prior(Eigen::Map<const pgspec::Vector>(b, static_cast<Eigen::Index>(p)),
                                       row_major(B, p, p))};
  });
}

void pgs_prior_free(pgs_prior* prior) { delete prior; }

void pgs_chain_options_default(pgs_chain_options* opts) {
  if (opts == nullptr) return;
  *opts = pgs_chain_options{};
  const pgspec::ChainConfig defaults;
  opts->total_iterations = defaults.total_iterations;
  opts->burn_in = defaults.burn_in;
}

pgs_status pgs_run_chain(const pgs_dataset* data, const pgs_prior* prior, const pgs_chain_options* opts,
                         pgs_progress_fn progress, void* user, char** summary_json) {
  return guard([&] {
    require(data != nullptr && prior != nullptr && opts != nullptr && summary_json != nullptr,
            "pgs_run_chain: null argument");
    const pgspec::ChainConfig cfg = chain_config(data->data, opts);
    const pgspec::ChainSummary summary =
        pgspec::run_chain(data->data, prior->prior, cfg, chain_progress(progress, user), opts->progress_every);
    *summary_json = dup_string(summary.to_json().dump());
  });
}

pgs_status pgs_auxiliary_tune(const pgs_dataset* data, const pgs_prior* prior, const pgs_chain_options* opts,
                              double nu, pgs_progress_fn progress, void* user, pgs_auxiliary** out,
                              char** summary_json) {
  return guard([&] {
    require(data != nullptr && prior != nullptr && opts != nullptr && out != nullptr,
            "pgs_auxiliary_tune: null argument");
    const pgspec::ChainConfig cfg = chain_config(data->data, opts);
    const pgspec::ChainSummary summary =
        pgspec::run_chain(data->data, prior->prior, cfg, chain_progress(progress, user), opts->progress_every);
    auto* h = new pgs_auxiliary{pgspec::auxiliary_from_summary(summary, nu)};
    if (summary_json != nullptr) {
      try {
        *summary_json = dup_string(summary.to_json().dump());
      } catch (...) {
        delete h;
        throw;
      }
    }
    *out = h;
  });
}

pgs_status pgs_auxiliary_create(const double* location, const double* scale, size_t p, double nu,
                                pgs_auxiliary** out) {
  return guard([&] {
    require(location != nullptr && scale != nullptr && out != nullptr, "pgs_auxiliary_create: null argument");
    *out = new pgs_auxiliary{pgspec::StudentT(Eigen::Map<const pgspec::Vector>(location, static_cast<Eigen::Index>(p)),
                                              row_major(scale, p, p), nu)};
  });
}

pgs_status pgs_auxiliary_to_json(const pgs_auxiliary* h, char** json) {
  return guard([&] {
    require(h != nullptr && json != nullptr, "pgs_auxiliary_to_json: null argument");
    const pgspec::Vector& loc = h->h.location();
    const pgspec::Matrix& C = h->h.scale();
    nlohmann::json scale = nlohmann::json::array();
    for (Eigen::Index i = 0; i < C.rows(); ++i) {
      scale.push_back(nlohmann::json::array());
      for (Eigen::Index j = 0; j < C.cols(); ++j) scale.back().push_back(C(i, j));
    }
    const nlohmann::json out = {{"location", std::vector<double>(loc.data(), loc.data() + loc.size())},
                                {"scale", scale},
                                {"dof", h->h.dof()}};
    *json = dup_string(out.dump());
  });
}

pgs_status pgs_auxiliary_from_json(const char* json, pgs_auxiliary** out) {
  return guard([&] {
    require(json != nullptr && out != nullptr, "pgs_auxiliary_from_json: null argument");
    const nlohmann::json in = nlohmann::json::parse(json);
    const auto loc = in.at("location").get<std::vector<double>>();
    const auto rows = in.at("scale").get<std::vector<std::vector<double>>>();
    const double nu = in.at("dof").get<double>();
    const std::size_t p = loc.size();
    if (rows.size() != p) pgspec::fail(pgspec::ErrorCode::kParse, "auxiliary json: scale must be p x p");
    std::vector<double> flat;
    flat.reserve(p * p);
    for (const auto& r : rows) {
      if (r.size() != p) pgspec::fail(pgspec::ErrorCode::kParse, "auxiliary json: scale must be p x p");
      flat.insert(flat.end(), r.begin(), r.end());
    }
    *out = new pgs_auxiliary{pgspec::StudentT(Eigen::Map<const pgspec::Vector>(loc.data(), static_cast<Eigen::Index>(p)),
                                              row_major(flat.data(), p, p), nu)};
  });
}

void pgs_auxiliary_free(pgs_auxiliary* h) { delete h; }

void pgs_estimator_options_default(pgs_estimator_options* opts) {
  if (opts == nullptr) return;
  *opts = pgs_estimator_options{};
  const pgspec::EstimatorConfig defaults;
  opts->l = defaults.l;
  opts->N = defaults.N;
  opts->workers = defaults.workers;
  opts->confidence_level = defaults.confidence_level;
}

pgs_status pgs_estimate_gap(const pgs_dataset* data, const pgs_prior* prior, const pgs_auxiliary* h,
                            const pgs_estimator_options* opts, pgs_progress_fn progress, void* user,
                            char** gap_json) {
  return guard([&] {
    require(data != nullptr && prior != nullptr && h != nullptr && opts != nullptr && gap_json != nullptr,
            "pgs_estimate_gap: null argument");
    require(opts->n_snapshots == 0 || opts->snapshots != nullptr, "pgs_estimate_gap: snapshots is null");
    pgspec::EstimatorConfig cfg;
    cfg.l = opts->l;
    cfg.N = opts->N;
    cfg.seed = opts->seed;
    cfg.workers = opts->workers;
    cfg.confidence_level = opts->confidence_level;
    if (opts->n_snapshots > 0) cfg.snapshots.assign(opts->snapshots, opts->snapshots + opts->n_snapshots);
    pgspec::EstimatorProgress cb;
    if (progress != nullptr) {
      cb = [progress, user](std::uint64_t done, std::uint64_t total) { progress("estimate", done, total, user); };
    }
    const pgspec::GapEstimate est =
        pgspec::estimate_s_l(data->data, prior->prior, h->h, cfg, cb, opts->progress_interval_seconds);
    nlohmann::json out = est.to_json();
    out["config"] = {{"l", cfg.l},
                     {"N", cfg.N},
                     {"seed", cfg.seed},
                     {"workers", cfg.workers},
                     {"confidence_level", cfg.confidence_level},
                     {"nu", h->h.dof()},
                     {"snapshots", cfg.snapshots},
                     {"p", data->data.p()},
                     {"n", data->data.n()}};
    *gap_json = dup_string(out.dump());
  });
}

pgs_status pgs_u_monotone(const unsigned* l, const double* s, size_t count, int* ok) {
  return guard([&] {
    require(l != nullptr && s != nullptr && ok != nullptr, "pgs_u_monotone: null argument");
    std::vector<std::pair<unsigned, double>> values;
    for (size_t i = 0; i < count; ++i) values.emplace_back(l[i], s[i]);
    *ok = pgspec::u_monotone_check(std::move(values)) ? 1 : 0;
  });
}

pgs_status pgs_bd_demo(uint64_t m, unsigned l_max, uint64_t N, uint64_t seed, char** json) {
  return guard([&] {
    require(json != nullptr, "pgs_bd_demo: null argument");
    require(m >= 2, "pgs_bd_demo: m must be at least 2");
    require(l_max >= 1, "pgs_bd_demo: l_max must be at least 1");
    const pgspec::BirthDeathSpec spec = pgspec::power_sequences();
    const pgspec::TraceSum ts = pgspec::trace_sum(spec, 1e-13);
    const pgspec::TruncatedKernel tk = pgspec::build_truncated(spec, m);
    const pgspec::Spectrum spectrum = pgspec::exact_spectrum(tk);

    double max_pqr_defect = 0.0;
    double max_r_excess = -1.0;
    for (uint64_t x = 2; x <= std::min<uint64_t>(m, 100); ++x) {
      const pgspec::Moves mv = pgspec::pqr(spec, x);
      max_pqr_defect = std::max(max_pqr_defect, std::abs(mv.p + mv.q + mv.r - 1.0));
      const double xm1 = static_cast<double>(x - 1);
      max_r_excess = std::max(max_r_excess, mv.r - 1.0 / (2.0 * xm1 * xm1));
    }

    nlohmann::json levels = nlohmann::json::array();
    const std::vector<double> uniform(m, 1.0 / static_cast<double>(m));
    for (unsigned l = 1; l <= l_max; ++l) {
      nlohmann::json row = {{"l", l}, {"s_exact", spectrum.s(l)}, {"u_exact", finite_or_null(spectrum.u(l))}};
      if (N > 0) {
        pgspec::Rng rng(seed, pgspec::stream_id(pgspec::StreamDomain::kDiscreteDraw, l));
        const pgspec::DiscreteEstimate est = pgspec::mc_estimate_s_l_discrete(spec, m, l, N, uniform, rng);
        row["mc"] = {{"s_hat", est.s_hat},
                     {"s_se", finite_or_null(est.s_se)},
                     {"z", est.se_defined ? finite_or_null((est.s_hat - spectrum.s(l)) / est.s_se) : nlohmann::json(nullptr)},
                     {"N", est.N}};
      }
      levels.push_back(std::move(row));
    }
    std::vector<double> top(spectrum.eigenvalues.begin(),
                            spectrum.eigenvalues.begin() + std::min<std::size_t>(spectrum.eigenvalues.size(), 8));
    const nlohmann::json out = {
        {"m", m},
        {"lambda_star", spectrum.lambda_star},
        {"top_eigenvalues", top},
        {"min_eigenvalue", spectrum.eigenvalues.back()},
        {"trace_truncated", tk.K.trace()},
        {"trace_sum",
         {{"value", ts.value},
          {"partial_sum", ts.partial_sum},
          {"tail_estimate", ts.tail_estimate},
          {"error_estimate", ts.error_estimate},
          {"tail_bound", ts.tail_bound},
          {"terms", ts.terms},
          {"warning", ts.warning}}},
        {"is_trace_class", ts.is_trace_class},
        {"reversibility_defect", pgspec::reversibility_defect(tk)},
        {"max_pqr_defect", max_pqr_defect},
        {"max_r_minus_bound", max_r_excess},
        {"levels", levels},
        {"seed", seed}};
    *json = dup_string(out.dump());
  });
}

pgs_status pgs_validate(uint64_t seed, int* all_passed, char** json) {
  return guard([&] {
    require(all_passed != nullptr && json != nullptr, "pgs_validate: null argument");
    pgspec::ValidationOptions options;
    options.seed = seed;
    const auto checks = pgspec::run_self_checks(options);
    bool ok = true;
    for (const auto& c : checks) ok = ok && c.passed;
    *all_passed = ok ? 1 : 0;
    *json = dup_string(nlohmann::json{{"passed", ok}, {"seed", seed}, {"checks", pgspec::checks_to_json(checks)}}.dump());
  });
}

}  // extern "C"
