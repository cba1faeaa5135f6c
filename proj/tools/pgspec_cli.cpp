// Command-line front end. Talks to the library only through pgspec.h.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pgspec/pgspec.h"

#ifndef PGSPEC_DEFAULT_DATA
#define PGSPEC_DEFAULT_DATA "data/german.data"
#endif

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct Failure {
  pgs_status status;
  std::string message;
};

void check(pgs_status status) {
  if (status != PGS_OK) throw Failure{status, pgs_last_error()};
}

struct DatasetDeleter {
  void operator()(pgs_dataset* d) const { pgs_dataset_free(d); }
};
struct PriorDeleter {
  void operator()(pgs_prior* p) const { pgs_prior_free(p); }
};
struct AuxDeleter {
  void operator()(pgs_auxiliary* h) const { pgs_auxiliary_free(h); }
};
struct StringDeleter {
  void operator()(char* s) const { pgs_string_free(s); }
};
using DatasetPtr = std::unique_ptr<pgs_dataset, DatasetDeleter>;
using PriorPtr = std::unique_ptr<pgs_prior, PriorDeleter>;
using AuxPtr = std::unique_ptr<pgs_auxiliary, AuxDeleter>;
using StringPtr = std::unique_ptr<char, StringDeleter>;

nlohmann::json take_json(char* raw) {
  StringPtr owned(raw);
  return nlohmann::json::parse(owned.get());
}

struct Common {
  std::string data = PGSPEC_DEFAULT_DATA;
  bool standardize = false;
  double prior_mean = 0.0;
  double prior_var = 10.0;
  std::uint64_t seed = 1;
  std::string output;
  bool quiet = false;
};

struct Tuning {
  std::uint64_t iterations = 25'000;
  std::uint64_t burn_in = 5'000;
  std::uint64_t seed = 0;  // 0: use the command seed
  std::uint64_t progress_every = 5'000;
  std::string init = "mle";
  double nu = 5.0;
  std::string load;
  std::string save;
};

struct Estimation {
  unsigned l = 5;
  std::uint64_t N = 100'000;
  unsigned workers = 1;
  double confidence = 0.95;
  double progress_interval = 10.0;
  std::vector<std::uint64_t> snapshots;
};

void add_common(CLI::App* cmd, Common& c, bool needs_data) {
  if (needs_data) {
    cmd->add_option("--data", c.data, "Path to german.data")->capture_default_str();
    cmd->add_flag("--standardize", c.standardize, "Standardize the numeric covariates");
    cmd->add_option("--prior-mean", c.prior_mean, "Prior mean b (every coordinate)")->capture_default_str();
    cmd->add_option("--prior-var", c.prior_var, "Prior variance: B = prior_var * I")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
  }
  cmd->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  cmd->add_option("-o,--output", c.output, "Write the JSON result here instead of stdout");
  cmd->add_flag("-q,--quiet", c.quiet, "No progress on stderr");
}

void add_tuning(CLI::App* cmd, Tuning& t) {
  cmd->add_option("--tune-iterations", t.iterations, "Pilot chain length")->capture_default_str();
  cmd->add_option("--tune-burn-in", t.burn_in, "Pilot burn-in")->capture_default_str();
  cmd->add_option("--tune-seed", t.seed, "Pilot chain seed (0: use --seed)")->capture_default_str();
  cmd->add_option("--init", t.init, "Pilot start: mle or zero")
      ->capture_default_str()
      ->check(CLI::IsMember({"mle", "zero"}));
  cmd->add_option("--nu", t.nu, "Student's t degrees of freedom")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--auxiliary", t.load, "Load the auxiliary density from JSON instead of tuning")
      ->check(CLI::ExistingFile);
  cmd->add_option("--save-auxiliary", t.save, "Write the tuned auxiliary density as JSON");
}

void add_estimation(CLI::App* cmd, Estimation& e, bool with_l) {
  if (with_l) cmd->add_option("-l,--l", e.l, "Power l")->capture_default_str()->check(CLI::Range(1u, 1000u));
  cmd->add_option("-N,--N", e.N, "Monte Carlo sample size")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--workers", e.workers, "Worker threads")->capture_default_str()->check(CLI::Range(1u, 1024u));
  cmd->add_option("--confidence", e.confidence, "Confidence level")
      ->capture_default_str()
      ->check(CLI::Range(0.5, 0.999999));
  cmd->add_option("--progress-interval", e.progress_interval, "Seconds between progress lines")
      ->capture_default_str();
  cmd->add_option("--snapshot", e.snapshots, "Record running statistics after this many terms");
}

void progress_to_stderr(const char* phase, uint64_t done, uint64_t total, void*) {
  std::fprintf(stderr, "[%s] %llu/%llu\n", phase, static_cast<unsigned long long>(done),
               static_cast<unsigned long long>(total));
}

pgs_progress_fn progress_fn(const Common& c) { return c.quiet ? nullptr : &progress_to_stderr; }

void note(const Common& c, const std::string& msg) {
  if (!c.quiet) std::cerr << msg << '\n';
}

void emit(const Common& c, const nlohmann::json& result) {
  if (c.output.empty()) {
    std::cout << result.dump(2) << '\n';
    return;
  }
  std::ofstream out(c.output);
  if (!out) throw Failure{PGS_IO, "cannot write " + c.output};
  out << result.dump(2) << '\n';
  if (!out) throw Failure{PGS_IO, "error writing " + c.output};
}

DatasetPtr load_data(const Common& c) {
  pgs_dataset* raw = nullptr;
  check(pgs_dataset_load_german(c.data.c_str(), c.standardize ? 1 : 0, &raw));
  DatasetPtr data(raw);
  size_t n = 0, p = 0, pos = 0;
  check(pgs_dataset_shape(data.get(), &n, &p, &pos));
  note(c, "data: n=" + std::to_string(n) + " p=" + std::to_string(p) + " positives=" + std::to_string(pos));
  return data;
}

PriorPtr make_prior(const Common& c, const pgs_dataset* data) {
  size_t p = 0;
  check(pgs_dataset_shape(data, nullptr, &p, nullptr));
  pgs_prior* raw = nullptr;
  check(pgs_prior_isotropic(p, c.prior_mean, c.prior_var, &raw));
  return PriorPtr(raw);
}

AuxPtr auxiliary(const Common& c, const Tuning& t, const pgs_dataset* data, const pgs_prior* prior,
                 nlohmann::json& pilot) {
  pgs_auxiliary* raw = nullptr;
  AuxPtr h;
  if (!t.load.empty()) {
    std::ifstream in(t.load);
    std::stringstream buffer;
    buffer << in.rdbuf();
    check(pgs_auxiliary_from_json(buffer.str().c_str(), &raw));
    h.reset(raw);
    pilot = {{"auxiliary", t.load}};
  } else {
    size_t p = 0;
    check(pgs_dataset_shape(data, nullptr, &p, nullptr));
    std::vector<double> zero(p, 0.0);
    pgs_chain_options opts;
    pgs_chain_options_default(&opts);
    opts.total_iterations = t.iterations;
    opts.burn_in = t.burn_in;
    opts.seed = t.seed != 0 ? t.seed : c.seed;
    opts.init_beta = t.init == "zero" ? zero.data() : nullptr;
    opts.progress_every = t.progress_every;
    note(c, "tuning auxiliary density: " + std::to_string(t.iterations) + " iterations");
    char* summary = nullptr;
    check(pgs_auxiliary_tune(data, prior, &opts, t.nu, progress_fn(c), nullptr, &raw, &summary));
    h.reset(raw);
    const nlohmann::json s = take_json(summary);
    pilot = {{"iterations", t.iterations}, {"burn_in", t.burn_in}, {"seed", opts.seed}, {"init", t.init},
             {"kept", s.at("kept")}};
  }
  if (!t.save.empty()) {
    char* json = nullptr;
    check(pgs_auxiliary_to_json(h.get(), &json));
    StringPtr owned(json);
    std::ofstream out(t.save);
    out << owned.get() << '\n';
    if (!out) throw Failure{PGS_IO, "cannot write " + t.save};
  }
  pilot["nu"] = t.nu;
  return h;
}

nlohmann::json estimate(const Common& c, const Estimation& e, unsigned l, std::uint64_t N, const pgs_dataset* data,
                        const pgs_prior* prior, const pgs_auxiliary* h) {
  pgs_estimator_options opts;
  pgs_estimator_options_default(&opts);
  opts.l = l;
  opts.N = N;
  opts.seed = c.seed;
  opts.workers = e.workers;
  opts.confidence_level = e.confidence;
  opts.snapshots = e.snapshots.empty() ? nullptr : e.snapshots.data();
  opts.n_snapshots = e.snapshots.size();
  opts.progress_interval_seconds = e.progress_interval;
  char* json = nullptr;
  check(pgs_estimate_gap(data, prior, h, &opts, progress_fn(c), nullptr, &json));
  nlohmann::json out = take_json(json);
  if (!out.at("u_defined").get<bool>()) {
    note(c, "warning: s_hat <= 1 for l=" + std::to_string(l) + "; u is undefined (increase N or l)");
  }
  return out;
}

nlohmann::json prior_echo(const Common& c) {
  return {{"mean", c.prior_mean}, {"variance", c.prior_var}, {"data", c.data}, {"standardize", c.standardize}};
}

int run_chain_cmd(const Common& c, const Tuning& t, const std::string& draws_csv) {
  const DatasetPtr data = load_data(c);
  const PriorPtr prior = make_prior(c, data.get());
  size_t p = 0;
  check(pgs_dataset_shape(data.get(), nullptr, &p, nullptr));
  std::vector<double> zero(p, 0.0);
  pgs_chain_options opts;
  pgs_chain_options_default(&opts);
  opts.total_iterations = t.iterations;
  opts.burn_in = t.burn_in;
  opts.seed = c.seed;
  opts.init_beta = t.init == "zero" ? zero.data() : nullptr;
  opts.draws_csv = draws_csv.empty() ? nullptr : draws_csv.c_str();
  opts.progress_every = t.progress_every;
  char* json = nullptr;
  check(pgs_run_chain(data.get(), prior.get(), &opts, progress_fn(c), nullptr, &json));
  emit(c, take_json(json));
  return kExitOk;
}

int estimate_gap_cmd(const Common& c, const Tuning& t, const Estimation& e) {
  const DatasetPtr data = load_data(c);
  const PriorPtr prior = make_prior(c, data.get());
  nlohmann::json pilot;
  const AuxPtr h = auxiliary(c, t, data.get(), prior.get(), pilot);
  nlohmann::json out = estimate(c, e, e.l, e.N, data.get(), prior.get(), h.get());
  out["config"]["prior"] = prior_echo(c);
  out["config"]["tuning"] = pilot;
  emit(c, out);
  return kExitOk;
}

int sweep_cmd(const Common& c, const Tuning& t, const Estimation& e, unsigned l_min, unsigned l_max, bool table) {
  if (l_min < 1 || l_max < l_min) throw Failure{PGS_INVALID_ARGUMENT, "sweep-l: need 1 <= l-min <= l-max"};
  const DatasetPtr data = load_data(c);
  const PriorPtr prior = make_prior(c, data.get());
  nlohmann::json pilot;
  const AuxPtr h = auxiliary(c, t, data.get(), prior.get(), pilot);
  nlohmann::json rows = nlohmann::json::array();
  std::vector<unsigned> ls;
  std::vector<double> ss;
  for (unsigned l = l_min; l <= l_max; ++l) {
    note(c, "sweep: l=" + std::to_string(l));
    nlohmann::json est = estimate(c, e, l, e.N, data.get(), prior.get(), h.get());
    est.erase("config");
    est.erase("snapshots");
    if (est.at("u_defined").get<bool>()) {
      ls.push_back(l);
      ss.push_back(est.at("s_hat").get<double>());
    }
    rows.push_back(std::move(est));
  }
  int monotone = 0;
  check(pgs_u_monotone(ls.data(), ss.data(), ls.size(), &monotone));
  if (table) {
    std::ostringstream os;
    os << "l\ts_hat\ts_se\tu_hat\tu_se\n";
    for (const auto& r : rows) {
      os << r.at("l") << '\t' << r.at("s_hat") << '\t' << r.at("s_se") << '\t' << r.at("u_hat") << '\t'
         << r.at("u_se") << '\n';
    }
    std::cerr << os.str();
  }
  emit(c, {{"rows", rows},
           {"u_monotone", monotone == 1},
           {"config",
            {{"l_min", l_min},
             {"l_max", l_max},
             {"N", e.N},
             {"seed", c.seed},
             {"workers", e.workers},
             {"prior", prior_echo(c)},
             {"tuning", pilot}}}});
  return kExitOk;
}

int bd_demo_cmd(const Common& c, std::uint64_t m, unsigned l_max, std::uint64_t N) {
  char* json = nullptr;
  check(pgs_bd_demo(m, l_max, N, c.seed, &json));
  const nlohmann::json out = take_json(json);
  emit(c, out);
  const bool ok = out.at("is_trace_class").get<bool>() && out.at("reversibility_defect").get<double>() <= 1e-12 &&
                  out.at("max_pqr_defect").get<double>() <= 1e-14;
  if (!ok) note(c, "bd-demo: oracle identities failed");
  return ok ? kExitOk : kExitValidation;
}

int validate_cmd(const Common& c) {
  int passed = 0;
  char* json = nullptr;
  check(pgs_validate(c.seed, &passed, &json));
  const nlohmann::json out = take_json(json);
  for (const auto& chk : out.at("checks")) {
    note(c, std::string(chk.at("passed").get<bool>() ? "PASS " : "FAIL ") + chk.at("name").get<std::string>() +
                ": " + chk.at("detail").get<std::string>());
  }
  emit(c, out);
  return passed == 1 ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polya-Gamma Gibbs sampler and spectral gap estimation"};
  app.set_config("--config", "", "INI/TOML file mirroring the command-line flags");
  app.require_subcommand(1);

  Common common;
  Tuning tuning;
  Estimation estimation;

  std::string draws_csv;
  auto* run_chain = app.add_subcommand("run-chain", "Run the PG Gibbs sampler; print the summary JSON");
  add_common(run_chain, common, true);
  run_chain->add_option("--iterations", tuning.iterations, "Total iterations")->capture_default_str();
  run_chain->add_option("--burn-in", tuning.burn_in, "Burn-in iterations")->capture_default_str();
  run_chain->add_option("--init", tuning.init, "Start: mle or zero")
      ->capture_default_str()
      ->check(CLI::IsMember({"mle", "zero"}));
  run_chain->add_option("--draws-csv", draws_csv, "Stream kept draws to this CSV");
  run_chain->add_option("--progress-every", tuning.progress_every, "Iterations between progress lines")
      ->capture_default_str();

  auto* estimate_gap = app.add_subcommand("estimate-gap", "Estimate s_l, u_l and the spectral gap bound");
  add_common(estimate_gap, common, true);
  add_tuning(estimate_gap, tuning);
  add_estimation(estimate_gap, estimation, true);

  unsigned l_min = 1;
  unsigned l_max = 6;
  bool table = false;
  auto* sweep = app.add_subcommand("sweep-l", "Pilot estimates of u_l over a range of l");
  add_common(sweep, common, true);
  add_tuning(sweep, tuning);
  add_estimation(sweep, estimation, false);
  sweep->add_option("--l-min", l_min, "Smallest l")->capture_default_str();
  sweep->add_option("--l-max", l_max, "Largest l")->capture_default_str();
  sweep->add_flag("--table", table, "Also print a plain table on stderr");

  std::uint64_t m = 200;
  unsigned bd_l_max = 8;
  std::uint64_t bd_N = 100'000;
  auto* bd_demo = app.add_subcommand("bd-demo", "Exact birth-death oracle and discrete Monte Carlo cross-check");
  add_common(bd_demo, common, false);
  bd_demo->add_option("--m", m, "Truncation size")->capture_default_str();
  bd_demo->add_option("--l-max", bd_l_max, "Largest l")->capture_default_str();
  bd_demo->add_option("-N,--N", bd_N, "Discrete Monte Carlo draws per l (0 skips)")->capture_default_str();

  auto* validate = app.add_subcommand("validate", "Run quadrature and oracle self-checks");
  add_common(validate, common, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitRuntime;
  }

  // sweep-l defaults to a pilot-sized N unless one was given.
  if (sweep->parsed() && sweep->count("--N") == 0) estimation.N = 10'000;

  try {
    if (run_chain->parsed()) return run_chain_cmd(common, tuning, draws_csv);
    if (estimate_gap->parsed()) return estimate_gap_cmd(common, tuning, estimation);
    if (sweep->parsed()) return sweep_cmd(common, tuning, estimation, l_min, l_max, table);
    if (bd_demo->parsed()) return bd_demo_cmd(common, m, bd_l_max, bd_N);
    if (validate->parsed()) return validate_cmd(common);
  } catch (const Failure& f) {
    std::cerr << "error (" << pgs_status_name(f.status) << "): " << f.message << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}
