#include <doctest.h>

#include <cstring>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pgspec/pgspec.h"

namespace {

nlohmann::json take(char* s) {
  nlohmann::json j = nlohmann::json::parse(s);
  pgs_string_free(s);
  return j;
}

}  // namespace

TEST_CASE("german data through the C API") {
  pgs_dataset* data = nullptr;
  REQUIRE(pgs_dataset_load_german(PGSPEC_GERMAN_DATA, 0, &data) == PGS_OK);
  size_t n = 0, p = 0, pos = 0;
  CHECK(pgs_dataset_shape(data, &n, &p, &pos) == PGS_OK);
  CHECK(n == 1000);
  CHECK(p == 49);
  CHECK(pos == 700);
  std::uint64_t f1 = 0, f2 = 0;
  CHECK(pgs_dataset_fingerprint(data, &f1) == PGS_OK);
  pgs_dataset* again = nullptr;
  REQUIRE(pgs_dataset_load_german(PGSPEC_GERMAN_DATA, 0, &again) == PGS_OK);
  CHECK(pgs_dataset_fingerprint(again, &f2) == PGS_OK);
  CHECK(f1 == f2);
  pgs_dataset_free(again);
  pgs_dataset_free(data);
}

TEST_CASE("errors carry a status and a message") {
  pgs_dataset* data = nullptr;
  CHECK(pgs_dataset_load_german("/nonexistent/german.data", 0, &data) == PGS_IO);
  CHECK(data == nullptr);
  CHECK(std::strlen(pgs_last_error()) > 0);
  CHECK(std::string(pgs_status_name(PGS_IO)) == "io");

  CHECK(pgs_dataset_shape(nullptr, nullptr, nullptr, nullptr) == PGS_INVALID_ARGUMENT);

  const double B[] = {1.0, 2.0, 2.0, 1.0};
  const double b[] = {0.0, 0.0};
  pgs_prior* prior = nullptr;
  CHECK(pgs_prior_create(b, B, 2, &prior) == PGS_INVALID_ARGUMENT);

  const double X[] = {1.0, 1.0};
  const int y[] = {0, 3};
  CHECK(pgs_dataset_create(X, y, 2, 1, &data) == PGS_INVALID_ARGUMENT);

  pgs_auxiliary* h = nullptr;
  CHECK(pgs_auxiliary_from_json("{not json", &h) == PGS_PARSE);

  // success clears the message
  CHECK(pgs_prior_isotropic(2, 0.0, 1.0, &prior) == PGS_OK);
  CHECK(std::string(pgs_last_error()).empty());
  pgs_prior_free(prior);
}

TEST_CASE("chain, tuning and estimation on a small problem") {
  const double X[] = {1, 0.5, 1, -1.0, 1, 0.2, 1, 1.4, 1, -0.3, 1, 0.9, 1, -1.2, 1, 0.1};
  const int y[] = {1, 0, 0, 1, 0, 1, 0, 1};
  pgs_dataset* data = nullptr;
  REQUIRE(pgs_dataset_create(X, y, 8, 2, &data) == PGS_OK);
  pgs_prior* prior = nullptr;
  REQUIRE(pgs_prior_isotropic(2, 0.0, 10.0, &prior) == PGS_OK);

  double mle[2] = {0, 0};
  CHECK(pgs_dataset_mle(data, mle) == PGS_OK);

  pgs_chain_options copts;
  pgs_chain_options_default(&copts);
  CHECK(copts.total_iterations == 25000);
  CHECK(copts.burn_in == 5000);
  copts.total_iterations = 2000;
  copts.burn_in = 200;
  copts.seed = 7;
  copts.progress_every = 500;
  int calls = 0;
  char* summary = nullptr;
  REQUIRE(pgs_run_chain(data, prior, &copts,
                        [](const char* phase, uint64_t, uint64_t total, void* user) {
                          CHECK(std::string(phase) == "chain");
                          CHECK(total == 2000);
                          ++*static_cast<int*>(user);
                        },
                        &calls, &summary) == PGS_OK);
  CHECK(calls == 4);
  const auto s = take(summary);
  CHECK(s["iterations"] == 2000);
  CHECK(s["burn_in"] == 200);
  CHECK(s["seed"] == 7);
  CHECK(s["mean"].size() == 2);

  pgs_auxiliary* h = nullptr;
  REQUIRE(pgs_auxiliary_tune(data, prior, &copts, 5.0, nullptr, nullptr, &h, nullptr) == PGS_OK);
  char* hjson = nullptr;
  REQUIRE(pgs_auxiliary_to_json(h, &hjson) == PGS_OK);
  const auto hj = nlohmann::json::parse(hjson);
  CHECK(hj["dof"] == 5.0);
  CHECK(hj["location"] == s["mean"]);
  pgs_auxiliary* h2 = nullptr;
  REQUIRE(pgs_auxiliary_from_json(hjson, &h2) == PGS_OK);
  pgs_string_free(hjson);

  pgs_estimator_options eopts;
  pgs_estimator_options_default(&eopts);
  CHECK(eopts.l == 5);
  CHECK(eopts.N == 100000);
  eopts.l = 2;
  eopts.N = 2000;
  eopts.seed = 3;
  const uint64_t snaps[] = {1024};
  eopts.snapshots = snaps;
  eopts.n_snapshots = 1;
  char* g1 = nullptr;
  char* g2 = nullptr;
  REQUIRE(pgs_estimate_gap(data, prior, h, &eopts, nullptr, nullptr, &g1) == PGS_OK);
  REQUIRE(pgs_estimate_gap(data, prior, h2, &eopts, nullptr, nullptr, &g2) == PGS_OK);
  const auto e1 = take(g1);
  const auto e2 = take(g2);
  CHECK(e1 == e2);
  CHECK(e1["config"]["l"] == 2);
  CHECK(e1["config"]["N"] == 2000);
  CHECK(e1["config"]["nu"] == 5.0);
  CHECK(e1["n_terms"] == 2000);
  CHECK(e1["snapshots"].size() == 1);
  CHECK(e1.contains("gap_lower_bound"));

  eopts.N = 1;
  char* bad = nullptr;
  CHECK(pgs_estimate_gap(data, prior, h, &eopts, nullptr, nullptr, &bad) == PGS_INVALID_ARGUMENT);
  CHECK(bad == nullptr);

  pgs_auxiliary_free(h2);
  pgs_auxiliary_free(h);
  pgs_prior_free(prior);
  pgs_dataset_free(data);
}

TEST_CASE("monotonicity helper") {
  const unsigned l[] = {1, 2, 3};
  const double good[] = {1.5, 1.2, 1.05};
  const double bad[] = {1.1, 1.2, 1.05};
  int ok = -1;
  CHECK(pgs_u_monotone(l, good, 3, &ok) == PGS_OK);
  CHECK(ok == 1);
  CHECK(pgs_u_monotone(l, bad, 3, &ok) == PGS_OK);
  CHECK(ok == 0);
}

TEST_CASE("birth-death demo and self checks") {
  char* json = nullptr;
  REQUIRE(pgs_bd_demo(200, 8, 2000, 1, &json) == PGS_OK);
  const auto bd = take(json);
  CHECK(bd["is_trace_class"] == true);
  CHECK(bd["levels"].size() == 8);
  CHECK(bd["lambda_star"].get<double>() > 0.0);
  CHECK(bd["reversibility_defect"].get<double>() <= 1e-12);
  CHECK(pgs_bd_demo(1, 8, 0, 1, &json) == PGS_INVALID_ARGUMENT);

  int passed = 0;
  REQUIRE(pgs_validate(20240917, &passed, &json) == PGS_OK);
  const auto v = take(json);
  CHECK(passed == 1);
  CHECK(v["checks"].size() > 10);
}
