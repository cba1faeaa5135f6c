#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>

#include <nlohmann/json.hpp>

#include "pgspec/logit_model.hpp"

namespace pgspec {

struct ChainConfig {
  std::uint64_t total_iterations = 25'000;
  std::uint64_t burn_in = 5'000;
  std::uint64_t seed = 0;
  std::uint64_t chain_id = 0;
  Vector init_beta;
  // Stream every kept draw to this CSV (header beta_1..beta_p).
  std::optional<std::filesystem::path> draws_csv;
  // Hold kept draws in memory; refused above keep_budget doubles.
  bool keep_draws = false;
  std::uint64_t keep_budget = 50'000'000;

  void validate(Eigen::Index p) const;
};

struct ChainSummary {
  Vector mean;
  Matrix covariance;  // 1/(m-1) normalizer, zeros when m < 2
  std::uint64_t kept = 0;
  std::uint64_t iterations = 0;
  std::uint64_t burn_in = 0;
  std::uint64_t seed = 0;
  std::optional<Matrix> draws;  // kept x p

  nlohmann::json to_json() const;
};

// beta -> w -> beta' (one PG Gibbs iteration).
Vector gibbs_step(const Dataset& data, const Prior& prior, const Vector& beta, Rng& rng);

// w -> beta -> w' (one step of the conjugate chain on R_+^n).
AuxVector conjugate_step(const Dataset& data, const Prior& prior, const AuxVector& w, Rng& rng);

using ChainProgress = std::function<void(std::uint64_t done, std::uint64_t total)>;

ChainSummary run_chain(const Dataset& data, const Prior& prior, const ChainConfig& cfg,
                       const ChainProgress& progress = {}, std::uint64_t progress_every = 0);

}  // namespace pgspec
