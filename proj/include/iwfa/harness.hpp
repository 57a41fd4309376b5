#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "iwfa/channel.hpp"
#include "iwfa/contraction.hpp"
#include "iwfa/engine.hpp"

#include <nlohmann/json_fwd.hpp>

namespace iwfa {

inline constexpr const char* kVersion = "0.1.0";

// Monte Carlo experiment description, loaded from JSON. `seed` is mandatory:
// runs are never wall-clock seeded.
struct ExperimentConfig {
  std::string kind;  // probability_curves | sumrate_comparison |
                     // convergence_speed | certify | solve
  std::uint64_t seed = 0;
  int trials = 200;

  std::vector<double> d_grid;                    // probability_curves
  std::vector<std::pair<int, int>> antennas;     // (n_tx, n_rx) tuples
  std::vector<double> ratio_grid;                // sumrate: d_rq / d_qq
  double snr_db = 5.0;
  int num_users = 3;
  double path_loss_exp = 2.5;
  double cross_scale = 1.0;  // extra multiplier on cross-channel variance
  int samples = 8;           // certificate sampling budget per trial

  int taps = 6;              // convergence_speed FIR order
  int subcarriers = 16;
  int trace_iters = 50;      // per-iteration rows emitted per schedule

  double tol = 1e-8;
  int max_iter = 10000;
  std::string channel_path;  // certify/solve kinds

  std::uint64_t config_hash = 0;  // FNV-1a of the source JSON

  void validate() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
};

struct ProbabilityPoint {
  double d = 0.0;
  int n_tx = 0;
  int n_rx = 0;
  int c1_count = 0;  // sampled/exact C1: rho(S_tilde) < 1
  int c2_count = 0;  // certified: rho(S_tilde_up) < 1
  int trials = 0;
};

struct ProbabilityCurvesResult {
  std::vector<ProbabilityPoint> points;
  std::string csv;
};

struct SumratePoint {
  double ratio = 0.0;
  int n_tx = 0;
  int n_rx = 0;
  double mean_original = 0.0;
  double mean_modified = 0.0;
  int converged_trials = 0;
  int excluded_trials = 0;
};

struct SumrateResult {
  std::vector<SumratePoint> points;
  std::string summary_csv;
  std::string exceedance_csv;
};

struct ConvergenceResult {
  std::string csv;  // iter, schedule, user, mean_rate
  std::vector<int> seq_iters;  // iterations to tol, converging trials only
  std::vector<int> sim_iters;  // paired with seq_iters by trial
  int converging_trials = 0;
};

// Fraction of hex-scenario channel draws satisfying the uniqueness
// certificates, per (d, antenna tuple) grid point.
ProbabilityCurvesResult run_probability_curves(const ExperimentConfig& config);

// Mean equilibrium sum-rate of the original and modified games over i.i.d.
// flat-fading draws, plus the sum-rate exceedance table.
SumrateResult run_sumrate_comparison(const ExperimentConfig& config);

// Sequential vs simultaneous iteration rate trajectories on wideband FIR
// instances, averaged over converging trials.
ConvergenceResult run_convergence_speed(const ExperimentConfig& config);

// Runs fn(0..count-1) on worker threads; IWFA_THREADS caps the worker count.
void parallel_for(int count, const std::function<void(int)>& fn);

// Comment header stamped on every emitted CSV.
std::string csv_preamble(std::uint64_t seed, std::uint64_t config_hash);

std::uint64_t fnv1a_hash(const std::string& text);

}  // namespace iwfa
