#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "iwfa/channel.hpp"
#include "iwfa/waterfill.hpp"

#include <nlohmann/json_fwd.hpp>

namespace iwfa {

enum class Game { original, modified };

// Update plan of the asynchronous iteration. Iteration n draws its inputs
// from past states: staleness[n](r, q) is the state index tau whose copy of
// user r's covariance user q reads while updating at iteration n; tau = n
// means current information. State 0 is the initial profile; state n is the
// profile after n iterations.
struct Schedule {
  std::vector<std::vector<int>> update_sets;  // users updating at iteration n
  std::vector<Eigen::MatrixXi> staleness;     // (r, q) -> tau, per iteration
  int max_staleness = 0;                      // B: n - tau <= B

  int horizon() const { return static_cast<int>(update_sets.size()); }

  // Checks staleness bounds and that every user updates at least once in
  // every window of max(B, Q) consecutive iterations.
  void validate(int num_users) const;
};

Schedule sequential_schedule(int num_users, int horizon);
Schedule simultaneous_schedule(int num_users, int horizon);
Schedule random_async_schedule(int num_users, int horizon, int max_staleness,
                               std::uint64_t seed);

struct IterationTrace {
  std::vector<double> residuals;             // per iteration
  std::vector<std::vector<double>> rates;    // per iteration, per user
  std::vector<double> wall_seconds;          // per iteration
  CovarianceProfile final_profile;
  bool converged = false;
  bool limit_cycle = false;
  int iterations = 0;

  nlohmann::json to_json() const;
  std::string to_csv() const;  // n, residual, rate_1..rate_Q, sum_rate
};

// Totally asynchronous iterative waterfilling: at each iteration the users
// in the update set best-respond against the (possibly stale) profile
// prescribed by the schedule. Stops when the fixed-point residual drops to
// tol or the schedule horizon / max_iter is exhausted.
IterationTrace run_iwfa(const InterferenceChannel& channel,
                        const Schedule& schedule,
                        const CovarianceProfile& initial, Game game,
                        double tol = 1e-8, int max_iter = 10000);

// Block-max norm (unit weights) of Q_q - BR_q(Q_{-q}); zero iff equilibrium.
double ne_residual(const InterferenceChannel& channel,
                   const CovarianceProfile& profile, Game game);

double sum_rate(const InterferenceChannel& channel,
                const CovarianceProfile& profile);

}  // namespace iwfa
