#include "iwfa/engine.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <nlohmann/json.hpp>
#include <numeric>

#include "format.hpp"
#include "iwfa/rng.hpp"

namespace iwfa {

namespace {

CMat best_response(const InterferenceChannel& channel,
                   const CovarianceProfile& profile, int q, Game game) {
  return game == Game::original
             ? best_response_wf(channel, profile, q).covariance
             : best_response_modified(channel, profile, q).covariance;
}

double user_rate(const InterferenceChannel& channel,
                 const CovarianceProfile& profile, int q, Game game) {
  return game == Game::original ? rate(channel, profile, q)
                                : rate_modified(channel, profile, q);
}

}  // namespace

void Schedule::validate(int num_users) const {
  const int n_iter = horizon();
  if (static_cast<int>(staleness.size()) != n_iter) {
    throw DimensionError("schedule: one staleness map per iteration required");
  }
  for (int n = 0; n < n_iter; ++n) {
    if (update_sets[n].empty()) {
      throw DomainError("schedule: empty update set at iteration " +
                        std::to_string(n));
    }
    for (int u : update_sets[n]) {
      if (u < 0 || u >= num_users) {
        throw DomainError("schedule: user index out of range");
      }
    }
    const Eigen::MatrixXi& tau = staleness[n];
    if (tau.rows() != num_users || tau.cols() != num_users) {
      throw DimensionError("schedule: staleness map must be Q x Q");
    }
    if ((tau.array() > n).any() || ((n - tau.array()) > max_staleness).any() ||
        (tau.array() < 0).any()) {
      throw DomainError("schedule: staleness bound violated at iteration " +
                        std::to_string(n));
    }
  }
  // Eventual-update surrogate: each user at least once per sliding window.
  const int window = std::max(max_staleness, num_users);
  std::vector<int> last(num_users, -1);
  for (int n = 0; n < n_iter; ++n) {
    for (int u : update_sets[n]) last[u] = n;
    if (n >= window - 1) {
      for (int u = 0; u < num_users; ++u) {
        if (last[u] < n - window + 1) {
          throw DomainError("schedule: user " + std::to_string(u) +
                            " idle for a full window ending at iteration " +
                            std::to_string(n));
        }
      }
    }
  }
}

Schedule sequential_schedule(int num_users, int horizon) {
  Schedule s;
  s.max_staleness = 0;
  for (int n = 0; n < horizon; ++n) {
    s.update_sets.push_back({n % num_users});
    s.staleness.push_back(Eigen::MatrixXi::Constant(num_users, num_users, n));
  }
  return s;
}

Schedule simultaneous_schedule(int num_users, int horizon) {
  Schedule s;
  s.max_staleness = 0;
  std::vector<int> all(num_users);
  std::iota(all.begin(), all.end(), 0);
  for (int n = 0; n < horizon; ++n) {
    s.update_sets.push_back(all);
    s.staleness.push_back(Eigen::MatrixXi::Constant(num_users, num_users, n));
  }
  return s;
}

Schedule random_async_schedule(int num_users, int horizon, int max_staleness,
                               std::uint64_t seed) {
  if (max_staleness < 0) throw DomainError("max_staleness must be >= 0");
  Schedule s;
  s.max_staleness = max_staleness;
  Rng rng = Rng::for_stream(seed, 0xA5D0u);
  const int window = std::max(max_staleness, num_users);
  std::vector<int> last(num_users, -1);
  for (int n = 0; n < horizon; ++n) {
    std::vector<int> set;
    for (int u = 0; u < num_users; ++u) {
      const bool overdue = n - last[u] >= window;  // last = -1 covers startup
      if (overdue || rng.uniform() < 0.5) set.push_back(u);
    }
    if (set.empty()) {
      set.push_back(static_cast<int>(
          rng.uniform_int(static_cast<std::uint64_t>(num_users))));
    }
    for (int u : set) last[u] = n;
    s.update_sets.push_back(std::move(set));
    Eigen::MatrixXi tau(num_users, num_users);
    const int lo = std::max(0, n - max_staleness);
    for (int r = 0; r < num_users; ++r) {
      for (int q = 0; q < num_users; ++q) {
        tau(r, q) =
            lo + static_cast<int>(rng.uniform_int(
                     static_cast<std::uint64_t>(n - lo + 1)));
      }
    }
    s.staleness.push_back(std::move(tau));
  }
  return s;
}

double ne_residual(const InterferenceChannel& channel,
                   const CovarianceProfile& profile, Game game) {
  double worst = 0.0;
  for (int q = 0; q < channel.num_users(); ++q) {
    const CMat br = best_response(channel, profile, q, game);
    worst = std::max(worst, (profile.q[q] - br).norm());
  }
  return worst;
}

double sum_rate(const InterferenceChannel& channel,
                const CovarianceProfile& profile) {
  double total = 0.0;
  for (int q = 0; q < channel.num_users(); ++q) {
    total += rate(channel, profile, q);
  }
  return total;
}

IterationTrace run_iwfa(const InterferenceChannel& channel,
                        const Schedule& schedule,
                        const CovarianceProfile& initial, Game game,
                        double tol, int max_iter) {
  const int nq = channel.num_users();
  schedule.validate(nq);
  initial.validate(channel);

  IterationTrace trace;
  CovarianceProfile current = initial;
  // States 0..n; a ring of the last B+1 suffices for the staleness lookups.
  std::deque<CovarianceProfile> history{current};
  const std::size_t depth = static_cast<std::size_t>(schedule.max_staleness) + 1;

  const int steps = std::min(schedule.horizon(), max_iter);
  constexpr int kCycleWindow = 50;
  for (int n = 0; n < steps; ++n) {
    const auto t0 = std::chrono::steady_clock::now();
    const Eigen::MatrixXi& tau = schedule.staleness[n];
    const int oldest = n + 1 - static_cast<int>(history.size());
    CovarianceProfile next = current;
    for (int q : schedule.update_sets[n]) {
      CovarianceProfile stale;
      for (int r = 0; r < nq; ++r) {
        stale.q.push_back(history[tau(r, q) - oldest].q[r]);
      }
      next.q[q] = best_response(channel, stale, q, game);
    }
    current = std::move(next);
    history.push_back(current);
    if (history.size() > depth) history.pop_front();

    trace.residuals.push_back(ne_residual(channel, current, game));
    std::vector<double> rates(nq);
    for (int q = 0; q < nq; ++q) {
      rates[q] = user_rate(channel, current, q, game);
    }
    trace.rates.push_back(std::move(rates));
    trace.wall_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count());
    trace.iterations = n + 1;

    if (trace.residuals.back() <= tol) {
      trace.converged = true;
      break;
    }
    const int m = static_cast<int>(trace.residuals.size());
    if (m > kCycleWindow) {
      const double then = trace.residuals[m - 1 - kCycleWindow];
      const double best = *std::min_element(trace.residuals.end() - kCycleWindow,
                                            trace.residuals.end());
      if (best >= then) {
        trace.limit_cycle = true;
        break;
      }
    }
  }
  trace.final_profile = current;
  return trace;
}

nlohmann::json IterationTrace::to_json() const {
  nlohmann::json j;
  j["converged"] = converged;
  j["limit_cycle"] = limit_cycle;
  j["iterations"] = iterations;
  j["residuals"] = residuals;
  j["rates"] = rates;
  j["wall_seconds"] = wall_seconds;
  nlohmann::json profile = nlohmann::json::array();
  for (const CMat& q : final_profile.q) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < q.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index k = 0; k < q.cols(); ++k) {
        row.push_back({q(i, k).real(), q(i, k).imag()});
      }
      rows.push_back(row);
    }
    profile.push_back(rows);
  }
  j["final_profile"] = profile;
  return j;
}

std::string IterationTrace::to_csv() const {
  const std::size_t nq = rates.empty() ? 0 : rates.front().size();
  std::string out = "n,residual";
  for (std::size_t q = 0; q < nq; ++q) {
    out += ",rate_" + std::to_string(q + 1);
  }
  out += ",sum_rate\n";
  for (std::size_t n = 0; n < residuals.size(); ++n) {
    out += std::to_string(n + 1) + "," + detail::format_double(residuals[n]);
    double total = 0.0;
    for (double r : rates[n]) {
      out += "," + detail::format_double(r);
      total += r;
    }
    out += "," + detail::format_double(total) + "\n";
  }
  return out;
}

}  // namespace iwfa
