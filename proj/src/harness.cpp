#include "iwfa/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <nlohmann/json.hpp>
#include <thread>

#include "format.hpp"
#include "iwfa/rng.hpp"

namespace iwfa {

namespace {

using detail::format_double;

std::uint64_t trial_seed(const ExperimentConfig& config, std::uint64_t point,
                         std::uint64_t trial) {
  return Rng::for_stream(config.seed, point * 1000003ULL + trial).next_u64();
}

void scale_cross_channels(InterferenceChannel& channel, double scale) {
  if (scale == 1.0) return;
  const double amp = std::sqrt(scale);
  for (int r = 0; r < channel.num_users(); ++r) {
    for (int q = 0; q < channel.num_users(); ++q) {
      if (r != q) channel.h[r][q] *= amp;
    }
  }
}

int int_field(const nlohmann::json& j, const char* key, int fallback) {
  return j.contains(key) ? j.at(key).get<int>() : fallback;
}

double double_field(const nlohmann::json& j, const char* key,
                    double fallback) {
  return j.contains(key) ? j.at(key).get<double>() : fallback;
}

}  // namespace

std::uint64_t fnv1a_hash(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string csv_preamble(std::uint64_t seed, std::uint64_t config_hash) {
  char hash_hex[17];
  std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                static_cast<unsigned long long>(config_hash));
  return "# seed=" + std::to_string(seed) + "\n# config_hash=" + hash_hex +
         "\n# version=" + kVersion + "\n";
}

void ExperimentConfig::validate() const {
  static const std::vector<std::string> kinds = {
      "probability_curves", "sumrate_comparison", "convergence_speed",
      "certify", "solve"};
  if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end()) {
    throw DomainError("unknown experiment kind: " + kind);
  }
  if (trials < 1) throw DomainError("trials must be >= 1");
  if (kind == "probability_curves" && (d_grid.empty() || antennas.empty())) {
    throw DomainError("probability_curves needs nonempty d_grid and antennas");
  }
  if (kind == "sumrate_comparison" &&
      (ratio_grid.empty() || antennas.empty())) {
    throw DomainError("sumrate_comparison needs nonempty ratio_grid and antennas");
  }
  if (kind == "convergence_speed" && antennas.empty()) {
    throw DomainError("convergence_speed needs a nonempty antennas list");
  }
  if ((kind == "certify" || kind == "solve") && channel_path.empty()) {
    throw DomainError(kind + " needs a channel path");
  }
  if (num_users < 1) throw DomainError("num_users must be >= 1");
  if (tol <= 0.0 || max_iter < 1) {
    throw DomainError("tol must be positive and max_iter >= 1");
  }
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  if (!j.contains("seed")) {
    throw DomainError("experiment config must carry an explicit seed");
  }
  c.kind = j.at("kind").get<std::string>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.trials = int_field(j, "trials", c.trials);
  if (j.contains("d_grid")) c.d_grid = j.at("d_grid").get<std::vector<double>>();
  if (j.contains("antennas")) {
    for (const auto& pair : j.at("antennas")) {
      c.antennas.emplace_back(pair.at(0).get<int>(), pair.at(1).get<int>());
    }
  }
  if (j.contains("ratio_grid")) {
    c.ratio_grid = j.at("ratio_grid").get<std::vector<double>>();
  }
  c.snr_db = double_field(j, "snr_db", c.snr_db);
  c.num_users = int_field(j, "num_users", c.num_users);
  c.path_loss_exp = double_field(j, "path_loss_exp", c.path_loss_exp);
  c.cross_scale = double_field(j, "cross_scale", c.cross_scale);
  c.samples = int_field(j, "samples", c.samples);
  c.taps = int_field(j, "taps", c.taps);
  c.subcarriers = int_field(j, "subcarriers", c.subcarriers);
  c.trace_iters = int_field(j, "trace_iters", c.trace_iters);
  c.tol = double_field(j, "tol", c.tol);
  c.max_iter = int_field(j, "max_iter", c.max_iter);
  if (j.contains("channel")) c.channel_path = j.at("channel").get<std::string>();
  c.config_hash = fnv1a_hash(j.dump());
  c.validate();
  return c;
}

void parallel_for(int count, const std::function<void(int)>& fn) {
  int workers = static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  if (const char* cap = std::getenv("IWFA_THREADS")) {
    const int limit = std::atoi(cap);
    if (limit >= 1) workers = std::min(workers, limit);
  }
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int wkr = 0; wkr < workers; ++wkr) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  }
  for (std::thread& t : pool) t.join();
}

ProbabilityCurvesResult run_probability_curves(const ExperimentConfig& config) {
  config.validate();
  ProbabilityCurvesResult result;
  std::uint64_t point_index = 0;
  for (const auto& [n_tx, n_rx] : config.antennas) {
    for (double d : config.d_grid) {
      ProbabilityPoint point;
      point.d = d;
      point.n_tx = n_tx;
      point.n_rx = n_rx;
      point.trials = config.trials;

      std::vector<int> c1(config.trials, 0), c2(config.trials, 0);
      const std::uint64_t pt = point_index++;
      parallel_for(config.trials, [&](int t) {
        HexScenario scenario;
        scenario.d = d;
        scenario.n_tx = n_tx;
        scenario.n_rx = n_rx;
        scenario.snr_db = config.snr_db;
        scenario.seed = trial_seed(config, pt, static_cast<std::uint64_t>(t));
        InterferenceChannel channel = generate_hex_scenario(scenario);
        scale_cross_channels(channel, config.cross_scale);
        const ContractionReport rep =
            check_conditions(channel, RVec::Ones(channel.num_users()),
                             config.samples, scenario.seed);
        c1[t] = rep.rho_s_tilde < 1.0 ? 1 : 0;
        c2[t] = rep.c2 ? 1 : 0;
      });
      for (int t = 0; t < config.trials; ++t) {
        point.c1_count += c1[t];
        point.c2_count += c2[t];
      }
      result.points.push_back(point);
    }
  }

  std::string csv = csv_preamble(config.seed, config.config_hash);
  csv += "d,nT,nR,P_C1,P_C2,trials,seed\n";
  for (const ProbabilityPoint& p : result.points) {
    csv += format_double(p.d) + "," + std::to_string(p.n_tx) + "," +
           std::to_string(p.n_rx) + "," +
           format_double(static_cast<double>(p.c1_count) / p.trials) + "," +
           format_double(static_cast<double>(p.c2_count) / p.trials) + "," +
           std::to_string(p.trials) + "," + std::to_string(config.seed) + "\n";
  }
  result.csv = std::move(csv);
  return result;
}

SumrateResult run_sumrate_comparison(const ExperimentConfig& config) {
  config.validate();
  SumrateResult result;
  const double power = std::pow(10.0, config.snr_db / 10.0);

  struct TrialOutcome {
    bool both_converged = false;
    double sum_original = 0.0;
    double sum_modified = 0.0;
  };
  std::vector<std::vector<TrialOutcome>> outcomes;

  std::uint64_t point_index = 0;
  for (const auto& [n_tx, n_rx] : config.antennas) {
    for (double ratio : config.ratio_grid) {
      const double cross_gain =
          config.cross_scale * std::pow(ratio, -config.path_loss_exp);
      SumratePoint point;
      point.ratio = ratio;
      point.n_tx = n_tx;
      point.n_rx = n_rx;

      std::vector<TrialOutcome> per_trial(config.trials);
      const std::uint64_t pt = point_index++;
      parallel_for(config.trials, [&](int t) {
        const std::vector<UserDims> dims(config.num_users, UserDims{n_tx, n_rx});
        const InterferenceChannel channel = generate_iid_rayleigh(
            config.num_users, dims, cross_gain,
            trial_seed(config, 5000 + pt, static_cast<std::uint64_t>(t)),
            power);
        const CovarianceProfile start = uniform_profile(channel);
        const Schedule sched =
            simultaneous_schedule(config.num_users, config.max_iter);
        const IterationTrace orig = run_iwfa(channel, sched, start,
                                             Game::original, config.tol,
                                             config.max_iter);
        const IterationTrace mod = run_iwfa(channel, sched, start,
                                            Game::modified, config.tol,
                                            config.max_iter);
        TrialOutcome& out = per_trial[t];
        out.both_converged = orig.converged && mod.converged;
        if (out.both_converged) {
          out.sum_original = sum_rate(channel, orig.final_profile);
          out.sum_modified = sum_rate(channel, mod.final_profile);
        }
      });

      for (const TrialOutcome& out : per_trial) {
        if (out.both_converged) {
          ++point.converged_trials;
          point.mean_original += out.sum_original;
          point.mean_modified += out.sum_modified;
        } else {
          ++point.excluded_trials;
        }
      }
      if (point.converged_trials > 0) {
        point.mean_original /= point.converged_trials;
        point.mean_modified /= point.converged_trials;
      }
      result.points.push_back(point);
      outcomes.push_back(std::move(per_trial));
    }
  }

  std::string summary = csv_preamble(config.seed, config.config_hash);
  summary +=
      "ratio,nT,nR,mean_sumrate_original,mean_sumrate_modified,"
      "converged_trials,excluded_trials,trials,seed\n";
  for (const SumratePoint& p : result.points) {
    summary += format_double(p.ratio) + "," + std::to_string(p.n_tx) + "," +
               std::to_string(p.n_rx) + "," + format_double(p.mean_original) +
               "," + format_double(p.mean_modified) + "," +
               std::to_string(p.converged_trials) + "," +
               std::to_string(p.excluded_trials) + "," +
               std::to_string(config.trials) + "," +
               std::to_string(config.seed) + "\n";
  }
  result.summary_csv = std::move(summary);

  std::string exceed = csv_preamble(config.seed, config.config_hash);
  exceed += "ratio,nT,nR,threshold,P_exceed_original,P_exceed_modified\n";
  for (std::size_t i = 0; i < result.points.size(); ++i) {
    const SumratePoint& p = result.points[i];
    std::vector<double> orig, mod;
    for (const TrialOutcome& out : outcomes[i]) {
      if (!out.both_converged) continue;
      orig.push_back(out.sum_original);
      mod.push_back(out.sum_modified);
    }
    if (orig.empty()) continue;
    const double lo = std::min(*std::min_element(orig.begin(), orig.end()),
                               *std::min_element(mod.begin(), mod.end()));
    const double hi = std::max(*std::max_element(orig.begin(), orig.end()),
                               *std::max_element(mod.begin(), mod.end()));
    constexpr int kThresholds = 15;
    for (int k = 0; k < kThresholds; ++k) {
      const double thr = lo + (hi - lo) * k / (kThresholds - 1);
      const auto exceed_frac = [&](const std::vector<double>& v) {
        const auto n = std::count_if(v.begin(), v.end(),
                                     [&](double x) { return x >= thr; });
        return static_cast<double>(n) / static_cast<double>(v.size());
      };
      exceed += format_double(p.ratio) + "," + std::to_string(p.n_tx) + "," +
                std::to_string(p.n_rx) + "," + format_double(thr) + "," +
                format_double(exceed_frac(orig)) + "," +
                format_double(exceed_frac(mod)) + "\n";
    }
  }
  result.exceedance_csv = std::move(exceed);
  return result;
}

ConvergenceResult run_convergence_speed(const ExperimentConfig& config) {
  config.validate();
  ConvergenceResult result;
  const double power = std::pow(10.0, config.snr_db / 10.0);
  const auto [n_tx, n_rx] = config.antennas.front();

  struct TrialOutcome {
    bool converged = false;
    int seq_iters = 0;
    int sim_iters = 0;
    std::vector<std::vector<double>> seq_rates, sim_rates;  // iter x user
  };
  std::vector<TrialOutcome> per_trial(config.trials);

  parallel_for(config.trials, [&](int t) {
    const InterferenceChannel channel = generate_fir_wideband(
        config.num_users, UserDims{n_tx, n_rx}, config.taps,
        config.subcarriers,
        trial_seed(config, 9000, static_cast<std::uint64_t>(t)),
        config.cross_scale, power);
    const CovarianceProfile start = uniform_profile(channel);
    const IterationTrace seq = run_iwfa(
        channel, sequential_schedule(config.num_users, config.max_iter), start,
        Game::original, config.tol, config.max_iter);
    const IterationTrace sim = run_iwfa(
        channel, simultaneous_schedule(config.num_users, config.max_iter),
        start, Game::original, config.tol, config.max_iter);
    TrialOutcome& out = per_trial[t];
    out.converged = seq.converged && sim.converged;
    out.seq_iters = seq.iterations;
    out.sim_iters = sim.iterations;
    out.seq_rates = seq.rates;
    out.sim_rates = sim.rates;
  });

  for (const TrialOutcome& out : per_trial) {
    if (!out.converged) continue;
    ++result.converging_trials;
    result.seq_iters.push_back(out.seq_iters);
    result.sim_iters.push_back(out.sim_iters);
  }

  std::string csv = csv_preamble(config.seed, config.config_hash);
  csv += "iter,schedule,user,mean_rate\n";
  const auto emit = [&](const char* name, bool sequential) {
    for (int n = 0; n < config.trace_iters; ++n) {
      for (int u = 0; u < config.num_users; ++u) {
        double mean = 0.0;
        int count = 0;
        for (const TrialOutcome& out : per_trial) {
          if (!out.converged) continue;
          const auto& rates = sequential ? out.seq_rates : out.sim_rates;
          // After convergence the rate is stationary; hold the last value.
          const std::size_t idx =
              std::min<std::size_t>(n, rates.size() - 1);
          mean += rates[idx][u];
          ++count;
        }
        if (count > 0) mean /= count;
        csv += std::to_string(n + 1) + "," + name + "," +
               std::to_string(u + 1) + "," + format_double(mean) + "\n";
      }
    }
  };
  emit("sequential", true);
  emit("simultaneous", false);
  result.csv = std::move(csv);
  return result;
}

}  // namespace iwfa
