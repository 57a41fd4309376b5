#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <string>

#include <CLI11.hpp>

#include "iwfa/channel.hpp"
#include "iwfa/contraction.hpp"
#include "iwfa/engine.hpp"
#include "iwfa/harness.hpp"
#include "iwfa/rng.hpp"
#include "iwfa/waterfill.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw iwfa::DomainError("cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw iwfa::DomainError("malformed JSON in " + path + ": " + e.what());
  }
  return j;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw iwfa::DomainError("cannot open output file: " + path);
  out << text;
  if (!out) throw iwfa::DomainError("write failed: " + path);
}

void emit(const std::string& out_dir, const std::string& name,
          const std::string& text) {
  if (out_dir.empty()) {
    std::cout << text;
    return;
  }
  std::filesystem::create_directories(out_dir);
  write_text(out_dir + "/" + name, text);
}

struct CommonOpts {
  std::string config;
  std::string out_dir;
  std::uint64_t seed = 0;
  double tol = 1e-8;
  int max_iter = 10000;
  int trials = 0;  // 0 = keep config value
  std::string schedule = "sim";
  int staleness = 2;
  std::string game = "original";
  std::string weights = "ones";
};

int run_certify(const CommonOpts& opt) {
  const iwfa::InterferenceChannel channel =
      iwfa::InterferenceChannel::from_json(load_json(opt.config));
  iwfa::RVec w = iwfa::RVec::Ones(channel.num_users());
  if (opt.weights == "perron") {
    w = iwfa::perron_weights(iwfa::build_S(channel));
  }
  const iwfa::ContractionReport report =
      iwfa::check_conditions(channel, w, 16, opt.seed);
  emit(opt.out_dir, "report.json", report.to_json().dump(2) + "\n");
  return kExitOk;
}

int run_solve(const CommonOpts& opt) {
  const iwfa::InterferenceChannel channel =
      iwfa::InterferenceChannel::from_json(load_json(opt.config));
  const int nq = channel.num_users();
  iwfa::Schedule sched;
  if (opt.schedule == "seq") {
    sched = iwfa::sequential_schedule(nq, opt.max_iter);
  } else if (opt.schedule == "sim") {
    sched = iwfa::simultaneous_schedule(nq, opt.max_iter);
  } else if (opt.schedule == "async") {
    sched = iwfa::random_async_schedule(nq, opt.max_iter, opt.staleness,
                                        opt.seed);
  } else {
    throw iwfa::DomainError("unknown schedule: " + opt.schedule);
  }
  const iwfa::Game game = opt.game == "modified" ? iwfa::Game::modified
                                                 : iwfa::Game::original;
  if (opt.game != "original" && opt.game != "modified") {
    throw iwfa::DomainError("unknown game: " + opt.game);
  }
  const iwfa::IterationTrace trace =
      iwfa::run_iwfa(channel, sched, iwfa::uniform_profile(channel), game,
                     opt.tol, opt.max_iter);
  emit(opt.out_dir, "trace.csv", trace.to_csv());
  if (!opt.out_dir.empty()) {
    write_text(opt.out_dir + "/trace.json", trace.to_json().dump(2) + "\n");
  }
  return kExitOk;
}

int run_experiment(const CommonOpts& opt, bool seed_given) {
  json j = load_json(opt.config);
  if (opt.trials > 0) j["trials"] = opt.trials;
  if (seed_given) j["seed"] = opt.seed;
  const iwfa::ExperimentConfig config = iwfa::ExperimentConfig::from_json(j);

  if (config.kind == "probability_curves") {
    emit(opt.out_dir, "probability_curves.csv",
         iwfa::run_probability_curves(config).csv);
  } else if (config.kind == "sumrate_comparison") {
    const iwfa::SumrateResult res = iwfa::run_sumrate_comparison(config);
    emit(opt.out_dir, "sumrate_summary.csv", res.summary_csv);
    if (!opt.out_dir.empty()) {
      write_text(opt.out_dir + "/sumrate_exceedance.csv", res.exceedance_csv);
    }
  } else if (config.kind == "convergence_speed") {
    emit(opt.out_dir, "convergence_speed.csv",
         iwfa::run_convergence_speed(config).csv);
  } else if (config.kind == "certify") {
    CommonOpts sub = opt;
    sub.config = config.channel_path;
    sub.seed = config.seed;
    return run_certify(sub);
  } else {  // solve
    CommonOpts sub = opt;
    sub.config = config.channel_path;
    sub.seed = config.seed;
    sub.tol = config.tol;
    sub.max_iter = config.max_iter;
    return run_solve(sub);
  }
  return kExitOk;
}

struct GenOpts {
  std::string kind = "iid";
  std::string out;
  int users = 2;
  int n_tx = 2;
  int n_rx = 2;
  double cross_gain = 1.0;
  double d = 0.5;
  double snr_db = 5.0;
  int taps = 6;
  int subcarriers = 16;
  double power = 10.0;
  double noise_var = 1.0;
  std::uint64_t seed = 0;
};

int run_gen(const GenOpts& opt) {
  iwfa::InterferenceChannel channel;
  if (opt.kind == "iid") {
    const std::vector<iwfa::UserDims> dims(
        opt.users, iwfa::UserDims{opt.n_tx, opt.n_rx});
    channel = iwfa::generate_iid_rayleigh(opt.users, dims, opt.cross_gain,
                                          opt.seed, opt.power, opt.noise_var);
  } else if (opt.kind == "hex") {
    iwfa::HexScenario scenario;
    scenario.d = opt.d;
    scenario.n_tx = opt.n_tx;
    scenario.n_rx = opt.n_rx;
    scenario.snr_db = opt.snr_db;
    scenario.seed = opt.seed;
    channel = iwfa::generate_hex_scenario(scenario);
  } else if (opt.kind == "wideband") {
    channel = iwfa::generate_fir_wideband(
        opt.users, iwfa::UserDims{opt.n_tx, opt.n_rx}, opt.taps,
        opt.subcarriers, opt.seed, opt.cross_gain, opt.power, opt.noise_var);
  } else {
    throw iwfa::DomainError("unknown channel kind: " + opt.kind);
  }
  write_text(opt.out, channel.to_json().dump(2) + "\n");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MIMO iterative waterfilling: equilibrium solver, uniqueness "
               "certificates, and Monte Carlo experiments"};
  app.require_subcommand(1);

  CommonOpts opt;
  GenOpts gen;

  CLI::App* certify = app.add_subcommand(
      "certify", "Evaluate uniqueness/convergence certificates of a channel");
  certify->add_option("--config", opt.config, "Channel JSON path")->required();
  certify->add_option("--out", opt.out_dir, "Output directory");
  certify->add_option("--seed", opt.seed, "Sampling seed");
  certify->add_option("--weights", opt.weights, "Weight vector: ones|perron")
      ->check(CLI::IsMember({"ones", "perron"}));

  CLI::App* solve = app.add_subcommand(
      "solve", "Run asynchronous iterative waterfilling to the equilibrium");
  solve->add_option("--config", opt.config, "Channel JSON path")->required();
  solve->add_option("--out", opt.out_dir, "Output directory");
  solve->add_option("--seed", opt.seed, "Schedule seed");
  solve->add_option("--tol", opt.tol, "Fixed-point residual tolerance");
  solve->add_option("--max-iter", opt.max_iter, "Iteration cap");
  solve->add_option("--schedule", opt.schedule, "seq|sim|async")
      ->check(CLI::IsMember({"seq", "sim", "async"}));
  solve->add_option("--staleness", opt.staleness, "Async staleness bound B");
  solve->add_option("--game", opt.game, "original|modified")
      ->check(CLI::IsMember({"original", "modified"}));

  CLI::App* experiment =
      app.add_subcommand("experiment", "Run a Monte Carlo experiment config");
  experiment->add_option("--config", opt.config, "Experiment JSON path")
      ->required();
  experiment->add_option("--out", opt.out_dir, "Output directory");
  CLI::Option* seed_opt =
      experiment->add_option("--seed", opt.seed, "Override config seed");
  experiment->add_option("--trials", opt.trials, "Override config trials");

  CLI::App* generate =
      app.add_subcommand("gen", "Generate a channel JSON file");
  generate->add_option("--kind", gen.kind, "iid|hex|wideband")
      ->check(CLI::IsMember({"iid", "hex", "wideband"}));
  generate->add_option("--out", gen.out, "Output file")->required();
  generate->add_option("--users", gen.users, "Number of users");
  generate->add_option("--ntx", gen.n_tx, "Transmit antennas");
  generate->add_option("--nrx", gen.n_rx, "Receive antennas");
  generate->add_option("--cross-gain", gen.cross_gain, "Cross-link variance");
  generate->add_option("--d", gen.d, "Hex corner-to-MT normalized distance");
  generate->add_option("--snr", gen.snr_db, "SNR in dB (hex)");
  generate->add_option("--taps", gen.taps, "FIR order (wideband)");
  generate->add_option("--subcarriers", gen.subcarriers, "DFT size (wideband)");
  generate->add_option("--power", gen.power, "Per-user power budget");
  generate->add_option("--noise-var", gen.noise_var, "Noise variance");
  generate->add_option("--seed", gen.seed, "Generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (certify->parsed()) return run_certify(opt);
    if (solve->parsed()) return run_solve(opt);
    if (experiment->parsed()) return run_experiment(opt, seed_opt->count() > 0);
    return run_gen(gen);
  } catch (const iwfa::DomainError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const iwfa::DimensionError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return kExitNumeric;
  }
}
