#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "iwfa/numerics.hpp"

#include <nlohmann/json_fwd.hpp>

namespace iwfa {

struct UserDims {
  int n_tx = 1;
  int n_rx = 1;
};

// Q-user MIMO interference channel: direct and cross channel matrices,
// per-user noise covariances and power budgets.
struct InterferenceChannel {
  struct User {
    int n_tx = 1;
    int n_rx = 1;
    double power = 1.0;   // energy per transmission
    CMat noise_cov;       // n_rx x n_rx, Hermitian PD
  };

  std::vector<User> users;
  // h[r][q] is the channel from transmitter r to receiver q,
  // shape n_rx(q) x n_tx(r).
  std::vector<std::vector<CMat>> h;

  int num_users() const { return static_cast<int>(users.size()); }
  const CMat& H(int r, int q) const { return h[r][q]; }

  // Checks all type invariants; throws on violation.
  void validate() const;

  nlohmann::json to_json() const;
  static InterferenceChannel from_json(const nlohmann::json& j);
};

// Hex-grid downlink scenario (7 cells, one BS->MT link per cell). `d` is the
// mobile's normalized position on the segment from the cell corner toward
// the base station: d -> 1 puts the MT next to its BS (weak interference),
// d -> 0 puts it at the shared corner (strong interference).
struct HexScenario {
  double d = 0.5;
  int n_tx = 2;
  int n_rx = 2;
  double snr_db = 5.0;
  std::uint64_t seed = 0;
  double path_loss_exp = 2.0;
};

// I.i.d. Rayleigh channel: direct entries CN(0,1), cross entries
// CN(0, cross_gain), noise covariance noise_var * I, budget `power` per user.
InterferenceChannel generate_iid_rayleigh(int num_users,
                                          const std::vector<UserDims>& dims,
                                          double cross_gain, std::uint64_t seed,
                                          double power = 1.0,
                                          double noise_var = 1.0);

InterferenceChannel generate_hex_scenario(const HexScenario& scenario);

// Frequency-selective channel realized as block-diagonal MIMO over
// `subcarriers` DFT bins of (taps+1)-tap FIR links. Resulting per-pair
// channel matrices have shape (subcarriers*n_rx) x (subcarriers*n_tx).
InterferenceChannel generate_fir_wideband(int num_users, UserDims antennas,
                                          int taps, int subcarriers,
                                          std::uint64_t seed,
                                          double cross_gain = 1.0,
                                          double power = 1.0,
                                          double noise_var = 1.0);

}  // namespace iwfa
