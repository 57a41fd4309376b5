#include "iwfa/channel.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <nlohmann/json.hpp>

#include "iwfa/rng.hpp"

namespace iwfa {

namespace {

nlohmann::json matrix_to_json(const CMat& m) {
  // Row-major array of [re, im] pairs.
  nlohmann::json rows = nlohmann::json::array();
  nlohmann::json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  nlohmann::json data = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      data.push_back({m(i, k).real(), m(i, k).imag()});
    }
  }
  j["data"] = std::move(data);
  return j;
}

CMat matrix_from_json(const nlohmann::json& j) {
  const Eigen::Index rows = j.at("rows").get<Eigen::Index>();
  const Eigen::Index cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw DomainError("channel json: matrix data length mismatch");
  }
  CMat m(rows, cols);
  Eigen::Index idx = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index k = 0; k < cols; ++k, ++idx) {
      m(i, k) = Complex(data[idx][0].get<double>(), data[idx][1].get<double>());
    }
  }
  return m;
}

CMat random_complex_matrix(Eigen::Index rows, Eigen::Index cols, double variance,
                           Rng& rng) {
  CMat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index k = 0; k < cols; ++k) {
      m(i, k) = rng.cgaussian(variance);
    }
  }
  return m;
}

}  // namespace

void InterferenceChannel::validate() const {
  const int q_count = num_users();
  if (q_count == 0) throw DomainError("channel: no users");
  if (static_cast<int>(h.size()) != q_count) {
    throw DimensionError("channel: H table row count != Q");
  }
  for (int q = 0; q < q_count; ++q) {
    const User& u = users[q];
    if (u.n_tx < 1 || u.n_rx < 1) throw DomainError("channel: antenna counts must be >= 1");
    if (!(u.power > 0.0)) throw DomainError("channel: power budget must be positive");
    if (u.noise_cov.rows() != u.n_rx || u.noise_cov.cols() != u.n_rx) {
      throw DimensionError("channel: noise covariance shape mismatch");
    }
    const HermitianEigen eig = hermitian_eig(u.noise_cov);
    if (eig.eigenvalues(0) <= 0.0) {
      throw DomainError("channel: noise covariance must be positive definite");
    }
    if (static_cast<int>(h[q].size()) != q_count) {
      throw DimensionError("channel: H table column count != Q");
    }
  }
  for (int r = 0; r < q_count; ++r) {
    for (int q = 0; q < q_count; ++q) {
      const CMat& m = h[r][q];
      if (m.rows() != users[q].n_rx || m.cols() != users[r].n_tx) {
        throw DimensionError("channel: H(r,q) shape inconsistent with user dims");
      }
    }
  }
}

nlohmann::json InterferenceChannel::to_json() const {
  nlohmann::json j;
  j["Q"] = num_users();
  nlohmann::json ju = nlohmann::json::array();
  for (const User& u : users) {
    ju.push_back({{"nT", u.n_tx},
                  {"nR", u.n_rx},
                  {"P", u.power},
                  {"Rn", matrix_to_json(u.noise_cov)}});
  }
  j["users"] = std::move(ju);
  nlohmann::json jh;
  for (int r = 0; r < num_users(); ++r) {
    for (int q = 0; q < num_users(); ++q) {
      jh[std::to_string(r + 1) + "," + std::to_string(q + 1)] =
          matrix_to_json(h[r][q]);
    }
  }
  j["H"] = std::move(jh);
  return j;
}

InterferenceChannel InterferenceChannel::from_json(const nlohmann::json& j) {
  InterferenceChannel ch;
  const int q_count = j.at("Q").get<int>();
  if (q_count < 1) throw DomainError("channel json: Q must be >= 1");
  for (const auto& ju : j.at("users")) {
    InterferenceChannel::User u;
    u.n_tx = ju.at("nT").get<int>();
    u.n_rx = ju.at("nR").get<int>();
    u.power = ju.at("P").get<double>();
    u.noise_cov = matrix_from_json(ju.at("Rn"));
    ch.users.push_back(std::move(u));
  }
  if (ch.num_users() != q_count) {
    throw DomainError("channel json: users array length != Q");
  }
  ch.h.assign(q_count, std::vector<CMat>(q_count));
  for (int r = 0; r < q_count; ++r) {
    for (int q = 0; q < q_count; ++q) {
      const std::string key =
          std::to_string(r + 1) + "," + std::to_string(q + 1);
      ch.h[r][q] = matrix_from_json(j.at("H").at(key));
    }
  }
  ch.validate();
  return ch;
}

InterferenceChannel generate_iid_rayleigh(int num_users,
                                          const std::vector<UserDims>& dims,
                                          double cross_gain, std::uint64_t seed,
                                          double power, double noise_var) {
  if (cross_gain < 0.0) throw DomainError("generate_iid_rayleigh: cross_gain must be >= 0");
  if (static_cast<int>(dims.size()) != num_users) {
    throw DimensionError("generate_iid_rayleigh: dims size != Q");
  }
  Rng rng(seed);
  InterferenceChannel ch;
  for (int q = 0; q < num_users; ++q) {
    InterferenceChannel::User u;
    u.n_tx = dims[q].n_tx;
    u.n_rx = dims[q].n_rx;
    u.power = power;
    u.noise_cov = noise_var * CMat::Identity(u.n_rx, u.n_rx);
    ch.users.push_back(std::move(u));
  }
  ch.h.assign(num_users, std::vector<CMat>(num_users));
  for (int r = 0; r < num_users; ++r) {
    for (int q = 0; q < num_users; ++q) {
      const double variance = (r == q) ? 1.0 : cross_gain;
      if (variance == 0.0) {
        ch.h[r][q] = CMat::Zero(dims[q].n_rx, dims[r].n_tx);
      } else {
        ch.h[r][q] =
            random_complex_matrix(dims[q].n_rx, dims[r].n_tx, variance, rng);
      }
    }
  }
  ch.validate();
  return ch;
}

InterferenceChannel generate_hex_scenario(const HexScenario& scenario) {
  if (!(scenario.d >= 0.0 && scenario.d < 1.0)) {
    throw DomainError("generate_hex_scenario: d must be in [0,1)");
  }
  if (scenario.n_tx < 1 || scenario.n_rx < 1) {
    throw DomainError("generate_hex_scenario: antenna counts must be >= 1");
  }
  constexpr int kCells = 7;
  constexpr double kDistanceFloor = 0.05;

  // Unit-circumradius hexagons: the center cell at the origin plus its six
  // neighbors at center distance sqrt(3). Each BS sits at the cell center;
  // the MT lies on the segment from a cell corner to the center, at fraction
  // d from the corner (so its distance to the BS is 1 - d, floored).
  std::vector<Eigen::Vector2d> bs(kCells);
  bs[0] = {0.0, 0.0};
  const double cd = std::sqrt(3.0);
  for (int k = 0; k < 6; ++k) {
    const double ang = M_PI / 6.0 + k * M_PI / 3.0;  // edge-midpoint directions
    bs[k + 1] = {cd * std::cos(ang), cd * std::sin(ang)};
  }
  std::vector<Eigen::Vector2d> mt(kCells);
  const double bs_dist = std::max(1.0 - scenario.d, kDistanceFloor);
  for (int k = 0; k < kCells; ++k) {
    // Corner direction: toward the corner the cell shares with its neighbors
    // (angle 0 in the cell's local frame).
    const Eigen::Vector2d corner_dir(1.0, 0.0);
    mt[k] = bs[k] + bs_dist * corner_dir;
  }

  const double noise_var = std::pow(10.0, -scenario.snr_db / 10.0);
  Rng rng(scenario.seed);
  InterferenceChannel ch;
  for (int q = 0; q < kCells; ++q) {
    InterferenceChannel::User u;
    u.n_tx = scenario.n_tx;
    u.n_rx = scenario.n_rx;
    u.power = 1.0;
    u.noise_cov = noise_var * CMat::Identity(scenario.n_rx, scenario.n_rx);
    ch.users.push_back(std::move(u));
  }
  ch.h.assign(kCells, std::vector<CMat>(kCells));
  for (int r = 0; r < kCells; ++r) {
    for (int q = 0; q < kCells; ++q) {
      const double dist =
          std::max((mt[q] - bs[r]).norm(), kDistanceFloor);
      const double variance = std::pow(dist, -scenario.path_loss_exp);
      ch.h[r][q] = random_complex_matrix(scenario.n_rx, scenario.n_tx,
                                         variance, rng);
    }
  }
  ch.validate();
  return ch;
}

InterferenceChannel generate_fir_wideband(int num_users, UserDims antennas,
                                          int taps, int subcarriers,
                                          std::uint64_t seed, double cross_gain,
                                          double power, double noise_var) {
  if (subcarriers < taps) {
    throw DomainError("generate_fir_wideband: subcarriers must be >= taps");
  }
  if (taps < 0) throw DomainError("generate_fir_wideband: taps must be >= 0");
  Rng rng(seed);
  const int nt = antennas.n_tx;
  const int nr = antennas.n_rx;
  const int n_sub = subcarriers;

  InterferenceChannel ch;
  for (int q = 0; q < num_users; ++q) {
    InterferenceChannel::User u;
    u.n_tx = nt * n_sub;
    u.n_rx = nr * n_sub;
    u.power = power;
    u.noise_cov = noise_var * CMat::Identity(u.n_rx, u.n_rx);
    ch.users.push_back(std::move(u));
  }
  ch.h.assign(num_users, std::vector<CMat>(num_users));
  for (int r = 0; r < num_users; ++r) {
    for (int q = 0; q < num_users; ++q) {
      const double variance = (r == q) ? 1.0 : cross_gain;
      // taps+1 i.i.d. CN taps per antenna pair.
      std::vector<CMat> tap_mats(taps + 1);
      for (int l = 0; l <= taps; ++l) {
        tap_mats[l] = (variance == 0.0)
                          ? CMat::Zero(nr, nt)
                          : random_complex_matrix(nr, nt, variance, rng);
      }
      CMat big = CMat::Zero(nr * n_sub, nt * n_sub);
      for (int k = 0; k < n_sub; ++k) {
        CMat freq = CMat::Zero(nr, nt);
        for (int l = 0; l <= taps; ++l) {
          const double phase = -2.0 * M_PI * k * l / n_sub;
          freq += tap_mats[l] * Complex(std::cos(phase), std::sin(phase));
        }
        big.block(k * nr, k * nt, nr, nt) = freq;
      }
      ch.h[r][q] = std::move(big);
    }
  }
  ch.validate();
  return ch;
}

}  // namespace iwfa
