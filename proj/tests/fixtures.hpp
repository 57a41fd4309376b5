#pragma once

// Shared regression fixture: the two-user tall-channel instance whose joint
// waterfilling map is provably not a contraction (its Lipschitz constant
// exceeds 1), together with the two probing covariance matrices.

#include "iwfa/channel.hpp"
#include "iwfa/waterfill.hpp"

namespace fixtures {

inline iwfa::InterferenceChannel tall_noncontractive_channel() {
  using iwfa::CMat;
  using iwfa::Complex;
  CMat h11(3, 2), h21(3, 2);
  h11 << Complex(0.5458, 0.0819), Complex(-0.5449, 1.8701),
      Complex(-2.1758, 0.7811), Complex(-1.9082, 0.9013),
      Complex(-1.0132, -1.1376), Complex(-1.8198, -0.1200);
  h21 << Complex(0.5865, 0.4392), Complex(1.4387, -2.2133),
      Complex(1.5959, -0.2853), Complex(-1.5410, -0.2285),
      Complex(-0.1035, 2.0967), Complex(-0.3196, 1.0228);

  iwfa::InterferenceChannel ch;
  for (int i = 0; i < 2; ++i) {
    iwfa::InterferenceChannel::User u;
    u.n_tx = 2;
    u.n_rx = 3;
    u.power = 10.0;
    u.noise_cov = CMat::Identity(3, 3);
    ch.users.push_back(u);
  }
  ch.h = {{h11, h21}, {h21, h11}};
  ch.validate();
  return ch;
}

inline iwfa::CMat probe_covariance_1() {
  iwfa::CMat q(2, 2);
  q << 9.9175, -0.8946, -0.8946, 0.0825;
  return q;
}

inline iwfa::CMat probe_covariance_2() {
  iwfa::CMat q(2, 2);
  q << 8.5842, -1.2150, -1.2150, 1.4158;
  return q;
}

}  // namespace fixtures
