#pragma once

#include <vector>

#include "iwfa/channel.hpp"
#include "iwfa/numerics.hpp"
#include "iwfa/rng.hpp"

namespace iwfa {

// Joint strategy: one transmit covariance per user, PSD with
// trace(Q_q) = P_q (power constraint met with equality).
struct CovarianceProfile {
  std::vector<CMat> q;

  void validate(const InterferenceChannel& channel) const;
};

struct WaterfillResult {
  CMat covariance;
  double water_level = 0.0;
  int active_modes = 0;
};

struct WaterLevel {
  double mu = 0.0;
  RVec powers;
};

// MUI-plus-noise covariance seen by receiver q:
// R_nq + sum_{r != q} H_rq Q_r H_rq^H.
CMat mui_covariance(const InterferenceChannel& channel,
                    const CovarianceProfile& profile, int q);

// Achievable rate of link q in nats: log det(I + H^H R^{-1} H Q).
double rate(const InterferenceChannel& channel,
            const CovarianceProfile& profile, int q);

// Exact water level over positive channel gains d0: powers
// p_i = (mu - 1/d0_i)^+ with sum p_i = total_power. Active-set enumeration
// over sorted inverse gains; no bisection.
WaterLevel water_level_solve(const RVec& d0, double total_power);

// Single-user best response: waterfilling over the positive eigenvalues of
// H_qq^H R_{-q}^{-1} H_qq.
WaterfillResult best_response_wf(const InterferenceChannel& channel,
                                 const CovarianceProfile& profile, int q,
                                 double rank_tol = kDefaultRankTol);

// Frobenius projection of a Hermitian matrix onto
// {X PSD : trace(X) = total_power}.
CMat project_onto_simplex_psd(const CMat& x0, double total_power);

// Power-independent upper bound on the projection offset c_q:
// P_q + (rho(R_nq) + Q P_max max_r rho(H_rq^H H_rq)) / lambda_min+(H_qq^H H_qq).
double c_q_bound(const InterferenceChannel& channel, int q);

// Best response written as a projection:
// [-((H^H R^{-1} H)^# + c_q P_null(H))]_Q. Requires c_q at or above the
// data-dependent threshold P_q + max_i 1/d_i.
CMat wf_projection_form(const InterferenceChannel& channel,
                        const CovarianceProfile& profile, int q, double c_q,
                        double rank_tol = kDefaultRankTol);

// Best response of the modified game: [-(H^# R_{-q} H^#H)]_Q, equivalently
// waterfilling over (H^# R_{-q} H^#H)^{-1}. Requires full column-rank H_qq.
WaterfillResult best_response_modified(const InterferenceChannel& channel,
                                       const CovarianceProfile& profile, int q,
                                       double rank_tol = kDefaultRankTol);

// Payoff of the modified game: log det(I + (H^# R_{-q} H^#H)^{-1} Q).
double rate_modified(const InterferenceChannel& channel,
                     const CovarianceProfile& profile, int q,
                     double rank_tol = kDefaultRankTol);

// Uniform-power feasible profile: Q_q = (P_q / n_Tq) I.
CovarianceProfile uniform_profile(const InterferenceChannel& channel);

// Random feasible profile: random Hermitian matrices projected onto the
// PSD trace simplex.
CovarianceProfile random_feasible_profile(const InterferenceChannel& channel,
                                          Rng& rng);

// log det(I + A Q) for Hermitian PSD A, Q, computed through the eigenvalues
// of Q^{1/2} A Q^{1/2}.
double log_det_rate(const CMat& a, const CMat& q_cov);

}  // namespace iwfa
