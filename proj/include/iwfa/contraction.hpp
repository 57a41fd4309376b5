#pragma once

#include <cstdint>
#include <vector>

#include "iwfa/channel.hpp"
#include "iwfa/waterfill.hpp"

#include <nlohmann/json_fwd.hpp>

namespace iwfa {

enum class TriState { certified_true, certified_false, undetermined };

const char* to_string(TriState t);

// Certificate matrices and condition flags for uniqueness of the equilibrium
// and convergence of the asynchronous iteration.
struct ContractionReport {
  RMat s;                // exact, all channel structures
  RMat s_up;             // certified upper bound (tall rows)
  RMat s_tilde;          // row-wise mixture using the sampled estimate
  RMat s_tilde_up;       // row-wise mixture using the certified upper bound
  RMat s_sampled_lower;  // sampled lower estimate of the tight tall-row entries
  RVec innr;             // interference-plus-noise to noise ratio, >= 1

  double rho_s = 0.0;
  double rho_s_up = 0.0;
  double rho_s_tilde = 0.0;     // estimate when tall rows present
  double rho_s_tilde_up = 0.0;

  // True when every row of s_tilde is exact (all directs full row-rank), so
  // rho_s_tilde is not an estimate.
  bool s_tilde_exact = false;

  TriState c1 = TriState::undetermined;  // rho(S~) < 1
  bool c2 = false;                       // rho(S~^up) < 1 (certified)
  bool c7 = false;                       // rho(S) < 1 (modified game)
  // Per-user weighted row/column sum conditions under weight vector w:
  // c3/c4 use S entries (fat case), c5/c6 use the innr-weighted bounds.
  std::vector<bool> c3, c4, c5, c6;
  RVec w;

  nlohmann::json to_json() const;
};

// Channel after the transmit-side reduction of rank-deficient direct links.
struct ReducedChannel {
  InterferenceChannel channel;
  std::vector<CMat> basis;          // per-user V_{q,1} (identity when intact)
  std::vector<int> reduced_users;   // indices with reduced transmit dimension

  // Lift a strategy of the reduced game back to the original dimensions.
  CovarianceProfile lift(const CovarianceProfile& reduced) const;
};

// [S]_qr = rho(H_rq^H H_qq^#H H_qq^# H_rq) off the diagonal.
RMat build_S(const InterferenceChannel& channel);

// innr_q = rho(R_nq + sum_{r != q} P_r H_rq H_rq^H) / lambda_min(R_nq).
RVec build_innr(const InterferenceChannel& channel);

// [S^up]_qr = innr_q rho(H_rq^H H_rq) rho(H_qq^#H H_qq^#) off the diagonal.
RMat build_S_up(const InterferenceChannel& channel);

// Contraction factor alpha_rq evaluated at the interference covariance of a
// given intermediate profile. Requires full column-rank H_qq.
double sample_alpha(const InterferenceChannel& channel, int q, int r,
                    const CovarianceProfile& delta_profile);

// Elementwise max of sample_alpha over random convex combinations of
// feasible profiles: a sampled lower bound on the tight certificate entries.
RMat estimate_S_P_lower(const InterferenceChannel& channel, int samples,
                        std::uint64_t seed);

// Row q uses S entries when H_qq is full row-rank, otherwise the supplied
// sampled estimate (s_tilde) or the certified upper bound (s_tilde_up).
RMat build_S_tilde(const InterferenceChannel& channel, const RMat& sampled_lower);
RMat build_S_tilde_up(const InterferenceChannel& channel);

ContractionReport check_conditions(const InterferenceChannel& channel,
                                   const RVec& w, int samples = 16,
                                   std::uint64_t seed = 0);

ReducedChannel reduce_rank_deficient(const InterferenceChannel& channel,
                                     double rank_tol = kDefaultRankTol);

// Jacobian of F_q(Q_{-q}) = (H_qq^H R_{-q}^{-1} H_qq)^{-1}: horizontally
// stacked blocks conj(G_rq) (x) G_rq over r != q in ascending order.
CMat jacobian_F(const InterferenceChannel& channel, int q,
                const CovarianceProfile& profile);

// [[Re J, -Im J], [Im J, Re J]] realification of a complex Jacobian.
RMat realify_jacobian(const CMat& j);

// Central differences of the realified F_q along every real/imaginary
// coordinate of vec(Q_{-q}). Step must lie in [1e-7, 1e-4].
RMat finite_diff_jacobian(const InterferenceChannel& channel, int q,
                          const CovarianceProfile& profile, double step);

struct MeanValueResult {
  bool holds = false;
  double witness_t = 0.0;
  double lhs = 0.0;    // ||F(Y) - F(X)||_F
  double bound = 0.0;  // max_t ||D F||_2 * ||Y - X||_F
};

// Grid check of the matrix mean-value inequality for F_q between two
// profiles; returns the maximizing grid point.
MeanValueResult mean_value_check(const InterferenceChannel& channel, int q,
                                 const CovarianceProfile& profile1,
                                 const CovarianceProfile& profile2,
                                 int t_grid);

// max_q (1/w_q) sum_r |A_qr| w_r.
double weighted_matrix_norm(const RMat& a, const RVec& w);

// max_q ||blocks_q||_F / w_q.
double block_max_norm(const std::vector<CMat>& blocks, const RVec& w);

// Positive eigenvector of a nonnegative matrix associated with its spectral
// radius, plus a small epsilon; falls back to all-ones when degenerate.
RVec perron_weights(const RMat& s);

}  // namespace iwfa
