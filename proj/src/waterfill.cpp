#include "iwfa/waterfill.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace iwfa {

namespace {

// A = H^H R^{-1} H, symmetrized. R must be Hermitian PD.
CMat whitened_gram(const CMat& h, const CMat& r) {
  const CMat rinv_h = Eigen::LLT<CMat>(r).solve(h);
  CMat a = h.adjoint() * rinv_h;
  return 0.5 * (a + a.adjoint());
}

}  // namespace

void CovarianceProfile::validate(const InterferenceChannel& channel) const {
  if (static_cast<int>(q.size()) != channel.num_users()) {
    throw DimensionError("profile: user count mismatch");
  }
  for (int i = 0; i < channel.num_users(); ++i) {
    const int nt = channel.users[i].n_tx;
    if (q[i].rows() != nt || q[i].cols() != nt) {
      throw DimensionError("profile: covariance shape mismatch");
    }
    const HermitianEigen eig = hermitian_eig(q[i]);
    if (eig.eigenvalues(0) < -1e-9) {
      throw DomainError("profile: covariance not PSD");
    }
    const double p = channel.users[i].power;
    if (std::abs(q[i].trace().real() - p) > 1e-8 * std::max(1.0, p)) {
      throw DomainError("profile: trace != power budget");
    }
  }
}

CMat mui_covariance(const InterferenceChannel& channel,
                    const CovarianceProfile& profile, int q) {
  const InterferenceChannel::User& u = channel.users[q];
  CMat r = u.noise_cov;
  for (int rr = 0; rr < channel.num_users(); ++rr) {
    if (rr == q) continue;
    const CMat& h = channel.H(rr, q);
    r += h * profile.q[rr] * h.adjoint();
  }
  return 0.5 * (r + r.adjoint());
}

double log_det_rate(const CMat& a, const CMat& q_cov) {
  // Q^{1/2} from the (clamped) eigendecomposition.
  const HermitianEigen eq = hermitian_eig(q_cov);
  const RVec sqrt_vals = eq.eigenvalues.cwiseMax(0.0).cwiseSqrt();
  const CMat q_half =
      eq.eigenvectors * sqrt_vals.asDiagonal() * eq.eigenvectors.adjoint();
  const CMat m = q_half * a * q_half;
  const HermitianEigen em = hermitian_eig(0.5 * (m + m.adjoint()));
  double total = 0.0;
  for (Eigen::Index i = 0; i < em.eigenvalues.size(); ++i) {
    total += std::log1p(std::max(em.eigenvalues(i), -0.999999999999));
  }
  return std::max(total, 0.0);
}

double rate(const InterferenceChannel& channel, const CovarianceProfile& profile,
            int q) {
  const CMat r = mui_covariance(channel, profile, q);
  const CMat a = whitened_gram(channel.H(q, q), r);
  return log_det_rate(a, profile.q[q]);
}

WaterLevel water_level_solve(const RVec& d0, double total_power) {
  const Eigen::Index n = d0.size();
  if (n == 0) throw DomainError("water_level_solve: empty gain vector");
  if (!(total_power > 0.0)) {
    throw DomainError("water_level_solve: total power must be positive");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(d0(i) > 0.0)) {
      throw DomainError("water_level_solve: gains must be positive");
    }
  }
  // Inverse gains ascending; the active set is always a prefix.
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return 1.0 / d0(a) < 1.0 / d0(b);
  });
  double prefix = 0.0;
  double mu = 0.0;
  Eigen::Index active = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    prefix += 1.0 / d0(order[k]);
    const double candidate = (total_power + prefix) / static_cast<double>(k + 1);
    const bool fits_next =
        (k + 1 == n) || candidate <= 1.0 / d0(order[k + 1]);
    if (candidate > 1.0 / d0(order[k]) && fits_next) {
      mu = candidate;
      active = k + 1;
      break;
    }
  }
  WaterLevel wl;
  wl.mu = mu;
  wl.powers = RVec::Zero(n);
  for (Eigen::Index k = 0; k < active; ++k) {
    wl.powers(order[k]) = mu - 1.0 / d0(order[k]);
  }
  return wl;
}

WaterfillResult best_response_wf(const InterferenceChannel& channel,
                                 const CovarianceProfile& profile, int q,
                                 double rank_tol) {
  const CMat& h = channel.H(q, q);
  if (h.norm() == 0.0) {
    throw DegenerateLinkError("best_response_wf: zero direct channel");
  }
  const CMat r = mui_covariance(channel, profile, q);
  const CMat a = whitened_gram(h, r);
  const HermitianEigen eig = hermitian_eig(a);
  const double lam_max = eig.eigenvalues.maxCoeff();
  if (!(lam_max > 0.0)) {
    throw DegenerateLinkError("best_response_wf: direct channel numerically zero");
  }
  // Keep only the r_q positive eigenvalues.
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < eig.eigenvalues.size(); ++i) {
    if (eig.eigenvalues(i) > rank_tol * lam_max) keep.push_back(i);
  }
  RVec d(keep.size());
  CMat u(h.cols(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    d(static_cast<Eigen::Index>(k)) = eig.eigenvalues(keep[k]);
    u.col(static_cast<Eigen::Index>(k)) = eig.eigenvectors.col(keep[k]);
  }
  const WaterLevel wl = water_level_solve(d, channel.users[q].power);
  WaterfillResult res;
  res.covariance = u * wl.powers.asDiagonal() * u.adjoint();
  res.covariance = (0.5 * (res.covariance + res.covariance.adjoint())).eval();
  res.water_level = wl.mu;
  res.active_modes = static_cast<int>((wl.powers.array() > 0.0).count());
  return res;
}

CMat project_onto_simplex_psd(const CMat& x0, double total_power) {
  if (!(total_power > 0.0)) {
    throw DomainError("project_onto_simplex_psd: total power must be positive");
  }
  const HermitianEigen eig = hermitian_eig(x0);
  const RVec& d0 = eig.eigenvalues;
  const Eigen::Index n = d0.size();
  // d_k = (d0_k - mu)^+ with sum = total_power; active set is the suffix of
  // the ascending eigenvalue order.
  double mu = 0.0;
  double suffix = 0.0;
  for (Eigen::Index k = n - 1; k >= 0; --k) {
    suffix += d0(k);
    const Eigen::Index count = n - k;
    const double candidate = (suffix - total_power) / static_cast<double>(count);
    const bool fits_prev = (k == 0) || d0(k - 1) <= candidate;
    if (d0(k) > candidate && fits_prev) {
      mu = candidate;
      break;
    }
  }
  const RVec d = (d0.array() - mu).max(0.0);
  CMat out = eig.eigenvectors * d.asDiagonal() * eig.eigenvectors.adjoint();
  return 0.5 * (out + out.adjoint());
}

double c_q_bound(const InterferenceChannel& channel, int q) {
  const CMat& h = channel.H(q, q);
  if (h.norm() == 0.0) {
    throw DegenerateLinkError("c_q_bound: zero direct channel");
  }
  const int q_count = channel.num_users();
  double p_max = 0.0;
  for (const auto& u : channel.users) p_max = std::max(p_max, u.power);
  double max_cross = 0.0;
  for (int r = 0; r < q_count; ++r) {
    max_cross = std::max(max_cross,
                         largest_squared_singular_value(channel.H(r, q)));
  }
  // Smallest positive eigenvalue of H^H H = smallest positive sigma^2.
  const SvdFactors s = svd(h);
  const double smax = s.singular_values(0);
  double min_pos = smax;
  for (Eigen::Index i = 0; i < s.singular_values.size(); ++i) {
    const double sv = s.singular_values(i);
    if (sv > kDefaultRankTol * smax) min_pos = sv;
  }
  const double lam_min_pos = min_pos * min_pos;
  const double rho_noise = spectral_radius(channel.users[q].noise_cov);
  return channel.users[q].power +
         (rho_noise + q_count * p_max * max_cross) / lam_min_pos;
}

CMat wf_projection_form(const InterferenceChannel& channel,
                        const CovarianceProfile& profile, int q, double c_q,
                        double rank_tol) {
  const CMat& h = channel.H(q, q);
  if (h.norm() == 0.0) {
    throw DegenerateLinkError("wf_projection_form: zero direct channel");
  }
  const CMat r = mui_covariance(channel, profile, q);
  const CMat a = whitened_gram(h, r);
  // Data-dependent threshold: P_q + max_i 1/d_i over the positive spectrum.
  const HermitianEigen eig = hermitian_eig(a);
  const double lam_max = eig.eigenvalues.maxCoeff();
  double inv_min = 0.0;
  for (Eigen::Index i = 0; i < eig.eigenvalues.size(); ++i) {
    if (eig.eigenvalues(i) > rank_tol * lam_max) {
      inv_min = std::max(inv_min, 1.0 / eig.eigenvalues(i));
    }
  }
  const double threshold = channel.users[q].power + inv_min;
  if (c_q < threshold * (1.0 - 1e-12)) {
    throw ContractViolationError(
        "wf_projection_form: c_q below the data-dependent threshold");
  }
  const CMat pinv_a = pseudoinverse(a, rank_tol);
  const CMat null_proj = null_space_projector(h, rank_tol);
  const CMat x0 = -(pinv_a + c_q * null_proj);
  return project_onto_simplex_psd(0.5 * (x0 + x0.adjoint()),
                                  channel.users[q].power);
}

WaterfillResult best_response_modified(const InterferenceChannel& channel,
                                       const CovarianceProfile& profile, int q,
                                       double rank_tol) {
  const CMat& h = channel.H(q, q);
  if (numerical_rank(h, rank_tol) < h.cols()) {
    throw PreReduceError(
        "best_response_modified: direct channel must be full column-rank");
  }
  const CMat r = mui_covariance(channel, profile, q);
  const CMat hp = pseudoinverse(h, rank_tol);
  CMat m = hp * r * hp.adjoint();
  m = (0.5 * (m + m.adjoint())).eval();
  const double power = channel.users[q].power;
  // Corollary-15 projection of -M; water level over the gains 1/lambda(M).
  const HermitianEigen eig = hermitian_eig(m);
  const RVec gains = eig.eigenvalues.cwiseInverse();
  const WaterLevel wl = water_level_solve(gains, power);
  WaterfillResult res;
  res.covariance =
      eig.eigenvectors * wl.powers.asDiagonal() * eig.eigenvectors.adjoint();
  res.covariance = (0.5 * (res.covariance + res.covariance.adjoint())).eval();
  res.water_level = wl.mu;
  res.active_modes = static_cast<int>((wl.powers.array() > 0.0).count());
  return res;
}

double rate_modified(const InterferenceChannel& channel,
                     const CovarianceProfile& profile, int q, double rank_tol) {
  const CMat& h = channel.H(q, q);
  if (numerical_rank(h, rank_tol) < h.cols()) {
    throw PreReduceError("rate_modified: direct channel must be full column-rank");
  }
  const CMat r = mui_covariance(channel, profile, q);
  const CMat hp = pseudoinverse(h, rank_tol);
  CMat m = hp * r * hp.adjoint();
  m = (0.5 * (m + m.adjoint())).eval();
  const CMat a = Eigen::LLT<CMat>(m).solve(CMat::Identity(m.rows(), m.cols()));
  return log_det_rate(0.5 * (a + a.adjoint()), profile.q[q]);
}

CovarianceProfile uniform_profile(const InterferenceChannel& channel) {
  CovarianceProfile p;
  for (const auto& u : channel.users) {
    p.q.push_back((u.power / u.n_tx) * CMat::Identity(u.n_tx, u.n_tx));
  }
  return p;
}

CovarianceProfile random_feasible_profile(const InterferenceChannel& channel,
                                          Rng& rng) {
  CovarianceProfile p;
  for (const auto& u : channel.users) {
    CMat x(u.n_tx, u.n_tx);
    for (int i = 0; i < u.n_tx; ++i) {
      for (int k = 0; k < u.n_tx; ++k) {
        x(i, k) = rng.cgaussian(u.power);
      }
    }
    x = (0.5 * (x + x.adjoint())).eval();
    p.q.push_back(project_onto_simplex_psd(x, u.power));
  }
  return p;
}

}  // namespace iwfa
