#include "iwfa/contraction.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <unsupported/Eigen/KroneckerProduct>

#include "iwfa/rng.hpp"

namespace iwfa {

namespace {

void require_nonzero_direct(const InterferenceChannel& channel, int q) {
  if (channel.H(q, q).norm() == 0.0) {
    throw DegenerateLinkError("direct channel of user " + std::to_string(q) +
                              " is zero");
  }
}

bool full_row_rank(const CMat& h) {
  return numerical_rank(h) == h.rows();
}

bool full_col_rank(const CMat& h) {
  return numerical_rank(h) == h.cols();
}

void require_full_col_rank(const CMat& h, int q) {
  if (!full_col_rank(h)) {
    throw PreReduceError("direct channel of user " + std::to_string(q) +
                         " is column-rank deficient; reduce first");
  }
}

// F_q = (H_qq^H R^{-1} H_qq)^{-1} with R the interference-plus-noise
// covariance induced by the given (possibly non-Hermitian) strategies.
CMat eval_F(const InterferenceChannel& channel, int q,
            const std::vector<CMat>& strategies) {
  const int nq = channel.num_users();
  CMat r = channel.users[q].noise_cov;
  for (int s = 0; s < nq; ++s) {
    if (s == q) continue;
    const CMat& h = channel.H(s, q);
    r += h * strategies[s] * h.adjoint();
  }
  const CMat& hqq = channel.H(q, q);
  const CMat a = hqq.adjoint() * r.partialPivLu().solve(hqq);
  return a.partialPivLu().inverse();
}

std::vector<CMat> others(const CovarianceProfile& profile, int q) {
  std::vector<CMat> out;
  for (int r = 0; r < static_cast<int>(profile.q.size()); ++r) {
    out.push_back(profile.q[r]);
  }
  out[q] = CMat::Zero(profile.q[q].rows(), profile.q[q].cols());
  return out;
}

nlohmann::json rmat_to_json(const RMat& a) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
    rows.push_back(row);
  }
  return rows;
}

nlohmann::json rvec_to_json(const RVec& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

double nonneg_spectral_radius(const RMat& a) {
  return spectral_radius(a.cast<Complex>());
}

}  // namespace

const char* to_string(TriState t) {
  switch (t) {
    case TriState::certified_true:
      return "certified_true";
    case TriState::certified_false:
      return "certified_false";
    default:
      return "undetermined";
  }
}

RMat build_S(const InterferenceChannel& channel) {
  const int nq = channel.num_users();
  RMat s = RMat::Zero(nq, nq);
  for (int q = 0; q < nq; ++q) {
    require_nonzero_direct(channel, q);
    const CMat hp = pseudoinverse(channel.H(q, q));
    for (int r = 0; r < nq; ++r) {
      if (r == q) continue;
      s(q, r) = largest_squared_singular_value(hp * channel.H(r, q));
    }
  }
  return s;
}

RVec build_innr(const InterferenceChannel& channel) {
  const int nq = channel.num_users();
  RVec innr(nq);
  for (int q = 0; q < nq; ++q) {
    CMat num = channel.users[q].noise_cov;
    for (int r = 0; r < nq; ++r) {
      if (r == q) continue;
      const CMat& h = channel.H(r, q);
      num += channel.users[r].power * h * h.adjoint();
    }
    const double top = hermitian_eig(num).eigenvalues.maxCoeff();
    const double bottom =
        hermitian_eig(channel.users[q].noise_cov).eigenvalues.minCoeff();
    innr(q) = top / bottom;
  }
  return innr;
}

RMat build_S_up(const InterferenceChannel& channel) {
  const int nq = channel.num_users();
  const RVec innr = build_innr(channel);
  RMat s = RMat::Zero(nq, nq);
  for (int q = 0; q < nq; ++q) {
    require_nonzero_direct(channel, q);
    const double pinv_gain =
        largest_squared_singular_value(pseudoinverse(channel.H(q, q)));
    for (int r = 0; r < nq; ++r) {
      if (r == q) continue;
      s(q, r) = innr(q) * largest_squared_singular_value(channel.H(r, q)) *
                pinv_gain;
    }
  }
  return s;
}

double sample_alpha(const InterferenceChannel& channel, int q, int r,
                    const CovarianceProfile& delta_profile) {
  const CMat& hqq = channel.H(q, q);
  require_full_col_rank(hqq, q);
  if (r == q) return 0.0;
  const CMat rm = mui_covariance(channel, delta_profile, q);
  const Eigen::LLT<CMat> llt(rm);
  const CMat rinv_h = llt.solve(hqq);
  const CMat a = hqq.adjoint() * rinv_h;
  const CMat g = a.llt().solve(hqq.adjoint() * llt.solve(channel.H(r, q)));
  return largest_squared_singular_value(g);
}

RMat estimate_S_P_lower(const InterferenceChannel& channel, int samples,
                        std::uint64_t seed) {
  const int nq = channel.num_users();
  RMat lower = RMat::Zero(nq, nq);
  if (samples <= 0) return lower;
  // The identity-projection member of the bracketed family is the exact
  // S entry; start the running max there so the lower estimate dominates S.
  lower = build_S(channel);
  for (int s = 0; s < samples; ++s) {
    Rng rng = Rng::for_stream(seed, static_cast<std::uint64_t>(s));
    const CovarianceProfile a = random_feasible_profile(channel, rng);
    const CovarianceProfile b = random_feasible_profile(channel, rng);
    const double t = rng.uniform();
    CovarianceProfile mix;
    for (int u = 0; u < nq; ++u) {
      mix.q.push_back(t * a.q[u] + (1.0 - t) * b.q[u]);
    }
    for (int q = 0; q < nq; ++q) {
      if (!full_col_rank(channel.H(q, q))) continue;
      for (int r = 0; r < nq; ++r) {
        if (r == q) continue;
        lower(q, r) = std::max(lower(q, r), sample_alpha(channel, q, r, mix));
      }
    }
  }
  return lower;
}

RMat build_S_tilde(const InterferenceChannel& channel,
                   const RMat& sampled_lower) {
  const RMat s = build_S(channel);
  RMat out = s;
  for (int q = 0; q < channel.num_users(); ++q) {
    if (!full_row_rank(channel.H(q, q))) out.row(q) = sampled_lower.row(q);
  }
  return out;
}

RMat build_S_tilde_up(const InterferenceChannel& channel) {
  const RMat s = build_S(channel);
  const RMat s_up = build_S_up(channel);
  RMat out = s;
  for (int q = 0; q < channel.num_users(); ++q) {
    if (!full_row_rank(channel.H(q, q))) out.row(q) = s_up.row(q);
  }
  return out;
}

ContractionReport check_conditions(const InterferenceChannel& channel,
                                   const RVec& w, int samples,
                                   std::uint64_t seed) {
  const int nq = channel.num_users();
  if (w.size() != nq || (w.array() <= 0.0).any()) {
    throw DomainError("weight vector must be positive with one entry per user");
  }

  ContractionReport rep;
  rep.w = w;
  rep.s = build_S(channel);
  rep.innr = build_innr(channel);
  rep.s_up = build_S_up(channel);
  rep.s_tilde_up = build_S_tilde_up(channel);

  rep.s_tilde_exact = true;
  bool sampling_possible = true;
  for (int q = 0; q < nq; ++q) {
    if (full_row_rank(channel.H(q, q))) continue;
    rep.s_tilde_exact = false;
    if (!full_col_rank(channel.H(q, q))) sampling_possible = false;
  }

  if (rep.s_tilde_exact) {
    rep.s_sampled_lower = RMat::Zero(nq, nq);
    rep.s_tilde = rep.s;
  } else if (sampling_possible) {
    rep.s_sampled_lower = estimate_S_P_lower(channel, samples, seed);
    rep.s_tilde = build_S_tilde(channel, rep.s_sampled_lower);
  } else {
    // Rank-deficient direct link: no sampled estimate, only the upper bound.
    rep.s_sampled_lower = RMat::Zero(nq, nq);
    rep.s_tilde = rep.s_tilde_up;
  }

  rep.rho_s = nonneg_spectral_radius(rep.s);
  rep.rho_s_up = nonneg_spectral_radius(rep.s_up);
  rep.rho_s_tilde = nonneg_spectral_radius(rep.s_tilde);
  rep.rho_s_tilde_up = nonneg_spectral_radius(rep.s_tilde_up);

  if (rep.s_tilde_exact) {
    rep.c1 = rep.rho_s_tilde < 1.0 ? TriState::certified_true
                                   : TriState::certified_false;
  } else if (rep.rho_s_tilde_up < 1.0) {
    rep.c1 = TriState::certified_true;  // backed by the certified C2 surrogate
  } else if (sampling_possible && rep.rho_s_tilde >= 1.0) {
    rep.c1 = TriState::certified_false;  // sampled lower bound already >= 1
  } else {
    rep.c1 = TriState::undetermined;
  }
  rep.c2 = rep.rho_s_tilde_up < 1.0;
  rep.c7 = rep.rho_s < 1.0;

  rep.c3.assign(nq, false);
  rep.c4.assign(nq, false);
  rep.c5.assign(nq, false);
  rep.c6.assign(nq, false);
  for (int q = 0; q < nq; ++q) {
    double row_s = 0.0, col_s = 0.0, row_up = 0.0, col_up = 0.0;
    for (int r = 0; r < nq; ++r) {
      if (r == q) continue;
      row_s += rep.s(q, r) * w(r);
      col_s += rep.s(r, q) * w(r);
      row_up += rep.s_up(q, r) * w(r);
      col_up += rep.s_up(r, q) * w(r);
    }
    rep.c3[q] = row_s / w(q) < 1.0;
    rep.c4[q] = col_s / w(q) < 1.0;
    rep.c5[q] = row_up / w(q) < 1.0;
    rep.c6[q] = col_up / w(q) < 1.0;
  }
  return rep;
}

nlohmann::json ContractionReport::to_json() const {
  nlohmann::json j;
  j["S"] = rmat_to_json(s);
  j["S_up"] = rmat_to_json(s_up);
  j["S_tilde"] = rmat_to_json(s_tilde);
  j["S_tilde_up"] = rmat_to_json(s_tilde_up);
  j["S_sampled_lower"] = rmat_to_json(s_sampled_lower);
  j["innr"] = rvec_to_json(innr);
  j["w"] = rvec_to_json(w);
  j["rho_S"] = rho_s;
  j["rho_S_up"] = rho_s_up;
  j["rho_S_tilde"] = rho_s_tilde;
  j["rho_S_tilde_up"] = rho_s_tilde_up;
  j["S_tilde_exact"] = s_tilde_exact;

  nlohmann::json prov = nlohmann::json::array();
  for (Eigen::Index q = 0; q < s.rows(); ++q) {
    if ((s_tilde.row(q).array() == s.row(q).array()).all()) {
      prov.push_back("exact");
    } else if (s_sampled_lower.size() > 0 &&
               (s_tilde.row(q).array() == s_sampled_lower.row(q).array())
                   .all()) {
      prov.push_back("sampled_lower");
    } else {
      prov.push_back("upper_bound");
    }
  }
  j["S_tilde_row_provenance"] = prov;

  j["C1"] = to_string(c1);
  j["C1_backing"] = s_tilde_exact ? "exact_spectral_radius"
                                  : "bracket_sampled_lower_and_upper_bound";
  j["C2"] = c2;
  j["C7"] = c7;
  j["C3"] = c3;
  j["C4"] = c4;
  j["C5"] = c5;
  j["C6"] = c6;
  return j;
}

ReducedChannel reduce_rank_deficient(const InterferenceChannel& channel,
                                     double rank_tol) {
  const int nq = channel.num_users();
  ReducedChannel out;
  out.channel = channel;
  out.basis.resize(nq);
  for (int q = 0; q < nq; ++q) {
    const CMat& hqq = channel.H(q, q);
    const int rank = numerical_rank(hqq, rank_tol);
    if (rank >= std::min(hqq.rows(), hqq.cols())) {
      out.basis[q] = CMat::Identity(hqq.cols(), hqq.cols());
      continue;
    }
    out.basis[q] = svd(hqq).v.leftCols(rank);
    out.reduced_users.push_back(q);
    out.channel.users[q].n_tx = rank;
  }
  for (int q : out.reduced_users) {
    for (int p = 0; p < nq; ++p) {
      out.channel.h[q][p] = channel.H(q, p) * out.basis[q];
    }
  }
  out.channel.validate();
  return out;
}

CovarianceProfile ReducedChannel::lift(const CovarianceProfile& reduced) const {
  CovarianceProfile out;
  for (int q = 0; q < static_cast<int>(basis.size()); ++q) {
    out.q.push_back(basis[q] * reduced.q[q] * basis[q].adjoint());
  }
  return out;
}

CMat jacobian_F(const InterferenceChannel& channel, int q,
                const CovarianceProfile& profile) {
  const CMat& hqq = channel.H(q, q);
  require_full_col_rank(hqq, q);
  const CMat rm = mui_covariance(channel, profile, q);
  const Eigen::LLT<CMat> llt(rm);
  const CMat a = hqq.adjoint() * llt.solve(hqq);
  const Eigen::LLT<CMat> allt(a);

  const int nq = channel.num_users();
  const int n = hqq.cols();
  int cols = 0;
  for (int r = 0; r < nq; ++r) {
    if (r != q) cols += channel.users[r].n_tx * channel.users[r].n_tx;
  }
  CMat j(n * n, cols);
  int offset = 0;
  for (int r = 0; r < nq; ++r) {
    if (r == q) continue;
    const CMat g = allt.solve(hqq.adjoint() * llt.solve(channel.H(r, q)));
    const int m = channel.users[r].n_tx;
    j.middleCols(offset, m * m) =
        Eigen::kroneckerProduct(g.conjugate(), g).eval();
    offset += m * m;
  }
  return j;
}

RMat realify_jacobian(const CMat& j) {
  RMat out(2 * j.rows(), 2 * j.cols());
  out.topLeftCorner(j.rows(), j.cols()) = j.real();
  out.topRightCorner(j.rows(), j.cols()) = -j.imag();
  out.bottomLeftCorner(j.rows(), j.cols()) = j.imag();
  out.bottomRightCorner(j.rows(), j.cols()) = j.real();
  return out;
}

RMat finite_diff_jacobian(const InterferenceChannel& channel, int q,
                          const CovarianceProfile& profile, double step) {
  if (!(step >= 1e-7 && step <= 1e-4)) {
    throw DomainError("finite-difference step must lie in [1e-7, 1e-4]");
  }
  const CMat& hqq = channel.H(q, q);
  require_full_col_rank(hqq, q);
  const int nq = channel.num_users();
  const int n = hqq.cols();

  std::vector<CMat> base = others(profile, q);
  base[q] = profile.q[q];
  int m = 0;
  for (int r = 0; r < nq; ++r) {
    if (r != q) m += channel.users[r].n_tx * channel.users[r].n_tx;
  }

  RMat out(2 * n * n, 2 * m);
  int col = 0;
  for (int pass = 0; pass < 2; ++pass) {  // 0: real coords, 1: imaginary
    const Complex dir = pass == 0 ? Complex(1, 0) : Complex(0, 1);
    col = pass == 0 ? 0 : m;
    for (int r = 0; r < nq; ++r) {
      if (r == q) continue;
      const int d = channel.users[r].n_tx;
      for (int jcol = 0; jcol < d; ++jcol) {
        for (int irow = 0; irow < d; ++irow) {  // column-major vec order
          std::vector<CMat> plus = base;
          std::vector<CMat> minus = base;
          plus[r](irow, jcol) += dir * step;
          minus[r](irow, jcol) -= dir * step;
          const CMat diff =
              (eval_F(channel, q, plus) - eval_F(channel, q, minus)) /
              (2.0 * step);
          const CVec v = Eigen::Map<const CVec>(diff.data(), n * n);
          out.col(col).head(n * n) = v.real();
          out.col(col).tail(n * n) = v.imag();
          ++col;
        }
      }
    }
  }
  return out;
}

MeanValueResult mean_value_check(const InterferenceChannel& channel, int q,
                                 const CovarianceProfile& profile1,
                                 const CovarianceProfile& profile2,
                                 int t_grid) {
  require_full_col_rank(channel.H(q, q), q);
  const int nq = channel.num_users();
  MeanValueResult res;

  const CMat f1 = eval_F(channel, q, others(profile1, q));
  const CMat f2 = eval_F(channel, q, others(profile2, q));
  res.lhs = (f2 - f1).norm();

  double arg_sq = 0.0;
  for (int r = 0; r < nq; ++r) {
    if (r == q) continue;
    arg_sq += (profile2.q[r] - profile1.q[r]).squaredNorm();
  }
  const double arg_norm = std::sqrt(arg_sq);

  const int points = std::max(t_grid, 2);
  double max_op = 0.0;
  for (int k = 0; k < points; ++k) {
    const double t = static_cast<double>(k) / (points - 1);
    CovarianceProfile mix;
    for (int r = 0; r < nq; ++r) {
      mix.q.push_back(t * profile2.q[r] + (1.0 - t) * profile1.q[r]);
    }
    const double op =
        std::sqrt(largest_squared_singular_value(jacobian_F(channel, q, mix)));
    if (op > max_op) {
      max_op = op;
      res.witness_t = t;
    }
  }
  res.bound = max_op * arg_norm;
  res.holds = res.lhs <= res.bound * (1.0 + 1e-6);
  return res;
}

double weighted_matrix_norm(const RMat& a, const RVec& w) {
  if (a.rows() != a.cols() || a.rows() != w.size()) {
    throw DimensionError("weighted norm needs square A and matching w");
  }
  if ((w.array() <= 0.0).any()) throw DomainError("weights must be positive");
  double best = 0.0;
  for (Eigen::Index q = 0; q < a.rows(); ++q) {
    best = std::max(best, (a.row(q).cwiseAbs() * w).value() / w(q));
  }
  return best;
}

double block_max_norm(const std::vector<CMat>& blocks, const RVec& w) {
  if (static_cast<Eigen::Index>(blocks.size()) != w.size()) {
    throw DimensionError("one weight per block required");
  }
  if ((w.array() <= 0.0).any()) throw DomainError("weights must be positive");
  double best = 0.0;
  for (std::size_t q = 0; q < blocks.size(); ++q) {
    best = std::max(best, blocks[q].norm() / w(static_cast<Eigen::Index>(q)));
  }
  return best;
}

RVec perron_weights(const RMat& s) {
  const Eigen::Index n = s.rows();
  RVec ones = RVec::Ones(n);
  if (s.cwiseAbs().maxCoeff() == 0.0) return ones;
  Eigen::ComplexEigenSolver<CMat> solver(s.cast<Complex>());
  Eigen::Index top = 0;
  solver.eigenvalues().cwiseAbs().maxCoeff(&top);
  RVec w = solver.eigenvectors().col(top).cwiseAbs();
  const double peak = w.maxCoeff();
  if (!(peak > 0.0) || !w.allFinite()) return ones;
  w /= peak;
  // Epsilon floor keeps the vector strictly positive on reducible inputs.
  w = w.array() + 1e-8;
  return w;
}

}  // namespace iwfa
