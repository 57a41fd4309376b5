#include <doctest.h>

#include <cmath>
#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "iwfa/contraction.hpp"
#include "iwfa/rng.hpp"

using namespace iwfa;

namespace {

InterferenceChannel two_user(int n_tx, int n_rx, double cross, double power,
                             std::uint64_t seed) {
  return generate_iid_rayleigh(2, {{n_tx, n_rx}, {n_tx, n_rx}}, cross, seed,
                               power);
}

InterferenceChannel single_user() {
  return generate_iid_rayleigh(1, {{2, 2}}, 0.0, 1, 1.0);
}

}  // namespace

TEST_CASE("build_S trivial structures") {
  const RMat s1 = build_S(single_user());
  CHECK(s1.rows() == 1);
  CHECK(s1(0, 0) == 0.0);

  const InterferenceChannel decoupled = two_user(2, 2, 0.0, 1.0, 2);
  CHECK(build_S(decoupled).norm() == 0.0);
  CHECK(build_S_up(decoupled).norm() == 0.0);

  InterferenceChannel broken = two_user(2, 2, 1.0, 1.0, 3);
  broken.h[1][1] = CMat::Zero(2, 2);
  CHECK_THROWS_AS(build_S(broken), DegenerateLinkError);
}

TEST_CASE("build_S regression on the non-contractive fixture") {
  const InterferenceChannel ch = fixtures::tall_noncontractive_channel();
  const RMat s = build_S(ch);
  CHECK(s(0, 1) == doctest::Approx(2.5012).epsilon(5e-4));
  CHECK(s(1, 0) == doctest::Approx(2.5012).epsilon(5e-4));
  CHECK(spectral_radius(s.cast<Complex>()) ==
        doctest::Approx(2.5012).epsilon(5e-4));
}

TEST_CASE("build_innr basics and direct-evaluation oracle") {
  CHECK(build_innr(single_user())(0) == doctest::Approx(1.0));
  CHECK(build_innr(two_user(2, 2, 0.0, 1.0, 4)).maxCoeff() ==
        doctest::Approx(1.0));

  const InterferenceChannel ch = fixtures::tall_noncontractive_channel();
  const RVec innr = build_innr(ch);
  // Independent evaluation straight from the definition.
  const CMat h = ch.H(1, 0);
  const CMat num = CMat::Identity(3, 3) + 10.0 * h * h.adjoint();
  Eigen::SelfAdjointEigenSolver<CMat> eig(num);
  CHECK(innr(0) ==
        doctest::Approx(eig.eigenvalues().maxCoeff()).epsilon(1e-10));
  CHECK(innr.minCoeff() >= 1.0);
}

TEST_CASE("sample_alpha properties") {
  Rng rng(7);
  SUBCASE("square nonsingular channels give exactly the S entry") {
    const InterferenceChannel ch = two_user(3, 3, 1.0, 5.0, 11);
    const RMat s = build_S(ch);
    for (int rep = 0; rep < 5; ++rep) {
      const CovarianceProfile delta = random_feasible_profile(ch, rng);
      CHECK(sample_alpha(ch, 0, 1, delta) ==
            doctest::Approx(s(0, 1)).epsilon(1e-8));
    }
  }
  SUBCASE("zero cross channel gives zero") {
    const InterferenceChannel ch = two_user(2, 4, 0.0, 1.0, 12);
    const CovarianceProfile delta = uniform_profile(ch);
    CHECK(sample_alpha(ch, 0, 1, delta) == doctest::Approx(0.0));
  }
  SUBCASE("fixture value lies inside the certified bracket") {
    const InterferenceChannel ch = fixtures::tall_noncontractive_channel();
    CovarianceProfile delta = uniform_profile(ch);
    delta.q[1] = fixtures::probe_covariance_1();
    const double alpha = sample_alpha(ch, 0, 1, delta);
    const RMat s_up = build_S_up(ch);
    CHECK(alpha > 0.0);
    CHECK(alpha < s_up(0, 1));
  }
  SUBCASE("fat direct channel is rejected") {
    const InterferenceChannel ch = two_user(3, 2, 1.0, 1.0, 13);
    CHECK_THROWS_AS(sample_alpha(ch, 0, 1, uniform_profile(ch)),
                    PreReduceError);
  }
}

TEST_CASE("certificate ordering S <= sampled <= S_up on tall instances") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const InterferenceChannel ch = two_user(2, 4, 1.0, 10.0, 200 + seed);
    const RMat s = build_S(ch);
    const RMat lower = estimate_S_P_lower(ch, 20, seed);
    const RMat s_up = build_S_up(ch);
    CHECK(((lower - s).array() >= -1e-12).all());
    CHECK(((s_up - lower).array() >= -1e-12).all());
  }
  CHECK(estimate_S_P_lower(two_user(2, 4, 1.0, 1.0, 1), 0, 0).norm() == 0.0);
}

TEST_CASE("S_tilde row-wise mixtures") {
  SUBCASE("all fat/square rows reduce to S") {
    const InterferenceChannel ch = two_user(3, 2, 1.0, 1.0, 21);
    const RMat s = build_S(ch);
    CHECK((build_S_tilde_up(ch) - s).norm() == 0.0);
    CHECK((build_S_tilde(ch, RMat::Zero(2, 2)) - s).norm() == 0.0);
  }
  SUBCASE("all tall rows use the supplied entries") {
    const InterferenceChannel ch = two_user(2, 4, 1.0, 1.0, 22);
    CHECK((build_S_tilde_up(ch) - build_S_up(ch)).norm() == 0.0);
    const RMat lower = estimate_S_P_lower(ch, 4, 5);
    CHECK((build_S_tilde(ch, lower) - lower).norm() == 0.0);
  }
  SUBCASE("mixed ranks mix row-wise") {
    InterferenceChannel ch = two_user(3, 3, 1.0, 1.0, 23);
    // Make user 1's direct link tall: 3 rx, 2 tx.
    ch.users[1].n_tx = 2;
    for (int q = 0; q < 2; ++q) ch.h[1][q] = ch.h[1][q].leftCols(2).eval();
    ch.validate();
    const RMat s = build_S(ch);
    const RMat s_up = build_S_up(ch);
    const RMat mix = build_S_tilde_up(ch);
    CHECK((mix.row(0) - s.row(0)).norm() == 0.0);
    CHECK((mix.row(1) - s_up.row(1)).norm() == 0.0);
  }
}

TEST_CASE("check_conditions flags") {
  SUBCASE("single user: everything certified") {
    const ContractionReport rep =
        check_conditions(single_user(), RVec::Ones(1));
    CHECK(rep.c1 == TriState::certified_true);
    CHECK(rep.c2);
    CHECK(rep.c7);
    CHECK(rep.c3[0]);
    CHECK(rep.rho_s == 0.0);
  }
  SUBCASE("decoupled users: everything certified") {
    const ContractionReport rep =
        check_conditions(two_user(2, 4, 0.0, 1.0, 31), RVec::Ones(2));
    CHECK(rep.c1 == TriState::certified_true);
    CHECK(rep.c2);
    CHECK(rep.c7);
  }
  SUBCASE("fixture: C7 fails since rho(S) > 1") {
    const ContractionReport rep = check_conditions(
        fixtures::tall_noncontractive_channel(), RVec::Ones(2));
    CHECK_FALSE(rep.c7);
    CHECK(rep.rho_s == doctest::Approx(2.5012).epsilon(5e-4));
    CHECK(rep.c1 == TriState::certified_false);  // sampled lower bound >= 1
  }
  SUBCASE("nonpositive weights are rejected") {
    CHECK_THROWS_AS(
        check_conditions(single_user(), RVec::Constant(1, -1.0)),
        DomainError);
  }
  SUBCASE("report json carries provenance") {
    const nlohmann::json j =
        check_conditions(two_user(2, 4, 0.3, 1.0, 32), RVec::Ones(2))
            .to_json();
    CHECK(j.contains("S_tilde_row_provenance"));
    CHECK(j.at("C1").is_string());
    CHECK(j.at("rho_S").is_number());
  }
}

TEST_CASE("reduce_rank_deficient") {
  SUBCASE("full-rank channels reduce to themselves") {
    const InterferenceChannel ch = two_user(2, 4, 1.0, 1.0, 41);
    const ReducedChannel red = reduce_rank_deficient(ch);
    CHECK(red.reduced_users.empty());
    CHECK((red.channel.H(0, 0) - ch.H(0, 0)).norm() == 0.0);
  }
  SUBCASE("rank-1 direct link drops to one transmit dimension") {
    InterferenceChannel ch = two_user(3, 3, 1.0, 2.0, 42);
    Rng rng(1);
    CMat u(3, 1), v(3, 1);
    for (int i = 0; i < 3; ++i) {
      u(i, 0) = rng.cgaussian();
      v(i, 0) = rng.cgaussian();
    }
    ch.h[0][0] = u * v.adjoint();
    ch.validate();
    const ReducedChannel red = reduce_rank_deficient(ch);
    REQUIRE(red.reduced_users == std::vector<int>{0});
    CHECK(red.channel.users[0].n_tx == 1);
    CHECK(numerical_rank(red.channel.H(0, 0)) == 1);

    // The lift of any reduced strategy is feasible for the original game.
    CovarianceProfile reduced = uniform_profile(red.channel);
    const CovarianceProfile lifted = red.lift(reduced);
    lifted.validate(ch);
  }
  SUBCASE("reduced certificate entries never exceed the unreduced ones") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      InterferenceChannel ch = two_user(3, 3, 1.0, 1.0, 300 + seed);
      Rng rng(seed);
      CMat u(3, 2), v(3, 2);
      for (int i = 0; i < 3; ++i) {
        for (int k = 0; k < 2; ++k) {
          u(i, k) = rng.cgaussian();
          v(i, k) = rng.cgaussian();
        }
      }
      ch.h[0][0] = u * v.adjoint();  // rank 2 < 3
      ch.validate();
      const RMat s_full = build_S(ch);
      const RMat s_red = build_S(reduce_rank_deficient(ch).channel);
      // Row 0 (the reduced receiver) can only improve.
      CHECK(s_red(0, 1) <= s_full(0, 1) + 1e-10);
    }
  }
}

TEST_CASE("jacobian_F scalar case matches hand calculus") {
  // Q = 2 scalar links: F_1(q2) = (noise + g^2 q2) / h^2, so
  // dF/dq2 = g^2 / h^2.
  InterferenceChannel ch;
  const double hv = 1.3, gv = 0.7, noise = 0.9;
  for (int i = 0; i < 2; ++i) {
    InterferenceChannel::User u;
    u.n_tx = 1;
    u.n_rx = 1;
    u.power = 1.0;
    u.noise_cov = noise * CMat::Identity(1, 1);
    ch.users.push_back(u);
  }
  ch.h = {{hv * CMat::Identity(1, 1), gv * CMat::Identity(1, 1)},
          {gv * CMat::Identity(1, 1), hv * CMat::Identity(1, 1)}};
  ch.validate();
  const CovarianceProfile prof = uniform_profile(ch);
  const CMat j = jacobian_F(ch, 0, prof);
  REQUIRE(j.rows() == 1);
  REQUIRE(j.cols() == 1);
  CHECK(j(0, 0).real() ==
        doctest::Approx(gv * gv / (hv * hv)).epsilon(1e-12));
  CHECK(j(0, 0).imag() == doctest::Approx(0.0));
}

TEST_CASE("jacobian_F zero cross channel gives a zero block") {
  const InterferenceChannel ch = two_user(2, 4, 0.0, 1.0, 51);
  const CMat j = jacobian_F(ch, 0, uniform_profile(ch));
  CHECK(j.norm() == 0.0);
}

TEST_CASE("jacobian_F matches central differences") {
  Rng rng(61);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const InterferenceChannel ch = two_user(2, 3, 1.0, 2.0, 400 + seed);
    const CovarianceProfile prof = random_feasible_profile(ch, rng);
    const double h = 1e-5;
    const RMat analytic = realify_jacobian(jacobian_F(ch, 0, prof));
    const RMat numeric = finite_diff_jacobian(ch, 0, prof, h);
    REQUIRE(analytic.rows() == numeric.rows());
    REQUIRE(analytic.cols() == numeric.cols());
    CHECK((analytic - numeric).cwiseAbs().maxCoeff() <
          std::max(1e-5, 100.0 * h * h));
  }
}

TEST_CASE("finite_diff_jacobian validates the step size") {
  const InterferenceChannel ch = two_user(2, 2, 1.0, 1.0, 71);
  const CovarianceProfile prof = uniform_profile(ch);
  CHECK_THROWS_AS(finite_diff_jacobian(ch, 0, prof, 1e-8), DomainError);
  CHECK_THROWS_AS(finite_diff_jacobian(ch, 0, prof, 1e-3), DomainError);
}

TEST_CASE("realify_jacobian layout") {
  CMat j(1, 1);
  j(0, 0) = Complex(2.0, 3.0);
  const RMat r = realify_jacobian(j);
  REQUIRE(r.rows() == 2);
  CHECK(r(0, 0) == 2.0);
  CHECK(r(0, 1) == -3.0);
  CHECK(r(1, 0) == 3.0);
  CHECK(r(1, 1) == 2.0);
}

TEST_CASE("mean_value_check") {
  SUBCASE("identical endpoints hold trivially") {
    const InterferenceChannel ch = two_user(2, 3, 1.0, 1.0, 81);
    const CovarianceProfile prof = uniform_profile(ch);
    const MeanValueResult res = mean_value_check(ch, 0, prof, prof, 5);
    CHECK(res.holds);
    CHECK(res.lhs == doctest::Approx(0.0));
  }
  SUBCASE("random instances satisfy the inequality") {
    Rng rng(91);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const InterferenceChannel ch = two_user(2, 4, 1.0, 3.0, 500 + seed);
      const CovarianceProfile a = random_feasible_profile(ch, rng);
      const CovarianceProfile b = random_feasible_profile(ch, rng);
      const MeanValueResult res = mean_value_check(ch, 0, a, b, 21);
      CHECK(res.holds);
      CHECK(res.witness_t >= 0.0);
      CHECK(res.witness_t <= 1.0);
    }
  }
  SUBCASE("fixture instance satisfies the inequality") {
    const InterferenceChannel ch = fixtures::tall_noncontractive_channel();
    CovarianceProfile a = uniform_profile(ch);
    CovarianceProfile b = uniform_profile(ch);
    a.q[1] = fixtures::probe_covariance_1();
    b.q[1] = fixtures::probe_covariance_2();
    CHECK(mean_value_check(ch, 0, a, b, 41).holds);
  }
}

TEST_CASE("weighted norms") {
  RMat a(2, 2);
  a << 1.0, -2.0, 0.5, 3.0;
  const RVec ones = RVec::Ones(2);
  CHECK(weighted_matrix_norm(a, ones) == doctest::Approx(3.5));
  CHECK(weighted_matrix_norm(RMat::Identity(3, 3), RVec::Ones(3)) ==
        doctest::Approx(1.0));
  RVec w(2);
  w << 0.5, 2.0;
  const double base = weighted_matrix_norm(a, w);
  CHECK(weighted_matrix_norm(a, (3.0 * w).eval()) ==
        doctest::Approx(base).epsilon(1e-12));
  CHECK_THROWS_AS(weighted_matrix_norm(a, RVec::Zero(2)), DomainError);

  std::vector<CMat> blocks{CMat::Identity(2, 2), 3.0 * CMat::Identity(1, 1)};
  CHECK(block_max_norm(blocks, ones) == doctest::Approx(3.0));
  CHECK(block_max_norm(blocks, (2.0 * ones).eval()) ==
        doctest::Approx(1.5));
}

TEST_CASE("perron weights certify the spectral radius as a weighted norm") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const InterferenceChannel ch = two_user(2, 2, 0.4, 1.0, 600 + seed);
    const RMat s = build_S(ch);
    const double rho = spectral_radius(s.cast<Complex>());
    const RVec w = perron_weights(s);
    CHECK(w.minCoeff() > 0.0);
    const double norm = weighted_matrix_norm(s, w);
    // ||S||_inf^w approaches rho under the Perron vector.
    CHECK(norm >= rho - 1e-9);
    CHECK(norm <= rho + 1e-4 * (1.0 + rho));
    if (rho < 1.0) CHECK(norm < 1.0);
  }
  CHECK((perron_weights(RMat::Zero(3, 3)) - RVec::Ones(3)).norm() == 0.0);
}
