#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "inputdesign/criteria.hpp"
#include "inputdesign/design.hpp"
#include "inputdesign/errors.hpp"
#include "inputdesign/infomatrix.hpp"
#include "inputdesign/oracle.hpp"
#include "inputdesign/rng.hpp"
#include "inputdesign/solver.hpp"

using namespace inputdesign;

namespace {

// correlation-like matrix: random PSD rescaled to a unit diagonal
Eigen::MatrixXd random_correlation(Eigen::Index n, Rng& rng) {
    Eigen::MatrixXd B(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) B(i, j) = rng.normal();
    Eigen::MatrixXd X = symmetrized(B.transpose() * B);
    Eigen::VectorXd d = X.diagonal().cwiseSqrt().cwiseInverse();
    return symmetrized(d.asDiagonal() * X * d.asDiagonal());
}

} // namespace

TEST_CASE("exhaustive vertex search on a hand-enumerable instance") {
    // F'F = [[1, 1/2], [1/2, 1]]; over u in {+-1}^2 the quadratic takes
    // the value 3 at (1,1) and 1 at (1,-1)
    Eigen::MatrixXd Q(2, 2);
    Q << 1.0, 0.5, 0.5, 1.0;
    const Eigen::MatrixXd F = Eigen::LLT<Eigen::MatrixXd>(Q).matrixU();
    DesignProblem problem;
    problem.bank = bank_from_dense({F});
    problem.set = FeasibleSetSpec::amplitude_diag(Eigen::VectorXd::Constant(2, 1.0));
    problem.crit = Criterion{CriterionKind::D};

    const auto r = brute_force_amplitude(problem);
    CHECK(r.v_star == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(r.evaluations == 4);
    CHECK((r.argmax - Eigen::VectorXd::Constant(2, 1.0)).norm() <= 1e-14);
}

TEST_CASE("exhaustive search guards") {
    Rng rng(3);
    DesignProblem problem;
    problem.bank = random_stable_bank(23, 1, rng);
    problem.set = FeasibleSetSpec::amplitude_diag(Eigen::VectorXd::Constant(23, 1.0));
    problem.crit = Criterion{CriterionKind::D};
    CHECK_THROWS_AS(brute_force_amplitude(problem), ConfigError);

    problem.bank = random_stable_bank(6, 1, rng);
    problem.set = FeasibleSetSpec::power_trace(1.0);
    CHECK_THROWS_AS(brute_force_amplitude(problem), ConfigError);
}

TEST_CASE("relaxation bound sandwiches the exhaustive optimum on random instances") {
    Rng rng(101);
    int checked = 0;
    for (int t = 0; t < 30; ++t) {
        const std::size_t n = 8 + (t % 3);
        const std::size_t N = 1 + (t % 3);
        DesignProblem problem;
        problem.bank = random_stable_bank(n, N, rng);
        Eigen::VectorXd c(static_cast<Eigen::Index>(n));
        for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = 0.5 + rng.uniform();
        problem.set = FeasibleSetSpec::amplitude_diag(c);
        const CriterionKind kinds[] = {CriterionKind::D, CriterionKind::E,
                                       CriterionKind::A};
        problem.crit = Criterion{kinds[t % 3]};

        const auto exact = brute_force_amplitude(problem);
        const auto sol = solve_relaxation(problem.bank, problem.set, problem.crit);

        // upper bound: v* <= v_R (up to solver tolerance)
        CHECK(exact.v_star <= sol.v_R + 1e-5 * std::abs(sol.v_R) + 1e-9);
        // guaranteed criteria also bound from below: v* >= (2/pi) v_R
        if (is_guaranteed(problem.crit))
            CHECK(exact.v_star >= kTwoOverPi * sol.v_R - 1e-9);
        ++checked;
    }
    CHECK(checked == 30);
}

TEST_CASE("blockwise traces of a PSD block matrix form a PSD matrix") {
    Rng rng(7);
    for (int t = 0; t < 200; ++t) {
        const int N = 2 + t % 4;
        const Eigen::Index bs = 3 + t % 3;
        const Eigen::Index m = N * bs;
        Eigen::MatrixXd B(m, m);
        for (Eigen::Index i = 0; i < m; ++i)
            for (Eigen::Index j = 0; j < m; ++j) B(i, j) = rng.normal();
        const Eigen::MatrixXd A = symmetrized(B.transpose() * B);
        CHECK(check_block_trace_psd(A, N) >= -1e-10 * A.norm());
    }
    CHECK_THROWS_AS(check_block_trace_psd(Eigen::MatrixXd::Identity(5, 5), 2),
                    DimensionError);
}

TEST_CASE("blockwise-trace argument applies to the lifted information matrix") {
    // Ibar(U)_ij = Tr(F_j U F_i') are the blockwise traces of the PSD matrix
    // [F_i D' (F_j D')'] with D'D = U, so Ibar(U) >= 0 on the feasible set
    Rng rng(17);
    const std::size_t n = 8;
    const std::size_t N = 3;
    const auto bank = random_stable_bank(n, N, rng);
    for (int t = 0; t < 20; ++t) {
        Eigen::MatrixXd B(n, n);
        for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i)
            for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(n); ++j)
                B(i, j) = rng.normal();
        const Eigen::MatrixXd U = symmetrized(B.transpose() * B);
        const Eigen::MatrixXd D = factorize(U);

        Eigen::MatrixXd big(N * n, N * n);
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = 0; j < N; ++j)
                big.block(static_cast<Eigen::Index>(i * n),
                          static_cast<Eigen::Index>(j * n), n, n) =
                    (bank.F[i] * D.transpose()) * (bank.F[j] * D.transpose()).transpose();

        const double lmin = check_block_trace_psd(big, static_cast<int>(N));
        CHECK(lmin >= -1e-9 * big.norm());

        Eigen::MatrixXd A_tr = info_of_lift(bank, U);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A_tr);
        CHECK(std::abs(es.eigenvalues().minCoeff() - lmin) <=
              1e-8 * (1.0 + A_tr.norm()));
    }
}

TEST_CASE("sign-vector second moments follow the arcsine law") {
    Rng rng(23);
    const Eigen::Index n = 4;
    const Eigen::MatrixXd X = random_correlation(n, rng);
    const Eigen::MatrixXd emp = mc_arcsine(X, 200000, 12345);
    const Eigen::MatrixXd want = kTwoOverPi * arcsine_elementwise(X);
    CHECK((emp - want).cwiseAbs().maxCoeff() <= 0.02);
    CHECK((emp.diagonal() - Eigen::VectorXd::Ones(n)).norm() <= 1e-14);

    // closed forms
    CHECK((arcsine_elementwise(Eigen::MatrixXd::Identity(3, 3)) -
           (3.141592653589793 / 2.0) * Eigen::MatrixXd::Identity(3, 3))
              .norm() <= 1e-14);
    CHECK_THROWS_AS(mc_arcsine(-Eigen::MatrixXd::Identity(3, 3), 100, 1),
                    DomainError);
}

TEST_CASE("the arcsine correction dominates the identity on correlation matrices") {
    // (2/pi)(arcsin o X) - (2/pi) X is PSD for unit-diagonal PSD X; this is
    // the matrix inequality behind the 2/pi guarantee
    Rng rng(29);
    for (int t = 0; t < 100; ++t) {
        const Eigen::MatrixXd X = random_correlation(5, rng);
        const Eigen::MatrixXd M =
            kTwoOverPi * (arcsine_elementwise(X) - X);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(M));
        CHECK(es.eigenvalues().minCoeff() >= -1e-10);
    }
}

TEST_CASE("sampled expected information clears the 2/pi floor") {
    Rng rng(31);
    const std::size_t n = 12;
    DesignProblem problem;
    problem.bank = random_stable_bank(n, 2, rng);
    problem.set = FeasibleSetSpec::amplitude_diag(
        Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), 1.0));
    problem.crit = Criterion{CriterionKind::D};
    const auto sol = solve_relaxation(problem.bank, problem.set, problem.crit);

    const auto check = mc_expected_info(problem, sol, 5000, 999);
    CHECK(check.std_error > 0.0);
    CHECK(check.min_eig >= -3.0 * check.std_error);

    CHECK_THROWS_AS(mc_expected_info(problem, sol, 50, 1), ConfigError);
    DesignProblem wrong = problem;
    wrong.set = FeasibleSetSpec::power_trace(1.0);
    CHECK_THROWS_AS(mc_expected_info(wrong, sol, 5000, 1), ConfigError);
}

TEST_CASE("random stable instances are stable and well scaled") {
    Rng rng(37);
    for (int t = 0; t < 50; ++t) {
        const auto tf = random_stable_tf(rng);
        const auto imp = impulse_response(tf, 400);
        double tail = 0.0;
        for (std::size_t i = 300; i < 400; ++i)
            tail = std::max(tail, std::abs(imp.samples[i]));
        CHECK(tail <= 1e-2); // poles inside radius 0.95 have decayed by then
    }
    const auto bank = random_stable_bank(9, 4, rng);
    CHECK(bank.n == 9);
    CHECK(bank.N == 4);
    CHECK(bank.F.size() == 4);
}
