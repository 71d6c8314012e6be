#ifndef INPUTDESIGN_ORACLE_HPP
#define INPUTDESIGN_ORACLE_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "inputdesign/design.hpp"
#include "inputdesign/errors.hpp"
#include "inputdesign/infomatrix.hpp"
#include "inputdesign/rng.hpp"
#include "inputdesign/solver.hpp"

namespace inputdesign {

// ---------------------------------------------------------------------------
// Independent brute-force and statistical verifiers. Nothing here shares a
// code path with the solver or the rounding implementation beyond the plain
// information-matrix arithmetic they both check.
// ---------------------------------------------------------------------------

struct ExhaustiveResult {
    double v_star = 0.0;
    Eigen::VectorXd argmax;
    std::uint64_t evaluations = 0; // vertices covered (sign symmetry halves the work)
};

// Exact maximum of value(crit, Ibar(u)) over the hypercube vertices
// u in {+-c_i}^n. Vertex optimality holds because Ibar is quadratic in u and
// every criterion is nondecreasing along U = t*uu' scaling; u = 0 is included
// as a guard point.
inline ExhaustiveResult brute_force_amplitude(const DesignProblem& problem) {
    if (problem.set.kind != FeasibleSetKind::AmplitudeDiag)
        throw ConfigError("brute_force_amplitude requires an AmplitudeDiag set");
    const Eigen::Index n = static_cast<Eigen::Index>(problem.bank.n);
    if (n > 22) throw ConfigError("brute force limited to n <= 22");
    const Eigen::VectorXd& c = problem.set.amplitude;

    // points with singular information (u = 0 and, for the A criterion, any
    // rank-deficient vertex) count as -inf
    auto value_of = [&](const Eigen::MatrixXd& M) {
        try {
            return criterion_value(problem.crit, M);
        } catch (const DomainError&) {
            return -std::numeric_limits<double>::infinity();
        }
    };

    ExhaustiveResult best;
    best.v_star = value_of(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(problem.bank.N),
                                                 static_cast<Eigen::Index>(problem.bank.N)));
    best.argmax = Eigen::VectorXd::Zero(n);

    // fix the sign of u(0) to +: Ibar(u) == Ibar(-u)
    const std::uint64_t half = 1ULL << (n - 1);
    Eigen::VectorXd u(n);
    for (std::uint64_t mask = 0; mask < half; ++mask) {
        u(0) = c(0);
        for (Eigen::Index i = 1; i < n; ++i)
            u(i) = (mask >> (i - 1)) & 1ULL ? -c(i) : c(i);
        const double val = value_of(info_of_signal(problem.bank, u));
        if (val > best.v_star) {
            best.v_star = val;
            best.argmax = u;
        }
    }
    best.evaluations = 1ULL << n;
    return best;
}

// Monte Carlo estimate of E[sgn(x) sgn(x)'] for x ~ N(0, X); the closed form
// is (2/pi) arcsin(X) elementwise for unit-diagonal X.
inline Eigen::MatrixXd mc_arcsine(const Eigen::MatrixXd& X, int K, std::uint64_t seed) {
    const Eigen::Index n = X.rows();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(X));
    if (es.eigenvalues().minCoeff() < -1e-9 * std::max(1.0, es.eigenvalues().maxCoeff()))
        throw DomainError("mc_arcsine requires a PSD covariance");
    const Eigen::MatrixXd L = es.eigenvectors() *
                              es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
    Rng rng(seed);
    Eigen::VectorXd z(n), s(n);
    for (int k = 0; k < K; ++k) {
        for (Eigen::Index i = 0; i < n; ++i) z(i) = rng.normal();
        const Eigen::VectorXd x = L * z;
        for (Eigen::Index i = 0; i < n; ++i) s(i) = x(i) < 0.0 ? -1.0 : 1.0;
        acc += s * s.transpose();
    }
    return acc / static_cast<double>(K);
}

inline Eigen::MatrixXd arcsine_elementwise(const Eigen::MatrixXd& X) {
    return X.unaryExpr([](double v) { return std::asin(std::clamp(v, -1.0, 1.0)); });
}

// Property check: for a PSD block matrix A (N x N blocks of size n), the matrix
// of blockwise traces is PSD. Returns the minimum eigenvalue of A_Tr.
inline double check_block_trace_psd(const Eigen::MatrixXd& A, int N) {
    if (N < 1 || A.rows() != A.cols() || A.rows() % N != 0)
        throw DimensionError("check_block_trace_psd: bad block shape");
    const Eigen::Index bs = A.rows() / N;
    Eigen::MatrixXd A_tr(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            A_tr(i, j) = A.block(i * bs, j * bs, bs, bs).trace();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(A_tr));
    return es.eigenvalues().minCoeff();
}

struct ExpectationCheck {
    double min_eig = 0.0;   // lambda_min(mean Ibar(u_hat) - (2/pi) Ibar(U_R))
    double std_error = 0.0; // grouped-jackknife standard error of min_eig
};

// Monte Carlo check of the expected-information bound over the sign-rounding
// distribution: draws K candidates, compares the mean information
// matrix against (2/pi) Ibar(U_R).
inline ExpectationCheck mc_expected_info(const DesignProblem& problem,
                                         const RelaxedSolution& sol, int K,
                                         std::uint64_t seed) {
    if (problem.set.kind != FeasibleSetKind::AmplitudeDiag)
        throw ConfigError("mc_expected_info requires an AmplitudeDiag set");
    if (K < 100) throw ConfigError("mc_expected_info needs K >= 100");
    const Eigen::Index n = sol.U.rows();
    const Eigen::Index N = static_cast<Eigen::Index>(problem.bank.N);
    const Eigen::MatrixXd D = factorize(sol.U);
    const Eigen::VectorXd& c = problem.set.amplitude;
    const Eigen::MatrixXd bound =
        kTwoOverPi * info_of_lift(problem.bank, sol.U);

    const int groups = 100;
    std::vector<Eigen::MatrixXd> group_sum(
        static_cast<std::size_t>(groups), Eigen::MatrixXd::Zero(N, N));
    std::vector<int> group_count(static_cast<std::size_t>(groups), 0);
    Eigen::VectorXd xi(n), u(n);
    for (int k = 0; k < K; ++k) {
        Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(k)));
        for (Eigen::Index i = 0; i < n; ++i) xi(i) = rng.normal();
        const Eigen::VectorXd s = D.transpose() * xi;
        for (Eigen::Index i = 0; i < n; ++i)
            u(i) = c(i) * (s(i) < 0.0 ? -1.0 : 1.0);
        const auto g = static_cast<std::size_t>(k % groups);
        group_sum[g] += info_of_signal(problem.bank, u);
        ++group_count[g];
    }

    Eigen::MatrixXd total = Eigen::MatrixXd::Zero(N, N);
    for (const auto& gs : group_sum) total += gs;

    auto min_eig_of = [&](const Eigen::MatrixXd& mean) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
            symmetrized(mean - bound));
        return es.eigenvalues().minCoeff();
    };

    ExpectationCheck out;
    out.min_eig = min_eig_of(total / static_cast<double>(K));

    // delete-one-group jackknife on the min-eigenvalue statistic
    std::vector<double> loo(static_cast<std::size_t>(groups));
    double loo_mean = 0.0;
    for (int b = 0; b < groups; ++b) {
        const auto bb = static_cast<std::size_t>(b);
        const Eigen::MatrixXd mean =
            (total - group_sum[bb]) / static_cast<double>(K - group_count[bb]);
        loo[bb] = min_eig_of(mean);
        loo_mean += loo[bb];
    }
    loo_mean /= groups;
    double ss = 0.0;
    for (double v : loo) ss += (v - loo_mean) * (v - loo_mean);
    out.std_error = std::sqrt(ss * static_cast<double>(groups - 1) /
                              static_cast<double>(groups));
    return out;
}

// ---------------------------------------------------------------------------
// Randomized instance generation shared by the property suites.
// ---------------------------------------------------------------------------

// random stable second-order transfer function: pole radius in [0.3, 0.95]
inline TransferFunction random_stable_tf(Rng& rng) {
    const double r = 0.3 + 0.65 * rng.uniform();
    const double phase = 3.141592653589793 * rng.uniform();
    // den = 1 - 2 r cos(phase) q^-1 + r^2 q^-2 (stable complex or real pair)
    Polynomial den{1.0, -2.0 * r * std::cos(phase), r * r};
    const std::size_t delay = rng.uniform() < 0.5 ? 1 : 2;
    Polynomial num = Polynomial::delay(delay).scaled(0.2 + 1.8 * rng.uniform());
    return TransferFunction(std::move(num), std::move(den));
}

inline QuadraticBank random_stable_bank(std::size_t n, std::size_t N, Rng& rng) {
    std::vector<ImpulseResponse> impulses;
    impulses.reserve(N);
    for (std::size_t i = 0; i < N; ++i)
        impulses.push_back(impulse_response(random_stable_tf(rng), n));
    return bank_from_impulses(impulses);
}

} // namespace inputdesign

#endif
