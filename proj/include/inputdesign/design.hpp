#ifndef INPUTDESIGN_DESIGN_HPP
#define INPUTDESIGN_DESIGN_HPP

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "inputdesign/criteria.hpp"
#include "inputdesign/errors.hpp"
#include "inputdesign/infomatrix.hpp"
#include "inputdesign/rng.hpp"
#include "inputdesign/solver.hpp"

namespace inputdesign {

struct DesignProblem {
    QuadraticBank bank;
    FeasibleSetSpec set;
    Criterion crit;
};

struct RoundedDesign {
    Eigen::VectorXd u;
    double value = 0.0;          // value(crit, info_of_signal(u))
    double ratio = 0.0;          // oriented so 1 attains the bound
    int candidates_tried = 0;
    std::uint64_t seed = 0;
    bool rank_degenerate = false; // power extraction fell short of v_R
};

// symmetric PSD square root: D = V sqrt(max(lambda, 0)) V', so D'D = U
inline Eigen::MatrixXd factorize(const Eigen::MatrixXd& U) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(U));
    if (es.info() != Eigen::Success)
        throw SolverError("factorize: eigendecomposition failed");
    const Eigen::VectorXd lambda = es.eigenvalues();
    const double scale = std::max(lambda.cwiseAbs().maxCoeff(), 1e-300);
    if (lambda.minCoeff() < -1e-8 * scale)
        throw DomainError("factorize: matrix is substantially indefinite");
    const Eigen::VectorXd root = lambda.cwiseMax(0.0).cwiseSqrt();
    return symmetrized(es.eigenvectors() * root.asDiagonal() *
                       es.eigenvectors().transpose());
}

namespace detail {

inline double ratio_of(double achieved, double v_R) {
    if (v_R < 0.0) return v_R / achieved;
    return v_R == 0.0 ? 1.0 : achieved / v_R;
}

// sgn with sgn(0) := +1, preserving the amplitude-saturation structure
inline double sign_plus(double x) { return x < 0.0 ? -1.0 : 1.0; }

// flip so the leading nonzero entry is positive; the information matrix is
// sign-invariant
inline void canonicalize_sign(Eigen::VectorXd& u) {
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        if (u(i) != 0.0) {
            if (u(i) < 0.0) u = -u;
            return;
        }
    }
}

} // namespace detail

// Randomized rounding for the amplitude-constrained case:
// u_hat = diag(c) sgn(D' xi), best of K Gaussian draws. Deterministic given
// (K, seed); per-candidate streams are derived so the loop order is free.
// When candidate_values is non-null every candidate's criterion value is
// appended (histogram support).
inline RoundedDesign round_amplitude(const DesignProblem& problem,
                                     const RelaxedSolution& sol, int K,
                                     std::uint64_t seed,
                                     std::vector<double>* candidate_values = nullptr) {
    if (problem.set.kind != FeasibleSetKind::AmplitudeDiag)
        throw ConfigError("round_amplitude requires an AmplitudeDiag set");
    if (K < 1) throw ConfigError("candidate count must be >= 1");
    const Eigen::Index n = sol.U.rows();
    const Eigen::MatrixXd D = factorize(sol.U);
    const Eigen::VectorXd& c = problem.set.amplitude;

    RoundedDesign best;
    best.seed = seed;
    best.candidates_tried = K;
    best.value = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd xi(n), u(n);
    for (int k = 0; k < K; ++k) {
        Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(k)));
        for (Eigen::Index i = 0; i < n; ++i) xi(i) = rng.normal();
        const Eigen::VectorXd s = D.transpose() * xi;
        for (Eigen::Index i = 0; i < n; ++i)
            u(i) = c(i) * detail::sign_plus(s(i));
        const double val = criterion_value(problem.crit, info_of_signal(problem.bank, u));
        if (candidate_values) candidate_values->push_back(val);
        if (val > best.value) {
            best.value = val;
            best.u = u;
        }
    }
    detail::canonicalize_sign(best.u);
    best.ratio = detail::ratio_of(best.value, sol.v_R);
    return best;
}

// Power-constrained extraction: u_hat = sqrt(p_u) * top eigenvector of U.
// The relaxation is exact here; if a rank-degenerate optimum leaves the top
// eigenvector short of v_R, the best eigenvector of any nonzero eigenvalue is
// taken and the shortfall is flagged.
inline RoundedDesign extract_power(const DesignProblem& problem,
                                   const RelaxedSolution& sol) {
    if (problem.set.kind != FeasibleSetKind::PowerTrace)
        throw ConfigError("extract_power requires a PowerTrace set");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(sol.U));
    const Eigen::VectorXd lambda = es.eigenvalues();
    const double lmax = lambda.maxCoeff();
    const double root_pu = std::sqrt(problem.set.power);

    RoundedDesign best;
    best.candidates_tried = 1;
    best.u = root_pu * es.eigenvectors().col(lambda.size() - 1);
    best.value = criterion_value(problem.crit, info_of_signal(problem.bank, best.u));

    if (best.value < sol.v_R - 1e-4 * std::abs(sol.v_R)) {
        // rank-degenerate case: scan all eigenvectors of nonzero eigenvalues
        for (Eigen::Index i = 0; i < lambda.size() - 1; ++i) {
            if (lambda(i) <= 1e-10 * lmax) continue;
            Eigen::VectorXd u = root_pu * es.eigenvectors().col(i);
            const double val =
                criterion_value(problem.crit, info_of_signal(problem.bank, u));
            ++best.candidates_tried;
            if (val > best.value) {
                best.value = val;
                best.u = std::move(u);
            }
        }
        if (best.value < sol.v_R - 1e-4 * std::abs(sol.v_R))
            best.rank_degenerate = true;
    }
    detail::canonicalize_sign(best.u);
    best.ratio = detail::ratio_of(best.value, sol.v_R);
    return best;
}

namespace detail {

// largest alpha >= 0 keeping u_bar + alpha*d inside all general constraints;
// every constraint is convex in alpha and satisfied at alpha = 0
inline double max_feasible_alpha(const GeneralConstraints& g,
                                 const Eigen::VectorXd& u_bar,
                                 const Eigen::VectorXd& d, double tol = 1e-12) {
    double alpha = std::numeric_limits<double>::infinity();
    auto linear_cap = [&](double base, double slope, double hi) {
        // base + alpha*slope <= hi
        if (slope > tol) alpha = std::min(alpha, (hi - base) / slope);
    };
    auto quad_cap = [&](double a, double b, double c) {
        // a*alpha^2 + b*alpha + c <= 0 with c <= 0, a >= 0
        if (a <= tol) {
            if (b > tol) alpha = std::min(alpha, -c / b);
            return;
        }
        const double disc = b * b - 4.0 * a * c;
        alpha = std::min(alpha, (-b + std::sqrt(std::max(disc, 0.0))) / (2.0 * a));
    };
    if (g.has_input_box()) {
        for (Eigen::Index i = 0; i < u_bar.size(); ++i) {
            linear_cap(u_bar(i), d(i), g.u_max(i));
            linear_cap(-u_bar(i), -d(i), -g.u_min(i));
        }
    }
    if (g.p_u)
        quad_cap(d.squaredNorm(), 2.0 * u_bar.dot(d),
                 u_bar.squaredNorm() - *g.p_u);
    if (g.has_output_box() || g.p_y) {
        const Eigen::VectorXd y0 = g.plant * u_bar;
        const Eigen::VectorXd yd = g.plant * d;
        if (g.has_output_box()) {
            for (Eigen::Index i = 0; i < y0.size(); ++i) {
                linear_cap(y0(i), yd(i), g.y_max(i));
                linear_cap(-y0(i), -yd(i), -g.y_min(i));
            }
        }
        if (g.p_y)
            quad_cap(yd.squaredNorm(), 2.0 * y0.dot(yd),
                     y0.squaredNorm() - *g.p_y);
    }
    return std::max(std::min(alpha, 1e308), 0.0);
}

inline bool general_feasible(const GeneralConstraints& g, const Eigen::VectorXd& u,
                             double tol) {
    if (g.has_input_box() &&
        ((u - g.u_max).maxCoeff() > tol || (g.u_min - u).maxCoeff() > tol))
        return false;
    if (g.p_u && u.squaredNorm() > *g.p_u + tol) return false;
    if (g.has_output_box() || g.p_y) {
        const Eigen::VectorXd y = g.plant * u;
        if (g.has_output_box() &&
            ((y - g.y_max).maxCoeff() > tol || (g.y_min - y).maxCoeff() > tol))
            return false;
        if (g.p_y && y.squaredNorm() > *g.p_y + tol) return false;
    }
    return true;
}

} // namespace detail

// Rounding for the general lifted case: u_hat = u_bar + alpha D' xi with
// D'D = U - u_bar u_bar' and alpha maximal feasible per candidate. u_bar
// itself is always candidate 0 (alpha = 0).
inline RoundedDesign round_general(const DesignProblem& problem,
                                   const RelaxedSolution& sol, int K,
                                   std::uint64_t seed) {
    if (problem.set.kind != FeasibleSetKind::GeneralLifted)
        throw ConfigError("round_general requires a GeneralLifted set");
    if (K < 1) throw ConfigError("candidate count must be >= 1");
    if (!sol.u_bar)
        throw SolverError("GeneralLifted solution is missing u_bar");
    const Eigen::VectorXd& u_bar = *sol.u_bar;
    const auto& g = problem.set.general;
    if (!detail::general_feasible(g, u_bar, 1e-6))
        throw SolverError("round_general: u_bar violates the constraints: solver inconsistency");

    const Eigen::Index n = sol.U.rows();
    Eigen::MatrixXd resid = sol.U - u_bar * u_bar.transpose();
    // the solver satisfies the bordered PSD constraint to projection
    // tolerance only; clip the residual onto the cone before the root
    detail::project_psd_inplace(resid);
    const Eigen::MatrixXd D = factorize(resid);

    RoundedDesign best;
    best.seed = seed;
    best.candidates_tried = K;
    best.u = u_bar;
    best.value = criterion_value(problem.crit, info_of_signal(problem.bank, u_bar));
    Eigen::VectorXd xi(n);
    for (int k = 1; k < K; ++k) {
        Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(k)));
        for (Eigen::Index i = 0; i < n; ++i) xi(i) = rng.normal();
        const Eigen::VectorXd d = D.transpose() * xi;
        const double alpha = detail::max_feasible_alpha(g, u_bar, d);
        const Eigen::VectorXd u = u_bar + alpha * d;
        const double val =
            criterion_value(problem.crit, info_of_signal(problem.bank, u));
        if (val > best.value) {
            best.value = val;
            best.u = u;
        }
    }
    best.ratio = detail::ratio_of(best.value, sol.v_R);
    return best;
}

struct DesignResult {
    RelaxedSolution relaxed;
    RoundedDesign rounded;
    RatioReport report;
};

// End-to-end pipeline: relax, extract/round per set kind, certify.
inline DesignResult design(const DesignProblem& problem, int K, std::uint64_t seed,
                           const SolverSettings& settings = {},
                           std::vector<double>* candidate_values = nullptr) {
    DesignResult r;
    r.relaxed = solve_relaxation(problem.bank, problem.set, problem.crit, settings);
    switch (problem.set.kind) {
        case FeasibleSetKind::AmplitudeDiag:
            r.rounded = round_amplitude(problem, r.relaxed, K, seed, candidate_values);
            break;
        case FeasibleSetKind::PowerTrace:
            r.rounded = extract_power(problem, r.relaxed);
            break;
        case FeasibleSetKind::GeneralLifted:
            r.rounded = round_general(problem, r.relaxed, K, seed);
            break;
    }
    r.report = certificate_ratio(r.relaxed, r.rounded.value, problem.crit);
    return r;
}

} // namespace inputdesign

#endif
