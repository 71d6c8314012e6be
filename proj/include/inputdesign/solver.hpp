#ifndef INPUTDESIGN_SOLVER_HPP
#define INPUTDESIGN_SOLVER_HPP

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "inputdesign/criteria.hpp"
#include "inputdesign/errors.hpp"
#include "inputdesign/infomatrix.hpp"

namespace inputdesign {

// ---------------------------------------------------------------------------
// Relaxed feasible sets for the lifted variable U (and u_bar in the general
// case):
//   AmplitudeDiag:  { U >= 0, U_ii <= c_i^2 }
//   PowerTrace:     { U >= 0, Tr(U) <= p_u }
//   GeneralLifted:  [[U, u_bar],[u_bar', 1]] >= 0 plus trace / elementwise
//                   rows on input and output signals
// ---------------------------------------------------------------------------
enum class FeasibleSetKind { AmplitudeDiag, PowerTrace, GeneralLifted };

struct GeneralConstraints {
    std::optional<double> p_u;
    std::optional<double> p_y;
    Eigen::VectorXd u_min, u_max; // size n, or size 0 when absent
    Eigen::VectorXd y_min, y_max;
    Eigen::MatrixXd plant; // Toeplitz operator of the plant G, n x n

    bool has_input_box() const { return u_min.size() > 0; }
    bool has_output_box() const { return y_min.size() > 0; }
    bool needs_plant() const { return p_y.has_value() || has_output_box(); }
};

struct FeasibleSetSpec {
    FeasibleSetKind kind = FeasibleSetKind::AmplitudeDiag;
    Eigen::VectorXd amplitude; // c(t) > 0, AmplitudeDiag
    double power = 0.0;        // p_u, PowerTrace
    GeneralConstraints general;

    static FeasibleSetSpec amplitude_diag(Eigen::VectorXd c) {
        if (c.size() == 0 || c.minCoeff() <= 0.0)
            throw ConfigError("amplitude bounds must be positive");
        FeasibleSetSpec s;
        s.kind = FeasibleSetKind::AmplitudeDiag;
        s.amplitude = std::move(c);
        return s;
    }

    static FeasibleSetSpec power_trace(double p_u) {
        if (p_u <= 0.0) throw ConfigError("power bound must be positive");
        FeasibleSetSpec s;
        s.kind = FeasibleSetKind::PowerTrace;
        s.power = p_u;
        return s;
    }

    static FeasibleSetSpec general_lifted(GeneralConstraints g) {
        if (g.has_input_box()) {
            if (g.u_min.size() != g.u_max.size() ||
                (g.u_max - g.u_min).minCoeff() <= 0.0)
                throw ConfigError("input box requires u_min < u_max elementwise");
            if ((g.u_max.array() <= 0.0).any() || (g.u_min.array() >= 0.0).any())
                throw ConfigError("input box must contain 0 strictly (u_min < 0 < u_max)");
        }
        if (g.needs_plant() && g.plant.size() == 0)
            throw ConfigError("output constraints require the plant Toeplitz matrix");
        FeasibleSetSpec s;
        s.kind = FeasibleSetKind::GeneralLifted;
        s.general = std::move(g);
        return s;
    }

    std::size_t horizon() const {
        switch (kind) {
            case FeasibleSetKind::AmplitudeDiag:
                return static_cast<std::size_t>(amplitude.size());
            case FeasibleSetKind::PowerTrace:
                return 0; // any horizon
            case FeasibleSetKind::GeneralLifted:
                if (general.has_input_box())
                    return static_cast<std::size_t>(general.u_min.size());
                if (general.plant.size() > 0)
                    return static_cast<std::size_t>(general.plant.rows());
                return 0;
        }
        return 0;
    }
};

struct SolverSettings {
    int max_iters = 20000;
    double initial_step = 1.0;       // relative scale of the first trial step
    double backtrack = 0.5;          // step shrink factor on rejection
    double step_growth = 2.0;        // step growth factor on acceptance
    double subgrad_step = 1.0;       // t_0 of the diminishing t_0/sqrt(k) schedule (E)
    double projection_tol = 1e-10;   // Dykstra cycle-displacement tolerance
    int projection_max_cycles = 2000;
    double stop_tol = 1e-8;          // relative best-value change over the window
    int stop_window = 50;
};

struct RelaxedSolution {
    Eigen::MatrixXd U;
    std::optional<Eigen::VectorXd> u_bar; // GeneralLifted only
    double v_R = 0.0;
    int iterations = 0;
    double feasibility_residual = 0.0;
    std::vector<double> objective_trace; // best-so-far per iteration
};

struct RatioReport {
    double achieved = 0.0;
    double v_R = 0.0;
    double ratio = 0.0;
    std::optional<double> floor; // 2/pi when the criterion carries the guarantee
};

inline constexpr double kTwoOverPi = 0.63661977236758134307553505349006;

// ---------------------------------------------------------------------------
// Dykstra's alternating projection onto an intersection of convex sets.
// Each set supplies its exact Euclidean projection; cycling with the Dykstra
// increments converges to the projection onto the intersection.
// ---------------------------------------------------------------------------
namespace detail {

using MatrixProjector = std::function<void(Eigen::MatrixXd&)>;

inline void project_psd_inplace(Eigen::MatrixXd& X) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(X));
    if (es.info() != Eigen::Success)
        throw SolverError("PSD projection: eigendecomposition failed");
    const Eigen::VectorXd lambda = es.eigenvalues().cwiseMax(0.0);
    X = es.eigenvectors() * lambda.asDiagonal() * es.eigenvectors().transpose();
    X = symmetrized(X);
}

// halfspace { X : <A, X> <= b } in the Frobenius inner product
struct Halfspace {
    Eigen::MatrixXd A;
    double b = 0.0;
    double norm2 = 0.0;

    Halfspace(Eigen::MatrixXd A_, double b_)
        : A(std::move(A_)), b(b_), norm2(A.squaredNorm()) {}

    void operator()(Eigen::MatrixXd& X) const {
        const double v = (A.cwiseProduct(X)).sum() - b;
        if (v > 0.0) X -= (v / norm2) * A;
    }
};

// Builds the projector cycle for a feasible set on its ambient symmetric
// space (n for AmplitudeDiag/PowerTrace, n+1 bordered for GeneralLifted).
// Order is fixed: PSD cone, affine corner (general), trace rows, elementwise
// rows ascending in time.
inline std::vector<MatrixProjector> make_projectors(const FeasibleSetSpec& set,
                                                    Eigen::Index n) {
    std::vector<MatrixProjector> ps;
    ps.push_back(project_psd_inplace);
    switch (set.kind) {
        case FeasibleSetKind::AmplitudeDiag: {
            Eigen::VectorXd cap = set.amplitude.cwiseProduct(set.amplitude);
            ps.push_back([cap](Eigen::MatrixXd& X) {
                for (Eigen::Index i = 0; i < X.rows(); ++i)
                    if (X(i, i) > cap(i)) X(i, i) = cap(i);
            });
            break;
        }
        case FeasibleSetKind::PowerTrace: {
            const double p = set.power;
            ps.push_back([p, n](Eigen::MatrixXd& X) {
                const double v = X.trace() - p;
                if (v > 0.0) X.diagonal().array() -= v / static_cast<double>(n);
            });
            break;
        }
        case FeasibleSetKind::GeneralLifted: {
            const Eigen::Index m = n + 1;
            const auto& g = set.general;
            // corner fixed to 1 (affine)
            ps.push_back([m](Eigen::MatrixXd& X) { X(m - 1, m - 1) = 1.0; });
            std::vector<Halfspace> rows;
            if (g.p_u) {
                Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
                A.topLeftCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
                rows.emplace_back(std::move(A), *g.p_u);
            }
            if (g.p_y) {
                Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
                A.topLeftCorner(n, n) = symmetrized(g.plant.transpose() * g.plant);
                rows.emplace_back(std::move(A), *g.p_y);
            }
            if (g.has_input_box()) {
                for (Eigen::Index i = 0; i < n; ++i) {
                    // U_ii - (u_max + u_min) u_bar_i <= -u_max u_min
                    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
                    A(i, i) = 1.0;
                    const double s = -(g.u_max(i) + g.u_min(i)) / 2.0;
                    A(i, m - 1) = s;
                    A(m - 1, i) = s;
                    rows.emplace_back(std::move(A), -g.u_max(i) * g.u_min(i));
                }
            }
            if (g.has_output_box()) {
                for (Eigen::Index i = 0; i < n; ++i) {
                    // Tr(U G_i' G_i) - (y_max + y_min) G_i u_bar <= -y_max y_min
                    const Eigen::VectorXd gi = g.plant.row(i).transpose();
                    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
                    A.topLeftCorner(n, n) = gi * gi.transpose();
                    const Eigen::VectorXd s =
                        -(g.y_max(i) + g.y_min(i)) / 2.0 * gi;
                    A.block(0, m - 1, n, 1) = s;
                    A.block(m - 1, 0, 1, n) = s.transpose();
                    rows.emplace_back(std::move(A), -g.y_max(i) * g.y_min(i));
                }
            }
            for (auto& r : rows)
                ps.push_back([r = std::move(r)](Eigen::MatrixXd& X) { r(X); });
            break;
        }
    }
    return ps;
}

// Exact feasibility repair for the sets that admit one: PSD-project, then a
// diagonal congruence scaling restores the diagonal/trace caps while keeping
// the PSD cone (D X D >= 0 for diagonal D). Used when the iteration budget of
// the alternating projections runs out; the result is feasible though not the
// nearest point.
inline MatrixProjector make_finisher(const FeasibleSetSpec& set) {
    switch (set.kind) {
        case FeasibleSetKind::AmplitudeDiag: {
            Eigen::VectorXd cap = set.amplitude.cwiseProduct(set.amplitude);
            return [cap](Eigen::MatrixXd& X) {
                project_psd_inplace(X);
                Eigen::VectorXd s(X.rows());
                for (Eigen::Index i = 0; i < X.rows(); ++i)
                    s(i) = X(i, i) > cap(i) ? std::sqrt(cap(i) / X(i, i)) : 1.0;
                X = s.asDiagonal() * X * s.asDiagonal();
            };
        }
        case FeasibleSetKind::PowerTrace: {
            const double p = set.power;
            return [p](Eigen::MatrixXd& X) {
                project_psd_inplace(X);
                const double tr = X.trace();
                if (tr > p) X *= p / tr;
            };
        }
        case FeasibleSetKind::GeneralLifted:
            return {}; // no one-shot repair; rely on the cyclic fallback
    }
    return {};
}

inline Eigen::MatrixXd dykstra(std::vector<MatrixProjector> const& ps,
                               Eigen::MatrixXd X, const SolverSettings& st,
                               const MatrixProjector& finisher = {}) {
    X = symmetrized(X);
    std::vector<Eigen::MatrixXd> incr(ps.size(),
                                      Eigen::MatrixXd::Zero(X.rows(), X.cols()));
    for (int cycle = 0; cycle < st.projection_max_cycles; ++cycle) {
        const Eigen::MatrixXd X_start = X;
        for (std::size_t k = 0; k < ps.size(); ++k) {
            const Eigen::MatrixXd Z = X + incr[k];
            X = Z;
            ps[k](X);
            incr[k] = Z - X;
        }
        const double disp = (X - X_start).norm();
        if (disp <= st.projection_tol * (1.0 + X.norm())) return X;
    }
    // Dykstra converges slowly when many constraints are active at the PSD
    // boundary; fall back to plain cyclic projections, which still reach a
    // feasible point (just not the nearest one)
    for (int cycle = 0; cycle < st.projection_max_cycles; ++cycle) {
        const Eigen::MatrixXd X_start = X;
        for (const auto& p : ps) p(X);
        if ((X - X_start).norm() <= st.projection_tol * (1.0 + X.norm())) return X;
    }
    if (finisher) {
        finisher(X);
        return X;
    }
    Eigen::MatrixXd probe = X;
    ps.front()(probe);
    if ((probe - X).norm() > 1e-6 * (1.0 + X.norm()))
        throw SolverError("projection onto the feasible set did not converge");
    return X;
}

inline Eigen::MatrixXd embed_bordered(const Eigen::MatrixXd& U,
                                      const Eigen::VectorXd& u_bar) {
    const Eigen::Index n = U.rows();
    Eigen::MatrixXd M(n + 1, n + 1);
    M.topLeftCorner(n, n) = U;
    M.block(0, n, n, 1) = u_bar;
    M.block(n, 0, 1, n) = u_bar.transpose();
    M(n, n) = 1.0;
    return M;
}

} // namespace detail

// Euclidean projection onto the relaxed feasible set (AmplitudeDiag and
// PowerTrace ambient: n x n symmetric matrices).
inline Eigen::MatrixXd project(const FeasibleSetSpec& set, const Eigen::MatrixXd& X,
                               const SolverSettings& settings = {}) {
    if (set.kind == FeasibleSetKind::GeneralLifted)
        throw DimensionError("use project_lifted for GeneralLifted sets");
    return detail::dykstra(detail::make_projectors(set, X.rows()), X, settings,
                           detail::make_finisher(set));
}

// GeneralLifted projection of the pair (U, u_bar) through the bordered matrix.
inline std::pair<Eigen::MatrixXd, Eigen::VectorXd>
project_lifted(const FeasibleSetSpec& set, const Eigen::MatrixXd& X,
               const Eigen::VectorXd& x_bar, const SolverSettings& settings = {}) {
    if (set.kind != FeasibleSetKind::GeneralLifted)
        throw DimensionError("project_lifted requires a GeneralLifted set");
    const Eigen::Index n = X.rows();
    Eigen::MatrixXd M = detail::embed_bordered(X, x_bar);
    M = detail::dykstra(detail::make_projectors(set, n), M, settings);
    return {M.topLeftCorner(n, n), M.block(0, n, n, 1)};
}

// Worst constraint violation of (U, u_bar), scale-relative where natural.
inline double feasibility_residual(const FeasibleSetSpec& set, const Eigen::MatrixXd& U,
                                   const std::optional<Eigen::VectorXd>& u_bar = {}) {
    double res = 0.0;
    Eigen::MatrixXd M = set.kind == FeasibleSetKind::GeneralLifted
                            ? detail::embed_bordered(U, u_bar.value())
                            : U;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(M));
    res = std::max(res, -es.eigenvalues().minCoeff());
    switch (set.kind) {
        case FeasibleSetKind::AmplitudeDiag:
            res = std::max(res, (U.diagonal().array() -
                                 set.amplitude.array().square())
                                    .maxCoeff());
            break;
        case FeasibleSetKind::PowerTrace:
            res = std::max(res, U.trace() - set.power);
            break;
        case FeasibleSetKind::GeneralLifted: {
            const auto& g = set.general;
            const Eigen::VectorXd& ub = u_bar.value();
            if (g.p_u) res = std::max(res, U.trace() - *g.p_u);
            if (g.p_y)
                res = std::max(res, (U.cwiseProduct(g.plant.transpose() * g.plant)).sum() - *g.p_y);
            if (g.has_input_box())
                for (Eigen::Index i = 0; i < U.rows(); ++i)
                    res = std::max(res, U(i, i) - (g.u_max(i) + g.u_min(i)) * ub(i) +
                                            g.u_max(i) * g.u_min(i));
            if (g.has_output_box()) {
                const Eigen::VectorXd yb = g.plant * ub;
                for (Eigen::Index i = 0; i < U.rows(); ++i) {
                    const Eigen::VectorXd gi = g.plant.row(i).transpose();
                    res = std::max(res, gi.dot(U * gi) -
                                            (g.y_max(i) + g.y_min(i)) * yb(i) +
                                            g.y_max(i) * g.y_min(i));
                }
            }
            break;
        }
    }
    return res;
}

namespace detail {

// smooth softmin surrogate for the E criterion: -mu log sum exp(-lambda/mu)
inline std::pair<double, Eigen::MatrixXd> e_smooth(const Eigen::MatrixXd& M, double mu) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(M));
    const Eigen::VectorXd lambda = es.eigenvalues();
    const double lmin = lambda.minCoeff();
    Eigen::VectorXd w = ((lmin - lambda.array()) / mu).exp();
    const double s = w.sum();
    const double value = lmin - mu * std::log(s);
    w /= s;
    Eigen::MatrixXd grad =
        es.eigenvectors() * w.asDiagonal() * es.eigenvectors().transpose();
    return {value, symmetrized(grad)};
}

} // namespace detail

// ---------------------------------------------------------------------------
// Projected super-/sub-gradient ascent over the relaxed set. D and A use
// monotone backtracking line search; E runs a diminishing-step subgradient
// phase followed by a smoothed (softmin) polish with continuation in the
// smoothing parameter, which reaches far tighter optima than the subgradient
// schedule alone.
// ---------------------------------------------------------------------------
inline RelaxedSolution solve_relaxation(const QuadraticBank& bank,
                                        const FeasibleSetSpec& set,
                                        const Criterion& crit,
                                        const SolverSettings& settings = {}) {
    const Eigen::Index n = bank.ni();
    const bool lifted = set.kind == FeasibleSetKind::GeneralLifted;
    const Eigen::Index m = lifted ? n + 1 : n;
    const auto projectors = detail::make_projectors(set, n);
    const auto finisher = detail::make_finisher(set);

    // initial point: strictly feasible and full rank so that Ibar(U0) > 0
    Eigen::MatrixXd X;
    switch (set.kind) {
        case FeasibleSetKind::AmplitudeDiag:
            if (set.amplitude.size() != n)
                throw DimensionError("amplitude bound length does not match horizon");
            X = set.amplitude.cwiseProduct(set.amplitude).asDiagonal();
            break;
        case FeasibleSetKind::PowerTrace:
            X = (set.power / static_cast<double>(n)) *
                Eigen::MatrixXd::Identity(n, n);
            break;
        case FeasibleSetKind::GeneralLifted: {
            Eigen::MatrixXd U0 = Eigen::MatrixXd::Identity(n, n);
            const auto& g = set.general;
            double scale = 1.0;
            if (g.has_input_box())
                scale = std::min(scale, 0.5 * (-g.u_max.cwiseProduct(g.u_min)).minCoeff());
            if (g.p_u) scale = std::min(scale, 0.5 * *g.p_u / static_cast<double>(n));
            X = detail::embed_bordered(scale * U0, Eigen::VectorXd::Zero(n));
            X = detail::dykstra(projectors, X, settings, finisher);
            break;
        }
    }

    auto u_block = [&](const Eigen::MatrixXd& M) -> Eigen::MatrixXd {
        return lifted ? M.topLeftCorner(n, n).eval() : M;
    };

    // ridge applied inside iterations only
    const Eigen::MatrixXd M0 = info_of_lift(bank, u_block(X));
    const double ridge =
        1e-9 * std::max(M0.trace() / static_cast<double>(bank.N), 1e-12);
    const Eigen::MatrixXd ridge_eye =
        ridge * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(bank.N),
                                          static_cast<Eigen::Index>(bank.N));

    auto ridged_info = [&](const Eigen::MatrixXd& M_amb) {
        return (info_of_lift(bank, u_block(M_amb)) + ridge_eye).eval();
    };
    auto objective = [&](const Eigen::MatrixXd& M_amb) -> double {
        try {
            return criterion_value(crit, ridged_info(M_amb));
        } catch (const DomainError&) {
            return -std::numeric_limits<double>::infinity();
        }
    };
    auto pad_gradient = [&](const Eigen::MatrixXd& G) -> Eigen::MatrixXd {
        if (!lifted) return G;
        Eigen::MatrixXd P = Eigen::MatrixXd::Zero(m, m);
        P.topLeftCorner(n, n) = G;
        return P;
    };

    RelaxedSolution sol;
    sol.objective_trace.reserve(static_cast<std::size_t>(settings.max_iters));

    Eigen::MatrixXd X_best = X;
    double f_best = objective(X);
    int iters_used = 0;

    // best-so-far tracking always uses the true (ridged) objective, even when
    // a phase ascends a smoothed surrogate
    auto note_progress = [&]() {
        const double f = objective(X);
        if (f > f_best) {
            f_best = f;
            X_best = X;
        }
        sol.objective_trace.push_back(f_best);
    };

    // window-based stop on the best-so-far value; the window never spans
    // phase boundaries (start marks the first trace entry of the phase)
    auto window_converged = [&](std::size_t start) -> bool {
        const auto w = static_cast<std::size_t>(settings.stop_window);
        const std::size_t sz = sol.objective_trace.size();
        if (sz < start + w + 1) return false;
        const double now = sol.objective_trace[sz - 1];
        const double then = sol.objective_trace[sz - 1 - w];
        return std::abs(now - then) <=
               settings.stop_tol * (std::abs(now) + 1e-300);
    };

    // monotone projected-gradient ascent with adaptive step, shared by the
    // smooth criteria and the E polish phase
    auto ascend = [&](const std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>& grad_fn,
                      const std::function<double(const Eigen::MatrixXd&)>& val_fn,
                      int budget) {
        const std::size_t phase_start = sol.objective_trace.size();
        double f_cur = val_fn(X);
        double step = settings.initial_step * (1.0 + X.norm());
        for (int k = 0; k < budget && iters_used < settings.max_iters;
             ++k, ++iters_used) {
            Eigen::MatrixXd G = grad_fn(X);
            const double gnorm = G.norm();
            if (gnorm < 1e-300) break;
            G = pad_gradient(G) / gnorm;
            bool accepted = false;
            for (int ls = 0; ls < 60; ++ls) {
                Eigen::MatrixXd X_trial =
                    detail::dykstra(projectors, X + step * G, settings,
                                    finisher);
                const double f_trial = val_fn(X_trial);
                if (f_trial > f_cur + 1e-15 * std::abs(f_cur)) {
                    X = std::move(X_trial);
                    f_cur = f_trial;
                    step = std::min(step * settings.step_growth,
                                    1e3 * (1.0 + X.norm()));
                    accepted = true;
                    break;
                }
                step *= settings.backtrack;
                if (step < 1e-16 * (1.0 + X.norm())) break;
            }
            note_progress();
            if (!accepted) break; // stalled: no improving step exists
            if (window_converged(phase_start)) break;
        }
    };

    if (crit.kind == CriterionKind::E) {
        // phase 1: diminishing-step subgradient ascent t_0 / sqrt(k)
        const int phase1 = settings.max_iters / 4;
        double t0 = settings.subgrad_step * (1.0 + X.norm());
        for (int k = 1; k <= phase1; ++k, ++iters_used) {
            const Eigen::MatrixXd W = criterion_gradient(crit, ridged_info(X));
            Eigen::MatrixXd G = weighted_gradient(bank, W);
            const double gnorm = G.norm();
            if (gnorm < 1e-300) break;
            const double t = t0 / std::sqrt(static_cast<double>(k));
            X = detail::dykstra(projectors, X + (t / gnorm) * pad_gradient(G),
                                settings, finisher);
            note_progress();
            if (window_converged(0)) break;
        }
        // phase 2: smoothed softmin polish with continuation in mu
        X = X_best;
        const double scale = std::max(std::abs(f_best), ridge);
        for (double mu = 1e-2 * scale; mu >= 1e-11 * scale; mu *= 0.1) {
            ascend(
                [&](const Eigen::MatrixXd& M_amb) {
                    const auto [v, W] = detail::e_smooth(ridged_info(M_amb), mu);
                    (void)v;
                    return weighted_gradient(bank, W);
                },
                [&](const Eigen::MatrixXd& M_amb) {
                    return detail::e_smooth(ridged_info(M_amb), mu).first;
                },
                settings.max_iters);
            if (iters_used >= settings.max_iters) break;
        }
    } else {
        ascend(
            [&](const Eigen::MatrixXd& M_amb) {
                return weighted_gradient(
                    bank, criterion_gradient(crit, ridged_info(M_amb)));
            },
            objective, settings.max_iters);
    }

    sol.U = u_block(X_best);
    if (lifted) sol.u_bar = X_best.block(0, n, n, 1).eval();
    sol.iterations = iters_used;
    sol.v_R = criterion_value(crit, info_of_lift(bank, sol.U));
    sol.feasibility_residual = feasibility_residual(set, sol.U, sol.u_bar);
    return sol;
}

// Ratio of an achieved feasible value to the relaxation bound. The ratio is
// oriented so that 1 means the bound is attained and smaller is worse; for
// the negative-valued A criterion that is v_R/achieved.
inline RatioReport certificate_ratio(const RelaxedSolution& sol, double achieved,
                                     const Criterion& crit) {
    if (achieved > sol.v_R + 1e-6 * std::abs(sol.v_R) + 1e-12)
        throw SolverError("achieved value exceeds the relaxation bound: solver inconsistency");
    RatioReport r;
    r.achieved = achieved;
    r.v_R = sol.v_R;
    r.ratio = sol.v_R < 0.0 ? sol.v_R / achieved
                            : (sol.v_R == 0.0 ? 1.0 : achieved / sol.v_R);
    if (is_guaranteed(crit)) r.floor = kTwoOverPi;
    return r;
}

} // namespace inputdesign

#endif
