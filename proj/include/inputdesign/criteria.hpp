#ifndef INPUTDESIGN_CRITERIA_HPP
#define INPUTDESIGN_CRITERIA_HPP

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "inputdesign/errors.hpp"
#include "inputdesign/infomatrix.hpp"

namespace inputdesign {

enum class CriterionKind { D, E, A };

inline std::string to_string(CriterionKind k) {
    switch (k) {
        case CriterionKind::D: return "D";
        case CriterionKind::E: return "E";
        case CriterionKind::A: return "A";
    }
    return "?";
}

inline CriterionKind criterion_from_string(const std::string& s) {
    if (s == "D" || s == "d") return CriterionKind::D;
    if (s == "E" || s == "e") return CriterionKind::E;
    if (s == "A" || s == "a") return CriterionKind::A;
    throw ConfigError("unknown criterion '" + s + "' (expected D, E or A)");
}

struct Criterion {
    CriterionKind kind = CriterionKind::D;
    // regularizer added as ridge*I inside solver iterations only; final
    // reported values are evaluated unridged
    double ridge = 0.0;
};

namespace detail {

inline Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_of(const Eigen::MatrixXd& M) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(M));
    if (es.info() != Eigen::Success)
        throw DomainError("eigendecomposition failed");
    return es;
}

inline void require_psd(const Eigen::VectorXd& lambda) {
    const double scale = std::max(1.0, lambda.cwiseAbs().maxCoeff());
    if (lambda.minCoeff() < -1e-8 * scale)
        throw DomainError("criterion argument is not positive semidefinite");
}

} // namespace detail

// J_D = det(M)^(1/N), J_E = min eig(M), J_A = -Tr(M^-1). The D exponent uses
// the dimension of the information matrix.
inline double criterion_value(const Criterion& c, const Eigen::MatrixXd& M) {
    const auto es = detail::eig_of(M);
    const Eigen::VectorXd lambda = es.eigenvalues(); // ascending
    detail::require_psd(lambda);
    const double N = static_cast<double>(M.rows());
    switch (c.kind) {
        case CriterionKind::D: {
            double logdet = 0.0;
            for (Eigen::Index i = 0; i < lambda.size(); ++i) {
                if (lambda(i) <= 0.0) return 0.0;
                logdet += std::log(lambda(i));
            }
            return std::exp(logdet / N);
        }
        case CriterionKind::E:
            return std::max(lambda(0), 0.0);
        case CriterionKind::A: {
            double tr_inv = 0.0;
            for (Eigen::Index i = 0; i < lambda.size(); ++i) {
                if (lambda(i) <= 0.0)
                    throw DomainError("A-optimality requires a nonsingular information matrix");
                tr_inv += 1.0 / lambda(i);
            }
            return -tr_inv;
        }
    }
    throw DomainError("unreachable criterion kind");
}

// Supergradient of the criterion at M:
//   D: (1/N) det(M)^(1/N) M^-1
//   E: v v' for a unit eigenvector v of the minimum eigenvalue
//   A: M^-2
inline Eigen::MatrixXd criterion_gradient(const Criterion& c, const Eigen::MatrixXd& M) {
    const auto es = detail::eig_of(M);
    const Eigen::VectorXd lambda = es.eigenvalues();
    const Eigen::MatrixXd V = es.eigenvectors();
    const double N = static_cast<double>(M.rows());
    switch (c.kind) {
        case CriterionKind::D: {
            double logdet = 0.0;
            for (Eigen::Index i = 0; i < lambda.size(); ++i) {
                if (lambda(i) <= 0.0)
                    throw DomainError("D-optimality gradient requires a positive definite matrix");
                logdet += std::log(lambda(i));
            }
            const double val = std::exp(logdet / N);
            const Eigen::MatrixXd Minv =
                V * lambda.cwiseInverse().asDiagonal() * V.transpose();
            return symmetrized((val / N) * Minv);
        }
        case CriterionKind::E: {
            // ties broken by the decomposition's ascending order: column 0
            const Eigen::VectorXd v = V.col(0);
            return v * v.transpose();
        }
        case CriterionKind::A: {
            for (Eigen::Index i = 0; i < lambda.size(); ++i)
                if (lambda(i) <= 0.0)
                    throw DomainError("A-optimality gradient requires a positive definite matrix");
            const Eigen::VectorXd inv2 =
                lambda.cwiseInverse().cwiseProduct(lambda.cwiseInverse());
            return symmetrized(V * inv2.asDiagonal() * V.transpose());
        }
    }
    throw DomainError("unreachable criterion kind");
}

// The 2/pi rounding guarantee needs a nonnegative concave criterion, which
// holds for D and E but not A (J_A < 0 on the PSD cone).
inline bool is_guaranteed(const Criterion& c) {
    return c.kind == CriterionKind::D || c.kind == CriterionKind::E;
}

} // namespace inputdesign

#endif
