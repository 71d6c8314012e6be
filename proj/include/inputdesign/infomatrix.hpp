#ifndef INPUTDESIGN_INFOMATRIX_HPP
#define INPUTDESIGN_INFOMATRIX_HPP

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "inputdesign/errors.hpp"
#include "inputdesign/sysmodel.hpp"

namespace inputdesign {

// N x N reduced Fisher information matrix (up to the constant noise scaling,
// which does not affect any argmax).
using InfoMatrix = Eigen::MatrixXd;

inline Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& M) {
    return 0.5 * (M + M.transpose());
}

// ---------------------------------------------------------------------------
// Bank of sensitivity Toeplitz operators F_1..F_N. The Gram blocks
// Q_ij = F_i' F_j are never materialized in the main path; all contractions
// go through the stacked operators.
// ---------------------------------------------------------------------------
struct QuadraticBank {
    std::size_t n = 0;
    std::size_t N = 0;
    std::vector<ToeplitzOperator> ops;
    std::vector<Eigen::MatrixXd> F; // dense operators, cached for contractions

    Eigen::Index ni() const { return static_cast<Eigen::Index>(n); }
};

inline QuadraticBank build_bank(const ParametrizedModel& model, std::size_t n) {
    if (n < 1) throw DimensionError("bank horizon must be >= 1");
    QuadraticBank bank;
    bank.n = n;
    const auto systems = sensitivity_systems(model);
    bank.N = systems.size();
    bank.ops.reserve(bank.N);
    bank.F.reserve(bank.N);
    for (const auto& tf : systems) {
        bank.ops.push_back(toeplitz(impulse_response(tf, n)));
        bank.F.push_back(bank.ops.back().dense());
    }
    return bank;
}

// bank built directly from impulse responses (used for synthetic instances)
inline QuadraticBank bank_from_impulses(const std::vector<ImpulseResponse>& impulses) {
    if (impulses.empty()) throw DimensionError("empty impulse list");
    QuadraticBank bank;
    bank.n = impulses.front().horizon();
    bank.N = impulses.size();
    for (const auto& f : impulses) {
        if (f.horizon() != bank.n)
            throw DimensionError("impulse responses must share a horizon");
        bank.ops.push_back(toeplitz(f));
        bank.F.push_back(bank.ops.back().dense());
    }
    return bank;
}

// bank over arbitrary dense operators (synthetic solver instances; the
// Toeplitz structure is not required by any of the downstream algebra)
inline QuadraticBank bank_from_dense(std::vector<Eigen::MatrixXd> F) {
    if (F.empty()) throw DimensionError("empty operator list");
    QuadraticBank bank;
    bank.n = static_cast<std::size_t>(F.front().rows());
    bank.N = F.size();
    for (const auto& M : F)
        if (M.rows() != static_cast<Eigen::Index>(bank.n) || M.cols() != M.rows())
            throw DimensionError("operators must be square with a shared dimension");
    bank.F = std::move(F);
    return bank;
}

// Ibar_ij = <F_i u, F_j u>
inline InfoMatrix info_of_signal(const QuadraticBank& bank, const Eigen::VectorXd& u) {
    if (static_cast<std::size_t>(u.size()) != bank.n)
        throw DimensionError("info_of_signal: signal length mismatch");
    const Eigen::Index N = static_cast<Eigen::Index>(bank.N);
    Eigen::MatrixXd Y(bank.ni(), N);
    for (Eigen::Index i = 0; i < N; ++i)
        Y.col(i) = bank.ops.empty() ? (bank.F[static_cast<std::size_t>(i)] * u).eval()
                                    : bank.ops[static_cast<std::size_t>(i)].apply(u);
    return symmetrized(Y.transpose() * Y);
}

// Ibar_ij = Tr(U F_i' F_j), contracted through B_j = F_j U
inline InfoMatrix info_of_lift(const QuadraticBank& bank, const Eigen::MatrixXd& U) {
    if (U.rows() != bank.ni() || U.cols() != bank.ni())
        throw DimensionError("info_of_lift: lifted variable dimension mismatch");
    const Eigen::Index N = static_cast<Eigen::Index>(bank.N);
    std::vector<Eigen::MatrixXd> B(bank.N);
    for (std::size_t j = 0; j < bank.N; ++j)
        B[j] = bank.F[j] * U;
    Eigen::MatrixXd M(N, N);
    for (Eigen::Index i = 0; i < N; ++i)
        for (Eigen::Index j = 0; j < N; ++j)
            M(i, j) = bank.F[static_cast<std::size_t>(i)]
                          .cwiseProduct(B[static_cast<std::size_t>(j)])
                          .sum();
    return symmetrized(M);
}

// G = sum_ij W_ij F_i' F_j, the adjoint of info_of_lift:
// Tr(U * weighted_gradient(W)) == <W, info_of_lift(U)>
inline Eigen::MatrixXd weighted_gradient(const QuadraticBank& bank, const Eigen::MatrixXd& W) {
    const Eigen::Index N = static_cast<Eigen::Index>(bank.N);
    if (W.rows() != N || W.cols() != N)
        throw DimensionError("weighted_gradient: weight dimension mismatch");
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(bank.ni(), bank.ni());
    // sum_j W_ij F_j accumulated per i keeps this to N matmuls
    for (Eigen::Index i = 0; i < N; ++i) {
        Eigen::MatrixXd R = Eigen::MatrixXd::Zero(bank.ni(), bank.ni());
        for (Eigen::Index j = 0; j < N; ++j)
            R += W(i, j) * bank.F[static_cast<std::size_t>(j)];
        S += bank.F[static_cast<std::size_t>(i)].transpose() * R;
    }
    return symmetrized(S);
}

} // namespace inputdesign

#endif
