#ifndef INPUTDESIGN_SYSMODEL_HPP
#define INPUTDESIGN_SYSMODEL_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "inputdesign/errors.hpp"

namespace inputdesign {

// ---------------------------------------------------------------------------
// Polynomials in the delay operator q^-1: coeffs[k] multiplies q^-k.
// ---------------------------------------------------------------------------
struct Polynomial {
    std::vector<double> coeffs;

    Polynomial() : coeffs{0.0} {}
    Polynomial(std::initializer_list<double> c) : coeffs(c) { canonicalize(); }
    explicit Polynomial(std::vector<double> c) : coeffs(std::move(c)) { canonicalize(); }

    // drop trailing zeros, keep at least one coefficient
    void canonicalize() {
        if (coeffs.empty()) coeffs.push_back(0.0);
        while (coeffs.size() > 1 && coeffs.back() == 0.0) coeffs.pop_back();
    }

    std::size_t degree() const { return coeffs.size() - 1; }
    bool is_zero() const { return coeffs.size() == 1 && coeffs[0] == 0.0; }

    // monomial q^-k
    static Polynomial delay(std::size_t k) {
        std::vector<double> c(k + 1, 0.0);
        c[k] = 1.0;
        return Polynomial(std::move(c));
    }

    static Polynomial one() { return Polynomial{1.0}; }

    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        std::vector<double> c(a.coeffs.size() + b.coeffs.size() - 1, 0.0);
        for (std::size_t i = 0; i < a.coeffs.size(); ++i)
            for (std::size_t j = 0; j < b.coeffs.size(); ++j)
                c[i + j] += a.coeffs[i] * b.coeffs[j];
        return Polynomial(std::move(c));
    }

    Polynomial scaled(double s) const {
        Polynomial r = *this;
        for (double& c : r.coeffs) c *= s;
        r.canonicalize();
        return r;
    }
};

// ---------------------------------------------------------------------------
// Rational discrete-time transfer function num(q^-1)/den(q^-1), normalized so
// that den.coeffs[0] == 1 (causal, well-posed).
// ---------------------------------------------------------------------------
struct TransferFunction {
    Polynomial num;
    Polynomial den;

    TransferFunction() : num{Polynomial::one()}, den{Polynomial::one()} {}
    TransferFunction(Polynomial n, Polynomial d) : num(std::move(n)), den(std::move(d)) {
        normalize();
    }

    void normalize() {
        if (den.is_zero())
            throw ModelError("transfer function denominator is zero");
        const double lead = den.coeffs[0];
        if (lead == 0.0)
            throw ModelError("transfer function denominator has zero leading coefficient");
        if (lead != 1.0) {
            den = den.scaled(1.0 / lead);
            den.coeffs[0] = 1.0;
            num = num.scaled(1.0 / lead);
        }
    }

    static TransferFunction constant(double g) {
        return TransferFunction(Polynomial{g}, Polynomial::one());
    }
    static TransferFunction delay(std::size_t k) {
        return TransferFunction(Polynomial::delay(k), Polynomial::one());
    }
};

inline TransferFunction tf_multiply(const TransferFunction& a, const TransferFunction& b) {
    return TransferFunction(a.num * b.num, a.den * b.den);
}

// ---------------------------------------------------------------------------
// Parametrized model y = G(q) u + H(q) e with free parameters bound to
// individual coefficients of G.
// ---------------------------------------------------------------------------
enum class BindingTarget { Numerator, Denominator };

struct CoefficientBinding {
    BindingTarget target;
    std::size_t index; // coefficient position (power of q^-1)

    friend bool operator==(const CoefficientBinding&, const CoefficientBinding&) = default;
};

struct ParametrizedModel {
    TransferFunction G;
    TransferFunction H;
    std::vector<CoefficientBinding> bindings;

    std::size_t parameter_count() const { return bindings.size(); }

    void validate() const {
        if (bindings.empty())
            throw ModelError("model has no parameter bindings");
        for (std::size_t i = 0; i < bindings.size(); ++i) {
            const auto& b = bindings[i];
            const Polynomial& p =
                b.target == BindingTarget::Numerator ? G.num : G.den;
            if (b.index >= p.coeffs.size())
                throw ModelError("parameter binding index out of range");
            if (b.target == BindingTarget::Denominator && b.index == 0)
                throw ModelError("denominator leading coefficient is fixed to 1 and cannot be bound");
            for (std::size_t j = i + 1; j < bindings.size(); ++j)
                if (bindings[j] == b)
                    throw ModelError("duplicate parameter binding");
        }
    }

    double coefficient(const CoefficientBinding& b) const {
        const Polynomial& p = b.target == BindingTarget::Numerator ? G.num : G.den;
        return b.index < p.coeffs.size() ? p.coeffs[b.index] : 0.0;
    }

    void set_coefficient(const CoefficientBinding& b, double value) {
        Polynomial& p = b.target == BindingTarget::Numerator ? G.num : G.den;
        if (b.index >= p.coeffs.size()) p.coeffs.resize(b.index + 1, 0.0);
        p.coeffs[b.index] = value;
    }
};

// ---------------------------------------------------------------------------
// Impulse responses and lower-triangular Toeplitz operators.
// ---------------------------------------------------------------------------
struct ImpulseResponse {
    std::vector<double> samples; // f(1..n), 1-indexed in time

    std::size_t horizon() const { return samples.size(); }
};

// First n samples of the response to a unit impulse at t = 1, computed by
// running the difference equation directly.
inline ImpulseResponse impulse_response(const TransferFunction& tf, std::size_t n) {
    if (n < 1)
        throw DimensionError("impulse response horizon must be >= 1");
    const auto& b = tf.num.coeffs;
    const auto& a = tf.den.coeffs; // a[0] == 1
    std::vector<double> f(n, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        double y = t < b.size() ? b[t] : 0.0;
        const std::size_t kmax = std::min(t, a.size() - 1);
        for (std::size_t k = 1; k <= kmax; ++k)
            y -= a[k] * f[t - k];
        f[t] = y;
    }
    return ImpulseResponse{std::move(f)};
}

struct ToeplitzOperator {
    ImpulseResponse impulse;
    std::size_t n = 0;

    // entry (r, c) of the lower-triangular convolution matrix, 0-indexed
    double entry(std::size_t r, std::size_t c) const {
        return c <= r ? impulse.samples[r - c] : 0.0;
    }

    Eigen::VectorXd apply(const Eigen::VectorXd& u) const {
        if (static_cast<std::size_t>(u.size()) != n)
            throw DimensionError("toeplitz_apply: signal length does not match operator dimension");
        Eigen::VectorXd y(n);
        const auto& f = impulse.samples;
        for (std::size_t t = 0; t < n; ++t) {
            double acc = 0.0;
            for (std::size_t s = 0; s <= t; ++s)
                acc += f[t - s] * u(static_cast<Eigen::Index>(s));
            y(static_cast<Eigen::Index>(t)) = acc;
        }
        return y;
    }

    Eigen::MatrixXd dense() const {
        Eigen::MatrixXd F = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                                  static_cast<Eigen::Index>(n));
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c <= r; ++c)
                F(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                    impulse.samples[r - c];
        return F;
    }
};

inline ToeplitzOperator toeplitz(ImpulseResponse f) {
    const std::size_t n = f.horizon();
    return ToeplitzOperator{std::move(f), n};
}

inline Eigen::VectorXd toeplitz_apply(const ToeplitzOperator& T, const Eigen::VectorXd& u) {
    return T.apply(u);
}

// ---------------------------------------------------------------------------
// Closed-form parameter sensitivity systems F_i = H^-1 dG/dtheta_i, one per
// bound coefficient of G = B/A (the sign of the derivative is dropped since
// the information matrix is invariant to it):
//   numerator b_k:    q^-k / A * H.den/H.num
//   denominator a_k:  q^-k B / A^2 * H.den/H.num
// ---------------------------------------------------------------------------
inline std::vector<TransferFunction> sensitivity_systems(const ParametrizedModel& model) {
    model.validate();
    if (model.H.num.coeffs[0] == 0.0)
        throw ModelError("noise model H is not invertible (zero leading numerator coefficient)");
    const TransferFunction h_inverse(model.H.den, model.H.num);
    std::vector<TransferFunction> out;
    out.reserve(model.bindings.size());
    for (const auto& b : model.bindings) {
        TransferFunction dG =
            b.target == BindingTarget::Numerator
                ? TransferFunction(Polynomial::delay(b.index), model.G.den)
                : TransferFunction(Polynomial::delay(b.index) * model.G.num,
                                   model.G.den * model.G.den);
        out.push_back(tf_multiply(dG, h_inverse));
    }
    return out;
}

} // namespace inputdesign

#endif
