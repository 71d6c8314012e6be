#ifndef INPUTDESIGN_HARNESS_HPP
#define INPUTDESIGN_HARNESS_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "inputdesign/design.hpp"
#include "inputdesign/errors.hpp"
#include "inputdesign/infomatrix.hpp"
#include "inputdesign/oracle.hpp"
#include "inputdesign/rng.hpp"
#include "inputdesign/solver.hpp"
#include "inputdesign/sysmodel.hpp"

namespace inputdesign {

// ---------------------------------------------------------------------------
// Experiment configuration (JSON file; see configs/ for shipped presets).
// ---------------------------------------------------------------------------
struct ExperimentConfig {
    ParametrizedModel model;
    std::size_t horizon = 0;
    FeasibleSetSpec constraint;
    Criterion crit;
    int candidates = 50000;
    std::uint64_t seed = 1;
    double noise_variance = 0.01;
    int monte_carlo_runs = 100;
};

namespace detail {

inline std::vector<double> coeff_array(const nlohmann::json& j, const std::string& key,
                                       std::vector<double> fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_array()) throw ConfigError("'" + key + "' must be an array");
    return j.at(key).get<std::vector<double>>();
}

inline Eigen::VectorXd vector_or_scalar(const nlohmann::json& j, std::size_t n,
                                        const std::string& key) {
    const auto& v = j.at(key);
    Eigen::VectorXd out(static_cast<Eigen::Index>(n));
    if (v.is_number()) {
        out.setConstant(v.get<double>());
    } else if (v.is_array()) {
        const auto a = v.get<std::vector<double>>();
        if (a.size() != n)
            throw ConfigError("'" + key + "' length does not match the horizon");
        for (std::size_t i = 0; i < n; ++i)
            out(static_cast<Eigen::Index>(i)) = a[i];
    } else {
        throw ConfigError("'" + key + "' must be a number or an array");
    }
    return out;
}

} // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& j) {
    ExperimentConfig cfg;
    try {
        const auto& jm = j.at("model");
        cfg.model.G = TransferFunction(
            Polynomial(detail::coeff_array(jm, "g_num", {})),
            Polynomial(detail::coeff_array(jm, "g_den", {1.0})));
        cfg.model.H = TransferFunction(
            Polynomial(detail::coeff_array(jm, "h_num", {1.0})),
            Polynomial(detail::coeff_array(jm, "h_den", {1.0})));
        for (const auto& jb : jm.at("bindings")) {
            const std::string target = jb.at("target").get<std::string>();
            if (target != "num" && target != "den")
                throw ConfigError("binding target must be 'num' or 'den'");
            cfg.model.bindings.push_back(
                {target == "num" ? BindingTarget::Numerator : BindingTarget::Denominator,
                 jb.at("index").get<std::size_t>()});
        }
        cfg.model.validate();

        cfg.horizon = j.at("horizon").get<std::size_t>();
        if (cfg.horizon < 1) throw ConfigError("horizon must be >= 1");

        const auto& jc = j.at("constraint");
        const int blocks = static_cast<int>(jc.contains("amplitude")) +
                           static_cast<int>(jc.contains("power")) +
                           static_cast<int>(jc.contains("general"));
        if (blocks != 1)
            throw ConfigError("exactly one constraint block is required "
                              "(amplitude, power or general)");
        if (jc.contains("amplitude")) {
            cfg.constraint = FeasibleSetSpec::amplitude_diag(
                detail::vector_or_scalar(jc, cfg.horizon, "amplitude"));
        } else if (jc.contains("power")) {
            cfg.constraint = FeasibleSetSpec::power_trace(jc.at("power").get<double>());
        } else {
            const auto& jg = jc.at("general");
            GeneralConstraints g;
            if (jg.contains("p_u")) g.p_u = jg.at("p_u").get<double>();
            if (jg.contains("p_y")) g.p_y = jg.at("p_y").get<double>();
            if (jg.contains("u_min") != jg.contains("u_max"))
                throw ConfigError("u_min and u_max must be given together");
            if (jg.contains("u_min")) {
                g.u_min = detail::vector_or_scalar(jg, cfg.horizon, "u_min");
                g.u_max = detail::vector_or_scalar(jg, cfg.horizon, "u_max");
            }
            if (jg.contains("y_min") != jg.contains("y_max"))
                throw ConfigError("y_min and y_max must be given together");
            if (jg.contains("y_min")) {
                g.y_min = detail::vector_or_scalar(jg, cfg.horizon, "y_min");
                g.y_max = detail::vector_or_scalar(jg, cfg.horizon, "y_max");
            }
            if (g.needs_plant())
                g.plant = toeplitz(impulse_response(cfg.model.G, cfg.horizon)).dense();
            cfg.constraint = FeasibleSetSpec::general_lifted(std::move(g));
        }

        if (j.contains("criterion"))
            cfg.crit.kind = criterion_from_string(j.at("criterion").get<std::string>());
        if (j.contains("candidates")) cfg.candidates = j.at("candidates").get<int>();
        if (cfg.candidates < 1) throw ConfigError("candidates must be >= 1");
        if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("noise_variance"))
            cfg.noise_variance = j.at("noise_variance").get<double>();
        if (cfg.noise_variance < 0.0) throw ConfigError("noise_variance must be >= 0");
        if (j.contains("monte_carlo_runs"))
            cfg.monte_carlo_runs = j.at("monte_carlo_runs").get<int>();
        if (cfg.monte_carlo_runs < 1) throw ConfigError("monte_carlo_runs must be >= 1");
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid configuration: ") + e.what());
    }
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return parse_config(j);
}

inline DesignProblem make_problem(const ExperimentConfig& cfg) {
    return DesignProblem{build_bank(cfg.model, cfg.horizon), cfg.constraint, cfg.crit};
}

// ---------------------------------------------------------------------------
// Simulation, PRBS baseline and output-error estimation.
// ---------------------------------------------------------------------------

// y = G u + H e with e white Gaussian of the given variance, zero initial
// conditions
inline Eigen::VectorXd simulate(const ParametrizedModel& model, const Eigen::VectorXd& u,
                                double noise_variance, std::uint64_t seed) {
    const auto n = static_cast<std::size_t>(u.size());
    Eigen::VectorXd y = toeplitz(impulse_response(model.G, n)).apply(u);
    if (noise_variance > 0.0) {
        Rng rng(seed);
        const double sd = std::sqrt(noise_variance);
        Eigen::VectorXd e(u.size());
        for (Eigen::Index i = 0; i < e.size(); ++i) e(i) = sd * rng.normal();
        y += toeplitz(impulse_response(model.H, n)).apply(e);
    }
    return y;
}

// maximal-length LFSR taps (Fibonacci form, feedback = XOR of listed bits)
inline const std::vector<int>& lfsr_taps(int length) {
    static const std::vector<std::vector<int>> table = {
        {3, 2},  {4, 3},  {5, 3},       {6, 5},       {7, 6},
        {8, 6, 5, 4}, {9, 5}, {10, 7}, {11, 9}, {12, 6, 4, 1},
        {13, 4, 3, 1}, {14, 5, 3, 1}, {15, 14}, {16, 15, 13, 4}};
    if (length < 3 || length > 16)
        throw ConfigError("PRBS register length must be between 3 and 16");
    return table[static_cast<std::size_t>(length - 3)];
}

// +-1 pseudo-random binary sequence from a maximal-length LFSR ({0,1} bits
// mapped to {-1,+1}); default register length 7 gives period 127
inline Eigen::VectorXd prbs(std::size_t n, int register_length = 7,
                            std::uint32_t init_state = 0) {
    if (n < 1) throw ConfigError("PRBS length must be >= 1");
    const auto& taps = lfsr_taps(register_length);
    const std::uint32_t mask = (1u << register_length) - 1u;
    std::uint32_t state = init_state == 0 ? mask : (init_state & mask);
    if (state == 0) throw ConfigError("PRBS register state must be nonzero");
    Eigen::VectorXd out(static_cast<Eigen::Index>(n));
    for (std::size_t t = 0; t < n; ++t) {
        const std::uint32_t bit = (state >> (register_length - 1)) & 1u;
        out(static_cast<Eigen::Index>(t)) = bit ? 1.0 : -1.0;
        std::uint32_t fb = 0;
        for (int tap : taps) fb ^= (state >> (tap - 1)) & 1u;
        state = ((state << 1) | fb) & mask;
    }
    return out;
}

struct OeFit {
    Eigen::VectorXd theta;
    bool converged = false;
    int iterations = 0;
    double sse = 0.0;
};

namespace detail {

inline ParametrizedModel with_theta(const ParametrizedModel& structure,
                                    const Eigen::VectorXd& theta) {
    ParametrizedModel m = structure;
    for (std::size_t i = 0; i < m.bindings.size(); ++i)
        m.set_coefficient(m.bindings[i], theta(static_cast<Eigen::Index>(i)));
    return m;
}

// prediction error eps = H^-1 (y - G u)
inline Eigen::VectorXd prediction_error(const ParametrizedModel& m,
                                        const Eigen::VectorXd& u,
                                        const Eigen::VectorXd& y) {
    const auto n = static_cast<std::size_t>(u.size());
    const Eigen::VectorXd resid = y - toeplitz(impulse_response(m.G, n)).apply(u);
    const TransferFunction h_inv(m.H.den, m.H.num);
    return toeplitz(impulse_response(h_inv, n)).apply(resid);
}

// equation-error (ARX) least squares over all free coefficients of G, used
// as the Gauss-Newton starting point; non-bound coefficients are reset to
// their structural values afterwards
inline Eigen::VectorXd arx_initial_theta(const ParametrizedModel& structure,
                                         const Eigen::VectorXd& u,
                                         const Eigen::VectorXd& y) {
    const Eigen::Index n = u.size();
    const auto da = static_cast<Eigen::Index>(structure.G.den.degree());
    const auto db = static_cast<Eigen::Index>(structure.G.num.degree());
    const Eigen::Index cols = da + db + 1;
    Eigen::MatrixXd Phi = Eigen::MatrixXd::Zero(n, cols);
    for (Eigen::Index t = 0; t < n; ++t) {
        for (Eigen::Index k = 1; k <= da; ++k)
            if (t - k >= 0) Phi(t, k - 1) = -y(t - k);
        for (Eigen::Index k = 0; k <= db; ++k)
            if (t - k >= 0) Phi(t, da + k) = u(t - k);
    }
    const Eigen::VectorXd est = Phi.colPivHouseholderQr().solve(y);
    ParametrizedModel m = structure;
    for (Eigen::Index k = 1; k <= da; ++k)
        m.G.den.coeffs[static_cast<std::size_t>(k)] = est(k - 1);
    for (Eigen::Index k = 0; k <= db; ++k)
        m.G.num.coeffs[static_cast<std::size_t>(k)] = est(da + k);
    Eigen::VectorXd theta(static_cast<Eigen::Index>(structure.bindings.size()));
    for (std::size_t i = 0; i < structure.bindings.size(); ++i)
        theta(static_cast<Eigen::Index>(i)) = m.coefficient(structure.bindings[i]);
    return theta;
}

} // namespace detail

// Gauss-Newton prediction-error minimization of sum eps(t)^2 over the bound
// coefficients, with Levenberg damping on non-decrease and the Jacobian from
// the closed-form sensitivity systems. Initialized from an equation-error
// (ARX) fit unless an explicit start is given.
inline OeFit estimate_oe(const ParametrizedModel& structure, const Eigen::VectorXd& u,
                         const Eigen::VectorXd& y,
                         std::optional<Eigen::VectorXd> init = {}) {
    if (u.size() != y.size())
        throw DimensionError("estimate_oe: input/output length mismatch");
    const auto n = static_cast<std::size_t>(u.size());
    const auto P = static_cast<Eigen::Index>(structure.bindings.size());

    Eigen::VectorXd theta =
        init ? *init : detail::arx_initial_theta(structure, u, y);
    if (theta.size() != P)
        throw DimensionError("estimate_oe: initial parameter vector has wrong size");

    OeFit fit;
    double lambda = 1e-3;
    Eigen::VectorXd eps =
        detail::prediction_error(detail::with_theta(structure, theta), u, y);
    double sse = eps.squaredNorm();

    for (int it = 0; it < 200; ++it) {
        fit.iterations = it + 1;
        const ParametrizedModel m = detail::with_theta(structure, theta);
        const auto sens = sensitivity_systems(m);
        Eigen::MatrixXd J(static_cast<Eigen::Index>(n), P);
        for (Eigen::Index i = 0; i < P; ++i) {
            Eigen::VectorXd col =
                toeplitz(impulse_response(sens[static_cast<std::size_t>(i)], n)).apply(u);
            // sensitivity_systems drops the derivative sign; restore it so
            // that J = -d eps/d theta (num bindings flip, den bindings do not)
            if (structure.bindings[static_cast<std::size_t>(i)].target ==
                BindingTarget::Denominator)
                col = -col;
            J.col(i) = col;
        }
        const Eigen::VectorXd grad = J.transpose() * eps;
        if (grad.lpNorm<Eigen::Infinity>() < 1e-8) {
            fit.converged = true;
            break;
        }
        const Eigen::MatrixXd JtJ = J.transpose() * J;
        bool accepted = false;
        for (int damp = 0; damp < 40; ++damp) {
            const Eigen::VectorXd step =
                (JtJ + lambda * Eigen::MatrixXd::Identity(P, P))
                    .ldlt()
                    .solve(grad);
            const Eigen::VectorXd theta_trial = theta + step;
            Eigen::VectorXd eps_trial;
            try {
                eps_trial = detail::prediction_error(
                    detail::with_theta(structure, theta_trial), u, y);
            } catch (const ModelError&) {
                lambda *= 10.0;
                continue;
            }
            const double sse_trial = eps_trial.squaredNorm();
            if (sse_trial < sse) {
                theta = theta_trial;
                eps = std::move(eps_trial);
                sse = sse_trial;
                lambda = std::max(lambda * 0.1, 1e-12);
                accepted = true;
                break;
            }
            lambda *= 10.0;
        }
        if (!accepted) {
            // stationary up to damping limits; accept if the gradient is tiny
            fit.converged = grad.lpNorm<Eigen::Infinity>() <
                            1e-6 * (1.0 + std::sqrt(sse));
            break;
        }
    }
    fit.theta = theta;
    fit.sse = sse;
    return fit;
}

struct EstimationStats {
    Eigen::VectorXd mean;
    Eigen::VectorXd std_dev;
    Eigen::VectorXd std_error; // of the mean
    int failures = 0;
    int runs = 0;
};

// Monte Carlo repetition of simulate + estimate_oe with per-run derived
// seeds; non-converged fits are counted and excluded from the statistics.
inline EstimationStats monte_carlo_estimation(const ParametrizedModel& model,
                                              const Eigen::VectorXd& u,
                                              double noise_variance, int runs,
                                              std::uint64_t seed) {
    const auto P = static_cast<Eigen::Index>(model.bindings.size());
    std::vector<Eigen::VectorXd> estimates;
    estimates.reserve(static_cast<std::size_t>(runs));
    EstimationStats st;
    st.runs = runs;
    for (int r = 0; r < runs; ++r) {
        const Eigen::VectorXd y =
            simulate(model, u, noise_variance, Rng::derive(seed, static_cast<std::uint64_t>(r)));
        OeFit fit;
        try {
            fit = estimate_oe(model, u, y);
        } catch (const Error&) {
            fit.converged = false;
        }
        if (fit.converged)
            estimates.push_back(fit.theta);
        else
            ++st.failures;
    }
    const auto m = static_cast<double>(estimates.size());
    st.mean = Eigen::VectorXd::Zero(P);
    st.std_dev = Eigen::VectorXd::Zero(P);
    st.std_error = Eigen::VectorXd::Zero(P);
    if (estimates.empty()) return st;
    // compensated summation keeps the aggregation order-independent
    for (Eigen::Index i = 0; i < P; ++i) {
        long double acc = 0.0L;
        for (const auto& th : estimates) acc += th(i);
        st.mean(i) = static_cast<double>(acc / m);
        long double ss = 0.0L;
        for (const auto& th : estimates) {
            const long double d = th(i) - st.mean(i);
            ss += d * d;
        }
        if (estimates.size() > 1)
            st.std_dev(i) = std::sqrt(static_cast<double>(ss / (m - 1.0)));
        st.std_error(i) = st.std_dev(i) / std::sqrt(m);
    }
    return st;
}

// ---------------------------------------------------------------------------
// CSV emission (fixed %.17g formatting so identical runs are byte-identical).
// ---------------------------------------------------------------------------
namespace detail {

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::ofstream open_out(const std::string& path) {
    if (const auto parent = std::filesystem::path(path).parent_path();
        !parent.empty())
        std::filesystem::create_directories(parent);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    return out;
}

} // namespace detail

inline void write_signal_csv(const std::string& path, const std::string& header,
                             const Eigen::VectorXd& x) {
    auto out = detail::open_out(path);
    out << "t," << header << "\n";
    for (Eigen::Index t = 0; t < x.size(); ++t)
        out << (t + 1) << "," << detail::fmt(x(t)) << "\n";
}

struct Histogram {
    std::vector<int> counts; // 100 uniform bins on [0, 1]
    double median = 0.0;
};

inline Histogram ratio_histogram(const std::vector<double>& values, double v_R) {
    Histogram h;
    h.counts.assign(100, 0);
    std::vector<double> ratios;
    ratios.reserve(values.size());
    for (double v : values) {
        const double r = std::clamp(v / v_R, 0.0, 1.0);
        ratios.push_back(r);
        ++h.counts[static_cast<std::size_t>(std::min(r * 100.0, 99.0))];
    }
    std::sort(ratios.begin(), ratios.end());
    if (!ratios.empty()) h.median = ratios[ratios.size() / 2];
    return h;
}

// ---------------------------------------------------------------------------
// Full benchmark reproduction: relaxation bound, rounding histogram
// against a random-binary baseline, responses, and the Monte Carlo estimation
// comparison against a PRBS input.
// ---------------------------------------------------------------------------
struct PaperReport {
    double v_R = 0.0;
    double best_value = 0.0;
    double ratio = 0.0;
    std::optional<double> floor;
    double designed_median_ratio = 0.0;
    double random_median_ratio = 0.0;
    Eigen::VectorXd true_theta;
    EstimationStats designed;
    EstimationStats prbs_stats;
    Eigen::VectorXd input;
};

inline PaperReport reproduce_paper(const ExperimentConfig& cfg,
                                   const std::string& out_prefix,
                                   bool full = false,
                                   const SolverSettings& settings = {}) {
    if (cfg.constraint.kind != FeasibleSetKind::AmplitudeDiag)
        throw ConfigError("reproduce-paper requires an amplitude constraint block");
    DesignProblem problem = make_problem(cfg);
    const auto n = cfg.horizon;

    std::vector<double> designed_values;
    designed_values.reserve(static_cast<std::size_t>(cfg.candidates));
    DesignResult res = design(problem, cfg.candidates, cfg.seed, settings,
                              &designed_values);

    // purely random binary baseline at the same amplitude bound
    std::vector<double> random_values;
    random_values.reserve(static_cast<std::size_t>(cfg.candidates));
    {
        const Eigen::VectorXd& c = cfg.constraint.amplitude;
        Eigen::VectorXd u(static_cast<Eigen::Index>(n));
        for (int k = 0; k < cfg.candidates; ++k) {
            Rng rng(Rng::derive(cfg.seed ^ 0x5241u, static_cast<std::uint64_t>(k)));
            for (Eigen::Index i = 0; i < u.size(); ++i)
                u(i) = c(i) * (rng.normal() < 0.0 ? -1.0 : 1.0);
            random_values.push_back(
                criterion_value(cfg.crit, info_of_signal(problem.bank, u)));
        }
    }

    const Histogram hd = ratio_histogram(designed_values, res.relaxed.v_R);
    const Histogram hr = ratio_histogram(random_values, res.relaxed.v_R);
    {
        auto out = detail::open_out(out_prefix + "_histogram.csv");
        out << "bin_lo,bin_hi,designed_count,random_count\n";
        for (std::size_t b = 0; b < hd.counts.size(); ++b)
            out << detail::fmt(0.01 * static_cast<double>(b)) << ","
                << detail::fmt(0.01 * static_cast<double>(b + 1)) << ","
                << hd.counts[b] << "," << hr.counts[b] << "\n";
    }

    // step response of the plant
    {
        const Eigen::VectorXd step =
            toeplitz(impulse_response(cfg.model.G, n))
                .apply(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n)));
        write_signal_csv(out_prefix + "_step_response.csv", "y", step);
    }
    write_signal_csv(out_prefix + "_u.csv", "u", res.rounded.u);
    {
        const Eigen::VectorXd y = simulate(cfg.model, res.rounded.u,
                                           cfg.noise_variance,
                                           Rng::derive(cfg.seed, 0xF16u));
        write_signal_csv(out_prefix + "_response.csv", "y", y);
    }

    // Monte Carlo estimation comparison against a PRBS of the same length
    const int runs = full ? 500 : cfg.monte_carlo_runs;
    const Eigen::VectorXd prbs_u =
        cfg.constraint.amplitude.cwiseProduct(prbs(n));
    PaperReport rep;
    rep.designed = monte_carlo_estimation(cfg.model, res.rounded.u,
                                          cfg.noise_variance, runs,
                                          Rng::derive(cfg.seed, 0xE57u));
    rep.prbs_stats = monte_carlo_estimation(cfg.model, prbs_u,
                                            cfg.noise_variance, runs,
                                            Rng::derive(cfg.seed, 0xE58u));

    rep.v_R = res.relaxed.v_R;
    rep.best_value = res.rounded.value;
    rep.ratio = res.report.ratio;
    rep.floor = res.report.floor;
    rep.designed_median_ratio = hd.median;
    rep.random_median_ratio = hr.median;
    rep.input = res.rounded.u;
    rep.true_theta = Eigen::VectorXd(static_cast<Eigen::Index>(cfg.model.bindings.size()));
    for (std::size_t i = 0; i < cfg.model.bindings.size(); ++i)
        rep.true_theta(static_cast<Eigen::Index>(i)) =
            cfg.model.coefficient(cfg.model.bindings[i]);

    {
        auto out = detail::open_out(out_prefix + "_estimation.csv");
        out << "parameter,true,mean_designed,std_designed,mean_prbs,std_prbs\n";
        for (Eigen::Index i = 0; i < rep.true_theta.size(); ++i)
            out << i << "," << detail::fmt(rep.true_theta(i)) << ","
                << detail::fmt(rep.designed.mean(i)) << ","
                << detail::fmt(rep.designed.std_dev(i)) << ","
                << detail::fmt(rep.prbs_stats.mean(i)) << ","
                << detail::fmt(rep.prbs_stats.std_dev(i)) << "\n";
    }
    {
        auto out = detail::open_out(out_prefix + "_report.txt");
        out << "relaxation_bound " << detail::fmt(rep.v_R) << "\n"
            << "best_value " << detail::fmt(rep.best_value) << "\n"
            << "ratio " << detail::fmt(rep.ratio) << "\n";
        if (rep.floor) out << "guaranteed_floor " << detail::fmt(*rep.floor) << "\n";
        out << "designed_median_ratio " << detail::fmt(rep.designed_median_ratio) << "\n"
            << "random_median_ratio " << detail::fmt(rep.random_median_ratio) << "\n"
            << "monte_carlo_runs " << runs << "\n"
            << "designed_failures " << rep.designed.failures << "\n"
            << "prbs_failures " << rep.prbs_stats.failures << "\n";
    }
    return rep;
}

} // namespace inputdesign

#endif
