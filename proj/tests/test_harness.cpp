#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "inputdesign/errors.hpp"
#include "inputdesign/harness.hpp"
#include "inputdesign/sysmodel.hpp"

using namespace inputdesign;

namespace {

// second-order lightly damped plant with three bound coefficients
ParametrizedModel example_model() {
    ParametrizedModel m;
    m.G = TransferFunction(Polynomial{0.0, 0.0, 0.1}, Polynomial{1.0, -1.8, 0.9});
    m.H = TransferFunction::constant(1.0);
    m.bindings = {{BindingTarget::Denominator, 1},
                  {BindingTarget::Denominator, 2},
                  {BindingTarget::Numerator, 2}};
    return m;
}

nlohmann::json example_json() {
    return nlohmann::json{
        {"model",
         {{"g_num", {0.0, 0.0, 0.1}},
          {"g_den", {1.0, -1.8, 0.9}},
          {"bindings",
           {{{"target", "den"}, {"index", 1}},
            {{"target", "den"}, {"index", 2}},
            {{"target", "num"}, {"index", 2}}}}}},
        {"horizon", 24},
        {"constraint", {{"amplitude", 1.0}}},
        {"criterion", "D"},
        {"candidates", 200},
        {"seed", 5},
        {"noise_variance", 0.01},
        {"monte_carlo_runs", 8}};
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(bool(in));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("simulation composes the plant and noise channels") {
    ParametrizedModel m;
    m.G = TransferFunction::delay(1);
    m.H = TransferFunction::constant(1.0);
    m.bindings = {{BindingTarget::Numerator, 1}};

    Eigen::VectorXd u(4);
    u << 1.0, 2.0, 3.0, 4.0;
    const Eigen::VectorXd y = simulate(m, u, 0.0, 1);
    Eigen::VectorXd want(4);
    want << 0.0, 1.0, 2.0, 3.0;
    CHECK((y - want).norm() <= 1e-15);

    // with noise the same seed reproduces the same record
    const Eigen::VectorXd y1 = simulate(m, u, 0.25, 42);
    const Eigen::VectorXd y2 = simulate(m, u, 0.25, 42);
    CHECK(y1 == y2);
    CHECK((y1 - y).norm() > 0.0);

    // unit noise through H = 1 has roughly unit sample variance
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(20000);
    const Eigen::VectorXd e = simulate(m, zero, 1.0, 7);
    CHECK(e.squaredNorm() / 20000.0 == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("PRBS is a maximal-length +-1 sequence") {
    const Eigen::VectorXd s = prbs(300);
    for (Eigen::Index t = 0; t < s.size(); ++t)
        CHECK(std::abs(s(t)) == 1.0);
    // register length 7: period 127, one-period sum +-1
    for (Eigen::Index t = 0; t + 127 < s.size(); ++t) CHECK(s(t) == s(t + 127));
    double sum = 0.0;
    for (Eigen::Index t = 0; t < 127; ++t) sum += s(t);
    CHECK(std::abs(sum) == 1.0);

    // shorter register: period 31
    const Eigen::VectorXd s5 = prbs(70, 5);
    for (Eigen::Index t = 0; t + 31 < s5.size(); ++t) CHECK(s5(t) == s5(t + 31));
    bool differs_early = false;
    for (Eigen::Index t = 1; t < 31; ++t)
        if (s5(t) != s5(0)) differs_early = true;
    CHECK(differs_early);

    CHECK(prbs(300) == s); // deterministic
    CHECK_THROWS_AS(prbs(10, 2), ConfigError);
    CHECK_THROWS_AS(prbs(10, 17), ConfigError);
    CHECK_THROWS_AS(prbs(0), ConfigError);
}

TEST_CASE("output-error estimation recovers the true coefficients without noise") {
    const auto m = example_model();
    const Eigen::VectorXd u = prbs(120);
    const Eigen::VectorXd y = simulate(m, u, 0.0, 1);
    const auto fit = estimate_oe(m, u, y);
    REQUIRE(fit.converged);
    CHECK(fit.theta(0) == doctest::Approx(-1.8).epsilon(1e-6));
    CHECK(fit.theta(1) == doctest::Approx(0.9).epsilon(1e-6));
    CHECK(fit.theta(2) == doctest::Approx(0.1).epsilon(1e-6));
    CHECK(fit.sse <= 1e-12);

    // explicit start at the truth converges immediately
    Eigen::VectorXd truth(3);
    truth << -1.8, 0.9, 0.1;
    const auto fit2 = estimate_oe(m, u, y, truth);
    CHECK(fit2.converged);
    CHECK((fit2.theta - truth).norm() <= 1e-9);

    CHECK_THROWS_AS(estimate_oe(m, u, y.head(10).eval()), DimensionError);
}

TEST_CASE("noisy estimation is consistent and the Monte Carlo wrapper aggregates it") {
    const auto m = example_model();
    const Eigen::VectorXd u = prbs(150);

    const auto stats = monte_carlo_estimation(m, u, 0.01, 30, 11);
    CHECK(stats.runs == 30);
    CHECK(stats.failures <= 2);
    CHECK(std::abs(stats.mean(0) - -1.8) <= 5.0 * stats.std_error(0) + 1e-3);
    CHECK(std::abs(stats.mean(1) - 0.9) <= 5.0 * stats.std_error(1) + 1e-3);
    CHECK(std::abs(stats.mean(2) - 0.1) <= 5.0 * stats.std_error(2) + 1e-3);
    CHECK(stats.std_dev.minCoeff() > 0.0);

    // zero noise: exact recovery in every run
    const auto exact = monte_carlo_estimation(m, u, 0.0, 5, 11);
    CHECK(exact.failures == 0);
    CHECK((exact.mean - Eigen::Vector3d(-1.8, 0.9, 0.1)).norm() <= 1e-6);
    CHECK(exact.std_dev.maxCoeff() <= 1e-7);
}

TEST_CASE("configuration parsing applies defaults and validates the schema") {
    const auto cfg = parse_config(example_json());
    CHECK(cfg.horizon == 24);
    CHECK(cfg.constraint.kind == FeasibleSetKind::AmplitudeDiag);
    CHECK(cfg.constraint.amplitude.size() == 24);
    CHECK(cfg.constraint.amplitude(0) == 1.0);
    CHECK(cfg.crit.kind == CriterionKind::D);
    CHECK(cfg.candidates == 200);
    CHECK(cfg.seed == 5);
    CHECK(cfg.model.bindings.size() == 3);
    CHECK(cfg.model.coefficient(cfg.model.bindings[2]) == doctest::Approx(0.1));

    // defaults
    nlohmann::json minimal = example_json();
    minimal.erase("criterion");
    minimal.erase("candidates");
    minimal.erase("seed");
    minimal.erase("noise_variance");
    minimal.erase("monte_carlo_runs");
    const auto dflt = parse_config(minimal);
    CHECK(dflt.crit.kind == CriterionKind::D);
    CHECK(dflt.candidates == 50000);
    CHECK(dflt.seed == 1);
    CHECK(dflt.noise_variance == doctest::Approx(0.01));
    CHECK(dflt.monte_carlo_runs == 100);

    auto bad = example_json();
    bad.erase("model");
    CHECK_THROWS_AS(parse_config(bad), ConfigError);

    bad = example_json();
    bad["constraint"]["power"] = 1.0; // two constraint blocks
    CHECK_THROWS_AS(parse_config(bad), ConfigError);

    bad = example_json();
    bad["criterion"] = "Z";
    CHECK_THROWS_AS(parse_config(bad), ConfigError);

    bad = example_json();
    bad["model"]["bindings"][0]["target"] = "zeros";
    CHECK_THROWS_AS(parse_config(bad), ConfigError);

    bad = example_json();
    bad["constraint"] = {{"amplitude", {1.0, 1.0}}}; // wrong length
    CHECK_THROWS_AS(parse_config(bad), ConfigError);

    bad = example_json();
    bad["noise_variance"] = -1.0;
    CHECK_THROWS_AS(parse_config(bad), ConfigError);

    bad = example_json();
    bad["constraint"] = {{"general", {{"u_min", -1.0}}}}; // missing u_max
    CHECK_THROWS_AS(parse_config(bad), ConfigError);
}

TEST_CASE("configs round-trip through files") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "inputdesign_harness_test";
    fs::create_directories(dir);
    const std::string path = (dir / "cfg.json").string();
    {
        std::ofstream out(path);
        out << example_json().dump(2);
    }
    const auto cfg = load_config(path);
    CHECK(cfg.horizon == 24);
    CHECK_THROWS_AS(load_config((dir / "missing.json").string()), ConfigError);
    {
        std::ofstream out(path);
        out << "{ not json";
    }
    CHECK_THROWS_AS(load_config(path), ConfigError);
    fs::remove_all(dir);
}

TEST_CASE("CSV emission is byte-deterministic") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "inputdesign_csv_test";
    fs::create_directories(dir);
    Eigen::VectorXd x(3);
    x << 1.0, -0.25, 3.14159265358979312;
    write_signal_csv((dir / "a.csv").string(), "u", x);
    write_signal_csv((dir / "b.csv").string(), "u", x);
    const std::string a = slurp((dir / "a.csv").string());
    CHECK(a == slurp((dir / "b.csv").string()));
    CHECK(a.substr(0, 4) == "t,u\n");
    CHECK(a.find("1,1\n") != std::string::npos);
    CHECK(a.find("2,-0.25\n") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("ratio histogram bins, clamps and takes the median") {
    const auto h = ratio_histogram({2.0, 1.0, 0.5, -1.0, 3.0}, 2.0);
    REQUIRE(h.counts.size() == 100);
    CHECK(h.counts[99] == 2); // ratio 1 and the clamped 1.5
    CHECK(h.counts[50] == 1); // ratio 0.5
    CHECK(h.counts[25] == 1); // ratio 0.25
    CHECK(h.counts[0] == 1);  // clamped negative
    CHECK(h.median == doctest::Approx(0.5));
}

TEST_CASE("experiment reproduction emits a deterministic artifact set") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "inputdesign_repro_test";
    fs::remove_all(dir);
    const auto cfg = parse_config(example_json());

    const auto rep = reproduce_paper(cfg, (dir / "run1/out").string());
    CHECK(rep.v_R > 0.0);
    CHECK(rep.ratio > 0.0);
    CHECK(rep.ratio <= 1.0 + 1e-9);
    REQUIRE(rep.floor.has_value());
    CHECK(rep.designed_median_ratio >= rep.random_median_ratio);
    CHECK(rep.input.size() == 24);
    CHECK((rep.true_theta - Eigen::Vector3d(-1.8, 0.9, 0.1)).norm() <= 1e-12);

    for (const char* suffix :
         {"_histogram.csv", "_step_response.csv", "_u.csv", "_response.csv",
          "_estimation.csv", "_report.txt"})
        CHECK(fs::exists(dir / ("run1/out" + std::string(suffix))));

    // a second run with the same config is byte-identical
    reproduce_paper(cfg, (dir / "run2/out").string());
    for (const char* suffix :
         {"_histogram.csv", "_step_response.csv", "_u.csv", "_response.csv",
          "_estimation.csv", "_report.txt"})
        CHECK(slurp((dir / ("run1/out" + std::string(suffix))).string()) ==
              slurp((dir / ("run2/out" + std::string(suffix))).string()));

    // power constraints are rejected by the reproduction pipeline
    auto j = example_json();
    j["constraint"] = {{"power", 10.0}};
    CHECK_THROWS_AS(reproduce_paper(parse_config(j), (dir / "x").string()),
                    ConfigError);
    fs::remove_all(dir);
}
