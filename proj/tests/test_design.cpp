#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "fracreg/charpoly.hpp"
#include "fracreg/design.hpp"
#include "fracreg/errors.hpp"
#include "fracreg/simulate.hpp"

using namespace fracreg;

namespace {

const Plant kPlant{1.0, 0.5, 0.8, 2.2, 0.9};
const Complex kPole{-1.0, 6.0};

DesignSpecPd pd_spec(double ess) { return {kPlant, kPole, ess, std::nullopt}; }

bool contains(const std::vector<Root>& roots, Complex target, double tol) {
    return std::any_of(roots.begin(), roots.end(),
                       [&](const Root& r) { return std::abs(r.value - target) <= tol; });
}

// Smallest achievable max_i |f(p_i)| / |a0 + K| over lambda in (0, 4], with K
// and Ti solved exactly by least squares at every lambda.
double best_pi_residual(const Plant& pl, const std::array<Complex, 3>& poles) {
    double best = INFINITY;
    for (int i = 1; i <= 4000; ++i) {
        const double lam = i * 1e-3;
        Eigen::MatrixXd a(6, 2);
        Eigen::VectorXd b(6);
        for (int k = 0; k < 3; ++k) {
            const Complex s = poles[k];
            const Complex sl = std::pow(s, lam);
            const Complex base = pl.a2 * std::pow(s, pl.alpha + lam) + pl.a1 * std::pow(s, pl.beta + lam) + pl.a0 * sl;
            a.row(2 * k) << sl.real(), 1.0;
            a.row(2 * k + 1) << sl.imag(), 0.0;
            b[2 * k] = -base.real();
            b[2 * k + 1] = -base.imag();
        }
        const Eigen::VectorXd x = a.colPivHouseholderQr().solve(b);
        double worst = 0.0;
        for (int k = 0; k < 3; ++k) {
            const Complex s = poles[k];
            const Complex f = pl.a2 * std::pow(s, pl.alpha + lam) + pl.a1 * std::pow(s, pl.beta + lam) +
                              (pl.a0 + x[0]) * std::pow(s, lam) + x[1];
            worst = std::max(worst, std::abs(f) / std::abs(pl.a0 + x[0]));
        }
        best = std::min(best, worst);
    }
    return best;
}

} // namespace

TEST_CASE("gain_from_ss_error") {
    CHECK(gain_from_ss_error(1.0, 4.0) == 24.0);
    CHECK(gain_from_ss_error(1.0, 2.0) == 49.0);
    CHECK(gain_from_ss_error(1.0, 50.0) == 1.0);
    CHECK(gain_from_ss_error(2.0, 4.0) == 48.0);
    CHECK_THROWS_AS(gain_from_ss_error(1.0, 0.0), InvalidArgument);
    CHECK_THROWS_AS(gain_from_ss_error(1.0, 100.0), InvalidArgument);
    CHECK_THROWS_AS(gain_from_ss_error(0.0, 4.0), InvalidArgument);
}

TEST_CASE("fractional PD design for 4% steady-state error") {
    const auto c = design_pd_fractional(pd_spec(4.0));
    CHECK(c.K == 24.0);
    CHECK(std::abs(c.Td - 6.9407) <= 1e-3);
    CHECK(std::abs(c.delta - 0.71859) <= 1e-3);
    CHECK(std::abs(eval_fracpoly(char_poly_pd(kPlant, c), kPole)) <= 1e-8 * 25.0);

    // Closed-form identities for this example.
    CHECK(std::abs(c.delta - std::atan(2.9839) * 1.8098 / std::numbers::pi) <= 1e-3);
    const double lhs = c.Td * c.Td * std::pow(37.0, c.delta);
    CHECK(std::abs(lhs - 645.2174) <= 1e-3 * 645.2174);
}

TEST_CASE("fractional PD design for 2% steady-state error") {
    const auto c = design_pd_fractional(pd_spec(2.0));
    CHECK(c.K == 49.0);
    CHECK(std::abs(c.Td - (-79.744)) <= 0.01);
    CHECK(std::abs(c.delta - (-0.55194)) <= 1e-3);
    CHECK(std::abs(eval_fracpoly(char_poly_pd(kPlant, c), kPole)) <= 1e-8 * 50.0);
}

TEST_CASE("fractional PD design with a fixed gain") {
    const auto c = design_pd_fractional({kPlant, kPole, std::nullopt, 24.0});
    CHECK(c == design_pd_fractional(pd_spec(4.0)));
    CHECK_THROWS_AS(design_pd_fractional({kPlant, kPole, 4.0, 24.0}), InvalidArgument);
    CHECK_THROWS_AS(design_pd_fractional({kPlant, kPole, std::nullopt, std::nullopt}), InvalidArgument);
    CHECK_THROWS_AS(design_pd_fractional({kPlant, {-1.0, 0.0}, 4.0, std::nullopt}), InvalidArgument);
}

TEST_CASE("fractional PD design recovers a planted integer PD loop") {
    // s^2 + (1 + Td) s + (1 + K) with roots 0.5 +- 2i: Td = -2, K = 3.25.
    const Plant plant{1.0, 1.0, 1.0, 2.0, 1.0};
    const Complex pole{0.5, 2.0};
    const auto linear = design_pd_integer({plant, pole, std::nullopt, std::nullopt});
    CHECK(linear.K == doctest::Approx(3.25));
    CHECK(linear.Td == doctest::Approx(-2.0));
    const auto c = design_pd_fractional({plant, pole, std::nullopt, linear.K});
    CHECK(std::abs(c.delta - 1.0) <= 1e-6);
    CHECK(std::abs(c.Td - linear.Td) <= 1e-6);
}

TEST_CASE("fractional PD design returns the smallest-|delta| branch") {
    // Pole -1 + 2i of s^2 + 2s + 5 (K = 4, Td = 1, delta = 1). A second
    // branch with negative delta also places the pole; it is preferred.
    const Plant plant{1.0, 1.0, 1.0, 2.0, 1.0};
    const Complex pole{-1.0, 2.0};
    CHECK(std::abs(eval_fracpoly(char_poly_pd(plant, {4.0, 1.0, 1.0}), pole)) < 1e-12);
    const auto c = design_pd_fractional({plant, pole, std::nullopt, 4.0});
    CHECK(std::abs(c.delta) < 1.0);
    CHECK(c.delta < 0.0);
    CHECK(std::abs(eval_fracpoly(char_poly_pd(plant, c), pole)) <= 1e-8 * 5.0);
}

TEST_CASE("design from a pole equals design from its conjugate") {
    for (double ess : {4.0, 2.0}) {
        const auto a = design_pd_fractional(pd_spec(ess));
        const auto b = design_pd_fractional({kPlant, std::conj(kPole), ess, std::nullopt});
        CHECK(a == b);
    }
    CHECK(design_pd_integer(pd_spec(4.0)) == design_pd_integer({kPlant, std::conj(kPole), 4.0, std::nullopt}));
}

TEST_CASE("integer PD design") {
    const auto c = design_pd_integer({kPlant, kPole, std::nullopt, std::nullopt});
    CHECK(std::abs(c.K - 36.0854) <= 1e-3);
    CHECK(std::abs(c.Td - 4.0141) <= 1e-3);
    CHECK(c.delta == 1.0);
    CHECK(std::abs(eval_fracpoly(char_poly_pd(kPlant, c), kPole)) < 1e-9);

    const auto simple = design_pd_integer({{0.0, 0.0, 1.0, 2.0, 0.5}, {-1.0, 1.0}, std::nullopt, std::nullopt});
    CHECK(simple.Td == doctest::Approx(2.0));
    CHECK(simple.K == doctest::Approx(2.0));

    CHECK_THROWS_AS(design_pd_integer({kPlant, {-2.0, 0.0}, std::nullopt, std::nullopt}), NoSolution);
}

TEST_CASE("designed poles are found again by the root finder") {
    for (double ess : {4.0, 2.0}) {
        const auto c = design_pd_fractional(pd_spec(ess));
        const std::vector<Complex> poles{kPole, std::conj(kPole)};
        const auto cfg = RootFindConfig::around(poles);
        const auto report = find_roots(char_poly_pd(kPlant, c), cfg);
        CHECK(contains(report.roots, kPole, 10.0 * cfg.newton_tol));
        CHECK(contains(report.roots, std::conj(kPole), 10.0 * cfg.newton_tol));
        CHECK(report.verdict == (ess == 4.0 ? Verdict::Stable : Verdict::Unstable));
    }
}

TEST_CASE("steady-state error of the simulated design matches the requested error") {
    const auto c = design_pd_fractional(pd_spec(4.0));
    SimConfig cfg;
    const auto traj = simulate_state_space(build_pd_model(kPlant, c), cfg);
    const double ess = 100.0 * (1.0 - steady_state_estimate(traj, 2.0).mean);
    CHECK(std::abs(ess - 4.0) <= 0.5);
}

TEST_CASE("PI design recovers a planted integer loop") {
    // K = 5, Ti = 4, lambda = 1 on (1, 2, 1, 2, 1): s^3 + 2 s^2 + 6 s + 4.
    const Plant plant{1.0, 2.0, 1.0, 2.0, 1.0};
    const PiController planted{5.0, 4.0, 1.0};
    const auto roots = find_roots(char_poly_pi(plant, planted));
    REQUIRE(roots.method == RootMethod::Commensurate);
    REQUIRE(roots.roots.size() == 3);
    const DesignSpecPi spec{plant, {roots.roots[0].value, roots.roots[1].value, roots.roots[2].value}};
    const auto c = design_pi(spec);
    CHECK(std::abs(c.K - 5.0) <= 1e-6);
    CHECK(std::abs(c.Ti - 4.0) <= 1e-6);
    CHECK(std::abs(c.lambda - 1.0) <= 1e-6);
    const auto poly = char_poly_pi(plant, c);
    for (const auto& p : spec.poles) {
        CHECK(std::abs(eval_fracpoly(poly, p)) <= 1e-8 * (plant.a0 + c.K));
    }
    // Stable, so the step response settles at the reference.
    SimConfig cfg;
    cfg.t_end = 30.0;
    const auto traj = simulate_state_space(build_pi_model(plant, c), cfg);
    CHECK(std::abs(steady_state_estimate(traj, 2.0).mean - 1.0) <= 0.01);
}

TEST_CASE("PI design with three real poles") {
    // (s + 1)(s + 2)(s + 3) = s^3 + 6 s^2 + 11 s + 6 on (1, 6, 1, 2, 1): K = 10, Ti = 6.
    const Plant plant{1.0, 6.0, 1.0, 2.0, 1.0};
    const auto c = design_pi({plant, {Complex(-1.0), Complex(-2.0), Complex(-3.0)}});
    CHECK(std::abs(c.K - 10.0) <= 1e-6);
    CHECK(std::abs(c.Ti - 6.0) <= 1e-6);
    CHECK(std::abs(c.lambda - 1.0) <= 1e-6);
}

TEST_CASE("PI design rejects infeasible and malformed pole sets") {
    const std::array<Complex, 3> wild{Complex(-1e6, 1e6), Complex(-1e6, -1e6), Complex(-1e-6, 0.0)};
    CHECK(best_pi_residual(kPlant, wild) > 1e-3);
    CHECK_THROWS_AS(design_pi({kPlant, wild}), NoSolution);

    CHECK_THROWS_AS(design_pi({kPlant, {Complex(-1.0, 1.0), Complex(-1.0, 2.0), Complex(-1.0)}}),
                    InvalidArgument);
}
