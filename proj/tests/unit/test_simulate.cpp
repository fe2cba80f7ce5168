#include <array>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "pam/errors.hpp"
#include "pam/numerics.hpp"
#include "pam/quenched.hpp"
#include "pam/simulate.hpp"

using namespace pam;

namespace {

std::shared_ptr<const PotentialModel> make(PotentialLaw law) { return std::make_shared<PotentialModel>(std::move(law)); }

EnvironmentWindow constant_env(double c, std::int64_t M) {
    return EnvironmentWindow::from_values(std::vector<double>(static_cast<std::size_t>(2 * M + 1), c), -M);
}

// u(t, 0) at h = 1 from the Taylor series of exp(tA), A u(x) = kappa (u(x+1) - u(x)) + xi(x) u(x).
double series_u0(const EnvironmentWindow& env, double kappa, double t, int terms) {
    std::vector<double> v(static_cast<std::size_t>(terms + 1), 1.0);
    double sum = 1.0, coef = 1.0;
    for (int k = 1; k <= terms; ++k) {
        std::vector<double> next(static_cast<std::size_t>(terms + 1 - k));
        for (std::size_t x = 0; x < next.size(); ++x)
            next[x] = kappa * v[x + 1] + (env[static_cast<std::int64_t>(x)] - kappa) * v[x];
        v = std::move(next);
        coef *= t / k;
        sum += coef * v[0];
    }
    return sum;
}

// P(X_t = n) for the free walk: Skellam law of the jump counts.
double skellam(double kappa, double h, double t, std::int64_t n) {
    const double r = 0.5 * (1 + h), l = 0.5 * (1 - h);
    return std::exp(-kappa * t) * std::pow(r / l, 0.5 * static_cast<double>(n)) *
           boost::math::cyl_bessel_i(static_cast<double>(std::abs(n)), 2.0 * kappa * t * std::sqrt(r * l));
}

const double kLambda0 = -(3.0 - std::sqrt(5.0)) / 2.0;

}  // namespace

TEST_CASE("constant potentials") {
    const ModelParams p(1.0, 0.6);
    for (double c : {0.0, -0.5, -2.0}) {
        const double t = 10.0;
        const auto M = required_window(p, t);
        const auto f = solve_pde(constant_env(c, M), p, {t});
        for (std::int64_t x = -M / 2; x <= M / 2; ++x) CHECK(std::abs(f.at(0, x) - std::exp(c * t)) < 1e-8);
    }
}

TEST_CASE("solver preconditions") {
    const ModelParams p(1.0, 0.6);
    const auto env = constant_env(-1.0, 200);
    SolveOptions o;
    o.dt = 0.1 / 3.0 * 1.01;
    CHECK_THROWS_AS(solve_pde(env, p, {1.0}, o), PreconditionError);
    o.dt = 0.0;
    o.window = 10;
    CHECK_THROWS_AS(solve_pde(env, p, {1.0}, o), PreconditionError);
    CHECK_THROWS_AS(solve_pde(env, p, {100.0}), PreconditionError);
    CHECK_THROWS_AS(solve_pde(env, p, {2.0, 1.0}), PreconditionError);
}

TEST_CASE("fourth-order convergence") {
    const ModelParams p(1.0, 0.6);
    const auto env = sample_environment(make(potential::TwoPoint{1.0, 0.5}), 5, -200, 200);
    const auto r = richardson_ratio(env, p, 10.0, max_stable_dt(p, env));
    CHECK(r.ratio > 16.0 * 0.8);
    CHECK(r.ratio < 16.0 * 1.2);
}

TEST_CASE("positivity, sub-solution bound and window certificate") {
    auto tp = make(potential::TwoPoint{1.0, 0.5});
    for (double h : {0.6, 1.0}) {
        const ModelParams p(1.0, h);
        const auto env = sample_environment(tp, 11, -400, 400);
        const auto f = solve_pde(env, p, {1.0, 5.0, 20.0});
        for (std::size_t k = 0; k < f.times.size(); ++k)
            for (std::int64_t x = -f.window + 1; x < f.window; ++x) {
                CHECK(f.at(k, x) > 0.0);
                CHECK(f.at(k, x) <= 1.0);
            }
        CHECK(window_doubling_change(env, p, 20.0) < 1e-8);
    }
    const ModelParams p(1.0, 0.6);
    const auto trap = sample_environment(make(potential::TwoPoint{50.0, 0.05}), 2, -400, 400);
    CHECK(window_doubling_change(trap, p, 20.0) < 1e-8);
}

TEST_CASE("h = 1 solution matches the truncated series") {
    const ModelParams p(1.0, 1.0);
    const auto env = sample_environment(make(potential::TwoPoint{1.0, 0.5}), 3, -200, 200);
    for (double t : {0.5, 2.0, 4.0}) {
        const double s = series_u0(env, 1.0, t, 120);
        SolveOptions o;
        o.dt = 0.005;
        CHECK(std::abs(solve_pde(env, p, {t}, o).center.back() - s) < 1e-8);
        const auto mc = feynman_kac_mc(env, p, t, 20'000, 9);
        CHECK(std::abs(mc.mean - s) < 3.0 * mc.stderr_);
    }
}

TEST_CASE("quenched slopes") {
    for (double c : {0.0, -0.5, -2.0}) {
        const ModelParams p(1.0, 0.6);
        const auto t = num::linspace(0.0, 50.0, 26);
        const auto s = quenched_slope(constant_env(c, required_window(p, 50.0)), p, t);
        CHECK(std::abs(s.slope - c) < 1e-4);
    }
    const ModelParams p1(1.0, 1.0);
    const auto grid = num::linspace(0.0, 400.0, 41);
    const auto ens = quenched_slope_ensemble(make(potential::TwoPoint{1.0, 0.5}), p1, grid, 8, 1);
    CHECK(std::abs(ens.mean - kLambda0) < 0.02);
    CHECK(ens.stderr_ < 0.02);

    std::vector<double> t{1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::vector<double> bent(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) bent[i] = i < 6 ? -0.1 * t[i] : -0.6 + -1.0 * (t[i] - 6);
    CHECK_THROWS_AS(fit_slope(t, bent), NonStationarySlope);
    CHECK_THROWS_AS(fit_slope({1, 2, 3}, {0, 0, 0}), PreconditionError);
}

TEST_CASE("Feynman-Kac Monte Carlo") {
    const ModelParams p(1.0, 0.6);
    for (double c : {0.0, -0.5, -2.0}) {
        const auto mc = feynman_kac_mc(constant_env(c, 100), p, 5.0, 1000, 4);
        CHECK(mc.mean == doctest::Approx(std::exp(5.0 * c)).epsilon(1e-14));
        CHECK(mc.stderr_ == 0.0);
    }
    auto tp = make(potential::TwoPoint{1.0, 0.5});
    const auto env = sample_environment(tp, 21, -100, 100);
    const double pde = solve_pde(env, p, {5.0}).center.back();
    int inside = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const auto mc = feynman_kac_mc(env, p, 5.0, 10'000, seed);
        CHECK(mc.n_paths == 10'000);
        inside += std::abs(mc.mean - pde) < 3.0 * mc.stderr_;
    }
    CHECK(inside >= 99);
}

TEST_CASE("endpoint field") {
    const ModelParams p(1.0, 0.6);
    const auto zero = constant_env(0.0, 500);
    const auto f0 = endpoint_field(zero, p, {0.0, 5.0});
    CHECK(f0.at(0, 0) == 1.0);
    CHECK(f0.mass(0) == 1.0);
    SolveOptions fine;
    fine.dt = 0.005;
    const auto f5 = endpoint_field(zero, p, {5.0}, fine);
    for (std::int64_t n = -10; n <= 20; ++n) CHECK(std::abs(f5.at(0, n) - skellam(1.0, 0.6, 5.0, n)) < 1e-9);

    const auto g = gibbs_speed(zero, p, 100.0);
    CHECK(std::abs(g.mean_speed * 100.0 - 60.0) < 2.0);
    CHECK(std::abs(g.mean_speed - 0.6) < 2.0 / std::sqrt(100.0));
    double total = 0.0;
    for (double m : g.bin_mass) total += m;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(g.bin_edges.size() == g.bin_mass.size() + 1);

    const auto env = sample_environment(make(potential::TwoPoint{1.0, 0.5}), 8, -300, 300);
    const auto v = endpoint_field(env, p, {50.0});
    const auto u = solve_pde(env, p, {50.0});
    CHECK(std::abs(v.mass(0) - u.center.back()) < 1e-8);
}

TEST_CASE("Gibbs speed phases") {
    const ModelParams p1(1.0, 1.0);
    const auto env = sample_environment(make(potential::TwoPoint{1.0, 0.5}), 1, -900, 900);
    const auto a = gibbs_speed(env, p1, 200.0);
    CHECK(std::abs(a.mean_speed - 2.0 / std::sqrt(5.0)) < 0.1 * 2.0 / std::sqrt(5.0));
    const ModelParams p(1.0, 0.6);
    const auto trap = sample_environment(make(potential::TwoPoint{50.0, 0.05}), 1, -900, 900);
    CHECK(gibbs_speed(trap, p, 200.0).mean_speed < 0.05);
}

TEST_CASE("annealed moments") {
    const ModelParams p(1.0, 0.6);
    const auto grid = num::linspace(0.0, 20.0, 11);
    for (double c : {0.0, -0.5}) {
        const auto m = annealed_moments(make(potential::Degenerate{c}), p, {0.5, 1.0, 2.0}, grid, 3, 1);
        for (const auto& r : m) {
            REQUIRE(r.slope);
            CHECK(std::abs(r.slope->slope - c) < 1e-9);
            CHECK_FALSE(r.heavy_tail);
        }
    }
    auto tp = make(potential::TwoPoint{1.0, 0.5});
    // At h = 1 no site is revisited, so F(t) = < u(t, 0) > solves the renewal equation
    // F = g + kappa (g * F) with g(s) = < exp((xi - kappa) s) > = (e^-s + e^-2s) / 2.
    // With G1 = e^-s * F and G2 = e^-2s * F this is a 2-dimensional ODE.
    double G1 = 0.0, G2 = 0.0;
    auto F = [](double s, double a, double b) { return 0.5 * (std::exp(-s) + std::exp(-2.0 * s)) + 0.5 * (a + b); };
    const double ds = 1e-3;
    for (int i = 0; i < 10'000; ++i) {
        const double s0 = i * ds;
        auto d = [&](double s, double a, double b) {
            const double f = F(s, a, b);
            return std::array<double, 2>{f - a, f - 2.0 * b};
        };
        const auto k1 = d(s0, G1, G2);
        const auto k2 = d(s0 + ds / 2, G1 + ds / 2 * k1[0], G2 + ds / 2 * k1[1]);
        const auto k3 = d(s0 + ds / 2, G1 + ds / 2 * k2[0], G2 + ds / 2 * k2[1]);
        const auto k4 = d(s0 + ds, G1 + ds * k3[0], G2 + ds * k3[1]);
        G1 += ds / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
        G2 += ds / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
    }
    const double renewal = F(10.0, G1, G2);
    const auto a = annealed_moment(tp, ModelParams(1.0, 1.0), 1.0, 10.0, 4000, 3);
    CHECK(std::abs(a.mean - renewal) < 3.0 * a.stderr_);
    CHECK(a.n_paths == 4000);
    const auto ms = annealed_moments(tp, ModelParams(1.0, 1.0), {1.0, 2.0}, grid, 200, 3);
    CHECK(ms[0].rows.back().log_moment_over_p <= ms[1].rows.back().log_moment_over_p);
    std::ostringstream os;
    write_annealed_moments_csv(os, ms);
    CHECK(os.str().rfind("t,p,moment,stderr,log_moment_over_p,top_share\n", 0) == 0);
}

TEST_CASE("time reversal identity") {
    const ModelParams p(1.0, 0.6);
    const auto zero = constant_env(0.0, 100);
    const auto z0 = time_reversal_check(zero, p, 0, 5.0);
    CHECK(z0.lhs == z0.rhs);
    const auto z2 = time_reversal_check(zero, p, 2, 5.0);
    CHECK(std::abs(z2.lhs - z2.rhs) < 1e-8);
    CHECK(z2.lhs > 0.0);
    auto tp = make(potential::TwoPoint{1.0, 0.5});
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const auto env = sample_environment(tp, seed, -100, 100);
        const auto r = time_reversal_check(env, p, 3, 10.0);
        CHECK(std::abs(r.lhs - r.rhs) < 1e-8);
    }
    CHECK_THROWS_AS(time_reversal_check(zero, ModelParams(1.0, 1.0), 1, 1.0), PreconditionError);
}

TEST_CASE("killed particle system") {
    const ModelParams p(1.0, 0.6);
    const double t = 5.0;
    const auto M = required_window(p, t);
    const auto r0 = branching_expectation_check(constant_env(0.0, M), p, t, 2000, 1);
    CHECK(r0.pde == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(r0.count.mean - 1.0) < 3.0 * r0.count.stderr_);
    const auto r1 = branching_expectation_check(constant_env(-1.0, M), p, t, 20'000, 2);
    CHECK(r1.pde == doctest::Approx(std::exp(-t)).epsilon(1e-8));
    CHECK(r1.agrees);
    const auto env = sample_environment(make(potential::TwoPoint{1.0, 0.5}), 4, -M, M);
    CHECK(branching_expectation_check(env, p, t, 4000, 3).agrees);
    CHECK_THROWS_AS(branching_expectation_check(constant_env(0.5, M), p, t, 10, 1), PreconditionError);
}

TEST_CASE("gap passage probabilities") {
    const ModelParams p1(1.0, 1.0);
    const auto zero = EnvironmentWindow::from_values(std::vector<double>(60, 0.0), 0);
    const std::size_t n = 20;
    // T_0 is Gamma(n, kappa) for the free walk at h = 1.
    const double exact = boost::math::gamma_p(20.0, 1.5 * 20.0) - boost::math::gamma_p(20.0, 1.2 * 20.0);
    for (double theta : {0.0, 0.2}) {
        const auto e = passage_probability(zero, p1, n, 1.2, 1.5, 20'000, 5, theta);
        CHECK(std::abs(e.probability - exact) < 3.0 * e.stderr_);
    }
    auto tp = make(potential::TwoPoint{1.0, 0.5});
    const auto env = sample_environment(tp, 6, 0, 400);
    const auto all = passage_probability(env, p1, 50, 0.0, 1e9, 20'000, 7, 0.3);
    CHECK(std::abs(all.probability - 1.0) < 3.0 * all.stderr_);
    const ModelParams p(1.0, 0.6);
    const auto norm = passage_probability(env, p, 30, 0.0, 1e9, 20'000, 8);
    CHECK(std::abs(norm.probability - 1.0) < 3.0 * norm.stderr_);
    CHECK_THROWS_AS(passage_probability(env, p, 30, 0.0, 1.0, 10, 1, 0.1), PreconditionError);
}

TEST_CASE("csv outputs") {
    const ModelParams p(1.0, 0.6);
    const auto env = constant_env(-0.5, 100);
    std::ostringstream a, b;
    write_slope_csv(a, solve_pde(env, p, {0.0, 1.0}));
    CHECK(a.str().rfind("t,u0,logu0_over_t\n", 0) == 0);
    write_endpoint_csv(b, endpoint_field(env, p, {1.0}));
    CHECK(b.str().rfind("n,v,v_normalized\n", 0) == 0);
}
