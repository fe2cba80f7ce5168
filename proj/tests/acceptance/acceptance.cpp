// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Tolerances and runtime budgets are fixed in advance; nothing here is tuned to results.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pam/annealed.hpp"
#include "pam/errors.hpp"
#include "pam/hitting.hpp"
#include "pam/numerics.hpp"
#include "pam/quenched.hpp"
#include "pam/simulate.hpp"

using namespace pam;

namespace {

const double kLambda0 = -(3.0 - std::sqrt(5.0)) / 2.0;
const double kLambda1 = -1.0 + std::sqrt(2.0) / 2.0;

std::shared_ptr<const PotentialModel> make(PotentialLaw law) { return std::make_shared<PotentialModel>(std::move(law)); }

std::shared_ptr<const PotentialModel> benchmark() { return make(potential::TwoPoint{1.0, 0.5}); }

EnvironmentWindow constant_env(double c, std::int64_t M) {
    return EnvironmentWindow::from_values(std::vector<double>(static_cast<std::size_t>(2 * M + 1), c), -M);
}

// Root of 1/2 [(1+b)^-2 + (2+b)^-2] = 1 on (-1, 0) by bisection, independent of the library.
double lambda2_oracle() {
    double lo = -1.0 + 1e-12, hi = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double b = 0.5 * (lo + hi);
        const double g = 0.5 * (1.0 / ((1.0 + b) * (1.0 + b)) + 1.0 / ((2.0 + b) * (2.0 + b)));
        (g > 1.0 ? lo : hi) = b;
    }
    return 0.5 * (lo + hi);
}

/// Records failed sub-checks with a short reason; the first few are printed.
struct Checks {
    std::vector<std::string> failures;
    std::size_t count = 0;
    void operator()(bool ok, const std::string& what) {
        ++count;
        if (!ok) failures.push_back(what);
    }
};

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(10);
    os << x;
    return os.str();
}

struct Outcome {
    bool pass;
    std::string detail;
};

Outcome finish(const Checks& c, const std::string& summary) {
    if (c.failures.empty()) return {true, summary + " [" + std::to_string(c.count) + " checks]"};
    std::string d = summary + " [" + std::to_string(c.failures.size()) + "/" + std::to_string(c.count) + " failed:";
    for (std::size_t i = 0; i < std::min<std::size_t>(3, c.failures.size()); ++i) d += " " + c.failures[i] + ";";
    return {false, d + "]"};
}

Outcome degenerate_chain() {
    Checks ok;
    double worst = 0.0;
    for (double c : {0.0, -0.5, -2.0}) {
        const auto model = make(potential::Degenerate{c});
        auto close = [&](double v, const std::string& what) {
            worst = std::max(worst, std::abs(v - c));
            ok(std::abs(v - c) < 1e-3, what + " c=" + fmt(c) + " got " + fmt(v));
        };
        for (double h : {1.0, 0.6}) {
            const ModelParams p(1.0, h);
            close(lambda_quenched(model, p).value, "lambda0 h=" + fmt(h));
            for (double pp : {1.0, 2.0}) {
                for (auto m : {AnnealedMethod::ClosedFormH1, AnnealedMethod::TiltedProduct, AnnealedMethod::Transfer}) {
                    if (m == AnnealedMethod::ClosedFormH1 && h < 1.0) continue;
                    AnnealedOptions o;
                    o.method = m;
                    close(lambda_annealed(model, p, pp, o).value, "lambda_p " + to_string(m));
                }
                if (h == 1.0) close(lambda_annealed_maxdrift(p, *model, pp).value, "lambda_p maxdrift");
            }
            const auto env = constant_env(c, required_window(p, 100.0));
            close(quenched_slope(env, p, num::linspace(0.0, 100.0, 41)).slope, "PDE slope");
            const double t = 5.0;
            const McEstimate mc = feynman_kac_mc(constant_env(c, required_window(p, t)), p, t, 10'000, 1);
            const double exact = std::exp(c * t);
            ok(std::abs(mc.mean - exact) <= std::max(3.0 * mc.stderr_, 1e-12 * exact),
               "FK-MC c=" + fmt(c) + " mean " + fmt(mc.mean) + " se " + fmt(mc.stderr_));
        }
    }
    return finish(ok, "max |lambda - c| = " + fmt(worst));
}

Outcome free_field() {
    Checks ok;
    double worst = 0.0;
    const auto zero = make(potential::Degenerate{0.0});
    for (double h : {0.3, 0.6, 0.9, 1.0}) {
        const ModelParams p(1.0, h);
        const double bcr = free_critical_beta(p);
        auto betas = num::linspace(-0.5, bcr - 1e-6, 40);
        const auto env = sample_environment(zero, 1, 1, 201);
        for (double beta : betas) {
            const auto prof = hitting_profile(env, p, beta);
            const double w = free_hitting_weight(p, beta);
            for (std::size_t i = 0; i < prof.size(); ++i) {
                const double d = std::max(std::abs(prof.upper[i] - w), std::abs(prof.lower[i] - w));
                worst = std::max(worst, d);
                ok(d <= 1e-12, "h=" + fmt(h) + " beta=" + fmt(beta) + " diff " + fmt(d));
            }
        }
    }
    const double w = free_hitting_weight(ModelParams(1.0, 0.6), 0.2);
    ok(std::abs(w - 2.0) <= 1e-12, "w(0.2) at h=0.6 is " + fmt(w));
    return finish(ok, "max sitewise diff " + fmt(worst) + ", w(kappa=1,h=0.6,beta=0.2) = " + fmt(w));
}

Outcome benchmark_exponents() {
    Checks ok;
    const auto tp = benchmark();
    const ModelParams p(1.0, 1.0);
    const double l2 = lambda2_oracle();
    const double l0 = lambda_quenched(tp, p).value;
    ok(std::abs(l0 - kLambda0) < 1e-8, "lambda0 " + fmt(l0));
    std::vector<double> lam;
    for (int pp : {1, 2}) {
        const double target = pp == 1 ? kLambda1 : l2;
        const double tol = pp == 1 ? 1e-8 : 1e-6;
        AnnealedOptions o;
        const double a = lambda_annealed(tp, p, pp, o).value;
        const double m = lambda_annealed_maxdrift(p, *tp, pp).value;
        o.method = AnnealedMethod::TiltedProduct;
        const double t = lambda_annealed(tp, p, pp, o).value;
        ok(std::abs(a - target) < tol, "lambda_" + std::to_string(pp) + " " + fmt(a));
        ok(std::abs(a - m) < 1e-8 && std::abs(a - t) < 1e-8 && std::abs(m - t) < 1e-8,
           "pairwise p=" + std::to_string(pp) + ": " + fmt(a) + " " + fmt(m) + " " + fmt(t));
        lam.push_back(a);
    }
    ok(l0 < lam[0] && lam[0] < lam[1] && lam[1] < 0.0, "ordering");
    return finish(ok, "lambda0 " + fmt(l0) + ", lambda1 " + fmt(lam[0]) + ", lambda2 " + fmt(lam[1]) + " (oracle " +
                          fmt(l2) + ")");
}

Outcome simulation_cross_validation() {
    Checks ok;
    const auto tp = benchmark();
    const ModelParams p(1.0, 1.0);
    const auto ens = quenched_slope_ensemble(tp, p, num::linspace(0.0, 400.0, 41), 8, 1);
    ok(std::abs(ens.mean - kLambda0) < 0.02, "quenched slope " + fmt(ens.mean));
    const auto ms = annealed_moments(tp, p, {1.0, 2.0}, num::linspace(0.0, 30.0, 16), 10'000, 1);
    const double targets[] = {kLambda1, lambda2_oracle()};
    std::string d = "PDE slope " + fmt(ens.mean) + " (se " + fmt(ens.stderr_) + ")";
    for (std::size_t i = 0; i < 2; ++i) {
        const bool has = ms[i].slope.has_value();
        ok(has, "p=" + fmt(ms[i].p) + " has no reliable fit window");
        if (!has) continue;
        ok(std::abs(ms[i].slope->slope - targets[i]) < 0.04, "annealed p=" + fmt(ms[i].p) + " " + fmt(ms[i].slope->slope));
        d += ", p=" + fmt(ms[i].p) + " slope " + fmt(ms[i].slope->slope);
    }
    return finish(ok, d);
}

Outcome transfer_consistency() {
    Checks ok;
    const auto tp = benchmark();
    std::string d;
    for (double pp : {1.0, 2.0}) {
        AnnealedOptions closed;
        closed.method = AnnealedMethod::ClosedFormH1;
        const double ref = lambda_annealed(tp, ModelParams(1.0, 1.0), pp, closed).value;
        AnnealedOptions tr;
        tr.method = AnnealedMethod::Transfer;
        tr.depth = 4;
        const double near = lambda_annealed(tp, ModelParams(1.0, 0.99), pp, tr).value;
        ok(std::abs(near - ref) < 1e-2, "h=0.99 p=" + fmt(pp) + " " + fmt(near) + " vs " + fmt(ref));
        d += "p=" + fmt(pp) + ": h=0.99 d=4 " + fmt(near) + " vs " + fmt(ref) + "; ";

        std::vector<double> ladder;
        for (int depth : {2, 3, 4, 5}) {
            tr.depth = depth;
            ladder.push_back(lambda_annealed(tp, ModelParams(1.0, 0.6), pp, tr).value);
        }
        std::vector<double> diffs;
        for (std::size_t i = 1; i < ladder.size(); ++i) diffs.push_back(std::abs(ladder[i] - ladder[i - 1]));
        for (std::size_t i = 1; i < diffs.size(); ++i)
            ok(diffs[i] < diffs[i - 1], "h=0.6 ladder p=" + fmt(pp) + " diffs " + fmt(diffs[i - 1]) + " " + fmt(diffs[i]));
        d += "h=0.6 ladder diffs " + fmt(diffs[0]) + " " + fmt(diffs[1]) + " " + fmt(diffs[2]) + "; ";
    }
    return finish(ok, d);
}

Outcome entropy_suite() {
    Checks ok;
    double worst_chain = 0.0, worst_tilt = 0.0;
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    auto random_law = [&](std::size_t s) {
        std::vector<double> w(s);
        double t = 0.0;
        for (auto& x : w) t += (x = u(rng));
        for (auto& x : w) x /= t;
        return w;
    };
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t s = 2 + static_cast<std::size_t>(trial % 3);
        MarkovMeasure nu;
        nu.initial = random_law(s);
        for (std::size_t i = 0; i < s; ++i) nu.transition.push_back(random_law(s));
        const auto rho = random_law(s);
        for (int n = 1; n <= 3; ++n) {
            const auto r = entropy_chain_identity(nu, rho, n);
            worst_chain = std::max(worst_chain, std::abs(r.lhs - r.rhs));
            ok(std::abs(r.lhs - r.rhs) < 1e-10, "chain n=" + std::to_string(n) + " diff " + fmt(r.lhs - r.rhs));
        }
    }

    const auto tp = benchmark();
    for (double pp : {0.5, 1.0, 3.0}) {
        for (double h : {1.0, 0.6}) {
            const ModelParams par(1.0, h);
            const double beta = h == 1.0 ? 0.3 : 0.1;
            const double tail = free_hitting_weight(par, beta);
            auto f = [&](double a) {
                const double g = 1.0 / (1.0 - a - beta);
                return std::log(0.5 * (1.0 + h) * g / (1.0 - 0.5 * (1.0 - h) * g * tail));
            };
            double best = -INFINITY;
            for (int i = 0; i <= 200; ++i) {
                const double x = i / 200.0;
                const FiniteMeasure mu{{-1.0, 0.0}, {1.0 - x, x}};
                best = std::max(best, (1.0 - x) * f(-1.0) + x * f(0.0) - relative_entropy(mu, *tp->marginal()) / pp);
            }
            const double v = lp_sup_tilted(par, *tp, beta, pp).value;
            worst_tilt = std::max(worst_tilt, std::abs(v - best));
            ok(std::abs(v - best) < 1e-4, "tilt p=" + fmt(pp) + " h=" + fmt(h) + " " + fmt(v) + " vs " + fmt(best));
        }
    }

    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t s = 2 + static_cast<std::size_t>(trial % 4);
        std::vector<double> atoms(s);
        for (std::size_t i = 0; i < s; ++i) atoms[i] = -static_cast<double>(i);
        const FiniteMeasure eta{atoms, random_law(s)};
        const FiniteMeasure mu{atoms, random_law(s)};
        ok(relative_entropy(eta, eta) == 0.0, "H(eta|eta) != 0");
        ok(relative_entropy(mu, eta) > 0.0, "H(mu|eta) <= 0 for mu != eta");
    }
    return finish(ok, "chain max diff " + fmt(worst_chain) + ", tilt vs grid max diff " + fmt(worst_tilt));
}

Outcome structural_sweep() {
    Checks ok;
    const auto tp = benchmark();
    const std::vector<double> kappas{0.5, 1.0, 2.0, 4.0};
    const std::vector<double> ps{0.5, 1.0, 2.0, 3.0};
    const double slack = 1e-9;
    auto convex_triples = [&](const std::vector<double>& x, const std::vector<double>& y, const std::string& what) {
        for (std::size_t i = 1; i + 1 < x.size(); ++i) {
            const double chord = y[i - 1] + (y[i + 1] - y[i - 1]) * (x[i] - x[i - 1]) / (x[i + 1] - x[i - 1]);
            ok(y[i] <= chord + slack, what + " at " + fmt(x[i]));
        }
    };
    for (double h : {1.0, 0.6}) {
        std::vector<double> l0;
        for (double k : kappas) {
            const ModelParams p(k, h);
            const double bcr = beta_cr(p, *tp).value;
            const auto scan = intermittency_scan(tp, p, ps);
            l0.push_back(scan.lambda0);
            std::vector<double> plp;
            for (std::size_t i = 0; i < scan.rows.size(); ++i) {
                const double l = scan.rows[i].lambda;
                ok(l >= -bcr - slack && l <= slack, "range kappa=" + fmt(k) + " p=" + fmt(ps[i]));
                if (i > 0) ok(l >= scan.rows[i - 1].lambda - slack, "monotone kappa=" + fmt(k) + " p=" + fmt(ps[i]));
                plp.push_back(ps[i] * l);
            }
            ok(scan.rows.front().lambda >= scan.lambda0 - slack, "above lambda0 kappa=" + fmt(k));
            convex_triples(ps, plp, "p lambda_p convex h=" + fmt(h) + " kappa=" + fmt(k));
        }
        for (std::size_t i = 1; i < l0.size(); ++i) ok(l0[i] <= l0[i - 1] + slack, "lambda0 nonincreasing h=" + fmt(h));
        convex_triples(kappas, l0, "lambda0 convex in kappa h=" + fmt(h));
    }
    const double l005 = lambda_annealed(tp, ModelParams(1.0, 1.0), 0.05).value;
    ok(std::abs(l005 - kLambda0) < 0.02, "continuity gap " + fmt(l005 - kLambda0));
    return finish(ok, "|lambda_0.05 - lambda0| = " + fmt(std::abs(l005 - kLambda0)));
}

Outcome optimal_speed_and_screening() {
    Checks ok;
    std::string d;
    for (double h : {0.6, 1.0}) {
        const ModelParams p(1.0, h);
        const double t = 100.0;
        const auto g = gibbs_speed(constant_env(0.0, required_window(p, t)), p, t);
        ok(std::abs(g.mean_speed - h) <= 2.0 / std::sqrt(t), "free field h=" + fmt(h) + " mean " + fmt(g.mean_speed));
        d += "free h=" + fmt(h) + " " + fmt(g.mean_speed) + "; ";
    }
    const auto tp = benchmark();
    const ModelParams p1(1.0, 1.0);
    const auto phase = optimal_speed(tp, p1, lambda_quenched(tp, p1));
    ok(phase.alpha_star.has_value(), "no alpha* for case A");
    const double alpha = phase.alpha_star.value_or(NAN);
    d += "alpha* " + fmt(alpha) + ", case A";
    for (std::uint64_t seed : {1, 2, 3}) {
        const auto env = sample_environment(tp, seed, -900, 900);
        const double m = gibbs_speed(env, p1, 200.0).mean_speed;
        ok(std::abs(m - alpha) < 0.1 * alpha, "case A seed " + std::to_string(seed) + " mean " + fmt(m));
        d += " " + fmt(m);
    }
    const ModelParams p6(1.0, 0.6);
    const auto trap = make(potential::TwoPoint{50.0, 0.05});
    d += "; deep trap";
    for (std::uint64_t seed : {1, 2, 3}) {
        const double m = gibbs_speed(sample_environment(trap, seed, -900, 900), p6, 200.0).mean_speed;
        ok(m < 0.05, "deep trap seed " + std::to_string(seed) + " mean " + fmt(m));
        d += " " + fmt(m);
    }
    return finish(ok, d);
}

Outcome time_reversal() {
    Checks ok;
    double worst = 0.0, smallest = INFINITY;
    const auto tp = benchmark();
    // h = 0.5 makes the ratio (1-h)/(1+h) = 1/3 inexact in binary; at h = 0.6 it is 1/4.
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const ModelParams p(1.0, seed % 2 ? 0.6 : 0.5);
        const auto env = sample_environment(tp, seed, -120, 120);
        for (std::int64_t n : {0, 1, 2, 3})
            for (double t : {1.0, 5.0, 10.0}) {
                const auto r = time_reversal_check(env, p, n, t);
                const double d = std::abs(r.lhs - r.rhs);
                worst = std::max(worst, d);
                smallest = std::min(smallest, r.lhs);
                ok(r.lhs > 0.0 && d < 1e-8, "seed " + std::to_string(seed) + " n=" + std::to_string(n) + " t=" + fmt(t) + " diff " + fmt(d));
            }
    }
    return finish(ok, "max |lhs - rhs| = " + fmt(worst) + ", smallest side " + fmt(smallest));
}

Outcome ldp_sanity() {
    Checks ok;
    const auto tp = benchmark();
    const ModelParams p(1.0, 1.0);
    const std::size_t n = 200;
    const double a = 1.5, b = 1.6;
    const auto ls = legendre_lambda_star(tp, p, num::linspace(a, b, 11));
    double target = INFINITY, theta = 0.0;
    for (const auto& pt : ls)
        if (pt.value < target) target = pt.value, theta = pt.beta_star;
    const auto env = sample_environment(tp, 3, 0, static_cast<std::int64_t>(n) + 10);
    const auto e = passage_probability(env, p, n, a, b, 100'000, 1, theta);
    const double rel = std::abs(e.rate - target) / target;
    ok(std::isfinite(e.rate) && rel < 0.15, "rate " + fmt(e.rate) + " vs " + fmt(target));
    return finish(ok, "rate " + fmt(e.rate) + ", inf Lambda* " + fmt(target) + ", relative error " + fmt(rel));
}

struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "degenerate chain", 30, degenerate_chain},
        {2, "free-field closed form", 5, free_field},
        {3, "maximal-drift benchmark", 5, benchmark_exponents},
        {4, "simulation cross-validation", 300, simulation_cross_validation},
        {5, "transfer-operator consistency", 120, transfer_consistency},
        {6, "entropy suite", 10, entropy_suite},
        {7, "structural Lyapunov properties", 120, structural_sweep},
        {8, "optimal speed and screening", 180, optimal_speed_and_screening},
        {9, "time-reversal identity", 60, time_reversal},
        {10, "LDP sanity", 180, ldp_sanity},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_budget = secs < c.budget_s;
        const bool pass = o.pass && in_budget;
        failed += pass ? 0 : 1;
        std::printf("%s criterion %d (%s): %s; %.1f s of %.0f s%s\n", pass ? "PASS" : "FAIL", c.id, c.name,
                    o.detail.c_str(), secs, c.budget_s, in_budget ? "" : " (over budget)");
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
