#include "pam/quenched.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "pam/errors.hpp"
#include "pam/numerics.hpp"
#include "pam/parallel.hpp"

namespace pam {

namespace {

bool closed_form_available(const PotentialModel& model, const ModelParams& params) {
    return params.maximal_drift() || model.is_degenerate();
}

double degenerate_value(const PotentialModel& model) {
    return model.expectation([](double x) { return x; });
}

LFunctionEstimate exact_L(const PotentialModel& model, const ModelParams& params, double beta,
                          bool with_derivative) {
    LFunctionEstimate e;
    e.beta = beta;
    e.method = LMethod::Exact;
    if (model.is_degenerate()) {
        // A constant field is a fixed point of the recursion with beta shifted by c.
        const double b = beta + degenerate_value(model);
        const double w = free_hitting_weight(params, b);
        e.mean_lower = e.mean_upper = std::log(w);
        if (with_derivative) e.derivative_mean = free_hitting_weight_derivative(params, b) / w;
        return e;
    }
    const double k = params.kappa();
    if (!(k - beta > 0.0)) throw DivergentFunctional("estimate_L: beta must be below kappa at h = 1");
    e.mean_lower = e.mean_upper = model.expectation([&](double x) { return std::log(k / (k - x - beta)); });
    if (with_derivative) e.derivative_mean = model.expectation([&](double x) { return 1.0 / (k - x - beta); });
    return e;
}

void check_beta(const PotentialModel& model, const ModelParams& params, double beta) {
    const double bmax = quenched_beta_max(params, model);
    const bool bad = params.maximal_drift() ? !(beta < bmax) : beta > bmax - kBetaMargin;
    if (bad) {
        std::ostringstream os;
        os << "estimate_L: beta = " << beta << " must lie below " << bmax;
        throw PreconditionError(os.str());
    }
}

}  // namespace

double quenched_beta_max(const ModelParams& params, const PotentialModel& model) {
    return beta_cr(params, model).value;
}

LFunctionEstimate estimate_L(const std::shared_ptr<const PotentialModel>& model, const ModelParams& params,
                             double beta, const QuenchedOptions& options, bool with_derivative) {
    if (!model) throw PreconditionError("estimate_L: null model");
    if (model->ess_sup() > 0.0) throw PreconditionError("estimate_L: potential must be <= 0");
    check_beta(*model, params, beta);
    if (!options.force_birkhoff && closed_form_available(*model, params))
        return exact_L(*model, params, beta, with_derivative);
    if (options.n_sites < 2) throw PreconditionError("estimate_L: need at least two sites");

    TruncationOptions topt = options.truncation;
    topt.with_derivative = with_derivative;
    const auto last = static_cast<std::int64_t>(options.n_sites);
    auto tp = truncated_profile(model, options.seed, params, beta, 1, last, topt);
    const auto& prof = tp.profile;

    std::vector<double> logs(options.n_sites);
    num::CompensatedSum lo, up, der;
    for (std::size_t i = 0; i < options.n_sites; ++i) {
        logs[i] = std::log(prof.upper[i]);
        up.add(logs[i]);
        lo.add(std::log(prof.lower[i]));
        if (with_derivative) der.add(prof.derivative_upper[i] / prof.upper[i]);
    }
    const double n = static_cast<double>(options.n_sites);
    LFunctionEstimate e;
    e.beta = beta;
    e.method = LMethod::Birkhoff;
    e.n_sites = options.n_sites;
    e.mean_upper = up.value() / n;
    e.mean_lower = std::min(lo.value() / n, e.mean_upper);
    e.stderr_ = num::batch_mean(logs, 100).stderr_;
    if (with_derivative) e.derivative_mean = der.value() / n;
    return e;
}

std::vector<LFunctionEstimate> L_curve(const std::shared_ptr<const PotentialModel>& model,
                                       const ModelParams& params, const std::vector<double>& betas,
                                       const QuenchedOptions& options) {
    std::vector<LFunctionEstimate> out(betas.size());
    parallel_for(betas.size(), options.threads,
                 [&](std::size_t i) { out[i] = estimate_L(model, params, betas[i], options, true); });
    return out;
}

void write_L_curve_csv(std::ostream& out, const std::vector<LFunctionEstimate>& curve) {
    out << "beta,L_lower,L_upper,stderr,dL\n";
    out.precision(17);
    for (const auto& e : curve) {
        out << e.beta << ',' << e.mean_lower << ',' << e.mean_upper << ',' << e.stderr_ << ',';
        if (e.derivative_mean) out << *e.derivative_mean;
        out << '\n';
    }
}

nlohmann::json to_json(const LyapunovResult& r) {
    nlohmann::json j;
    j["value"] = r.value;
    j["bracket"] = {r.bracket[0], r.bracket[1]};
    j["residual"] = r.residual;
    j["at_boundary"] = r.at_boundary;
    j["shift"] = r.shift;
    j["method"] = r.method;
    j["seed"] = r.seed;
    j["n_sites"] = r.n_sites;
    j["kind"] = r.kind;
    j["beta_cr"] = r.beta_cr;
    j["beta_cr_formula_available"] = r.beta_cr_formula;
    j["bound_direction"] = r.bound_direction;
    if (r.kind == "annealed") {
        j["p"] = r.p;
        j["depth"] = r.depth ? nlohmann::json(*r.depth) : nlohmann::json(nullptr);
        j["conjectured"] = r.conjectured;
    }
    return j;
}

ZeroSearch find_exponent(const std::function<BracketedFunction(double)>& f, double beta_max,
                         const std::vector<double>& eps_ladder, double tol) {
    if (eps_ladder.empty()) throw PreconditionError("find_exponent: empty epsilon ladder");
    const BracketedFunction f0 = f(0.0);
    if (f0.lower >= 0.0) return {0.0, {0.0, 0.0}, std::abs(0.5 * (f0.lower + f0.upper)), false};

    // Rungs 0 < beta_1 < ... approaching beta_max.
    std::vector<double> rungs{0.0};
    std::vector<BracketedFunction> vals{f0};
    std::optional<std::size_t> cross_up, cross_lo;
    for (double eps : eps_ladder) {
        const double b = beta_max * (1.0 - eps);
        if (b <= rungs.back()) continue;
        rungs.push_back(b);
        vals.push_back(f(b));
        if (!cross_up && vals.back().upper >= 0.0) cross_up = rungs.size() - 1;
        if (!cross_lo && vals.back().lower >= 0.0) cross_lo = rungs.size() - 1;
        if (cross_lo) break;
    }
    const double last = rungs.back();
    if (!cross_up) {
        return {-beta_max, {-beta_max, -last}, 0.5 * (vals.back().lower + vals.back().upper), true};
    }

    auto root_of = [&](bool upper, std::size_t k) {
        auto g = [&](double b) {
            const auto v = f(b);
            return upper ? v.upper : v.lower;
        };
        const double a = k == 0 ? 0.0 : rungs[k - 1];
        auto r = num::brent(g, a, rungs[k], tol);
        if (!r.converged) throw NonConvergence("find_exponent: root finder did not converge");
        return r.x;
    };
    const double r_up = root_of(true, *cross_up);
    double r_lo;
    if (cross_lo) {
        r_lo = root_of(false, *cross_lo);
    } else {
        const double gap = vals.back().upper - vals.back().lower;
        if (gap > tol) {
            std::ostringstream os;
            os << "inconsistent bracket: upper estimate crosses zero near beta = " << r_up
               << " but lower estimate stays negative up to beta = " << last << " (gap " << gap
               << "); increase n_sites or the truncation tail";
            throw InconsistentBracket(os.str());
        }
        r_lo = r_up;
    }
    r_lo = std::max(r_lo, r_up);
    const double mid = 0.5 * (r_up + r_lo);
    const auto fm = f(mid);
    return {-mid, {-r_lo, -r_up}, std::abs(0.5 * (fm.lower + fm.upper)), false};
}

LyapunovResult lambda_quenched(const std::shared_ptr<const PotentialModel>& model, const ModelParams& params,
                               const QuenchedOptions& options) {
    if (!model) throw PreconditionError("lambda_quenched: null model");
    if (!(options.tol > 0.0)) throw PreconditionError("lambda_quenched: tol must be positive");
    const auto norm = std::make_shared<const PotentialModel>(normalize(*model));
    const CriticalTilt crit = beta_cr(params, *norm);
    const double bmax = quenched_beta_max(params, *norm);

    auto f = [&](double beta) {
        const auto e = estimate_L(norm, params, beta, options);
        return BracketedFunction{e.mean_lower, e.mean_upper};
    };
    const ZeroSearch z = find_exponent(f, bmax, options.eps_ladder, options.tol);

    LyapunovResult r;
    r.kind = "quenched";
    r.shift = norm->shift();
    r.value = z.value + r.shift;
    r.bracket = {z.bracket[0] + r.shift, z.bracket[1] + r.shift};
    r.residual = z.residual;
    r.at_boundary = z.at_boundary;
    r.beta_cr = crit.value;
    r.beta_cr_formula = crit.formula_available;
    const bool exact = !options.force_birkhoff && closed_form_available(*norm, params);
    r.method = exact ? "exact" : "birkhoff";
    r.bound_direction = exact ? "exact" : "estimate";
    r.seed = options.seed;
    r.n_sites = exact ? 0 : options.n_sites;
    return r;
}

std::string to_string(Phase phase) {
    switch (phase) {
        case Phase::PositiveSpeed: return "A_positive_speed";
        case Phase::Critical: return "B_critical";
        case Phase::Screening: return "C_screening";
    }
    return "unknown";
}

nlohmann::json to_json(const PhaseReport& r) {
    nlohmann::json j;
    j["case"] = to_string(r.phase);
    j["alpha_star"] = r.alpha_star ? nlohmann::json(*r.alpha_star) : nlohmann::json(nullptr);
    j["m_interval"] =
        r.m_interval ? nlohmann::json({(*r.m_interval)[0], (*r.m_interval)[1]}) : nlohmann::json(nullptr);
    j["limit_L_at_crit"] = r.limit_L_at_crit;
    j["limit_uncertainty"] = r.limit_uncertainty;
    j["widened_uncertainty"] = r.widened_uncertainty;
    return j;
}

PhaseReport optimal_speed(const std::shared_ptr<const PotentialModel>& model, const ModelParams& params,
                          const LyapunovResult& lambda0, const QuenchedOptions& options) {
    const auto norm = std::make_shared<const PotentialModel>(normalize(*model));
    const double bmax = quenched_beta_max(params, *norm);

    PhaseReport rep;
    double prev = NAN, last = NAN, last_deriv = NAN;
    for (double eps : options.eps_ladder) {
        const auto e = estimate_L(norm, params, bmax * (1.0 - eps), options, true);
        prev = last;
        last = e.value();
        last_deriv = *e.derivative_mean;
        rep.ladder.push_back({e.beta, last});
    }
    rep.limit_L_at_crit = last;
    rep.limit_uncertainty = std::isnan(prev) ? 0.0 : std::abs(last - prev);

    if (!lambda0.at_boundary) {
        const double beta0 = -lambda0.normalized();
        const auto e = estimate_L(norm, params, beta0, options, true);
        rep.phase = Phase::PositiveSpeed;
        rep.alpha_star = 1.0 / *e.derivative_mean;
        return rep;
    }
    if (std::abs(rep.limit_L_at_crit) <= 2.0 * rep.limit_uncertainty || rep.limit_L_at_crit > 0.0) {
        rep.phase = Phase::Critical;
        rep.m_interval = std::array<double, 2>{0.0, 1.0 / last_deriv};
        rep.widened_uncertainty = rep.limit_L_at_crit > 0.0 || rep.limit_uncertainty > 0.0;
        return rep;
    }
    rep.phase = Phase::Screening;
    return rep;
}

std::vector<LegendrePoint> legendre_lambda_star(const std::shared_ptr<const PotentialModel>& model,
                                                const ModelParams& params, const std::vector<double>& alpha_grid,
                                                const QuenchedOptions& options) {
    const auto norm = std::make_shared<const PotentialModel>(normalize(*model));
    const double bmax = quenched_beta_max(params, *norm);
    const double beta_hi = bmax * (1.0 - options.eps_ladder.back());
    const double L0 = estimate_L(norm, params, 0.0, options).value();
    auto Lambda = [&](double b) { return estimate_L(norm, params, b, options).value() - L0; };
    const double depth = params.kappa() - norm->ess_inf();

    std::vector<LegendrePoint> out(alpha_grid.size());
    parallel_for(alpha_grid.size(), options.threads, [&](std::size_t i) {
        const double alpha = alpha_grid[i];
        if (!(alpha > 0.0)) {
            out[i] = {alpha, INFINITY, NAN, false};
            return;
        }
        // Lambda'(beta) >= 1/(kappa - b - beta) bounds the maximizer from below.
        const double beta_lo = std::min(-1.0, depth - 2.0 / alpha - 1.0);
        auto g = [&](double b) { return alpha * b - Lambda(b); };
        const auto grid = num::linspace(beta_lo, beta_hi, 48);
        std::size_t best = 0;
        double best_v = -INFINITY;
        for (std::size_t j = 0; j < grid.size(); ++j) {
            const double v = g(grid[j]);
            if (v > best_v) {
                best_v = v;
                best = j;
            }
        }
        const double a = grid[best == 0 ? 0 : best - 1];
        const double b = grid[std::min(best + 1, grid.size() - 1)];
        auto ref = num::golden_maximize(g, a, b, 1e-10 * (1.0 + std::abs(b)));
        if (best_v > ref.fx) ref = {grid[best], best_v};
        const double edge = g(beta_hi);
        const bool at_edge = edge >= ref.fx;
        out[i] = at_edge ? LegendrePoint{alpha, edge, beta_hi, true} : LegendrePoint{alpha, ref.fx, ref.x, false};
    });
    return out;
}

VariationalResult lambda_quenched_variational(const std::shared_ptr<const PotentialModel>& model,
                                              const ModelParams& params, double alpha_max, std::size_t n_alpha,
                                              std::size_t n_beta, const QuenchedOptions& options,
                                              double grid_tol) {
    if (!(alpha_max > 0.0)) throw PreconditionError("lambda_quenched_variational: alpha_max must be positive");
    const auto norm = std::make_shared<const PotentialModel>(normalize(*model));
    const double bmax = quenched_beta_max(params, *norm);
    const double beta_hi = bmax * (1.0 - options.eps_ladder.back());
    const double beta_lo = -(2.0 * alpha_max + params.kappa() - norm->ess_inf()) - 1.0;
    auto L = [&](double b) { return estimate_L(norm, params, b, options).value(); };

    const auto betas = num::linspace(beta_lo, beta_hi, n_beta);
    std::vector<double> Lg(n_beta);
    parallel_for(n_beta, options.threads, [&](std::size_t j) { Lg[j] = L(betas[j]); });
    const auto alphas = num::linspace(0.0, alpha_max, n_alpha);

    auto coarse_inner = [&](double alpha, std::size_t* arg) {
        double m = INFINITY;
        for (std::size_t j = 0; j < n_beta; ++j) {
            const double v = -betas[j] + alpha * Lg[j];
            if (v < m) {
                m = v;
                if (arg) *arg = j;
            }
        }
        return m;
    };
    auto refined_inner = [&](double alpha) {
        std::size_t j = 0;
        const double c = coarse_inner(alpha, &j);
        const double a = betas[j == 0 ? 0 : j - 1];
        const double b = betas[std::min(j + 1, n_beta - 1)];
        auto r = num::golden_minimize([&](double x) { return -x + alpha * L(x); }, a, b, 1e-7);
        return std::min(c, r.fx);
    };

    std::size_t best = 0;
    double coarse = -INFINITY;
    for (std::size_t i = 0; i < n_alpha; ++i) {
        const double v = coarse_inner(alphas[i], nullptr);
        if (v > coarse) {
            coarse = v;
            best = i;
        }
    }
    const double a = alphas[best == 0 ? 0 : best - 1];
    const double b = alphas[std::min(best + 1, n_alpha - 1)];
    auto ref = num::golden_maximize(refined_inner, a, b, 1e-6);
    const double at_grid = refined_inner(alphas[best]);
    if (at_grid > ref.fx) ref = {alphas[best], at_grid};

    VariationalResult out;
    out.value = ref.fx + norm->shift();
    out.coarse_value = coarse + norm->shift();
    out.alpha_at = ref.x;
    out.refinement_gap = std::abs(ref.fx - coarse);
    out.grid_too_coarse = out.refinement_gap > grid_tol;
    return out;
}

}  // namespace pam
