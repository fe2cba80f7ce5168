#include "pam/annealed.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "pam/errors.hpp"
#include "pam/hitting.hpp"
#include "pam/numerics.hpp"
#include "pam/parallel.hpp"

namespace pam {

namespace {

bool is_integer(double p) { return p == std::floor(p); }

void require_positive_p(double p) {
    if (!(p > 0.0) || !std::isfinite(p)) throw PreconditionError("moment order p must be positive and finite");
}

void require_admissible(const ModelParams& params, double beta) {
    const double crit = free_critical_beta(params);
    if (params.maximal_drift() ? !(beta < crit) : beta > crit - kBetaMargin) {
        std::ostringstream os;
        os << "beta = " << beta << " must lie below the critical tilt " << crit;
        throw PreconditionError(os.str());
    }
}

// Charged atoms of an i.i.d. finite-support law.
FiniteMeasure charged(const PotentialModel& eta) {
    auto m = eta.marginal();
    if (!m) throw PreconditionError("finite-support potential required");
    FiniteMeasure out;
    for (std::size_t i = 0; i < m->size(); ++i) {
        if (m->weights[i] > 0.0) {
            out.atoms.push_back(m->atoms[i]);
            out.weights.push_back(m->weights[i]);
        }
    }
    return out;
}

// w at the first site of `tuple`, closed by `tail` beyond its last site.
double tuple_weight(const ModelParams& params, double beta, const double* tuple, int d, double tail) {
    const double k = params.kappa();
    double v = tail;
    for (int j = d - 1; j >= 0; --j) {
        const double rate = k - tuple[j] - beta;
        if (!(rate > 0.0)) throw DivergentFunctional("divergent functional: beta at or above effective critical value");
        const double g = k / rate;
        const double denom = 1.0 - params.backward_prob() * g * v;
        if (!(denom > 0.0)) throw DivergentFunctional("divergent functional: beta at or above effective critical value");
        v = params.forward_prob() * g / denom;
    }
    return v;
}

struct Perron {
    double log_lower;
    double log_upper;
    double log_mid;
    std::size_t iterations;
};

// Perron root of the de Bruijn-structured operator with log entries le[u * s + a]
// (transition u -> (u * s + a) mod n_states), by power iteration with
// Collatz-Wielandt bounds.
Perron perron_root(const std::vector<double>& le, std::size_t s, std::size_t n_states, const TransferOptions& opt) {
    const double m = *std::max_element(le.begin(), le.end());
    std::vector<double> e(le.size());
    for (std::size_t i = 0; i < le.size(); ++i) e[i] = std::exp(le[i] - m);
    std::vector<double> x(n_states, 1.0), y(n_states);
    double lo = 0.0, hi = INFINITY;
    for (std::size_t it = 1; it <= opt.max_iter; ++it) {
        lo = INFINITY;
        hi = 0.0;
        double ymax = 0.0;
        for (std::size_t u = 0; u < n_states; ++u) {
            double acc = 0.0;
            for (std::size_t a = 0; a < s; ++a) {
                const std::size_t t = u * s + a;
                acc += e[t] * x[t % n_states];
            }
            y[u] = acc;
            const double r = acc / x[u];
            lo = std::min(lo, r);
            hi = std::max(hi, r);
            ymax = std::max(ymax, acc);
        }
        if (hi - lo <= opt.tol * hi) {
            const double mid = 0.5 * (lo + hi);
            return {m + std::log(lo), m + std::log(hi), m + std::log(mid), it};
        }
        for (std::size_t u = 0; u < n_states; ++u) x[u] = y[u] / ymax;
    }
    std::ostringstream os;
    os.precision(12);
    os << "power iteration did not converge in " << opt.max_iter << " steps; log spectral radius in ["
       << m + std::log(lo) << ", " << m + std::log(hi) << "]";
    throw NonConvergence(os.str());
}

std::size_t checked_power(std::size_t s, int e) {
    std::size_t r = 1;
    for (int i = 0; i < e; ++i) {
        if (r > 200'000 / std::max<std::size_t>(s, 1)) throw PreconditionError("transfer operator too large");
        r *= s;
    }
    return r;
}

// Log entries of the transfer operator for one tail value.
std::vector<double> transfer_log_entries(const ModelParams& params, const FiniteMeasure& eta, double beta, double p,
                                         int d, double tail, unsigned threads) {
    const std::size_t s = eta.size();
    const std::size_t n_tuples = checked_power(s, d - 1) * s;
    std::vector<double> le(n_tuples);
    parallel_for(n_tuples, threads, [&](std::size_t t) {
        std::vector<double> tuple(static_cast<std::size_t>(d));
        std::size_t rem = t;
        for (int j = d - 1; j >= 0; --j) {
            tuple[static_cast<std::size_t>(j)] = eta.atoms[rem % s];
            rem /= s;
        }
        const double w = tuple_weight(params, beta, tuple.data(), d, tail);
        le[t] = std::log(eta.weights[t % s]) + p * std::log(w);
    });
    return le;
}

double closed_form_h1(const ModelParams& params, const PotentialModel& eta, double beta, double p) {
    const double k = params.kappa();
    if (!(k - beta > 0.0)) throw DivergentFunctional("divergent functional: beta must be below kappa");
    // Factor out the largest term, attained at xi = 0.
    const double top = std::log(k / (k - beta));
    const double mean = eta.expectation([&](double x) { return std::exp(p * (std::log(k / (k - x - beta)) - top)); });
    return top + std::log(mean) / p;
}

}  // namespace

double relative_entropy(const FiniteMeasure& mu, const FiniteMeasure& eta) {
    num::CompensatedSum s;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const double m = mu.weights[i];
        if (m <= 0.0) continue;
        const double e = eta.weight_of(mu.atoms[i]);
        if (e <= 0.0) return INFINITY;
        s.add(m * std::log(m / e));
    }
    return std::max(0.0, s.value());
}

double product_rate(const FiniteMeasure& mu, const FiniteMeasure& eta) { return relative_entropy(mu, eta); }

MarkovMeasure MarkovMeasure::product(const std::vector<double>& law) {
    return {law, std::vector<std::vector<double>>(law.size(), law)};
}

void MarkovMeasure::validate() const {
    const std::size_t s = initial.size();
    auto check = [](const std::vector<double>& v) {
        double t = 0.0;
        for (double x : v) {
            if (!(x >= 0.0)) throw PreconditionError("markov measure: negative probability");
            t += x;
        }
        if (std::abs(t - 1.0) > 1e-12) throw PreconditionError("markov measure: probabilities must sum to 1");
    };
    check(initial);
    if (transition.size() != s) throw PreconditionError("markov measure: transition must be square");
    for (const auto& row : transition) {
        if (row.size() != s) throw PreconditionError("markov measure: transition must be square");
        check(row);
    }
}

ChainIdentity entropy_chain_identity(const MarkovMeasure& nu, const std::vector<double>& rho, int n) {
    nu.validate();
    const std::size_t s = nu.initial.size();
    if (rho.size() != s) throw PreconditionError("entropy_chain_identity: rho and nu differ in support size");
    if (n < 1 || n > 4 || s > 4) throw PreconditionError("entropy_chain_identity: requires n <= 4 and at most 4 symbols");

    // probs[i][tuple] = nu(first i+1 coordinates = tuple), tuples encoded base s.
    std::vector<std::vector<double>> probs(static_cast<std::size_t>(n));
    probs[0] = nu.initial;
    for (int i = 1; i < n; ++i) {
        const auto& prev = probs[static_cast<std::size_t>(i - 1)];
        auto& cur = probs[static_cast<std::size_t>(i)];
        cur.assign(prev.size() * s, 0.0);
        for (std::size_t t = 0; t < prev.size(); ++t)
            for (std::size_t a = 0; a < s; ++a) cur[t * s + a] = prev[t] * nu.transition[t % s][a];
    }
    auto term = [](double p, double q) {
        if (p <= 0.0) return 0.0;
        return q <= 0.0 ? INFINITY : p * std::log(p / q);
    };
    num::CompensatedSum lhs;
    for (int i = 0; i < n; ++i) {
        const auto& cur = probs[static_cast<std::size_t>(i)];
        for (std::size_t t = 0; t < cur.size(); ++t) {
            const double parent = i == 0 ? 1.0 : probs[static_cast<std::size_t>(i - 1)][t / s];
            lhs.add(term(cur[t], parent * rho[t % s]));
        }
    }
    num::CompensatedSum rhs;
    const auto& last = probs.back();
    for (std::size_t t = 0; t < last.size(); ++t) {
        double q = 1.0;
        for (std::size_t r = t, j = 0; j < static_cast<std::size_t>(n); ++j, r /= s) q *= rho[r % s];
        rhs.add(term(last[t], q));
    }
    return {lhs.value(), rhs.value()};
}

LFunctionEstimate L_of_product(const ModelParams& params, double beta, const FiniteMeasure& mu,
                               const QuenchedOptions& options) {
    mu.validate();
    auto model = std::make_shared<const PotentialModel>(potential::FiniteSupport{mu.atoms, mu.weights});
    return estimate_L(model, params, beta, options);
}

LpSupValue lp_sup_tilted(const ModelParams& params, const PotentialModel& eta, double beta, double p) {
    require_positive_p(p);
    require_admissible(params, beta);
    if (!eta.is_iid()) throw PreconditionError("lp_sup_tilted: i.i.d. potential required");
    const double tail = free_hitting_weight(params, beta);
    auto f = [&](double a) { return std::log(tuple_weight(params, beta, &a, 1, tail)); };
    double value;
    if (auto m = eta.marginal()) {
        std::vector<double> x(m->size());
        for (std::size_t i = 0; i < m->size(); ++i) x[i] = m->weights[i] > 0.0 ? p * f(m->atoms[i]) : 0.0;
        value = num::log_sum_exp(x, m->weights) / p;
    } else {
        const double f0 = f(0.0);
        value = f0 + std::log(eta.expectation([&](double a) { return std::exp(p * (f(a) - f0)); })) / p;
    }
    const bool exact = params.maximal_drift() || eta.is_degenerate();
    return {value, value, value, exact ? "exact" : "upper"};
}

TransferResult lp_sup_transfer(const ModelParams& params, const PotentialModel& eta, double beta, double p,
                               int depth, const TransferOptions& options) {
    require_positive_p(p);
    require_admissible(params, beta);
    if (!eta.is_iid()) throw PreconditionError("lp_sup_transfer: i.i.d. potential required");
    if (depth < 1) throw PreconditionError("lp_sup_transfer: depth must be >= 1");
    const FiniteMeasure m = charged(eta);
    const std::size_t s = m.size();
    const std::size_t n_states = checked_power(s, depth - 1);
    const double b = std::min(0.0, m.min_atom());

    const auto le_up = transfer_log_entries(params, m, beta, p, depth, free_hitting_weight(params, beta), options.threads);
    const auto up = perron_root(le_up, s, n_states, options);
    TransferResult r;
    r.states = n_states;
    r.iterations = up.iterations;
    r.value = up.log_mid / p;
    r.upper = up.log_upper / p;
    if (params.maximal_drift() || b == 0.0) {
        r.lower = up.log_lower / p;
        return r;
    }
    const auto le_lo =
        transfer_log_entries(params, m, beta, p, depth, free_hitting_weight(params, beta + b), options.threads);
    const auto lo = perron_root(le_lo, s, n_states, options);
    r.lower = lo.log_lower / p;
    r.iterations = std::max(r.iterations, lo.iterations);
    return r;
}

double transfer_max_log_weight(const ModelParams& params, const PotentialModel& eta, double beta, int depth) {
    require_admissible(params, beta);
    const FiniteMeasure m = charged(eta);
    const std::size_t s = m.size();
    const std::size_t n = checked_power(s, depth - 1) * s;
    const double tail = free_hitting_weight(params, beta);
    double best = -INFINITY;
    std::vector<double> tuple(static_cast<std::size_t>(depth));
    for (std::size_t t = 0; t < n; ++t) {
        std::size_t rem = t;
        for (int j = depth - 1; j >= 0; --j) {
            tuple[static_cast<std::size_t>(j)] = m.atoms[rem % s];
            rem /= s;
        }
        best = std::max(best, std::log(tuple_weight(params, beta, tuple.data(), depth, tail)));
    }
    return best;
}

std::string to_string(AnnealedMethod m) {
    switch (m) {
        case AnnealedMethod::ClosedFormH1: return "closed_form_h1";
        case AnnealedMethod::TiltedProduct: return "tilted_product";
        case AnnealedMethod::Transfer: return "transfer_matrix";
    }
    return "unknown";
}

AnnealedMethod parse_annealed_method(const std::string& name) {
    if (name == "closed_form_h1") return AnnealedMethod::ClosedFormH1;
    if (name == "tilted_product") return AnnealedMethod::TiltedProduct;
    if (name == "transfer_matrix" || name == "transfer") return AnnealedMethod::Transfer;
    throw ConfigError("unknown annealed method '" + name + "' (expected closed_form_h1, tilted_product, transfer_matrix)");
}

AnnealedMethod default_method(const ModelParams& params, const PotentialModel& model) {
    if (params.maximal_drift()) return AnnealedMethod::ClosedFormH1;
    return model.has_finite_support() ? AnnealedMethod::Transfer : AnnealedMethod::TiltedProduct;
}

LpSupValue lp_sup(const ModelParams& params, const PotentialModel& eta, double beta, double p, AnnealedMethod method,
                  const AnnealedOptions& options) {
    switch (method) {
        case AnnealedMethod::ClosedFormH1: {
            if (!params.maximal_drift()) throw PreconditionError("closed_form_h1 requires h = 1");
            require_positive_p(p);
            const double v = closed_form_h1(params, eta, beta, p);
            return {v, v, v, "exact"};
        }
        case AnnealedMethod::TiltedProduct: return lp_sup_tilted(params, eta, beta, p);
        case AnnealedMethod::Transfer: {
            if (!eta.has_finite_support()) throw ConfigError("transfer method requires a finite-support potential");
            const auto t = lp_sup_transfer(params, eta, beta, p, options.depth, options.transfer);
            const bool exact = params.maximal_drift() || eta.is_degenerate();
            return {t.value, t.lower, t.upper, exact ? "exact" : "bracket"};
        }
    }
    throw PreconditionError("unknown method");
}

LyapunovResult lambda_annealed(const std::shared_ptr<const PotentialModel>& model, const ModelParams& params,
                               double p, const AnnealedOptions& options) {
    if (!model) throw PreconditionError("lambda_annealed: null model");
    require_positive_p(p);
    if (!model->is_iid()) throw PreconditionError("annealed exponents require an i.i.d. potential");
    const PotentialModel norm = normalize(*model);
    const AnnealedMethod method = options.method.value_or(default_method(params, norm));
    if (method == AnnealedMethod::Transfer && !norm.has_finite_support())
        throw ConfigError("transfer method requires a finite-support potential");
    if (method == AnnealedMethod::ClosedFormH1 && !params.maximal_drift())
        throw PreconditionError("closed_form_h1 requires h = 1");
    const CriticalTilt crit = beta_cr(params, norm);

    std::string direction;
    auto f = [&](double beta) {
        const auto v = lp_sup(params, norm, beta, p, method, options);
        direction = v.bound_direction;
        return BracketedFunction{v.lower, v.upper};
    };
    ZeroSearch z;
    if (method == AnnealedMethod::Transfer) {
        // The tail pair can be far apart at small depth; each end is searched on its own
        // and the pessimistic root becomes the lower end of the reported bracket.
        auto point = [&](double beta) {
            const auto v = lp_sup(params, norm, beta, p, method, options);
            direction = v.bound_direction;
            return BracketedFunction{v.value, v.value};
        };
        auto pess = [&](double beta) {
            const double lo = lp_sup(params, norm, beta, p, method, options).lower;
            return BracketedFunction{lo, lo};
        };
        z = find_exponent(point, crit.value, options.eps_ladder, options.tol);
        const ZeroSearch zl = find_exponent(pess, crit.value, options.eps_ladder, options.tol);
        z.bracket = {std::min(zl.value, z.bracket[0]), z.bracket[1]};
    } else {
        z = find_exponent(f, crit.value, options.eps_ladder, options.tol);
    }

    LyapunovResult r;
    r.kind = "annealed";
    r.p = p;
    r.shift = norm.shift();
    r.value = z.value + r.shift;
    r.bracket = {z.bracket[0] + r.shift, z.bracket[1] + r.shift};
    r.residual = z.residual;
    r.at_boundary = z.at_boundary;
    r.beta_cr = crit.value;
    r.beta_cr_formula = crit.formula_available;
    r.method = to_string(method);
    if (method == AnnealedMethod::Transfer) r.depth = options.depth;
    r.bound_direction = direction;
    r.conjectured = params.maximal_drift() && !is_integer(p);
    return r;
}

LyapunovResult lambda_annealed_maxdrift(const ModelParams& params, const PotentialModel& eta, int p) {
    if (!params.maximal_drift()) throw PreconditionError("lambda_annealed_maxdrift requires h = 1");
    if (p < 1) throw PreconditionError("lambda_annealed_maxdrift requires a positive integer p");
    if (!eta.is_iid()) throw PreconditionError("annealed exponents require an i.i.d. potential");
    const PotentialModel norm = normalize(eta);
    const double k = params.kappa();
    // Decreasing in lambda; nonpositive at 0 (xi <= 0) and large near -kappa.
    auto g = [&](double lam) {
        return norm.expectation([&](double x) {
            const double r = k / (k + lam - x);
            double v = 1.0;
            for (int i = 0; i < p; ++i) v *= r;
            return v;
        }) - 1.0;
    };
    LyapunovResult res;
    res.kind = "annealed";
    res.p = p;
    res.shift = norm.shift();
    res.method = "maxdrift_closed_form";
    res.bound_direction = "exact";
    res.beta_cr = k;
    double lo = -k * (1.0 - 1e-15), hi = 0.0;
    double g_hi = g(hi);
    if (g_hi >= 0.0) {
        res.value = res.shift;
        res.bracket = {res.shift, res.shift};
        res.residual = std::abs(g_hi);
        return res;
    }
    if (g(lo) <= 0.0) {
        res.value = -k + res.shift;
        res.bracket = {-k + res.shift, lo + res.shift};
        res.at_boundary = true;
        res.residual = g(lo);
        return res;
    }
    while (hi - lo > 1e-15 * k) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (g(mid) > 0.0) lo = mid;
        else hi = mid;
    }
    const double lam = 0.5 * (lo + hi);
    res.value = lam + res.shift;
    res.bracket = {lo + res.shift, hi + res.shift};
    res.residual = std::abs(g(lam));
    return res;
}

LyapunovResult lambda_annealed_maxdrift(const ModelParams& params, const PotentialModel& eta, double p) {
    if (!(p > 0.0) || !is_integer(p)) {
        std::ostringstream os;
        os << "lambda_annealed_maxdrift: p = " << p
           << " is not a positive integer; the moment formula is only conjectured for non-integer p "
              "(use lambda_annealed with method closed_form_h1, whose output is tagged conjectured)";
        throw PreconditionError(os.str());
    }
    return lambda_annealed_maxdrift(params, eta, static_cast<int>(p));
}

LaplaceTransform maxdrift_laplace(const ModelParams& params, const PotentialModel& eta, double beta,
                                  std::size_t n_terms) {
    if (!params.maximal_drift()) throw PreconditionError("maxdrift_laplace requires h = 1");
    const double k = params.kappa();
    if (!(beta > -k)) throw PreconditionError("maxdrift_laplace requires beta > -kappa");
    LaplaceTransform lt;
    lt.m = eta.expectation([&](double x) { return k / (k + beta - x); });
    num::CompensatedSum s;
    double term = 1.0;
    for (std::size_t n = 1; n <= n_terms; ++n) {
        term *= lt.m;
        s.add(term);
        if (!std::isfinite(term)) break;
    }
    lt.partial_sum = s.value() / k;
    lt.closed_form = lt.m < 1.0 ? lt.m / (k * (1.0 - lt.m)) : INFINITY;
    return lt;
}

namespace {

double half_width(const LyapunovResult& r) { return 0.5 * std::abs(r.bracket[1] - r.bracket[0]); }

// Statistical slack for Birkhoff-based quenched exponents.
double quenched_slack(const LyapunovResult& r) {
    return half_width(r) + (r.method == "birkhoff" ? 5e-3 : 1e-8);
}

}  // namespace

IntermittencyReport intermittency_scan(const std::shared_ptr<const PotentialModel>& model, const ModelParams& params,
                                       const std::vector<double>& p_grid, const AnnealedOptions& options,
                                       const QuenchedOptions& qoptions) {
    for (std::size_t i = 1; i < p_grid.size(); ++i)
        if (!(p_grid[i] > p_grid[i - 1])) throw PreconditionError("intermittency_scan: p grid must be increasing");
    const auto l0 = lambda_quenched(model, params, qoptions);
    std::vector<LyapunovResult> res(p_grid.size());
    parallel_for(p_grid.size(), qoptions.threads,
                 [&](std::size_t i) { res[i] = lambda_annealed(model, params, p_grid[i], options); });

    IntermittencyReport rep;
    rep.lambda0 = l0.value;
    rep.tolerance = 1e-8;
    for (std::size_t i = 0; i < res.size(); ++i) {
        rep.rows.push_back({p_grid[i], res[i].value});
        rep.tolerance = std::max(rep.tolerance, 2.0 * half_width(res[i]) + 1e-8);
    }
    rep.monotone = true;
    rep.above_quenched = true;
    for (std::size_t i = 0; i < res.size(); ++i) {
        if (i > 0 && res[i].value < res[i - 1].value - rep.tolerance) rep.monotone = false;
        if (res[i].value < l0.value - quenched_slack(l0) - rep.tolerance) rep.above_quenched = false;
    }
    std::vector<double> pl(p_grid.size());
    for (std::size_t i = 0; i < pl.size(); ++i) pl[i] = p_grid[i] * res[i].value;
    rep.p_lambda_convex = num::discretely_convex(p_grid, pl, rep.tolerance);
    for (std::size_t i = 0; i + 1 < res.size() && !rep.intermittent_from; ++i) {
        bool strict = true;
        for (std::size_t j = i + 1; j < res.size(); ++j)
            if (!(res[j].value - res[i].value > rep.tolerance)) strict = false;
        if (strict) rep.intermittent_from = p_grid[i];
    }
    return rep;
}

ContinuityReport continuity_at_zero(const std::shared_ptr<const PotentialModel>& model, const ModelParams& params,
                                    const std::vector<double>& p_ladder, const AnnealedOptions& options,
                                    const QuenchedOptions& qoptions) {
    for (std::size_t i = 1; i < p_ladder.size(); ++i)
        if (!(p_ladder[i] < p_ladder[i - 1])) throw PreconditionError("continuity_at_zero: p ladder must decrease");
    const auto l0 = lambda_quenched(model, params, qoptions);
    ContinuityReport rep;
    rep.lambda0 = l0.value;
    rep.monotone_shrink = true;
    rep.conjectured = false;
    double tol = quenched_slack(l0);
    for (double p : p_ladder) {
        const auto r = lambda_annealed(model, params, p, options);
        rep.conjectured = rep.conjectured || r.conjectured;
        const double gap = std::abs(r.value - l0.value);
        if (!rep.rows.empty() && gap > rep.rows.back().gap + tol + 2.0 * half_width(r)) rep.monotone_shrink = false;
        rep.rows.push_back({p, r.value, gap});
    }
    rep.final_gap = rep.rows.empty() ? 0.0 : rep.rows.back().gap;
    return rep;
}

nlohmann::json to_json(const IntermittencyReport& r) {
    nlohmann::json j;
    j["lambda0"] = r.lambda0;
    j["rows"] = nlohmann::json::array();
    for (const auto& row : r.rows) j["rows"].push_back({{"p", row.p}, {"lambda", row.lambda}});
    j["intermittent_from"] = r.intermittent_from ? nlohmann::json(*r.intermittent_from) : nlohmann::json(nullptr);
    j["monotone"] = r.monotone;
    j["p_lambda_convex"] = r.p_lambda_convex;
    j["above_quenched"] = r.above_quenched;
    j["tolerance"] = r.tolerance;
    return j;
}

nlohmann::json to_json(const ContinuityReport& r) {
    nlohmann::json j;
    j["lambda0"] = r.lambda0;
    j["rows"] = nlohmann::json::array();
    for (const auto& row : r.rows) j["rows"].push_back({{"p", row.p}, {"lambda", row.lambda}, {"gap", row.gap}});
    j["monotone_shrink"] = r.monotone_shrink;
    j["final_gap"] = r.final_gap;
    j["conjectured"] = r.conjectured;
    return j;
}

std::vector<AnnealedCurveRow> annealed_curve(const std::shared_ptr<const PotentialModel>& model,
                                             const ModelParams& params, double p, const std::vector<double>& betas,
                                             const AnnealedOptions& options) {
    const PotentialModel norm = normalize(*model);
    const AnnealedMethod method = options.method.value_or(default_method(params, norm));
    std::vector<AnnealedCurveRow> rows;
    rows.reserve(betas.size());
    for (double b : betas) {
        rows.push_back({p, b, lp_sup(params, norm, b, p, method, options), method,
                        method == AnnealedMethod::Transfer ? options.depth : 1});
    }
    return rows;
}

void write_annealed_curve_csv(std::ostream& out, const std::vector<AnnealedCurveRow>& rows) {
    out << "p,beta,lp_sup,method,depth,bound_direction\n";
    out.precision(17);
    for (const auto& r : rows) {
        out << r.p << ',' << r.beta << ',' << r.value.value << ',' << to_string(r.method) << ',' << r.depth << ','
            << r.value.bound_direction << '\n';
    }
}

}  // namespace pam
