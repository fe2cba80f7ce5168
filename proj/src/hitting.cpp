#include "pam/hitting.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "pam/errors.hpp"

namespace pam {

namespace {

// Discriminant of the free-walk quadratic, with values within rounding of zero
// snapped to zero so that the critical tilt itself remains admissible.
double free_discriminant(const ModelParams& params, double beta) {
    const double k = params.kappa();
    const double h = params.h();
    const double km = k - beta;
    const double disc = km * km - k * k * (1.0 - h) * (1.0 + h);
    if (disc < 0.0 && disc > -1e-12 * km * km) return 0.0;
    return disc;
}

[[noreturn]] void throw_divergent(double beta, std::int64_t site) {
    std::ostringstream os;
    os << "divergent functional: beta = " << beta << " at or above effective critical value (site " << site << ")";
    throw DivergentFunctional(os.str());
}

struct Run {
    std::vector<double> w;
    std::vector<double> dw;
};

Run recurse(const EnvironmentWindow& env, const ModelParams& params, double beta, double tail, double dtail,
            bool with_derivative) {
    const double k = params.kappa();
    const double a = params.forward_prob();   // Y steps toward n-1
    const double b = params.backward_prob();  // Y steps away, toward n+1
    const std::size_t n = env.size() - 1;
    Run r;
    r.w.resize(n);
    if (with_derivative) r.dw.resize(n);
    double v = tail;
    double dv = dtail;
    for (std::size_t i = n; i-- > 0;) {
        const std::int64_t site = env.lo() + static_cast<std::int64_t>(i);
        const double rate = k - env[site] - beta;
        if (!(rate > 0.0)) throw_divergent(beta, site);
        const double g = k / rate;
        const double bv = b * g * v;
        const double denom = 1.0 - bv;
        if (!(denom > 0.0)) throw_divergent(beta, site);
        const double w = a * g / denom;
        if (with_derivative) {
            // d/dbeta of A/(1 - B v), using dg/dbeta = g / rate.
            const double dw = w * (1.0 / rate + (bv / rate + b * g * dv) / denom);
            r.dw[i] = dw;
            dv = dw;
        }
        r.w[i] = w;
        v = w;
    }
    return r;
}

// Difference of the two bracketing runs:
// A/(1 - B u) - A/(1 - B l) = A B (u - l) / ((1 - B u)(1 - B l)).
std::vector<double> propagate_gap(const EnvironmentWindow& env, const ModelParams& params, double beta,
                                  const std::vector<double>& up, const std::vector<double>& lo, double tail_up,
                                  double tail_lo) {
    const double k = params.kappa();
    const std::size_t n = up.size();
    std::vector<double> gaps(n);
    double delta = tail_up - tail_lo;
    for (std::size_t i = n; i-- > 0;) {
        const double g = k / (k - env[env.lo() + static_cast<std::int64_t>(i)] - beta);
        const double a = params.forward_prob() * g;
        const double b = params.backward_prob() * g;
        const double vu = i + 1 < n ? up[i + 1] : tail_up;
        const double vl = i + 1 < n ? lo[i + 1] : tail_lo;
        delta = a * b * delta / ((1.0 - b * vu) * (1.0 - b * vl));
        gaps[i] = delta;
    }
    return gaps;
}

}  // namespace

double free_hitting_weight(const ModelParams& params, double beta) {
    const double k = params.kappa();
    if (params.maximal_drift()) {
        if (!(beta < k)) throw_divergent(beta, 1);
        return k / (k - beta);
    }
    if (beta > free_critical_beta(params) + kBetaMargin) throw_divergent(beta, 1);
    const double disc = free_discriminant(params, beta);
    if (disc < 0.0) throw_divergent(beta, 1);
    const double h = params.h();
    const double km = k - beta;
    // Smaller root, written in the cancellation-free form c / (q * larger root).
    const double root_large = (km + std::sqrt(disc)) / (k * (1.0 - h));
    if (disc == 0.0) return root_large;
    return (1.0 + h) / ((1.0 - h) * root_large);
}

double free_hitting_weight_derivative(const ModelParams& params, double beta) {
    const double k = params.kappa();
    if (params.maximal_drift()) {
        if (!(beta < k)) throw_divergent(beta, 1);
        return k / ((k - beta) * (k - beta));
    }
    const double disc = free_discriminant(params, beta);
    if (disc < 0.0) throw_divergent(beta, 1);
    if (disc == 0.0) return INFINITY;
    return (-1.0 + (k - beta) / std::sqrt(disc)) / (k * (1.0 - params.h()));
}

double HittingProfile::max_gap() const noexcept {
    double g = 0.0;
    for (std::size_t i = 0; i < size(); ++i) g = std::max(g, gap(i));
    return g;
}

double HittingProfile::max_weight() const noexcept {
    return upper.empty() ? 0.0 : *std::max_element(upper.begin(), upper.end());
}

HittingProfile hitting_profile(const EnvironmentWindow& env, const ModelParams& params, double beta,
                               const ProfileOptions& options) {
    if (env.size() < 2) throw PreconditionError("hitting_profile: window must contain at least two sites");
    const double crit = free_critical_beta(params);
    if (params.maximal_drift() ? !(beta < crit) : beta > crit - kBetaMargin) {
        std::ostringstream os;
        os << "hitting_profile: beta = " << beta << " must lie below the critical tilt " << crit;
        throw PreconditionError(os.str());
    }

    double lb = 0.0;
    if (options.potential_lower_bound) {
        lb = *options.potential_lower_bound;
    } else if (env.model()) {
        lb = env.model()->ess_inf();
    } else {
        lb = env.min_value();
    }
    lb = std::min(lb, 0.0);

    HittingProfile p;
    p.beta = beta;
    p.first_site = env.lo();
    const bool d = options.with_derivative;

    auto run_with = [&](double tail, double dtail) { return recurse(env, params, beta, tail, dtail, d); };

    switch (options.boundary) {
        case Boundary::BracketPair: {
            const double tail_up = free_hitting_weight(params, beta);
            const double tail_lo = free_hitting_weight(params, beta + lb);
            Run up = run_with(tail_up, d ? free_hitting_weight_derivative(params, beta) : 0.0);
            Run lo = run_with(tail_lo, d ? free_hitting_weight_derivative(params, beta + lb) : 0.0);
            p.gaps = propagate_gap(env, params, beta, up.w, lo.w, tail_up, tail_lo);
            p.upper = std::move(up.w);
            p.lower = std::move(lo.w);
            p.derivative_upper = std::move(up.dw);
            p.derivative_lower = std::move(lo.dw);
            break;
        }
        case Boundary::FreeField: {
            Run up = run_with(free_hitting_weight(params, beta),
                              d ? free_hitting_weight_derivative(params, beta) : 0.0);
            p.upper = up.w;
            p.lower = std::move(up.w);
            p.derivative_upper = up.dw;
            p.derivative_lower = std::move(up.dw);
            break;
        }
        case Boundary::Absorbing: {
            Run ab = run_with(0.0, 0.0);
            p.upper = ab.w;
            p.lower = std::move(ab.w);
            p.derivative_upper = ab.dw;
            p.derivative_lower = std::move(ab.dw);
            break;
        }
    }
    if (p.gaps.empty()) p.gaps.assign(p.size(), 0.0);
    // Rounding can invert brackets whose true gap is below machine precision.
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p.lower[i] > p.upper[i]) p.lower[i] = p.upper[i];
    return p;
}

HittingProfile hitting_profile_derivative(const EnvironmentWindow& env, const ModelParams& params, double beta,
                                          Boundary boundary) {
    ProfileOptions opt;
    opt.boundary = boundary;
    opt.with_derivative = true;
    return hitting_profile(env, params, beta, opt);
}

TruncatedProfile truncated_profile(const std::shared_ptr<const PotentialModel>& model, std::uint64_t seed,
                                   const ModelParams& params, double beta, std::int64_t first, std::int64_t last,
                                   const TruncationOptions& options) {
    if (first > last) throw PreconditionError("truncated_profile: first > last");
    ProfileOptions popt;
    popt.with_derivative = options.with_derivative;

    std::size_t tail = std::max<std::size_t>(options.initial_tail, 1);
    if (params.maximal_drift()) tail = 1;  // the recursion is exact at h = 1
    for (;;) {
        // Probe only the sites closest to the tail, where the bracket is widest.
        const auto probe_end = last + static_cast<std::int64_t>(tail) + 1;
        auto probe_env = sample_environment(model, seed, last, probe_end);
        auto probe = hitting_profile(probe_env, params, beta, {Boundary::BracketPair, false, std::nullopt});
        if (probe.gap(0) < options.gap_tolerance) {
            auto env = sample_environment(model, seed, first, probe_end);
            auto prof = hitting_profile(env, params, beta, popt);
            return {std::move(prof), tail, std::move(env)};
        }
        if (tail >= options.max_tail) {
            std::ostringstream os;
            os << "truncation did not reach gap " << options.gap_tolerance << " within " << options.max_tail
               << " tail sites (gap " << probe.gap(0) << " at beta = " << beta << ")";
            throw NonConvergence(os.str());
        }
        tail = std::min(tail * 2, options.max_tail);
    }
}

void write_profile_csv(std::ostream& out, const HittingProfile& profile) {
    out << "site,lower,upper,dlower,dupper\n";
    out.precision(17);
    for (std::size_t i = 0; i < profile.size(); ++i) {
        out << profile.first_site + static_cast<std::int64_t>(i) << ',' << profile.lower[i] << ',' << profile.upper[i]
            << ',';
        if (profile.has_derivative()) out << profile.derivative_lower[i] << ',' << profile.derivative_upper[i];
        else out << ',';
        out << '\n';
    }
}

}  // namespace pam
