#include "pam/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "pam/errors.hpp"
#include "pam/hitting.hpp"
#include "pam/numerics.hpp"
#include "pam/parallel.hpp"
#include "pam/rng.hpp"

namespace pam {

namespace {

// Values below this are flushed to zero so that far fronts never reach subnormals.
constexpr double kFlush = 1e-300;

// Share of the mean above which a single environment makes a moment estimate unreliable.
constexpr double kHeavyShare = 0.5;

double window_min(const EnvironmentWindow& env, std::int64_t lo, std::int64_t hi) {
    double m = 0.0;
    for (std::int64_t x = lo; x <= hi; ++x) m = std::min(m, env[x]);
    return m;
}

// Mean and standard error anchored at the first value: identical samples give an
// exact mean and a zero error.
McEstimate summarize(const std::vector<double>& v, double t, std::uint64_t seed) {
    McEstimate e;
    e.n_paths = v.size();
    e.t = t;
    e.seed = seed;
    if (v.empty()) return e;
    const double anchor = v.front();
    num::CompensatedSum s, s2;
    for (double x : v) s.add(x - anchor);
    const double n = static_cast<double>(v.size());
    const double dmean = s.value() / n;
    for (double x : v) {
        const double d = x - anchor - dmean;
        s2.add(d * d);
    }
    e.mean = anchor + dmean;
    e.stderr_ = v.size() > 1 ? std::sqrt(s2.value() / (n - 1.0) / n) : 0.0;
    return e;
}

}  // namespace

LatticeOperator LatticeOperator::x_walk(const ModelParams& params) {
    return {params.forward_prob(), params.backward_prob()};
}
LatticeOperator LatticeOperator::x_adjoint(const ModelParams& params) {
    return {params.backward_prob(), params.forward_prob()};
}
LatticeOperator LatticeOperator::y_forward(const ModelParams& params) { return x_walk(params); }

std::int64_t required_window(const ModelParams& params, double t_max) {
    return static_cast<std::int64_t>(std::ceil(4.0 * params.kappa() * t_max)) + 50;
}

double max_stable_dt(const ModelParams& params, const EnvironmentWindow& env) {
    return 0.1 / (2.0 * params.kappa() + std::abs(std::min(0.0, env.min_value())));
}

double SolutionField::mass(std::size_t time_index) const {
    num::CompensatedSum s;
    for (double v : values[time_index]) s.add(v);
    return s.value();
}

SolutionField solve_lattice(const EnvironmentWindow& env, const ModelParams& params, const LatticeOperator& op,
                            bool delta_initial, const std::vector<double>& times, const SolveOptions& options) {
    if (times.empty()) throw PreconditionError("solve_lattice needs at least one sample time");
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] >= 0.0) || (i > 0 && times[i] <= times[i - 1]))
            throw PreconditionError("sample times must be nonnegative and increasing");
    }
    if (options.center_only && options.store_fields)
        throw PreconditionError("center_only solves do not store fields");
    const std::int64_t need = required_window(params, times.back());
    const std::int64_t M = options.window > 0 ? options.window : need;
    if (M < need) {
        std::ostringstream os;
        os << "window " << M << " below the required " << need << " for t = " << times.back();
        throw PreconditionError(os.str());
    }
    if (!env.contains(-M) || !env.contains(M)) throw PreconditionError("environment does not cover [-M, M]");
    const double b = window_min(env, -M, M);
    const double dt_max = 0.1 / (2.0 * params.kappa() + std::abs(b));
    const double dt = options.dt > 0.0 ? options.dt : dt_max;
    if (dt > dt_max * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "dt = " << dt << " exceeds the stability limit " << dt_max;
        throw PreconditionError(os.str());
    }

    // Integrated range [lo, hi]; at h = 1 one side is causally disconnected from 0.
    std::int64_t lo = -M, hi = M;
    if (options.center_only) {
        if (op.left == 0.0) lo = 0;
        if (op.right == 0.0) hi = 0;
    }
    const std::size_t n = static_cast<std::size_t>(hi - lo + 1);
    const double k = params.kappa();
    const double cr = k * op.right, cl = k * op.left;
    std::vector<double> diag(n);
    for (std::size_t i = 0; i < n; ++i) diag[i] = env[lo + static_cast<std::int64_t>(i)] - k;

    std::vector<double> u(n, delta_initial ? 0.0 : 1.0), k1(n), k2(n), k3(n), k4(n), tmp(n);
    const std::size_t c = static_cast<std::size_t>(-lo);
    if (delta_initial) u[c] = 1.0;

    auto apply = [&](const std::vector<double>& in, std::vector<double>& out) {
        if (n == 1) {
            out[0] = diag[0] * in[0];
            return;
        }
        out[0] = diag[0] * in[0] + cr * in[1];
        for (std::size_t i = 1; i + 1 < n; ++i) out[i] = cl * in[i - 1] + diag[i] * in[i] + cr * in[i + 1];
        out[n - 1] = cl * in[n - 2] + diag[n - 1] * in[n - 1];
    };

    SolutionField f;
    f.window = M;
    f.dt = dt;
    f.adjoint = delta_initial;
    f.times = times;
    auto record = [&] {
        f.center.push_back(u[c]);
        if (options.store_fields) f.values.push_back(u);
    };

    double now = 0.0;
    for (double target : times) {
        const double span = target - now;
        if (span > 0.0) {
            const auto steps = static_cast<std::size_t>(std::ceil(span / dt - 1e-9));
            const double hstep = span / static_cast<double>(steps);
            for (std::size_t s = 0; s < steps; ++s) {
                apply(u, k1);
                for (std::size_t i = 0; i < n; ++i) tmp[i] = u[i] + 0.5 * hstep * k1[i];
                apply(tmp, k2);
                for (std::size_t i = 0; i < n; ++i) tmp[i] = u[i] + 0.5 * hstep * k2[i];
                apply(tmp, k3);
                for (std::size_t i = 0; i < n; ++i) tmp[i] = u[i] + hstep * k3[i];
                apply(tmp, k4);
                bool negative = false;
                for (std::size_t i = 0; i < n; ++i) {
                    double v = u[i] + hstep / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                    negative |= v < 0.0;
                    u[i] = v < kFlush ? 0.0 : v;
                }
                if (negative) {
                    std::ostringstream os;
                    os << "negative value after step at t = " << now + hstep * static_cast<double>(s + 1)
                       << "; reduce dt below " << hstep;
                    throw StabilityViolation(os.str());
                }
            }
            f.steps += steps;
        }
        now = target;
        record();
    }
    return f;
}

SolutionField solve_pde(const EnvironmentWindow& env, const ModelParams& params, const std::vector<double>& times,
                        const SolveOptions& options) {
    return solve_lattice(env, params, LatticeOperator::x_walk(params), false, times, options);
}

EndpointField endpoint_field(const EnvironmentWindow& env, const ModelParams& params,
                             const std::vector<double>& times, const SolveOptions& options) {
    return solve_lattice(env, params, LatticeOperator::x_adjoint(params), true, times, options);
}

double window_doubling_change(const EnvironmentWindow& env, const ModelParams& params, double t_max,
                              std::int64_t window) {
    SolveOptions o;
    o.window = window > 0 ? window : required_window(params, t_max);
    o.store_fields = false;
    o.center_only = true;
    // One dt for both solves so that only the window differs.
    o.dt = max_stable_dt(params, env);
    const double a = solve_pde(env, params, {t_max}, o).center.back();
    o.window *= 2;
    const double b = solve_pde(env, params, {t_max}, o).center.back();
    return std::abs(a - b);
}

RichardsonReport richardson_ratio(const EnvironmentWindow& env, const ModelParams& params, double t, double dt) {
    SolveOptions o;
    o.store_fields = false;
    o.center_only = true;
    auto at = [&](double step) {
        o.dt = step;
        return solve_pde(env, params, {t}, o).center.back();
    };
    RichardsonReport r;
    r.u_coarse = at(dt);
    r.u_mid = at(dt / 2.0);
    r.u_fine = at(dt / 4.0);
    r.ratio = (r.u_coarse - r.u_mid) / (r.u_mid - r.u_fine);
    return r;
}

SlopeEstimate fit_slope(const std::vector<double>& times, const std::vector<double>& log_values,
                        const SlopeOptions& options) {
    const std::size_t n = times.size();
    if (n != log_values.size() || n < 6) throw PreconditionError("slope fits need at least 6 matching points");
    auto fit = [&](std::size_t from, std::size_t to) {
        return num::least_squares(std::span(times).subspan(from, to - from),
                                  std::span(log_values).subspan(from, to - from));
    };
    const auto half = fit(n / 2, n);
    const double s2 = fit(n / 3, 2 * n / 3).slope;
    const double s3 = fit(2 * n / 3, n).slope;
    SlopeEstimate e;
    e.slope = half.slope;
    e.stderr_ = half.slope_stderr;
    e.drift = std::abs(s3 - s2);
    e.ci = 2.0 * e.stderr_ + e.drift;
    e.times = times;
    e.log_values = log_values;
    if (e.drift > std::max(options.drift_tolerance, 2.0 * e.stderr_)) {
        std::ostringstream os;
        os << "slope still drifting: middle third " << s2 << ", last third " << s3 << "; increase t";
        throw NonStationarySlope(os.str());
    }
    return e;
}

SlopeEstimate quenched_slope(const EnvironmentWindow& env, const ModelParams& params, const std::vector<double>& t_grid,
                             const SlopeOptions& options, const SolveOptions& solve) {
    SolveOptions o = solve;
    o.store_fields = false;
    o.center_only = true;
    const auto f = solve_pde(env, params, t_grid, o);
    std::vector<double> logs(f.center.size());
    for (std::size_t i = 0; i < logs.size(); ++i) logs[i] = std::log(f.center[i]);
    return fit_slope(t_grid, logs, options);
}

SlopeEnsemble quenched_slope_ensemble(const std::shared_ptr<const PotentialModel>& model, const ModelParams& params,
                                      const std::vector<double>& t_grid, std::size_t n_env, std::uint64_t seed,
                                      unsigned threads, const SlopeOptions& options) {
    if (n_env == 0) throw PreconditionError("quenched_slope_ensemble needs at least one environment");
    if (t_grid.empty()) throw PreconditionError("quenched_slope_ensemble needs a time grid");
    const std::int64_t M = required_window(params, t_grid.back());
    SlopeEnsemble r;
    r.slopes.resize(n_env);
    parallel_for(n_env, threads, [&](std::size_t e) {
        const auto env = sample_environment(model, counter_hash(seed, 0x510e, static_cast<std::int64_t>(e)), -M, M);
        r.slopes[e] = quenched_slope(env, params, t_grid, options).slope;
    });
    const McEstimate m = summarize(r.slopes, t_grid.back(), seed);
    r.mean = m.mean;
    r.stderr_ = m.stderr_;
    return r;
}

McEstimate feynman_kac_mc(const EnvironmentWindow& env, const ModelParams& params, double t, std::size_t n_paths,
                          std::uint64_t seed, unsigned threads) {
    if (!(t >= 0.0)) throw PreconditionError("t must be nonnegative");
    if (!env.contains(0)) throw PreconditionError("environment must contain the origin");
    double top = env[env.lo()];
    for (double v : env.values()) top = std::max(top, v);
    const double k = params.kappa();
    const double right = params.forward_prob();
    std::vector<double> values(n_paths);
    parallel_for(n_paths, threads, [&](std::size_t i) {
        Stream rng(seed, i);
        std::int64_t x = 0;
        double s = 0.0;
        // Integral of xi - top, so that a constant potential gives identical samples.
        double integral = 0.0;
        for (;;) {
            const double hold = rng.exponential(k);
            integral += (env[x] - top) * std::min(hold, t - s);
            s += hold;
            if (s >= t) break;
            x += rng.uniform() < right ? 1 : -1;
            if (!env.contains(x)) {
                values[i] = 0.0;
                return;
            }
        }
        values[i] = std::exp(integral + top * t);
    });
    return summarize(values, t, seed);
}

GibbsSpeed gibbs_speed(const EnvironmentWindow& env, const ModelParams& params, double t, const GibbsOptions& options,
                       const SolveOptions& solve) {
    if (!(t > 0.0)) throw PreconditionError("gibbs_speed needs t > 0");
    if (options.n_bins == 0) throw PreconditionError("gibbs_speed needs at least one bin");
    SolveOptions o = solve;
    o.store_fields = true;
    o.center_only = false;
    const auto f = endpoint_field(env, params, {t}, o);
    const auto& v = f.values.back();
    const std::int64_t M = f.window;
    GibbsSpeed g;
    g.t = t;
    g.mass = f.mass(0);
    if (!(g.mass > 0.0)) throw NumericalError("endpoint field has no mass");
    num::CompensatedSum m1, m2;
    double peak = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double a = static_cast<double>(static_cast<std::int64_t>(i) - M) / t;
        const double w = v[i] / g.mass;
        m1.add(w * a);
        m2.add(w * a * a);
        peak = std::max(peak, v[i]);
    }
    g.mean_speed = m1.value();
    g.sd_speed = std::sqrt(std::max(0.0, m2.value() - g.mean_speed * g.mean_speed));

    std::int64_t first = -M, last = M;
    while (first < M && v[static_cast<std::size_t>(first + M)] <= 1e-12 * peak) ++first;
    while (last > first && v[static_cast<std::size_t>(last + M)] <= 1e-12 * peak) --last;
    double lo = options.alpha_lo.value_or(static_cast<double>(first) / t);
    double hi = options.alpha_hi.value_or(static_cast<double>(last) / t);
    if (hi <= lo) hi = lo + 1.0 / t;
    g.bin_edges = num::linspace(lo, hi, options.n_bins + 1);
    g.bin_mass.assign(options.n_bins, 0.0);
    const double width = (hi - lo) / static_cast<double>(options.n_bins);
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double a = static_cast<double>(static_cast<std::int64_t>(i) - M) / t;
        if (a < lo || a > hi) continue;
        const auto bin = std::min(options.n_bins - 1, static_cast<std::size_t>((a - lo) / width));
        g.bin_mass[bin] += v[i] / g.mass;
    }
    return g;
}

std::vector<AnnealedMoments> annealed_moments(const std::shared_ptr<const PotentialModel>& model,
                                              const ModelParams& params, const std::vector<double>& p_list,
                                              const std::vector<double>& t_grid, std::size_t n_env,
                                              std::uint64_t seed, unsigned threads, const SlopeOptions& slope) {
    if (n_env == 0) throw PreconditionError("annealed_moments needs at least one environment");
    for (double p : p_list)
        if (!(p > 0.0)) throw PreconditionError("moment orders must be positive");
    if (t_grid.empty()) throw PreconditionError("annealed_moments needs a time grid");
    const std::int64_t M = required_window(params, t_grid.back());
    // log u(t_k, 0) per environment, row-major by environment.
    std::vector<double> logs(n_env * t_grid.size());
    parallel_for(n_env, threads, [&](std::size_t e) {
        const auto env = sample_environment(model, counter_hash(seed, 0xa11, static_cast<std::int64_t>(e)), -M, M);
        SolveOptions o;
        o.window = M;
        o.store_fields = false;
        o.center_only = true;
        const auto f = solve_pde(env, params, t_grid, o);
        for (std::size_t k = 0; k < t_grid.size(); ++k) logs[e * t_grid.size() + k] = std::log(f.center[k]);
    });

    std::vector<AnnealedMoments> out;
    for (double p : p_list) {
        AnnealedMoments am;
        am.p = p;
        std::vector<double> lm;
        for (std::size_t k = 0; k < t_grid.size(); ++k) {
            double top = -INFINITY;
            for (std::size_t e = 0; e < n_env; ++e) top = std::max(top, p * logs[e * t_grid.size() + k]);
            std::vector<double> rel(n_env);
            num::CompensatedSum total;
            double biggest = 0.0;
            for (std::size_t e = 0; e < n_env; ++e) {
                rel[e] = std::isfinite(top) ? std::exp(p * logs[e * t_grid.size() + k] - top) : 0.0;
                total.add(rel[e]);
                biggest = std::max(biggest, rel[e]);
            }
            const McEstimate r = summarize(rel, t_grid[k], seed);
            AnnealedMomentRow row;
            row.t = t_grid[k];
            row.moment = r;
            row.moment.mean = std::exp(top) * r.mean;
            row.moment.stderr_ = std::exp(top) * r.stderr_;
            row.log_moment_over_p = (top + std::log(r.mean)) / p;
            row.top_share = total.value() > 0.0 ? biggest / total.value() : 0.0;
            am.rows.push_back(row);
            lm.push_back(row.log_moment_over_p);
        }
        am.heavy_tail = am.rows.back().top_share > kHeavyShare;
        // Times at which one environment dominates the mean are dropped from the fit.
        std::size_t reliable = 0;
        while (reliable < am.rows.size() && am.rows[reliable].top_share <= kHeavyShare) ++reliable;
        am.fit_points = reliable;
        if (reliable >= 6)
            am.slope = fit_slope(std::vector<double>(t_grid.begin(), t_grid.begin() + static_cast<std::ptrdiff_t>(reliable)),
                                 std::vector<double>(lm.begin(), lm.begin() + static_cast<std::ptrdiff_t>(reliable)), slope);
        out.push_back(std::move(am));
    }
    return out;
}

McEstimate annealed_moment(const std::shared_ptr<const PotentialModel>& model, const ModelParams& params, double p,
                           double t, std::size_t n_env, std::uint64_t seed, unsigned threads) {
    return annealed_moments(model, params, {p}, {t}, n_env, seed, threads).front().rows.front().moment;
}

TimeReversal time_reversal_check(const EnvironmentWindow& env, const ModelParams& params, std::int64_t n, double t,
                                 const SolveOptions& options) {
    if (params.maximal_drift()) throw PreconditionError("time_reversal_check requires h < 1");
    if (n < 0) throw PreconditionError("time_reversal_check requires n >= 0");
    SolveOptions o = options;
    o.store_fields = true;
    o.center_only = false;
    if (o.window == 0) o.window = required_window(params, t);
    if (n >= o.window) throw PreconditionError("n must lie inside the window");
    // Backward equation of Y towards 0 and forward equation of Y from 0.
    const auto back = solve_lattice(env, params, LatticeOperator::x_adjoint(params), true, {t}, o);
    const auto fwd = solve_lattice(env, params, LatticeOperator::y_forward(params), true, {t}, o);
    const double ratio = params.backward_prob() / params.forward_prob();
    return {back.at(0, -n), std::pow(ratio, static_cast<double>(n)) * fwd.at(0, -n)};
}

BranchingReport branching_expectation_check(const EnvironmentWindow& env, const ModelParams& params, double t,
                                            std::size_t n_runs, std::uint64_t seed, unsigned threads) {
    for (double v : env.values())
        if (v > 0.0) throw PreconditionError("branching_expectation_check requires xi <= 0 (killing only)");
    const std::int64_t M = required_window(params, t);
    if (!env.contains(-M) || !env.contains(M)) throw PreconditionError("environment does not cover [-M, M]");
    const double k = params.kappa();
    const double left = params.forward_prob();  // Y steps to x-1 with the forward probability
    std::vector<double> counts(n_runs);
    parallel_for(n_runs, threads, [&](std::size_t r) {
        Stream rng(seed, r);
        std::size_t at_zero = 0;
        for (std::int64_t start = -M; start <= M; ++start) {
            std::int64_t x = start;
            double s = 0.0;
            bool alive = true;
            for (;;) {
                const double kill = -env[x];
                const double hold = rng.exponential(k + kill);
                s += hold;
                if (s >= t) break;
                if (rng.uniform() * (k + kill) < kill) {
                    alive = false;
                    break;
                }
                x += rng.uniform() < left ? -1 : 1;
                if (x < -M || x > M) {
                    alive = false;
                    break;
                }
            }
            if (alive && x == 0) ++at_zero;
        }
        counts[r] = static_cast<double>(at_zero);
    });
    BranchingReport rep;
    rep.count = summarize(counts, t, seed);
    SolveOptions o;
    o.window = M;
    o.store_fields = false;
    rep.pde = solve_pde(env, params, {t}, o).center.back();
    const double diff = std::abs(rep.count.mean - rep.pde);
    rep.agrees = diff <= 3.0 * rep.count.stderr_ || diff < 1e-12;
    return rep;
}

PassageEstimate passage_probability(const EnvironmentWindow& env, const ModelParams& params, std::size_t n, double a,
                                    double b, std::size_t n_samples, std::uint64_t seed, double theta,
                                    unsigned threads) {
    if (n == 0 || !(b > a)) throw PreconditionError("passage_probability needs n >= 1 and a < b");
    if (theta != 0.0 && !params.maximal_drift()) throw PreconditionError("a nonzero tilt requires h = 1");
    const auto top_site = static_cast<std::int64_t>(n);
    if (!env.contains(0) || !env.contains(top_site)) throw PreconditionError("environment must cover [0, n]");
    const double k = params.kappa();
    for (std::int64_t x = 1; x <= top_site; ++x)
        if (!(theta < k - env[x])) throw PreconditionError("tilt at or above the holding rate");

    // log Z_n = sum of log w_k(0) over the gaps; exact at h = 1.
    double log_z = 0.0;
    if (params.maximal_drift()) {
        for (std::int64_t x = 1; x <= top_site; ++x) log_z += std::log(k / (k - env[x]));
    } else {
        if (env.hi() < top_site + 1) throw PreconditionError("environment must extend beyond n");
        std::vector<double> vals(env.values().begin() + (1 - env.lo()), env.values().end());
        const auto prof = hitting_profile(EnvironmentWindow::from_values(std::move(vals), 1), params, 0.0);
        for (std::size_t i = 0; i < n; ++i) log_z += std::log(0.5 * (prof.lower[i] + prof.upper[i]));
    }

    const double right = params.backward_prob();  // Y steps to x+1
    std::vector<double> logw(n_samples, -INFINITY);
    parallel_for(n_samples, threads, [&](std::size_t i) {
        Stream rng(seed, i);
        double T = 0.0, lw = 0.0;
        if (params.maximal_drift()) {
            // Tilted holding rates kappa - xi - theta against the weighted law kappa - xi.
            for (std::int64_t x = top_site; x >= 1; --x) {
                const double rate = k - env[x];
                const double tau = rng.exponential(rate - theta);
                T += tau;
                lw += std::log(rate / (rate - theta)) - theta * tau;
            }
        } else {
            std::int64_t x = top_site;
            double integral = 0.0;
            while (x > 0) {
                const double tau = rng.exponential(k);
                integral += env[x] * tau;
                T += tau;
                x += rng.uniform() < right ? 1 : -1;
                if (!env.contains(x)) return;
            }
            lw = integral - log_z;
        }
        const double r = T / static_cast<double>(n);
        if (r >= a && r <= b) logw[i] = lw;
    });
    double top = -INFINITY;
    for (double v : logw) top = std::max(top, v);
    PassageEstimate e;
    e.n = n;
    e.a = a;
    e.b = b;
    e.theta = theta;
    e.n_samples = n_samples;
    if (!std::isfinite(top)) {
        e.probability = 0.0;
        e.stderr_ = 0.0;
        e.rate = INFINITY;
        return e;
    }
    std::vector<double> rel(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) rel[i] = std::isfinite(logw[i]) ? std::exp(logw[i] - top) : 0.0;
    const McEstimate m = summarize(rel, 0.0, seed);
    e.probability = std::exp(top) * m.mean;
    e.stderr_ = std::exp(top) * m.stderr_;
    e.rate = -(top + std::log(m.mean)) / static_cast<double>(n);
    return e;
}

void write_slope_csv(std::ostream& out, const SolutionField& field) {
    out << "t,u0,logu0_over_t\n";
    out.precision(17);
    for (std::size_t i = 0; i < field.times.size(); ++i) {
        const double t = field.times[i];
        out << t << ',' << field.center[i] << ',';
        if (t > 0.0) out << std::log(field.center[i]) / t;
        out << '\n';
    }
}

void write_endpoint_csv(std::ostream& out, const EndpointField& field) {
    out << "n,v,v_normalized\n";
    out.precision(17);
    if (field.values.empty()) return;
    const auto& v = field.values.back();
    const double mass = field.mass(field.values.size() - 1);
    for (std::size_t i = 0; i < v.size(); ++i)
        out << static_cast<std::int64_t>(i) - field.window << ',' << v[i] << ',' << (mass > 0.0 ? v[i] / mass : 0.0)
            << '\n';
}

void write_annealed_moments_csv(std::ostream& out, const std::vector<AnnealedMoments>& moments) {
    out << "t,p,moment,stderr,log_moment_over_p,top_share\n";
    out.precision(17);
    for (const auto& m : moments)
        for (const auto& r : m.rows)
            out << r.t << ',' << m.p << ',' << r.moment.mean << ',' << r.moment.stderr_ << ',' << r.log_moment_over_p
                << ',' << r.top_share << '\n';
}

nlohmann::json to_json(const McEstimate& e) {
    return {{"mean", e.mean}, {"stderr", e.stderr_}, {"n_paths", e.n_paths}, {"t", e.t}, {"seed", e.seed}};
}

nlohmann::json to_json(const SlopeEstimate& s) {
    return {{"slope", s.slope}, {"ci", s.ci}, {"stderr", s.stderr_}, {"drift", s.drift}};
}

nlohmann::json to_json(const GibbsSpeed& g) {
    return {{"t", g.t},
            {"mass", g.mass},
            {"mean_speed", g.mean_speed},
            {"sd_speed", g.sd_speed},
            {"bin_edges", g.bin_edges},
            {"bin_mass", g.bin_mass}};
}

nlohmann::json to_json(const SlopeEnsemble& s) {
    return {{"mean", s.mean}, {"stderr", s.stderr_}, {"slopes", s.slopes}};
}

}  // namespace pam
