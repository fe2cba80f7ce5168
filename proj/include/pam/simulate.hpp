#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "json.hpp"
#include "pam/core_model.hpp"

namespace pam {

/// Coefficients of the lattice generator kappa [r (f(x+1) - f(x)) + l (f(x-1) - f(x))].
struct LatticeOperator {
    double right;
    double left;

    /// kappa * Delta_h, the generator of X (acting on u).
    static LatticeOperator x_walk(const ModelParams& params);
    /// The adjoint of x_walk: forward equation of X, equivalently the backward equation of Y.
    static LatticeOperator x_adjoint(const ModelParams& params);
    /// Forward equation of Y (the same coefficients as x_walk).
    static LatticeOperator y_forward(const ModelParams& params);
};

/// Smallest admissible half-width: ceil(4 kappa t) + 50.
std::int64_t required_window(const ModelParams& params, double t_max);

/// Largest admissible step: 0.1 / (2 kappa + |b|), with b the window minimum.
double max_stable_dt(const ModelParams& params, const EnvironmentWindow& env);

struct SolveOptions {
    std::int64_t window = 0;     ///< half-width M; 0 selects required_window
    double dt = 0.0;             ///< 0 selects max_stable_dt
    bool store_fields = true;    ///< keep the full window at each sampled time
    /// At h = 1 the sites on one side of 0 never influence the value at 0; skip them
    /// when only the centre value is needed. Requires store_fields = false.
    bool center_only = false;
};

/// Lattice field on [-M, M] with absorbing boundary at the sampled times.
/// For the solution of the PAM (initial value 1) values lie in (0, 1] when xi <= 0.
struct SolutionField {
    std::int64_t window = 0;
    double dt = 0.0;
    bool adjoint = false;  ///< initial value delta_0 and the forward (endpoint) operator
    std::vector<double> times;
    std::vector<double> center;                ///< value at site 0 per sampled time
    std::vector<std::vector<double>> values;   ///< per sampled time, sites -M..M (empty unless stored)
    std::size_t steps = 0;

    double at(std::size_t time_index, std::int64_t x) const { return values[time_index][static_cast<std::size_t>(x + window)]; }
    /// Sum over the window at a sampled time: the total mass of an endpoint field.
    double mass(std::size_t time_index) const;
};

using EndpointField = SolutionField;

/// Classical RK4 on the linear system f' = kappa L f + xi f over [-M, M], zero outside.
/// `times` must be increasing and nonnegative. Throws PreconditionError when dt or M
/// violate the stability and window rules and StabilityViolation on a negative value.
SolutionField solve_lattice(const EnvironmentWindow& env, const ModelParams& params, const LatticeOperator& op,
                            bool delta_initial, const std::vector<double>& times, const SolveOptions& options = {});

/// u(t, x) from u(0, .) = 1.
SolutionField solve_pde(const EnvironmentWindow& env, const ModelParams& params, const std::vector<double>& times,
                        const SolveOptions& options = {});

/// v(t, n) = E_0 exp{int xi(X)} 1{X_t = n}, from v(0, .) = delta_0.
EndpointField endpoint_field(const EnvironmentWindow& env, const ModelParams& params,
                             const std::vector<double>& times, const SolveOptions& options = {});

/// |u_M(t, 0) - u_{2M}(t, 0)| at the final time; env must cover [-2M, 2M].
double window_doubling_change(const EnvironmentWindow& env, const ModelParams& params, double t_max,
                              std::int64_t window = 0);

struct RichardsonReport {
    double u_coarse;
    double u_mid;
    double u_fine;
    double ratio;  ///< (u_dt - u_{dt/2}) / (u_{dt/2} - u_{dt/4}); 16 for a fourth-order method
};

RichardsonReport richardson_ratio(const EnvironmentWindow& env, const ModelParams& params, double t, double dt);

struct SlopeEstimate {
    double slope;
    double ci;          ///< 2 stderr of the fit plus the drift between the last two thirds
    double stderr_;
    double drift;       ///< |slope over the last third - slope over the middle third|
    std::vector<double> times;
    std::vector<double> log_values;
};

struct SlopeOptions {
    /// Environment fluctuations alone move the thirds apart by O(t^{-1/2}); about 0.05 at t = 400.
    double drift_tolerance = 0.15;
};

/// Least-squares slope over the last half of (t, log y). Throws NonStationarySlope
/// when the middle and last thirds disagree by more than max(drift_tolerance, 2 stderr).
SlopeEstimate fit_slope(const std::vector<double>& times, const std::vector<double>& log_values,
                        const SlopeOptions& options = {});

/// Slope of log u(t, 0) over the last half of t_grid.
SlopeEstimate quenched_slope(const EnvironmentWindow& env, const ModelParams& params, const std::vector<double>& t_grid,
                             const SlopeOptions& options = {}, const SolveOptions& solve = {});

struct SlopeEnsemble {
    double mean;
    double stderr_;  ///< sample standard deviation of the per-environment slopes / sqrt(n_env)
    std::vector<double> slopes;
};

/// quenched_slope averaged over n_env environments, environment e sampled with seed
/// counter_hash(seed, 0x510e, e). A single environment fluctuates by O(t^{-1/2}).
SlopeEnsemble quenched_slope_ensemble(const std::shared_ptr<const PotentialModel>& model, const ModelParams& params,
                                      const std::vector<double>& t_grid, std::size_t n_env, std::uint64_t seed,
                                      unsigned threads = 1, const SlopeOptions& options = {});

struct McEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;  ///< sample standard deviation / sqrt(n_paths)
    std::size_t n_paths = 0;
    double t = 0.0;
    std::uint64_t seed = 0;
};

/// E_0 exp{int_0^t xi(X_s) ds} from exact continuous-time paths; paths leaving the
/// window contribute 0, matching the absorbing boundary of the PDE.
McEstimate feynman_kac_mc(const EnvironmentWindow& env, const ModelParams& params, double t, std::size_t n_paths,
                          std::uint64_t seed, unsigned threads = 1);

struct GibbsSpeed {
    double t;
    double mass;        ///< u(t, 0)
    double mean_speed;  ///< mean of n / t under the normalized endpoint field
    double sd_speed;
    std::vector<double> bin_edges;  ///< n_bins + 1 edges in units of n / t
    std::vector<double> bin_mass;
};

struct GibbsOptions {
    std::size_t n_bins = 40;
    std::optional<double> alpha_lo;  ///< default: leftmost site with mass above 1e-12 of the peak
    std::optional<double> alpha_hi;
};

GibbsSpeed gibbs_speed(const EnvironmentWindow& env, const ModelParams& params, double t,
                       const GibbsOptions& options = {}, const SolveOptions& solve = {});

struct AnnealedMomentRow {
    double t;
    McEstimate moment;  ///< < u(t, 0)^p > over environments
    double log_moment_over_p;
    double top_share;   ///< largest single-environment share of the mean
};

struct AnnealedMoments {
    double p;
    std::vector<AnnealedMomentRow> rows;
    /// Slope of (1/p) log < u^p > over the last half of the leading times at which no
    /// environment carries more than half the mean; absent with fewer than 6 such times.
    std::optional<SlopeEstimate> slope;
    std::size_t fit_points = 0;
    bool heavy_tail = false;  ///< top environment carries more than half the mean at the last time
};

/// One PDE solve per environment, shared by every p. Environment e is sampled with
/// seed counter_hash(seed, 0xa11, e) on the window required by max(t_grid).
std::vector<AnnealedMoments> annealed_moments(const std::shared_ptr<const PotentialModel>& model,
                                              const ModelParams& params, const std::vector<double>& p_list,
                                              const std::vector<double>& t_grid, std::size_t n_env,
                                              std::uint64_t seed, unsigned threads = 1,
                                              const SlopeOptions& slope = {});

/// < u(t, 0)^p > at one time.
McEstimate annealed_moment(const std::shared_ptr<const PotentialModel>& model, const ModelParams& params, double p,
                           double t, std::size_t n_env, std::uint64_t seed, unsigned threads = 1);

struct TimeReversal {
    double lhs;  ///< E_{-n} exp{int xi(Y)} 1{Y_t = 0}
    double rhs;  ///< ((1-h)/(1+h))^n E_0 exp{int xi(Y)} 1{Y_t = -n}
};

/// Both sides from two independent solves; requires h < 1 and n within the window.
TimeReversal time_reversal_check(const EnvironmentWindow& env, const ModelParams& params, std::int64_t n, double t,
                                 const SolveOptions& options = {});

struct BranchingReport {
    McEstimate count;  ///< particles at 0 at time t, one particle started per site
    double pde;        ///< u(t, 0)
    bool agrees;       ///< |count - pde| <= 3 stderr (or both within 1e-12)
};

/// Killed-walk particle system (xi <= 0): one Y-particle per site of [-M, M],
/// killing rate -xi. The expected count at 0 equals u(t, 0).
BranchingReport branching_expectation_check(const EnvironmentWindow& env, const ModelParams& params, double t,
                                            std::size_t n_runs, std::uint64_t seed, unsigned threads = 1);

struct PassageEstimate {
    std::size_t n;
    double a;
    double b;
    double theta;
    double probability;
    double stderr_;
    double rate;  ///< -(1/n) log probability
    std::size_t n_samples;
};

/// P_n^xi(T_0 / n in [a, b]) by simulating the gap passages T_{k-1} - T_k of Y from n.
/// Paths are drawn from the potential-free law, exponentially tilted by theta, and
/// reweighted exactly by exp{int xi} / Z_n. A nonzero theta requires h = 1.
/// The window must cover [0, n] (and a margin to the right when h < 1).
PassageEstimate passage_probability(const EnvironmentWindow& env, const ModelParams& params, std::size_t n, double a,
                                    double b, std::size_t n_samples, std::uint64_t seed, double theta = 0.0,
                                    unsigned threads = 1);

/// CSV columns: t, u0, logu0_over_t.
void write_slope_csv(std::ostream& out, const SolutionField& field);
/// CSV columns: n, v, v_normalized at the last sampled time.
void write_endpoint_csv(std::ostream& out, const EndpointField& field);
/// CSV columns: t, p, moment, stderr, log_moment_over_p, top_share.
void write_annealed_moments_csv(std::ostream& out, const std::vector<AnnealedMoments>& moments);

nlohmann::json to_json(const McEstimate& e);
nlohmann::json to_json(const SlopeEstimate& s);
nlohmann::json to_json(const GibbsSpeed& g);
nlohmann::json to_json(const SlopeEnsemble& s);

}  // namespace pam
