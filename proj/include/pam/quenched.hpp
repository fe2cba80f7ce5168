#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pam/core_model.hpp"
#include "pam/hitting.hpp"

namespace pam {

/// How an L value was obtained.
enum class LMethod {
    Exact,     ///< single-site closed form (h = 1 or zero potential)
    Birkhoff,  ///< ergodic average over one long sampled environment
};

/// L(beta) = < log w(1; beta) >, bracketed by the truncation pair.
struct LFunctionEstimate {
    double beta = 0.0;
    double mean_lower = 0.0;
    double mean_upper = 0.0;
    double stderr_ = 0.0;
    std::size_t n_sites = 0;
    std::optional<double> derivative_mean;  ///< < w'/w >, i.e. L'(beta)
    LMethod method = LMethod::Exact;

    double value() const noexcept { return 0.5 * (mean_lower + mean_upper); }
    double half_width() const noexcept { return 0.5 * (mean_upper - mean_lower); }
};

struct QuenchedOptions {
    std::size_t n_sites = 200'000;
    std::uint64_t seed = 1;
    TruncationOptions truncation{};
    double tol = 1e-10;  ///< root tolerance in beta
    /// Relative distances below beta_cr probed when looking for a sign change.
    std::vector<double> eps_ladder{1e-1, 1e-2, 1e-3, 1e-4};
    /// Use the ergodic average even where a closed form exists.
    bool force_birkhoff = false;
    unsigned threads = 1;
};

/// Estimate of L(beta) for a potential <= 0 (normally the normalized model).
/// Exact whenever every site's functional depends on its own potential value only.
LFunctionEstimate estimate_L(const std::shared_ptr<const PotentialModel>& model, const ModelParams& params,
                             double beta, const QuenchedOptions& options = {}, bool with_derivative = false);

/// L(beta) curve over a grid, one task per grid point.
std::vector<LFunctionEstimate> L_curve(const std::shared_ptr<const PotentialModel>& model,
                                       const ModelParams& params, const std::vector<double>& betas,
                                       const QuenchedOptions& options = {});

/// CSV columns: beta, L_lower, L_upper, stderr, dL.
void write_L_curve_csv(std::ostream& out, const std::vector<LFunctionEstimate>& curve);

/// A quenched or annealed Lyapunov exponent, reported with the normalization shift applied.
struct LyapunovResult {
    double value = 0.0;
    std::string kind = "quenched";  ///< "quenched" or "annealed"
    double p = 0.0;                 ///< moment order (annealed only)
    std::array<double, 2> bracket{0.0, 0.0};
    double residual = 0.0;
    bool at_boundary = false;
    double shift = 0.0;
    double beta_cr = 0.0;
    bool beta_cr_formula = true;
    std::string method;
    /// Relation of the underlying L or L_p^sup evaluation to the true function:
    /// "exact", "estimate", "upper" or "bracket".
    std::string bound_direction = "estimate";
    std::optional<int> depth;
    bool conjectured = false;
    std::uint64_t seed = 0;
    std::size_t n_sites = 0;

    /// Exponent for the normalized model (esssup xi = 0).
    double normalized() const noexcept { return value - shift; }
};

nlohmann::json to_json(const LyapunovResult& r);

/// Zero-crossing search for an increasing function f on [0, beta_max) with the
/// certified bracket pair (lower <= f <= upper). Shared by the quenched and
/// annealed exponents.
struct BracketedFunction {
    double lower;
    double upper;
};
struct ZeroSearch {
    double value;  ///< -beta at the crossing, or -beta_max at the boundary
    std::array<double, 2> bracket;
    double residual;
    bool at_boundary;
};
/// Throws InconsistentBracket when the two ends of the pair disagree about a
/// crossing by more than `tol`.
ZeroSearch find_exponent(const std::function<BracketedFunction(double)>& f, double beta_max,
                         const std::vector<double>& eps_ladder, double tol);

/// lambda_0 = -(zero of L on (0, beta_cr)) or -beta_cr without a zero.
/// For Markov potentials at h < 1 the search is limited to the potential-free
/// critical tilt, the lower end of the known bracket.
LyapunovResult lambda_quenched(const std::shared_ptr<const PotentialModel>& model, const ModelParams& params,
                               const QuenchedOptions& options = {});

enum class Phase { PositiveSpeed, Critical, Screening };
std::string to_string(Phase phase);

struct PhaseReport {
    Phase phase = Phase::PositiveSpeed;
    std::optional<double> alpha_star;
    std::optional<std::array<double, 2>> m_interval;
    double limit_L_at_crit = 0.0;
    double limit_uncertainty = 0.0;
    bool widened_uncertainty = false;
    std::vector<std::array<double, 2>> ladder;  ///< (beta, L) rungs used for the limit
};

nlohmann::json to_json(const PhaseReport& r);

/// Classifies the Gibbs-speed phase from the sign of lim_{beta -> beta_cr} L(beta).
PhaseReport optimal_speed(const std::shared_ptr<const PotentialModel>& model, const ModelParams& params,
                          const LyapunovResult& lambda0, const QuenchedOptions& options = {});

struct LegendrePoint {
    double alpha;
    double value;     ///< +inf when alpha <= 0
    double beta_star;
    bool at_edge;     ///< supremum attained at the largest admissible beta
};

/// Lambda*(alpha) = sup_{beta < beta_cr} (alpha beta - Lambda(beta)), Lambda = L - L(0).
std::vector<LegendrePoint> legendre_lambda_star(const std::shared_ptr<const PotentialModel>& model,
                                                const ModelParams& params, const std::vector<double>& alpha_grid,
                                                const QuenchedOptions& options = {});

struct VariationalResult {
    double value;         ///< refined sup-inf, shift applied
    double coarse_value;  ///< plain grid sup-inf, shift applied
    double alpha_at;
    double refinement_gap;
    bool grid_too_coarse;
};

/// sup_{alpha in [0, alpha_max]} inf_{beta < beta_cr} (-beta + alpha L(beta)).
/// The grid is flagged too coarse when golden refinement moves the value by more than grid_tol.
VariationalResult lambda_quenched_variational(const std::shared_ptr<const PotentialModel>& model,
                                              const ModelParams& params, double alpha_max,
                                              std::size_t n_alpha = 200, std::size_t n_beta = 200,
                                              const QuenchedOptions& options = {}, double grid_tol = 1e-3);

/// Largest beta used for quenched searches: beta_cr, or the potential-free value
/// for Markov potentials at h < 1.
double quenched_beta_max(const ModelParams& params, const PotentialModel& model);

}  // namespace pam
