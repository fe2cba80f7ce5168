#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "pam/core_model.hpp"

namespace pam {

/// Smallest admissible distance below the free critical tilt.
inline constexpr double kBetaMargin = 1e-12;

/// E_1 exp{beta T_0} for the potential-free Y-walk: the smaller root of
/// (kappa(1-h)/2) w^2 - (kappa - beta) w + kappa(1+h)/2 = 0, or kappa/(kappa-beta) at h = 1.
/// Throws DivergentFunctional beyond the critical tilt.
double free_hitting_weight(const ModelParams& params, double beta);

/// d/dbeta of free_hitting_weight. Infinite at the critical tilt when h < 1.
double free_hitting_weight_derivative(const ModelParams& params, double beta);

/// Tail value used to close the backward recursion at the last site.
enum class Boundary {
    BracketPair,  ///< optimistic free-field tail and pessimistic lower-bound tail
    FreeField,    ///< optimistic tail only (lower == upper)
    Absorbing,    ///< tail value 0 (lower == upper)
};

/// Per-site values w(n; beta) = E_n exp{ int_0^{T_{n-1}} (xi(Y_s) + beta) ds }
/// bracketed by two truncated recursions.
struct HittingProfile {
    double beta = 0.0;
    std::int64_t first_site = 1;
    std::vector<double> lower;
    std::vector<double> upper;
    /// upper - lower propagated by its own recursion, so it stays accurate far
    /// below the rounding level of the weights themselves.
    std::vector<double> gaps;
    std::vector<double> derivative_lower;  ///< empty unless derivatives were requested
    std::vector<double> derivative_upper;

    std::size_t size() const noexcept { return lower.size(); }
    std::int64_t last_site() const noexcept { return first_site + static_cast<std::int64_t>(size()) - 1; }
    double gap(std::size_t i) const noexcept { return gaps[i]; }
    /// Gap at the first site: the reported truncation error.
    double truncation_error() const noexcept { return gap(0); }
    double max_gap() const noexcept;
    /// Largest sitewise upper value, a computed stand-in for the a.s. bound on w.
    double max_weight() const noexcept;
    bool has_derivative() const noexcept { return !derivative_lower.empty(); }
};

struct ProfileOptions {
    Boundary boundary = Boundary::BracketPair;
    bool with_derivative = false;
    /// Lower bound b of the potential for the pessimistic tail. Defaults to the
    /// generating model's ess_inf, or to the window minimum for model-free windows.
    std::optional<double> potential_lower_bound;
};

/// Backward recursion w(n) = A(n) / (1 - B(n) w(n+1)) with
/// A(n) = (1+h)/2 * kappa/(kappa - xi(n) - beta), B(n) = (1-h)/2 * kappa/(kappa - xi(n) - beta).
/// The profile covers sites [env.lo, env.hi - 1]; the tail value stands in for w(env.hi).
HittingProfile hitting_profile(const EnvironmentWindow& env, const ModelParams& params, double beta,
                               const ProfileOptions& options = {});

/// hitting_profile with exact forward-mode derivatives dw/dbeta.
HittingProfile hitting_profile_derivative(const EnvironmentWindow& env, const ModelParams& params, double beta,
                                          Boundary boundary = Boundary::BracketPair);

struct TruncationOptions {
    std::size_t initial_tail = 64;
    std::size_t max_tail = 1'000'000;
    double gap_tolerance = 1e-9;
    bool with_derivative = false;
};

/// Profile over sites [first, last] of the sampled environment, with the tail region
/// grown geometrically until every site's bracket gap is below the tolerance.
struct TruncatedProfile {
    HittingProfile profile;
    std::size_t tail = 0;
    EnvironmentWindow env;
};

/// Throws NonConvergence if the tail exceeds max_tail before the gap closes.
TruncatedProfile truncated_profile(const std::shared_ptr<const PotentialModel>& model, std::uint64_t seed,
                                   const ModelParams& params, double beta, std::int64_t first, std::int64_t last,
                                   const TruncationOptions& options = {});

/// CSV columns: site, lower, upper, dlower, dupper.
void write_profile_csv(std::ostream& out, const HittingProfile& profile);

}  // namespace pam
