#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace pam {

/// Jump rate kappa and drift h of the lattice operator kappa * Delta_h.
///
/// The X-walk (generator kappa * Delta_h) steps right with probability
/// (1+h)/2 and left with probability (1-h)/2; the time-reversed Y-walk
/// (generator kappa * Delta_{-h}) does the opposite.
class ModelParams {
public:
    ModelParams(double kappa, double h);

    double kappa() const noexcept { return kappa_; }
    double h() const noexcept { return h_; }

    /// Probability that X steps to x+1 (equivalently, that Y steps to x-1).
    double forward_prob() const noexcept { return 0.5 * (1.0 + h_); }
    /// Probability that X steps to x-1 (equivalently, that Y steps to x+1).
    double backward_prob() const noexcept { return 0.5 * (1.0 - h_); }

    bool maximal_drift() const noexcept { return h_ == 1.0; }

    /// Returns a copy with a different kappa (used by kappa sweeps).
    ModelParams with_kappa(double kappa) const { return {kappa, h_}; }
    ModelParams with_h(double h) const { return {kappa_, h}; }

private:
    double kappa_;
    double h_;
};

/// Probability law on finitely many distinct real atoms.
struct FiniteMeasure {
    std::vector<double> atoms;
    std::vector<double> weights;

    /// Throws ConfigError unless weights are a probability vector and atoms are distinct.
    void validate() const;
    std::size_t size() const noexcept { return atoms.size(); }
    /// Weight of the atom equal to `x` (within 1e-12), zero if absent.
    double weight_of(double x) const noexcept;
    double min_atom() const;
    double max_atom() const;
};

namespace potential {
struct Degenerate {
    double c = 0.0;
};
/// Mass q at 0, mass 1-q at -a.
struct TwoPoint {
    double a = 1.0;
    double q = 0.5;
};
struct FiniteSupport {
    std::vector<double> atoms;
    std::vector<double> weights;
};
/// Uniform law on [b, 0].
struct UniformInterval {
    double b = -1.0;
};
/// Stationary Markov chain on finitely many states; row-stochastic transition.
struct MarkovChain {
    std::vector<double> states;
    std::vector<std::vector<double>> transition;
};
}  // namespace potential

using PotentialLaw = std::variant<potential::Degenerate, potential::TwoPoint,
                                  potential::FiniteSupport, potential::UniformInterval,
                                  potential::MarkovChain>;

/// Law of the potential xi together with the normalization offset that was
/// removed from it. Results computed for the normalized model are reported
/// as value + shift().
class PotentialModel {
public:
    explicit PotentialModel(PotentialLaw law, double shift = 0.0);

    const PotentialLaw& law() const noexcept { return law_; }
    double shift() const noexcept { return shift_; }

    std::string variant_name() const;
    bool is_iid() const noexcept;
    bool is_degenerate() const noexcept;
    bool has_finite_support() const noexcept;

    double ess_sup() const;
    /// Smallest value in the support (the lower bound b of the potential).
    double ess_inf() const;
    bool is_normalized() const { return ess_sup() == 0.0; }

    /// Single-site marginal as a finite measure; empty for UniformInterval.
    /// For MarkovChain this is the stationary distribution.
    std::optional<FiniteMeasure> marginal() const;

    /// Expectation of f(xi(0)) under the single-site marginal.
    double expectation(const std::function<double(double)>& f) const;

    /// Draw of xi(x) for i.i.d. variants from a uniform variate in (0,1).
    double quantile(double u) const;

    /// Stationary distribution of the MarkovChain variant (empty otherwise).
    const std::vector<double>& stationary() const noexcept { return stationary_; }

private:
    PotentialLaw law_;
    double shift_;
    std::vector<double> stationary_;
    std::vector<double> cdf_;  // cumulative weights of atoms/states
};

/// A realization of xi on the integer range [lo, hi].
///
/// `offset` records the accumulated shift applied by shift_environment, so that
/// value(x) equals the underlying sampled field at site x + offset.
class EnvironmentWindow {
public:
    EnvironmentWindow(std::vector<double> values, std::int64_t lo, std::uint64_t seed,
                      std::shared_ptr<const PotentialModel> model, std::int64_t offset = 0);

    /// Window with explicit values and no generating model.
    static EnvironmentWindow from_values(std::vector<double> values, std::int64_t lo = 0);

    std::int64_t lo() const noexcept { return lo_; }
    std::int64_t hi() const noexcept { return lo_ + static_cast<std::int64_t>(values_.size()) - 1; }
    std::size_t size() const noexcept { return values_.size(); }
    bool contains(std::int64_t x) const noexcept { return x >= lo_ && x <= hi(); }

    /// Value at site x; throws std::out_of_range outside [lo, hi].
    double at(std::int64_t x) const;
    double operator[](std::int64_t x) const noexcept { return values_[static_cast<std::size_t>(x - lo_)]; }
    std::span<const double> values() const noexcept { return values_; }

    std::uint64_t seed() const noexcept { return seed_; }
    std::int64_t offset() const noexcept { return offset_; }
    const std::shared_ptr<const PotentialModel>& model() const noexcept { return model_; }

    double min_value() const;

private:
    std::vector<double> values_;
    std::int64_t lo_;
    std::uint64_t seed_;
    std::shared_ptr<const PotentialModel> model_;
    std::int64_t offset_;
};

/// Shifts the model so that its essential supremum is 0, accumulating the
/// removed constant into shift().
PotentialModel normalize(const PotentialModel& model);

/// Samples xi on [lo, hi]. The value at each site depends only on
/// (model, seed, site), so windows of different extents agree where they overlap.
/// Requires every atom/state of the model to be <= 0.
EnvironmentWindow sample_environment(std::shared_ptr<const PotentialModel> model,
                                     std::uint64_t seed, std::int64_t lo, std::int64_t hi);

/// Window with value(x) = env.value(x + k), restricted to the original index range.
EnvironmentWindow shift_environment(const EnvironmentWindow& env, std::int64_t k);

/// Critical tilt beta_cr of the hitting functional.
struct CriticalTilt {
    double value;  ///< beta_cr when known, otherwise the lower end of the bracket
    double lower;
    double upper;
    bool formula_available;
};

/// kappa (1 - sqrt(1 - h^2)) for h < 1, kappa for h = 1: the critical tilt of the
/// potential-free walk.
double free_critical_beta(const ModelParams& params);

CriticalTilt beta_cr(const ModelParams& params, const PotentialModel& model);

}  // namespace pam
