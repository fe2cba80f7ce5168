#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pam/core_model.hpp"
#include "pam/quenched.hpp"

namespace pam {

/// H(mu | eta) = sum mu_i log(mu_i / eta_i), with 0 log 0 = 0 and +inf when mu
/// charges an atom outside the support of eta. Atoms are matched by value.
double relative_entropy(const FiniteMeasure& mu, const FiniteMeasure& eta);

/// Entropy rate I(mu^{N}) of the product measure relative to eta^{N}; equals H(mu | eta).
double product_rate(const FiniteMeasure& mu, const FiniteMeasure& eta);

/// Stationary-or-not Markov measure on symbols {0, ..., s-1}: initial law and
/// transition matrix. Order 0 (i.i.d.) is the case of identical rows.
struct MarkovMeasure {
    std::vector<double> initial;
    std::vector<std::vector<double>> transition;

    static MarkovMeasure product(const std::vector<double>& law);
    void validate() const;
};

struct ChainIdentity {
    double lhs;  ///< sum_{i=1..n} H(pi_i nu | pi_{i-1} nu (x) rho)
    double rhs;  ///< H(pi_n nu | rho^n)
};

/// Both sides of the entropy chain rule by full enumeration of n-tuples.
/// Requires n <= 4 and at most 4 symbols.
ChainIdentity entropy_chain_identity(const MarkovMeasure& nu, const std::vector<double>& rho, int n);

/// L(beta, mu^{N}): the quenched functional with the environment drawn from mu instead of eta.
LFunctionEstimate L_of_product(const ModelParams& params, double beta, const FiniteMeasure& mu,
                               const QuenchedOptions& options = {});

/// Value of an L_p^sup estimator with its relation to the true supremum.
struct LpSupValue {
    double value;
    double lower;  ///< certified lower end (equals value for exact and upper-bound methods)
    double upper;
    std::string bound_direction;  ///< "exact", "upper" or "bracket"
};

/// Depth-1 exponential tilt: (1/p) log < w_1(xi)^p > with w_1 the one-site functional
/// closed by the free-field tail. Exact at h = 1; an upper bound on L_p^sup for h < 1.
LpSupValue lp_sup_tilted(const ModelParams& params, const PotentialModel& eta, double beta, double p);

struct TransferOptions {
    double tol = 1e-10;  ///< relative Collatz-Wielandt gap at which power iteration stops
    std::size_t max_iter = 100'000;
    unsigned threads = 1;
};

struct TransferResult {
    double value;  ///< (1/p) log rho(T) for the optimistic tail
    double lower;  ///< pessimistic-tail operator, Collatz-Wielandt lower end
    double upper;  ///< optimistic-tail operator, Collatz-Wielandt upper end
    std::size_t states;
    std::size_t iterations;
};

/// (1/p) log of the Perron root of the depth-d transfer operator on (d-1)-tuples,
/// entry (a_1..a_{d-1}) -> (a_2..a_d) = eta(a_d) w_d(a_1..a_d)^p. The pessimistic
/// and optimistic tails bracket L_p^sup. Throws NonConvergence with the Gelfand
/// bracket in the message if power iteration stalls.
TransferResult lp_sup_transfer(const ModelParams& params, const PotentialModel& eta, double beta, double p,
                               int depth, const TransferOptions& options = {});

/// Largest over d-tuples of log w_d with the optimistic tail (the p -> infinity limit).
double transfer_max_log_weight(const ModelParams& params, const PotentialModel& eta, double beta, int depth);

enum class AnnealedMethod { ClosedFormH1, TiltedProduct, Transfer };
std::string to_string(AnnealedMethod m);
AnnealedMethod parse_annealed_method(const std::string& name);

struct AnnealedOptions {
    std::optional<AnnealedMethod> method;  ///< default: closed form at h = 1, else transfer (finite support) or tilted
    int depth = 4;
    double tol = 1e-10;
    std::vector<double> eps_ladder{1e-1, 1e-2, 1e-3, 1e-4, 1e-6};
    TransferOptions transfer{};
};

AnnealedMethod default_method(const ModelParams& params, const PotentialModel& model);

/// L_p^sup(beta) by the chosen method, for the normalized model.
LpSupValue lp_sup(const ModelParams& params, const PotentialModel& eta, double beta, double p,
                  AnnealedMethod method, const AnnealedOptions& options = {});

/// lambda_p = -(zero of L_p^sup on (0, beta_cr)) or -beta_cr, with the shift applied.
LyapunovResult lambda_annealed(const std::shared_ptr<const PotentialModel>& model, const ModelParams& params,
                               double p, const AnnealedOptions& options = {});

/// h = 1, integer p: zero of lambda -> < (kappa/(kappa + lambda - xi))^p > - 1 on (-kappa, 0)
/// by bisection on the moment itself (independent of lambda_annealed).
LyapunovResult lambda_annealed_maxdrift(const ModelParams& params, const PotentialModel& eta, int p);

/// lambda_annealed_maxdrift for a real p; rejects non-integer values.
LyapunovResult lambda_annealed_maxdrift(const ModelParams& params, const PotentialModel& eta, double p);

struct LaplaceTransform {
    double m;            ///< < kappa / (kappa + beta - xi) >
    double partial_sum;  ///< (1/kappa) sum_{n=1..n_terms} m^n
    double closed_form;  ///< m / (kappa (1 - m)), +inf when m >= 1
};

/// Laplace transform in t of the first moment at h = 1, as a geometric series in m.
LaplaceTransform maxdrift_laplace(const ModelParams& params, const PotentialModel& eta, double beta,
                                  std::size_t n_terms = 10'000);

struct IntermittencyRow {
    double p;
    double lambda;
};

struct IntermittencyReport {
    double lambda0;
    std::vector<IntermittencyRow> rows;
    std::optional<double> intermittent_from;  ///< smallest grid p with strict increase beyond it
    bool monotone;
    bool p_lambda_convex;
    bool above_quenched;
    double tolerance;
};

IntermittencyReport intermittency_scan(const std::shared_ptr<const PotentialModel>& model, const ModelParams& params,
                                       const std::vector<double>& p_grid, const AnnealedOptions& options = {},
                                       const QuenchedOptions& qoptions = {});

struct ContinuityRow {
    double p;
    double lambda;
    double gap;
};

struct ContinuityReport {
    double lambda0;
    std::vector<ContinuityRow> rows;
    bool monotone_shrink;
    double final_gap;
    bool conjectured;
};

ContinuityReport continuity_at_zero(const std::shared_ptr<const PotentialModel>& model, const ModelParams& params,
                                    const std::vector<double>& p_ladder, const AnnealedOptions& options = {},
                                    const QuenchedOptions& qoptions = {});

nlohmann::json to_json(const IntermittencyReport& r);
nlohmann::json to_json(const ContinuityReport& r);

struct AnnealedCurveRow {
    double p;
    double beta;
    LpSupValue value;
    AnnealedMethod method;
    int depth;
};

std::vector<AnnealedCurveRow> annealed_curve(const std::shared_ptr<const PotentialModel>& model,
                                             const ModelParams& params, double p, const std::vector<double>& betas,
                                             const AnnealedOptions& options = {});

/// CSV columns: p, beta, lp_sup, method, depth, bound_direction.
void write_annealed_curve_csv(std::ostream& out, const std::vector<AnnealedCurveRow>& rows);

}  // namespace pam
