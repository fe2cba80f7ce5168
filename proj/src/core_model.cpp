#include "pam/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "pam/errors.hpp"
#include "pam/rng.hpp"

namespace pam {

namespace {

constexpr double kWeightTol = 1e-12;
constexpr std::uint64_t kEnvStream = 0xe17;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_probability_vector(const std::vector<double>& w, const std::string& what) {
    if (w.empty()) throw ConfigError(what + ": empty probability vector");
    double sum = 0.0;
    for (double x : w) {
        if (!std::isfinite(x) || x < 0.0) throw ConfigError(what + ": negative or non-finite weight");
        sum += x;
    }
    if (std::abs(sum - 1.0) > kWeightTol) {
        std::ostringstream os;
        os << what << ": weights sum to " << sum << ", expected 1";
        throw ConfigError(os.str());
    }
}

void check_nonpositive(const std::vector<double>& v, const std::string& what) {
    for (double x : v) {
        if (!std::isfinite(x)) throw ConfigError(what + ": non-finite value");
        if (x > 0.0) throw ConfigError(what + ": values must be <= 0");
    }
}

void check_distinct(const std::vector<double>& v, const std::string& what) {
    std::vector<double> s = v;
    std::sort(s.begin(), s.end());
    for (std::size_t i = 1; i < s.size(); ++i)
        if (std::abs(s[i] - s[i - 1]) <= kWeightTol) throw ConfigError(what + ": atoms must be distinct");
}

std::vector<double> cumulative(const std::vector<double>& w) {
    std::vector<double> c(w.size());
    std::partial_sum(w.begin(), w.end(), c.begin());
    c.back() = 1.0;
    return c;
}

std::size_t draw_index(const std::vector<double>& cdf, double u) {
    auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    return static_cast<std::size_t>(it - cdf.begin());
}

bool irreducible(const std::vector<std::vector<double>>& p) {
    const std::size_t n = p.size();
    std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
    for (std::size_t i = 0; i < n; ++i) {
        reach[i][i] = 1;
        for (std::size_t j = 0; j < n; ++j)
            if (p[i][j] > 0.0) reach[i][j] = 1;
    }
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            if (reach[i][k])
                for (std::size_t j = 0; j < n; ++j)
                    if (reach[k][j]) reach[i][j] = 1;
    for (const auto& row : reach)
        for (char c : row)
            if (!c) return false;
    return true;
}

// Solves pi P = pi, sum pi = 1 by Gaussian elimination on (P^T - I) with the
// last equation replaced by the normalization.
std::vector<double> stationary_distribution(const std::vector<std::vector<double>>& p) {
    const std::size_t n = p.size();
    std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a[i][j] = p[j][i] - (i == j ? 1.0 : 0.0);
    for (std::size_t j = 0; j < n; ++j) a[n - 1][j] = 1.0;
    a[n - 1][n] = 1.0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        std::swap(a[piv], a[col]);
        const double d = a[col][col];
        if (std::abs(d) < 1e-300) throw ConfigError("markov chain: singular stationary system");
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r][col] / d;
            if (f == 0.0) continue;
            for (std::size_t c = col; c <= n; ++c) a[r][c] -= f * a[col][c];
        }
    }
    std::vector<double> pi(n);
    for (std::size_t i = 0; i < n; ++i) pi[i] = std::max(0.0, a[i][n] / a[i][i]);
    const double s = std::accumulate(pi.begin(), pi.end(), 0.0);
    for (double& x : pi) x /= s;
    return pi;
}

}  // namespace

ModelParams::ModelParams(double kappa, double h) : kappa_(kappa), h_(h) {
    if (!(kappa > 0.0) || !std::isfinite(kappa)) throw ConfigError("kappa must be a positive finite number");
    if (!(h > 0.0 && h <= 1.0)) throw ConfigError("h must lie in (0, 1]");
}

void FiniteMeasure::validate() const {
    if (atoms.size() != weights.size()) throw ConfigError("finite measure: atoms and weights differ in length");
    check_probability_vector(weights, "finite measure");
    for (double a : atoms)
        if (!std::isfinite(a)) throw ConfigError("finite measure: non-finite atom");
    check_distinct(atoms, "finite measure");
}

double FiniteMeasure::weight_of(double x) const noexcept {
    for (std::size_t i = 0; i < atoms.size(); ++i)
        if (std::abs(atoms[i] - x) <= kWeightTol) return weights[i];
    return 0.0;
}

double FiniteMeasure::min_atom() const {
    double m = INFINITY;
    for (std::size_t i = 0; i < atoms.size(); ++i)
        if (weights[i] > 0.0) m = std::min(m, atoms[i]);
    return m;
}

double FiniteMeasure::max_atom() const {
    double m = -INFINITY;
    for (std::size_t i = 0; i < atoms.size(); ++i)
        if (weights[i] > 0.0) m = std::max(m, atoms[i]);
    return m;
}

PotentialModel::PotentialModel(PotentialLaw law, double shift) : law_(std::move(law)), shift_(shift) {
    if (!std::isfinite(shift_)) throw ConfigError("potential shift must be finite");
    std::visit(overloaded{
                   [](const potential::Degenerate& d) {
                       if (!std::isfinite(d.c) || d.c > 0.0) throw ConfigError("degenerate: c must be finite and <= 0");
                   },
                   [this](const potential::TwoPoint& t) {
                       if (!(t.a > 0.0) || !std::isfinite(t.a)) throw ConfigError("two_point: a must be > 0");
                       if (!(t.q > 0.0 && t.q < 1.0)) throw ConfigError("two_point: q must lie in (0, 1)");
                       cdf_ = {1.0 - t.q, 1.0};  // atoms ordered {-a, 0}
                   },
                   [this](const potential::FiniteSupport& f) {
                       if (f.atoms.size() != f.weights.size())
                           throw ConfigError("finite_support: atoms and weights differ in length");
                       check_nonpositive(f.atoms, "finite_support");
                       check_probability_vector(f.weights, "finite_support");
                       check_distinct(f.atoms, "finite_support");
                       cdf_ = cumulative(f.weights);
                   },
                   [](const potential::UniformInterval& u) {
                       if (!(u.b < 0.0) || !std::isfinite(u.b)) throw ConfigError("uniform: b must be finite and < 0");
                   },
                   [this](const potential::MarkovChain& m) {
                       const std::size_t n = m.states.size();
                       if (n == 0) throw ConfigError("markov: no states");
                       check_nonpositive(m.states, "markov");
                       check_distinct(m.states, "markov");
                       if (m.transition.size() != n) throw ConfigError("markov: transition must be square");
                       for (const auto& row : m.transition) {
                           if (row.size() != n) throw ConfigError("markov: transition must be square");
                           check_probability_vector(row, "markov transition row");
                       }
                       if (!irreducible(m.transition)) throw ConfigError("markov: chain is not irreducible");
                       stationary_ = stationary_distribution(m.transition);
                       cdf_ = cumulative(stationary_);
                   },
               },
               law_);
}

std::string PotentialModel::variant_name() const {
    return std::visit(overloaded{
                          [](const potential::Degenerate&) { return std::string("degenerate"); },
                          [](const potential::TwoPoint&) { return std::string("two_point"); },
                          [](const potential::FiniteSupport&) { return std::string("finite_support"); },
                          [](const potential::UniformInterval&) { return std::string("uniform"); },
                          [](const potential::MarkovChain&) { return std::string("markov"); },
                      },
                      law_);
}

bool PotentialModel::is_iid() const noexcept { return !std::holds_alternative<potential::MarkovChain>(law_); }

bool PotentialModel::is_degenerate() const noexcept {
    if (std::holds_alternative<potential::Degenerate>(law_)) return true;
    if (const auto* f = std::get_if<potential::FiniteSupport>(&law_)) {
        return std::count_if(f->weights.begin(), f->weights.end(), [](double w) { return w > 0.0; }) == 1;
    }
    if (const auto* m = std::get_if<potential::MarkovChain>(&law_)) return m->states.size() == 1;
    return false;
}

bool PotentialModel::has_finite_support() const noexcept {
    return !std::holds_alternative<potential::UniformInterval>(law_);
}

double PotentialModel::ess_sup() const {
    if (auto m = marginal()) return m->max_atom();
    return 0.0;  // uniform on [b, 0]
}

double PotentialModel::ess_inf() const {
    if (auto m = marginal()) return m->min_atom();
    return std::get<potential::UniformInterval>(law_).b;
}

std::optional<FiniteMeasure> PotentialModel::marginal() const {
    return std::visit(overloaded{
                          [](const potential::Degenerate& d) -> std::optional<FiniteMeasure> {
                              return FiniteMeasure{{d.c}, {1.0}};
                          },
                          [](const potential::TwoPoint& t) -> std::optional<FiniteMeasure> {
                              return FiniteMeasure{{-t.a, 0.0}, {1.0 - t.q, t.q}};
                          },
                          [](const potential::FiniteSupport& f) -> std::optional<FiniteMeasure> {
                              return FiniteMeasure{f.atoms, f.weights};
                          },
                          [](const potential::UniformInterval&) -> std::optional<FiniteMeasure> {
                              return std::nullopt;
                          },
                          [this](const potential::MarkovChain& m) -> std::optional<FiniteMeasure> {
                              return FiniteMeasure{m.states, stationary_};
                          },
                      },
                      law_);
}

double PotentialModel::expectation(const std::function<double(double)>& f) const {
    if (auto m = marginal()) {
        double s = 0.0;
        for (std::size_t i = 0; i < m->size(); ++i)
            if (m->weights[i] > 0.0) s += m->weights[i] * f(m->atoms[i]);
        return s;
    }
    const double b = std::get<potential::UniformInterval>(law_).b;
    using boost::math::quadrature::gauss_kronrod;
    return gauss_kronrod<double, 31>::integrate(f, b, 0.0, 20, 1e-14) / (-b);
}

double PotentialModel::quantile(double u) const {
    return std::visit(overloaded{
                          [](const potential::Degenerate& d) { return d.c; },
                          [&](const potential::TwoPoint& t) { return u <= cdf_[0] ? -t.a : 0.0; },
                          [&](const potential::FiniteSupport& f) { return f.atoms[draw_index(cdf_, u)]; },
                          [&](const potential::UniformInterval& un) { return un.b * u; },
                          [&](const potential::MarkovChain& m) { return m.states[draw_index(cdf_, u)]; },
                      },
                      law_);
}

EnvironmentWindow::EnvironmentWindow(std::vector<double> values, std::int64_t lo, std::uint64_t seed,
                                     std::shared_ptr<const PotentialModel> model, std::int64_t offset)
    : values_(std::move(values)), lo_(lo), seed_(seed), model_(std::move(model)), offset_(offset) {
    if (values_.empty()) throw PreconditionError("environment window must be nonempty");
    for (double v : values_)
        if (!(v <= 0.0)) throw PreconditionError("environment values must be <= 0");
}

EnvironmentWindow EnvironmentWindow::from_values(std::vector<double> values, std::int64_t lo) {
    return EnvironmentWindow(std::move(values), lo, 0, nullptr, 0);
}

double EnvironmentWindow::at(std::int64_t x) const {
    if (!contains(x)) throw std::out_of_range("site outside environment window");
    return (*this)[x];
}

double EnvironmentWindow::min_value() const { return *std::min_element(values_.begin(), values_.end()); }

PotentialModel normalize(const PotentialModel& model) {
    const double c = model.ess_sup();
    if (!std::isfinite(c)) throw ConfigError("potential has no finite essential supremum");
    if (c == 0.0) return model;
    const double shift = model.shift() + c;
    return std::visit(overloaded{
                          [&](const potential::Degenerate&) { return PotentialModel(potential::Degenerate{0.0}, shift); },
                          [&](const potential::TwoPoint& t) { return PotentialModel(t, shift); },
                          [&](const potential::FiniteSupport& f) {
                              auto g = f;
                              for (double& a : g.atoms) a -= c;
                              return PotentialModel(std::move(g), shift);
                          },
                          [&](const potential::UniformInterval& u) { return PotentialModel(u, shift); },
                          [&](const potential::MarkovChain& m) {
                              auto g = m;
                              for (double& a : g.states) a -= c;
                              return PotentialModel(std::move(g), shift);
                          },
                      },
                      model.law());
}

EnvironmentWindow sample_environment(std::shared_ptr<const PotentialModel> model, std::uint64_t seed,
                                     std::int64_t lo, std::int64_t hi) {
    if (!model) throw PreconditionError("sample_environment: null model");
    if (lo > hi) throw PreconditionError("sample_environment: lo > hi");
    if (model->ess_sup() > 0.0) throw PreconditionError("sample_environment: model must satisfy ess sup <= 0");
    const auto n = static_cast<std::size_t>(hi - lo + 1);
    std::vector<double> values(n);
    auto u = [seed](std::int64_t x) { return to_unit_open(counter_hash(seed, kEnvStream, x)); };

    if (const auto* mc = std::get_if<potential::MarkovChain>(&model->law())) {
        // The chain is anchored at site 0 (stationary draw), run forward for x > 0
        // and with the time-reversed kernel for x < 0.
        const std::size_t s = mc->states.size();
        const auto& pi = model->stationary();
        std::vector<std::vector<double>> fwd(s), bwd(s);
        for (std::size_t i = 0; i < s; ++i) {
            std::vector<double> rev(s);
            for (std::size_t j = 0; j < s; ++j) rev[j] = pi[j] * mc->transition[j][i] / pi[i];
            const double tot = std::accumulate(rev.begin(), rev.end(), 0.0);
            for (double& r : rev) r /= tot;
            fwd[i] = cumulative(mc->transition[i]);
            bwd[i] = cumulative(rev);
        }
        std::vector<double> pcdf = cumulative(pi);
        const std::size_t s0 = draw_index(pcdf, u(0));
        auto put = [&](std::int64_t x, std::size_t st) {
            if (x >= lo && x <= hi) values[static_cast<std::size_t>(x - lo)] = mc->states[st];
        };
        put(0, s0);
        std::size_t st = s0;
        for (std::int64_t x = 1; x <= hi; ++x) {
            st = draw_index(fwd[st], u(x));
            put(x, st);
        }
        st = s0;
        for (std::int64_t x = -1; x >= lo; --x) {
            st = draw_index(bwd[st], u(x));
            put(x, st);
        }
    } else {
        for (std::int64_t x = lo; x <= hi; ++x) values[static_cast<std::size_t>(x - lo)] = model->quantile(u(x));
    }
    return EnvironmentWindow(std::move(values), lo, seed, std::move(model), 0);
}

EnvironmentWindow shift_environment(const EnvironmentWindow& env, std::int64_t k) {
    const std::int64_t new_lo = std::max(env.lo(), env.lo() - k);
    const std::int64_t new_hi = std::min(env.hi(), env.hi() - k);
    if (new_lo > new_hi) throw PreconditionError("shift_environment: shifted range is empty");
    std::vector<double> v;
    v.reserve(static_cast<std::size_t>(new_hi - new_lo + 1));
    for (std::int64_t x = new_lo; x <= new_hi; ++x) v.push_back(env[x + k]);
    return EnvironmentWindow(std::move(v), new_lo, env.seed(), env.model(), env.offset() + k);
}

double free_critical_beta(const ModelParams& params) {
    if (params.maximal_drift()) return params.kappa();
    const double h = params.h();
    // 1 - sqrt(1 - h^2) written as h^2 / (1 + sqrt(1 - h^2)) to avoid cancellation.
    return params.kappa() * h * h / (1.0 + std::sqrt(1.0 - h * h));
}

CriticalTilt beta_cr(const ModelParams& params, const PotentialModel& model) {
    const double free = free_critical_beta(params);
    if (model.is_iid() || params.maximal_drift()) return {free, free, free, true};
    // A potential <= 0 can only lower the hitting functional, so the potential-free
    // value is a lower bound; kappa is the general upper bound.
    return {free, free, params.kappa(), false};
}

}  // namespace pam
