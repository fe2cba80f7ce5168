#include "pam/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "pam/errors.hpp"

namespace pam {

namespace {

using nlohmann::json;

// Typed access to one JSON object with unknown-key detection. Every problem is
// appended to the shared error list instead of thrown.
class Reader {
public:
    Reader(const json& j, std::string path, std::vector<std::string>& errors, std::set<std::string> allowed)
        : j_(j), path_(std::move(path)), errors_(errors) {
        if (!j_.is_object()) {
            fail("", "must be an object");
            ok_ = false;
            return;
        }
        for (const auto& [key, _] : j_.items())
            if (!allowed.count(key)) errors_.push_back("unknown key '" + where(key) + "'");
    }

    bool ok() const { return ok_; }
    bool has(const std::string& key) const { return ok_ && j_.contains(key); }
    const json& at(const std::string& key) const { return j_.at(key); }

    void real(const std::string& key, double& out, bool (*valid)(double) = nullptr, const char* rule = "") {
        if (!has(key)) return;
        const auto& v = j_.at(key);
        if (!v.is_number()) return fail(key, "must be a number");
        const double x = v.get<double>();
        if (valid && !valid(x)) return fail(key, rule);
        out = x;
    }

    template <class Int>
    void integer(const std::string& key, Int& out, long long min_value) {
        if (!has(key)) return;
        const auto& v = j_.at(key);
        if (!v.is_number_integer()) return fail(key, "must be an integer");
        const long long x = v.get<long long>();
        if (x < min_value) return fail(key, "must be >= " + std::to_string(min_value));
        out = static_cast<Int>(x);
    }

    void seed(const std::string& key, std::uint64_t& out) {
        if (!has(key)) return;
        const auto& v = j_.at(key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
            return fail(key, "must be a nonnegative integer");
        out = v.get<std::uint64_t>();
    }

    void boolean(const std::string& key, bool& out) {
        if (!has(key)) return;
        const auto& v = j_.at(key);
        if (!v.is_boolean()) return fail(key, "must be true or false");
        out = v.get<bool>();
    }

    void text(const std::string& key, std::string& out) {
        if (!has(key)) return;
        const auto& v = j_.at(key);
        if (!v.is_string()) return fail(key, "must be a string");
        out = v.get<std::string>();
    }

    void reals(const std::string& key, std::vector<double>& out, bool (*valid)(double) = nullptr,
               const char* rule = "") {
        if (!has(key)) return;
        const auto& v = j_.at(key);
        if (!v.is_array()) return fail(key, "must be an array of numbers");
        std::vector<double> r;
        for (const auto& e : v) {
            if (!e.is_number()) return fail(key, "must be an array of numbers");
            r.push_back(e.get<double>());
            if (valid && !valid(r.back())) return fail(key, std::string("entries ") + rule);
        }
        out = std::move(r);
    }

    void texts(const std::string& key, std::vector<std::string>& out) {
        if (!has(key)) return;
        const auto& v = j_.at(key);
        if (!v.is_array()) return fail(key, "must be an array of strings");
        std::vector<std::string> r;
        for (const auto& e : v) {
            if (!e.is_string()) return fail(key, "must be an array of strings");
            r.push_back(e.get<std::string>());
        }
        out = std::move(r);
    }

    std::optional<Reader> section(const std::string& key, std::set<std::string> allowed) {
        if (!has(key)) return std::nullopt;
        return Reader(j_.at(key), where(key), errors_, std::move(allowed));
    }

    void fail(const std::string& key, const std::string& what) {
        errors_.push_back("'" + (key.empty() ? path_ : where(key)) + "' " + what);
    }

private:
    std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const json& j_;
    std::string path_;
    std::vector<std::string>& errors_;
    bool ok_ = true;
};

bool positive(double x) { return x > 0.0; }
bool nonnegative(double x) { return x >= 0.0; }
bool finite(double x) { return std::isfinite(x); }
bool unit_drift(double x) { return x > 0.0 && x <= 1.0; }

}  // namespace

std::optional<PotentialModel> parse_potential(const json& j, std::vector<std::string>& errors) {
    const std::size_t before = errors.size();
    Reader r(j, "potential", errors, {"variant", "atoms", "weights", "a", "q", "b", "c", "states", "transition"});
    if (!r.ok()) return std::nullopt;
    std::string variant;
    r.text("variant", variant);
    if (!r.has("variant")) {
        r.fail("variant", "is required");
        return std::nullopt;
    }
    auto require = [&](const std::set<std::string>& keys) {
        for (const auto& k : {"atoms", "weights", "a", "q", "b", "c", "states", "transition"})
            if (r.has(k) && !keys.count(k)) r.fail(k, "does not apply to variant '" + variant + "'");
        for (const auto& k : keys)
            if (!r.has(k)) r.fail(k, "is required for variant '" + variant + "'");
    };
    std::optional<PotentialLaw> law;
    if (variant == "degenerate") {
        require({"c"});
        double c = 0.0;
        r.real("c", c, finite, "must be finite");
        law = potential::Degenerate{c};
    } else if (variant == "two_point") {
        require({"a", "q"});
        double a = 1.0, q = 0.5;
        r.real("a", a, positive, "must be > 0");
        r.real("q", q, [](double x) { return x > 0.0 && x < 1.0; }, "must lie in (0, 1)");
        law = potential::TwoPoint{a, q};
    } else if (variant == "finite_support") {
        require({"atoms", "weights"});
        std::vector<double> atoms, weights;
        r.reals("atoms", atoms, finite, "must be finite");
        r.reals("weights", weights, nonnegative, "must be >= 0");
        law = potential::FiniteSupport{atoms, weights};
    } else if (variant == "uniform") {
        require({"b"});
        double b = -1.0;
        r.real("b", b, [](double x) { return x < 0.0; }, "must be < 0");
        law = potential::UniformInterval{b};
    } else if (variant == "markov") {
        require({"states", "transition"});
        std::vector<double> states;
        r.reals("states", states, finite, "must be finite");
        std::vector<std::vector<double>> transition;
        if (r.has("transition")) {
            const auto& t = r.at("transition");
            bool good = t.is_array();
            if (good)
                for (const auto& row : t) {
                    if (!row.is_array()) {
                        good = false;
                        break;
                    }
                    std::vector<double> rv;
                    for (const auto& e : row) {
                        if (!e.is_number()) good = false;
                        else rv.push_back(e.get<double>());
                    }
                    transition.push_back(std::move(rv));
                }
            if (!good) r.fail("transition", "must be an array of numeric rows");
        }
        law = potential::MarkovChain{states, transition};
    } else if (r.has("variant")) {
        r.fail("variant", "must be one of degenerate, two_point, finite_support, uniform, markov");
    }
    if (errors.size() != before || !law) return std::nullopt;
    try {
        return PotentialModel(*law);
    } catch (const std::exception& e) {
        errors.push_back(std::string("potential: ") + e.what());
        return std::nullopt;
    }
}

std::shared_ptr<const PotentialModel> RunConfig::model() const {
    std::vector<std::string> errors;
    auto m = parse_potential(potential, errors);
    if (!m) throw ConfigError(errors.empty() ? "invalid potential" : errors.front());
    return std::make_shared<PotentialModel>(std::move(*m));
}

RunConfig parse_config(const json& j) {
    std::vector<std::string> errors;
    RunConfig c;
    Reader r(j, "", errors, {"kappa", "h", "potential", "seed", "threads", "quenched", "annealed", "simulate", "sweep",
                             "report"});
    if (r.ok()) {
        if (!r.has("kappa")) r.fail("kappa", "is required");
        if (!r.has("h")) r.fail("h", "is required");
        if (!r.has("potential")) r.fail("potential", "is required");
        r.real("kappa", c.kappa, positive, "must be > 0");
        r.real("h", c.h, unit_drift, "must lie in (0, 1]");
        r.seed("seed", c.seed);
        r.integer("threads", c.threads, 1);
        if (r.has("potential")) {
            c.potential = r.at("potential");
            parse_potential(c.potential, errors);
        }
        if (auto q = r.section("quenched", {"n_sites", "tol", "curve_points", "beta_grid", "alpha_grid", "variational",
                                            "alpha_max", "n_alpha", "n_beta"})) {
            auto& o = c.quenched;
            q->integer("n_sites", o.n_sites, 100);
            q->real("tol", o.tol, positive, "must be > 0");
            q->integer("curve_points", o.curve_points, 2);
            q->reals("beta_grid", o.beta_grid, finite, "must be finite");
            q->reals("alpha_grid", o.alpha_grid, finite, "must be finite");
            q->boolean("variational", o.variational);
            q->real("alpha_max", o.alpha_max, positive, "must be > 0");
            q->integer("n_alpha", o.n_alpha, 2);
            q->integer("n_beta", o.n_beta, 2);
        }
        if (auto a = r.section("annealed", {"p", "methods", "depth", "p_grid", "continuity_ladder", "curve_points"})) {
            auto& o = c.annealed;
            a->reals("p", o.p, positive, "must be > 0");
            a->texts("methods", o.methods);
            for (const auto& m : o.methods)
                if (m != "closed_form_h1" && m != "tilted_product" && m != "transfer_matrix" && m != "maxdrift")
                    a->fail("methods", "entry '" + m +
                                           "' must be one of closed_form_h1, tilted_product, transfer_matrix, maxdrift");
            a->integer("depth", o.depth, 1);
            if (o.depth > 12) a->fail("depth", "must be <= 12");
            a->reals("p_grid", o.p_grid, positive, "must be > 0");
            a->reals("continuity_ladder", o.continuity_ladder, positive, "must be > 0");
            a->integer("curve_points", o.curve_points, 2);
        }
        if (auto s = r.section("simulate", {"t_max", "n_times", "slope_envs", "mc_t", "n_paths", "annealed_t_max",
                                            "annealed_times", "n_env", "p", "gibbs_t", "gibbs_bins", "reversal_n",
                                            "reversal_t", "branching_t", "branching_runs", "ldp_n", "ldp_a",
                                            "ldp_width", "ldp_samples", "ldp_tilt"})) {
            auto& o = c.simulate;
            s->real("t_max", o.t_max, positive, "must be > 0");
            s->integer("n_times", o.n_times, 6);
            s->integer("slope_envs", o.slope_envs, 1);
            s->real("mc_t", o.mc_t, positive, "must be > 0");
            s->integer("n_paths", o.n_paths, 2);
            s->real("annealed_t_max", o.annealed_t_max, positive, "must be > 0");
            s->integer("annealed_times", o.annealed_times, 6);
            s->integer("n_env", o.n_env, 2);
            s->reals("p", o.p, positive, "must be > 0");
            s->real("gibbs_t", o.gibbs_t, positive, "must be > 0");
            s->integer("gibbs_bins", o.gibbs_bins, 1);
            s->integer("reversal_n", o.reversal_n, 0);
            s->real("reversal_t", o.reversal_t, positive, "must be > 0");
            s->real("branching_t", o.branching_t, positive, "must be > 0");
            s->integer("branching_runs", o.branching_runs, 2);
            s->integer("ldp_n", o.ldp_n, 0);
            s->real("ldp_a", o.ldp_a, nonnegative, "must be >= 0");
            s->real("ldp_width", o.ldp_width, positive, "must be > 0");
            s->integer("ldp_samples", o.ldp_samples, 2);
            s->boolean("ldp_tilt", o.ldp_tilt);
        }
        if (auto w = r.section("sweep", {"kappa", "p", "h_ladder", "depth"})) {
            auto& o = c.sweep;
            w->reals("kappa", o.kappa, positive, "must be > 0");
            w->reals("p", o.p, positive, "must be > 0");
            w->reals("h_ladder", o.h_ladder, unit_drift, "must lie in (0, 1]");
            w->integer("depth", o.depth, 1);
        }
        if (auto p = r.section("report", {"inputs", "title"})) {
            p->texts("inputs", c.report.inputs);
            p->text("title", c.report.title);
        }
    }
    if (!errors.empty()) {
        std::ostringstream os;
        os << errors.size() << " configuration error" << (errors.size() > 1 ? "s" : "") << ":";
        for (const auto& e : errors) os << "\n  - " << e;
        throw ConfigError(os.str());
    }
    c.raw = j;
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace pam
