#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pam/annealed.hpp"
#include "pam/config.hpp"
#include "pam/errors.hpp"
#include "pam/quenched.hpp"
#include "pam/report.hpp"
#include "pam/simulate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pam;

namespace {

enum class Format { Csv, Json, Both };

/// Collects the files of one run; every write goes through here so the manifest is complete.
class Output {
public:
    Output(fs::path dir, Format format, Provenance provenance)
        : dir_(std::move(dir)), format_(format), provenance_(std::move(provenance)) {}

    bool csv() const { return format_ != Format::Json; }
    bool json_records() const { return format_ != Format::Csv; }

    void table(const std::string& name, const std::string& contents) {
        if (!csv()) return;
        write_text_file(dir_ / name, contents);
        files_.push_back(name);
    }

    void record(const std::string& name, const json& j) {
        if (!json_records()) return;
        write_json_record(dir_ / name, j, provenance_);
        files_.push_back(name);
    }

    void raw(const std::string& name, const std::string& contents) {
        write_text_file(dir_ / name, contents);
        files_.push_back(name);
    }

    void finish(const json& config, const json& summary) {
        if (!config.is_null()) raw("config.json", config.dump(2) + "\n");
        json m = {{"files", files_}, {"summary", summary}};
        write_json_record(dir_ / "manifest.json", m, provenance_);
    }

private:
    fs::path dir_;
    Format format_;
    Provenance provenance_;
    std::vector<std::string> files_;
};

std::string num(double x) { return format_number(x); }

template <class F>
std::string csv_text(F&& writer) {
    std::ostringstream os;
    writer(os);
    return os.str();
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = n == 1 ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

bool is_integer(double p) { return p >= 1.0 && std::floor(p) == p; }

QuenchedOptions quenched_options(const RunConfig& c) {
    QuenchedOptions o;
    o.n_sites = c.quenched.n_sites;
    o.seed = c.seed;
    o.tol = c.quenched.tol;
    o.threads = c.threads;
    return o;
}

AnnealedOptions annealed_options(const RunConfig& c, int depth) {
    AnnealedOptions o;
    o.depth = depth;
    o.transfer.threads = c.threads;
    return o;
}

/// Methods to run: the configured list, or every method applicable to the model.
std::vector<std::string> annealed_methods(const RunConfig& c, const PotentialModel& m) {
    if (!c.annealed.methods.empty()) return c.annealed.methods;
    std::vector<std::string> out;
    if (!m.is_iid()) return out;
    if (c.h == 1.0) out.push_back("closed_form_h1");
    out.push_back("tilted_product");
    if (m.has_finite_support()) out.push_back("transfer_matrix");
    if (c.h == 1.0) out.push_back("maxdrift");
    return out;
}

LyapunovResult run_annealed(const RunConfig& c, const std::shared_ptr<const PotentialModel>& model,
                            const std::string& method, double p, int depth) {
    if (method == "maxdrift") {
        const PotentialModel eta = normalize(*model);
        LyapunovResult r = lambda_annealed_maxdrift(c.params(), eta, p);
        return r;
    }
    AnnealedOptions o = annealed_options(c, depth);
    o.method = parse_annealed_method(method);
    return lambda_annealed(model, c.params(), p, o);
}

json cmd_quenched(const RunConfig& c, Output& out) {
    const auto model = c.model();
    const auto params = c.params();
    const QuenchedOptions qo = quenched_options(c);
    const auto eta = std::make_shared<const PotentialModel>(normalize(*model));

    const LyapunovResult lambda0 = lambda_quenched(model, params, qo);
    const PhaseReport phase = optimal_speed(model, params, lambda0, qo);

    std::vector<double> betas = c.quenched.beta_grid;
    if (betas.empty()) {
        const double bmax = quenched_beta_max(params, *eta);
        for (std::size_t i = 0; i < c.quenched.curve_points; ++i)
            betas.push_back(bmax * static_cast<double>(i) / static_cast<double>(c.quenched.curve_points));
    }
    const auto curve = L_curve(eta, params, betas, qo);
    out.table("L_curve.csv", csv_text([&](std::ostream& os) { write_L_curve_csv(os, curve); }));

    const auto legendre = legendre_lambda_star(model, params, c.quenched.alpha_grid, qo);
    std::string ls = "alpha,lambda_star,beta_star,at_edge\n";
    for (const auto& p : legendre) ls += num(p.alpha) + "," + num(p.value) + "," + num(p.beta_star) + "," + (p.at_edge ? "1" : "0") + "\n";
    out.table("lambda_star.csv", ls);

    json j = {{"lambda0", to_json(lambda0)}, {"phase", to_json(phase)}};
    if (c.quenched.variational) {
        const auto v = lambda_quenched_variational(model, params, c.quenched.alpha_max, c.quenched.n_alpha,
                                                   c.quenched.n_beta, qo);
        j["variational"] = {{"value", v.value},
                            {"coarse_value", v.coarse_value},
                            {"alpha_at", v.alpha_at},
                            {"refinement_gap", v.refinement_gap},
                            {"grid_too_coarse", v.grid_too_coarse}};
    }
    json rows = json::array();
    for (const auto& p : legendre)
        rows.push_back({{"alpha", p.alpha}, {"value", std::isfinite(p.value) ? json(p.value) : json("inf")},
                        {"beta_star", p.beta_star}, {"at_edge", p.at_edge}});
    j["lambda_star"] = rows;
    out.record("quenched.json", j);
    return {{"lambda0", lambda0.value}, {"phase", to_string(phase.phase)}};
}

json cmd_annealed(const RunConfig& c, Output& out) {
    const auto model = c.model();
    const auto params = c.params();
    const auto methods = annealed_methods(c, *model);
    const bool explicit_methods = !c.annealed.methods.empty();
    const QuenchedOptions qo = quenched_options(c);

    std::string table = "p,method,lambda,bracket_lo,bracket_hi,bound_direction,depth,conjectured\n";
    json results = json::array();
    json skipped = json::array();
    for (double p : c.annealed.p) {
        for (const auto& m : methods) {
            if (m == "maxdrift" && !is_integer(p) && !explicit_methods) continue;
            try {
                const LyapunovResult r = run_annealed(c, model, m, p, c.annealed.depth);
                table += num(p) + "," + m + "," + num(r.value) + "," + num(r.bracket[0]) + "," + num(r.bracket[1]) +
                         "," + r.bound_direction + "," + (r.depth ? std::to_string(*r.depth) : "") + "," +
                         (r.conjectured ? "1" : "0") + "\n";
                json rj = to_json(r);
                rj["requested_method"] = m;
                results.push_back(rj);
            } catch (const PreconditionError& e) {
                if (explicit_methods) throw;
                skipped.push_back({{"p", p}, {"method", m}, {"reason", e.what()}});
            }
        }
    }
    out.table("lambda_p.csv", table);

    json j = {{"lambda_p", results}, {"skipped", skipped}};
    json summary = {{"results", results.size()}};
    if (model->is_iid()) {
        const AnnealedOptions ao = annealed_options(c, c.annealed.depth);
        const auto scan = intermittency_scan(model, params, c.annealed.p_grid, ao, qo);
        std::string it = "p,lambda_p,lambda0\n";
        for (const auto& r : scan.rows) it += num(r.p) + "," + num(r.lambda) + "," + num(scan.lambda0) + "\n";
        out.table("intermittency.csv", it);
        j["intermittency"] = to_json(scan);

        const auto cont = continuity_at_zero(model, params, c.annealed.continuity_ladder, ao, qo);
        std::string ct = "p,lambda_p,gap\n";
        for (const auto& r : cont.rows) ct += num(r.p) + "," + num(r.lambda) + "," + num(r.gap) + "\n";
        out.table("continuity.csv", ct);
        j["continuity"] = to_json(cont);

        const auto eta = normalize(*model);
        const double bmax = beta_cr(params, eta).value;
        std::vector<double> betas;
        for (std::size_t i = 0; i < c.annealed.curve_points; ++i)
            betas.push_back(bmax * static_cast<double>(i) / static_cast<double>(c.annealed.curve_points));
        std::vector<AnnealedCurveRow> rows;
        for (double p : c.annealed.p) {
            const auto r = annealed_curve(model, params, p, betas, ao);
            rows.insert(rows.end(), r.begin(), r.end());
        }
        out.table("lp_sup_curve.csv", csv_text([&](std::ostream& os) { write_annealed_curve_csv(os, rows); }));
        summary["intermittent_from"] = scan.intermittent_from ? json(*scan.intermittent_from) : json(nullptr);
    }
    out.record("annealed.json", j);
    return summary;
}

json cmd_simulate(const RunConfig& c, Output& out) {
    const auto model = c.model();
    const auto params = c.params();
    const auto& s = c.simulate;
    // Simulation runs on a potential <= 0; a positive constant is removed and added back to rates.
    const auto sim = model->ess_sup() > 0.0 ? std::make_shared<const PotentialModel>(normalize(*model)) : model;
    const double shift = model->ess_sup() > 0.0 ? sim->shift() - model->shift() : 0.0;

    const double t_env = std::max({s.t_max, s.mc_t, s.gibbs_t, s.branching_t, s.reversal_t});
    std::int64_t window = required_window(params, t_env);
    if (s.ldp_n > 0) window = std::max<std::int64_t>(window, static_cast<std::int64_t>(s.ldp_n) + 50);
    const EnvironmentWindow env = sample_environment(sim, c.seed, -2 * window, 2 * window);

    json j = {{"shift", shift}};
    json summary;

    const auto t_grid = linspace(0.0, s.t_max, s.n_times);
    SolveOptions solve;
    solve.store_fields = false;
    solve.center_only = true;
    const SolutionField field = solve_pde(env, params, t_grid, solve);
    out.table("slope.csv", csv_text([&](std::ostream& os) { write_slope_csv(os, field); }));
    std::vector<double> logs;
    for (double u : field.center) logs.push_back(std::log(u));
    try {
        SlopeEstimate slope = fit_slope(t_grid, logs);
        slope.slope += shift;
        j["quenched_slope"] = to_json(slope);
        summary["quenched_slope"] = slope.slope;
    } catch (const NonStationarySlope& e) {
        j["quenched_slope"] = {{"error", e.what()}};
    }
    if (s.slope_envs > 1) {
        SlopeEnsemble e = quenched_slope_ensemble(sim, params, t_grid, s.slope_envs, c.seed, c.threads);
        e.mean += shift;
        for (auto& v : e.slopes) v += shift;
        j["quenched_slope_ensemble"] = to_json(e);
        summary["quenched_slope_ensemble"] = e.mean;
    }

    const McEstimate mc = feynman_kac_mc(env, params, s.mc_t, s.n_paths, c.seed, c.threads);
    const double pde_mc = solve_pde(env, params, {s.mc_t}, solve).center.back();
    j["feynman_kac"] = {{"mc", to_json(mc)}, {"pde", pde_mc}, {"z", mc.stderr_ > 0 ? (mc.mean - pde_mc) / mc.stderr_ : 0.0}};

    const EndpointField ep = endpoint_field(env, params, {s.gibbs_t});
    out.table("endpoint.csv", csv_text([&](std::ostream& os) { write_endpoint_csv(os, ep); }));
    GibbsOptions go;
    go.n_bins = s.gibbs_bins;
    const GibbsSpeed g = gibbs_speed(env, params, s.gibbs_t, go);
    std::string gt = "alpha_lo,alpha_hi,mass\n";
    for (std::size_t i = 0; i < g.bin_mass.size(); ++i)
        gt += num(g.bin_edges[i]) + "," + num(g.bin_edges[i + 1]) + "," + num(g.bin_mass[i]) + "\n";
    out.table("gibbs.csv", gt);
    j["gibbs"] = to_json(g);
    summary["gibbs_mean_speed"] = g.mean_speed;

    if (sim->is_iid()) {
        const auto times = linspace(0.0, s.annealed_t_max, s.annealed_times);
        const auto moments = annealed_moments(sim, params, s.p, times, s.n_env, c.seed, c.threads);
        out.table("annealed_moments.csv", csv_text([&](std::ostream& os) { write_annealed_moments_csv(os, moments); }));
        json am = json::array();
        for (const auto& m : moments) {
            json row = {{"p", m.p}, {"fit_points", m.fit_points}, {"heavy_tail", m.heavy_tail}};
            if (m.slope) {
                SlopeEstimate sl = *m.slope;
                sl.slope += shift;
                row["slope"] = to_json(sl);
            }
            am.push_back(row);
        }
        j["annealed_moments"] = am;
    }

    if (c.h < 1.0) {
        const TimeReversal tr = time_reversal_check(env, params, s.reversal_n, s.reversal_t);
        j["time_reversal"] = {{"n", s.reversal_n}, {"t", s.reversal_t}, {"lhs", tr.lhs}, {"rhs", tr.rhs},
                              {"abs_diff", std::abs(tr.lhs - tr.rhs)}};
    }

    const auto br_env = sample_environment(sim, c.seed, -required_window(params, s.branching_t),
                                           required_window(params, s.branching_t));
    const BranchingReport br = branching_expectation_check(br_env, params, s.branching_t, s.branching_runs, c.seed, c.threads);
    j["branching"] = {{"count", to_json(br.count)}, {"pde", br.pde}, {"agrees", br.agrees}};

    if (s.ldp_n > 0) {
        if (shift != 0.0) throw ConfigError("simulate.ldp_n requires a potential with ess sup <= 0");
        double theta = 0.0;
        std::optional<double> target;
        const auto ls = legendre_lambda_star(sim, params, {s.ldp_a, s.ldp_a + s.ldp_width}, quenched_options(c));
        if (s.ldp_tilt && c.h == 1.0) theta = ls.front().beta_star;
        const PassageEstimate pe = passage_probability(env, params, s.ldp_n, s.ldp_a, s.ldp_a + s.ldp_width,
                                                       s.ldp_samples, c.seed, theta, c.threads);
        j["passage"] = {{"n", pe.n}, {"a", pe.a}, {"b", pe.b}, {"theta", pe.theta}, {"probability", pe.probability},
                        {"stderr", pe.stderr_}, {"rate", pe.rate}, {"n_samples", pe.n_samples},
                        {"lambda_star_at_a", ls.front().value}, {"lambda_star_at_b", ls.back().value}};
    }
    out.record("simulate.json", j);
    return summary;
}

json cmd_sweep(const RunConfig& c, Output& out) {
    const auto model = c.model();
    const QuenchedOptions qo = quenched_options(c);
    const auto& w = c.sweep;

    // lambda_0 over kappa with midpoint convexity on consecutive triples.
    std::vector<double> l0;
    for (double k : w.kappa) l0.push_back(lambda_quenched(model, {k, c.h}, qo).value);
    std::string kt = "kappa,lambda0,nonincreasing,midpoint_convex\n";
    bool k_mono = true, k_convex = true;
    for (std::size_t i = 0; i < l0.size(); ++i) {
        const bool mono = i == 0 || l0[i] <= l0[i - 1] + 1e-9;
        bool convex = true;
        if (i > 0 && i + 1 < l0.size()) {
            const double k0 = w.kappa[i - 1], k1 = w.kappa[i], k2 = w.kappa[i + 1];
            const double chord = l0[i - 1] + (l0[i + 1] - l0[i - 1]) * (k1 - k0) / (k2 - k0);
            convex = l0[i] <= chord + 1e-9;
        }
        k_mono = k_mono && mono;
        k_convex = k_convex && convex;
        kt += num(w.kappa[i]) + "," + num(l0[i]) + "," + (mono ? "1" : "0") + "," + (convex ? "1" : "0") + "\n";
    }
    out.table("sweep_kappa.csv", kt);
    json j = {{"kappa", {{"values", w.kappa}, {"lambda0", l0}, {"nonincreasing", k_mono}, {"midpoint_convex", k_convex}}}};

    if (model->is_iid()) {
        std::string pt = "kappa,p,lambda_p,p_lambda_p,lambda0,beta_cr\n";
        json pj = json::array();
        for (std::size_t ki = 0; ki < w.kappa.size(); ++ki) {
            const ModelParams params{w.kappa[ki], c.h};
            const auto scan = intermittency_scan(model, params, w.p, annealed_options(c, w.depth), qo);
            const double bcr = beta_cr(params, normalize(*model)).value;
            for (const auto& r : scan.rows)
                pt += num(params.kappa()) + "," + num(r.p) + "," + num(r.lambda) + "," + num(r.p * r.lambda) + "," +
                      num(scan.lambda0) + "," + num(bcr) + "\n";
            auto sj = to_json(scan);
            sj["kappa"] = params.kappa();
            pj.push_back(sj);
        }
        out.table("sweep_p.csv", pt);
        j["p"] = pj;
    }

    // Transfer roots approaching the maximal-drift closed form.
    if (model->is_iid() && model->has_finite_support()) {
        std::string ht = "h,p,depth,lambda_transfer,lambda_closed_form_h1,abs_diff\n";
        json hj = json::array();
        for (double p : w.p) {
            const ModelParams top{c.kappa, 1.0};
            AnnealedOptions closed = annealed_options(c, w.depth);
            closed.method = AnnealedMethod::ClosedFormH1;
            const double ref = lambda_annealed(model, top, p, closed).value;
            for (double h : w.h_ladder) {
                AnnealedOptions tr = annealed_options(c, w.depth);
                tr.method = AnnealedMethod::Transfer;
                const double v = lambda_annealed(model, {c.kappa, h}, p, tr).value;
                ht += num(h) + "," + num(p) + "," + std::to_string(w.depth) + "," + num(v) + "," + num(ref) + "," +
                      num(std::abs(v - ref)) + "\n";
                hj.push_back({{"h", h}, {"p", p}, {"transfer", v}, {"closed_form_h1", ref}});
            }
        }
        out.table("sweep_h.csv", ht);
        j["h_ladder"] = hj;
    }
    out.record("sweep.json", j);
    return {{"kappa_nonincreasing", k_mono}, {"kappa_midpoint_convex", k_convex}};
}

json cmd_report(const std::vector<std::string>& inputs, const std::string& title, Output& out) {
    json plots = json::array();
    for (const auto& in : inputs) {
        const CsvTable t = read_csv(in);
        const std::string x = t.columns.empty() ? "" : t.columns.front();
        const std::string stem = fs::path(in).stem().string();
        const Plot p = plot_from_table(t, x, {}, title.empty() ? stem : title + ": " + stem);
        out.raw(stem + ".svg", render_svg(p));
        plots.push_back({{"input", in}, {"svg", stem + ".svg"}, {"series", p.series.size()}, {"rows", t.rows.size()}});
    }
    return {{"plots", plots}};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Parabolic Anderson model with drift: Lyapunov exponents, simulation and reports"};
    app.require_subcommand(1);
    std::string config_path, out_dir = ".", format = "both";
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::vector<std::string> report_inputs;

    auto common = [&](CLI::App* sub, bool needs_config) {
        auto* opt = sub->add_option("--config", config_path, "JSON run configuration");
        if (needs_config) opt->required();
        sub->add_option("--out", out_dir, "output directory")->capture_default_str();
        sub->add_option("--seed", seed, "override the configured seed");
        sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--format", format, "csv, json or both")
            ->check(CLI::IsMember({"csv", "json", "both"}))
            ->capture_default_str();
    };
    auto* q = app.add_subcommand("quenched", "quenched exponent, phase report and L curve");
    auto* a = app.add_subcommand("annealed", "annealed exponents, intermittency and continuity");
    auto* s = app.add_subcommand("simulate", "PDE and Monte Carlo cross-checks");
    auto* w = app.add_subcommand("sweep", "grids over kappa, p and h");
    auto* r = app.add_subcommand("report", "SVG plots from CSV tables");
    for (auto* sub : {q, a, s, w}) common(sub, true);
    common(r, false);
    r->add_option("inputs", report_inputs, "CSV tables to plot");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        const std::string command = app.get_subcommands().front()->get_name();
        RunConfig cfg;
        json raw;
        if (!config_path.empty()) {
            json j;
            {
                std::ifstream in(config_path);
                if (!in) throw IoError("cannot read config file " + config_path);
                try {
                    j = json::parse(in);
                } catch (const json::parse_error& e) {
                    throw ConfigError("config file " + config_path + " is not valid JSON: " + e.what());
                }
            }
            if (seed && j.is_object()) j["seed"] = *seed;
            if (threads && j.is_object()) j["threads"] = *threads;
            if (command == "report" && j.is_object() && !j.contains("kappa")) {
                // A report-only config needs no model.
                json model = {{"kappa", 1.0}, {"h", 1.0}, {"potential", {{"variant", "degenerate"}, {"c", 0.0}}}};
                model.update(j);
                cfg = parse_config(model);
            } else {
                cfg = parse_config(j);
            }
            raw = j;
        }
        const Format fmt = format == "csv" ? Format::Csv : format == "json" ? Format::Json : Format::Both;
        Output out(out_dir, fmt, make_provenance(command, raw, seed.value_or(cfg.seed)));

        json summary;
        if (command == "quenched") summary = cmd_quenched(cfg, out);
        else if (command == "annealed") summary = cmd_annealed(cfg, out);
        else if (command == "simulate") summary = cmd_simulate(cfg, out);
        else if (command == "sweep") summary = cmd_sweep(cfg, out);
        else {
            std::vector<std::string> inputs = report_inputs;
            inputs.insert(inputs.end(), cfg.report.inputs.begin(), cfg.report.inputs.end());
            if (inputs.empty()) throw ConfigError("report: no input tables given");
            summary = cmd_report(inputs, cfg.report.title, out);
        }
        out.finish(raw, summary);
        std::cout << summary.dump() << "\n";
        return 0;
    } catch (const std::exception& e) {
        const int code = exit_code(e);
        const char* kind = code == 1 ? "input error" : code == 3 ? "i/o error" : "numerical failure";
        std::cerr << kind << ": " << e.what() << "\n";
        return code;
    }
}
