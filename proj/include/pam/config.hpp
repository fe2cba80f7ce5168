#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pam/core_model.hpp"

namespace pam {

struct QuenchedConfig {
    std::size_t n_sites = 100'000;
    double tol = 1e-10;
    std::size_t curve_points = 40;       ///< L(beta) grid on [0, beta_max) when beta_grid is empty
    std::vector<double> beta_grid;
    std::vector<double> alpha_grid{0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0};
    bool variational = true;
    double alpha_max = 2.0;
    std::size_t n_alpha = 50;
    std::size_t n_beta = 50;
};

struct AnnealedConfig {
    std::vector<double> p{1.0, 2.0};
    std::vector<std::string> methods;  ///< empty: every method applicable to the model
    int depth = 4;
    std::vector<double> p_grid{0.5, 1.0, 2.0, 3.0};
    std::vector<double> continuity_ladder{1.0, 0.5, 0.2, 0.1, 0.05};
    std::size_t curve_points = 30;
};

struct SimulateConfig {
    double t_max = 100.0;           ///< quenched slope horizon
    std::size_t n_times = 41;
    std::size_t slope_envs = 1;     ///< more than one averages the slope over environments
    double mc_t = 5.0;
    std::size_t n_paths = 10'000;
    double annealed_t_max = 30.0;
    std::size_t annealed_times = 16;
    std::size_t n_env = 1000;
    std::vector<double> p{1.0, 2.0};
    double gibbs_t = 100.0;
    std::size_t gibbs_bins = 40;
    std::int64_t reversal_n = 3;
    double reversal_t = 10.0;
    double branching_t = 5.0;
    std::size_t branching_runs = 1000;
    std::size_t ldp_n = 0;          ///< 0 skips the passage estimate
    double ldp_a = 1.5;
    double ldp_width = 0.1;
    std::size_t ldp_samples = 100'000;
    bool ldp_tilt = true;
};

struct SweepConfig {
    std::vector<double> kappa{0.5, 1.0, 2.0, 4.0};
    std::vector<double> p{0.5, 1.0, 2.0, 3.0};
    std::vector<double> h_ladder{0.9, 0.95, 0.99};
    int depth = 4;
};

struct ReportConfig {
    std::vector<std::string> inputs;
    std::string title;
};

/// Parsed and validated run configuration. `raw` is the canonical JSON the run was
/// built from, used for hashing and replay.
struct RunConfig {
    double kappa = 1.0;
    double h = 1.0;
    nlohmann::json potential;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    QuenchedConfig quenched;
    AnnealedConfig annealed;
    SimulateConfig simulate;
    SweepConfig sweep;
    ReportConfig report;
    nlohmann::json raw;

    ModelParams params() const { return {kappa, h}; }
    std::shared_ptr<const PotentialModel> model() const;
};

/// Builds a PotentialModel from {"variant": ..., ...}; appends problems to `errors`.
std::optional<PotentialModel> parse_potential(const nlohmann::json& j, std::vector<std::string>& errors);

/// Validates the whole document and throws ConfigError listing every violation.
RunConfig parse_config(const nlohmann::json& j);

/// Reads and parses a JSON config file; IoError if unreadable, ConfigError if malformed.
RunConfig load_config(const std::filesystem::path& path);

/// FNV-1a 64-bit hash.
std::uint64_t fnv1a(const std::string& bytes);

}  // namespace pam
