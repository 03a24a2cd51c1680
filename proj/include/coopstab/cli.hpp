#pragma once

// Batch experiment front end: JSON configs in, JSON/CSV results out. Results
// are files; stdout carries a short human summary. Exit codes: 0 success,
// 2 validation error, 3 numerical failure with partial outputs flagged.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "coopstab/measure.hpp"
#include "coopstab/types.hpp"

namespace coopstab {

struct CliOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> threads;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// Loads the config, validates it against the subcommand's schema, runs the
/// experiment and writes outputs under the output directory.
int run_cli(const std::string& subcommand, const std::string& config_path,
            const CliOverrides& overrides = {});

struct Table1Row {
    double m = 1.0;
    std::vector<double> alphas;
    double phi = 0.0;
    SupportPrediction predicted;
    std::vector<Vec> stable_set;
    bool agreement = false;
    bool marginal = false;  // no Monte-Carlo claim on classification boundaries
    double stable_mass = 0.0;
    double unstable_mass = 0.0;
};

struct Table1Options {
    std::vector<double> eps_list = {0.3, 0.2, 0.1, 0.05};
    double sigma_c = 0.25;  // constant per-coordinate noise variance
    double step = 1e-3;
    double t_scale = 0.5;
    double t_min = 50.0;
    double t_cap = 2000.0;
    double ball_radius = 0.2;
    int threads = 1;
    /// The four (m, alphas) regimes; the defaults cover both columns of the
    /// classification for each exponent.
    std::vector<std::pair<double, std::vector<double>>> regimes = {
        {1.0, {1.2, 1.0}}, {1.0, {0.5, 1.0}}, {2.0, {0.6, 1.0}}, {2.0, {0.4, 1.0}}};
};

struct Table1Report {
    std::vector<Table1Row> rows;
    bool all_agree = false;
};

/// Runs the four classification regimes end to end: spectra, concentration
/// sweep and the predicted-support comparison. Writes table1.json plus
/// per-regime sweep files under out_dir.
Table1Report reproduce_table1(const std::string& out_dir, std::uint64_t seed,
                              const Table1Options& opts = {});

/// Serialization helpers shared with the tests.
nlohmann::ordered_json vec_to_json(const Vec& v);
Vec vec_from_json(const nlohmann::json& j, int expected_dim = -1);

}  // namespace coopstab
