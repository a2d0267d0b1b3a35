#pragma once

// Experiment configuration for the `sdlab` runner. See README.md for the schema.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sdlab/coefficients.hpp"
#include "sdlab/evolution.hpp"

namespace sdlab::cli {

/// Bad config: parse error, unknown key, wrong type or out-of-range value.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A coefficient is either a prototype exponent |x - x0|^K or a two-column CSV.
struct CoefficientSpec {
    std::optional<double> exponent;
    std::filesystem::path csv;
};

struct ExperimentConfig {
    struct Coefficients {
        double x0 = 0.5;
        CoefficientSpec a{0.5, {}};
        CoefficientSpec b{0.5, {}};
        double lambda = 0.0;
        /// lambda = lambda_factor / C*_h on the working mesh; excludes `lambda`.
        std::optional<double> lambda_factor;
    } coefficients;

    struct MeshSection {
        int n_cells = 256;
        /// Defaults to default_grading(K1, K2), or 1 for tabulated data.
        std::optional<double> grading;
        int audit_grid = 512;
    } mesh;

    struct Time {
        double T = 0.5;
        int n_steps = 256;
        TimeScheme scheme = TimeScheme::ImplicitEuler;
    } time;

    struct Carleman {
        double c1 = 1.0;
        double c2_margin = 0.5;
        /// Empty: n_s points on [s0, 8 s0].
        std::vector<double> s_list;
        int n_s = 8;
        std::array<double, 2> omega{0.6, 0.9};
        std::array<double, 2> omega_prime{0.65, 0.85};
    } carleman;

    struct Control {
        std::array<double, 2> omega{0.6, 0.9};
        double epsilon = 1e-8;
        double cg_tol = 1e-10;
        int cg_max = 2000;
        int observability_iters = 200;
        double observability_tol = 1e-6;
    } control;

    struct Data {
        /// "sine" or "random" (smooth random combination of 8 sine modes).
        std::string u0 = "sine";
        std::uint64_t seed = 1;
    } data;

    struct Output {
        std::filesystem::path directory = "sdlab_out";
        bool csv = true;
        bool binary = false;
    } output;
};

/// Applies "a.b.c=value" to the raw document. The value is parsed as JSON when
/// possible and taken as a string otherwise.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Strict conversion: unknown keys and wrong types are errors. Relative CSV
/// paths resolve against `base_dir`.
ExperimentConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});

/// Reads the file, applies overrides in order, parses.
ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

/// Builds the coefficient pair; throws ConfigError on invalid coefficients.
CoefficientPair make_pair(const ExperimentConfig& cfg);

}  // namespace sdlab::cli
