#pragma once

#include "dictrnn/rnn.hpp"
#include "dictrnn/systems.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dictrnn {

enum class LipschitzChoice { automatic, analytic, sampled };

/// Everything needed to reproduce one experiment. All randomness flows from
/// the explicit seeds below.
struct ExperimentConfig {
    std::string map = "chebyshev";
    Params params;
    /// Lag-ordered seed window; empty selects the map's default.
    std::vector<double> seed_window;
    /// 0 = take L from the map; otherwise must agree with it.
    int L = 0;
    int K = 32;
    long train_len = 5000;
    long eval_len = 1000;
    long burn_in = 100;
    double jitter_scale = 1e-3;
    std::uint64_t grid_seed = 1;
    int grid_retries = 16;
    ActivationMode activation = ActivationMode::tabulated;
    std::uint64_t h_seed = 7;
    double beta = 1.0;
    double snap_tolerance = 0.0;
    int max_retries = 16;
    long horizon = 1000;
    LipschitzChoice lipschitz = LipschitzChoice::automatic;
    long lipschitz_pairs = 100000;
    std::uint64_t lipschitz_seed = 11;
    std::string out_dir = "out";

    /// Resolves registry names and checks ranges; throws ConfigError naming
    /// the offending field.
    void validate() const;
    DelayMap delay_map() const;
    std::vector<double> resolved_seed_window() const;
};

ExperimentConfig config_from_json(nlohmann::json const& j);
nlohmann::json config_to_json(ExperimentConfig const& c);

/// Applies `key=value` where value is parsed as JSON (bare strings allowed).
void apply_override(ExperimentConfig& c, std::string const& assignment);

std::vector<double> default_seed_window(std::string const& map, int L);

} // namespace dictrnn
