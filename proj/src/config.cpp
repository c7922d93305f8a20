#include "dictrnn/config.hpp"

#include "dictrnn/errors.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace dictrnn {

using nlohmann::json;

namespace {

std::string lipschitz_name(LipschitzChoice c)
{
    switch (c) {
    case LipschitzChoice::automatic: return "auto";
    case LipschitzChoice::analytic: return "analytic";
    case LipschitzChoice::sampled: return "sampled";
    }
    return "auto";
}

LipschitzChoice lipschitz_choice(std::string const& s)
{
    if (s == "auto")
        return LipschitzChoice::automatic;
    if (s == "analytic")
        return LipschitzChoice::analytic;
    if (s == "sampled")
        return LipschitzChoice::sampled;
    throw ConfigError{"lipschitz", "expected auto, analytic or sampled, got '" + s + "'"};
}

template <typename T>
void read(json const& j, char const* field, T& out)
{
    if (!j.contains(field))
        return;
    try {
        out = j.at(field).get<T>();
    } catch (json::exception const& e) {
        throw ConfigError{field, std::string{"wrong type: "} + e.what()};
    }
}

} // namespace

std::vector<double> default_seed_window(std::string const& map, int L)
{
    if (map == "henon")
        return {0.1, 0.1};
    if (map == "periodic" && L == 2)
        return {0.3, -0.3};
    if (map == "periodic") {
        std::vector<double> w;
        for (int l = 0; l < L; ++l)
            w.push_back(0.9 - 1.7 * l / L);
        return w;
    }
    return std::vector<double>(static_cast<std::size_t>(L), 0.3);
}

DelayMap ExperimentConfig::delay_map() const
{
    try {
        return make_map(map, params);
    } catch (std::invalid_argument const& e) {
        bool const unknown = std::string{e.what()}.starts_with("unknown map");
        throw ConfigError{unknown ? "map" : "params", e.what()};
    }
}

std::vector<double> ExperimentConfig::resolved_seed_window() const
{
    if (!seed_window.empty())
        return seed_window;
    return default_seed_window(map, delay_map().L);
}

void ExperimentConfig::validate() const
{
    DelayMap const m = delay_map();
    if (L != 0 && L != m.L)
        throw ConfigError{"L", "map '" + map + "' has L = " + std::to_string(m.L)};
    auto const window = resolved_seed_window();
    if (static_cast<int>(window.size()) != m.L)
        throw ConfigError{"seed_window", "needs exactly L = " + std::to_string(m.L) + " values"};
    for (double v : window)
        if (!(std::abs(v) <= 1.0))
            throw ConfigError{"seed_window", "values must lie in [-1, 1]"};
    if (K < 2)
        throw ConfigError{"K", "must be at least 2"};
    if (!(jitter_scale >= 0.0 && jitter_scale < 1.0 / (2.0 * K)))
        throw ConfigError{"jitter_scale", "must lie in [0, 1/(2K))"};
    if (train_len < m.L + 1)
        throw ConfigError{"train_len", "must be at least L + 1"};
    if (eval_len < 1)
        throw ConfigError{"eval_len", "must be positive"};
    if (burn_in < 0)
        throw ConfigError{"burn_in", "must be non-negative"};
    if (horizon < 1 || horizon > eval_len)
        throw ConfigError{"horizon", "must lie in [1, eval_len]"};
    if (grid_retries < 0)
        throw ConfigError{"grid_retries", "must be non-negative"};
    if (max_retries < 0)
        throw ConfigError{"max_retries", "must be non-negative"};
    if (!(beta > 0.0))
        throw ConfigError{"beta", "must be positive"};
    if (!(snap_tolerance >= 0.0))
        throw ConfigError{"snap_tolerance", "must be non-negative (0 selects the default)"};
    if (lipschitz == LipschitzChoice::analytic && !m.analytic_lipschitz)
        throw ConfigError{"lipschitz", "map '" + map + "' has no analytic bound"};
    if (lipschitz != LipschitzChoice::analytic && lipschitz_pairs < 1000)
        throw ConfigError{"lipschitz_pairs", "must be at least 1000"};
    if (out_dir.empty())
        throw ConfigError{"out_dir", "must not be empty"};
}

ExperimentConfig config_from_json(json const& j)
{
    if (!j.is_object())
        throw ConfigError{"<root>", "config must be a JSON object"};
    static std::set<std::string> const known{
        "map", "params", "seed_window", "L", "K", "train_len", "eval_len", "burn_in",
        "jitter_scale", "grid_seed", "grid_retries", "activation", "h_seed", "beta",
        "snap_tolerance", "max_retries", "horizon", "lipschitz", "lipschitz_pairs",
        "lipschitz_seed", "out_dir"};
    for (auto const& [key, _] : j.items())
        if (!known.contains(key))
            throw ConfigError{key, "unknown field"};

    ExperimentConfig c;
    read(j, "map", c.map);
    read(j, "params", c.params);
    read(j, "seed_window", c.seed_window);
    read(j, "L", c.L);
    read(j, "K", c.K);
    read(j, "train_len", c.train_len);
    read(j, "eval_len", c.eval_len);
    read(j, "burn_in", c.burn_in);
    read(j, "jitter_scale", c.jitter_scale);
    read(j, "grid_seed", c.grid_seed);
    read(j, "grid_retries", c.grid_retries);
    read(j, "h_seed", c.h_seed);
    read(j, "beta", c.beta);
    read(j, "snap_tolerance", c.snap_tolerance);
    read(j, "max_retries", c.max_retries);
    read(j, "horizon", c.horizon);
    read(j, "lipschitz_pairs", c.lipschitz_pairs);
    read(j, "lipschitz_seed", c.lipschitz_seed);
    read(j, "out_dir", c.out_dir);
    if (j.contains("activation")) {
        std::string mode;
        read(j, "activation", mode);
        try {
            c.activation = activation_mode_from_string(mode);
        } catch (std::invalid_argument const& e) {
            throw ConfigError{"activation", e.what()};
        }
    }
    if (j.contains("lipschitz")) {
        std::string s;
        read(j, "lipschitz", s);
        c.lipschitz = lipschitz_choice(s);
    }
    return c;
}

json config_to_json(ExperimentConfig const& c)
{
    return json{{"map", c.map},
                {"params", c.params},
                {"seed_window", c.seed_window},
                {"L", c.L},
                {"K", c.K},
                {"train_len", c.train_len},
                {"eval_len", c.eval_len},
                {"burn_in", c.burn_in},
                {"jitter_scale", c.jitter_scale},
                {"grid_seed", c.grid_seed},
                {"grid_retries", c.grid_retries},
                {"activation", to_string(c.activation)},
                {"h_seed", c.h_seed},
                {"beta", c.beta},
                {"snap_tolerance", c.snap_tolerance},
                {"max_retries", c.max_retries},
                {"horizon", c.horizon},
                {"lipschitz", lipschitz_name(c.lipschitz)},
                {"lipschitz_pairs", c.lipschitz_pairs},
                {"lipschitz_seed", c.lipschitz_seed},
                {"out_dir", c.out_dir}};
}

void apply_override(ExperimentConfig& c, std::string const& assignment)
{
    auto const eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError{assignment, "override must look like key=value"};
    std::string const key = assignment.substr(0, eq);
    std::string const raw = assignment.substr(eq + 1);
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded())
        value = raw;

    json j = config_to_json(c);
    if (key.starts_with("params.")) {
        j["params"][key.substr(7)] = value;
    } else {
        j[key] = value;
    }
    c = config_from_json(j);
}

} // namespace dictrnn
