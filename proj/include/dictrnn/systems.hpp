#pragma once

// Delay-coordinate benchmark maps, trajectory generation and Lipschitz
// certificates.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dictrnn {

using Params = std::map<std::string, double>;

/// A scalar recurrence y(t) = update(y(t-1), ..., y(t-L)). The induced map
/// on [-1,1]^L shifts the window by one lag and prepends the new value.
struct DelayMap {
    std::string name;
    Params params;
    int L = 1;
    /// Argument is the lag window, most recent value first.
    std::function<double(std::span<const double>)> update;
    /// Closed-form Lipschitz bound of the induced L-dimensional map, if known.
    std::optional<double> analytic_lipschitz;

    /// Full map on the window: (update(w), w[0], ..., w[L-2]).
    std::vector<double> apply(std::span<const double> window) const;
};

/// Registered names: chebyshev, tent, henon, constant, periodic.
/// Unknown params are rejected; missing ones take their defaults.
DelayMap make_map(std::string const& name, Params const& params = {});

std::vector<std::string> registered_maps();

struct Trajectory {
    std::vector<double> values;
    /// Index of t = 0 in values.
    long origin_index = 0;
    std::string map_name;
    Params params;
    std::vector<double> seed_window;
    long burn_in = 0;

    long t_min() const { return -origin_index; }
    long t_max() const { return static_cast<long>(values.size()) - 1 - origin_index; }
    double at(long t) const { return values.at(static_cast<std::size_t>(t + origin_index)); }
};

/// Iterates `map` from `seed_window` (lag order, y(s-1) first), discards
/// `burn_in` iterates, then records train_len + eval_len values covering
/// t = -train_len+1 .. eval_len. Throws DomainEscape if an iterate leaves
/// [-1, 1].
Trajectory generate(DelayMap const& map, std::span<const double> seed_window, long train_len,
                    long eval_len, long burn_in = 0);

enum class LipschitzMethod { analytic, sampled };

std::string to_string(LipschitzMethod m);

struct LipschitzCertificate {
    double e_lambda = 1.0;
    LipschitzMethod method = LipschitzMethod::analytic;
    long sample_count = 0;
    /// Supremum before clamping at 1.
    double raw = 0.0;
    /// Sampled certificates only estimate the supremum from below.
    bool lower_estimate() const { return method == LipschitzMethod::sampled; }
};

/// e^lambda = max(1, sup |Phi(W)-Phi(W')| / |W-W'|) in the Euclidean norm.
/// Sampled mode evaluates n_pairs uniform random pairs (n_pairs >= 1000).
LipschitzCertificate lipschitz(DelayMap const& map, LipschitzMethod mode, long n_pairs = 100000,
                               std::uint64_t seed = 0);

} // namespace dictrnn
