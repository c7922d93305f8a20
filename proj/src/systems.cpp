#include "dictrnn/systems.hpp"

#include "dictrnn/errors.hpp"
#include "dictrnn/random.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dictrnn {

namespace {

Params merge_params(std::string const& name, Params const& defaults, Params const& given)
{
    Params out = defaults;
    for (auto const& [key, value] : given) {
        if (!defaults.contains(key))
            throw std::invalid_argument("map '" + name + "' has no parameter '" + key + "'");
        out[key] = value;
    }
    return out;
}

int integral_param(std::string const& map, std::string const& key, double v, int lo)
{
    if (v != std::floor(v) || v < lo || v > 64)
        throw std::invalid_argument("map '" + map + "': parameter '" + key
                                    + "' must be an integer in [" + std::to_string(lo) + ", 64]");
    return static_cast<int>(v);
}

double euclid(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

} // namespace

std::vector<double> DelayMap::apply(std::span<const double> window) const
{
    std::vector<double> out(static_cast<std::size_t>(L));
    out[0] = update(window);
    std::copy(window.begin(), window.begin() + (L - 1), out.begin() + 1);
    return out;
}

std::vector<std::string> registered_maps()
{
    return {"chebyshev", "constant", "henon", "periodic", "tent"};
}

DelayMap make_map(std::string const& name, Params const& params)
{
    DelayMap m;
    m.name = name;
    if (name == "chebyshev") {
        m.params = merge_params(name, {}, params);
        m.L = 1;
        m.update = [](std::span<const double> w) { return 1.0 - 2.0 * w[0] * w[0]; };
        // |Phi(w) - Phi(w')| = 2|w + w'| |w - w'|
        m.analytic_lipschitz = 4.0;
    } else if (name == "tent") {
        m.params = merge_params(name, {}, params);
        m.L = 1;
        m.update = [](std::span<const double> w) { return 1.0 - 2.0 * std::abs(w[0]); };
        m.analytic_lipschitz = 2.0;
    } else if (name == "henon") {
        m.params = merge_params(name, {{"a", 1.4}, {"b", 0.3}, {"s", 1.3}}, params);
        double const a = m.params.at("a");
        double const b = m.params.at("b");
        double const s = m.params.at("s");
        if (!(s > 0.0))
            throw std::invalid_argument("map 'henon': parameter 's' must be positive");
        m.L = 2;
        // Classic Henon in the coordinate x = s*y.
        m.update = [a, b, s](std::span<const double> w) {
            return 1.0 / s - a * s * w[0] * w[0] + b * w[1];
        };
        // Sup over |w1| <= 1 of the spectral norm of [[-2as w1, b], [1, 0]].
        double const c = 2.0 * std::abs(a) * s;
        double const tr = c * c + 1.0 + b * b;
        double const det = b * b;
        m.analytic_lipschitz = std::sqrt(0.5 * (tr + std::sqrt(tr * tr - 4.0 * det)));
    } else if (name == "constant") {
        m.params = merge_params(name, {{"c", 0.3}, {"L", 1.0}}, params);
        double const c = m.params.at("c");
        if (!(std::abs(c) <= 1.0))
            throw std::invalid_argument("map 'constant': parameter 'c' must lie in [-1, 1]");
        m.L = integral_param(name, "L", m.params.at("L"), 1);
        m.update = [c](std::span<const double>) { return c; };
        m.analytic_lipschitz = m.L == 1 ? 0.0 : 1.0;
    } else if (name == "periodic") {
        m.params = merge_params(name, {{"p", 2.0}}, params);
        int const p = integral_param(name, "p", m.params.at("p"), 1);
        m.L = p;
        m.update = [p](std::span<const double> w) { return w[static_cast<std::size_t>(p - 1)]; };
        // cyclic coordinate permutation: an isometry
        m.analytic_lipschitz = 1.0;
    } else {
        throw std::invalid_argument("unknown map '" + name + "'");
    }
    return m;
}

Trajectory generate(DelayMap const& map, std::span<const double> seed_window, long train_len,
                    long eval_len, long burn_in)
{
    if (static_cast<int>(seed_window.size()) != map.L)
        throw std::invalid_argument("seed window must hold L = " + std::to_string(map.L)
                                    + " values");
    for (double v : seed_window)
        if (!(std::abs(v) <= 1.0))
            throw std::invalid_argument("seed window values must lie in [-1, 1]");
    if (train_len < map.L + 1)
        throw std::invalid_argument("train_len must be at least L + 1");
    if (eval_len < 1)
        throw std::invalid_argument("eval_len must be positive");
    if (burn_in < 0)
        throw std::invalid_argument("burn_in must be non-negative");

    Trajectory traj;
    traj.map_name = map.name;
    traj.params = map.params;
    traj.seed_window.assign(seed_window.begin(), seed_window.end());
    traj.burn_in = burn_in;
    traj.origin_index = train_len - 1;
    traj.values.reserve(static_cast<std::size_t>(train_len + eval_len));

    std::vector<double> window(seed_window.begin(), seed_window.end());
    long const total = burn_in + train_len + eval_len;
    for (long step = 0; step < total; ++step) {
        double const next = map.update(window);
        if (!(std::abs(next) <= 1.0))
            throw DomainEscape{map.name, step, next};
        std::rotate(window.rbegin(), window.rbegin() + 1, window.rend());
        window[0] = next;
        if (step >= burn_in)
            traj.values.push_back(next);
    }
    return traj;
}

std::string to_string(LipschitzMethod m)
{
    return m == LipschitzMethod::analytic ? "analytic" : "sampled";
}

LipschitzCertificate lipschitz(DelayMap const& map, LipschitzMethod mode, long n_pairs,
                               std::uint64_t seed)
{
    LipschitzCertificate cert;
    cert.method = mode;
    if (mode == LipschitzMethod::analytic) {
        if (!map.analytic_lipschitz)
            throw NoAnalyticBound{"map '" + map.name + "' has no registered analytic bound"};
        cert.raw = *map.analytic_lipschitz;
        cert.e_lambda = std::max(1.0, cert.raw);
        return cert;
    }

    if (n_pairs < 1000)
        throw std::invalid_argument("sampled Lipschitz estimate needs n_pairs >= 1000");
    Uniform u{derive_seed(seed, 0x4c495053)};
    auto const L = static_cast<std::size_t>(map.L);
    std::vector<double> w(L), wp(L);
    double best = 0.0;
    for (long i = 0; i < n_pairs; ++i) {
        for (std::size_t k = 0; k < L; ++k) {
            w[k] = u(-1.0, 1.0);
            wp[k] = u(-1.0, 1.0);
        }
        double const d = euclid(w, wp);
        if (d == 0.0)
            continue;
        best = std::max(best, euclid(map.apply(w), map.apply(wp)) / d);
    }
    cert.raw = best;
    cert.e_lambda = std::max(1.0, best);
    cert.sample_count = n_pairs;
    return cert;
}

} // namespace dictrnn
