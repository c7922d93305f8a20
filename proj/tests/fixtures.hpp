#pragma once

#include "dictrnn/codec.hpp"
#include "dictrnn/dictionary.hpp"
#include "dictrnn/rnn.hpp"
#include "dictrnn/systems.hpp"

#include <vector>

namespace fixture {

using namespace dictrnn;

inline Grid uniform4() { return make_grid({-0.75, -0.25, 0.25, 0.75}); }

/// Trajectory with explicit values for t = -(n-1) .. 0 plus `eval` copies of
/// `tail` afterwards.
inline Trajectory series(std::vector<double> train, std::vector<double> eval = {0.0})
{
    Trajectory tr;
    tr.map_name = "fixture";
    tr.origin_index = static_cast<long>(train.size()) - 1;
    tr.values = std::move(train);
    tr.values.insert(tr.values.end(), eval.begin(), eval.end());
    return tr;
}

/// ..., 0.3, -0.3, 0.3 ending with y(0) = 0.3.
inline Trajectory period2(int n = 12)
{
    std::vector<double> v;
    for (int i = n - 1; i >= 0; --i)
        v.push_back(i % 2 == 0 ? 0.3 : -0.3);
    return series(v, {-0.3, 0.3, -0.3});
}

inline Trajectory constant(int n = 12) { return series(std::vector<double>(static_cast<std::size_t>(n), 0.3), {0.3, 0.3}); }

inline Dictionary dictionary_of(Trajectory const& tr, Grid const& g, int L)
{
    return build_dictionary(quantize_series(tr, g, tr.t_min(), 0), g, L);
}

inline std::vector<int> init_of(Trajectory const& tr, Grid const& g, int L)
{
    return initial_window(quantize_series(tr, g, -L, 0), L);
}

inline ActivationSpec table(std::vector<std::pair<double, double>> t)
{
    ActivationSpec s;
    s.mode = ActivationMode::tabulated;
    s.table = std::move(t);
    return s;
}

struct Chebyshev {
    Trajectory traj;
    Grid grid;
    Dictionary dict;
    std::vector<int> init;
};

inline Chebyshev chebyshev32(long train_len = 5000, long eval_len = 1000)
{
    auto map = make_map("chebyshev");
    double const seed[] = {0.3};
    Trajectory traj = generate(map, seed, train_len, eval_len, 100);
    double const head[] = {traj.at(0)};
    Grid grid = build_grid(32, head, 1e-3, 1, 16);
    Dictionary dict = dictionary_of(traj, grid, 1);
    auto init = init_of(traj, grid, 1);
    return Chebyshev{std::move(traj), std::move(grid), std::move(dict), std::move(init)};
}

} // namespace fixture
