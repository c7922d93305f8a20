#pragma once

// Discretization grid {a_k} of [-1, 1] and the quantizer onto it.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dictrnn {

struct Trajectory;

/// Certified grid. Indices are 0-based: points[k] is a_{k+1}.
struct Grid {
    std::vector<double> points;
    /// midpoints[k] = (points[k] + points[k+1]) / 2, K-1 entries.
    std::vector<double> midpoints;
    /// K times the largest quantization error over [-1, 1] (the constant C).
    double radius_x_K = 0.0;
    std::uint64_t jitter_seed = 0;
    double jitter_scale = 0.0;
    /// Jitter draws consumed before certification succeeded (0 = first draw).
    int retries_used = 0;

    int K() const { return static_cast<int>(points.size()); }
    double point(int k) const { return points.at(static_cast<std::size_t>(k)); }
    /// Largest |y - a_{k(y)}| over y in [-1, 1].
    double radius() const { return radius_x_K / K(); }

    /// Nearest grid index; a value exactly on a midpoint goes to the upper
    /// neighbour (the a - 0 convention).
    int quantize(double y) const;
};

/// Why a candidate point set failed certification, or nullopt if it passed.
std::optional<std::string> grid_defect(std::span<const double> points,
                                       std::span<const double> head);

/// Builds a Grid from explicit points (no jitter, no retries). Throws
/// std::invalid_argument if the points are not a valid grid.
Grid make_grid(std::vector<double> points);

/// Uniform cell centres a_k = -1 + (2k-1)/K plus per-point jitter drawn in
/// (-jitter_scale, jitter_scale). Redraws until the points are increasing,
/// nonzero and no value of `head` sits on a midpoint; throws
/// RetriesExhausted after max_retries redraws.
Grid build_grid(int K, std::span<const double> head, double jitter_scale, std::uint64_t seed,
                int max_retries);

int quantize(double y, Grid const& grid);

struct QuantizedSeries {
    std::vector<int> indices;
    /// Time of indices[0].
    long t_begin = 0;

    long t_end() const { return t_begin + static_cast<long>(indices.size()) - 1; }
    int at(long t) const { return indices.at(static_cast<std::size_t>(t - t_begin)); }
};

/// Quantizes traj over [t_from, t_to] inclusive.
QuantizedSeries quantize_series(Trajectory const& traj, Grid const& grid, long t_from, long t_to);

} // namespace dictrnn
