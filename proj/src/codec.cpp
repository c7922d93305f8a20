#include "dictrnn/codec.hpp"

#include "dictrnn/errors.hpp"
#include "dictrnn/random.hpp"
#include "dictrnn/systems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dictrnn {

namespace {

constexpr double midpoint_clearance = 1e-12;

std::vector<double> midpoints_of(std::span<const double> points)
{
    std::vector<double> mids;
    for (std::size_t k = 0; k + 1 < points.size(); ++k)
        mids.push_back((points[k] + points[k + 1]) / 2.0);
    return mids;
}

// Largest computed |y - a_k| the quantizer can produce. Within a cell the
// error is monotone on each side of a_k, so checking the cell ends suffices.
double certified_radius(std::span<const double> points, std::span<const double> mids)
{
    double r = 0.0;
    std::size_t const K = points.size();
    for (std::size_t k = 0; k < K; ++k) {
        double const lo = k == 0 ? -1.0 : mids[k - 1];
        double const hi = k + 1 == K ? 1.0 : std::nextafter(mids[k], -2.0);
        r = std::max({r, std::abs(lo - points[k]), std::abs(hi - points[k])});
    }
    return r;
}

Grid finish_grid(std::vector<double> points)
{
    Grid g;
    g.midpoints = midpoints_of(points);
    double const r = certified_radius(points, g.midpoints);
    g.points = std::move(points);
    double const K = g.K();
    double c = K * r;
    while (c / K < r)
        c = std::nextafter(c, std::numeric_limits<double>::infinity());
    g.radius_x_K = c;
    return g;
}

} // namespace

int Grid::quantize(double y) const
{
    return static_cast<int>(std::upper_bound(midpoints.begin(), midpoints.end(), y)
                            - midpoints.begin());
}

int quantize(double y, Grid const& grid) { return grid.quantize(y); }

std::optional<std::string> grid_defect(std::span<const double> points,
                                       std::span<const double> head)
{
    if (points.size() < 2)
        return "grid needs at least two points";
    for (std::size_t k = 0; k < points.size(); ++k) {
        if (!(points[k] > -1.0 && points[k] < 1.0))
            return "point " + std::to_string(k) + " outside (-1, 1)";
        if (points[k] == 0.0)
            return "point " + std::to_string(k) + " is zero";
        if (k > 0 && !(points[k] > points[k - 1]))
            return "points not strictly increasing at " + std::to_string(k);
    }
    auto const mids = midpoints_of(points);
    for (double y : head)
        for (std::size_t k = 0; k < mids.size(); ++k)
            if (std::abs(y - mids[k]) <= midpoint_clearance)
                return "head value sits on midpoint " + std::to_string(k);
    return std::nullopt;
}

Grid make_grid(std::vector<double> points)
{
    if (auto defect = grid_defect(points, {}))
        throw std::invalid_argument("invalid grid: " + *defect);
    return finish_grid(std::move(points));
}

Grid build_grid(int K, std::span<const double> head, double jitter_scale, std::uint64_t seed,
                int max_retries)
{
    if (K < 2)
        throw std::invalid_argument("K must be at least 2");
    if (!(jitter_scale >= 0.0 && jitter_scale < 1.0 / (2.0 * K)))
        throw std::invalid_argument("jitter_scale must lie in [0, 1/(2K))");
    if (max_retries < 0)
        throw std::invalid_argument("max_retries must be non-negative");

    // A zero jitter scale cannot move a failing grid; redraws fall back to this.
    double const fallback_scale = 1.0 / (8.0 * K);

    std::string last_defect;
    for (int attempt = 0; attempt <= max_retries; ++attempt) {
        double const scale = attempt > 0 && jitter_scale == 0.0 ? fallback_scale : jitter_scale;
        Uniform u{derive_seed(seed, static_cast<std::uint64_t>(attempt))};
        std::vector<double> points(static_cast<std::size_t>(K));
        for (int k = 0; k < K; ++k) {
            double const centre = -1.0 + (2.0 * k + 1.0) / K;
            points[static_cast<std::size_t>(k)] = centre + scale * u(-1.0, 1.0);
        }
        auto defect = grid_defect(points, head);
        if (!defect) {
            Grid g = finish_grid(std::move(points));
            g.jitter_seed = seed;
            g.jitter_scale = jitter_scale;
            g.retries_used = attempt;
            return g;
        }
        last_defect = *defect;
    }
    throw RetriesExhausted{"grid certification failed after " + std::to_string(max_retries)
                           + " retries: " + last_defect};
}

QuantizedSeries quantize_series(Trajectory const& traj, Grid const& grid, long t_from, long t_to)
{
    if (t_from > t_to || t_from < traj.t_min() || t_to > traj.t_max())
        throw std::out_of_range("quantization range outside trajectory support");
    QuantizedSeries q;
    q.t_begin = t_from;
    q.indices.reserve(static_cast<std::size_t>(t_to - t_from + 1));
    for (long t = t_from; t <= t_to; ++t)
        q.indices.push_back(grid.quantize(traj.at(t)));
    return q;
}

} // namespace dictrnn
