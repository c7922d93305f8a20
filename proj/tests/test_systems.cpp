#include "dictrnn/errors.hpp"
#include "dictrnn/random.hpp"
#include "dictrnn/systems.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>

using namespace dictrnn;

TEST_CASE("chebyshev one step from 0.3")
{
    auto const map = make_map("chebyshev");
    double const seed[] = {0.3};
    auto const tr = generate(map, seed, 2, 1, 0);
    CHECK(tr.values[0] == doctest::Approx(0.82).epsilon(1e-15));
    CHECK(tr.t_min() == -1);
    CHECK(tr.t_max() == 1);
    CHECK(tr.at(-1) == tr.values[0]);
}

TEST_CASE("constant map yields a constant series")
{
    auto const map = make_map("constant", {{"c", 0.3}});
    double const seed[] = {-0.9};
    auto const tr = generate(map, seed, 20, 5, 3);
    for (double v : tr.values)
        CHECK(v == 0.3);
    CHECK(tr.values.size() == 25);
}

TEST_CASE("rescaled henon stays in [-1,1] and is conjugate to classic henon")
{
    auto const map = make_map("henon");
    CHECK(map.L == 2);
    double const seed[] = {0.1, 0.1};
    auto const tr = generate(map, seed, 5000, 5000, 0);
    double worst = 0.0;
    for (double v : tr.values)
        worst = std::max(worst, std::abs(v));
    CHECK(worst <= 1.0);

    // x = 1.3 y in the classic coordinates; compare the first iterates
    auto const classic = oracle::henon_classic(0.13, 0.13, 20);
    for (int i = 0; i < 20; ++i)
        CHECK(tr.values[static_cast<std::size_t>(i)] == doctest::Approx(classic[static_cast<std::size_t>(i)] / 1.3).epsilon(1e-10));
}

TEST_CASE("domain escape aborts generation")
{
    // without the 1/s constant the first iterate is 1.016
    auto const map = make_map("henon", {{"s", 1.0}});
    double const seed[] = {0.1, 0.1};
    CHECK_THROWS_AS(generate(map, seed, 10, 10, 0), DomainEscape);
    try {
        generate(map, seed, 10, 10, 0);
    } catch (DomainEscape const& e) {
        CHECK(e.step == 0);
        CHECK(e.value > 1.0);
    }
}

TEST_CASE("generate rejects bad arguments")
{
    auto const map = make_map("chebyshev");
    double const ok[] = {0.3};
    double const bad[] = {1.5};
    double const two[] = {0.1, 0.2};
    CHECK_THROWS_AS(generate(map, bad, 10, 10), std::invalid_argument);
    CHECK_THROWS_AS(generate(map, two, 10, 10), std::invalid_argument);
    CHECK_THROWS_AS(generate(map, ok, 1, 10), std::invalid_argument);
    CHECK_THROWS_AS(generate(map, ok, 10, 0), std::invalid_argument);
    CHECK_THROWS_AS(make_map("logistic"), std::invalid_argument);
    CHECK_THROWS_AS(make_map("chebyshev", {{"r", 2.0}}), std::invalid_argument);
    CHECK_THROWS_AS(make_map("periodic", {{"p", 2.5}}), std::invalid_argument);
}

TEST_CASE("trajectories satisfy their map and regenerate bit-identically")
{
    for (auto const& name : registered_maps()) {
        CAPTURE(name);
        auto const map = make_map(name);
        std::vector<double> seed(static_cast<std::size_t>(map.L), 0.3);
        if (name == "henon")
            seed = {0.1, 0.1};
        if (name == "periodic")
            seed = {0.3, -0.3};
        auto const a = generate(map, seed, 300, 50, 10);
        auto const b = generate(map, seed, 300, 50, 10);
        REQUIRE(a.values.size() == b.values.size());
        CHECK(std::memcmp(a.values.data(), b.values.data(), a.values.size() * sizeof(double)) == 0);

        for (long t = a.t_min() + map.L; t <= a.t_max(); ++t) {
            std::vector<double> window;
            for (int l = 1; l <= map.L; ++l)
                window.push_back(a.at(t - l));
            CHECK(std::abs(map.update(window) - a.at(t)) <= 1e-12);
            CHECK(std::abs(a.at(t)) <= 1.0);
        }
    }
}

TEST_CASE("induced map has the delay shift structure")
{
    Uniform u{3};
    for (auto const& name : registered_maps()) {
        auto map = make_map(name);
        if (name == "constant")
            map = make_map(name, {{"L", 3.0}});
        for (int i = 0; i < 200; ++i) {
            std::vector<double> w;
            for (int l = 0; l < map.L; ++l)
                w.push_back(u(-1.0, 1.0));
            auto const out = map.apply(w);
            REQUIRE(static_cast<int>(out.size()) == map.L);
            for (int l = 1; l < map.L; ++l)
                CHECK(out[static_cast<std::size_t>(l)] == w[static_cast<std::size_t>(l - 1)]);
        }
    }
}

TEST_CASE("maps other than henon send the cube into [-1,1]")
{
    Uniform u{5};
    for (auto const& name : {"chebyshev", "tent", "constant", "periodic"}) {
        auto const map = make_map(name);
        double worst = 0.0;
        for (int i = 0; i < 20000; ++i) {
            std::vector<double> w;
            for (int l = 0; l < map.L; ++l)
                w.push_back(u(-1.0, 1.0));
            worst = std::max(worst, std::abs(map.update(w)));
        }
        // the corners too
        std::vector<double> corner(static_cast<std::size_t>(map.L), 1.0);
        worst = std::max(worst, std::abs(map.update(corner)));
        CHECK(worst <= 1.0);
    }
}

TEST_CASE("analytic Lipschitz certificates")
{
    auto const cheb = lipschitz(make_map("chebyshev"), LipschitzMethod::analytic);
    CHECK(cheb.e_lambda == 4.0);
    CHECK_FALSE(cheb.lower_estimate());

    auto const cst = lipschitz(make_map("constant"), LipschitzMethod::analytic);
    CHECK(cst.raw == 0.0);
    CHECK(cst.e_lambda == 1.0);

    CHECK(lipschitz(make_map("tent"), LipschitzMethod::analytic).e_lambda == 2.0);
    CHECK(lipschitz(make_map("periodic"), LipschitzMethod::analytic).e_lambda == 1.0);

    // ||[[c, b], [1, 0]]||_2 for c = 2 * 1.4 * 1.3 = 3.64, b = 0.3
    double const c = 3.64, b = 0.3;
    double const tr = c * c + 1 + b * b;
    double const expect = std::sqrt((tr + std::sqrt(tr * tr - 4 * b * b)) / 2);
    CHECK(lipschitz(make_map("henon"), LipschitzMethod::analytic).e_lambda == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("sampled Lipschitz approaches the analytic value from below")
{
    auto const cheb = lipschitz(make_map("chebyshev"), LipschitzMethod::sampled, 100000, 1);
    CHECK(cheb.lower_estimate());
    CHECK(cheb.sample_count == 100000);
    CHECK(cheb.e_lambda <= 4.0 + 1e-12);
    CHECK(cheb.e_lambda > 3.95);

    auto const tent = lipschitz(make_map("tent"), LipschitzMethod::sampled, 20000, 2);
    CHECK(tent.e_lambda <= 2.0 + 1e-12);
    CHECK(tent.e_lambda > 1.999);

    for (auto const& name : registered_maps()) {
        auto const map = make_map(name);
        auto const s = lipschitz(map, LipschitzMethod::sampled, 20000, 9);
        auto const a = lipschitz(map, LipschitzMethod::analytic);
        CAPTURE(name);
        CHECK(s.e_lambda >= 1.0);
        CHECK(s.e_lambda <= a.e_lambda + 1e-12);
    }
}

TEST_CASE("sampled certificate dominates every ratio it saw")
{
    // re-sample the same stream independently and compare
    auto const map = make_map("henon");
    auto const cert = lipschitz(map, LipschitzMethod::sampled, 5000, 4);
    Uniform v{derive_seed(4, 0x4c495053)};
    double best = 0.0;
    for (int i = 0; i < 5000; ++i) {
        double w0 = v(-1.0, 1.0), wp0 = v(-1.0, 1.0), w1 = v(-1.0, 1.0), wp1 = v(-1.0, 1.0);
        // coordinates are drawn interleaved: w[0], w'[0], w[1], w'[1]
        double const W[] = {w0, w1};
        double const Wp[] = {wp0, wp1};
        auto const a = map.apply(W);
        auto const b = map.apply(Wp);
        double const num = std::hypot(a[0] - b[0], a[1] - b[1]);
        double const den = std::hypot(W[0] - Wp[0], W[1] - Wp[1]);
        best = std::max(best, num / den);
    }
    CHECK(cert.e_lambda >= best);
}

TEST_CASE("analytic certificate requires a registered bound")
{
    DelayMap custom;
    custom.name = "custom";
    custom.L = 1;
    custom.update = [](std::span<const double> w) { return 0.5 * w[0]; };
    CHECK_THROWS_AS(lipschitz(custom, LipschitzMethod::analytic), NoAnalyticBound);
    auto const s = lipschitz(custom, LipschitzMethod::sampled, 1000, 0);
    CHECK(s.raw == doctest::Approx(0.5));
    CHECK(s.e_lambda == 1.0);
    CHECK_THROWS_AS(lipschitz(custom, LipschitzMethod::sampled, 999, 0), std::invalid_argument);
}
