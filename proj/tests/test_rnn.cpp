#include "dictrnn/rnn.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>

using namespace dictrnn;

namespace {

bool bitwise_equal(Eigen::MatrixXd const& a, Eigen::MatrixXd const& b)
{
    return a.rows() == b.rows() && a.cols() == b.cols()
           && std::memcmp(a.data(), b.data(), static_cast<std::size_t>(a.size()) * sizeof(double)) == 0;
}

struct Period2 {
    Grid grid = fixture::uniform4();
    Trajectory traj = fixture::period2();
    Dictionary dict = fixture::dictionary_of(traj, grid, 2);
    std::vector<int> init = fixture::init_of(traj, grid, 2);
};

} // namespace

TEST_CASE("sigma star is the entry-wise reciprocal")
{
    auto const g = fixture::uniform4();
    auto const cst = build_sigma_star(fixture::dictionary_of(fixture::constant(), g, 2));
    CHECK(cst.rows() == 1);
    CHECK(cst(0, 0) == 4.0);
    CHECK(cst(0, 1) == 4.0);

    Period2 p;
    auto const s = build_sigma_star(p.dict);
    CHECK(s(0, 0) == -4.0);
    CHECK(s(0, 1) == 4.0);
    CHECK(s(1, 0) == 4.0);
    CHECK(s(1, 1) == -4.0);

    auto const c = fixture::chebyshev32();
    auto const sc = build_sigma_star(c.dict);
    for (int n = 0; n < c.dict.N(); ++n)
        CHECK(sc(n, 0) * c.dict.key_value(n, 1) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("assemble X and G for the golden fixtures")
{
    auto const g = fixture::uniform4();
    auto const dc = fixture::dictionary_of(fixture::constant(), g, 2);
    auto const ac = assemble_X_G(dc, build_sigma_star(dc), fixture::table({{2.0, 0.7}}), 0);
    CHECK(ac.X.rows() == 1);
    CHECK(ac.X(0, 0) == 0.7);
    CHECK(ac.activation.gset().gammas == std::vector<double>{2.0});
    CHECK(ac.activation.gset().contains_L_at == 0);

    Period2 p;
    auto const ap = assemble_X_G(p.dict, build_sigma_star(p.dict), fixture::table({{2.0, 0.7}, {-2.0, 0.2}}), 0);
    CHECK(ap.args(0, 0) == 2.0);
    CHECK(ap.args(0, 1) == -2.0);
    CHECK(ap.args(1, 0) == -2.0);
    CHECK(ap.args(1, 1) == 2.0);
    CHECK(ap.activation.gset().gammas == std::vector<double>{-2.0, 2.0});
    CHECK(ap.X(0, 0) == 0.7);
    CHECK(ap.X(1, 1) == 0.7);
    CHECK(ap.X(0, 1) == 0.2);
    CHECK(ap.X(1, 0) == 0.2);
}

TEST_CASE("chebyshev X: constant diagonal, off-diagonal arguments away from L")
{
    auto const c = fixture::chebyshev32();
    ActivationSpec spec;
    auto const a = assemble_X_G(c.dict, build_sigma_star(c.dict), spec, 5);
    double const hL = a.activation.table_value(a.activation.gset().contains_L_at);
    for (int i = 0; i < c.dict.N(); ++i) {
        CHECK(std::abs(a.args(i, i) - 1.0) <= 1e-12);
        CHECK(a.X(i, i) == hL);
        for (int j = 0; j < c.dict.N(); ++j)
            if (i != j)
                CHECK(std::abs(a.args(i, j) - 1.0) > 1e-9);
    }
    for (int m = 0; m < static_cast<int>(a.activation.gset().gammas.size()); ++m)
        CHECK(std::abs(a.activation.table_value(m)) <= 1.0);
}

TEST_CASE("tabulated draws are seeded")
{
    auto const c = fixture::chebyshev32();
    auto const s = build_sigma_star(c.dict);
    auto const a = assemble_X_G(c.dict, s, {}, 9);
    auto const b = assemble_X_G(c.dict, s, {}, 9);
    auto const d = assemble_X_G(c.dict, s, {}, 10);
    CHECK(bitwise_equal(a.X, b.X));
    CHECK_FALSE(bitwise_equal(a.X, d.X));
}

TEST_CASE("snap tolerance must fit inside the gamma spacing")
{
    Period2 p;
    auto spec = fixture::table({{2.0, 0.7}, {-2.0, 0.2}});
    spec.snap_tolerance = 2.5;
    CHECK_THROWS_AS(assemble_X_G(p.dict, build_sigma_star(p.dict), spec, 0), GapTooSmall);
    spec.snap_tolerance = 1.5;
    CHECK_NOTHROW(assemble_X_G(p.dict, build_sigma_star(p.dict), spec, 0));

    auto const dflt = assemble_X_G(p.dict, build_sigma_star(p.dict), fixture::table({{2.0, 0.7}, {-2.0, 0.2}}), 0);
    CHECK(dflt.activation.snap_tolerance() == 1e-6);
    CHECK(dflt.activation.gset().min_gap == 4.0);

    // missing table value
    CHECK_THROWS_AS(assemble_X_G(p.dict, build_sigma_star(p.dict), fixture::table({{2.0, 0.7}}), 0),
                    std::invalid_argument);
}

TEST_CASE("regularity check")
{
    Eigen::MatrixXd one(1, 1);
    one << 0.7;
    auto const r1 = check_regularity(one);
    CHECK(r1.regular);
    CHECK(r1.cond_estimate == doctest::Approx(1.0));

    Eigen::MatrixXd same(2, 2);
    same << 0.9, 0.9, 0.9, 0.9;
    CHECK_FALSE(check_regularity(same).regular);

    Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(3, 3);
    CHECK_FALSE(check_regularity(zero).regular);
}

TEST_CASE("singular h-table triggers a redraw")
{
    Period2 p;
    auto const ws = build_weights(p.dict, p.init, fixture::table({{2.0, 0.9}, {-2.0, 0.9}}), 3, 4);
    CHECK(ws.retries_used >= 1);
    CHECK(check_regularity(ws.X).regular);
    CHECK_THROWS_AS(build_weights(p.dict, p.init, fixture::table({{2.0, 0.9}, {-2.0, 0.9}}), 3, 0),
                    SingularAfterRetries);
}

TEST_CASE("constant system weights by hand")
{
    auto const g = fixture::uniform4();
    auto const tr = fixture::constant();
    auto const d = fixture::dictionary_of(tr, g, 2);
    auto const ws = build_weights(d, fixture::init_of(tr, g, 2), fixture::table({{2.0, 0.7}}), 0, 0);
    CHECK(ws.Y(0, 0) == 1.0);
    CHECK(ws.W(0, 0) == doctest::Approx(1.0 / 0.7).epsilon(1e-15));
    CHECK(ws.W_in(0) == 4.0);
    CHECK(ws.W_out(0) == doctest::Approx(0.25 / 0.7).epsilon(1e-15));
    CHECK(ws.r0(0) == 0.7);
    CHECK(ws.yhat0 == 0.25);
    CHECK(ws.rank_W == 1);

    auto const s = step(ws.r0, 0.25, ws);
    CHECK(s.z(0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(s.r(0) == 0.7);
    CHECK(s.y == doctest::Approx(0.25).epsilon(1e-15));
    auto const s2 = step(s.r, s.y, ws);
    CHECK(s2.r(0) == s.r(0));
    CHECK(s2.y == s.y);
}

TEST_CASE("L = 1 gives W = 0")
{
    auto const c = fixture::chebyshev32();
    auto const ws = build_weights(c.dict, c.init, {}, 7, 8);
    CHECK(ws.Y.isZero(0.0));
    CHECK(ws.W.cwiseAbs().maxCoeff() == 0.0);
    CHECK(ws.rank_W == 0);
    CHECK(numerical_rank(ws.W) == 0);
}

TEST_CASE("period-2 weights, rank and one step")
{
    Period2 p;
    auto const ws = build_weights(p.dict, p.init, fixture::table({{2.0, 0.7}, {-2.0, 0.2}}), 0, 0);
    Eigen::MatrixXd Y(2, 2);
    Y << -1, 1, 1, -1;
    CHECK(ws.Y == Y);
    CHECK(ws.rank_W <= 1);
    std::vector<std::vector<double>> wrows{{ws.W(0, 0), ws.W(0, 1)}, {ws.W(1, 0), ws.W(1, 1)}};
    CHECK(oracle::gauss_rank(wrows, 1e-8) == ws.rank_W);
    CHECK(ws.W_in(0) == -4.0);
    CHECK(ws.W_in(1) == 4.0);
    CHECK(ws.r0 == ws.X.col(0));

    auto const s = step(ws.r0, 0.25, ws);
    CHECK(std::abs(s.z(0) + 2.0) <= 1e-12);
    CHECK(std::abs(s.z(1) - 2.0) <= 1e-12);
    CHECK(s.r == ws.X.col(1));
    CHECK(std::abs(s.y + 0.25) <= 1e-12);
}

TEST_CASE("solve identities hold to 1e-10 N")
{
    auto const c = fixture::chebyshev32();
    auto const ws = build_weights(c.dict, c.init, {}, 1, 8);
    double const tol = 1e-10 * ws.N;
    CHECK((ws.W * ws.X - ws.Y).cwiseAbs().maxCoeff() <= tol);
    CHECK((ws.W_out * ws.X - ws.values).cwiseAbs().maxCoeff() <= tol);
    CHECK(ws.wx_residual <= tol);
    CHECK(ws.wout_residual <= tol);
    CHECK(ws.cond_estimate >= 1.0);

    auto const h = make_map("henon");
    double const seed[] = {0.1, 0.1};
    auto const tr = generate(h, seed, 4000, 100, 100);
    double const head[] = {tr.at(-1), tr.at(0)};
    auto const g = build_grid(12, head, 1e-3, 2, 8);
    auto const d = fixture::dictionary_of(tr, g, 2);
    REQUIRE(check_closure(d).closed);
    auto const wh = build_weights(d, fixture::init_of(tr, g, 2), {}, 3, 8);
    CHECK(wh.wx_residual <= 1e-10 * wh.N);
    CHECK(wh.rank_W <= 1);
}

TEST_CASE("runs of the golden fixtures")
{
    auto const g = fixture::uniform4();
    auto const tr = fixture::constant();
    auto const d = fixture::dictionary_of(tr, g, 2);
    auto const ws = build_weights(d, fixture::init_of(tr, g, 2), {}, 0, 4);
    auto const rc = run(ws, 100, d);
    REQUIRE(rc.rows.size() == 101);
    CHECK(rc.status == RunStatus::completed);
    for (auto const& row : rc.rows) {
        CHECK(std::abs(row.yhat - 0.25) <= 1e-12);
        CHECK(row.n_t == 0);
        CHECK(row.onehot_residual <= 1e-12);
    }

    Period2 p;
    auto const wp = build_weights(p.dict, p.init, {}, 0, 4);
    auto const rp = run(wp, 100, p.dict);
    auto const orbit = generate_ystar(p.dict, p.init, 100);
    for (auto const& row : rp.rows) {
        CHECK(std::abs(row.yhat - (row.t % 2 == 0 ? 0.25 : -0.25)) <= 1e-12);
        CHECK(row.n_t == (row.t % 2 == 0 ? 0 : 1));
        CHECK(row.n_t == orbit.entries[static_cast<std::size_t>(row.t)]);
    }
    CHECK_THROWS_AS(run(wp, 0, p.dict), std::invalid_argument);
}

TEST_CASE("chebyshev tabulated run tracks y* exactly")
{
    auto const c = fixture::chebyshev32();
    auto const ws = build_weights(c.dict, c.init, {}, 7, 8);
    auto const rec = run(ws, 1000, c.dict);
    auto const orbit = generate_ystar(c.dict, c.init, 1000);
    REQUIRE(rec.rows.size() == 1001);
    for (auto const& row : rec.rows) {
        CHECK(std::abs(row.yhat - c.grid.point(orbit.index_at(row.t))) <= 1e-12);
        CHECK(row.onehot_residual <= 1e-8);
        CHECK(row.drift <= ws.activation.snap_tolerance());
    }
}

TEST_CASE("snap miss halts the run with its prefix")
{
    Period2 p;
    auto ws = build_weights(p.dict, p.init, {}, 0, 4);
    ws.W.array() += 1e-3;
    try {
        run(ws, 10, p.dict);
        FAIL("expected SnapMiss");
    } catch (SnapMiss const& miss) {
        CHECK(miss.t == 1);
        CHECK(miss.prefix.rows.size() == 1);
        CHECK(miss.prefix.status == RunStatus::snap_miss);
        CHECK(std::abs(miss.fault.z - miss.fault.nearest_gamma) > ws.activation.snap_tolerance());
    }
}

TEST_CASE("analytic mode never diverges silently")
{
    auto map = make_map("chebyshev");
    double const seed[] = {0.3};
    Trajectory const traj = generate(map, seed, 5000, 1000, 100);
    double const head[] = {traj.at(0)};
    Grid const grid = build_grid(8, head, 1e-3, 1, 16);
    Dictionary const dict = fixture::dictionary_of(traj, grid, 1);
    auto const init = fixture::init_of(traj, grid, 1);
    ActivationSpec spec;
    spec.mode = ActivationMode::analytic;
    auto const ws = build_weights(dict, init, spec, 0, 8);
    CHECK(ws.X(0, 0) == std::tanh(1.0 - analytic_offset));
    auto const rec = run(ws, 1000, dict);
    auto const orbit = generate_ystar(dict, init, 1000);
    double const limit = ws.activation.gset().min_gap / 2;
    for (std::size_t i = 0; i < rec.rows.size(); ++i) {
        auto const& row = rec.rows[i];
        bool const last = i + 1 == rec.rows.size();
        if (!last || rec.status == RunStatus::completed) {
            CHECK(row.drift <= limit);
            CHECK(grid.quantize(row.yhat) == orbit.index_at(row.t));
        }
    }
    if (rec.status == RunStatus::drift_exceeded)
        CHECK(rec.rows.back().drift > limit);
    else
        CHECK(rec.rows.size() == 1001);
}

TEST_CASE("analytic h is not odd")
{
    // An odd h would make the period-2 X = [[h(2), h(-2)], [h(-2), h(2)]] singular.
    Period2 p;
    ActivationSpec spec;
    spec.mode = ActivationMode::analytic;
    auto const ws = build_weights(p.dict, p.init, spec, 0, 0);
    CHECK(ws.X(0, 0) == std::tanh(2.0 - analytic_offset));
    CHECK(ws.X(0, 1) == std::tanh(-2.0 - analytic_offset));
    CHECK(check_regularity(ws.X).regular);
    auto const rec = run(ws, 50, p.dict);
    CHECK(rec.status == RunStatus::completed);
    for (auto const& row : rec.rows)
        CHECK(std::abs(std::abs(row.yhat) - 0.25) <= 1e-12);
}

TEST_CASE("analytic X is numerically singular on large dictionaries")
{
    // Smooth kernels of a_j / a_i have rapidly decaying singular values.
    auto const c = fixture::chebyshev32();
    ActivationSpec spec;
    spec.mode = ActivationMode::analytic;
    CHECK_THROWS_AS(build_weights(c.dict, c.init, spec, 0, 4), SingularAfterRetries);
}

TEST_CASE("weight builds are bit-reproducible")
{
    auto const c = fixture::chebyshev32();
    auto const a = build_weights(c.dict, c.init, {}, 21, 8);
    auto const b = build_weights(c.dict, c.init, {}, 21, 8);
    CHECK(bitwise_equal(a.X, b.X));
    CHECK(bitwise_equal(a.W, b.W));
    CHECK(bitwise_equal(a.W_out, b.W_out));
    CHECK(bitwise_equal(a.r0, b.r0));
    auto const ra = run(a, 200, c.dict);
    auto const rb = run(b, 200, c.dict);
    for (std::size_t i = 0; i < ra.rows.size(); ++i) {
        CHECK(std::memcmp(&ra.rows[i].yhat, &rb.rows[i].yhat, sizeof(double)) == 0);
        CHECK(std::memcmp(&ra.rows[i].onehot_residual, &rb.rows[i].onehot_residual, sizeof(double)) == 0);
    }
}

TEST_CASE("property: random h-tables are almost always regular")
{
    auto const c = fixture::chebyshev32(2000, 10);
    auto const s = build_sigma_star(c.dict);
    int regular = 0;
    for (std::uint64_t seed = 100; seed < 130; ++seed)
        regular += check_regularity(assemble_X_G(c.dict, s, {}, seed).X).regular;
    CHECK(regular >= 29);
}
