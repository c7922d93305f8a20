#include "dictrnn/verify.hpp"

#include "dictrnn/errors.hpp"
#include "dictrnn/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace dictrnn {

namespace {

std::string num(double v)
{
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

// Stage names in execution order; a failure blocks everything after it.
std::vector<std::string> const& stage_order()
{
    static std::vector<std::string> const order{
        "config",       "trajectory",     "lipschitz",       "grid_certification",
        "quantization", "dictionary_patterns", "genericity", "closure",
        "x_regularity", "wx_residual",    "rank_bound",      "ystar",
        "tracking",     "onehot_residual", "error_bound",    "bound_monotone_vacuity",
        "ystar_periodicity"};
    return order;
}

void block_after(Ledger& ledger, std::string const& failed)
{
    auto const& order = stage_order();
    auto it = std::find(order.begin(), order.end(), failed);
    if (it == order.end())
        return;
    for (++it; it != order.end(); ++it)
        ledger.block(*it, "blocked by " + failed);
}

} // namespace

std::string to_string(BoundVerdict v)
{
    switch (v) {
    case BoundVerdict::holds: return "holds";
    case BoundVerdict::violated: return "violated";
    case BoundVerdict::inconclusive: return "inconclusive";
    }
    return "unknown";
}

std::string to_string(CheckStatus s)
{
    switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::blocked: return "blocked";
    case CheckStatus::inconclusive: return "inconclusive";
    }
    return "unknown";
}

double tracking_error_bound(long t, double e_lambda, int L, double C, int K)
{
    return (2.0 * static_cast<double>(t) + 1.0) * std::pow(e_lambda, static_cast<double>(t))
           * std::sqrt(static_cast<double>(L)) * C / K;
}

BoundReport check_bound(Trajectory const& traj, RunRecord const& run, SymbolicOrbit const& ystar,
                        Grid const& grid, LipschitzCertificate const& cert, int L)
{
    BoundReport rep;
    bool seen_inactive = false;
    for (auto const& row : run.rows) {
        if (row.t > traj.t_max())
            break;
        BoundRow b;
        b.t = row.t;
        b.y = traj.at(row.t);
        b.ystar = row.t < static_cast<long>(ystar.indices.size()) - ystar.L
                      ? grid.point(ystar.index_at(row.t))
                      : std::numeric_limits<double>::quiet_NaN();
        b.yhat = row.yhat;
        b.abs_err = std::abs(b.yhat - b.y);
        b.bound = tracking_error_bound(row.t, cert.e_lambda, L, grid.radius_x_K, grid.K());
        b.slack = b.bound - b.abs_err;
        b.active = b.bound < 2.0;
        if (seen_inactive && b.active)
            rep.monotone_vacuity = false;
        seen_inactive = seen_inactive || !b.active;
        if (b.active && !(b.slack >= 0.0) && !rep.first_violation)
            rep.first_violation = b.t;
        rep.rows.push_back(b);
    }
    if (rep.first_violation)
        rep.verdict = cert.lower_estimate() ? BoundVerdict::inconclusive : BoundVerdict::violated;
    return rep;
}

void Ledger::add(std::string invariant, CheckStatus status, std::string detail)
{
    lines_.push_back(LedgerLine{std::move(invariant), status, std::move(detail)});
}

void Ledger::block(std::string invariant, std::string const& reason)
{
    add(std::move(invariant), CheckStatus::blocked, reason);
}

bool Ledger::passed() const
{
    return std::none_of(lines_.begin(), lines_.end(), [](LedgerLine const& l) {
        return l.status == CheckStatus::fail || l.status == CheckStatus::blocked;
    });
}

CheckStatus Ledger::status_of(std::string const& invariant) const
{
    for (auto const& l : lines_)
        if (l.invariant == invariant)
            return l.status;
    return CheckStatus::blocked;
}

std::string Ledger::to_jsonl() const
{
    std::string out;
    for (auto const& l : lines_) {
        nlohmann::ordered_json j{{"invariant", l.invariant},
                                 {"status", to_string(l.status)},
                                 {"detail", l.detail}};
        out += j.dump() + "\n";
    }
    return out;
}

void audit_weights(Ledger& ledger, WeightSet const& ws)
{
    double const tol = residual_tolerance_per_unit * ws.N;
    double const worst = std::max(ws.wx_residual, ws.wout_residual);
    ledger.add("wx_residual", worst <= tol ? CheckStatus::pass : CheckStatus::fail,
               "max|WX-Y| = " + num(ws.wx_residual) + ", max|W_out X - a| = "
                   + num(ws.wout_residual) + ", tolerance " + num(tol));
    ledger.add("rank_bound", ws.rank_W <= std::max(ws.L - 1, 0) ? CheckStatus::pass : CheckStatus::fail,
               "numerical rank " + std::to_string(ws.rank_W) + ", L-1 = " + std::to_string(ws.L - 1));
}

Evaluation evaluate(Ledger& ledger, Trajectory const& traj, Grid const& grid,
                    Dictionary const& dict, WeightSet const& ws, LipschitzCertificate const& cert,
                    long horizon)
{
    Evaluation ev;
    try {
        ev.ystar = generate_ystar(dict, ws.init_window, horizon);
        ledger.add("ystar", CheckStatus::pass,
                   "generated " + std::to_string(horizon + 1) + " symbolic steps");
    } catch (MissingKey const& e) {
        ledger.add("ystar", CheckStatus::fail, e.what());
        block_after(ledger, "ystar");
        return ev;
    }

    bool snap_missed = false;
    try {
        ev.run = run(ws, horizon, dict);
    } catch (SnapMiss const& miss) {
        ev.run = miss.prefix;
        snap_missed = true;
    }

    bool const analytic = ws.activation.spec().mode == ActivationMode::analytic;
    double max_err = 0.0;
    long mismatched_entries = 0;
    long symbol_mismatch = 0;
    double max_onehot = 0.0;
    for (auto const& row : ev.run.rows) {
        double const target = grid.point(ev.ystar.index_at(row.t));
        max_err = std::max(max_err, std::abs(row.yhat - target));
        if (row.n_t != ev.ystar.entries[static_cast<std::size_t>(row.t)])
            ++mismatched_entries;
        if (grid.quantize(row.yhat) != ev.ystar.index_at(row.t))
            ++symbol_mismatch;
        max_onehot = std::max(max_onehot, row.onehot_residual);
    }
    std::string const steps = std::to_string(ev.run.rows.size()) + " rows";
    if (snap_missed) {
        ledger.add("tracking", CheckStatus::fail, ev.run.message);
    } else if (analytic) {
        CheckStatus st = symbol_mismatch == 0 ? CheckStatus::pass : CheckStatus::fail;
        std::string detail = "symbolic agreement over " + steps + ", max|yhat-y*| = " + num(max_err);
        if (ev.run.status == RunStatus::drift_exceeded) {
            if (st == CheckStatus::pass)
                st = CheckStatus::inconclusive;
            detail += "; " + ev.run.message;
        }
        ledger.add("tracking", st, detail);
    } else {
        bool const ok = max_err <= tracking_tolerance && mismatched_entries == 0;
        ledger.add("tracking", ok ? CheckStatus::pass : CheckStatus::fail,
                   "max|yhat-y*| = " + num(max_err) + " over " + steps + ", entry mismatches "
                       + std::to_string(mismatched_entries));
    }
    ledger.add("onehot_residual", max_onehot <= onehot_tolerance ? CheckStatus::pass : CheckStatus::fail,
               "max ||X^-1 r - e_n||_inf = " + num(max_onehot));

    ev.bound = check_bound(traj, ev.run, ev.ystar, grid, cert, dict.L());
    long active = std::count_if(ev.bound.rows.begin(), ev.bound.rows.end(),
                                [](BoundRow const& r) { return r.active; });
    std::string bound_detail = std::to_string(active) + " active rows, e_lambda = "
                               + num(cert.e_lambda) + " (" + to_string(cert.method) + ")";
    if (ev.bound.first_violation)
        bound_detail += ", first violation at t = " + std::to_string(*ev.bound.first_violation);
    CheckStatus const bound_status = ev.bound.verdict == BoundVerdict::holds ? CheckStatus::pass
                                     : ev.bound.verdict == BoundVerdict::violated
                                         ? CheckStatus::fail
                                         : CheckStatus::inconclusive;
    if (ev.bound.verdict == BoundVerdict::inconclusive)
        bound_detail += " (inconclusive: Lipschitz underestimate possible)";
    ledger.add("error_bound", bound_status, bound_detail);
    ledger.add("bound_monotone_vacuity",
               ev.bound.monotone_vacuity ? CheckStatus::pass : CheckStatus::fail,
               "bound never re-enters the active range once >= 2");

    long const period = ev.ystar.period;
    if (period >= 1 && period <= dict.N()) {
        ledger.add("ystar_periodicity", CheckStatus::pass,
                   "preperiod " + std::to_string(ev.ystar.preperiod) + ", period "
                       + std::to_string(period) + " <= N = " + std::to_string(dict.N()));
    } else if (period == 0 && horizon < dict.N()) {
        ledger.add("ystar_periodicity", CheckStatus::inconclusive,
                   "horizon shorter than N; no repeat observed yet");
    } else {
        ledger.add("ystar_periodicity", CheckStatus::fail,
                   "period " + std::to_string(period) + " with N = " + std::to_string(dict.N()));
    }
    return ev;
}

LipschitzCertificate certify_lipschitz(ExperimentConfig const& config, DelayMap const& map)
{
    bool const analytic = config.lipschitz == LipschitzChoice::analytic
                          || (config.lipschitz == LipschitzChoice::automatic
                              && map.analytic_lipschitz.has_value());
    return lipschitz(map, analytic ? LipschitzMethod::analytic : LipschitzMethod::sampled,
                     config.lipschitz_pairs, config.lipschitz_seed);
}

namespace {

// Both clauses of the pattern condition plus the next-value rule, checked
// directly against the quantized training series.
std::optional<std::string> pattern_defect(Dictionary const& dict, QuantizedSeries const& q)
{
    int const L = dict.L();
    Key key(static_cast<std::size_t>(L));
    long windows = 0;
    for (long t = 0; t - L >= q.t_begin; --t, ++windows) {
        for (int l = 1; l <= L; ++l)
            key[static_cast<std::size_t>(l - 1)] = q.at(t - l);
        if (!dict.find(key))
            return "training window at t = " + std::to_string(t) + " has no entry";
    }
    for (int n = 0; n < dict.N(); ++n) {
        auto const& e = dict.entry(n);
        for (int l = 1; l <= L; ++l)
            if (q.at(e.provenance - l) != e.key[static_cast<std::size_t>(l - 1)])
                return "entry " + std::to_string(n) + " key differs from its provenance window";
        if (q.at(e.provenance) != e.value_index)
            return "entry " + std::to_string(n) + " value differs from y(t')";
    }
    double const cap = std::min(std::pow(static_cast<double>(dict.K()), L), static_cast<double>(windows));
    if (dict.N() > cap)
        return "N = " + std::to_string(dict.N()) + " exceeds min(K^L, windows)";
    return std::nullopt;
}

} // namespace

void build_symbolic_stage(PipelineResult& result, ExperimentConfig const& config)
{
    auto& ledger = result.ledger;
    Trajectory const& traj = *result.trajectory;
    int const L = config.delay_map().L;
    std::vector<double> head;
    for (long t = -L + 1; t <= 0; ++t)
        head.push_back(traj.at(t));

    int rejitters = 0;
    for (int g = 0;; ++g) {
        std::uint64_t const seed = g == 0 ? config.grid_seed
                                          : derive_seed(config.grid_seed, 0x47454e00ULL + static_cast<std::uint64_t>(g));
        Grid grid;
        try {
            grid = build_grid(config.K, head, config.jitter_scale, seed, config.grid_retries);
        } catch (RetriesExhausted const& e) {
            ledger.add("grid_certification", CheckStatus::fail, e.what());
            block_after(ledger, "grid_certification");
            return;
        }

        QuantizedSeries const q = quantize_series(traj, grid, traj.t_min(), 0);
        Dictionary dict = build_dictionary(q, grid, L);
        GenericityReport const gen = check_genericity(dict);
        if (!gen.generic && g < config.grid_retries) {
            ++rejitters;
            continue;
        }

        ledger.add("grid_certification", CheckStatus::pass,
                   "K = " + std::to_string(grid.K()) + ", C = radius_x_K = " + num(grid.radius_x_K)
                       + ", jitter retries " + std::to_string(grid.retries_used)
                       + ", genericity re-jitters " + std::to_string(rejitters));

        double max_q = 0.0;
        for (long t = q.t_begin; t <= q.t_end(); ++t)
            max_q = std::max(max_q, std::abs(traj.at(t) - grid.point(q.at(t))));
        ledger.add("quantization", max_q <= grid.radius() ? CheckStatus::pass : CheckStatus::fail,
                   "max|y - a| = " + num(max_q) + " <= C/K = " + num(grid.radius()));

        auto const defect = pattern_defect(dict, q);
        ledger.add("dictionary_patterns", defect ? CheckStatus::fail : CheckStatus::pass,
                   defect ? *defect : "N = " + std::to_string(dict.N()));

        result.grid = grid;
        if (!gen.generic) {
            ledger.add("genericity", CheckStatus::fail,
                       "pair (" + std::to_string(gen.worst_pair->first) + ", "
                           + std::to_string(gen.worst_pair->second) + ") gap " + num(gen.worst_gap));
            block_after(ledger, "genericity");
            result.dictionary = std::move(dict);
            return;
        }
        ledger.add("genericity", CheckStatus::pass,
                   gen.worst_pair ? "worst gap " + num(gen.worst_gap) : "single key");

        ClosureReport const closure = check_closure(dict);
        result.dictionary = std::move(dict);
        if (!closure.closed) {
            auto const& [n, missing] = closure.failing_keys.front();
            ledger.add("closure", CheckStatus::fail,
                       std::to_string(closure.failing_keys.size()) + " open entries; entry "
                           + std::to_string(n) + " successor " + format_key(missing)
                           + " unseen (increase train_len or change K/grid_seed)");
            block_after(ledger, "closure");
            return;
        }
        ledger.add("closure", CheckStatus::pass, "every successor key present");
        return;
    }
}

PipelineResult full_suite(ExperimentConfig const& config)
{
    PipelineResult result;
    auto& ledger = result.ledger;

    DelayMap map;
    try {
        config.validate();
        map = config.delay_map();
        ledger.add("config", CheckStatus::pass, "map " + config.map);
    } catch (ConfigError const& e) {
        ledger.add("config", CheckStatus::fail, e.what());
        block_after(ledger, "config");
        return result;
    }

    try {
        auto const window = config.resolved_seed_window();
        result.trajectory = generate(map, window, config.train_len, config.eval_len, config.burn_in);
        ledger.add("trajectory", CheckStatus::pass,
                   std::to_string(result.trajectory->values.size()) + " values");
    } catch (DomainEscape const& e) {
        ledger.add("trajectory", CheckStatus::fail, e.what());
        block_after(ledger, "trajectory");
        return result;
    }

    result.certificate = certify_lipschitz(config, map);
    ledger.add("lipschitz", CheckStatus::pass,
               "e_lambda = " + num(result.certificate->e_lambda) + " ("
                   + to_string(result.certificate->method) + ")");

    build_symbolic_stage(result, config);
    if (ledger.status_of("closure") != CheckStatus::pass)
        return result;

    Dictionary const& dict = *result.dictionary;
    QuantizedSeries const q = quantize_series(*result.trajectory, *result.grid, -dict.L(), 0);
    ActivationSpec spec;
    spec.mode = config.activation;
    spec.beta = config.beta;
    spec.snap_tolerance = config.snap_tolerance;
    try {
        result.weights = build_weights(dict, initial_window(q, dict.L()), spec, config.h_seed,
                                       config.max_retries);
        ledger.add("x_regularity", CheckStatus::pass,
                   "N = " + std::to_string(dict.N()) + ", cond ~ " + num(result.weights->cond_estimate)
                       + ", retries " + std::to_string(result.weights->retries_used));
    } catch (Error const& e) {
        ledger.add("x_regularity", CheckStatus::fail, e.what());
        block_after(ledger, "x_regularity");
        return result;
    }

    audit_weights(ledger, *result.weights);
    result.evaluation = evaluate(ledger, *result.trajectory, *result.grid, dict, *result.weights,
                                 *result.certificate, config.horizon);
    return result;
}

} // namespace dictrnn
