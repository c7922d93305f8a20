#include "dictrnn/rnn.hpp"

#include "dictrnn/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace dictrnn {

namespace {

constexpr double pivot_rel_threshold = 1e-12;
constexpr double default_snap = 1e-6;
constexpr std::uint64_t table_stream = 0x48544142;

double resolve_snap(double requested, double min_gap)
{
    if (requested > 0.0)
        return requested;
    return std::min(default_snap, min_gap / 4.0);
}

double max_abs(Eigen::MatrixXd const& m)
{
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

} // namespace

std::string to_string(ActivationMode mode)
{
    return mode == ActivationMode::tabulated ? "tabulated" : "analytic";
}

ActivationMode activation_mode_from_string(std::string const& s)
{
    if (s == "tabulated")
        return ActivationMode::tabulated;
    if (s == "analytic")
        return ActivationMode::analytic;
    throw std::invalid_argument("unknown activation mode '" + s + "'");
}

std::string to_string(RunStatus s)
{
    switch (s) {
    case RunStatus::completed: return "completed";
    case RunStatus::drift_exceeded: return "drift_exceeded";
    case RunStatus::snap_miss: return "snap_miss";
    }
    return "unknown";
}

int GSet::nearest(double z) const
{
    if (gammas.empty())
        throw std::logic_error("empty G set");
    auto it = std::lower_bound(gammas.begin(), gammas.end(), z);
    if (it == gammas.end())
        return static_cast<int>(gammas.size()) - 1;
    if (it == gammas.begin())
        return 0;
    auto prev = std::prev(it);
    return static_cast<int>((z - *prev <= *it - z ? prev : it) - gammas.begin());
}

GSet collect_gset(Eigen::MatrixXd const& args, int L, double merge_tolerance)
{
    std::vector<double> all(args.data(), args.data() + args.size());
    std::sort(all.begin(), all.end());
    GSet g;
    for (double v : all) {
        if (g.gammas.empty() || v - g.gammas.back() > merge_tolerance)
            g.gammas.push_back(v);
    }
    g.min_gap = std::numeric_limits<double>::infinity();
    for (std::size_t m = 1; m < g.gammas.size(); ++m)
        g.min_gap = std::min(g.min_gap, g.gammas[m] - g.gammas[m - 1]);
    if (!g.gammas.empty()) {
        int const m = g.nearest(static_cast<double>(L));
        if (std::abs(g.gammas[static_cast<std::size_t>(m)] - L) <= merge_tolerance) {
            g.gammas[static_cast<std::size_t>(m)] = static_cast<double>(L);
            g.contains_L_at = m;
        }
    }
    return g;
}

Activation::Activation(ActivationSpec spec, GSet gset) : spec_{std::move(spec)}, gset_{std::move(gset)}
{
    spec_.snap_tolerance = resolve_snap(spec_.snap_tolerance, gset_.min_gap);
    if (spec_.mode == ActivationMode::analytic)
        return;

    if (!(gset_.min_gap > 2.0 * spec_.snap_tolerance)) {
        std::ostringstream os;
        os.precision(17);
        os << "smallest gamma spacing " << gset_.min_gap << " is not above twice the snap tolerance "
           << spec_.snap_tolerance;
        throw GapTooSmall{os.str()};
    }
    values_.assign(gset_.gammas.size(), std::numeric_limits<double>::quiet_NaN());
    for (auto const& [gamma, value] : spec_.table) {
        if (!(std::abs(value) <= 1.0))
            throw std::invalid_argument("tabulated activation values must lie in [-1, 1]");
        int const m = gset_.nearest(gamma);
        if (std::abs(gset_.gammas[static_cast<std::size_t>(m)] - gamma) <= spec_.snap_tolerance)
            values_[static_cast<std::size_t>(m)] = value;
    }
    for (std::size_t m = 0; m < values_.size(); ++m) {
        if (std::isnan(values_[m])) {
            std::ostringstream os;
            os.precision(17);
            os << "activation table has no value for gamma " << gset_.gammas[m];
            throw std::invalid_argument(os.str());
        }
    }
}

std::optional<double> Activation::operator()(double z) const
{
    if (spec_.mode == ActivationMode::analytic)
        return std::tanh(spec_.beta * z - analytic_offset);
    int const m = gset_.nearest(z);
    if (!(std::abs(z - gset_.gammas[static_cast<std::size_t>(m)]) <= spec_.snap_tolerance))
        return std::nullopt;
    return values_[static_cast<std::size_t>(m)];
}

Eigen::MatrixXd build_sigma_star(Dictionary const& dict)
{
    Eigen::MatrixXd s(dict.N(), dict.L());
    for (int n = 0; n < dict.N(); ++n)
        for (int l = 1; l <= dict.L(); ++l)
            s(n, l - 1) = 1.0 / dict.key_value(n, l);
    return s;
}

Eigen::MatrixXd pre_activation_arguments(Dictionary const& dict, Eigen::MatrixXd const& sigma_star)
{
    int const N = dict.N();
    int const L = dict.L();
    Eigen::MatrixXd args(N, N);
    for (int i = 0; i < N; ++i) {
        for (int j = 0; j < N; ++j) {
            double sum = 0.0;
            for (int l = 1; l <= L; ++l)
                sum += sigma_star(i, l - 1) * dict.key_value(j, l);
            args(i, j) = sum;
        }
    }
    return args;
}

Assembly assemble_X_G(Dictionary const& dict, Eigen::MatrixXd const& sigma_star,
                      ActivationSpec spec, std::uint64_t h_seed)
{
    Assembly a;
    a.args = pre_activation_arguments(dict, sigma_star);
    GSet g = collect_gset(a.args, dict.L());

    if (spec.mode == ActivationMode::tabulated && spec.table.empty()) {
        Uniform u{derive_seed(h_seed, table_stream)};
        for (double gamma : g.gammas)
            spec.table.emplace_back(gamma, u(-1.0, 1.0));
    }
    a.activation = Activation{std::move(spec), std::move(g)};

    auto const& act = a.activation;
    int const N = dict.N();
    a.X.resize(N, N);
    for (int i = 0; i < N; ++i) {
        for (int j = 0; j < N; ++j) {
            double const z = a.args(i, j);
            a.X(i, j) = act.spec().mode == ActivationMode::analytic
                            ? *act(z)
                            : act.table_value(act.gset().nearest(z));
        }
    }
    return a;
}

RegularityReport check_regularity(Eigen::MatrixXd const& X)
{
    RegularityReport rep;
    if (X.rows() == 0 || X.rows() != X.cols())
        return rep;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(X);
    rep.min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    rep.pivot_threshold = pivot_rel_threshold * max_abs(X);
    rep.regular = rep.pivot_threshold > 0.0 && rep.min_pivot > rep.pivot_threshold;
    double const rcond = lu.rcond();
    rep.cond_estimate = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
    return rep;
}

int numerical_rank(Eigen::MatrixXd const& M, double rel)
{
    if (M.size() == 0)
        return 0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    auto const& sv = svd.singularValues();
    double const top = sv.size() ? sv(0) : 0.0;
    if (top == 0.0)
        return 0;
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > rel * top)
            ++rank;
    return rank;
}

WeightSet solve_weights(Dictionary const& dict, Eigen::MatrixXd const& sigma_star,
                        Assembly assembly, std::span<const int> init_window)
{
    int const N = dict.N();
    int const L = dict.L();
    if (static_cast<int>(init_window.size()) != L + 1)
        throw std::invalid_argument("initial window must hold L + 1 indices");
    Key init_key(init_window.begin() + 1, init_window.end());
    if (!dict.find(init_key))
        throw MissingKey{"initial window " + format_key(init_key) + " is not a dictionary key"};

    WeightSet ws;
    ws.N = N;
    ws.L = L;
    ws.K = dict.K();
    ws.X = std::move(assembly.X);
    ws.activation = std::move(assembly.activation);
    ws.init_window.assign(init_window.begin(), init_window.end());

    ws.Y = Eigen::MatrixXd::Zero(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            for (int l = 1; l <= L - 1; ++l)
                ws.Y(i, j) += sigma_star(i, l) * dict.key_value(j, l);

    ws.values.resize(N);
    for (int n = 0; n < N; ++n)
        ws.values(n) = dict.value(n);

    ws.lu.compute(ws.X);
    Eigen::PartialPivLU<Eigen::MatrixXd> const luT(ws.X.transpose());

    // W X = Y  <=>  X^T W^T = Y^T, plus one refinement sweep.
    Eigen::MatrixXd Wt = luT.solve(ws.Y.transpose());
    Wt += luT.solve((ws.Y - Wt.transpose() * ws.X).transpose());
    ws.W = Wt.transpose();

    Eigen::VectorXd wo = luT.solve(ws.values.transpose());
    wo += luT.solve((ws.values - wo.transpose() * ws.X).transpose());
    ws.W_out = wo.transpose();

    ws.W_in = sigma_star.col(0);

    ws.r0_args.resize(N);
    ws.r0.resize(N);
    for (int i = 0; i < N; ++i) {
        double sum = 0.0;
        for (int l = 1; l <= L; ++l)
            sum += sigma_star(i, l - 1) * dict.grid().point(init_window[static_cast<std::size_t>(l)]);
        ws.r0_args(i) = sum;
        auto h = ws.activation(sum);
        if (!h)
            throw MissingKey{"initial pre-activation argument is outside G"};
        ws.r0(i) = *h;
    }
    ws.yhat0 = dict.grid().point(init_window[0]);

    ws.cond_estimate = check_regularity(ws.X).cond_estimate;
    ws.rank_W = numerical_rank(ws.W);
    ws.wx_residual = max_abs(ws.W * ws.X - ws.Y);
    ws.wout_residual = max_abs(ws.W_out * ws.X - ws.values);
    return ws;
}

WeightSet build_weights(Dictionary const& dict, std::span<const int> init_window,
                        ActivationSpec const& spec, std::uint64_t h_seed, int max_retries)
{
    if (max_retries < 0)
        throw std::invalid_argument("max_retries must be non-negative");
    Eigen::MatrixXd const sigma_star = build_sigma_star(dict);
    for (int attempt = 0; attempt <= max_retries; ++attempt) {
        ActivationSpec trial = spec;
        std::uint64_t const seed = attempt == 0 ? h_seed : derive_seed(h_seed, static_cast<std::uint64_t>(attempt));
        if (attempt > 0) {
            if (trial.mode == ActivationMode::tabulated)
                trial.table.clear();
            else
                trial.beta = spec.beta * (1.0 + 0.01 * attempt);
        }
        Assembly a = assemble_X_G(dict, sigma_star, std::move(trial), seed);
        if (!check_regularity(a.X).regular)
            continue;
        WeightSet ws = solve_weights(dict, sigma_star, std::move(a), init_window);
        ws.h_seed = h_seed;
        ws.retries_used = attempt;
        return ws;
    }
    throw SingularAfterRetries{"X stayed singular after " + std::to_string(max_retries)
                               + " redraws of h"};
}

void refresh_factorization(WeightSet& ws)
{
    ws.lu.compute(ws.X);
    ws.cond_estimate = check_regularity(ws.X).cond_estimate;
    ws.rank_W = numerical_rank(ws.W);
    ws.wx_residual = ws.Y.size() ? max_abs(ws.W * ws.X - ws.Y) : 0.0;
    ws.wout_residual = max_abs(ws.W_out * ws.X - ws.values);
}

StepResult step(Eigen::VectorXd const& r, double y_in, WeightSet const& ws)
{
    StepResult out;
    out.z = ws.W * r + ws.W_in * y_in;
    out.r.resize(out.z.size());
    auto const& act = ws.activation;
    for (Eigen::Index i = 0; i < out.z.size(); ++i) {
        double const z = out.z(i);
        int const m = act.gset().nearest(z);
        double const gamma = act.gset().gammas[static_cast<std::size_t>(m)];
        out.drift = std::max(out.drift, std::abs(z - gamma));
        auto h = act(z);
        if (!h) {
            out.fault = SnapFault{static_cast<int>(i), z, gamma};
            return out;
        }
        out.r(i) = *h;
    }
    out.y = ws.W_out.dot(out.r);
    return out;
}

SnapMiss::SnapMiss(long t, SnapFault fault, RunRecord prefix)
  : Error{[&] {
        std::ostringstream os;
        os.precision(17);
        os << "snap miss at t = " << t << ", unit " << fault.unit << ": z = " << fault.z
           << ", nearest gamma " << fault.nearest_gamma;
        return os.str();
    }()},
    t{t}, fault{fault}, prefix{std::move(prefix)}
{}

namespace {

int match_entry(Dictionary const& dict, std::vector<int> const& history, long t, int L)
{
    // history[0] holds time -L
    Key key(static_cast<std::size_t>(L));
    for (int l = 1; l <= L; ++l)
        key[static_cast<std::size_t>(l - 1)] = history[static_cast<std::size_t>(t - l + L)];
    auto n = dict.find(key);
    return n ? *n : -1;
}

double onehot_residual(WeightSet const& ws, Eigen::VectorXd const& r, int n)
{
    if (n < 0)
        return std::numeric_limits<double>::infinity();
    Eigen::VectorXd coef = ws.lu.solve(r);
    coef(n) -= 1.0;
    return coef.cwiseAbs().maxCoeff();
}

} // namespace

RunRecord run(WeightSet const& ws, long T, Dictionary const& dict)
{
    if (T < 1)
        throw std::invalid_argument("run horizon must be at least 1");
    int const L = ws.L;
    auto const& grid = dict.grid();
    auto const& gset = ws.activation.gset();
    double const drift_limit = gset.min_gap / 2.0;
    bool const analytic = ws.activation.spec().mode == ActivationMode::analytic;

    RunRecord rec;
    rec.rows.reserve(static_cast<std::size_t>(T + 1));
    std::vector<int> history(ws.init_window.rbegin(), ws.init_window.rend());
    history.reserve(static_cast<std::size_t>(T + L + 1));

    Eigen::VectorXd r = ws.r0;
    double yhat = ws.yhat0;
    double drift0 = 0.0;
    for (Eigen::Index i = 0; i < ws.r0_args.size(); ++i)
        drift0 = std::max(drift0, std::abs(ws.r0_args(i)
                                           - gset.gammas[static_cast<std::size_t>(gset.nearest(ws.r0_args(i)))]));
    int n = match_entry(dict, history, 0, L);
    rec.rows.push_back(RunRow{0, yhat, n, onehot_residual(ws, r, n), drift0});

    for (long t = 1; t <= T; ++t) {
        StepResult s = step(r, yhat, ws);
        if (s.fault) {
            rec.status = RunStatus::snap_miss;
            SnapMiss miss{t, *s.fault, RunRecord{}};
            rec.message = miss.what();
            miss.prefix = std::move(rec);
            throw miss;
        }
        r = std::move(s.r);
        yhat = s.y;
        n = match_entry(dict, history, t, L);
        history.push_back(grid.quantize(yhat));
        rec.rows.push_back(RunRow{t, yhat, n, onehot_residual(ws, r, n), s.drift});
        if (analytic && s.drift > drift_limit) {
            rec.status = RunStatus::drift_exceeded;
            std::ostringstream os;
            os.precision(17);
            os << "pre-activation drift " << s.drift << " exceeded half the gamma spacing at t = " << t;
            rec.message = os.str();
            break;
        }
    }
    return rec;
}

} // namespace dictrnn
