#include "dictrnn/harness.hpp"

#include "dictrnn/errors.hpp"
#include "dictrnn/verify.hpp"

#include <cstdlib>
#include <ostream>
#include <sstream>

namespace dictrnn {

using nlohmann::json;

namespace {

Trajectory load_trajectory(fs::path const& dir)
{
    if (!fs::exists(dir / "trajectory.csv") || !fs::exists(dir / "trajectory.json"))
        throw FormatError{"no trajectory in " + dir.string() + " (run 'generate' first)"};
    return trajectory_from_files(read_file(dir / "trajectory.csv"),
                                 json::parse(read_file(dir / "trajectory.json")));
}

void print_ledger(Ledger const& ledger, std::ostream& log)
{
    for (auto const& l : ledger.lines())
        log << "  [" << to_string(l.status) << "] " << l.invariant << ": " << l.detail << "\n";
}

} // namespace

fs::path output_dir(ExperimentConfig const& config)
{
    fs::path p{config.out_dir};
    if (p.is_relative()) {
        if (char const* root = std::getenv(out_root_env); root && *root)
            return fs::path{root} / p;
    }
    return p;
}

ExperimentConfig load_config(fs::path const& path)
{
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (json::exception const& e) {
        throw ConfigError{"<file>", std::string{"invalid JSON: "} + e.what()};
    }
    return config_from_json(j);
}

int cmd_generate(ExperimentConfig const& config, std::ostream& log)
{
    config.validate();
    Trajectory const traj = generate(config.delay_map(), config.resolved_seed_window(),
                                     config.train_len, config.eval_len, config.burn_in);
    fs::path const dir = output_dir(config);
    write_file(dir / "trajectory.csv", trajectory_csv(traj));
    write_file(dir / "trajectory.json", trajectory_meta(traj).dump(2) + "\n");
    log << "wrote " << traj.values.size() << " values (t = " << traj.t_min() << " .. "
        << traj.t_max() << ") to " << (dir / "trajectory.csv").string() << "\n";
    return 0;
}

int cmd_build(ExperimentConfig const& config, std::ostream& log)
{
    config.validate();
    fs::path const dir = output_dir(config);
    PipelineResult staged;
    staged.trajectory = load_trajectory(dir);
    if (staged.trajectory->map_name != config.map)
        throw ConfigError{"map", "trajectory in " + dir.string() + " was generated by '"
                                     + staged.trajectory->map_name + "'"};
    build_symbolic_stage(staged, config);
    if (staged.ledger.status_of("closure") != CheckStatus::pass) {
        log << "build failed:\n";
        print_ledger(staged.ledger, log);
        log << "hint: increase train_len, or change K / grid_seed\n";
        return 2;
    }

    Dictionary const& dict = *staged.dictionary;
    QuantizedSeries const q = quantize_series(*staged.trajectory, *staged.grid, -dict.L(), 0);
    ActivationSpec spec;
    spec.mode = config.activation;
    spec.beta = config.beta;
    spec.snap_tolerance = config.snap_tolerance;
    WeightSet ws;
    try {
        ws = build_weights(dict, initial_window(q, dict.L()), spec, config.h_seed, config.max_retries);
    } catch (Error const& e) {
        log << "build failed: " << e.what() << "\nhint: change h_seed or raise max_retries\n";
        return 2;
    }
    save_artifact(dir, dict, ws, config);
    log << "built N = " << ws.N << " (K = " << ws.K << ", L = " << ws.L << "), cond ~ "
        << ws.cond_estimate << ", rank(W) = " << ws.rank_W << ", grid retries "
        << dict.grid().retries_used << ", h retries " << ws.retries_used << "\n";
    return 0;
}

int cmd_run(ExperimentConfig const& config, std::ostream& log)
{
    config.validate();
    fs::path const dir = output_dir(config);
    Artifact art = load_artifact(dir);
    Trajectory const traj = load_trajectory(dir);
    DelayMap const map = config.delay_map();
    LipschitzCertificate const cert = certify_lipschitz(config, map);

    Ledger ledger;
    ledger.add("artifact_checksum", CheckStatus::pass, "weights and dictionary match manifest");
    GenericityReport const gen = check_genericity(art.dictionary);
    ledger.add("genericity", gen.generic ? CheckStatus::pass : CheckStatus::fail,
               "worst gap " + format_double(gen.worst_gap));
    ClosureReport const closure = check_closure(art.dictionary);
    ledger.add("closure", closure.closed ? CheckStatus::pass : CheckStatus::fail,
               std::to_string(closure.failing_keys.size()) + " open entries");
    audit_weights(ledger, art.weights);
    Evaluation const ev = evaluate(ledger, traj, art.dictionary.grid(), art.dictionary, art.weights,
                                   cert, config.horizon);

    write_file(dir / "run.csv", run_record_csv(ev.run));
    write_file(dir / "bound.csv", bound_report_csv(ev.bound));
    write_file(dir / "ledger.jsonl", ledger.to_jsonl());
    print_ledger(ledger, log);
    log << (ledger.passed() ? "all invariants hold" : "some invariants failed") << "\n";
    return ledger.passed() ? 0 : 1;
}

int cmd_verify(ExperimentConfig const& config, std::ostream& log)
{
    config.validate();
    PipelineResult const result = full_suite(config);
    fs::path const dir = output_dir(config);
    write_file(dir / "verify_ledger.jsonl", result.ledger.to_jsonl());
    if (result.evaluation) {
        write_file(dir / "verify_run.csv", run_record_csv(result.evaluation->run));
        write_file(dir / "verify_bound.csv", bound_report_csv(result.evaluation->bound));
    }
    print_ledger(result.ledger, log);
    log << (result.ledger.passed() ? "suite passed" : "suite failed") << "\n";
    return result.ledger.passed() ? 0 : 1;
}

int cmd_report(fs::path const& dir, std::ostream& log)
{
    bool any = false;
    if (fs::exists(dir / "manifest.json")) {
        any = true;
        json const m = json::parse(read_file(dir / "manifest.json"));
        log << "artifact: N = " << m.at("N") << ", L = " << m.at("L") << ", K = " << m.at("K")
            << ", mode " << m.at("mode").get<std::string>() << ", cond ~ " << m.at("cond_estimate")
            << ", rank(W) = " << m.at("rank_W") << "\n";
    }
    for (char const* name : {"ledger.jsonl", "verify_ledger.jsonl"}) {
        if (!fs::exists(dir / name))
            continue;
        any = true;
        std::istringstream in(read_file(dir / name));
        std::string line;
        int pass = 0, total = 0;
        log << name << ":\n";
        while (std::getline(in, line)) {
            if (line.empty())
                continue;
            json const j = json::parse(line);
            ++total;
            pass += j.at("status") == "pass";
            log << "  " << j.at("status").get<std::string>() << "\t"
                << j.at("invariant").get<std::string>() << "\t" << j.at("detail").get<std::string>()
                << "\n";
        }
        log << "  " << pass << "/" << total << " pass\n";
    }
    for (char const* name : {"bound.csv", "verify_bound.csv"}) {
        if (!fs::exists(dir / name))
            continue;
        any = true;
        std::istringstream in(read_file(dir / name));
        std::string line;
        std::getline(in, line);
        long active = 0;
        double max_err = 0.0;
        while (std::getline(in, line)) {
            std::vector<std::string> cells;
            std::stringstream ls(line);
            for (std::string c; std::getline(ls, c, ',');)
                cells.push_back(c);
            if (cells.size() != 8)
                continue;
            max_err = std::max(max_err, parse_double(cells[4]));
            active += cells[7] == "1";
        }
        log << name << ": " << active << " active bound rows, max |yhat - y| = " << max_err << "\n";
    }
    if (!any) {
        log << "nothing to report in " << dir.string() << "\n";
        return 1;
    }
    return 0;
}

} // namespace dictrnn
