#include "dictrnn/harness.hpp"

#include "dictrnn/errors.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace {

struct CommonOptions {
    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<std::string> out;
    std::optional<std::string> map;
    std::optional<int> K;
    std::optional<long> horizon;
};

void add_common(CLI::App* cmd, CommonOptions& o)
{
    cmd->add_option("-c,--config", o.config_path, "Experiment config (JSON)");
    cmd->add_option("--set", o.overrides, "Override a config key: key=value (JSON value)");
    cmd->add_option("-o,--out", o.out, "Output directory");
    cmd->add_option("--map", o.map, "Delay map name");
    cmd->add_option("-K", o.K, "Grid size");
    cmd->add_option("-T,--horizon", o.horizon, "Run horizon");
}

dictrnn::ExperimentConfig resolve(CommonOptions const& o)
{
    dictrnn::ExperimentConfig c;
    if (!o.config_path.empty())
        c = dictrnn::load_config(o.config_path);
    if (o.map)
        c.map = *o.map;
    if (o.K)
        c.K = *o.K;
    if (o.horizon)
        c.horizon = *o.horizon;
    if (o.out)
        c.out_dir = *o.out;
    for (auto const& kv : o.overrides)
        dictrnn::apply_override(c, kv);
    return c;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Explicit dictionary RNN for delay-coordinate dynamical systems"};
    app.require_subcommand(1);

    CommonOptions opts;
    auto* gen = app.add_subcommand("generate", "Generate the ground-truth trajectory");
    auto* build = app.add_subcommand("build", "Build grid, dictionary and network weights");
    auto* run = app.add_subcommand("run", "Run a built network and check every invariant");
    auto* verify = app.add_subcommand("verify", "End-to-end invariant suite in memory");
    auto* report = app.add_subcommand("report", "Summarize an output directory");
    for (auto* cmd : {gen, build, run, verify, report})
        add_common(cmd, opts);
    std::string report_dir;
    report->add_option("dir", report_dir, "Output directory to summarize");

    CLI11_PARSE(app, argc, argv);

    try {
        if (report->parsed()) {
            if (!report_dir.empty())
                return dictrnn::cmd_report(report_dir, std::cout);
            return dictrnn::cmd_report(dictrnn::output_dir(resolve(opts)), std::cout);
        }
        auto const config = resolve(opts);
        if (gen->parsed())
            return dictrnn::cmd_generate(config, std::cout);
        if (build->parsed())
            return dictrnn::cmd_build(config, std::cout);
        if (run->parsed())
            return dictrnn::cmd_run(config, std::cout);
        return dictrnn::cmd_verify(config, std::cout);
    } catch (dictrnn::ConfigError const& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (dictrnn::ChecksumMismatch const& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (std::exception const& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
