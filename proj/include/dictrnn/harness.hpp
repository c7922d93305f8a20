#pragma once

// Command implementations behind the dictrnn CLI. Each returns a process
// exit code and writes human-readable progress to `log`.

#include "dictrnn/config.hpp"
#include "dictrnn/io.hpp"

#include <iosfwd>

namespace dictrnn {

inline constexpr char const* out_root_env = "DICTRNN_OUT_ROOT";

/// config.out_dir, prefixed by $DICTRNN_OUT_ROOT when relative.
fs::path output_dir(ExperimentConfig const& config);

ExperimentConfig load_config(fs::path const& path);

/// trajectory.csv + trajectory.json
int cmd_generate(ExperimentConfig const& config, std::ostream& log);
/// dictionary.json, weights.bin, manifest.json from an existing trajectory.
int cmd_build(ExperimentConfig const& config, std::ostream& log);
/// run.csv, bound.csv, ledger.jsonl from an existing artifact.
int cmd_run(ExperimentConfig const& config, std::ostream& log);
/// In-memory end-to-end suite; writes verify_ledger.jsonl.
int cmd_verify(ExperimentConfig const& config, std::ostream& log);
/// Summarizes the files in an output directory.
int cmd_report(fs::path const& dir, std::ostream& log);

} // namespace dictrnn
