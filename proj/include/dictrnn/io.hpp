#pragma once

// File formats: CSV tables, JSON documents and the RNNW matrix blobs.

#include "dictrnn/codec.hpp"
#include "dictrnn/config.hpp"
#include "dictrnn/dictionary.hpp"
#include "dictrnn/rnn.hpp"
#include "dictrnn/systems.hpp"
#include "dictrnn/verify.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <filesystem>
#include <string>
#include <string_view>

namespace dictrnn {

namespace fs = std::filesystem;

/// Shortest representation that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view s);

std::string read_file(fs::path const& path);
void write_file(fs::path const& path, std::string_view content);

std::string sha256_hex(std::string_view bytes);

/// "RNNW", u32 rows, u32 cols, little-endian float64 row-major.
std::string encode_matrix(Eigen::MatrixXd const& m);
/// Decodes the blob starting at `offset`; sets `consumed` to its size.
Eigen::MatrixXd decode_matrix(std::string_view bytes, std::size_t offset, std::size_t* consumed = nullptr);

/// Columns t, y.
std::string trajectory_csv(Trajectory const& traj);
nlohmann::json trajectory_meta(Trajectory const& traj);
Trajectory trajectory_from_files(std::string_view csv, nlohmann::json const& meta);

nlohmann::json grid_to_json(Grid const& grid);
Grid grid_from_json(nlohmann::json const& j);

nlohmann::json dictionary_to_json(Dictionary const& dict);
Dictionary dictionary_from_json(nlohmann::json const& j);

/// Columns t, yhat, n_t, onehot_residual, drift.
std::string run_record_csv(RunRecord const& rec);
/// Columns t, y, ystar, yhat, abs_err, bound, slack, active.
std::string bound_report_csv(BoundReport const& rep);

struct Artifact {
    Dictionary dictionary;
    WeightSet weights;
    nlohmann::json manifest;
};

/// Writes dictionary.json, weights.bin and manifest.json into `dir`.
void save_artifact(fs::path const& dir, Dictionary const& dict, WeightSet const& ws,
                   ExperimentConfig const& config);

/// Reads and checksum-verifies an artifact; throws ChecksumMismatch or
/// FormatError.
Artifact load_artifact(fs::path const& dir);

} // namespace dictrnn
