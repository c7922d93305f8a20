#pragma once

// Error-bound checking and the end-to-end invariant suite.

#include "dictrnn/codec.hpp"
#include "dictrnn/config.hpp"
#include "dictrnn/dictionary.hpp"
#include "dictrnn/rnn.hpp"
#include "dictrnn/systems.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dictrnn {

struct BoundRow {
    long t = 0;
    double y = 0.0;
    double ystar = 0.0;
    double yhat = 0.0;
    double abs_err = 0.0;
    double bound = 0.0;
    double slack = 0.0;
    /// bound < 2; otherwise the inequality is vacuous.
    bool active = false;
};

enum class BoundVerdict { holds, violated, inconclusive };

std::string to_string(BoundVerdict v);

struct BoundReport {
    std::vector<BoundRow> rows;
    std::optional<long> first_violation;
    /// Once inactive, every later row stays inactive.
    bool monotone_vacuity = true;
    BoundVerdict verdict = BoundVerdict::holds;
};

/// (2t+1) e_lambda^t sqrt(L) C / K per row, C = grid.radius_x_K. Violations
/// under a sampled certificate are inconclusive rather than failures.
BoundReport check_bound(Trajectory const& traj, RunRecord const& run, SymbolicOrbit const& ystar,
                        Grid const& grid, LipschitzCertificate const& cert, int L);

double tracking_error_bound(long t, double e_lambda, int L, double C, int K);

enum class CheckStatus { pass, fail, blocked, inconclusive };

std::string to_string(CheckStatus s);

struct LedgerLine {
    std::string invariant;
    CheckStatus status = CheckStatus::pass;
    std::string detail;
};

class Ledger {
public:
    void add(std::string invariant, CheckStatus status, std::string detail);
    void block(std::string invariant, std::string const& reason);
    std::vector<LedgerLine> const& lines() const { return lines_; }
    bool passed() const;
    /// One JSON object per line: {"invariant", "status", "detail"}.
    std::string to_jsonl() const;
    CheckStatus status_of(std::string const& invariant) const;

private:
    std::vector<LedgerLine> lines_;
};

// Tolerances of the invariant suite.
inline constexpr double tracking_tolerance = 1e-12;
inline constexpr double onehot_tolerance = 1e-8;
inline constexpr double residual_tolerance_per_unit = 1e-10;

/// Residual and rank checks on a finished weight set.
void audit_weights(Ledger& ledger, WeightSet const& ws);

struct Evaluation {
    SymbolicOrbit ystar;
    RunRecord run;
    BoundReport bound;
};

/// Runs the network for `horizon` steps and checks tracking, the one-hot
/// invariant, the error bound and periodicity of y*.
Evaluation evaluate(Ledger& ledger, Trajectory const& traj, Grid const& grid,
                    Dictionary const& dict, WeightSet const& ws, LipschitzCertificate const& cert,
                    long horizon);

/// Artifacts of a full pipeline run; members are empty past the first
/// blocking failure.
struct PipelineResult {
    std::optional<Trajectory> trajectory;
    std::optional<LipschitzCertificate> certificate;
    std::optional<Grid> grid;
    std::optional<Dictionary> dictionary;
    std::optional<WeightSet> weights;
    std::optional<Evaluation> evaluation;
    Ledger ledger;
};

LipschitzCertificate certify_lipschitz(ExperimentConfig const& config, DelayMap const& map);

/// Grid certification, dictionary, genericity (re-jittering on failure) and
/// closure on a training trajectory. Stops at the first blocking failure.
void build_symbolic_stage(PipelineResult& result, ExperimentConfig const& config);

/// Every stage in order, fail-soft: failures are recorded and dependent
/// stages are marked blocked.
PipelineResult full_suite(ExperimentConfig const& config);

} // namespace dictrnn
