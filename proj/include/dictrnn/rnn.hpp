#pragma once

// Explicit recurrent network whose hidden state walks the dictionary:
// r(t) = X e_{n_t}, y_hat(t) = y*(t).

#include "dictrnn/dictionary.hpp"
#include "dictrnn/errors.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace dictrnn {

enum class ActivationMode { tabulated, analytic };

std::string to_string(ActivationMode mode);
ActivationMode activation_mode_from_string(std::string const& s);

/// Distinct pre-activation arguments sum_l sigma*_i(l-1) sigma_j(l).
struct GSet {
    std::vector<double> gammas;
    /// Smallest spacing between consecutive gammas (inf when only one).
    double min_gap = 0.0;
    /// Index of the gamma equal to L.
    int contains_L_at = -1;

    /// Index of the closest gamma.
    int nearest(double z) const;
};

/// Collects and sorts the entries of `args`, merging values closer than
/// `merge_tolerance`.
GSet collect_gset(Eigen::MatrixXd const& args, int L, double merge_tolerance = 1e-9);

inline constexpr double analytic_offset = 0.5;

struct ActivationSpec {
    ActivationMode mode = ActivationMode::tabulated;
    /// Analytic mode: h(z) = tanh(beta z - analytic_offset). The offset
    /// breaks oddness: with an odd h, keys sigma and -sigma give rows of X
    /// that are exact negatives of each other.
    double beta = 1.0;
    /// Tabulated mode: (gamma, h(gamma)). Left empty, it is drawn from the
    /// seeded uniform distribution on [-1, 1] over G.
    std::vector<std::pair<double, double>> table;
    /// Tabulated mode snapping radius; <= 0 selects min(1e-6, min_gap/4).
    double snap_tolerance = 0.0;
};

/// Pre-activation argument that matched no tabulated gamma.
struct SnapFault {
    int unit = 0;
    double z = 0.0;
    double nearest_gamma = 0.0;
};

/// h as realized for one weight build: analytic, or a table over G with
/// nearest-gamma snapping.
class Activation {
public:
    Activation() = default;
    Activation(ActivationSpec spec, GSet gset);

    ActivationSpec const& spec() const { return spec_; }
    GSet const& gset() const { return gset_; }
    double snap_tolerance() const { return spec_.snap_tolerance; }

    /// h(z); in tabulated mode nullopt when z is farther than the snap
    /// tolerance from every gamma.
    std::optional<double> operator()(double z) const;

    /// Table value for gamma index m (tabulated mode).
    double table_value(int m) const { return values_.at(static_cast<std::size_t>(m)); }

private:
    ActivationSpec spec_;
    GSet gset_;
    std::vector<double> values_;
};

/// N x L matrix with entry (n, l-1) = 1 / sigma_n(l).
Eigen::MatrixXd build_sigma_star(Dictionary const& dict);

/// N x N matrix of sum_l sigma*_i(l-1) sigma_j(l).
Eigen::MatrixXd pre_activation_arguments(Dictionary const& dict, Eigen::MatrixXd const& sigma_star);

struct Assembly {
    Eigen::MatrixXd args;
    Eigen::MatrixXd X;
    Activation activation;
};

/// X_ij = h(args_ij). Tabulated mode draws h over G from `h_seed` unless a
/// table is given. Throws GapTooSmall when the snap tolerance does not fit
/// inside half the smallest gamma spacing.
Assembly assemble_X_G(Dictionary const& dict, Eigen::MatrixXd const& sigma_star,
                      ActivationSpec spec, std::uint64_t h_seed);

struct RegularityReport {
    bool regular = false;
    double cond_estimate = 0.0;
    double min_pivot = 0.0;
    double pivot_threshold = 0.0;
};

/// Partial-pivot LU must keep every pivot above 1e-12 * max|X_ij|.
RegularityReport check_regularity(Eigen::MatrixXd const& X);

/// Count of singular values above rel * sigma_max.
int numerical_rank(Eigen::MatrixXd const& M, double rel = 1e-8);

struct WeightSet {
    int N = 0;
    int L = 0;
    int K = 0;
    Eigen::MatrixXd X;
    Eigen::MatrixXd Y;
    Eigen::MatrixXd W;
    Eigen::VectorXd W_in;
    Eigen::RowVectorXd W_out;
    Eigen::VectorXd r0;
    /// Pre-activation arguments that produced r0.
    Eigen::VectorXd r0_args;
    double yhat0 = 0.0;
    /// (a_{k(1)}, ..., a_{k(N)})
    Eigen::RowVectorXd values;
    Activation activation;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu;
    double cond_estimate = 0.0;
    int rank_W = 0;
    double wx_residual = 0.0;
    double wout_residual = 0.0;
    std::uint64_t h_seed = 0;
    int retries_used = 0;
    /// Quantized (y(0), y(-1), ..., y(-L)).
    std::vector<int> init_window;
};

/// Solves W X = Y and W_out X = values against the LU factors of X and sets
/// r0, y_hat0 from `init_window`. Fills the residual and rank diagnostics.
WeightSet solve_weights(Dictionary const& dict, Eigen::MatrixXd const& sigma_star,
                        Assembly assembly, std::span<const int> init_window);

/// Full build: sigma*, X with regularity retries (fresh h-table or perturbed
/// beta per retry), then the weight solve. Throws SingularAfterRetries.
WeightSet build_weights(Dictionary const& dict, std::span<const int> init_window,
                        ActivationSpec const& spec, std::uint64_t h_seed, int max_retries);

/// Rebuilds derived state (LU factors, activation) after loading matrices.
void refresh_factorization(WeightSet& ws);

struct StepResult {
    Eigen::VectorXd r;
    double y = 0.0;
    Eigen::VectorXd z;
    double drift = 0.0;
    std::optional<SnapFault> fault;
};

/// z = W r + W_in y_in, r' = h(z), y' = W_out r'.
StepResult step(Eigen::VectorXd const& r, double y_in, WeightSet const& ws);

struct RunRow {
    long t = 0;
    double yhat = 0.0;
    /// -1 when the emitted window matches no dictionary key.
    int n_t = -1;
    double onehot_residual = 0.0;
    double drift = 0.0;
};

enum class RunStatus { completed, drift_exceeded, snap_miss };

struct RunRecord {
    std::vector<RunRow> rows;
    RunStatus status = RunStatus::completed;
    std::string message;
};

std::string to_string(RunStatus s);

class SnapMiss : public Error {
public:
    SnapMiss(long t, SnapFault fault, RunRecord prefix);
    long t;
    SnapFault fault;
    RunRecord prefix;
};

/// Iterates the network for t = 1..T from (r0, y_hat0), recovering n_t from
/// the emitted values and measuring the one-hot residual each step.
RunRecord run(WeightSet const& ws, long T, Dictionary const& dict);

} // namespace dictrnn
