#pragma once

// Key-value dictionary over quantized delay windows, and the symbolic
// reference orbit y* it induces.

#include "dictrnn/codec.hpp"

#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace dictrnn {

/// lags[l-1] is the grid index of the value l steps back.
using Key = std::vector<int>;

struct KeyHash {
    std::size_t operator()(Key const& key) const noexcept;
};

struct Entry {
    Key key;
    int value_index = 0;
    /// Time t' <= 0 whose window this entry was read from.
    long provenance = 0;
};

class Dictionary {
public:
    Dictionary(Grid grid, int L, std::vector<Entry> entries);

    int L() const { return L_; }
    int K() const { return grid_.K(); }
    int N() const { return static_cast<int>(entries_.size()); }
    Grid const& grid() const { return grid_; }
    std::vector<Entry> const& entries() const { return entries_; }
    Entry const& entry(int n) const { return entries_.at(static_cast<std::size_t>(n)); }

    std::optional<int> find(Key const& key) const;

    /// sigma_n(l) = a_{lags[l-1]}.
    double key_value(int n, int lag) const;
    double value(int n) const { return grid_.point(entry(n).value_index); }

private:
    Grid grid_;
    int L_;
    std::vector<Entry> entries_;
    std::unordered_map<Key, int, KeyHash> index_;
};

/// Scans t' = 0, -1, ... down to q.t_begin + L. Each unseen window key
/// (q(t'-1), ..., q(t'-L)) is appended with value q(t'); the most recent
/// occurrence of a key wins. Throws InsufficientData when q does not reach
/// back to t = -L.
Dictionary build_dictionary(QuantizedSeries const& q, Grid const& grid, int L);

struct GenericityReport {
    bool generic = true;
    /// Pair (n, n') with the smallest |sum_l sigma_n'(l)/sigma_n(l) - L|.
    std::optional<std::pair<int, int>> worst_pair;
    double worst_gap = 0.0;
};

/// Checks sum_l sigma_n'(l) / sigma_n(l) != L (beyond 1e-9) for every
/// ordered pair of distinct realized keys.
GenericityReport check_genericity(Dictionary const& dict, double tolerance = 1e-9);

struct ClosureReport {
    bool closed = true;
    /// (n, successor key that has no entry)
    std::vector<std::pair<int, Key>> failing_keys;
    /// successor_map[n] = n' or -1 when missing.
    std::vector<int> successor_map;
};

/// Successor of entry n is the key (value_index(n), lags(n)[0..L-2]).
Key successor_key(Entry const& entry);
ClosureReport check_closure(Dictionary const& dict);

struct SymbolicOrbit {
    /// Grid indices of y*(t) for t = -L .. horizon.
    std::vector<int> indices;
    /// Dictionary entry matched at t = 0 .. horizon (key l -> y*(t-l)).
    std::vector<int> entries;
    int L = 1;
    /// First t >= 0 on the cycle and the cycle length.
    long preperiod = 0;
    long period = 0;

    int index_at(long t) const { return indices.at(static_cast<std::size_t>(t + L)); }
};

/// y*(t) for t = -L..0 is `init` (ordered y*(0), y*(-1), ..., y*(-L)); later
/// values follow the dictionary. Throws MissingKey if a window has no entry.
SymbolicOrbit generate_ystar(Dictionary const& dict, std::span<const int> init, long horizon);

/// The initial window (q(0), q(-1), ..., q(-L)) of a quantized series.
std::vector<int> initial_window(QuantizedSeries const& q, int L);

std::string format_key(Key const& key);

} // namespace dictrnn
