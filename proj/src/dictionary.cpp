#include "dictrnn/dictionary.hpp"

#include "dictrnn/errors.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dictrnn {

std::size_t KeyHash::operator()(Key const& key) const noexcept
{
    std::size_t h = 1469598103934665603ULL;
    for (int k : key) {
        h ^= static_cast<std::size_t>(k) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h;
}

Dictionary::Dictionary(Grid grid, int L, std::vector<Entry> entries)
  : grid_{std::move(grid)}, L_{L}, entries_{std::move(entries)}
{
    if (L_ < 1)
        throw std::invalid_argument("L must be positive");
    for (std::size_t n = 0; n < entries_.size(); ++n) {
        auto const& e = entries_[n];
        if (static_cast<int>(e.key.size()) != L_)
            throw std::invalid_argument("dictionary key of wrong length");
        for (int k : e.key)
            if (k < 0 || k >= grid_.K())
                throw std::invalid_argument("dictionary key index out of range");
        if (e.value_index < 0 || e.value_index >= grid_.K())
            throw std::invalid_argument("dictionary value index out of range");
        if (!index_.emplace(e.key, static_cast<int>(n)).second)
            throw std::invalid_argument("duplicate dictionary key " + format_key(e.key));
    }
}

std::optional<int> Dictionary::find(Key const& key) const
{
    auto it = index_.find(key);
    if (it == index_.end())
        return std::nullopt;
    return it->second;
}

double Dictionary::key_value(int n, int lag) const
{
    return grid_.point(entry(n).key.at(static_cast<std::size_t>(lag - 1)));
}

std::string format_key(Key const& key)
{
    std::string s = "(";
    for (std::size_t i = 0; i < key.size(); ++i) {
        if (i)
            s += ",";
        s += std::to_string(key[i]);
    }
    return s + ")";
}

Dictionary build_dictionary(QuantizedSeries const& q, Grid const& grid, int L)
{
    if (L < 1)
        throw std::invalid_argument("L must be positive");
    if (q.indices.empty() || q.t_end() < 0 || q.t_begin > -L)
        throw InsufficientData{"training series must cover t = -" + std::to_string(L)
                               + " .. 0 for one full window"};

    std::vector<Entry> entries;
    std::unordered_map<Key, int, KeyHash> seen;
    Key key(static_cast<std::size_t>(L));
    for (long tp = 0; tp - L >= q.t_begin; --tp) {
        for (int l = 1; l <= L; ++l)
            key[static_cast<std::size_t>(l - 1)] = q.at(tp - l);
        if (seen.contains(key))
            continue;
        seen.emplace(key, static_cast<int>(entries.size()));
        entries.push_back(Entry{key, q.at(tp), tp});
    }
    return Dictionary{grid, L, std::move(entries)};
}

GenericityReport check_genericity(Dictionary const& dict, double tolerance)
{
    GenericityReport report;
    report.worst_gap = std::numeric_limits<double>::infinity();
    int const N = dict.N();
    int const L = dict.L();
    for (int n = 0; n < N; ++n) {
        for (int m = 0; m < N; ++m) {
            if (m == n)
                continue;
            double sum = 0.0;
            for (int l = 1; l <= L; ++l)
                sum += dict.key_value(m, l) / dict.key_value(n, l);
            double const gap = std::abs(sum - L);
            if (gap < report.worst_gap) {
                report.worst_gap = gap;
                report.worst_pair = std::pair{n, m};
            }
        }
    }
    report.generic = !(report.worst_gap <= tolerance);
    return report;
}

Key successor_key(Entry const& entry)
{
    Key next(entry.key.size());
    next[0] = entry.value_index;
    std::copy(entry.key.begin(), entry.key.end() - 1, next.begin() + 1);
    return next;
}

ClosureReport check_closure(Dictionary const& dict)
{
    ClosureReport report;
    report.successor_map.assign(static_cast<std::size_t>(dict.N()), -1);
    for (int n = 0; n < dict.N(); ++n) {
        Key next = successor_key(dict.entry(n));
        if (auto m = dict.find(next))
            report.successor_map[static_cast<std::size_t>(n)] = *m;
        else
            report.failing_keys.emplace_back(n, std::move(next));
    }
    report.closed = report.failing_keys.empty();
    return report;
}

std::vector<int> initial_window(QuantizedSeries const& q, int L)
{
    if (q.t_end() < 0 || q.t_begin > -L)
        throw InsufficientData{"series does not cover the initial window"};
    std::vector<int> init;
    for (long t = 0; t >= -L; --t)
        init.push_back(q.at(t));
    return init;
}

SymbolicOrbit generate_ystar(Dictionary const& dict, std::span<const int> init, long horizon)
{
    int const L = dict.L();
    if (static_cast<int>(init.size()) != L + 1)
        throw std::invalid_argument("initial window must hold L + 1 indices");
    if (horizon < 0)
        throw std::invalid_argument("horizon must be non-negative");

    SymbolicOrbit orbit;
    orbit.L = L;
    orbit.indices.assign(init.rbegin(), init.rend());
    orbit.indices.reserve(static_cast<std::size_t>(horizon + L + 1));

    std::vector<long> first_seen(static_cast<std::size_t>(dict.N()), -1);
    Key key(static_cast<std::size_t>(L));
    for (long t = 0; t <= horizon; ++t) {
        for (int l = 1; l <= L; ++l)
            key[static_cast<std::size_t>(l - 1)] = orbit.index_at(t - l);
        auto n = dict.find(key);
        if (!n)
            throw MissingKey{"window " + format_key(key) + " at t = " + std::to_string(t)
                             + " has no dictionary entry"};
        orbit.entries.push_back(*n);
        if (t > 0)
            orbit.indices.push_back(dict.entry(*n).value_index);

        auto& seen = first_seen[static_cast<std::size_t>(*n)];
        if (seen >= 0 && orbit.period == 0) {
            orbit.preperiod = seen;
            orbit.period = t - seen;
        } else if (seen < 0) {
            seen = t;
        }
    }
    return orbit;
}

} // namespace dictrnn
