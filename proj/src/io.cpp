#include "dictrnn/io.hpp"

#include "dictrnn/errors.hpp"

#include <openssl/evp.h>

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace dictrnn {

using nlohmann::json;

namespace {

constexpr char blob_magic[4] = {'R', 'N', 'N', 'W'};
constexpr std::size_t blob_header = 12;
constexpr char const* manifest_format = "dictrnn-weights/1";

void put_u32(std::string& out, std::uint32_t v)
{
    for (int i = 0; i < 4; ++i)
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

void put_f64(std::string& out, double d)
{
    auto const bits = std::bit_cast<std::uint64_t>(d);
    for (int i = 0; i < 8; ++i)
        out.push_back(static_cast<char>((bits >> (8 * i)) & 0xffu));
}

std::uint64_t get_le(std::string_view bytes, std::size_t at, int width)
{
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i)
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[at + static_cast<std::size_t>(i)]))
             << (8 * i);
    return v;
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        auto const pos = s.find(sep, start);
        parts.push_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
        if (pos == std::string_view::npos)
            return parts;
        start = pos + 1;
    }
}

long parse_long(std::string_view s)
{
    long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw FormatError{"bad integer '" + std::string{s} + "'"};
    return v;
}

Eigen::MatrixXd column(Eigen::VectorXd const& v) { return v; }
Eigen::MatrixXd row(Eigen::RowVectorXd const& v) { return v; }

} // namespace

std::string format_double(double v)
{
    std::array<char, 32> buf{};
    auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), p);
}

double parse_double(std::string_view s)
{
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw FormatError{"bad number '" + std::string{s} + "'"};
    return v;
}

std::string read_file(fs::path const& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw FormatError{"cannot open " + path.string()};
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(fs::path const& path, std::string_view content)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw FormatError{"cannot write " + path.string()};
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::string sha256_hex(std::string_view bytes)
{
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
        throw Error{"SHA-256 digest failed"};
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 0xf]);
    }
    return out;
}

std::string encode_matrix(Eigen::MatrixXd const& m)
{
    std::string out(blob_magic, 4);
    put_u32(out, static_cast<std::uint32_t>(m.rows()));
    put_u32(out, static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            put_f64(out, m(i, j));
    return out;
}

Eigen::MatrixXd decode_matrix(std::string_view bytes, std::size_t offset, std::size_t* consumed)
{
    if (offset + blob_header > bytes.size() || std::memcmp(bytes.data() + offset, blob_magic, 4) != 0)
        throw FormatError{"missing RNNW blob header at offset " + std::to_string(offset)};
    auto const rows = static_cast<Eigen::Index>(get_le(bytes, offset + 4, 4));
    auto const cols = static_cast<Eigen::Index>(get_le(bytes, offset + 8, 4));
    std::size_t const size = blob_header + static_cast<std::size_t>(rows * cols) * 8;
    if (offset + size > bytes.size())
        throw FormatError{"truncated RNNW blob at offset " + std::to_string(offset)};
    Eigen::MatrixXd m(rows, cols);
    std::size_t at = offset + blob_header;
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j, at += 8)
            m(i, j) = std::bit_cast<double>(get_le(bytes, at, 8));
    if (consumed)
        *consumed = size;
    return m;
}

std::string trajectory_csv(Trajectory const& traj)
{
    std::string out = "t,y\n";
    for (long t = traj.t_min(); t <= traj.t_max(); ++t)
        out += std::to_string(t) + "," + format_double(traj.at(t)) + "\n";
    return out;
}

json trajectory_meta(Trajectory const& traj)
{
    return json{{"map", traj.map_name},
                {"params", traj.params},
                {"seed_window", traj.seed_window},
                {"burn_in", traj.burn_in},
                {"origin_index", traj.origin_index},
                {"t_min", traj.t_min()},
                {"t_max", traj.t_max()}};
}

Trajectory trajectory_from_files(std::string_view csv, json const& meta)
{
    Trajectory traj;
    try {
        traj.map_name = meta.at("map").get<std::string>();
        traj.params = meta.at("params").get<Params>();
        traj.seed_window = meta.at("seed_window").get<std::vector<double>>();
        traj.burn_in = meta.at("burn_in").get<long>();
        traj.origin_index = meta.at("origin_index").get<long>();
    } catch (json::exception const& e) {
        throw FormatError{std::string{"trajectory metadata: "} + e.what()};
    }
    auto lines = split(csv, '\n');
    if (lines.empty() || lines.front() != "t,y")
        throw FormatError{"trajectory CSV must start with header t,y"};
    long expected = -traj.origin_index;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty())
            continue;
        auto cells = split(lines[i], ',');
        if (cells.size() != 2 || parse_long(cells[0]) != expected)
            throw FormatError{"trajectory CSV row " + std::to_string(i) + " malformed"};
        traj.values.push_back(parse_double(cells[1]));
        ++expected;
    }
    if (traj.values.empty() || traj.t_max() != meta.value("t_max", traj.t_max()))
        throw FormatError{"trajectory CSV does not match its metadata"};
    return traj;
}

json grid_to_json(Grid const& grid)
{
    return json{{"K", grid.K()},
                {"points", grid.points},
                {"radius_x_K", grid.radius_x_K},
                {"jitter_seed", grid.jitter_seed},
                {"jitter_scale", grid.jitter_scale},
                {"retries_used", grid.retries_used}};
}

Grid grid_from_json(json const& j)
{
    try {
        Grid g = make_grid(j.at("points").get<std::vector<double>>());
        if (g.K() != j.at("K").get<int>())
            throw FormatError{"grid K does not match its points"};
        if (g.radius_x_K != j.at("radius_x_K").get<double>())
            throw FormatError{"grid radius_x_K does not match its points"};
        g.jitter_seed = j.at("jitter_seed").get<std::uint64_t>();
        g.jitter_scale = j.at("jitter_scale").get<double>();
        g.retries_used = j.value("retries_used", 0);
        return g;
    } catch (json::exception const& e) {
        throw FormatError{std::string{"grid: "} + e.what()};
    } catch (std::invalid_argument const& e) {
        throw FormatError{std::string{"grid: "} + e.what()};
    }
}

json dictionary_to_json(Dictionary const& dict)
{
    json entries = json::array();
    for (auto const& e : dict.entries())
        entries.push_back(json{{"lags", e.key}, {"value_index", e.value_index}, {"provenance", e.provenance}});
    return json{{"K", dict.K()}, {"L", dict.L()}, {"grid", grid_to_json(dict.grid())}, {"entries", entries}};
}

Dictionary dictionary_from_json(json const& j)
{
    try {
        Grid grid = grid_from_json(j.at("grid"));
        if (grid.K() != j.at("K").get<int>())
            throw FormatError{"dictionary K does not match its grid"};
        std::vector<Entry> entries;
        for (auto const& e : j.at("entries"))
            entries.push_back(Entry{e.at("lags").get<Key>(), e.at("value_index").get<int>(),
                                    e.at("provenance").get<long>()});
        return Dictionary{std::move(grid), j.at("L").get<int>(), std::move(entries)};
    } catch (json::exception const& e) {
        throw FormatError{std::string{"dictionary: "} + e.what()};
    } catch (std::invalid_argument const& e) {
        throw FormatError{std::string{"dictionary: "} + e.what()};
    }
}

std::string run_record_csv(RunRecord const& rec)
{
    std::string out = "t,yhat,n_t,onehot_residual,drift\n";
    for (auto const& r : rec.rows)
        out += std::to_string(r.t) + "," + format_double(r.yhat) + "," + std::to_string(r.n_t) + ","
               + format_double(r.onehot_residual) + "," + format_double(r.drift) + "\n";
    return out;
}

std::string bound_report_csv(BoundReport const& rep)
{
    std::string out = "t,y,ystar,yhat,abs_err,bound,slack,active\n";
    for (auto const& r : rep.rows)
        out += std::to_string(r.t) + "," + format_double(r.y) + "," + format_double(r.ystar) + ","
               + format_double(r.yhat) + "," + format_double(r.abs_err) + "," + format_double(r.bound)
               + "," + format_double(r.slack) + "," + (r.active ? "1" : "0") + "\n";
    return out;
}

void save_artifact(fs::path const& dir, Dictionary const& dict, WeightSet const& ws,
                   ExperimentConfig const& config)
{
    auto const& act = ws.activation;
    Eigen::MatrixXd table(static_cast<Eigen::Index>(act.spec().table.size()), 2);
    for (std::size_t m = 0; m < act.spec().table.size(); ++m) {
        table(static_cast<Eigen::Index>(m), 0) = act.spec().table[m].first;
        table(static_cast<Eigen::Index>(m), 1) = act.spec().table[m].second;
    }
    std::vector<std::pair<std::string, Eigen::MatrixXd>> const blobs{
        {"X", ws.X},         {"Y", ws.Y},         {"W", ws.W},
        {"W_in", column(ws.W_in)}, {"W_out", row(ws.W_out)}, {"r0", column(ws.r0)},
        {"r0_args", column(ws.r0_args)}, {"h_table", table}};

    std::string bin;
    json index = json::array();
    for (auto const& [name, m] : blobs) {
        std::string const enc = encode_matrix(m);
        index.push_back(json{{"name", name},
                             {"offset", bin.size()},
                             {"bytes", enc.size()},
                             {"rows", m.rows()},
                             {"cols", m.cols()}});
        bin += enc;
    }
    std::string const dict_text = dictionary_to_json(dict).dump(2) + "\n";

    json manifest{{"format", manifest_format},
                  {"N", ws.N},
                  {"L", ws.L},
                  {"K", ws.K},
                  {"mode", to_string(act.spec().mode)},
                  {"beta", act.spec().beta},
                  {"snap_tolerance", act.snap_tolerance()},
                  {"seeds", {{"grid_seed", config.grid_seed}, {"h_seed", ws.h_seed}, {"jitter_seed", dict.grid().jitter_seed}}},
                  {"retries", {{"grid", dict.grid().retries_used}, {"h", ws.retries_used}}},
                  {"cond_estimate", ws.cond_estimate},
                  {"rank_W", ws.rank_W},
                  {"yhat0", ws.yhat0},
                  {"init_window", ws.init_window},
                  {"blobs", index},
                  {"weights_file", "weights.bin"},
                  {"weights_sha256", sha256_hex(bin)},
                  {"dictionary_file", "dictionary.json"},
                  {"dictionary_sha256", sha256_hex(dict_text)},
                  {"config", config_to_json(config)}};

    fs::create_directories(dir);
    write_file(dir / "weights.bin", bin);
    write_file(dir / "dictionary.json", dict_text);
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

Artifact load_artifact(fs::path const& dir)
{
    json manifest;
    try {
        manifest = json::parse(read_file(dir / "manifest.json"));
    } catch (json::exception const& e) {
        throw FormatError{std::string{"manifest: "} + e.what()};
    }
    if (manifest.value("format", "") != manifest_format)
        throw FormatError{"unsupported manifest format"};

    std::string const bin = read_file(dir / manifest.at("weights_file").get<std::string>());
    if (sha256_hex(bin) != manifest.at("weights_sha256").get<std::string>())
        throw ChecksumMismatch{"weights.bin does not match its manifest checksum"};
    std::string const dict_text = read_file(dir / manifest.at("dictionary_file").get<std::string>());
    if (sha256_hex(dict_text) != manifest.at("dictionary_sha256").get<std::string>())
        throw ChecksumMismatch{"dictionary.json does not match its manifest checksum"};

    Dictionary dict = dictionary_from_json(json::parse(dict_text));

    std::map<std::string, Eigen::MatrixXd> mats;
    for (auto const& b : manifest.at("blobs")) {
        std::size_t used = 0;
        auto m = decode_matrix(bin, b.at("offset").get<std::size_t>(), &used);
        if (used != b.at("bytes").get<std::size_t>() || m.rows() != b.at("rows").get<Eigen::Index>()
            || m.cols() != b.at("cols").get<Eigen::Index>())
            throw FormatError{"blob '" + b.at("name").get<std::string>() + "' disagrees with manifest"};
        mats[b.at("name").get<std::string>()] = std::move(m);
    }
    for (char const* name : {"X", "Y", "W", "W_in", "W_out", "r0", "r0_args", "h_table"})
        if (!mats.contains(name))
            throw FormatError{std::string{"artifact lacks blob "} + name};

    WeightSet ws;
    ws.N = manifest.at("N").get<int>();
    ws.L = manifest.at("L").get<int>();
    ws.K = manifest.at("K").get<int>();
    if (ws.N != dict.N() || ws.L != dict.L() || ws.K != dict.K())
        throw FormatError{"manifest shape disagrees with dictionary"};
    ws.X = mats["X"];
    ws.Y = mats["Y"];
    ws.W = mats["W"];
    ws.W_in = mats["W_in"].col(0);
    ws.W_out = mats["W_out"].row(0);
    ws.r0 = mats["r0"].col(0);
    ws.r0_args = mats["r0_args"].col(0);
    ws.yhat0 = manifest.at("yhat0").get<double>();
    ws.h_seed = manifest.at("seeds").at("h_seed").get<std::uint64_t>();
    ws.retries_used = manifest.at("retries").at("h").get<int>();
    ws.init_window = manifest.at("init_window").get<std::vector<int>>();
    ws.values.resize(ws.N);
    for (int n = 0; n < ws.N; ++n)
        ws.values(n) = dict.value(n);

    ActivationSpec spec;
    spec.mode = activation_mode_from_string(manifest.at("mode").get<std::string>());
    spec.beta = manifest.at("beta").get<double>();
    spec.snap_tolerance = manifest.at("snap_tolerance").get<double>();
    auto const& table = mats["h_table"];
    for (Eigen::Index m = 0; m < table.rows(); ++m)
        spec.table.emplace_back(table(m, 0), table(m, 1));
    GSet gset = collect_gset(pre_activation_arguments(dict, build_sigma_star(dict)), dict.L());
    ws.activation = Activation{std::move(spec), std::move(gset)};
    refresh_factorization(ws);

    return Artifact{std::move(dict), std::move(ws), std::move(manifest)};
}

} // namespace dictrnn
