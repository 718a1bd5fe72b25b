// SPDX-License-Identifier: Apache-2.0
#pragma once

// Dataset files, split sampling, the synthetic biased-graph generator and
// binary checkpoints.
//
// File layout of a dataset directory:
//   features.csv   node_id,f0,...,f{d-1}    one row per node, ids 0..n-1 in order
//   edges.txt      "u v" per line, '#' starts a comment
//   labels.csv     node_id,value            value in {0,1,-1}
//   sensitive.csv  node_id,value            value in {0,1,-1}

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairgnn/error.hpp"
#include "fairgnn/graph.hpp"
#include "fairgnn/tensor.hpp"

namespace fairgnn {

namespace fs = std::filesystem;

/// A graph with its (possibly partial) labels and sensitive attributes.
struct Dataset {
    Graph graph;
    std::map<std::string, std::string> provenance;

    std::size_t num_nodes() const { return graph.num_nodes(); }
    const std::vector<int>& labels() const { return graph.labels(); }
    const std::vector<int>& sensitive() const { return graph.sensitive(); }
};

struct SplitSpec {
    std::vector<std::size_t> v_l;   // nodes whose label is used for training
    std::vector<std::size_t> v_s;   // nodes whose sensitive value is known
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;
    std::uint64_t seed = 0;
};

/// Parameters of the synthetic generator.
struct GenSpec {
    std::size_t n = 2000;
    double group_ratio = 2.5;   // |s=0| / |s=1|
    double homophily = 0.95;    // expected fraction of intra-group edges
    double label_corr = 0.3;    // P(y=1|s=1) = 0.5 + c, P(y=1|s=0) = 0.5 - c
    std::size_t feature_dim = 16;
    double mu_y = 0.5;          // class signal along u_y
    double mu_s = 0.1;          // group signal along u_s
    double avg_degree = 10.0;
    double noise = 1.0;         // stddev of isotropic feature noise
    std::uint64_t seed = 0;
};

// ---------------------------------------------------------------------------
// Text helpers

namespace detail {

inline std::string format_double(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

[[noreturn]] inline void parse_fail(const fs::path& file, std::size_t line_no, const std::string& msg) {
    throw DataError(file.string() + ":" + std::to_string(line_no) + ": " + msg);
}

template <class T>
T parse_number(std::string_view tok, const fs::path& file, std::size_t line_no) {
    T value{};
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
        parse_fail(file, line_no, "cannot parse '" + std::string(tok) + "' as a number");
    return value;
}

inline std::ifstream open_input(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot open " + file.string());
    return in;
}

inline std::ofstream open_output(const fs::path& file, std::ios::openmode mode = std::ios::out) {
    std::ofstream out(file, mode);
    if (!out) throw DataError("cannot write " + file.string());
    return out;
}

inline Tensor read_features(const fs::path& file) {
    auto in = open_input(file);
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) parse_fail(file, 1, "missing header");
    ++line_no;
    const auto header = split_csv(line);
    if (header.empty() || header[0] != "node_id") parse_fail(file, 1, "header must start with node_id");
    const std::size_t d = header.size() - 1;
    for (std::size_t j = 0; j < d; ++j)
        if (header[j + 1] != "f" + std::to_string(j))
            parse_fail(file, 1, "expected column f" + std::to_string(j) + ", got '" + std::string(header[j + 1]) + "'");
    std::vector<double> values;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cols = split_csv(line);
        if (cols.size() != d + 1)
            parse_fail(file, line_no, "expected " + std::to_string(d + 1) + " columns, got " + std::to_string(cols.size()));
        const auto id = parse_number<std::size_t>(cols[0], file, line_no);
        if (id != rows) parse_fail(file, line_no, "node ids must be 0..n-1 in order; expected " + std::to_string(rows));
        for (std::size_t j = 0; j < d; ++j) {
            const double v = parse_number<double>(cols[j + 1], file, line_no);
            if (!std::isfinite(v)) parse_fail(file, line_no, "non-finite feature value");
            values.push_back(v);
        }
        ++rows;
    }
    Tensor x(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(d));
    std::copy(values.begin(), values.end(), x.data());
    return x;
}

inline std::vector<Edge> read_edges(const fs::path& file, std::size_t n) {
    auto in = open_input(file);
    std::vector<Edge> edges;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view body = line;
        if (auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
        std::istringstream ss{std::string(body)};
        std::string a, b, extra;
        if (!(ss >> a)) continue;
        if (!(ss >> b) || (ss >> extra)) parse_fail(file, line_no, "expected exactly two node ids");
        const auto u = parse_number<std::size_t>(a, file, line_no);
        const auto v = parse_number<std::size_t>(b, file, line_no);
        if (u >= n || v >= n) parse_fail(file, line_no, "node id out of range [0," + std::to_string(n) + ")");
        edges.emplace_back(u, v);
    }
    return edges;
}

/// node_id,value file; unlisted nodes are missing.
inline std::vector<int> read_node_values(const fs::path& file, std::size_t n) {
    auto in = open_input(file);
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) parse_fail(file, 1, "missing header");
    ++line_no;
    const auto header = split_csv(line);
    if (header.size() != 2 || header[0] != "node_id" || header[1] != "value")
        parse_fail(file, 1, "header must be node_id,value");
    std::vector<int> values(n, kMissing);
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cols = split_csv(line);
        if (cols.size() != 2) parse_fail(file, line_no, "expected 2 columns");
        const auto id = parse_number<std::size_t>(cols[0], file, line_no);
        if (id >= n) parse_fail(file, line_no, "node id " + std::to_string(id) + " is not below n=" + std::to_string(n));
        const int v = parse_number<int>(cols[1], file, line_no);
        if (v != 0 && v != 1 && v != kMissing) parse_fail(file, line_no, "value must be 0, 1 or -1");
        values[id] = v;
    }
    return values;
}

}  // namespace detail

struct DatasetPaths {
    fs::path features;
    fs::path edges;
    fs::path labels;
    fs::path sensitive;

    static DatasetPaths in_directory(const fs::path& dir) {
        return {dir / "features.csv", dir / "edges.txt", dir / "labels.csv", dir / "sensitive.csv"};
    }
};

inline Dataset load_dataset(const DatasetPaths& paths) {
    Tensor x = detail::read_features(paths.features);
    const auto n = static_cast<std::size_t>(x.rows());
    if (n == 0) throw DataError(paths.features.string() + ": no nodes");
    auto edges = detail::read_edges(paths.edges, n);
    auto labels = detail::read_node_values(paths.labels, n);
    auto sensitive = detail::read_node_values(paths.sensitive, n);
    Dataset ds;
    ds.graph = build_graph(edges, n, std::move(x), std::move(labels), std::move(sensitive));
    ds.provenance = {{"source", "files"},
                     {"features", paths.features.string()},
                     {"edges", paths.edges.string()},
                     {"labels", paths.labels.string()},
                     {"sensitive", paths.sensitive.string()}};
    return ds;
}

/// Writes the four dataset files into `dir` (created if needed).
inline void save_dataset(const Dataset& ds, const fs::path& dir) {
    fs::create_directories(dir);
    const auto paths = DatasetPaths::in_directory(dir);
    const Graph& g = ds.graph;
    {
        auto out = detail::open_output(paths.features);
        out << "node_id";
        for (std::size_t j = 0; j < g.feature_dim(); ++j) out << ",f" << j;
        out << '\n';
        for (std::size_t i = 0; i < g.num_nodes(); ++i) {
            out << i;
            for (std::size_t j = 0; j < g.feature_dim(); ++j)
                out << ',' << detail::format_double(g.features()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
            out << '\n';
        }
    }
    {
        auto out = detail::open_output(paths.edges);
        out << "# " << g.num_nodes() << " nodes, " << g.num_edges() << " undirected edges\n";
        for (const auto& [u, v] : g.edge_list()) out << u << ' ' << v << '\n';
    }
    auto write_values = [&](const fs::path& file, const std::vector<int>& values) {
        auto out = detail::open_output(file);
        out << "node_id,value\n";
        for (std::size_t i = 0; i < g.num_nodes(); ++i) out << i << ',' << (values.empty() ? kMissing : values[i]) << '\n';
    };
    write_values(paths.labels, g.labels());
    write_values(paths.sensitive, g.sensitive());
}

// ---------------------------------------------------------------------------
// Splits

/// Samples validation/test from nodes carrying both a label and a sensitive
/// value, then V_L and V_S independently from the remaining nodes (the two
/// may overlap).
inline SplitSpec make_splits(const Dataset& ds, std::size_t n_labelled, std::size_t n_sensitive, double val_frac = 0.25,
                             double test_frac = 0.5, std::uint64_t seed = 0) {
    if (val_frac < 0.0 || test_frac < 0.0 || val_frac + test_frac > 1.0)
        throw ConfigError("validation and test fractions must be nonnegative and sum to at most 1");
    const std::size_t n = ds.num_nodes();
    const auto& y = ds.labels();
    const auto& s = ds.sensitive();
    if (y.size() != n || s.size() != n) throw DataError("dataset has no labels or no sensitive attributes");

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> both;
    for (std::size_t i = 0; i < n; ++i)
        if (y[i] != kMissing && s[i] != kMissing) both.push_back(i);
    std::shuffle(both.begin(), both.end(), rng);
    const auto n_val = static_cast<std::size_t>(std::llround(val_frac * static_cast<double>(both.size())));
    const auto n_test = static_cast<std::size_t>(std::llround(test_frac * static_cast<double>(both.size())));

    SplitSpec sp;
    sp.seed = seed;
    sp.val.assign(both.begin(), both.begin() + static_cast<std::ptrdiff_t>(n_val));
    sp.test.assign(both.begin() + static_cast<std::ptrdiff_t>(n_val),
                   both.begin() + static_cast<std::ptrdiff_t>(std::min(both.size(), n_val + n_test)));

    std::vector<char> held_out(n, 0);
    for (std::size_t i : sp.val) held_out[i] = 1;
    for (std::size_t i : sp.test) held_out[i] = 1;

    auto sample = [&](const std::vector<int>& values, std::size_t k, const char* what) {
        std::vector<std::size_t> pool;
        for (std::size_t i = 0; i < n; ++i)
            if (!held_out[i] && values[i] != kMissing) pool.push_back(i);
        if (k > pool.size())
            throw ConfigError(std::string("requested ") + std::to_string(k) + " " + what + " nodes but only " +
                              std::to_string(pool.size()) + " are available outside validation/test");
        std::shuffle(pool.begin(), pool.end(), rng);
        pool.resize(k);
        std::sort(pool.begin(), pool.end());
        return pool;
    };
    sp.v_l = sample(y, n_labelled, "labelled");
    sp.v_s = sample(s, n_sensitive, "sensitive");
    std::sort(sp.val.begin(), sp.val.end());
    std::sort(sp.test.begin(), sp.test.end());
    return sp;
}

inline nlohmann::json splits_to_json(const SplitSpec& sp) {
    return {{"v_l", sp.v_l}, {"v_s", sp.v_s}, {"val", sp.val}, {"test", sp.test}, {"seed", sp.seed}};
}

inline SplitSpec splits_from_json(const nlohmann::json& j) {
    try {
        SplitSpec sp;
        sp.v_l = j.at("v_l").get<std::vector<std::size_t>>();
        sp.v_s = j.at("v_s").get<std::vector<std::size_t>>();
        sp.val = j.at("val").get<std::vector<std::size_t>>();
        sp.test = j.at("test").get<std::vector<std::size_t>>();
        sp.seed = j.at("seed").get<std::uint64_t>();
        return sp;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed splits.json: ") + e.what());
    }
}

inline void save_splits(const SplitSpec& sp, const fs::path& file) {
    auto out = detail::open_output(file);
    out << splits_to_json(sp).dump(2) << '\n';
}

inline SplitSpec load_splits(const fs::path& file) {
    auto in = detail::open_input(file);
    try {
        return splits_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError(file.string() + ": " + e.what());
    }
}

/// Checks the disjointness contract and index ranges of a split.
inline void validate_splits(const SplitSpec& sp, std::size_t n) {
    std::vector<char> train(n, 0), val(n, 0);
    auto check_range = [&](const std::vector<std::size_t>& v, const char* name) {
        for (std::size_t i : v)
            if (i >= n) throw DataError(std::string(name) + " index " + std::to_string(i) + " out of range");
    };
    check_range(sp.v_l, "v_l");
    check_range(sp.v_s, "v_s");
    check_range(sp.val, "val");
    check_range(sp.test, "test");
    for (std::size_t i : sp.v_l) train[i] = 1;
    for (std::size_t i : sp.v_s) train[i] = 1;
    for (std::size_t i : sp.val) {
        if (train[i]) throw DataError("validation node " + std::to_string(i) + " overlaps V_L or V_S");
        val[i] = 1;
    }
    for (std::size_t i : sp.test) {
        if (train[i]) throw DataError("test node " + std::to_string(i) + " overlaps V_L or V_S");
        if (val[i]) throw DataError("test node " + std::to_string(i) + " is also a validation node");
    }
}

// ---------------------------------------------------------------------------
// Synthetic generator

inline void validate_genspec(const GenSpec& g) {
    if (g.n < 4) throw ConfigError("generator needs n >= 4");
    if (!(g.group_ratio >= 1.0)) throw ConfigError("group_ratio must be >= 1");
    if (!(g.homophily >= 0.0 && g.homophily <= 1.0)) throw ConfigError("homophily must lie in [0,1]");
    if (!(g.label_corr >= 0.0 && g.label_corr < 0.5)) throw ConfigError("label_corr must lie in [0,0.5)");
    if (g.feature_dim < 2) throw ConfigError("feature_dim must be at least 2");
    if (!(g.avg_degree > 0.0)) throw ConfigError("avg_degree must be positive");
    if (!(g.noise >= 0.0)) throw ConfigError("noise must be nonnegative");
    if (!std::isfinite(g.mu_y) || !std::isfinite(g.mu_s)) throw ConfigError("feature separations must be finite");
}

/// Attributed graph whose edges mostly join nodes of the same sensitive group.
///
/// s=1 is drawn with probability 1/(1+group_ratio). Labels follow
/// P(y=1|s) = 0.5 -/+ c. Features are mu_y (2y-1) u_y + mu_s (2s-1) u_s plus
/// isotropic Gaussian noise, with u_y, u_s random orthonormal directions.
/// Each node initiates round(avg_degree/2) (at least one) edges whose partner
/// is drawn from its own group with probability `homophily`, otherwise from
/// the other group; the result is symmetrised and deduplicated.
inline Dataset synth_biased_graph(const GenSpec& spec) {
    validate_genspec(spec);
    std::mt19937_64 rng(spec.seed);
    const std::size_t n = spec.n;

    std::bernoulli_distribution minority(1.0 / (1.0 + spec.group_ratio));
    std::vector<int> s(n);
    std::vector<std::size_t> members[2];
    for (std::size_t i = 0; i < n; ++i) {
        s[i] = minority(rng) ? 1 : 0;
        members[s[i]].push_back(i);
    }
    for (int grp = 0; grp < 2; ++grp) {
        if (members[grp].empty()) throw DataError("generator produced an empty sensitive group; increase n");
        if (spec.homophily > 0.0 && members[grp].size() < 2)
            throw DataError("homophily > 0 needs at least two nodes per group");
    }

    std::bernoulli_distribution pos1(0.5 + spec.label_corr), pos0(0.5 - spec.label_corr);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = (s[i] == 1 ? pos1(rng) : pos0(rng)) ? 1 : 0;

    const auto d = static_cast<Eigen::Index>(spec.feature_dim);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd u_y(d), u_s(d);
    for (Eigen::Index j = 0; j < d; ++j) u_y[j] = normal(rng);
    for (Eigen::Index j = 0; j < d; ++j) u_s[j] = normal(rng);
    u_y.normalize();
    u_s -= u_s.dot(u_y) * u_y;
    u_s.normalize();

    Tensor x(static_cast<Eigen::Index>(n), d);
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        for (Eigen::Index j = 0; j < d; ++j) x(r, j) = spec.noise * normal(rng);
        x.row(r) += (spec.mu_y * (2.0 * y[i] - 1.0)) * u_y.transpose() + (spec.mu_s * (2.0 * s[i] - 1.0)) * u_s.transpose();
    }

    const auto stubs = std::max<long long>(1, std::llround(spec.avg_degree / 2.0));
    std::bernoulli_distribution intra(spec.homophily);
    std::vector<Edge> edges;
    edges.reserve(n * static_cast<std::size_t>(stubs));
    for (std::size_t i = 0; i < n; ++i) {
        for (long long k = 0; k < stubs; ++k) {
            const int own = s[i];
            const int target = intra(rng) ? own : 1 - own;
            const auto& pool = members[target];
            std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
            std::size_t j = pool[pick(rng)];
            while (j == i) j = pool[pick(rng)];
            edges.emplace_back(i, j);
        }
    }

    Dataset ds;
    ds.graph = build_graph(edges, n, std::move(x), std::move(y), std::move(s));
    auto fmt = [](double v) { return detail::format_double(v); };
    ds.provenance = {{"source", "synthetic"},
                     {"n", std::to_string(spec.n)},
                     {"group_ratio", fmt(spec.group_ratio)},
                     {"homophily", fmt(spec.homophily)},
                     {"label_corr", fmt(spec.label_corr)},
                     {"feature_dim", std::to_string(spec.feature_dim)},
                     {"mu_y", fmt(spec.mu_y)},
                     {"mu_s", fmt(spec.mu_s)},
                     {"avg_degree", fmt(spec.avg_degree)},
                     {"noise", fmt(spec.noise)},
                     {"seed", std::to_string(spec.seed)}};
    return ds;
}

// ---------------------------------------------------------------------------
// Checkpoints
//
// Little-endian: "FGNN", u32 version, u32 tensor count, then per tensor
// u32 name length, UTF-8 name, u32 ndim, u32 dims[ndim], f64 values row-major.

using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

inline void put_u32(std::ostream& out, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFFu);
    out.write(b, 4);
}

inline void put_f64(std::ostream& out, double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xFFu);
    out.write(b, 8);
}

inline void read_exact(std::istream& in, char* buf, std::size_t len, const fs::path& file) {
    in.read(buf, static_cast<std::streamsize>(len));
    if (static_cast<std::size_t>(in.gcount()) != len) throw DataError(file.string() + ": truncated checkpoint");
}

inline std::uint32_t get_u32(std::istream& in, const fs::path& file) {
    unsigned char b[4];
    read_exact(in, reinterpret_cast<char*>(b), 4, file);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

inline double get_f64(std::istream& in, const fs::path& file) {
    unsigned char b[8];
    read_exact(in, reinterpret_cast<char*>(b), 8, file);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return std::bit_cast<double>(v);
}

}  // namespace detail

inline void save_checkpoint(const NamedTensors& tensors, const fs::path& file) {
    auto out = detail::open_output(file, std::ios::out | std::ios::binary);
    out.write("FGNN", 4);
    detail::put_u32(out, kCheckpointVersion);
    detail::put_u32(out, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& [name, t] : tensors) {
        detail::put_u32(out, static_cast<std::uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        detail::put_u32(out, 2);
        detail::put_u32(out, static_cast<std::uint32_t>(t.rows()));
        detail::put_u32(out, static_cast<std::uint32_t>(t.cols()));
        for (Eigen::Index i = 0; i < t.size(); ++i) detail::put_f64(out, t.data()[i]);
    }
    if (!out) throw DataError("failed writing " + file.string());
}

inline NamedTensors load_checkpoint(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw DataError("cannot open " + file.string());
    char magic[4];
    detail::read_exact(in, magic, 4, file);
    if (std::string_view(magic, 4) != "FGNN") throw DataError(file.string() + ": bad magic, not a checkpoint");
    const std::uint32_t version = detail::get_u32(in, file);
    if (version != kCheckpointVersion)
        throw DataError(file.string() + ": unsupported checkpoint version " + std::to_string(version));
    const std::uint32_t count = detail::get_u32(in, file);
    NamedTensors out;
    for (std::uint32_t k = 0; k < count; ++k) {
        const std::uint32_t len = detail::get_u32(in, file);
        if (len > (1u << 16)) throw DataError(file.string() + ": implausible tensor name length");
        std::string name(len, '\0');
        detail::read_exact(in, name.data(), len, file);
        const std::uint32_t ndim = detail::get_u32(in, file);
        if (ndim == 0 || ndim > 2) throw DataError(file.string() + ": tensor '" + name + "' has unsupported rank");
        const std::uint32_t rows = detail::get_u32(in, file);
        const std::uint32_t cols = ndim == 2 ? detail::get_u32(in, file) : 1;
        if (static_cast<std::uint64_t>(rows) * cols > (1ull << 32))
            throw DataError(file.string() + ": tensor '" + name + "' has inconsistent shape");
        Tensor t(rows, cols);
        for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = detail::get_f64(in, file);
        out.emplace_back(std::move(name), std::move(t));
    }
    if (in.peek() != std::char_traits<char>::eof()) throw DataError(file.string() + ": trailing bytes after tensors");
    return out;
}

}  // namespace fairgnn
