#pragma once
// Run configuration, result records, and the CSV/JSON writers used by the
// command-line driver. CSV bodies are byte-deterministic for a given config:
// fixed %.12e formatting, no timestamps, config hash embedded in the header.

#include <array>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "subres/types.hpp"
#include "subres/version.hpp"

namespace subres {

struct RunConfig {
    std::string subcommand;

    // geometry / materials / lattice
    std::string shape = "sphere";
    double radius = 1.0;
    double gap = 2.0;
    double a = 2e-4;
    double b = 0.0;
    double v = 1.0;
    double L = 1.0;
    int dim = 3;

    // sweeps
    double b_lo = 0.0, b_hi = 1e-4;
    int b_count = 50;
    double omega_lo = 0.0, omega_hi = 0.0;  // 0,0 = derive from the band
    int omega_count = 400;
    double w1 = -std::numbers::sqrt3 / 2.0;
    std::vector<int> N_list{125, 343, 1000};
    double epsilon1 = 0.5;
    std::string cloud = "grid";
    std::uint64_t seed = 1;
    int basis_order = 0;
    int npts = 0;

    std::string out_path;
    std::string figure_tag;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["subcommand"] = subcommand;
        j["shape"] = shape;
        j["radius"] = radius;
        j["gap"] = gap;
        j["a"] = a;
        j["b"] = b;
        j["v"] = v;
        j["L"] = L;
        j["dim"] = dim;
        j["b_range"] = {b_lo, b_hi};
        j["b_count"] = b_count;
        j["omega_range"] = {omega_lo, omega_hi};
        j["omega_count"] = omega_count;
        j["w1"] = w1;
        j["N_list"] = N_list;
        j["epsilon1"] = epsilon1;
        j["cloud"] = cloud;
        j["seed"] = seed;
        j["basis_order"] = basis_order;
        j["npts"] = npts;
        if (!figure_tag.empty()) j["figure"] = figure_tag;
        return j;
    }
};

// FNV-1a over the canonical (alphabetically keyed) config dump
inline std::string config_hash(const RunConfig& cfg) {
    std::string s = cfg.to_json().dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

// validation failure that should surface as exit code 2, naming the field
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

namespace detail {

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(std::string("config field '") + key + "' has the wrong type");
    }
}

}  // namespace detail

// merge a JSON config file into cfg; file values override flag values
inline void apply_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config file '" + path + "' cannot be opened");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config file is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");
    static const char* known[] = {"shape",    "radius",   "gap",        "a",        "b",
                                  "v",        "L",        "dim",        "b_range",  "b_count",
                                  "omega_range", "omega_count", "w1",  "N_list",   "epsilon1",
                                  "cloud",    "seed",     "basis_order", "npts",    "out",
                                  "figure",   "subcommand"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : known) ok = ok || it.key() == k;
        if (!ok) throw ConfigError("config field '" + it.key() + "' is not recognized");
    }
    detail::read_field(j, "shape", cfg.shape);
    detail::read_field(j, "radius", cfg.radius);
    detail::read_field(j, "gap", cfg.gap);
    detail::read_field(j, "a", cfg.a);
    detail::read_field(j, "b", cfg.b);
    detail::read_field(j, "v", cfg.v);
    detail::read_field(j, "L", cfg.L);
    detail::read_field(j, "dim", cfg.dim);
    if (j.contains("b_range")) {
        std::array<double, 2> r{};
        try {
            r = j.at("b_range").get<std::array<double, 2>>();
        } catch (const nlohmann::json::exception&) {
            throw ConfigError("config field 'b_range' must be [lo, hi]");
        }
        cfg.b_lo = r[0];
        cfg.b_hi = r[1];
    }
    detail::read_field(j, "b_count", cfg.b_count);
    if (j.contains("omega_range")) {
        std::array<double, 2> r{};
        try {
            r = j.at("omega_range").get<std::array<double, 2>>();
        } catch (const nlohmann::json::exception&) {
            throw ConfigError("config field 'omega_range' must be [lo, hi]");
        }
        cfg.omega_lo = r[0];
        cfg.omega_hi = r[1];
    }
    detail::read_field(j, "omega_count", cfg.omega_count);
    detail::read_field(j, "w1", cfg.w1);
    detail::read_field(j, "N_list", cfg.N_list);
    detail::read_field(j, "epsilon1", cfg.epsilon1);
    detail::read_field(j, "cloud", cfg.cloud);
    detail::read_field(j, "seed", cfg.seed);
    detail::read_field(j, "basis_order", cfg.basis_order);
    detail::read_field(j, "npts", cfg.npts);
    detail::read_field(j, "out", cfg.out_path);
    detail::read_field(j, "figure", cfg.figure_tag);
    detail::read_field(j, "subcommand", cfg.subcommand);
}

inline void validate_config(const RunConfig& cfg) {
    if (cfg.shape != "sphere" && cfg.shape != "disk")
        throw ConfigError("config field 'shape' must be \"sphere\" or \"disk\"");
    if (cfg.dim != 2 && cfg.dim != 3) throw ConfigError("config field 'dim' must be 2 or 3");
    if ((cfg.shape == "disk") != (cfg.dim == 2))
        throw ConfigError("config field 'dim' is inconsistent with 'shape'");
    if (cfg.radius <= 0.0) throw ConfigError("config field 'radius' must be > 0");
    if (cfg.gap <= 0.0) throw ConfigError("config field 'gap' must be > 0");
    if (cfg.a <= 0.0) throw ConfigError("config field 'a' must be > 0");
    if (cfg.v <= 0.0) throw ConfigError("config field 'v' must be > 0");
    if (cfg.L <= 0.0) throw ConfigError("config field 'L' must be > 0");
    if (cfg.b_count < 2) throw ConfigError("config field 'b_count' must be >= 2");
    if (cfg.omega_count < 2) throw ConfigError("config field 'omega_count' must be >= 2");
    if (cfg.b_hi < cfg.b_lo) throw ConfigError("config field 'b_range' must be non-empty");
    if (cfg.epsilon1 <= 0.0 || cfg.epsilon1 >= 1.0)
        throw ConfigError("config field 'epsilon1' must lie in (0, 1)");
    if (cfg.cloud != "grid" && cfg.cloud != "poisson")
        throw ConfigError("config field 'cloud' must be \"grid\" or \"poisson\"");
    for (int n : cfg.N_list)
        if (n < 2) throw ConfigError("config field 'N_list' entries must be >= 2");
}

inline DimerConfig dimer_config_of(const RunConfig& cfg) {
    DimerConfig d;
    d.shape.kind = cfg.shape == "disk" ? ShapeKind::disk : ShapeKind::sphere;
    d.shape.radius = cfg.radius;
    d.gap = cfg.gap;
    d.materials = MaterialParams(cfg.a, cfg.b, cfg.v);
    return d;
}

// ---- result records ----------------------------------------------------------

struct ResultRecord {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::string hash;
    std::string figure_tag;

    void add_row(std::initializer_list<double> r) { rows.emplace_back(r); }
};

inline std::string format_cell(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12e", x);
    return std::string(buf);
}

inline std::string csv_string(const ResultRecord& rec) {
    std::ostringstream os;
    os << "# generator: subres " << version << "\n";
    os << "# config-hash: " << rec.hash << "\n";
    if (!rec.figure_tag.empty()) os << "# figure: " << rec.figure_tag << "\n";
    for (std::size_t i = 0; i < rec.columns.size(); ++i)
        os << (i ? "," : "") << rec.columns[i];
    os << "\n";
    for (const auto& row : rec.rows) {
        if (row.size() != rec.columns.size())
            throw std::logic_error("csv_string: ragged row");
        for (std::size_t i = 0; i < row.size(); ++i)
            os << (i ? "," : "") << format_cell(row[i]);
        os << "\n";
    }
    return os.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
    out << content;
}

// JSON summary mirroring the scalar outputs of a run
inline void write_summary(const std::string& path, const RunConfig& cfg,
                          const nlohmann::json& scalars) {
    nlohmann::json j;
    j["config"] = cfg.to_json();
    j["config_hash"] = config_hash(cfg);
    j["version"] = version;
    j["results"] = scalars;
    write_file(path, j.dump(2) + "\n");
}

}  // namespace subres
