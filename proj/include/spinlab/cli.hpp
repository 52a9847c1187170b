// cli.hpp - configuration, experiment runners and table emission for the spinlab tool.

#pragma once

#include "spinlab/core.hpp"
#include "spinlab/droplets.hpp"
#include "spinlab/dynamics.hpp"
#include "spinlab/hilbert.hpp"
#include "spinlab/lattice.hpp"
#include "spinlab/models.hpp"
#include "spinlab/perturbation.hpp"
#include "spinlab/spectral.hpp"
#include "spinlab/ssep.hpp"
#include "spinlab/symmetry.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Core>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace spinlab::cli {

inline constexpr const char* kVersion = "1.0.0";

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class OutputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum ExitCode { kOk = 0, kAssertionFailed = 1, kConfigError = 2, kSolverError = 3, kOutputError = 4 };

// ------------------------------------------------------------ configuration

struct KeySpec {
    std::string section;
    std::string key;
    std::string default_value;
    std::string flag;  // long flag name without dashes
    std::string help;
};

inline const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names{"spectrum", "foel", "liebmattis", "ssep", "droplet", "lightcone", "cluster", "perturb"};
    return names;
}

inline const std::vector<KeySpec>& schema() {
    static const std::vector<KeySpec> keys{
        {"model", "model", "heisenberg", "model", "heisenberg|aklt|xxz_open|xxz_periodic|custom"},
        {"model", "L", "5", "L", "chain length"},
        {"model", "spin", "1/2", "spin", "site spin for heisenberg chains"},
        {"model", "J", "1", "J", "coupling; multiplies graph weights"},
        {"model", "Delta", "", "Delta", "XXZ anisotropy > 1 (exclusive with q)"},
        {"model", "q", "", "q", "XXZ deformation in (0,1) (exclusive with Delta); 0.5 when neither is set"},
        {"model", "periodic", "false", "periodic", "close heisenberg and aklt chains into rings"},
        {"model", "graph", "", "graph", "graph file; replaces the chain of length L"},
        {"model", "terms", "", "terms", "term file for model = custom"},
        {"solver", "tol", "1e-10", "tol", "Lanczos residual tolerance"},
        {"solver", "dense_cutoff", "4096", "dense-cutoff", "largest dimension for the dense solver"},
        {"solver", "max_iterations", "0", "max-iterations", "Lanczos basis cap (0 = automatic)"},
        {"solver", "degeneracy_tol", "1e-8", "degeneracy-tol", "energy window for degenerate levels"},
        {"solver", "seed", "6671748520493579038", "seed", "Lanczos start-vector seed"},
        {"solver", "threads", "1", "threads", "worker threads"},
        {"output", "out", "", "out", "primary output path (default <subcommand>.<format>)"},
        {"output", "format", "csv", "format", "csv|json"},
        {"spectrum", "levels", "0", "levels", "levels per sector (0 = all)"},
        {"spectrum", "sectors", "true", "sectors", "resolve magnetization sectors"},
        {"droplet", "n", "1", "n", "number of overturned spins"},
        {"droplet", "Lmin", "6", "Lmin", "smallest chain length"},
        {"droplet", "Lmax", "16", "Lmax", "largest chain length"},
        {"lightcone", "lambda", "1", "lambda", "decay rate of the interaction norm"},
        {"lightcone", "site", "-1", "site", "support of B (-1 = centre)"},
        {"lightcone", "observable", "sigma3", "observable", "S1|S2|S3|sigma1|sigma2|sigma3"},
        {"lightcone", "tmax", "1", "tmax", "largest time"},
        {"lightcone", "dt", "0.05", "dt", "time step"},
        {"cluster", "lambda", "1", "lambda", "decay rate of the interaction norm"},
        {"cluster", "observable", "S3", "observable", "S1|S2|S3|sigma1|sigma2|sigma3"},
        {"cluster", "sector", "auto", "sector", "magnetization of the ground-state sector, auto or none"},
        {"cluster", "window_points", "5", "window-points", "imaginary times per pair inside the window"},
        {"perturb", "lambda_min", "-0.1", "lambda-min", "smallest coupling"},
        {"perturb", "lambda_max", "0.1", "lambda-max", "largest coupling"},
        {"perturb", "steps", "11", "steps", "grid points"},
        {"perturb", "sizes", "", "sizes", "comma-separated chain lengths (default L)"},
        {"perturb", "levels", "4", "levels", "tracked levels"},
    };
    return keys;
}

struct Setting {
    std::string value;
    std::string origin;  // "default", "<file>:<line>" or "--flag"
};

struct RunConfig {
    std::string subcommand;
    std::map<std::string, Setting> values;  // "section.key"

    static std::string id(const std::string& section, const std::string& key) { return section + "." + key; }

    bool is_set(const std::string& section, const std::string& key) const {
        auto it = values.find(id(section, key));
        return it != values.end() && it->second.origin != "default";
    }

    const Setting& setting(const std::string& section, const std::string& key) const {
        auto it = values.find(id(section, key));
        if (it == values.end()) throw ConfigError("unknown key '" + key + "' in [" + section + "]");
        return it->second;
    }

    const std::string& str(const std::string& section, const std::string& key) const { return setting(section, key).value; }

    [[noreturn]] void bad(const std::string& section, const std::string& key, const std::string& what) const {
        const auto& s = setting(section, key);
        throw ConfigError(s.origin + ": key '" + key + "' in [" + section + "]: " + what + ", got '" + s.value + "'");
    }

    double real(const std::string& section, const std::string& key) const {
        const auto& v = str(section, key);
        try {
            std::size_t pos = 0;
            const double d = std::stod(v, &pos);
            if (pos == v.size() && std::isfinite(d)) return d;
        } catch (const std::exception&) {
        }
        bad(section, key, "expected a finite number");
    }

    long long integer(const std::string& section, const std::string& key) const {
        const auto& v = str(section, key);
        try {
            std::size_t pos = 0;
            const long long i = std::stoll(v, &pos);
            if (pos == v.size()) return i;
        } catch (const std::exception&) {
        }
        bad(section, key, "expected an integer");
    }

    bool boolean(const std::string& section, const std::string& key) const {
        const auto& v = str(section, key);
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        bad(section, key, "expected true or false");
    }

    std::optional<double> optional_real(const std::string& section, const std::string& key) const {
        if (str(section, key).empty()) return std::nullopt;
        return real(section, key);
    }

    HalfInteger spin(const std::string& section, const std::string& key) const {
        const auto& v = str(section, key);
        try {
            auto slash = v.find('/');
            if (slash != std::string::npos) {
                if (v.substr(slash + 1) != "2") throw DomainError("denominator");
                std::size_t pos = 0;
                const int t = std::stoi(v.substr(0, slash), &pos);
                if (pos != slash) throw DomainError("numerator");
                return half(t);
            }
            return HalfInteger::from_double(std::stod(v));
        } catch (const std::exception&) {
        }
        bad(section, key, "expected a half-integer like 1/2, 1 or 3/2");
    }

    std::vector<int> int_list(const std::string& section, const std::string& key) const {
        std::vector<int> out;
        std::stringstream ss(str(section, key));
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            try {
                std::size_t pos = 0;
                out.push_back(std::stoi(tok, &pos));
                if (pos != tok.size()) throw DomainError("trailing");
            } catch (const std::exception&) {
                bad(section, key, "expected a comma-separated integer list");
            }
        }
        return out;
    }
};

inline const KeySpec* find_key(const std::string& section, const std::string& key) {
    for (const auto& k : schema())
        if (k.section == section && k.key == key) return &k;
    return nullptr;
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

/// Parses "[section]" headers and "key = value" lines; '#' and ';' start comments.
inline std::map<std::string, Setting> parse_config(std::istream& in, const std::string& name) {
    std::map<std::string, Setting> out;
    std::string raw, section;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::string where = name + ":" + std::to_string(line);
        const auto cut = raw.find_first_of("#;");
        const std::string text = trim(cut == std::string::npos ? raw : raw.substr(0, cut));
        if (text.empty()) continue;
        if (text.front() == '[') {
            if (text.back() != ']') throw ConfigError(where + ": malformed section header '" + text + "'");
            section = trim(text.substr(1, text.size() - 2));
            bool known = section == "model" || section == "solver" || section == "output";
            for (const auto& s : subcommands()) known = known || s == section;
            if (!known) throw ConfigError(where + ": unknown section [" + section + "]");
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value', got '" + text + "'");
        const std::string key = trim(text.substr(0, eq));
        const std::string value = trim(text.substr(eq + 1));
        if (section.empty()) throw ConfigError(where + ": key '" + key + "' appears before any [section]");
        if (!find_key(section, key)) throw ConfigError(where + ": unknown key '" + key + "' in [" + section + "]");
        const auto id = RunConfig::id(section, key);
        if (out.contains(id)) throw ConfigError(where + ": duplicate key '" + key + "' in [" + section + "]");
        out[id] = Setting{value, where};
    }
    return out;
}

inline std::map<std::string, Setting> read_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(f, path);
}

/// Defaults, then the config file, then flags.
inline RunConfig make_config(const std::string& subcommand, const std::map<std::string, Setting>& file,
                             const std::map<std::string, Setting>& flags) {
    RunConfig c;
    c.subcommand = subcommand;
    for (const auto& k : schema()) c.values[RunConfig::id(k.section, k.key)] = Setting{k.default_value, "default"};
    for (const auto& layer : {file, flags})
        for (const auto& [id, s] : layer) {
            if (!c.values.contains(id)) throw ConfigError(s.origin + ": unknown key '" + id + "'");
            c.values[id] = s;
        }
    if (c.is_set("model", "Delta") && c.is_set("model", "q"))
        throw ConfigError(c.setting("model", "q").origin + ": key 'q' in [model]: Delta and q are mutually exclusive");
    const auto& fmt = c.str("output", "format");
    if (fmt != "csv" && fmt != "json") c.bad("output", "format", "expected csv or json");
    if (c.integer("solver", "threads") < 1) c.bad("solver", "threads", "expected an integer >= 1");
    return c;
}

inline SolverOptions solver_options(const RunConfig& c) {
    SolverOptions o;
    o.tol = c.real("solver", "tol");
    if (!(o.tol > 0.0)) c.bad("solver", "tol", "expected a positive number");
    o.dense_cutoff = static_cast<Eigen::Index>(c.integer("solver", "dense_cutoff"));
    o.max_iterations = static_cast<int>(c.integer("solver", "max_iterations"));
    o.degeneracy_tol = c.real("solver", "degeneracy_tol");
    const auto& seed = c.str("solver", "seed");
    try {
        std::size_t pos = 0;
        o.seed = std::stoull(seed, &pos);
        if (pos != seed.size()) throw DomainError("trailing");
    } catch (const std::exception&) {
        c.bad("solver", "seed", "expected an unsigned integer");
    }
    return o;
}

inline int threads(const RunConfig& c) { return static_cast<int>(c.integer("solver", "threads")); }

// ------------------------------------------------------------ tables

using Cell = std::variant<long long, double, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string format_cell(const Cell& c) {
    if (auto i = std::get_if<long long>(&c)) return std::to_string(*i);
    if (auto d = std::get_if<double>(&c)) return format_double(*d);
    return std::get<std::string>(c);
}

inline std::string to_csv(const Table& t) {
    std::string out;
    for (std::size_t j = 0; j < t.columns.size(); ++j) out += (j ? "," : "") + t.columns[j];
    out += "\n";
    for (const auto& row : t.rows) {
        for (std::size_t j = 0; j < row.size(); ++j) out += (j ? "," : "") + format_cell(row[j]);
        out += "\n";
    }
    return out;
}

/// Non-finite values become null.
inline nlohmann::json json_number(double v) {
    if (!std::isfinite(v)) return nullptr;
    return v;
}

inline nlohmann::json to_json(const Table& t) {
    nlohmann::ordered_json cols = nlohmann::ordered_json::object();
    for (std::size_t j = 0; j < t.columns.size(); ++j) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& row : t.rows) {
            const auto& c = row[j];
            if (auto i = std::get_if<long long>(&c)) arr.push_back(*i);
            else if (auto d = std::get_if<double>(&c)) arr.push_back(json_number(*d));
            else arr.push_back(std::get<std::string>(c));
        }
        cols[t.columns[j]] = arr;
    }
    nlohmann::ordered_json j;
    j["columns"] = t.columns;
    j["data"] = cols;
    return nlohmann::json::parse(j.dump());
}

inline std::string render(const Table& t, const std::string& format) {
    if (format == "json") {
        // ordered rendering keeps the column order of the CSV
        nlohmann::ordered_json j;
        j["columns"] = t.columns;
        nlohmann::ordered_json data = nlohmann::ordered_json::object();
        const auto unordered = to_json(t);
        for (const auto& c : t.columns) data[c] = unordered["data"][c];
        j["data"] = data;
        return j.dump(2) + "\n";
    }
    return to_csv(t);
}

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw OutputError("cannot open '" + path + "' for writing");
    f << text;
    f.flush();
    if (!f) throw OutputError("write to '" + path + "' failed");
}

// ------------------------------------------------------------ results

struct Assertion {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct RunResult {
    Table primary;
    std::vector<std::pair<std::string, Table>> extra;  // suffix, table
    std::vector<Assertion> assertions;
    nlohmann::ordered_json summary = nlohmann::ordered_json::object();

    void check(const std::string& name, bool passed, const std::string& detail = "") { assertions.push_back({name, passed, detail}); }

    bool all_passed() const {
        for (const auto& a : assertions)
            if (!a.passed) return false;
        return true;
    }
};

// ------------------------------------------------------------ models

struct ModelSpec {
    std::string kind;
    SpinGraph graph{1, {}};
    Interaction phi;
    std::optional<XxzParams> xxz;
    bool periodic = false;
    bool chain = false;  // path or ring built from L
};

inline XxzParams xxz_params(const RunConfig& c, int L, XxzBoundary b) {
    const double J = c.real("model", "J");
    try {
        if (auto d = c.optional_real("model", "Delta")) return XxzParams::from_delta(L, *d, J, b);
        return XxzParams::from_q(L, c.optional_real("model", "q").value_or(0.5), J, b);
    } catch (const DomainError& e) {
        throw ConfigError(std::string("[model]: ") + e.what());
    }
}

/// Term file: "term x y ..." followed by the rows of the local matrix; entries are "re" or "re:im".
inline Interaction parse_terms(std::istream& in, const std::string& name, const SpinSpace& space) {
    std::vector<std::pair<std::vector<Vertex>, Matrix>> terms;
    std::string raw;
    int line = 0;
    std::vector<Vertex> sites;
    Matrix m;
    int row = 0, dim = 0;
    auto fail = [&](const std::string& msg) { throw ConfigError(name + ":" + std::to_string(line) + ": " + msg); };
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        std::istringstream ls(hash == std::string::npos ? raw : raw.substr(0, hash));
        std::string head;
        if (!(ls >> head)) continue;
        if (head == "term") {
            if (row < dim) fail("previous term has " + std::to_string(row) + " of " + std::to_string(dim) + " rows");
            sites.clear();
            Vertex x;
            while (ls >> x) {
                if (x < 0 || x >= space.num_sites()) fail("site " + std::to_string(x) + " outside the graph");
                sites.push_back(x);
            }
            if (!ls.eof() || sites.empty()) fail("expected 'term x y ...'");
            dim = 1;
            for (Vertex s : sites) dim *= space.site_dim(s);
            m = Matrix::Zero(dim, dim);
            row = 0;
            continue;
        }
        if (row >= dim) fail("matrix row outside a term block");
        std::vector<std::string> toks{head};
        for (std::string t; ls >> t;) toks.push_back(t);
        if (static_cast<int>(toks.size()) != dim) fail("expected " + std::to_string(dim) + " entries");
        for (int j = 0; j < dim; ++j) {
            try {
                const auto colon = toks[j].find(':');
                std::size_t p1 = 0, p2 = 0;
                const double re = std::stod(toks[j].substr(0, colon), &p1);
                double im = 0.0;
                if (colon != std::string::npos) im = std::stod(toks[j].substr(colon + 1), &p2);
                if (p1 != (colon == std::string::npos ? toks[j].size() : colon)) throw DomainError("trailing");
                if (colon != std::string::npos && p2 != toks[j].size() - colon - 1) throw DomainError("trailing");
                m(row, j) = cplx(re, im);
            } catch (const std::exception&) {
                fail("bad entry '" + toks[j] + "'");
            }
        }
        if (++row == dim) terms.emplace_back(sites, m);
    }
    if (row < dim) fail("last term is incomplete");
    if (terms.empty()) throw ConfigError(name + ": no terms");
    try {
        return custom(terms, space);
    } catch (const DomainError& e) {
        throw ConfigError(name + ": " + e.what());
    }
}

inline SpinGraph scaled_graph(const SpinGraph& g, double J) {
    std::vector<Edge> edges = g.edges();
    for (auto& e : edges) e.weight *= J;
    return SpinGraph(g.num_vertices(), edges, g.spins());
}

inline ModelSpec build_model(const RunConfig& c, std::optional<int> L_override = std::nullopt) {
    ModelSpec m;
    m.kind = c.str("model", "model");
    const int L = L_override ? *L_override : static_cast<int>(c.integer("model", "L"));
    if (L < 2) c.bad("model", "L", "expected an integer >= 2");
    m.periodic = c.boolean("model", "periodic");
    const double J = c.real("model", "J");
    const auto& graph_path = c.str("model", "graph");
    auto chain_graph = [&](HalfInteger s) {
        if (m.periodic && L < 3) c.bad("model", "L", "a ring needs L >= 3");
        m.chain = true;
        return m.periodic ? ring_graph(L, s, J) : path_graph(L, s, J);
    };
    auto file_graph = [&] {
        try {
            return scaled_graph(read_graph_file(graph_path), J);
        } catch (const DomainError& e) {
            throw ConfigError(c.setting("model", "graph").origin + ": " + e.what());
        }
    };
    if (m.kind == "heisenberg") {
        m.graph = graph_path.empty() || L_override ? chain_graph(c.spin("model", "spin")) : file_graph();
        m.phi = heisenberg(m.graph);
    } else if (m.kind == "aklt") {
        if (c.is_set("model", "spin") && c.spin("model", "spin") != half(2)) c.bad("model", "spin", "aklt requires spin 1");
        if (J != 1.0) c.bad("model", "J", "aklt has no coupling parameter");
        m.graph = chain_graph(half(2));
        m.phi = aklt(L, m.periodic);
    } else if (m.kind == "xxz_open" || m.kind == "xxz_periodic") {
        const bool per = m.kind == "xxz_periodic";
        if (per && L < 3) c.bad("model", "L", "a ring needs L >= 3");
        m.xxz = xxz_params(c, L, per ? XxzBoundary::Periodic : XxzBoundary::OpenWithField);
        m.graph = xxz_graph(*m.xxz);
        m.periodic = per;
        m.chain = true;
        m.phi = xxz(*m.xxz);
    } else if (m.kind == "custom") {
        m.graph = graph_path.empty() ? chain_graph(c.spin("model", "spin")) : file_graph();
        const auto& terms = c.str("model", "terms");
        if (terms.empty()) c.bad("model", "terms", "model = custom needs a term file");
        std::ifstream f(terms);
        if (!f) throw ConfigError(c.setting("model", "terms").origin + ": cannot open term file '" + terms + "'");
        m.phi = parse_terms(f, terms, SpinSpace(m.graph));
    } else {
        c.bad("model", "model", "expected heisenberg, aklt, xxz_open, xxz_periodic or custom");
    }
    return m;
}

inline bool is_path(const SpinGraph& g) {
    if (!g.is_connected() || static_cast<int>(g.edges().size()) != g.num_vertices() - 1) return false;
    for (Vertex x = 0; x < g.num_vertices(); ++x)
        if (g.neighbors(x).size() > 2) return false;
    return true;
}

inline bool positive_weights(const SpinGraph& g) {
    for (const auto& e : g.edges())
        if (!(e.weight > 0.0)) return false;
    return true;
}

inline Matrix local_observable(const RunConfig& c, const std::string& section, HalfInteger s) {
    const auto& name = c.str(section, "observable");
    const auto m = spin_matrices(s);
    const double scale = name.rfind("sigma", 0) == 0 ? 2.0 : 1.0;
    if (scale == 2.0 && s != half(1)) c.bad(section, "observable", "Pauli observables need spin-1/2 sites");
    if (name == "S1" || name == "sigma1") return scale * m.S1;
    if (name == "S2" || name == "sigma2") return scale * m.S2;
    if (name == "S3" || name == "sigma3") return scale * m.S3;
    c.bad(section, "observable", "expected S1, S2, S3, sigma1, sigma2 or sigma3");
}

inline std::string fmt(double v) { return format_double(v); }

// ------------------------------------------------------------ runners

inline RunResult run_spectrum(const RunConfig& c) {
    const auto model = build_model(c);
    const auto opt = solver_options(c);
    const SpinSpace space(model.graph);
    const long long levels = c.integer("spectrum", "levels");
    if (levels < 0) c.bad("spectrum", "levels", "expected an integer >= 0");
    const bool sectors = c.boolean("spectrum", "sectors");

    std::vector<std::optional<HalfInteger>> Ms;
    if (sectors)
        for (auto M : magnetization_values(space)) Ms.emplace_back(M);
    else
        Ms.emplace_back(std::nullopt);

    auto blocks = parallel_map(Ms.size(), threads(c), [&](std::size_t i) {
        std::optional<SectorBasis> sec;
        if (Ms[i]) sec.emplace(magnetization_sector(space, *Ms[i]));
        const auto H = assemble(model.phi, space, sec ? &*sec : nullptr);
        if (levels == 0) return full_spectrum(H, false, opt).eigenvalues;
        return lowest_levels(H, static_cast<int>(std::min<Eigen::Index>(levels, H.dim())), false, opt).eigenvalues;
    });

    RunResult r;
    r.primary.columns = {"M", "index", "energy"};
    std::vector<double> all;
    for (std::size_t i = 0; i < Ms.size(); ++i)
        for (std::size_t k = 0; k < blocks[i].size(); ++k) {
            r.primary.rows.push_back({Ms[i] ? Ms[i]->value() : NAN, static_cast<long long>(k), blocks[i][k]});
            all.push_back(blocks[i][k]);
        }
    std::sort(all.begin(), all.end());
    r.summary["dimension"] = static_cast<long long>(space.total_dim());
    if (!all.empty()) r.summary["lowest_energy"] = json_number(all.front());
    if (levels == 0) {
        SpectrumReport rep;
        rep.eigenvalues = all;
        if (all.size() >= 2) {
            const auto g = spectral_gap(rep, opt.degeneracy_tol);
            r.summary["ground_degeneracy"] = g.ground_degeneracy;
            r.summary["gap"] = json_number(g.gap);
        }
        if (sectors && space.total_dim() <= 1024) {
            const auto full = full_spectrum(assemble(model.phi, space), false, opt).eigenvalues;
            double dev = full.size() == all.size() ? 0.0 : INFINITY;
            double scale = 1.0;
            for (std::size_t i = 0; i < full.size() && i < all.size(); ++i) {
                dev = std::max(dev, std::abs(full[i] - all[i]));
                scale = std::max(scale, std::abs(full[i]));
            }
            r.check("sector_union_matches_full_spectrum", dev <= 1e-9 * scale, "max deviation " + fmt(dev));
        }
    }
    return r;
}

inline SpinResolvedLevels classify_model(const ModelSpec& m, const RunConfig& c) {
    ClassifyOptions copt;
    copt.sectors = SectorSelection::All;
    copt.solver = solver_options(c);
    copt.degeneracy_tol = copt.solver.degeneracy_tol;
    copt.threads = threads(c);
    if (m.kind == "heisenberg") return classify_su2(m.phi, SpinSpace(m.graph), copt);
    if (m.kind == "xxz_open") return classify_suq2(*m.xxz, copt);
    throw DomainError("foel: total-spin labels need model = heisenberg (SU(2)) or xxz_open (SU_q(2)), got " + m.kind);
}

inline Table spin_table(const SpinResolvedLevels& levels) {
    Table t;
    t.columns = {"S", "E_min", "E_max", "multiplets"};
    for (const auto& [S, e] : levels.min_energy) {
        const auto cnt = levels.multiplet_counts.contains(S) ? levels.multiplet_counts.at(S) : 0;
        t.rows.push_back({S.value(), e, levels.max_energy.at(S), static_cast<long long>(cnt)});
    }
    return t;
}

inline nlohmann::ordered_json verdict_json(const OrderingVerdict& v) {
    nlohmann::ordered_json j;
    j["holds"] = v.holds;
    j["margin"] = json_number(v.margin);
    if (v.witness) {
        j["witness"] = {{"S", v.witness->S.value()}, {"S_prime", v.witness->S_prime.value()},
                        {"E_S", json_number(v.witness->E_S)}, {"E_S_prime", json_number(v.witness->E_S_prime)}};
    }
    return j;
}

inline RunResult run_foel(const RunConfig& c) {
    const auto model = build_model(c);
    const auto levels = classify_model(model, c);
    const double E0 = levels.ground_energy();

    RunResult r;
    r.primary.columns = {"S3", "energy_minus_E0", "S"};
    std::vector<double> energies;
    for (const auto& l : levels.levels) {
        r.primary.rows.push_back({l.M.value(), l.energy - E0, l.S.value()});
        energies.push_back(l.energy);
    }
    r.extra.emplace_back("_table", spin_table(levels));

    const auto verdict = foel_check(levels);
    r.summary["ground_energy"] = json_number(E0);
    r.summary["S_max"] = levels.S_max.value();
    r.summary["foel"] = verdict_json(verdict);

    const bool ferro_chain =
        model.kind == "xxz_open" || (model.kind == "heisenberg" && is_path(model.graph) && positive_weights(model.graph));
    if (ferro_chain) {
        r.check("foel_holds", verdict.holds, "smallest adjacent margin " + fmt(verdict.margin));
        const HalfInteger Sm = levels.S_max;
        if (Sm.twice() >= 2 && levels.min_energy.contains(Sm - half(2))) {
            std::sort(energies.begin(), energies.end());
            SpectrumReport rep;
            rep.eigenvalues = energies;
            const auto g = spectral_gap(rep, solver_options(c).degeneracy_tol);
            const double diff = levels.min_energy.at(Sm - half(2)) - levels.min_energy.at(Sm);
            r.summary["gap"] = json_number(g.gap);
            r.check("gap_equals_top_spin_difference", std::abs(g.gap - diff) <= 1e-9,
                    "gap " + fmt(g.gap) + ", E(S_max-1)-E(S_max) " + fmt(diff));
        }
    }
    if (model.kind == "heisenberg" && model.graph.bipartition() && positive_weights(model.graph)) {
        const auto top = top_levels_decreasing(levels, bipartite_spin_imbalance(model.graph));
        r.summary["top_levels_decreasing"] = verdict_json(top);
        r.check("top_levels_decreasing", top.holds, "smallest margin " + fmt(top.margin));
    }
    return r;
}

inline RunResult run_liebmattis(const RunConfig& c) {
    const auto model = build_model(c);
    if (model.kind != "heisenberg") throw DomainError("liebmattis: requires model = heisenberg on a bipartite graph");
    ClassifyOptions copt;
    copt.sectors = SectorSelection::NonNegative;
    copt.solver = solver_options(c);
    copt.degeneracy_tol = copt.solver.degeneracy_tol;
    copt.threads = threads(c);
    const auto rep = lieb_mattis_check(model.graph, {}, {}, copt);
    RunResult r;
    r.primary = spin_table(rep.levels);
    r.summary["S_A"] = rep.S_A.value();
    r.summary["S_B"] = rep.S_B.value();
    r.summary["ground_spin"] = rep.ground_spin.value();
    r.summary["verdict"] = verdict_json(rep.verdict);
    if (positive_weights(model.graph))
        r.check("lieb_mattis_ordering", rep.verdict.holds, "ground spin " + rep.ground_spin.str() + ", margin " + fmt(rep.verdict.margin));
    return r;
}

inline RunResult run_ssep(const RunConfig& c) {
    const auto model = build_model(c);
    if (model.kind != "heisenberg") throw DomainError("ssep: the rate graph comes from model = heisenberg with a graph file or chain");
    const SpinGraph rates(model.graph.num_vertices(), model.graph.edges());
    const auto opt = solver_options(c);
    const auto rep = ssep_gaps(rates, threads(c), opt);
    RunResult r;
    r.primary.columns = {"n", "dim", "lambda_n", "aldous_margin"};
    double stationary = 0.0;
    for (const auto& [n, gap] : rep.gaps) {
        r.primary.rows.push_back({static_cast<long long>(n), static_cast<long long>(rep.dims.at(n)), gap, std::abs(gap - rep.gaps.at(1))});
        stationary = std::max(stationary, rep.stationary_checks.at(n));
    }
    r.summary["aldous_margin"] = json_number(rep.aldous_margin);
    r.summary["path_graph"] = is_path(rates);
    r.check("uniform_measure_stationary", stationary <= 1e-12, "max ||L 1|| " + fmt(stationary));
    if (is_path(rates)) r.check("aldous_margin_below_1e-9", rep.aldous_margin < 1e-9, "margin " + fmt(rep.aldous_margin));
    if (rates.num_vertices() <= 12) {
        try {
            const auto conj = xxx_conjugacy_check(rates, 1e-10, opt);
            r.check("spin_conjugacy", true, "max deviation " + fmt(conj.max_deviation));
        } catch (const ConjugacyError& e) {
            r.check("spin_conjugacy", false, e.what());
        }
    }
    return r;
}

inline RunResult run_droplet(const RunConfig& c) {
    const double q = c.optional_real("model", "q").value_or(0.5);
    if (c.is_set("model", "Delta")) c.bad("model", "Delta", "droplet is parametrised by q");
    if (!(q > 0.0 && q < 1.0)) c.bad("model", "q", "expected 0 < q < 1");
    const int n = static_cast<int>(c.integer("droplet", "n"));
    const int Lmin = static_cast<int>(c.integer("droplet", "Lmin"));
    const int Lmax = static_cast<int>(c.integer("droplet", "Lmax"));
    if (n < 0) c.bad("droplet", "n", "expected an integer >= 0");
    if (Lmin < std::max(3, n + 1)) c.bad("droplet", "Lmin", "expected Lmin >= max(3, n + 1)");
    if (Lmax < Lmin) c.bad("droplet", "Lmax", "expected Lmax >= Lmin");
    std::vector<int> Ls;
    for (int L = Lmin; L <= Lmax; ++L) Ls.push_back(L);
    const auto t = convergence_table(q, n, Ls, threads(c), solver_options(c));

    RunResult r;
    r.primary.columns = {"q", "n", "L", "E_L_periodic", "E_open_suq", "E_formula", "abs_dev", "band_width_measured", "band_width_formula"};
    bool exact = true;
    double exact_dev = 0.0, width_dev = 0.0;
    for (const auto& row : t.rows) {
        r.primary.rows.push_back({q, static_cast<long long>(n), static_cast<long long>(row.L), row.E_periodic, row.E_open, t.formula_E,
                                  row.dev_periodic, n >= 1 ? row.band_width : NAN, t.formula_width});
        exact_dev = std::max(exact_dev, row.dev_periodic);
        if (row.L % 2 == 0) width_dev = std::max(width_dev, std::abs(row.band_width - magnon_bandwidth(q)));
    }
    exact = exact_dev < 1e-9;
    const auto& last = t.rows.back();
    r.summary["formula_E"] = json_number(t.formula_E);
    r.summary["periodic_monotone"] = t.periodic_monotone_from(Lmin);
    r.summary["open_monotone"] = t.open_monotone_from(Lmin);
    r.summary["geometric_tolerance_at_Lmax"] = json_number(t.tolerance(last.L));
    r.check("periodic_deviation_below_1e-2", last.dev_periodic < 1e-2, "L=" + std::to_string(last.L) + " dev " + fmt(last.dev_periodic));
    r.check("open_deviation_below_2e-2", last.dev_open < 2e-2, "L=" + std::to_string(last.L) + " dev " + fmt(last.dev_open));
    if (n == 1) {
        r.check("one_magnon_energy_exact", exact, "max dev " + fmt(exact_dev));
        r.check("one_magnon_width_exact", width_dev < 1e-6, "max |width - 4q/(1+q^2)| over even L " + fmt(width_dev));
    } else if (n >= 2) {
        const auto v = compare_width(q, n, last.band_width);
        r.summary["width"] = {{"measured", json_number(v.measured)},
                              {"printed", json_number(v.printed)},
                              {"printed_over_delta", json_number(v.printed_over_delta)},
                              {"rel_dev_printed", json_number(v.rel_dev_printed)},
                              {"rel_dev_over_delta", json_number(v.rel_dev_over_delta)},
                              {"winner", to_string(v.winner)}};
        r.check("width_matches_exactly_one_form", v.winner == WidthMatch::Printed || v.winner == WidthMatch::PrintedOverDelta,
                std::string("winner ") + to_string(v.winner));
    }
    return r;
}

inline std::vector<double> time_grid(const RunConfig& c) {
    const double tmax = c.real("lightcone", "tmax"), dt = c.real("lightcone", "dt");
    if (!(tmax >= 0.0)) c.bad("lightcone", "tmax", "expected a number >= 0");
    if (!(dt > 0.0)) c.bad("lightcone", "dt", "expected a positive number");
    const long long steps = std::llround(tmax / dt);
    std::vector<double> ts;
    for (long long k = 0; k <= steps; ++k) ts.push_back(std::min(tmax, static_cast<double>(k) * dt));
    return ts;
}

inline RunResult run_lightcone(const RunConfig& c) {
    const auto model = build_model(c);
    const auto& g = model.graph;
    const double lambda = c.real("lightcone", "lambda");
    if (!(lambda > 0.0)) c.bad("lightcone", "lambda", "expected a positive number");
    long long site = c.integer("lightcone", "site");
    if (site == -1) site = g.num_vertices() / 2;
    if (site < 0 || site >= g.num_vertices()) c.bad("lightcone", "site", "expected a vertex index or -1");
    const LocalObservable B{{static_cast<Vertex>(site)}, local_observable(c, "lightcone", g.spin(static_cast<Vertex>(site)))};
    std::vector<Vertex> xs;
    for (Vertex x = 0; x < g.num_vertices(); ++x) xs.push_back(x);
    const auto ts = time_grid(c);
    const auto grid = lightcone_grid(model.phi, g, B, lambda, xs, ts, threads(c), solver_options(c));

    RunResult r;
    r.primary.columns = {"x", "t", "measured", "bound_thm1", "bound_corollary"};
    for (const auto& row : grid.rows)
        r.primary.rows.push_back({static_cast<long long>(row.x), row.t, row.measured, row.bound_thm1, row.bound_corollary});
    r.summary["phi_norm"] = json_number(grid.phi_norm);
    r.summary["lambda"] = json_number(lambda);
    r.summary["site"] = site;
    r.check("commutator_within_bound", grid.violations == 0, std::to_string(grid.violations) + " violations");
    r.check("zero_outside_support_at_t0", grid.max_zero_time_outside == 0.0, "max " + fmt(grid.max_zero_time_outside));
    return r;
}

inline RunResult run_cluster(const RunConfig& c) {
    const auto model = build_model(c);
    const auto& g = model.graph;
    const auto opt = solver_options(c);
    const double lambda = c.real("cluster", "lambda");
    if (!(lambda > 0.0)) c.bad("cluster", "lambda", "expected a positive number");
    const SpinSpace space(g);
    std::optional<HalfInteger> M;
    const auto& sector = c.str("cluster", "sector");
    if (sector == "auto") {
        if (model.kind != "custom") M = half(space.max_magnetization().twice() % 2);
    } else if (sector != "none") {
        M = c.spin("cluster", "sector");
        const int tmax = space.max_magnetization().twice();
        if (std::abs(M->twice()) > tmax || (tmax - M->twice()) % 2 != 0) c.bad("cluster", "sector", "magnetization not achievable");
    }
    const auto wp = c.integer("cluster", "window_points");
    if (wp < 1) c.bad("cluster", "window_points", "expected an integer >= 1");
    for (Vertex x = 1; x < g.num_vertices(); ++x)
        if (g.spin(x) != g.spin(0)) throw DomainError("cluster: uniform site spins required");
    const Matrix A = local_observable(c, "cluster", g.spin(0));

    const auto terms = model.phi.product_terms();
    const auto gs = find_ground_state(space, terms, M, opt);
    const double phi_norm = lambda_norm(model.phi, lambda, g);
    ClusteringOptions copt;
    copt.window_points = static_cast<int>(wp);
    copt.threads = threads(c);
    const auto rep = clustering_report(gs, g, A, A, lambda, phi_norm, copt);

    RunResult r;
    r.primary.columns = {"x", "y", "d", "b", "corr_abs", "bound_decay", "gamma", "mu"};
    for (const auto& row : rep.rows)
        r.primary.rows.push_back({static_cast<long long>(row.x), static_cast<long long>(row.y), static_cast<long long>(row.d), row.b,
                                  row.corr_abs, row.bound_decay, rep.gamma, rep.mu});
    r.summary["ground_energy"] = json_number(gs.energy);
    r.summary["gamma"] = json_number(rep.gamma);
    r.summary["mu"] = json_number(rep.mu);
    r.summary["phi_norm"] = json_number(phi_norm);
    r.summary["c_fit"] = json_number(rep.c_fit);
    r.summary["asserted_points"] = rep.asserted_points;
    r.summary["sector"] = M ? nlohmann::ordered_json(M->value()) : nlohmann::ordered_json(nullptr);
    r.check("gap_resolved", !rep.gap_too_small, "gamma " + fmt(rep.gamma));
    r.check("decay_bound_holds", rep.decay_holds, std::to_string(rep.asserted_points) + " asserted points");
    r.check("large_b_bound_holds", rep.large_b_holds);
    r.check("zero_b_matches_truncated_correlation", rep.zerob_max_deviation < 1e-9 && rep.zerob_max_imag < 1e-9,
            "max deviation " + fmt(rep.zerob_max_deviation) + ", max imaginary part " + fmt(rep.zerob_max_imag));
    return r;
}

inline std::vector<double> lambda_grid(const RunConfig& c) {
    const double lo = c.real("perturb", "lambda_min"), hi = c.real("perturb", "lambda_max");
    const long long steps = c.integer("perturb", "steps");
    if (steps < 2) c.bad("perturb", "steps", "expected an integer >= 2");
    if (!(hi > lo)) c.bad("perturb", "lambda_max", "expected lambda_max > lambda_min");
    std::vector<double> out;
    for (long long i = 0; i < steps; ++i) {
        double v = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(steps - 1);
        if (std::abs(v) < 1e-12 * std::max(std::abs(lo), std::abs(hi))) v = 0.0;
        out.push_back(v);
    }
    if (std::find(out.begin(), out.end(), 0.0) == out.end()) c.bad("perturb", "steps", "the lambda grid must contain 0");
    return out;
}

inline RunResult run_perturb(const RunConfig& c) {
    std::vector<int> sizes = c.int_list("perturb", "sizes");
    if (sizes.empty()) sizes.push_back(static_cast<int>(c.integer("model", "L")));
    if (!c.str("model", "graph").empty() && c.str("model", "model") != "aklt")
        c.bad("model", "graph", "perturb runs on chains built from L");
    const auto lambdas = lambda_grid(c);
    const auto levels = c.integer("perturb", "levels");
    if (levels < 2) c.bad("perturb", "levels", "expected an integer >= 2");
    std::vector<SweepSystem> systems;
    for (int L : sizes) {
        auto m = build_model(c, L);
        const SpinSpace space(m.graph);
        for (Vertex x = 1; x < m.graph.num_vertices(); ++x)
            if (m.graph.spin(x) != m.graph.spin(0)) throw DomainError("perturb: uniform site spins required");
        const auto s = spin_matrices(m.graph.spin(0));
        systems.push_back(SweepSystem{L, space, m.phi, translated_family(kron(s.S3, s.S3), 2, L, m.periodic, space, "s3s3")});
    }
    const auto opt = solver_options(c);
    const auto sweep = gap_sweep(systems, lambdas, static_cast<int>(levels), threads(c), opt);

    RunResult r;
    r.primary.columns = {"L", "lambda", "ground_energy", "degeneracy", "gap"};
    for (const auto& row : sweep.rows)
        r.primary.rows.push_back({static_cast<long long>(row.L), row.lambda, row.ground_energy, static_cast<long long>(row.degeneracy), row.gap});
    nlohmann::ordered_json norms = nlohmann::ordered_json::object();
    for (const auto& [L, v] : sweep.perturbation_norms) norms[std::to_string(L)] = json_number(v);
    r.summary["perturbation_norms"] = norms;
    r.summary["weyl_worst_ratio"] = json_number(sweep.weyl_worst_ratio);
    if (sweep.stability_range) r.summary["stability_range"] = {sweep.stability_range->first, sweep.stability_range->second};
    r.check("gap_positive", sweep.all_gapped);
    r.check("weyl_bound", sweep.weyl_holds, "worst ratio " + fmt(sweep.weyl_worst_ratio));
    r.check("gap_continuity", sweep.continuity_holds);
    bool match = true;
    for (std::size_t i = 0; i < systems.size(); ++i) {
        const auto& sys = systems[i];
        const auto H = assemble(sys.base, sys.space);
        const auto rep = lowest_levels(H, static_cast<int>(std::min<Eigen::Index>(levels, H.dim())), false, opt);
        const auto g = spectral_gap(rep, opt.degeneracy_tol);
        const auto& row = sweep.at(sys.L, 0.0);
        match = match && row.gap == g.gap && row.ground_energy == g.ground_energy && row.degeneracy == g.ground_degeneracy;
    }
    r.check("zero_coupling_matches_unperturbed", match);
    return r;
}

inline RunResult run(const RunConfig& c) {
    const auto& s = c.subcommand;
    if (s == "spectrum") return run_spectrum(c);
    if (s == "foel") return run_foel(c);
    if (s == "liebmattis") return run_liebmattis(c);
    if (s == "ssep") return run_ssep(c);
    if (s == "droplet") return run_droplet(c);
    if (s == "lightcone") return run_lightcone(c);
    if (s == "cluster") return run_cluster(c);
    if (s == "perturb") return run_perturb(c);
    throw ConfigError("unknown subcommand '" + s + "'");
}

// ------------------------------------------------------------ outputs

inline std::string primary_path(const RunConfig& c) {
    const auto& out = c.str("output", "out");
    return out.empty() ? c.subcommand + "." + c.str("output", "format") : out;
}

/// "dir/name.ext" + "_table" -> "dir/name_table.ext".
inline std::string suffixed_path(const std::string& path, const std::string& suffix) {
    const auto slash = path.find_last_of('/');
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + suffix;
    return path.substr(0, dot) + suffix + path.substr(dot);
}

inline nlohmann::ordered_json config_echo(const RunConfig& c) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& k : schema()) {
        const auto& s = c.setting(k.section, k.key);
        j[k.section][k.key] = {{"value", s.value}, {"origin", s.origin}};
    }
    return j;
}

inline nlohmann::ordered_json versions() {
    nlohmann::ordered_json j;
    j["spinlab"] = kVersion;
    j["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." + std::to_string(EIGEN_MINOR_VERSION);
#if defined(__VERSION__)
    j["compiler"] = __VERSION__;
#endif
    j["cxx_standard"] = static_cast<long long>(__cplusplus);
    return j;
}

struct Outcome {
    int exit_code = kOk;
    std::vector<std::string> written;
};

/// Runs one configuration and writes its tables and manifest.
inline Outcome execute(const RunConfig& c, std::ostream& err) {
    const auto start = std::chrono::steady_clock::now();
    const std::string out = primary_path(c);
    const std::string manifest_path = out + ".manifest.json";
    nlohmann::ordered_json manifest;
    manifest["subcommand"] = c.subcommand;
    manifest["config"] = config_echo(c);
    manifest["version"] = versions();
    Outcome o;
    RunResult result;
    std::string error;
    try {
        result = run(c);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        error = e.what();
        o.exit_code = kSolverError;
    }
    try {
        if (error.empty()) {
            const auto& fmt_ = c.str("output", "format");
            write_file(out, render(result.primary, fmt_));
            o.written.push_back(out);
            for (const auto& [suffix, table] : result.extra) {
                const auto p = suffixed_path(out, suffix);
                write_file(p, render(table, fmt_));
                o.written.push_back(p);
            }
            o.exit_code = result.all_passed() ? kOk : kAssertionFailed;
        }
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        manifest["wall_time_seconds"] = wall;
        manifest["outputs"] = o.written;
        nlohmann::ordered_json list = nlohmann::ordered_json::array();
        for (const auto& a : result.assertions) list.push_back({{"name", a.name}, {"passed", a.passed}, {"detail", a.detail}});
        manifest["assertions"] = list;
        manifest["summary"] = result.summary;
        manifest["all_passed"] = error.empty() && result.all_passed();
        if (!error.empty()) manifest["error"] = error;
        manifest["exit_code"] = o.exit_code;
        write_file(manifest_path, manifest.dump(2) + "\n");
    } catch (const OutputError& e) {
        err << "spinlab: " << e.what() << "\n";
        o.exit_code = kOutputError;
        return o;
    }
    if (!error.empty()) err << "spinlab: " << error << "\n";
    for (const auto& a : result.assertions)
        if (!a.passed) err << "spinlab: assertion " << a.name << " failed: " << a.detail << "\n";
    return o;
}

/// Full command line: subcommand, flags and optional --config.
inline int main_entry(int argc, const char* const* argv, std::ostream& err = std::cerr) {
    CLI::App app{"spinlab: exact diagonalization experiments on quantum spin systems"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path;
    app.add_option("--config", config_path, "key = value configuration file");
    std::map<std::string, std::string> flag_values;
    std::map<std::string, bool> flag_bools;
    auto add_flags = [&](CLI::App& target, const std::string& section) {
        for (const auto& k : schema()) {
            if (k.section != section) continue;
            const std::string id = RunConfig::id(k.section, k.key);
            if (k.key == "periodic") {
                target.add_flag("--" + k.flag, flag_bools[id], k.help);
            } else {
                target.add_option("--" + k.flag, flag_values[id], k.help);
            }
        }
    };
    add_flags(app, "model");
    add_flags(app, "solver");
    add_flags(app, "output");
    std::map<std::string, CLI::App*> subs;
    for (const auto& name : subcommands()) {
        subs[name] = app.add_subcommand(name, name + " experiment");
        add_flags(*subs[name], name);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "spinlab: " << e.what() << "\n";
        return kConfigError;
    }
    std::string sub;
    for (const auto& [name, s] : subs)
        if (s->parsed()) sub = name;

    try {
        std::map<std::string, Setting> flags;
        auto from_flags = [&](CLI::App& owner, const std::string& section) {
            for (const auto& k : schema()) {
                if (k.section != section) continue;
                const std::string id = RunConfig::id(k.section, k.key);
                if (owner.count("--" + k.flag) == 0) continue;
                flags[id] = Setting{k.key == "periodic" ? "true" : flag_values[id], "--" + k.flag};
            }
        };
        from_flags(app, "model");
        from_flags(app, "solver");
        from_flags(app, "output");
        from_flags(*subs[sub], sub);
        const auto file = config_path.empty() ? std::map<std::string, Setting>{} : read_config_file(config_path);
        const auto cfg = make_config(sub, file, flags);
        return execute(cfg, err).exit_code;
    } catch (const ConfigError& e) {
        err << "spinlab: config error: " << e.what() << "\n";
        return kConfigError;
    }
}

}  // namespace spinlab::cli
