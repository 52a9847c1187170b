#include "spinlab/cli.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace spinlab;
using namespace spinlab::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("spinlab_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run_cli(std::vector<std::string> args, std::string* err_text = nullptr) {
    args.insert(args.begin(), "spinlab");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream err;
    const int code = main_entry(static_cast<int>(argv.size()), argv.data(), err);
    if (err_text) *err_text = err.str();
    return code;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

nlohmann::json manifest(const fs::path& out) { return nlohmann::json::parse(slurp(out.string() + ".manifest.json")); }

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::stringstream ss(text);
    for (std::string line; std::getline(ss, line);) {
        std::vector<std::string> cells;
        std::stringstream ls(line);
        for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
        rows.push_back(cells);
    }
    return rows;
}

}  // namespace

TEST(Emit, DoubleFormatRoundTrips) {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0, 5.0}) EXPECT_EQ(std::stod(format_double(v)), v);
    EXPECT_EQ(format_double(0.1), "0.10000000000000001");
    EXPECT_EQ(format_double(NAN), "nan");
}

TEST(Emit, EmptyTableIsHeaderOnly) {
    Table t;
    t.columns = {"n", "dim", "lambda_n", "aldous_margin"};
    EXPECT_EQ(to_csv(t), "n,dim,lambda_n,aldous_margin\n");
    const auto j = to_json(t);
    EXPECT_TRUE(j["data"]["n"].empty());
}

TEST(Emit, SameReportTwiceIsByteIdentical) {
    Table t;
    t.columns = {"a", "b", "c"};
    t.rows = {{1LL, 0.1, std::string("x")}, {2LL, NAN, std::string("y")}};
    EXPECT_EQ(render(t, "csv"), render(t, "csv"));
    EXPECT_EQ(render(t, "json"), render(t, "json"));
    const auto j = nlohmann::json::parse(render(t, "json"));
    EXPECT_TRUE(j["data"]["b"][1].is_null());
    EXPECT_EQ(j["columns"][0], "a");
}

TEST(Config, ParsesSectionsAndRejectsUnknownKeys) {
    std::istringstream ok("# comment\n[model]\nmodel = aklt ; trailing\nL = 6\n\n[solver]\ntol=1e-9\n");
    const auto m = parse_config(ok, "cfg");
    EXPECT_EQ(m.at("model.model").value, "aklt");
    EXPECT_EQ(m.at("model.L").origin, "cfg:4");
    EXPECT_EQ(m.at("solver.tol").value, "1e-9");

    auto fails = [](const std::string& text, const std::string& needle) {
        std::istringstream in(text);
        try {
            parse_config(in, "cfg");
        } catch (const ConfigError& e) {
            EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
            return;
        }
        ADD_FAILURE() << "no error for: " << text;
    };
    fails("[model]\nLL = 3\n", "cfg:2: unknown key 'LL'");
    fails("[modle]\n", "cfg:1: unknown section");
    fails("L = 3\n", "before any [section]");
    fails("[model]\nL 3\n", "cfg:2: expected 'key = value'");
    fails("[model]\nL = 3\nL = 4\n", "cfg:3: duplicate key 'L'");
    fails("[lightcone]\nn = 2\n", "unknown key 'n' in [lightcone]");
}

TEST(Config, FlagsWinOverFileAndDefaults) {
    std::istringstream in("[model]\nL = 3\nJ = 2\n");
    const auto file = parse_config(in, "cfg");
    const auto c = make_config("spectrum", file, {{"model.L", {"7", "--L"}}});
    EXPECT_EQ(c.integer("model", "L"), 7);
    EXPECT_EQ(c.real("model", "J"), 2.0);
    EXPECT_EQ(c.str("solver", "tol"), "1e-10");
    EXPECT_FALSE(c.is_set("solver", "tol"));
    EXPECT_THROW(make_config("spectrum", {}, {{"model.q", {"0.5", "--q"}}, {"model.Delta", {"2", "--Delta"}}}), ConfigError);
    EXPECT_THROW(make_config("spectrum", {}, {{"output.format", {"xml", "--format"}}}), ConfigError);
    EXPECT_THROW(make_config("spectrum", {}, {{"model.L", {"x", "--L"}}}).integer("model", "L"), ConfigError);
}

TEST(Config, EveryKeyHasADefaultAndAFlag) {
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& k : schema()) {
        EXPECT_FALSE(k.flag.empty()) << k.key;
        EXPECT_TRUE(seen.insert({k.section, k.flag}).second) << k.flag;
    }
    const auto c = make_config("droplet", {}, {});
    EXPECT_EQ(c.values.size(), schema().size());
}

TEST(Cli, FoelLevelDataAndManifest) {
    const auto dir = scratch("foel");
    const auto out = dir / "levels.csv";
    ASSERT_EQ(run_cli({"foel", "--model", "heisenberg", "--spin", "1", "--L", "5", "--J", "1", "--out", out.string()}), 0);
    const auto rows = parse_csv(slurp(out));
    ASSERT_EQ(rows.front(), (std::vector<std::string>{"S3", "energy_minus_E0", "S"}));
    EXPECT_EQ(rows.size(), 1u + 243u);
    const auto table = parse_csv(slurp(dir / "levels_table.csv"));
    ASSERT_EQ(table.size(), 7u);
    for (std::size_t i = 2; i < table.size(); ++i) EXPECT_LT(std::stod(table[i][1]), std::stod(table[i - 1][1]));
    const auto m = manifest(out);
    EXPECT_TRUE(m["all_passed"].get<bool>());
    EXPECT_EQ(m["exit_code"], 0);
    EXPECT_EQ(m["config"]["model"]["L"]["value"], "5");
    EXPECT_EQ(m["config"]["model"]["L"]["origin"], "--L");
    EXPECT_TRUE(m["version"].contains("spinlab"));
    EXPECT_TRUE(m.contains("wall_time_seconds"));
    std::set<std::string> names;
    for (const auto& a : m["assertions"]) names.insert(a["name"]);
    EXPECT_TRUE(names.contains("foel_holds"));
    EXPECT_TRUE(names.contains("gap_equals_top_spin_difference"));
    EXPECT_TRUE(names.contains("top_levels_decreasing"));
}

TEST(Cli, SsepOnPathFile) {
    const auto dir = scratch("ssep");
    spit(dir / "path4.txt", "vertices 4\n0 1 1.0\n1 2 0.5\n2 3 2.0\n");
    const auto out = dir / "ssep.csv";
    ASSERT_EQ(run_cli({"ssep", "--graph", (dir / "path4.txt").string(), "--out", out.string()}), 0);
    const auto rows = parse_csv(slurp(out));
    ASSERT_EQ(rows.front(), (std::vector<std::string>{"n", "dim", "lambda_n", "aldous_margin"}));
    ASSERT_EQ(rows.size(), 4u);
    for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LT(std::stod(rows[i][3]), 1e-9);
    EXPECT_EQ(rows[2][1], "6");
}

TEST(Cli, ColumnSets) {
    const auto dir = scratch("columns");
    auto header = [&](const std::vector<std::string>& args) {
        auto full = args;
        full.push_back("--out");
        full.push_back((dir / "t.csv").string());
        EXPECT_EQ(run_cli(full), 0);
        return parse_csv(slurp(dir / "t.csv")).front();
    };
    using V = std::vector<std::string>;
    EXPECT_EQ(header({"droplet", "--n", "1", "--Lmin", "6", "--Lmax", "16"}),
              (V{"q", "n", "L", "E_L_periodic", "E_open_suq", "E_formula", "abs_dev", "band_width_measured", "band_width_formula"}));
    EXPECT_EQ(header({"lightcone", "--L", "4", "--tmax", "0.1"}), (V{"x", "t", "measured", "bound_thm1", "bound_corollary"}));
    EXPECT_EQ(header({"cluster", "--model", "aklt", "--L", "5", "--periodic"}), (V{"x", "y", "d", "b", "corr_abs", "bound_decay", "gamma", "mu"}));
    EXPECT_EQ(header({"perturb", "--model", "aklt", "--L", "5", "--periodic", "--steps", "3"}), (V{"L", "lambda", "ground_energy", "degeneracy", "gap"}));
    EXPECT_EQ(header({"spectrum", "--L", "4"}), (V{"M", "index", "energy"}));
    EXPECT_EQ(header({"liebmattis", "--L", "4"}), (V{"S", "E_min", "E_max", "multiplets"}));
}

TEST(Cli, ByteIdenticalAcrossThreadCounts) {
    const auto dir = scratch("threads");
    const std::vector<std::vector<std::string>> runs{
        {"spectrum", "--model", "aklt", "--L", "5", "--periodic"},
        {"droplet", "--n", "2", "--Lmin", "13", "--Lmax", "14"},
        {"ssep", "--L", "5"},
        {"lightcone", "--L", "5", "--tmax", "0.2"},
        {"perturb", "--model", "aklt", "--L", "5", "--periodic", "--steps", "5", "--sizes", "4,5"},
        {"cluster", "--model", "aklt", "--L", "5", "--periodic"},
    };
    for (const auto& args : runs) {
        std::vector<std::string> texts;
        for (const auto& [threads, fmt] : std::vector<std::pair<std::string, std::string>>{{"1", "csv"}, {"3", "csv"}, {"1", "json"}, {"3", "json"}}) {
            auto full = args;
            const auto out = dir / ("out_" + threads + "." + fmt);
            full.insert(full.end(), {"--threads", threads, "--format", fmt, "--out", out.string()});
            EXPECT_EQ(run_cli(full), 0) << args[0];
            texts.push_back(slurp(out));
        }
        EXPECT_FALSE(texts[0].empty());
        EXPECT_EQ(texts[0], texts[1]) << args[0];
        EXPECT_EQ(texts[2], texts[3]) << args[0];
    }
}

TEST(Cli, JsonAndCsvAgreeOnReparse) {
    const auto dir = scratch("agree");
    const auto csv = dir / "d.csv", json = dir / "d.json";
    ASSERT_EQ(run_cli({"droplet", "--n", "1", "--Lmin", "6", "--Lmax", "16", "--out", csv.string()}), 0);
    ASSERT_EQ(run_cli({"droplet", "--n", "1", "--Lmin", "6", "--Lmax", "16", "--format", "json", "--out", json.string()}), 0);
    const auto rows = parse_csv(slurp(csv));
    const auto j = nlohmann::json::parse(slurp(json));
    ASSERT_EQ(j["columns"].size(), rows.front().size());
    for (std::size_t c = 0; c < rows.front().size(); ++c) {
        const auto& col = j["data"][rows.front()[c]];
        ASSERT_EQ(col.size(), rows.size() - 1);
        for (std::size_t r = 1; r < rows.size(); ++r) EXPECT_EQ(col[r - 1].get<double>(), std::stod(rows[r][c]));
    }
}

TEST(Cli, ConfigFileWithFlagOverride) {
    const auto dir = scratch("config");
    spit(dir / "run.ini", "[model]\nmodel = aklt\nL = 4\nperiodic = true\n[output]\nout = " + (dir / "a.csv").string() + "\n");
    ASSERT_EQ(run_cli({"spectrum", "--config", (dir / "run.ini").string(), "--L", "5"}), 0);
    const auto m = manifest(dir / "a.csv");
    EXPECT_EQ(m["config"]["model"]["L"]["value"], "5");
    EXPECT_EQ(m["config"]["model"]["model"]["origin"], (dir / "run.ini").string() + ":2");
    EXPECT_EQ(parse_csv(slurp(dir / "a.csv")).size(), 1u + 243u);
}

TEST(Cli, CustomTermsReproduceHeisenberg) {
    const auto dir = scratch("custom");
    // -S.S on spin-1/2 in the |uu>,|ud>,|du>,|dd> basis
    spit(dir / "terms.txt",
         "term 0 1\n-0.25 0 0 0\n0 0.25 -0.5 0\n0 -0.5 0.25 0\n0 0 0 -0.25\n"
         "term 1 2\n-0.25 0 0 0\n0 0.25 -0.5:0 0\n0 -0.5 0.25 0\n0 0 0 -0.25\n");
    ASSERT_EQ(run_cli({"spectrum", "--model", "custom", "--L", "3", "--terms", (dir / "terms.txt").string(), "--out",
                       (dir / "c.csv").string()}),
              0);
    ASSERT_EQ(run_cli({"spectrum", "--L", "3", "--out", (dir / "h.csv").string()}), 0);
    EXPECT_EQ(slurp(dir / "c.csv"), slurp(dir / "h.csv"));
    spit(dir / "bad.txt", "term 0 1\n1 0\n");
    std::string err;
    EXPECT_EQ(run_cli({"spectrum", "--model", "custom", "--L", "3", "--terms", (dir / "bad.txt").string(), "--out",
                       (dir / "x.csv").string()},
                      &err),
              2);
    EXPECT_NE(err.find("bad.txt:2"), std::string::npos) << err;
}

TEST(Cli, ExitCodes) {
    const auto dir = scratch("exit");
    std::string err;
    spit(dir / "bad.ini", "[model]\nmodel = heisenberg\nLL = 3\n");
    EXPECT_EQ(run_cli({"spectrum", "--config", (dir / "bad.ini").string()}, &err), 2);
    EXPECT_NE(err.find("bad.ini:3"), std::string::npos);
    EXPECT_NE(err.find("'LL'"), std::string::npos);
    EXPECT_EQ(run_cli({"spectrum", "--L", "abc", "--out", (dir / "x.csv").string()}, &err), 2);
    EXPECT_NE(err.find("key 'L'"), std::string::npos);
    EXPECT_EQ(run_cli({"spectrum", "--q", "0.5", "--Delta", "2"}, &err), 2);
    EXPECT_EQ(run_cli({"nosuch"}, &err), 2);
    EXPECT_EQ(run_cli({"spectrum", "--config", (dir / "missing.ini").string()}, &err), 2);

    // module errors pass through verbatim
    EXPECT_EQ(run_cli({"foel", "--model", "aklt", "--L", "3", "--out", (dir / "f.csv").string()}, &err), 3);
    EXPECT_NE(err.find("foel: total-spin labels need model = heisenberg"), std::string::npos) << err;
    EXPECT_FALSE(manifest(dir / "f.csv")["all_passed"].get<bool>());
    EXPECT_EQ(run_cli({"liebmattis", "--L", "5", "--periodic", "--out", (dir / "l.csv").string()}, &err), 3);
    EXPECT_NE(err.find("lieb_mattis_check: graph is not bipartite"), std::string::npos) << err;

    EXPECT_EQ(run_cli({"spectrum", "--L", "3", "--out", (dir / "no" / "such" / "x.csv").string()}, &err), 4);

    // a failed assertion: the open chain is still far from the limit at L = 8
    EXPECT_EQ(run_cli({"droplet", "--n", "1", "--Lmin", "6", "--Lmax", "8", "--out", (dir / "d.csv").string()}, &err), 1);
    const auto m = manifest(dir / "d.csv");
    EXPECT_FALSE(m["all_passed"].get<bool>());
    bool found = false;
    for (const auto& a : m["assertions"])
        if (a["name"] == "open_deviation_below_2e-2") found = !a["passed"].get<bool>();
    EXPECT_TRUE(found);
}
