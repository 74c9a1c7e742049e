#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lsmc/cli.hpp"
#include "lsmc/config.hpp"
#include "lsmc/errors.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace lsmc;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = LSMC_CONFIG_DIR;

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result cli(std::vector<std::string> args) {
    args.insert(args.begin(), "lsmc");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("lsmc_test_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    f << text;
}

// Column `name` of a report CSV.
std::vector<std::string> column(const std::string& csv, const std::string& name) {
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    std::vector<std::string> header;
    {
        std::istringstream h(line);
        std::string cell;
        while (std::getline(h, cell, ',')) header.push_back(cell);
    }
    const auto idx = static_cast<std::size_t>(std::find(header.begin(), header.end(), name) - header.begin());
    std::vector<std::string> values;
    while (std::getline(in, line)) {
        std::istringstream r(line);
        std::string cell;
        for (std::size_t i = 0; i <= idx; ++i) std::getline(r, cell, ',');
        values.push_back(cell);
    }
    return values;
}

} // namespace

TEST_CASE("basket-check prints the exact node values") {
    const Result r = cli({"basket-check"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("(12,6) -> 6.25") != std::string::npos);
    CHECK(r.out.find("(6,12) -> 7") != std::string::npos);
    CHECK(r.out.find("basket check: ok") != std::string::npos);
    // The printed tower sum equals the printed leaf expectation.
    const auto leaf = r.out.find("E[X] by leaf enumeration: ");
    const auto tower = r.out.find("probability-weighted node sum: ");
    REQUIRE(leaf != std::string::npos);
    REQUIRE(tower != std::string::npos);
    const std::string a = r.out.substr(leaf + 26, r.out.find(' ', leaf + 26) - leaf - 26);
    const std::string b = r.out.substr(tower + 31, r.out.find('\n', tower) - tower - 31);
    CHECK(a == b);
}

TEST_CASE("every shipped config validates") {
    std::vector<std::string> args{"validate-config"};
    std::size_t count = 0;
    for (const auto& entry : fs::directory_iterator(kConfigs)) {
        if (entry.path().extension() == ".json") {
            args.push_back(entry.path().string());
            ++count;
        }
    }
    REQUIRE(count >= 5);
    const Result r = cli(args);
    CHECK(r.code == kExitOk);
    CHECK(r.err.empty());
}

TEST_CASE("mutated configs are rejected with field-specific messages") {
    const nlohmann::json base = read_config_json(kConfigs / "smoke.json");
    const fs::path dir = scratch("mutations");
    struct Mutation {
        std::string field;
        std::function<void(nlohmann::json&)> apply;
    };
    const std::vector<Mutation> mutations{
        {"repetitons", [](auto& d) { d["repetitons"] = 5; }},
        {"schema_version", [](auto& d) { d["schema_version"] = 2; }},
        {"process.kind", [](auto& d) { d["process"]["kind"] = "levy"; }},
        {"process.horizon", [](auto& d) { d["process"]["horizon"] = -1; }},
        {"payoff.kind", [](auto& d) { d["payoff"]["kind"] = "put"; }},
        {"sweep.K", [](auto& d) { d["sweep"]["K"] = {4, 2}; }},
        {"sweep.N_rule.c", [](auto& d) { d["sweep"]["N_rule"]["c"] = -1; }},
        {"repetitions", [](auto& d) { d["repetitions"] = 0; }},
        {"domain_epsilon", [](auto& d) { d["domain_epsilon"] = 0.7; }},
        {"evaluation.method", [](auto& d) { d["evaluation"] = {{"method", "bootstrap"}}; }},
        {"seed", [](auto& d) { d["seed"] = "abc"; }},
        {"threads", [](auto& d) { d["threads"] = 5000; }},
    };
    for (std::size_t i = 0; i < mutations.size(); ++i) {
        nlohmann::json doc = base;
        mutations[i].apply(doc);
        const fs::path p = dir / ("m" + std::to_string(i) + ".json");
        write(p, doc.dump());
        const Result r = cli({"validate-config", p.string()});
        CAPTURE(r.err);
        CHECK(r.code == kExitConfig);
        CHECK(r.err.find(mutations[i].field) != std::string::npos);
    }
}

TEST_CASE("malformed JSON exits 2 and writes nothing") {
    const fs::path dir = scratch("malformed");
    write(dir / "bad.json", "{\"schema_version\": 1,, }");
    const fs::path out = dir / "out";
    const Result r = cli({"run", (dir / "bad.json").string(), "-o", out.string()});
    CHECK(r.code == kExitConfig);
    CHECK(!r.err.empty());
    CHECK((!fs::exists(out) || fs::is_empty(out)));
    CHECK(cli({"validate-config", (dir / "bad.json").string()}).code == kExitConfig);
    CHECK(cli({"run", (dir / "missing.json").string()}).code == kExitConfig);
}

TEST_CASE("bad command lines exit 2") {
    CHECK(cli({}).code == kExitConfig);
    CHECK(cli({"frobnicate"}).code == kExitConfig);
    CHECK(cli({"run"}).code == kExitConfig);
    CHECK(cli({"--help"}).code == kExitOk);
}

TEST_CASE("run writes reports; the seed moves mse but not approx_l2") {
    const fs::path dir = scratch("run");
    const std::string cfg = (kConfigs / "smoke.json").string();
    const Result a = cli({"run", cfg, "-o", (dir / "a").string()});
    REQUIRE(a.code == kExitOk);
    const Result b = cli({"run", cfg, "-o", (dir / "b").string(), "--seed", "999"});
    REQUIRE(b.code == kExitOk);
    const std::string ca = slurp(dir / "a" / "report.csv");
    const std::string cb = slurp(dir / "b" / "report.csv");
    CHECK(ca.rfind(kCsvHeader, 0) == 0);
    CHECK(column(ca, "approx_l2") == column(cb, "approx_l2"));
    CHECK(column(ca, "h_tilde") == column(cb, "h_tilde"));
    const auto ma = column(ca, "mse_mean");
    const auto mb = column(cb, "mse_mean");
    REQUIRE(ma.size() == 3);
    for (std::size_t i = 0; i < ma.size(); ++i) CHECK(ma[i] != mb[i]);

    const auto doc = nlohmann::json::parse(slurp(dir / "a" / "report.json"));
    CHECK(doc.contains("slope"));
    CHECK(doc.at("rows").size() == 3);
    // No temporary files are left behind.
    for (const auto& e : fs::directory_iterator(dir / "a")) CHECK(e.path().string().find(".tmp.") == std::string::npos);

    // --set and --threads overrides; threads never change the CSV.
    const Result c = cli({"run", cfg, "-o", (dir / "c").string(), "--threads", "1", "--set", "threads=1"});
    REQUIRE(c.code == kExitOk);
    CHECK(slurp(dir / "c" / "report.csv") == ca);
    const Result d = cli({"run", cfg, "-o", (dir / "d").string(), "--set", "repetitions=0"});
    CHECK(d.code == kExitConfig);
    CHECK(d.err.find("repetitions") != std::string::npos);
}

TEST_CASE("run honours the output directory environment variable") {
    const fs::path dir = scratch("env");
    ::setenv(kOutputDirEnv, dir.string().c_str(), 1);
    const Result r = cli({"run", (kConfigs / "smoke.json").string(), "--set", "repetitions=2"});
    ::unsetenv(kOutputDirEnv);
    CHECK(r.code == kExitOk);
    CHECK(fs::exists(dir / "report.csv"));
}

TEST_CASE("plot renders one polyline per series with a -4 guide") {
    const fs::path dir = scratch("plot");
    const std::string cfg = (kConfigs / "smoke.json").string();
    REQUIRE(cli({"run", cfg, "-o", (dir / "a").string(), "--set", "repetitions=2"}).code == kExitOk);
    REQUIRE(cli({"run", cfg, "-o", (dir / "b").string(), "--set", "repetitions=2", "--seed", "5"}).code == kExitOk);
    const fs::path svg = dir / "plot.svg";
    const Result r = cli({"plot", (dir / "a" / "report.csv").string(), (dir / "b" / "report.csv").string(), "-o", svg.string()});
    REQUIRE(r.code == kExitOk);

    boost::property_tree::ptree tree;
    std::istringstream in(slurp(svg));
    REQUIRE_NOTHROW(boost::property_tree::read_xml(in, tree));
    std::size_t polylines = 0;
    std::string guide;
    for (const auto& [tag, node] : tree.get_child("svg")) {
        if (tag == "polyline") ++polylines;
        if (tag == "text" && node.get<std::string>("<xmlattr>.class", "") == "guide-slope") guide = node.data();
    }
    CHECK(polylines == 2);
    CHECK(guide == "-4");
}

TEST_CASE("plot rejects unusable reports") {
    const fs::path dir = scratch("plot_bad");
    write(dir / "one.csv", std::string(kCsvHeader) + "\n4,1625,100,1e-05,1e-07,1e-05,0.01\n");
    CHECK(cli({"plot", (dir / "one.csv").string()}).code == kExitConfig);
    write(dir / "cols.csv", "K,N,mse\n4,100,0.1\n6,200,0.01\n8,300,0.001\n");
    CHECK(cli({"plot", (dir / "cols.csv").string()}).code == kExitConfig);
    std::string axis;
    CHECK_THROWS_AS(read_report_csv(dir / "cols.csv", axis), ConfigError);
}

TEST_CASE("basis-dump reports the basis and its error moments") {
    const fs::path dir = scratch("dump");
    const fs::path out = dir / "basis.json";
    const Result r = cli({"basis-dump", (kConfigs / "smoke.json").string(), "--K", "4", "8", "-o", out.string()});
    REQUIRE(r.code == kExitOk);
    const auto doc = nlohmann::json::parse(slurp(out));
    REQUIRE(doc.at("bases").size() == 2);
    const auto& b = doc.at("bases")[1];
    CHECK(b.at("edges").size() == 9);
    CHECK(b.at("approx_l2").get<double>() < doc.at("bases")[0].at("approx_l2").get<double>());
}

TEST_CASE("atomic write replaces the target") {
    const fs::path dir = scratch("atomic");
    write_file_atomic(dir / "x.txt", "first");
    write_file_atomic(dir / "x.txt", "second");
    CHECK(slurp(dir / "x.txt") == "second");
    std::size_t files = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++files;
    CHECK(files == 1);
}
