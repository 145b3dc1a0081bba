#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>

#include "kljn/io.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / ("kljn-cli-test-" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

Run cli(const std::string& args) {
    const fs::path out = scratch() / "stdout.txt", err = scratch() / "stderr.txt";
    const std::string cmd = std::string("\"") + KLJN_CLI_PATH + "\" " + args + " > \"" + out.string() + "\" 2> \"" +
                            err.string() + "\"";
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

double field(const std::string& text, const std::string& key) {
    const std::regex re(key + " ([-+0-9.eE]+)");
    std::smatch m;
    if (!std::regex_search(text, m, re)) FAIL("no '" << key << "' in output:\n" << text);
    return std::stod(m[1]);
}

}  // namespace

TEST_CASE("help is available for every subcommand", "[cli]") {
    const std::map<std::string, std::vector<std::string>> flags{
        {"gen-noise", {"--resistor", "--samples", "--seed", "--out", "--config"}},
        {"simulate", {"--state", "--steps", "--seed", "--out"}},
        {"attack", {"--attack", "--state", "--channels", "--M", "--mode", "--decision", "--trial"}},
        {"sweep", {"--preset", "--trials", "--seed", "--out", "--format", "--threads", "--config"}},
        {"tables", {"--which", "--check", "--tol", "--trials", "--write-expected"}},
        {"verify", {"--grid", "--z-max", "--out", "--threads"}},
    };
    for (const auto& [sub, names] : flags) {
        const Run r = cli(sub + " --help");
        INFO(sub);
        REQUIRE(r.code == 0);
        for (const auto& f : names) CHECK(r.out.find(f) != std::string::npos);
    }
    CHECK(cli("--help").code == 0);
}

TEST_CASE("usage errors exit 1", "[cli]") {
    const Run unknown = cli("simulate --bogus 3");
    CHECK(unknown.code == 1);
    CHECK(unknown.err.rfind("error:", 0) == 0);
    CHECK(cli("").code == 1);
    CHECK(cli("teleport").code == 1);
    CHECK(cli("sweep --threads many").code == 1);
}

TEST_CASE("validation errors exit 2", "[cli]") {
    const Run one = cli("gen-noise --resistor L --samples 1");
    CHECK(one.code == 2);
    CHECK(one.err.find("error:") != std::string::npos);
    CHECK(cli("gen-noise --resistor Q").code == 2);
    CHECK(cli("simulate --state XX").code == 2);
    CHECK(cli("sweep --preset table7").code == 2);
    CHECK(cli("sweep --preset table1 --M=-1").code == 2);
    CHECK(cli("sweep --config /nonexistent/file.cfg").code == 2);
    CHECK(cli("tables --which 5").code == 2);
}

TEST_CASE("gen-noise reports Johnson RMS at 2^20 samples", "[cli]") {
    const fs::path trace = scratch() / "noise.csv";
    const Run l = cli("gen-noise --resistor L --samples 1048576 --seed 7 --out \"" + trace.string() + "\"");
    REQUIRE(l.code == 0);
    CHECK(std::abs(field(l.out, "rms_V") / 16.613 - 1.0) < 0.005);
    CHECK(std::abs(field(l.out, "skewness")) < 0.01);
    CHECK(std::abs(field(l.out, "excess_kurtosis")) < 0.05);
    CHECK(field(l.out, "in_band_flatness_dB") < 1.0);
    std::ifstream in(trace);
    CHECK(kljn::io::read_trace_csv(in).size() == 1048576);

    const Run h = cli("gen-noise --resistor H --samples 1048576 --seed 7");
    REQUIRE(h.code == 0);
    CHECK(std::abs(field(h.out, "rms_V") / 52.536 - 1.0) < 0.005);
}

TEST_CASE("simulate classifies the level and writes the wire", "[cli]") {
    const fs::path wire = scratch() / "wire.csv";
    const Run lh = cli("simulate --state LH --steps 1000 --seed 3 --out \"" + wire.string() + "\"");
    REQUIRE(lh.code == 0);
    CHECK(lh.out.find("level mid") != std::string::npos);
    std::ifstream in(wire);
    CHECK(kljn::io::read_wire_csv(in).u_w.size() == 1000);

    const Run hh = cli("simulate --state HH --steps 1000 --seed 3");
    REQUIRE(hh.code == 0);
    const double se = 1380.0 * std::sqrt(2.0 / 1000.0);
    CHECK(std::abs(field(hh.out, "mean_square_V2") - 1380.0) <= 3.0 * se);
    CHECK(hh.out.find("level high") != std::string::npos);

    const Run rnd = cli("simulate --state random --seed 11");
    REQUIRE(rnd.code == 0);
    CHECK(std::regex_search(rnd.out, std::regex("state (LL|LH|HL|HH)")));
    CHECK(cli("simulate --state random --seed 11").out == rnd.out);
}

TEST_CASE("sweep writes the report and echoes the resolved config", "[cli]") {
    const fs::path a = scratch() / "t1a.csv", b = scratch() / "t1b.csv";
    const Run r1 = cli("sweep --preset table1 --trials 30 --seed 42 --threads 1 --out \"" + a.string() + "\"");
    REQUIRE(r1.code == 0);
    CHECK(r1.err.find("n_trials = 30") != std::string::npos);
    std::ifstream in(a);
    CHECK(kljn::io::read_report_csv(in).size() == 72);

    const Run r2 = cli("sweep --preset table1 --trials 30 --seed 42 --threads 3 --out \"" + b.string() + "\"");
    REQUIRE(r2.code == 0);
    CHECK(slurp(a) == slurp(b));
}

TEST_CASE("flags override the config file", "[cli]") {
    const fs::path cfg = scratch() / "run.cfg", out = scratch() / "run.json";
    {
        std::ofstream f(cfg);
        f << "attack = source-unilateral\nn_trials = 5\nM_grid = 0, 1\nmaster_seed = 9\n";
    }
    const Run r = cli("sweep --config \"" + cfg.string() + "\" --trials 7 --out \"" + out.string() + "\"");
    REQUIRE(r.code == 0);
    CHECK(r.err.find("n_trials = 7") != std::string::npos);
    CHECK(r.err.find("master_seed = 9") != std::string::npos);
    const auto j = kljn::io::Json::parse(slurp(out));
    CHECK(j["config"]["n_trials"] == 7);
    CHECK(j["config"]["attack"] == "source-unilateral");
    CHECK(j["rows"].size() == 4);
}

TEST_CASE("attack prints one JSON verdict per line", "[cli]") {
    const Run r = cli("attack --attack wire-bilateral --M 0,0.5 --seed 4");
    REQUIRE(r.code == 0);
    std::istringstream lines(r.out);
    std::string line;
    int n = 0;
    while (std::getline(lines, line)) {
        const auto j = kljn::io::Json::parse(line);
        CHECK(j["scores"].size() == 4);
        if (j["M"] == 0.0) CHECK(j["correct"] == true);
        ++n;
    }
    CHECK(n == 6);
    const Run src = cli("attack --attack source-unilateral --M 0");
    REQUIRE(src.code == 0);
    const auto j = kljn::io::Json::parse(src.out);
    CHECK(j["inferred_R_B"] == 100000.0);
}

TEST_CASE("tables --check gates on the reference p", "[cli]") {
    const Run ok = cli("tables --which 1 --check");
    CHECK(ok.code == 0);
    CHECK(ok.out.find("OUTSIDE") == std::string::npos);
    const Run strict = cli("tables --which 4 --check --trials 50 --tol 0.0001");
    CHECK(strict.code == 3);
    CHECK(strict.err.find("error:") != std::string::npos);
    CHECK(cli("tables --which 4 --trials 50 --tol 0.0001").code == 0);

    const fs::path dir = scratch() / "expected";
    REQUIRE(cli("tables --write-expected \"" + dir.string() + "\"").code == 0);
    CHECK(slurp(dir / "table3.expected.csv") ==
          slurp(fs::path(KLJN_SOURCE_DIR) / "presets" / "table3.expected.csv"));
}

TEST_CASE("verify gates on the oracle", "[cli]") {
    const fs::path out = scratch() / "verify.csv";
    const Run ok = cli("verify --grid default --out \"" + out.string() + "\"");
    CHECK(ok.code == 0);
    CHECK(ok.out.find("total: 180 cells, 0 outside") != std::string::npos);
    CHECK(slurp(out).rfind("truth,probe,channel,knowledge,mode,M,predicted,simulated,se,z", 0) == 0);
    CHECK(cli("verify --trials 20 --z-max 0.001").code == 3);
    CHECK(cli("verify --grid huge").code == 2);
}
