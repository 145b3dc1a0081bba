#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "kljn/io.hpp"

using namespace kljn;

TEST_CASE("shortest number text reads back exactly", "[io][property]") {
    RngStream r(5);
    std::uniform_real_distribution<double> expo(-300.0, 300.0);
    for (int i = 0; i < 5000; ++i) {
        const double v = (r.uniform() - 0.5) * std::pow(10.0, expo(r));
        REQUIRE(std::stod(io::fmt_full(v)) == v);
    }
    CHECK(io::fmt_full(0.1) == "0.1");
    CHECK(io::fmt_stat(0.123456789) == "0.123457");
    CHECK(io::round_stat(0.123456789) == 0.123457);
}

TEST_CASE("trace files round-trip bit for bit", "[io][property]") {
    SystemParams p;
    p.n_steps = 500;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const NoiseTrace t = make_johnson_noise(p.r_high, p, RngStream(seed), "u_HA");
        std::stringstream ss;
        io::write_trace_csv(ss, t);
        const NoiseTrace back = io::read_trace_csv(ss);
        REQUIRE(back == t);
        REQUIRE(back.label() == "u_HA");
    }
}

TEST_CASE("wire files round-trip", "[io]") {
    const SystemParams p;
    const SourceBank bank = make_source_bank(p, RngStream(3));
    const WireRecord w = synthesize_wire(bank, Combo::HL, p);
    std::stringstream ss;
    io::write_wire_csv(ss, w);
    const WireRecord back = io::read_wire_csv(ss);
    CHECK(back.u_w == w.u_w);
    CHECK(back.i_w == w.i_w);
    CHECK(back.p_w == w.p_w);
}

TEST_CASE("malformed files are rejected", "[io]") {
    std::stringstream bad("# something else\nvalue_volts\n1\n2\n");
    CHECK_THROWS_AS(io::read_trace_csv(bad), IoError);
    std::stringstream junk("# kljn-trace v1\n# dt_s=0.001\nvalue_volts\n1\nabc\n");
    CHECK_THROWS(io::read_trace_csv(junk));
    std::stringstream wire("# kljn-wire v1\n# dt_s=0.001\nu_w_volts,i_w_amps,p_w_watts\n1,2\n");
    CHECK_THROWS(io::read_wire_csv(wire));
}

TEST_CASE("config text round-trips through the echo", "[io][property]") {
    for (const char* name : {"table1", "table2", "table3", "table4"}) {
        ExperimentConfig c = preset(name);
        c.master_seed = 123456789012345ULL;
        c.params.boltzmann = kBoltzmannCodata;
        c.m_grid = {0.0, 0.3, 7.25};
        std::istringstream in(io::config_to_text(c));
        ExperimentConfig back;
        io::parse_config_text(in, back);
        REQUIRE(io::config_to_text(back) == io::config_to_text(c));
        REQUIRE(io::config_to_text(io::config_from_json(io::config_json(c))) == io::config_to_text(c));
    }
}

TEST_CASE("config parsing errors", "[io]") {
    ExperimentConfig c;
    std::istringstream unknown("colour = blue\n");
    CHECK_THROWS_AS(io::parse_config_text(unknown, c), IoError);
    std::istringstream no_eq("n_trials 5\n");
    CHECK_THROWS_AS(io::parse_config_text(no_eq, c), IoError);
    std::istringstream bad_attack("attack = telepathy\n");
    CHECK_THROWS_AS(io::parse_config_text(bad_attack, c), InvalidArgument);
    std::istringstream comments("# header\n\nn_trials = 7  # trailing\ntruth = random\n");
    io::parse_config_text(comments, c);
    CHECK(c.n_trials == 7);
    CHECK_FALSE(c.truth.has_value());
}

TEST_CASE("report CSV re-serialises identically", "[io]") {
    ExperimentConfig c = preset("table2");
    c.n_trials = 10;
    const SweepReport r = run_sweep(c);
    std::stringstream ss;
    io::write_report_csv(ss, r);
    const std::string text = ss.str();
    const auto rows = io::read_report_csv(ss);
    REQUIRE(rows.size() == r.rows.size());
    SweepReport again = r;
    again.rows = rows;
    std::stringstream ss2;
    io::write_report_csv(ss2, again);
    REQUIRE(ss2.str() == text);
    CHECK(text.find("# p_convention=") != std::string::npos);
    CHECK(rows[0].probe == "alice:L");
    CHECK(rows[0].n_trials == 10);
}

TEST_CASE("report JSON carries config, rows and outcomes", "[io]") {
    ExperimentConfig c = preset("table4");
    c.n_trials = 5;
    const SweepReport r = run_sweep(c);
    const io::Json j = io::report_json(r);
    CHECK(j["config"]["attack"] == "source-unilateral");
    CHECK(j["rows"].size() == r.rows.size());
    CHECK(j["outcomes"].size() == r.outcomes.size());
    CHECK(io::Json::parse(j.dump()) == j);
}

TEST_CASE("verdict records", "[io]") {
    AttackVerdict v;
    v.scores = {{"L", 0.5}, {"H", 0.1}};
    v.guess = "L";
    v.correct = true;
    const io::Json j = io::verdict_json(v);
    CHECK(j["scores"]["L"] == 0.5);
    CHECK(j["guess"] == "L");
    CHECK(j["correct"] == true);
    v.correct.reset();
    CHECK(io::verdict_json(v)["correct"].is_null());
}

TEST_CASE("report format names", "[io]") {
    CHECK(io::parse_report_format("csv") == io::ReportFormat::csv);
    CHECK(io::parse_report_format("json") == io::ReportFormat::json);
    CHECK_THROWS_AS(io::parse_report_format("xml"), InvalidArgument);
}
