// kljn: command-line front end for the KLJN attack simulator.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kljn/kljn.hpp"

namespace {

namespace fs = std::filesystem;
using namespace kljn;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitError = 2;
constexpr int kExitCheck = 3;

// Flag name -> config key. Values are kept as text and go through the same
// parser as the config file, so both paths validate identically.
struct Overrides {
    std::map<std::string, std::string> values;
    std::vector<std::pair<std::string, CLI::Option*>> options;

    void add(CLI::App& app, const std::string& flag, const std::string& key, const std::string& help,
             const std::string& type = "VALUE") {
        options.emplace_back(key, app.add_option(flag, values[key], help)->type_name(type));
    }

    void apply(ExperimentConfig& c) const {
        for (const auto& [key, opt] : options)
            if (opt->count() > 0) io::apply_config_value(c, key, values.at(key));
    }
};

void add_physics(CLI::App& app, Overrides& o) {
    o.add(app, "--R-L", "R_L", "low resistor (Ohm)", "OHM");
    o.add(app, "--R-H", "R_H", "high resistor (Ohm)", "OHM");
    o.add(app, "--T-eff", "T_eff", "effective noise temperature (K)", "K");
    o.add(app, "--bandwidth", "bandwidth", "noise bandwidth (Hz)", "HZ");
    o.add(app, "--boltzmann", "boltzmann", "Boltzmann constant (J/K)", "J/K");
    o.add(app, "--ensemble", "ensemble", "Gaussian series averaged per noise", "N");
}

void echo_config(const ExperimentConfig& c) {
    std::istringstream in(io::config_to_text(c));
    std::string line;
    std::cerr << "# resolved configuration\n";
    while (std::getline(in, line)) std::cerr << "#   " << line << '\n';
}

ExperimentConfig base_config(const std::string& config_path, ExperimentConfig base = {}) {
    if (!config_path.empty()) return io::load_config(config_path, std::move(base));
    return base;
}

std::ofstream open_file(const fs::path& p) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p);
    if (!out) throw IoError("cannot open '" + p.string() + "' for writing");
    return out;
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

// --------------------------------------------------------------------------

struct GenNoiseArgs {
    std::string config_path;
    std::string resistor = "L";
    std::string out;
    Overrides o;
};

int run_gen_noise(GenNoiseArgs& a) {
    ExperimentConfig c = base_config(a.config_path);
    a.o.apply(c);
    const Selection sel = parse_selection(a.resistor);
    c.params.validate();
    echo_config(c);

    const RngStream rng = RngStream::derive(c.master_seed, "gen-noise", sel == Selection::H ? 1 : 0);
    const double r = c.params.resistance(sel);
    const NoiseStages stages = synthesize_unit_noise(c.params, rng, "u_" + to_string(sel));
    const NoiseTrace trace = scale_to_johnson(stages.output, r, c.params);
    const NoiseQuality q = assess_noise(trace, stages, r, c.params);

    if (!a.out.empty()) {
        auto f = open_file(a.out);
        io::write_trace_csv(f, trace);
        if (!f) throw IoError("write failed for '" + a.out + "'");
    }
    std::cout << "resistor " << to_string(sel) << " (" << io::fmt_stat(r) << " Ohm), samples " << q.samples << '\n'
              << "rms_V " << io::fmt_stat(q.rms) << " (johnson " << io::fmt_stat(q.target_rms) << ", rel err "
              << io::fmt_stat(q.rms_rel_error()) << ")\n"
              << "skewness " << io::fmt_stat(q.skewness) << '\n'
              << "excess_kurtosis " << io::fmt_stat(q.excess_kurtosis) << '\n'
              << "in_band_flatness_dB " << (std::isnan(q.flatness_db) ? "n/a" : io::fmt_stat(q.flatness_db)) << '\n'
              << "out_of_band_rejection_dB " << io::fmt_stat(q.rejection_db) << '\n';
    return kExitOk;
}

// --------------------------------------------------------------------------

struct SimulateArgs {
    std::string config_path;
    std::string state = "LH";
    std::string out;
    Overrides o;
};

int run_simulate(SimulateArgs& a) {
    ExperimentConfig c = base_config(a.config_path);
    a.o.apply(c);
    c.params.validate();

    Combo combo;
    if (a.state == "random") {
        RngStream sw = RngStream::derive(c.master_seed, "switch");
        combo = kAllCombos[sw() >> 62];
    } else {
        combo = parse_combo(a.state);
    }
    c.truth = combo;
    echo_config(c);

    // Same streams as trial 0 of a sweep with this seed.
    const RngStream trial = RngStream::derive(c.master_seed, "trial", 0);
    const SourceBank bank = make_source_bank(c.params, trial);
    const WireRecord w = synthesize_wire(bank, combo, c.params);

    if (!a.out.empty()) {
        auto f = open_file(a.out);
        io::write_wire_csv(f, w);
        if (!f) throw IoError("write failed for '" + a.out + "'");
    }
    const double ms = w.u_w.mean_square();
    const double expected = expected_mean_square(combo, c.params);
    const std::vector<double> p(w.p_w.samples().begin(), w.p_w.samples().end());
    std::cout << "state " << to_string(combo) << (is_secure(combo) ? " (secure)" : " (non-secure)")
              << " mean_square_V2 " << io::fmt_stat(ms) << " expected_V2 " << io::fmt_stat(expected) << " level "
              << to_string(classify_level(ms, c.params)) << " mean_power_W " << io::fmt_stat(stats::mean(p))
              << '\n';
    return kExitOk;
}

// --------------------------------------------------------------------------

struct AttackArgs {
    std::string config_path;
    std::string out;
    std::size_t trial = 0;
    Overrides o;
};

int run_attack(AttackArgs& a) {
    ExperimentConfig start;
    start.m_grid = {0.0};
    ExperimentConfig c = base_config(a.config_path, std::move(start));
    a.o.apply(c);
    c.n_trials = 1;
    c.validate();
    echo_config(c);

    const TrialResult t = run_trial(c, a.trial);
    std::ofstream file;
    if (!a.out.empty()) file = open_file(a.out);
    std::ostream& out = a.out.empty() ? std::cout : file;
    for (const auto& point : t.points) {
        for (std::size_t i = 0; i < point.verdicts.size(); ++i) {
            io::Json j;
            j["trial"] = t.trial_index;
            j["truth"] = to_string(t.truth);
            if (c.attack == AttackKind::source_bilateral) j["side"] = i == 0 ? "alice" : "bob";
            const io::Json verdict = io::verdict_json(point.verdicts[i]);
            for (const auto& [k, v] : verdict.items()) j[k] = v;
            if (point.inferred_r_bob) {
                j["inferred_R_B"] = *point.inferred_r_bob;
                j["inference_correct"] = point.inference_correct.value_or(false);
                j["key_correct"] = point.full_correct;
            }
            out << j.dump() << '\n';
        }
    }
    out.flush();
    if (!out) throw IoError("write failed");
    return kExitOk;
}

// --------------------------------------------------------------------------

struct SweepArgs {
    std::string config_path;
    std::string preset_name;
    std::string out;
    std::string format;
    std::size_t threads = default_threads();
    Overrides o;
};

void print_outcomes(std::ostream& os, const SweepReport& r) {
    os << "M,channel,p";
    const bool src = !is_wire_attack(r.config.attack);
    if (src) os << ",p_alice,p_bob,p_joint,p_inference";
    os << ",ties\n";
    auto opt = [](const std::optional<double>& v) { return v ? io::fmt_stat(*v) : std::string("-"); };
    for (const auto& o : r.outcomes) {
        os << io::fmt_stat(o.m) << ',' << to_string(o.channel) << ',' << io::fmt_stat(o.p);
        if (src) os << ',' << opt(o.p_alice) << ',' << opt(o.p_bob) << ',' << opt(o.p_joint) << ',' << opt(o.p_inference);
        os << ',' << o.ties << '\n';
    }
}

int run_sweep_cmd(SweepArgs& a) {
    ExperimentConfig c = a.preset_name.empty() ? ExperimentConfig{} : preset(a.preset_name);
    c = base_config(a.config_path, std::move(c));
    a.o.apply(c);
    c.validate();
    detail::require(a.threads >= 1, "--threads must be >= 1");
    echo_config(c);

    io::ReportFormat fmt = io::ReportFormat::csv;
    if (!a.format.empty()) fmt = io::parse_report_format(a.format);
    else if (fs::path(a.out).extension() == ".json") fmt = io::ReportFormat::json;

    const SweepReport r = run_sweep(c, a.threads);
    if (a.out.empty()) {
        if (fmt == io::ReportFormat::csv) io::write_report_csv(std::cout, r);
        else std::cout << io::report_json(r).dump(2) << '\n';
        print_outcomes(std::cerr, r);
    } else {
        if (fs::path(a.out).has_parent_path()) fs::create_directories(fs::path(a.out).parent_path());
        io::export_report(r, fmt, a.out);
        std::cout << "wrote " << r.rows.size() << " rows to " << a.out << '\n';
        print_outcomes(std::cout, r);
    }
    return kExitOk;
}

// --------------------------------------------------------------------------

struct TablesArgs {
    std::string which = "all";
    bool check = false;
    double tol = 0.05;
    std::string out_dir;
    std::string expected_dir;
    std::size_t threads = default_threads();
    Overrides o;
};

std::vector<int> parse_which(const std::string& w) {
    if (w == "all") return {1, 2, 3, 4};
    if (w.size() == 1 && w[0] >= '1' && w[0] <= '4') return {w[0] - '0'};
    throw InvalidArgument("--which must be 1, 2, 3, 4 or all");
}

void print_table(const SweepReport& r, int table, const std::vector<TableCheck>& checks) {
    std::cout << "table " << table << " (" << to_string(r.config.attack) << ", " << r.config.n_trials
              << " trials, seed " << r.config.master_seed << ")\n";
    const auto probes = r.config.probes();
    for (Channel ch : r.config.effective_channels()) {
        std::cout << "  mean CCC, " << to_string(ch) << '\n' << "    M      ";
        for (const auto& p : probes) std::printf("%10s", p.c_str());
        std::cout << "       p\n";
        std::fflush(stdout);
        for (double m : r.config.m_grid) {
            std::printf("    %-6s ", io::fmt_stat(m).c_str());
            for (const auto& p : probes) std::printf("%10s", fixed(r.row(m, ch, p).mean_ccc, 5).c_str());
            std::printf("   %6s\n", fixed(r.outcome(m, ch).p, 3).c_str());
        }
        std::fflush(stdout);
    }
    std::cout << "  headline p vs reference\n";
    for (const auto& t : checks)
        std::cout << "    M=" << io::fmt_stat(t.m) << "  ref " << fixed(t.reference_p, 3) << "  sim "
                  << fixed(t.simulated_p, 3) << "  diff " << fixed(t.simulated_p - t.reference_p, 3) << "  "
                  << (t.pass ? "ok" : "OUTSIDE") << '\n';
}

int run_tables(TablesArgs& a) {
    const auto tables = parse_which(a.which);
    if (!a.expected_dir.empty()) {
        for (int t : tables) {
            ExperimentConfig c = preset("table" + std::to_string(t));
            a.o.apply(c);
            const fs::path p = fs::path(a.expected_dir) / ("table" + std::to_string(t) + ".expected.csv");
            auto f = open_file(p);
            write_expected_csv(f, t, c.params);
            std::cout << "wrote " << p.string() << '\n';
        }
        return kExitOk;
    }
    detail::require(a.threads >= 1, "--threads must be >= 1");
    bool all_ok = true;
    for (int t : tables) {
        ExperimentConfig c = preset("table" + std::to_string(t));
        a.o.apply(c);
        c.validate();
        echo_config(c);
        const SweepReport r = run_sweep(c, a.threads);
        const auto checks = check_table_p(r, a.tol);
        print_table(r, t, checks);
        for (const auto& x : checks) all_ok = all_ok && x.pass;
        if (!a.out_dir.empty()) {
            const fs::path p = fs::path(a.out_dir) / ("table" + std::to_string(t) + ".csv");
            if (p.has_parent_path()) fs::create_directories(p.parent_path());
            io::export_report(r, io::ReportFormat::csv, p);
        }
    }
    if (a.check && !all_ok) {
        std::cerr << "error: headline p outside +/-" << io::fmt_stat(a.tol) << " of the reference\n";
        return kExitCheck;
    }
    return kExitOk;
}

// --------------------------------------------------------------------------

struct VerifyArgs {
    std::string grid = "default";
    std::string out;
    double z_max = 3.0;
    std::size_t threads = default_threads();
    Overrides o;
};

std::vector<ExperimentConfig> verify_grid(const std::string& grid) {
    std::vector<ExperimentConfig> out;
    for (int t = 1; t <= 4; ++t) out.push_back(preset("table" + std::to_string(t)));
    if (grid == "default") return out;
    if (grid != "full") throw InvalidArgument("--grid must be default or full");
    const std::size_t n = out.size();
    for (std::size_t i = 0; i < n; ++i) {
        ExperimentConfig hl = out[i];
        hl.name += "-HL";
        hl.truth = Combo::HL;
        out.push_back(hl);
        ExperimentConfig unit = out[i];
        unit.name += "-unit";
        unit.mode = MixingMode::unit_scaled;
        unit.m_grid = {0.0, 0.1, 0.5, 1.0, 2.0, 5.0};
        out.push_back(unit);
    }
    return out;
}

int run_verify(VerifyArgs& a) {
    detail::require(a.threads >= 1, "--threads must be >= 1");
    detail::require(a.z_max > 0.0, "--z-max must be positive");
    std::vector<OracleCheck> all;
    for (ExperimentConfig c : verify_grid(a.grid)) {
        a.o.apply(c);
        c.validate();
        echo_config(c);
        const SweepReport r = run_sweep(c, a.threads);
        auto checks = check_against_oracle(r, a.z_max);
        std::size_t bad = 0;
        double worst = 0.0;
        for (const auto& x : checks) {
            bad += x.pass ? 0 : 1;
            worst = std::max(worst, std::abs(x.z));
        }
        std::cout << c.name << ": " << checks.size() << " cells, " << bad << " outside |z| <= "
                  << io::fmt_stat(a.z_max) << ", max |z| " << io::fmt_stat(worst) << '\n';
        all.insert(all.end(), checks.begin(), checks.end());
    }
    if (!a.out.empty()) {
        auto f = open_file(a.out);
        write_verify_csv(f, all);
        if (!f) throw IoError("write failed for '" + a.out + "'");
    }
    std::size_t bad = 0;
    for (const auto& x : all) {
        if (x.pass) continue;
        ++bad;
        std::cout << "  outside: " << to_string(x.row.attack) << ' ' << to_string(x.row.channel) << " truth "
                  << x.row.truth << " probe " << x.row.probe << " M=" << io::fmt_stat(x.row.m) << " predicted "
                  << io::fmt_stat(x.expected) << " simulated " << io::fmt_stat(x.row.mean_ccc) << " z "
                  << io::fmt_stat(x.z) << '\n';
    }
    std::cout << "total: " << all.size() << " cells, " << bad << " outside\n";
    if (bad > 0) {
        std::cerr << "error: " << bad << " statistics disagree with the analytic prediction\n";
        return kExitCheck;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"KLJN key exchange simulator and statistical attack sweeps"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    // gen-noise
    GenNoiseArgs gen;
    auto* g = app.add_subcommand("gen-noise", "generate one Johnson-scaled noise trace and report its statistics");
    g->add_option("--config", gen.config_path, "configuration file (key = value)");
    g->add_option("--resistor", gen.resistor, "resistor to scale to: L or H")->capture_default_str();
    gen.o.add(*g, "--samples", "n_steps", "number of samples", "N");
    gen.o.add(*g, "--seed", "master_seed", "master seed", "SEED");
    g->add_option("--out", gen.out, "trace CSV to write");
    add_physics(*g, gen.o);

    // simulate
    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "synthesise one wire record for a resistor combination");
    s->add_option("--config", sim.config_path, "configuration file (key = value)");
    s->add_option("--state", sim.state, "LL, LH, HL, HH or random")->capture_default_str();
    sim.o.add(*s, "--steps", "n_steps", "samples per bit period", "N");
    sim.o.add(*s, "--seed", "master_seed", "master seed", "SEED");
    s->add_option("--out", sim.out, "wire CSV to write");
    add_physics(*s, sim.o);

    // attack
    AttackArgs att;
    auto* at = app.add_subcommand("attack", "run one attack on one bit period and print JSON-lines verdicts");
    at->add_option("--config", att.config_path, "configuration file (key = value)");
    att.o.add(*at, "--attack", "attack", "wire-bilateral, source-bilateral, wire-unilateral, source-unilateral",
              "KIND");
    att.o.add(*at, "--state", "truth", "true combination LL, LH, HL, HH or random (secure draw)", "STATE");
    att.o.add(*at, "--channels", "channels", "comma list of voltage, current, power (wire attacks)", "LIST");
    att.o.add(*at, "--M", "M_grid", "comma list of mixing multipliers (default 0)", "LIST");
    att.o.add(*at, "--mode", "mode", "johnson-scaled or unit-scaled", "MODE");
    att.o.add(*at, "--decision", "decision", "level-gated or all", "RULE");
    att.o.add(*at, "--steps", "n_steps", "samples per bit period", "N");
    att.o.add(*at, "--seed", "master_seed", "master seed", "SEED");
    at->add_option("--trial", att.trial, "trial index within the seed")->capture_default_str();
    at->add_option("--out", att.out, "JSON-lines file (default stdout)");
    add_physics(*at, att.o);

    // sweep
    SweepArgs sw;
    auto* sp = app.add_subcommand("sweep", "Monte Carlo sweep over the M grid");
    sp->add_option("--preset", sw.preset_name, "table1, table2, table3 or table4");
    sp->add_option("--config", sw.config_path, "configuration file (key = value), applied over the preset");
    sw.o.add(*sp, "--name", "name", "label recorded in the report", "NAME");
    sw.o.add(*sp, "--attack", "attack", "wire-bilateral, source-bilateral, wire-unilateral, source-unilateral",
             "KIND");
    sw.o.add(*sp, "--truth", "truth", "true combination, or random (secure draw per trial)", "STATE");
    sw.o.add(*sp, "--channels", "channels", "comma list of voltage, current, power", "LIST");
    sw.o.add(*sp, "--M", "M_grid", "comma list of mixing multipliers", "LIST");
    sw.o.add(*sp, "--mode", "mode", "johnson-scaled or unit-scaled", "MODE");
    sw.o.add(*sp, "--decision", "decision", "level-gated or all", "RULE");
    sw.o.add(*sp, "--trials", "n_trials", "Monte Carlo trials", "N");
    sw.o.add(*sp, "--steps", "n_steps", "samples per bit period", "N");
    sw.o.add(*sp, "--seed", "master_seed", "master seed", "SEED");
    sp->add_option("--threads", sw.threads, "worker threads")->capture_default_str();
    sp->add_option("--out", sw.out, "report file (default stdout)");
    sp->add_option("--format", sw.format, "csv or json (default from --out extension, else csv)");
    add_physics(*sp, sw.o);

    // tables
    TablesArgs tb;
    auto* t = app.add_subcommand("tables", "reproduce the four reference tables");
    t->add_option("--which", tb.which, "1, 2, 3, 4 or all")->capture_default_str();
    t->add_flag("--check", tb.check, "exit 3 when a headline p is outside tolerance");
    t->add_option("--tol", tb.tol, "absolute tolerance on p")->capture_default_str();
    tb.o.add(*t, "--trials", "n_trials", "Monte Carlo trials", "N");
    tb.o.add(*t, "--steps", "n_steps", "samples per bit period", "N");
    tb.o.add(*t, "--seed", "master_seed", "master seed", "SEED");
    tb.o.add(*t, "--decision", "decision", "level-gated or all", "RULE");
    t->add_option("--threads", tb.threads, "worker threads")->capture_default_str();
    t->add_option("--out-dir", tb.out_dir, "write each table's report CSV here");
    t->add_option("--write-expected", tb.expected_dir,
                  "write reference and predicted values per table to this directory, then exit");

    // verify
    VerifyArgs vf;
    auto* v = app.add_subcommand("verify", "compare sweep statistics with the analytic covariance model");
    v->add_option("--grid", vf.grid, "default (four presets) or full (adds HL truth and unit-scaled mixing)")
        ->capture_default_str();
    v->add_option("--z-max", vf.z_max, "largest accepted |z|")->capture_default_str();
    vf.o.add(*v, "--trials", "n_trials", "Monte Carlo trials", "N");
    vf.o.add(*v, "--steps", "n_steps", "samples per bit period", "N");
    vf.o.add(*v, "--seed", "master_seed", "master seed", "SEED");
    v->add_option("--threads", vf.threads, "worker threads")->capture_default_str();
    v->add_option("--out", vf.out, "per-cell CSV to write");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (*g) return run_gen_noise(gen);
        if (*s) return run_simulate(sim);
        if (*at) return run_attack(att);
        if (*sp) return run_sweep_cmd(sw);
        if (*t) return run_tables(tb);
        if (*v) return run_verify(vf);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitUsage;
}
