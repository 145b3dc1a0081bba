#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "kljn/attacks.hpp"
#include "kljn/errors.hpp"
#include "kljn/experiment.hpp"
#include "kljn/kljn_channel.hpp"
#include "kljn/noise_gen.hpp"

namespace kljn::io {

using Json = nlohmann::ordered_json;

/// printf-style %.{digits}g.
inline std::string fmt_g(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

/// Shortest text that reads back to exactly `v`.
inline std::string fmt_full(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}
inline std::string fmt_stat(double v) { return fmt_g(v, 6); }

// Statistic rounded to what the CSV prints, so JSON and CSV agree.
inline double round_stat(double v) { return std::stod(fmt_stat(v)); }

namespace detail {

inline std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(trim(cur));
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

inline double parse_double(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw IoError("cannot parse " + what + " '" + s + "'");
    }
}

inline unsigned long long parse_u64(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const auto v = std::stoull(s, &used);
        if (used != s.size() || s.starts_with('-')) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw IoError("cannot parse " + what + " '" + s + "'");
    }
}

// Reads "# key=value" header lines until the first non-comment line, which
// is returned in `first`.
inline std::vector<std::string> read_header(std::istream& in, std::string& first) {
    std::vector<std::string> header;
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() != '#') {
            first = line;
            return header;
        }
        header.push_back(trim(line.substr(1)));
    }
    first.clear();
    return header;
}

inline std::string header_value(const std::vector<std::string>& header, const std::string& key) {
    for (const auto& h : header)
        if (h.starts_with(key + "=")) return h.substr(key.size() + 1);
    throw IoError("missing header field '" + key + "'");
}

inline std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    return out;
}

inline std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    return in;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Trace and wire files

inline void write_trace_csv(std::ostream& out, const NoiseTrace& trace) {
    out << "# kljn-trace v1\n# dt_s=" << fmt_full(trace.dt()) << "\n# label=" << trace.label() << "\nvalue_volts\n";
    for (double v : trace.samples()) out << fmt_full(v) << '\n';
}

inline NoiseTrace read_trace_csv(std::istream& in) {
    std::string first;
    const auto header = detail::read_header(in, first);
    if (header.empty() || header.front() != "kljn-trace v1") throw IoError("not a kljn-trace v1 file");
    const double dt = detail::parse_double(detail::header_value(header, "dt_s"), "dt_s");
    std::string label;
    for (const auto& h : header)
        if (h.starts_with("label=")) label = h.substr(6);
    if (first != "value_volts") throw IoError("trace file: expected column 'value_volts'");
    std::vector<double> v;
    std::string line;
    while (std::getline(in, line)) {
        line = detail::trim(line);
        if (!line.empty()) v.push_back(detail::parse_double(line, "sample"));
    }
    return {std::move(v), dt, label};
}

inline void write_wire_csv(std::ostream& out, const WireRecord& w) {
    out << "# kljn-wire v1\n# dt_s=" << fmt_full(w.u_w.dt()) << "\nu_w_volts,i_w_amps,p_w_watts\n";
    for (std::size_t t = 0; t < w.u_w.size(); ++t)
        out << fmt_full(w.u_w[t]) << ',' << fmt_full(w.i_w[t]) << ',' << fmt_full(w.p_w[t]) << '\n';
}

inline WireRecord read_wire_csv(std::istream& in) {
    std::string first;
    const auto header = detail::read_header(in, first);
    if (header.empty() || header.front() != "kljn-wire v1") throw IoError("not a kljn-wire v1 file");
    const double dt = detail::parse_double(detail::header_value(header, "dt_s"), "dt_s");
    if (first != "u_w_volts,i_w_amps,p_w_watts") throw IoError("wire file: unexpected column header");
    std::vector<double> u, i, p;
    std::string line;
    while (std::getline(in, line)) {
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto f = detail::split(line, ',');
        if (f.size() != 3) throw IoError("wire file: expected 3 columns");
        u.push_back(detail::parse_double(f[0], "u_w"));
        i.push_back(detail::parse_double(f[1], "i_w"));
        p.push_back(detail::parse_double(f[2], "p_w"));
    }
    return {NoiseTrace(std::move(u), dt, "u_w"), NoiseTrace(std::move(i), dt, "i_w"),
            NoiseTrace(std::move(p), dt, "p_w")};
}

// ---------------------------------------------------------------------------
// Verdict records (JSON lines)

inline Json verdict_json(const AttackVerdict& v) {
    Json j;
    j["attack"] = to_string(v.attack);
    j["channel"] = to_string(v.channel);
    j["M"] = v.m;
    Json scores = Json::object();
    for (const auto& s : v.scores) scores[s.label] = s.value;
    j["scores"] = scores;
    j["guess"] = v.guess;
    j["correct"] = v.correct ? Json(*v.correct) : Json(nullptr);
    j["tie_broken"] = v.tie_broken;
    return j;
}

// ---------------------------------------------------------------------------
// Experiment configuration: flat "key = value" text, '#' comments.

inline void apply_config_value(ExperimentConfig& c, const std::string& key, const std::string& value) {
    const auto list = [&] { return detail::split(value, ','); };
    if (key == "name") c.name = value;
    else if (key == "attack") c.attack = parse_attack(value);
    else if (key == "truth") c.truth = value == "random" ? std::nullopt : std::optional<Combo>(parse_combo(value));
    else if (key == "channels") {
        c.channels.clear();
        for (const auto& s : list()) c.channels.push_back(parse_channel(s));
    } else if (key == "M_grid") {
        c.m_grid.clear();
        for (const auto& s : list()) c.m_grid.push_back(detail::parse_double(s, "M"));
    } else if (key == "mode") c.mode = parse_mixing_mode(value);
    else if (key == "decision") c.rule = parse_decision_rule(value);
    else if (key == "n_trials") c.n_trials = detail::parse_u64(value, key);
    else if (key == "n_steps") c.params.n_steps = detail::parse_u64(value, key);
    else if (key == "ensemble") c.params.ensemble = detail::parse_u64(value, key);
    else if (key == "master_seed") c.master_seed = detail::parse_u64(value, key);
    else if (key == "R_L") c.params.r_low = detail::parse_double(value, key);
    else if (key == "R_H") c.params.r_high = detail::parse_double(value, key);
    else if (key == "T_eff") c.params.t_eff = detail::parse_double(value, key);
    else if (key == "bandwidth") c.params.bandwidth = detail::parse_double(value, key);
    else if (key == "boltzmann") c.params.boltzmann = detail::parse_double(value, key);
    else throw IoError("unknown config key '" + key + "'");
}

inline void parse_config_text(std::istream& in, ExperimentConfig& c) {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = detail::trim(line.substr(0, line.find('#')));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw IoError("config line " + std::to_string(lineno) + ": expected key = value");
        apply_config_value(c, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
    }
}

inline ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {}) {
    auto in = detail::open_in(path);
    parse_config_text(in, base);
    return base;
}

inline std::string join_channels(const std::vector<Channel>& cs) {
    std::string s;
    for (std::size_t i = 0; i < cs.size(); ++i) s += (i ? "," : "") + to_string(cs[i]);
    return s;
}

inline std::string join_grid(const std::vector<double>& g) {
    std::string s;
    for (std::size_t i = 0; i < g.size(); ++i) s += (i ? "," : "") + fmt_full(g[i]);
    return s;
}

/// Fully resolved configuration in the same key = value syntax.
inline std::string config_to_text(const ExperimentConfig& c) {
    std::ostringstream o;
    o << "name = " << c.name << '\n'
      << "attack = " << to_string(c.attack) << '\n'
      << "truth = " << (c.truth ? to_string(*c.truth) : "random") << '\n'
      << "channels = " << join_channels(c.effective_channels()) << '\n'
      << "M_grid = " << join_grid(c.m_grid) << '\n'
      << "mode = " << to_string(c.mode) << '\n'
      << "decision = " << to_string(c.rule) << '\n'
      << "n_trials = " << c.n_trials << '\n'
      << "n_steps = " << c.params.n_steps << '\n'
      << "ensemble = " << c.params.ensemble << '\n'
      << "master_seed = " << c.master_seed << '\n'
      << "R_L = " << fmt_full(c.params.r_low) << '\n'
      << "R_H = " << fmt_full(c.params.r_high) << '\n'
      << "T_eff = " << fmt_full(c.params.t_eff) << '\n'
      << "bandwidth = " << fmt_full(c.params.bandwidth) << '\n'
      << "boltzmann = " << fmt_full(c.params.boltzmann) << '\n';
    return o.str();
}

inline Json config_json(const ExperimentConfig& c) {
    Json j;
    j["name"] = c.name;
    j["attack"] = to_string(c.attack);
    j["truth"] = c.truth ? to_string(*c.truth) : "random";
    Json ch = Json::array();
    for (Channel x : c.effective_channels()) ch.push_back(to_string(x));
    j["channels"] = ch;
    j["M_grid"] = c.m_grid;
    j["mode"] = to_string(c.mode);
    j["decision"] = to_string(c.rule);
    j["n_trials"] = c.n_trials;
    j["n_steps"] = c.params.n_steps;
    j["ensemble"] = c.params.ensemble;
    j["master_seed"] = c.master_seed;
    j["R_L"] = c.params.r_low;
    j["R_H"] = c.params.r_high;
    j["T_eff"] = c.params.t_eff;
    j["bandwidth"] = c.params.bandwidth;
    j["boltzmann"] = c.params.boltzmann;
    return j;
}

inline ExperimentConfig config_from_json(const Json& j) {
    ExperimentConfig c;
    for (const auto& [key, val] : j.items()) {
        if (val.is_array()) {
            std::string s;
            for (std::size_t i = 0; i < val.size(); ++i)
                s += (i ? "," : "") + (val[i].is_string() ? val[i].get<std::string>() : fmt_full(val[i].get<double>()));
            apply_config_value(c, key, s);
        } else if (val.is_string()) {
            apply_config_value(c, key, val.get<std::string>());
        } else if (val.is_number_unsigned() || val.is_number_integer()) {
            apply_config_value(c, key, std::to_string(val.get<unsigned long long>()));
        } else {
            apply_config_value(c, key, fmt_full(val.get<double>()));
        }
    }
    return c;
}

// ---------------------------------------------------------------------------
// Sweep reports

inline constexpr const char* kReportColumns =
    "attack,knowledge,channel,mode,M,truth,probe,mean_ccc,se_ccc,p,n_trials,n_steps,master_seed";

inline void write_report_csv(std::ostream& out, const SweepReport& r) {
    out << "# kljn-report v1\n# version=" << r.version << "\n# preset=" << r.config.name
        << "\n# decision=" << to_string(r.config.rule) << "\n# p_convention=" << p_convention(r.config.attack) << '\n'
        << kReportColumns << '\n';
    for (const auto& row : r.rows) {
        out << to_string(row.attack) << ',' << to_string(row.knowledge) << ',' << to_string(row.channel) << ','
            << to_string(row.mode) << ',' << fmt_stat(row.m) << ',' << row.truth << ',' << row.probe << ','
            << fmt_stat(row.mean_ccc) << ',' << (row.se_ccc ? fmt_stat(*row.se_ccc) : std::string{}) << ','
            << fmt_stat(row.p) << ',' << row.n_trials << ',' << row.n_steps << ',' << row.master_seed << '\n';
    }
}

inline std::vector<ReportRow> read_report_csv(std::istream& in) {
    std::string first;
    const auto header = detail::read_header(in, first);
    if (header.empty() || header.front() != "kljn-report v1") throw IoError("not a kljn-report v1 file");
    if (first != kReportColumns) throw IoError("report: unexpected column header");
    std::vector<ReportRow> rows;
    std::string line;
    while (std::getline(in, line)) {
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto f = detail::split(line, ',');
        if (f.size() != 13) throw IoError("report: expected 13 columns");
        ReportRow r;
        r.attack = parse_attack(f[0]);
        r.knowledge = parse_knowledge(f[1]);
        r.channel = parse_channel(f[2]);
        r.mode = parse_mixing_mode(f[3]);
        r.m = detail::parse_double(f[4], "M");
        r.truth = f[5];
        r.probe = f[6];
        r.mean_ccc = detail::parse_double(f[7], "mean_ccc");
        if (!f[8].empty()) r.se_ccc = detail::parse_double(f[8], "se_ccc");
        r.p = detail::parse_double(f[9], "p");
        r.n_trials = detail::parse_u64(f[10], "n_trials");
        r.n_steps = detail::parse_u64(f[11], "n_steps");
        r.master_seed = detail::parse_u64(f[12], "master_seed");
        rows.push_back(std::move(r));
    }
    return rows;
}

inline Json report_json(const SweepReport& r) {
    Json j;
    j["format"] = "kljn-report v1";
    j["version"] = r.version;
    j["config"] = config_json(r.config);
    j["p_convention"] = p_convention(r.config.attack);
    Json rows = Json::array();
    for (const auto& row : r.rows) {
        Json x;
        x["attack"] = to_string(row.attack);
        x["knowledge"] = to_string(row.knowledge);
        x["channel"] = to_string(row.channel);
        x["mode"] = to_string(row.mode);
        x["M"] = round_stat(row.m);
        x["truth"] = row.truth;
        x["probe"] = row.probe;
        x["mean_ccc"] = round_stat(row.mean_ccc);
        x["se_ccc"] = row.se_ccc ? Json(round_stat(*row.se_ccc)) : Json(nullptr);
        x["p"] = round_stat(row.p);
        x["n_trials"] = row.n_trials;
        x["n_steps"] = row.n_steps;
        x["master_seed"] = row.master_seed;
        rows.push_back(std::move(x));
    }
    j["rows"] = rows;
    Json outs = Json::array();
    auto opt = [](const std::optional<double>& v) { return v ? Json(round_stat(*v)) : Json(nullptr); };
    for (const auto& o : r.outcomes) {
        Json x;
        x["M"] = round_stat(o.m);
        x["channel"] = to_string(o.channel);
        x["p"] = round_stat(o.p);
        x["p_alice"] = opt(o.p_alice);
        x["p_bob"] = opt(o.p_bob);
        x["p_joint"] = opt(o.p_joint);
        x["p_inference"] = opt(o.p_inference);
        x["ties"] = o.ties;
        outs.push_back(std::move(x));
    }
    j["outcomes"] = outs;
    return j;
}

enum class ReportFormat { csv, json };

inline ReportFormat parse_report_format(std::string_view s) {
    if (s == "csv") return ReportFormat::csv;
    if (s == "json") return ReportFormat::json;
    throw InvalidArgument("unknown report format '" + std::string(s) + "'");
}

inline void export_report(const SweepReport& r, ReportFormat format, const std::filesystem::path& path) {
    auto out = detail::open_out(path);
    if (format == ReportFormat::csv) write_report_csv(out, r);
    else out << report_json(r).dump(2) << '\n';
    out.flush();
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace kljn::io
