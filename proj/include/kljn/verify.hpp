#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "kljn/analytic_oracle.hpp"
#include "kljn/experiment.hpp"
#include "kljn/io.hpp"
#include "kljn/reference_tables.hpp"

namespace kljn {

inline oracle::LineConstants line_constants(const SystemParams& p) {
    return {p.r_low, p.r_high, p.t_eff, p.bandwidth, p.boltzmann};
}

namespace detail {

struct SourceProbe {
    Side side;
    Selection against;
};

inline SourceProbe parse_source_probe(const std::string& probe) {
    const auto colon = probe.find(':');
    if (colon == std::string::npos) throw InvalidArgument("source probe must be side:L or side:H");
    const std::string side = probe.substr(0, colon);
    if (side != "alice" && side != "bob") throw InvalidArgument("unknown side '" + side + "'");
    return {side == "alice" ? Side::alice : Side::bob, parse_selection(probe.substr(colon + 1))};
}

}  // namespace detail

/// Population CCC the oracle predicts for one report row.
inline double oracle_prediction(const ExperimentConfig& config, const ReportRow& row) {
    if (!config.truth) throw InvalidArgument("oracle comparison needs a fixed truth combination");
    const auto k = line_constants(config.params);
    if (row.channel != Channel::source)
        return oracle::predict_ccc(*config.truth, parse_combo(row.probe), row.channel, row.knowledge, row.m, row.mode, k);
    const auto sp = detail::parse_source_probe(row.probe);
    return oracle::predict_source_ccc(*config.truth, sp.side, config.params.r_low, sp.against, row.m, row.mode, k,
                                      row.knowledge);
}

/// Expected mean of the per-trial sample CCC for one report row.
inline double oracle_expectation(const ExperimentConfig& config, const ReportRow& row) {
    if (!config.truth) throw InvalidArgument("oracle comparison needs a fixed truth combination");
    const auto k = line_constants(config.params);
    if (row.channel != Channel::source)
        return oracle::predict_sample_ccc(*config.truth, parse_combo(row.probe), row.channel, row.knowledge, row.m,
                                          row.mode, k, row.n_steps);
    const auto sp = detail::parse_source_probe(row.probe);
    return oracle::predict_source_sample_ccc(*config.truth, sp.side, config.params.r_low, sp.against, row.m,
                                             row.mode, k, row.n_steps, row.knowledge);
}

struct OracleCheck {
    ReportRow row;
    double predicted = 0.0;  // population value
    double expected = 0.0;   // expected mean of the sample statistic
    double z = 0.0;
    bool pass = false;
};

/// z-score of every row's mean CCC against the oracle's expected sample
/// CCC. Rows with no spread (exact copies) must match to 1e-9.
inline std::vector<OracleCheck> check_against_oracle(const SweepReport& report, double z_max = 3.0) {
    std::vector<OracleCheck> out;
    for (const auto& row : report.rows) {
        OracleCheck c;
        c.row = row;
        c.predicted = oracle_prediction(report.config, row);
        c.expected = oracle_expectation(report.config, row);
        const double diff = row.mean_ccc - c.expected;
        if (row.se_ccc && *row.se_ccc > 1e-12) {
            c.z = diff / *row.se_ccc;
        } else {
            c.z = std::abs(diff) <= 1e-9 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
        }
        c.pass = std::abs(c.z) <= z_max;
        out.push_back(c);
    }
    return out;
}

inline void write_verify_csv(std::ostream& out, const std::vector<OracleCheck>& checks) {
    out << "truth,probe,channel,knowledge,mode,M,predicted,simulated,se,z\n";
    for (const auto& c : checks) {
        out << c.row.truth << ',' << c.row.probe << ',' << to_string(c.row.channel) << ','
            << to_string(c.row.knowledge) << ',' << to_string(c.row.mode) << ',' << io::fmt_stat(c.row.m) << ','
            << io::fmt_stat(c.predicted) << ',' << io::fmt_stat(c.row.mean_ccc) << ','
            << (c.row.se_ccc ? io::fmt_stat(*c.row.se_ccc) : std::string{}) << ',' << io::fmt_stat(c.z) << '\n';
    }
}

/// Table number 1..4 for a preset-shaped config.
inline int table_number(AttackKind a) {
    switch (a) {
        case AttackKind::wire_bilateral: return 1;
        case AttackKind::source_bilateral: return 2;
        case AttackKind::wire_unilateral: return 3;
        case AttackKind::source_unilateral: return 4;
    }
    return 0;
}

struct TableCheck {
    double m = 0.0;
    double reference_p = 0.0;
    double simulated_p = 0.0;
    bool pass = false;
};

/// Headline p (voltage channel for the wire tables) against the published
/// column, absolute tolerance `tol`.
inline std::vector<TableCheck> check_table_p(const SweepReport& report, double tol = 0.05) {
    const int table = table_number(report.config.attack);
    const Channel ch = is_wire_attack(report.config.attack) ? Channel::voltage : Channel::source;
    std::vector<TableCheck> out;
    for (std::size_t i = 0; i < reference::kMGrid.size(); ++i) {
        TableCheck t;
        t.m = reference::kMGrid[i];
        t.reference_p = reference::headline_p(table, i);
        t.simulated_p = report.outcome(t.m, ch).p;
        t.pass = std::abs(t.simulated_p - t.reference_p) <= tol;
        out.push_back(t);
    }
    return out;
}

/// Expected-value file: published numbers next to oracle predictions for
/// one table preset.
inline void write_expected_csv(std::ostream& out, int table, const SystemParams& params) {
    const auto k = line_constants(params);
    out << "# kljn-expected v1\n# table=" << table << "\nM,probe,channel,reference_ccc,reference_p,oracle_ccc\n";
    auto line = [&](double m, const std::string& probe, Channel ch, double ref, double p, double pred) {
        out << io::fmt_stat(m) << ',' << probe << ',' << to_string(ch) << ',' << io::fmt_stat(ref) << ','
            << io::fmt_stat(p) << ',' << io::fmt_stat(pred) << '\n';
    };
    if (table == 1 || table == 3) {
        const auto& ccc = table == 1 ? reference::kTable1Ccc : reference::kTable3Ccc;
        const auto& ps = table == 1 ? reference::kTable1P : reference::kTable3P;
        const Knowledge kn = table == 1 ? Knowledge::bilateral : Knowledge::unilateral_alice;
        for (const auto& r : ccc) {
            const auto& pr = *std::find_if(ps.begin(), ps.end(), [&](const auto& x) { return x.m == r.m; });
            const auto pred = [&](Channel ch) {
                return oracle::predict_ccc(Combo::LH, r.probe, ch, kn, r.m, MixingMode::johnson_scaled, k);
            };
            line(r.m, to_string(r.probe), Channel::voltage, r.ccc_u, pr.p_u, pred(Channel::voltage));
            line(r.m, to_string(r.probe), Channel::current, r.ccc_i, pr.p_i, pred(Channel::current));
            line(r.m, to_string(r.probe), Channel::power, r.ccc_p, pr.p_p, pred(Channel::power));
        }
        return;
    }
    const auto src = [&](Side s, Selection against, double m, Knowledge kn) {
        return oracle::predict_source_ccc(Combo::LH, s, params.r_low, against, m, MixingMode::johnson_scaled, k, kn);
    };
    if (table == 2) {
        for (const auto& r : reference::kTable2) {
            line(r.m, "alice:L", Channel::source, r.alice_l, r.p, src(Side::alice, Selection::L, r.m, Knowledge::bilateral));
            line(r.m, "alice:H", Channel::source, r.alice_h, r.p, src(Side::alice, Selection::H, r.m, Knowledge::bilateral));
            line(r.m, "bob:L", Channel::source, r.bob_l, r.p, src(Side::bob, Selection::L, r.m, Knowledge::bilateral));
            line(r.m, "bob:H", Channel::source, r.bob_h, r.p, src(Side::bob, Selection::H, r.m, Knowledge::bilateral));
        }
        return;
    }
    if (table == 4) {
        for (const auto& r : reference::kTable4) {
            line(r.m, "alice:L", Channel::source, r.alice_l, r.p,
                 src(Side::alice, Selection::L, r.m, Knowledge::unilateral_alice));
            line(r.m, "alice:H", Channel::source, r.alice_h, r.p,
                 src(Side::alice, Selection::H, r.m, Knowledge::unilateral_alice));
        }
        return;
    }
    throw InvalidArgument("table must be 1..4");
}

}  // namespace kljn
