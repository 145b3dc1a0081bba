#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "kljn/attacks.hpp"
#include "kljn/errors.hpp"
#include "kljn/kljn_channel.hpp"
#include "kljn/noise_gen.hpp"
#include "kljn/rng.hpp"
#include "kljn/stats.hpp"
#include "kljn/types.hpp"

namespace kljn {

inline constexpr const char* kVersion = "0.1.0";

struct ExperimentConfig {
    std::string name = "custom";
    SystemParams params;
    std::optional<Combo> truth = Combo::LH;  // nullopt: drawn per trial, secure periods only
    AttackKind attack = AttackKind::wire_bilateral;
    std::vector<Channel> channels{Channel::voltage, Channel::current, Channel::power};
    std::vector<double> m_grid{0.0, 0.1, 0.5, 1.0, 1.5, 10.0};
    MixingMode mode = MixingMode::johnson_scaled;
    DecisionRule rule = DecisionRule::level_gated;
    std::size_t n_trials = 1000;
    std::uint64_t master_seed = 42;

    [[nodiscard]] std::size_t n_steps() const { return params.n_steps; }

    /// Channels actually evaluated: source attacks have the single
    /// `source` channel whatever was requested.
    [[nodiscard]] std::vector<Channel> effective_channels() const {
        if (!is_wire_attack(attack)) return {Channel::source};
        return channels;
    }

    /// Row labels per channel: the four probe combos, or side:hypothesis.
    [[nodiscard]] std::vector<std::string> probes() const {
        switch (attack) {
            case AttackKind::wire_bilateral:
            case AttackKind::wire_unilateral: return {"HH", "LL", "HL", "LH"};
            case AttackKind::source_bilateral: return {"alice:L", "alice:H", "bob:L", "bob:H"};
            case AttackKind::source_unilateral: return {"alice:L", "alice:H"};
        }
        return {};
    }

    void validate() const {
        params.validate();
        detail::require(n_trials >= 1, "config: n_trials must be >= 1");
        detail::require(!m_grid.empty(), "config: M grid must be nonempty");
        for (double m : m_grid) detail::require(m >= 0.0 && std::isfinite(m), "config: every M must be >= 0");
        if (is_wire_attack(attack)) {
            detail::require(!channels.empty(), "config: at least one channel required");
            for (Channel c : channels)
                detail::require(c != Channel::source, "config: wire attacks take voltage/current/power channels");
        }
    }
};

/// Everything one trial decided at one grid point.
struct PointResult {
    double m = 0.0;
    std::vector<AttackVerdict> verdicts;  // wire: one per channel; source: alice (, bob)
    std::optional<double> inferred_r_bob;
    std::optional<bool> inference_correct;
    bool full_correct = false;
};

struct TrialResult {
    std::size_t trial_index = 0;
    Combo truth = Combo::LH;
    std::vector<PointResult> points;  // one per M, grid order
};

class TrialFailure : public NumericError {
public:
    TrialFailure(std::size_t index, const std::string& what)
        : NumericError("trial " + std::to_string(index) + ": " + what), index_(index) {}
    [[nodiscard]] std::size_t index() const { return index_; }

private:
    std::size_t index_;
};

namespace detail {

// Alice/Bob switch draws; non-secure periods are discarded.
inline Combo draw_secure_combo(RngStream rng) {
    for (;;) {
        const Selection a = (rng() >> 63) ? Selection::H : Selection::L;
        const Selection b = (rng() >> 63) ? Selection::H : Selection::L;
        if (a != b) return make_combo(a, b);
    }
}

}  // namespace detail

/// One bit-exchange period: sources, Eve's mixing noises and dummies come
/// from streams keyed on (master_seed, trial_index) only, so every grid
/// point of the trial sees the same realisation.
inline TrialResult run_trial(const ExperimentConfig& config, std::size_t trial_index) {
    config.validate();
    const SystemParams& params = config.params;
    const RngStream trial = RngStream::derive(config.master_seed, "trial", trial_index);

    TrialResult out;
    out.trial_index = trial_index;
    out.truth = config.truth ? *config.truth : detail::draw_secure_combo(trial.split("switch"));

    const SourceBank bank = make_source_bank(params, trial);
    const SourceBank mixing = make_mixing_bank(params, trial);
    const WireRecord measured = synthesize_wire(bank, out.truth, params);
    const Knowledge knowledge = knowledge_of(config.attack);
    std::optional<DummyPair> dummies;
    if (knowledge == Knowledge::unilateral_alice && is_wire_attack(config.attack))
        dummies = make_dummies(params, params.n_steps, trial);
    RngStream tie = trial.split("tie");

    for (double m : config.m_grid) {
        const EveModel eve = eve_model(bank, mixing, m, config.mode, params);
        PointResult point;
        point.m = m;
        switch (config.attack) {
            case AttackKind::wire_bilateral:
                for (Channel c : config.channels)
                    point.verdicts.push_back(bilateral_wire_attack(measured, eve, c, params, tie, config.rule, out.truth));
                break;
            case AttackKind::wire_unilateral:
                for (Channel c : config.channels)
                    point.verdicts.push_back(unilateral_wire_attack(measured, AliceCopies::from(eve), *dummies, c,
                                                                    params, tie, config.rule, out.truth));
                break;
            case AttackKind::source_bilateral: {
                SourceVerdicts sv = bilateral_source_attack(measured, eve, params, tie, out.truth);
                point.full_correct = sv.both_correct().value_or(false);
                point.verdicts = {std::move(sv.alice), std::move(sv.bob)};
                break;
            }
            case AttackKind::source_unilateral: {
                UnilateralSourceVerdict uv = unilateral_source_attack(measured, AliceCopies::from(eve), params, tie,
                                                                      out.truth);
                point.inferred_r_bob = uv.inferred_r_bob;
                point.inference_correct = uv.inference_correct;
                point.full_correct = uv.correct.value_or(false);
                point.verdicts = {std::move(uv.alice)};
                break;
            }
        }
        if (is_wire_attack(config.attack)) point.full_correct = point.verdicts.front().correct.value_or(false);
        out.points.push_back(std::move(point));
    }
    return out;
}

struct ReportRow {
    AttackKind attack = AttackKind::wire_bilateral;
    Knowledge knowledge = Knowledge::bilateral;
    Channel channel = Channel::voltage;
    MixingMode mode = MixingMode::johnson_scaled;
    double m = 0.0;
    std::string truth;
    std::string probe;
    double mean_ccc = 0.0;
    std::optional<double> se_ccc;  // absent for a single trial
    double p = 0.0;
    std::size_t n_trials = 0;
    std::size_t n_steps = 0;
    std::uint64_t master_seed = 0;
};

/// Per (M, channel) guess statistics.
struct Outcome {
    double m = 0.0;
    Channel channel = Channel::voltage;
    double p = 0.0;                    // the attack's headline success rate (see p_convention)
    std::optional<double> p_alice;     // source attacks
    std::optional<double> p_bob;       // bilateral source attack
    std::optional<double> p_joint;     // bilateral source attack, both sides right
    std::optional<double> p_inference; // unilateral source attack, R_B inference alone
    std::size_t ties = 0;
};

struct SweepReport {
    ExperimentConfig config;
    std::vector<ReportRow> rows;
    std::vector<Outcome> outcomes;
    std::string version = kVersion;

    [[nodiscard]] const ReportRow& row(double m, Channel channel, std::string_view probe) const {
        for (const auto& r : rows)
            if (r.m == m && r.channel == channel && r.probe == probe) return r;
        throw InvalidArgument("report has no row for probe '" + std::string(probe) + "'");
    }
    [[nodiscard]] const Outcome& outcome(double m, Channel channel) const {
        for (const auto& o : outcomes)
            if (o.m == m && o.channel == channel) return o;
        throw InvalidArgument("report has no outcome for that grid point");
    }
};

/// Short description of how p is counted for an attack.
inline std::string p_convention(AttackKind a) {
    switch (a) {
        case AttackKind::wire_bilateral:
        case AttackKind::wire_unilateral:
            return "p = fraction of trials whose guessed combination equals the truth (per channel)";
        case AttackKind::source_bilateral:
            return "row p = fraction of trials with that side's resistor guessed right; headline p = Bob side; "
                   "p_joint = both sides right";
        case AttackKind::source_unilateral:
            return "p = fraction of trials with Alice's resistor guessed right and R_B inferred right";
    }
    return {};
}

/// Order-fixed reduction of per-trial results into report rows.
inline SweepReport aggregate(const ExperimentConfig& config, const std::vector<TrialResult>& trials) {
    SweepReport report;
    report.config = config;
    const auto channels = config.effective_channels();
    const auto probes = config.probes();
    const std::string truth_label = config.truth ? to_string(*config.truth) : "random";
    const double n = static_cast<double>(trials.size());

    for (std::size_t mi = 0; mi < config.m_grid.size(); ++mi) {
        for (std::size_t ci = 0; ci < channels.size(); ++ci) {
            Outcome oc;
            oc.m = config.m_grid[mi];
            oc.channel = channels[ci];
            std::size_t hits = 0, alice_hits = 0, bob_hits = 0, inference_hits = 0;
            std::vector<stats::Accumulator> acc(probes.size());
            std::vector<std::size_t> probe_hits(probes.size(), 0);

            for (const auto& t : trials) {
                const PointResult& pt = t.points[mi];
                hits += pt.full_correct;
                if (is_wire_attack(config.attack)) {
                    const AttackVerdict& v = pt.verdicts[ci];
                    if (v.tie_broken) ++oc.ties;
                    for (std::size_t k = 0; k < probes.size(); ++k) {
                        acc[k].add(v.score(probes[k]));
                        if (v.correct.value_or(false)) ++probe_hits[k];
                    }
                    continue;
                }
                const AttackVerdict& a = pt.verdicts[0];
                const bool a_ok = a.correct.value_or(false);
                alice_hits += a_ok;
                oc.ties += a.tie_broken;
                acc[0].add(a.score("L"));
                acc[1].add(a.score("H"));
                if (config.attack == AttackKind::source_bilateral) {
                    const AttackVerdict& b = pt.verdicts[1];
                    const bool b_ok = b.correct.value_or(false);
                    bob_hits += b_ok;
                    oc.ties += b.tie_broken;
                    acc[2].add(b.score("L"));
                    acc[3].add(b.score("H"));
                    probe_hits[0] += a_ok;
                    probe_hits[1] += a_ok;
                    probe_hits[2] += b_ok;
                    probe_hits[3] += b_ok;
                } else {
                    inference_hits += pt.inference_correct.value_or(false);
                    probe_hits[0] += pt.full_correct;
                    probe_hits[1] += pt.full_correct;
                }
            }

            switch (config.attack) {
                case AttackKind::wire_bilateral:
                case AttackKind::wire_unilateral: oc.p = static_cast<double>(probe_hits[0]) / n; break;
                case AttackKind::source_bilateral:
                    oc.p_alice = static_cast<double>(alice_hits) / n;
                    oc.p_bob = static_cast<double>(bob_hits) / n;
                    oc.p_joint = static_cast<double>(hits) / n;
                    oc.p = *oc.p_bob;
                    break;
                case AttackKind::source_unilateral:
                    oc.p_alice = static_cast<double>(alice_hits) / n;
                    oc.p_inference = static_cast<double>(inference_hits) / n;
                    oc.p = static_cast<double>(hits) / n;
                    break;
            }
            report.outcomes.push_back(oc);

            for (std::size_t k = 0; k < probes.size(); ++k) {
                ReportRow r;
                r.attack = config.attack;
                r.knowledge = knowledge_of(config.attack);
                r.channel = channels[ci];
                r.mode = config.mode;
                r.m = config.m_grid[mi];
                r.truth = truth_label;
                r.probe = probes[k];
                r.mean_ccc = acc[k].mean();
                if (acc[k].count() > 1) r.se_ccc = acc[k].standard_error();
                r.p = static_cast<double>(probe_hits[k]) / n;
                r.n_trials = trials.size();
                r.n_steps = config.n_steps();
                r.master_seed = config.master_seed;
                report.rows.push_back(std::move(r));
            }
        }
    }
    return report;
}

inline std::size_t default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

/// Runs all trials (in parallel up to `threads`) and aggregates in trial
/// order; the report does not depend on the thread count. A failing trial
/// fails the sweep, reporting the lowest failing index.
inline SweepReport run_sweep(const ExperimentConfig& config, std::size_t threads = 1) {
    config.validate();
    std::vector<TrialResult> results(config.n_trials);
    std::atomic<std::size_t> next{0};
    std::mutex fail_mutex;
    std::optional<std::size_t> fail_index;
    std::string fail_what;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= config.n_trials) return;
            try {
                results[i] = run_trial(config, i);
            } catch (const std::exception& e) {
                std::lock_guard lock(fail_mutex);
                if (!fail_index || i < *fail_index) {
                    fail_index = i;
                    fail_what = e.what();
                }
            }
        }
    };

    threads = std::clamp<std::size_t>(threads, 1, config.n_trials);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (fail_index) throw TrialFailure(*fail_index, fail_what);
    return aggregate(config, results);
}

/// Named configurations reproducing the four published tables (LH truth,
/// 1000 steps, 1000 trials, Johnson-scaled mixing).
inline ExperimentConfig preset(std::string_view name) {
    ExperimentConfig c;
    c.name = std::string(name);
    if (name == "table1") {
        c.attack = AttackKind::wire_bilateral;
    } else if (name == "table2") {
        c.attack = AttackKind::source_bilateral;
        c.channels = {Channel::source};
    } else if (name == "table3") {
        c.attack = AttackKind::wire_unilateral;
    } else if (name == "table4") {
        c.attack = AttackKind::source_unilateral;
        c.channels = {Channel::source};
    } else {
        throw InvalidArgument("unknown preset '" + std::string(name) + "'");
    }
    return c;
}

}  // namespace kljn
