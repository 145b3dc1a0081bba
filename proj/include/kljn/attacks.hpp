#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "kljn/errors.hpp"
#include "kljn/kljn_channel.hpp"
#include "kljn/noise_gen.hpp"
#include "kljn/rng.hpp"
#include "kljn/types.hpp"

namespace kljn {

/// Pearson cross-correlation coefficient (mean-removed).
inline double ccc(std::span<const double> x, std::span<const double> y) {
    detail::require(x.size() == y.size(), "ccc: length mismatch");
    detail::require(x.size() >= 2, "ccc: need at least two samples");
    const double mx = stats::mean(x), my = stats::mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        const double dx = x[t] - mx, dy = y[t] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw DegenerateSignal("ccc: zero-variance input");
    const double r = sxy / std::sqrt(sxx * syy);
    if (!std::isfinite(r)) throw NumericError("ccc: non-finite result");
    return std::clamp(r, -1.0, 1.0);
}

inline double ccc(const NoiseTrace& x, const NoiseTrace& y) { return ccc(x.samples(), y.samples()); }

struct ScoreEntry {
    std::string label;
    double value = 0.0;
};

struct AttackVerdict {
    AttackKind attack = AttackKind::wire_bilateral;
    Channel channel = Channel::voltage;
    double m = 0.0;
    std::vector<ScoreEntry> scores;  // wire: HH, LL, HL, LH; source: L, H
    std::string guess;
    bool tie_broken = false;
    std::optional<bool> correct;

    [[nodiscard]] double score(std::string_view label) const {
        for (const auto& s : scores)
            if (s.label == label) return s.value;
        throw InvalidArgument("verdict has no score '" + std::string(label) + "'");
    }
};

namespace detail {

// Index of the maximum among `eligible`, ties broken uniformly from `tie`.
inline std::size_t argmax(const std::vector<ScoreEntry>& scores, const std::vector<std::size_t>& eligible,
                          RngStream& tie, bool& tie_broken) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i : eligible) best = std::max(best, scores[i].value);
    std::vector<std::size_t> top;
    for (std::size_t i : eligible)
        if (scores[i].value == best) top.push_back(i);
    tie_broken = top.size() > 1;
    if (!tie_broken) return top.front();
    const auto pick = static_cast<std::size_t>(tie.uniform() * static_cast<double>(top.size()));
    return top[std::min(pick, top.size() - 1)];
}

}  // namespace detail

/// Eve's simulated wire for a hypothesised combination, built from her
/// copies with the matching resistances.
inline WireRecord simulate_probe_wire(const EveModel& eve, Combo probe, const SystemParams& params) {
    return synthesize_wire(eve.copies, probe, params);
}

/// Correlates the measured channel against the four simulated probes and
/// guesses the best-scoring combination allowed by `rule`.
inline AttackVerdict bilateral_wire_attack(const WireRecord& measured, const EveModel& eve, Channel channel,
                                           const SystemParams& params, RngStream& tie,
                                           DecisionRule rule = DecisionRule::level_gated,
                                           std::optional<Combo> truth = std::nullopt,
                                           AttackKind kind = AttackKind::wire_bilateral) {
    detail::require(channel != Channel::source, "wire attack: channel must be voltage, current or power");
    detail::require(measured.u_w.size() == eve.copies.u_LA.size(), "wire attack: length mismatch with Eve's copies");
    detail::require(measured.u_w.dt() == eve.copies.u_LA.dt(), "wire attack: dt mismatch with Eve's copies");

    AttackVerdict v;
    v.attack = kind;
    v.channel = channel;
    v.m = eve.m;
    const NoiseTrace& target = measured.channel(channel);
    for (Combo c : kAllCombos) {
        const WireRecord probe = simulate_probe_wire(eve, c, params);
        v.scores.push_back({to_string(c), ccc(target, probe.channel(channel))});
    }

    std::vector<std::size_t> eligible;
    if (rule == DecisionRule::all_combos) {
        eligible = {0, 1, 2, 3};
    } else {
        for (Combo c : combos_at(classify_level(measured.u_w.mean_square(), params)))
            eligible.push_back(static_cast<std::size_t>(c));
    }
    const std::size_t g = detail::argmax(v.scores, eligible, tie, v.tie_broken);
    v.guess = v.scores[g].label;
    if (truth) v.correct = (v.guess == to_string(*truth));
    return v;
}

/// Loop-law estimate of one party's source voltage assuming resistance
/// `r_hyp` on that side.
inline NoiseTrace reconstruct_source(const WireRecord& measured, Side side, double r_hyp) {
    detail::require(r_hyp > 0.0, "reconstruct_source: resistance must be positive");
    const std::size_t n = measured.u_w.size();
    std::vector<double> out(n);
    const double sign = side == Side::alice ? 1.0 : -1.0;
    for (std::size_t t = 0; t < n; ++t) out[t] = measured.u_w[t] + sign * measured.i_w[t] * r_hyp;
    return {std::move(out), measured.u_w.dt(), "u*_" + to_string(side)};
}

namespace detail {

inline AttackVerdict source_side_verdict(const WireRecord& measured, Side side, const NoiseTrace& copy_low,
                                         const NoiseTrace& copy_high, double m, const SystemParams& params,
                                         RngStream& tie, AttackKind kind, std::optional<Combo> truth) {
    const NoiseTrace recon = reconstruct_source(measured, side, params.r_low);
    AttackVerdict v;
    v.attack = kind;
    v.channel = Channel::source;
    v.m = m;
    v.scores = {{"L", ccc(recon, copy_low)}, {"H", ccc(recon, copy_high)}};
    const std::size_t g = argmax(v.scores, {0, 1}, tie, v.tie_broken);
    v.guess = v.scores[g].label;
    if (truth) v.correct = (v.guess == to_string(side_of(*truth, side)));
    return v;
}

}  // namespace detail

struct SourceVerdicts {
    AttackVerdict alice;
    AttackVerdict bob;

    [[nodiscard]] std::optional<bool> both_correct() const {
        if (!alice.correct || !bob.correct) return std::nullopt;
        return *alice.correct && *bob.correct;
    }
};

/// Per side: reconstruct with R_L and test it against Eve's L- and H-copies
/// of that side; the better-correlated copy names the guessed resistor.
inline SourceVerdicts bilateral_source_attack(const WireRecord& measured, const EveModel& eve,
                                              const SystemParams& params, RngStream& tie,
                                              std::optional<Combo> truth = std::nullopt) {
    detail::require(measured.u_w.size() == eve.copies.u_LA.size(), "source attack: length mismatch");
    return {detail::source_side_verdict(measured, Side::alice, eve.copies.u_LA, eve.copies.u_HA, eve.m, params, tie,
                                        AttackKind::source_bilateral, truth),
            detail::source_side_verdict(measured, Side::bob, eve.copies.u_LB, eve.copies.u_HB, eve.m, params, tie,
                                        AttackKind::source_bilateral, truth)};
}

/// Eve's partial knowledge of Alice's two sources only.
struct AliceCopies {
    NoiseTrace u_HA;
    NoiseTrace u_LA;
    double m = 0.0;
    MixingMode mode = MixingMode::johnson_scaled;

    static AliceCopies from(const EveModel& eve) { return {eve.copies.u_HA, eve.copies.u_LA, eve.m, eve.mode}; }
};

/// Stand-ins for Bob's unknown sources: independent Johnson-scaled noises.
struct DummyPair {
    NoiseTrace u_HB;
    NoiseTrace u_LB;
};

inline DummyPair make_dummies(const SystemParams& params, std::size_t n_steps, const RngStream& rng) {
    SystemParams p = params;
    p.n_steps = n_steps;
    return {make_johnson_noise(p.r_high, p, rng.split("dummy", 0), "d_HB"),
            make_johnson_noise(p.r_low, p, rng.split("dummy", 1), "d_LB")};
}

inline AttackVerdict unilateral_wire_attack(const WireRecord& measured, const AliceCopies& alice,
                                            const DummyPair& dummies, Channel channel, const SystemParams& params,
                                            RngStream& tie, DecisionRule rule = DecisionRule::level_gated,
                                            std::optional<Combo> truth = std::nullopt) {
    EveModel eve{alice.m,
                 alice.mode,
                 SourceBank{alice.u_HA, alice.u_LA, dummies.u_HB, dummies.u_LB},
                 design_rho(alice.m, alice.mode, params.r_low, params),
                 design_rho(alice.m, alice.mode, params.r_high, params)};
    return bilateral_wire_attack(measured, eve, channel, params, tie, rule, truth, AttackKind::wire_unilateral);
}

/// Draws fresh dummies from `dummy_rng` and runs the wire attack.
inline AttackVerdict unilateral_wire_attack(const WireRecord& measured, const AliceCopies& alice,
                                            const RngStream& dummy_rng, Channel channel, const SystemParams& params,
                                            RngStream& tie, DecisionRule rule = DecisionRule::level_gated,
                                            std::optional<Combo> truth = std::nullopt) {
    return unilateral_wire_attack(measured, alice, make_dummies(params, measured.u_w.size(), dummy_rng), channel,
                                  params, tie, rule, truth);
}

struct UnilateralSourceVerdict {
    AttackVerdict alice;
    double inferred_r_bob = 0.0;
    std::optional<bool> inference_correct;
    std::optional<bool> correct;  // Alice's guess and the inferred R_B both right
};

/// Alice-side hypothesis test, then R_B from the whole-period mean square.
inline UnilateralSourceVerdict unilateral_source_attack(const WireRecord& measured, const AliceCopies& alice,
                                                        const SystemParams& params, RngStream& tie,
                                                        std::optional<Combo> truth = std::nullopt) {
    detail::require(measured.u_w.size() == alice.u_LA.size(), "source attack: length mismatch");
    UnilateralSourceVerdict out;
    out.alice = detail::source_side_verdict(measured, Side::alice, alice.u_LA, alice.u_HA, alice.m, params, tie,
                                            AttackKind::source_unilateral, truth);
    const double r_alice = params.resistance(parse_selection(out.alice.guess));
    out.inferred_r_bob = infer_other_resistor(r_alice, measured.u_w.mean_square(), params);
    if (truth) {
        out.inference_correct = out.inferred_r_bob == params.resistance(bob_of(*truth));
        out.correct = *out.alice.correct && *out.inference_correct;
    }
    return out;
}

}  // namespace kljn
