#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "kljn/errors.hpp"
#include "kljn/noise_gen.hpp"
#include "kljn/types.hpp"

namespace kljn {

struct ResistorChoice {
    Selection alice = Selection::L;
    Selection bob = Selection::H;

    static ResistorChoice from(Combo c) { return {alice_of(c), bob_of(c)}; }

    [[nodiscard]] Combo combo() const { return make_combo(alice, bob); }
    [[nodiscard]] bool secure() const { return alice != bob; }

    // Key bit is Alice's selection (L -> 0, H -> 1); only defined when secure.
    [[nodiscard]] std::optional<int> key_bit() const {
        if (!secure()) return std::nullopt;
        return alice == Selection::L ? 0 : 1;
    }
};

/// Measured wire signals for one bit-exchange period. Current is positive
/// in the Alice -> Bob direction.
struct WireRecord {
    NoiseTrace u_w;  // V
    NoiseTrace i_w;  // A
    NoiseTrace p_w;  // W

    [[nodiscard]] const NoiseTrace& channel(Channel c) const {
        switch (c) {
            case Channel::voltage: return u_w;
            case Channel::current: return i_w;
            case Channel::power: return p_w;
            case Channel::source: break;
        }
        throw InvalidArgument("wire record has no '" + to_string(c) + "' channel");
    }
};

inline WireRecord synthesize_wire(const NoiseTrace& u_a, const NoiseTrace& u_b, double r_a, double r_b) {
    detail::require(u_a.size() == u_b.size(), "synthesize_wire: trace length mismatch");
    detail::require(u_a.dt() == u_b.dt(), "synthesize_wire: dt mismatch");
    detail::require(r_a > 0.0 && r_b > 0.0, "synthesize_wire: resistances must be positive");
    const std::size_t n = u_a.size();
    std::vector<double> u(n), i(n), p(n);
    const double loop = r_a + r_b;
    for (std::size_t t = 0; t < n; ++t) {
        i[t] = (u_a[t] - u_b[t]) / loop;
        u[t] = i[t] * r_b + u_b[t];
        p[t] = u[t] * i[t];
    }
    return {NoiseTrace(std::move(u), u_a.dt(), "u_w"), NoiseTrace(std::move(i), u_a.dt(), "i_w"),
            NoiseTrace(std::move(p), u_a.dt(), "p_w")};
}

/// True wire for a bank and a resistor choice.
inline WireRecord synthesize_wire(const SourceBank& bank, Combo combo, const SystemParams& params) {
    const Selection a = alice_of(combo), b = bob_of(combo);
    return synthesize_wire(bank.get(Side::alice, a), bank.get(Side::bob, b), params.resistance(a),
                           params.resistance(b));
}

inline double parallel_resistance(double r_a, double r_b) {
    detail::require(r_a > 0.0 && r_b > 0.0, "parallel_resistance: resistances must be positive");
    return r_a * r_b / (r_a + r_b);
}

inline double expected_mean_square(double r_a, double r_b, const SystemParams& params) {
    return 4.0 * params.boltzmann * params.t_eff * parallel_resistance(r_a, r_b) * params.bandwidth;
}

inline double expected_mean_square(Combo c, const SystemParams& params) {
    return expected_mean_square(params.resistance(alice_of(c)), params.resistance(bob_of(c)), params);
}

enum class Level { low, mid, high };

inline std::string to_string(Level l) {
    switch (l) {
        case Level::low: return "low";
        case Level::mid: return "mid";
        case Level::high: return "high";
    }
    return "?";
}

/// Nearest theoretical mean-square level in log-ratio distance. LH and HL
/// both map to `mid`.
inline Level classify_level(double measured_ms, const SystemParams& params) {
    detail::require(measured_ms >= 0.0, "classify_level: mean square must be >= 0");
    if (measured_ms == 0.0) return Level::low;
    const double levels[3] = {expected_mean_square(Combo::LL, params), expected_mean_square(Combo::LH, params),
                              expected_mean_square(Combo::HH, params)};
    int best = 0;
    double best_d = std::abs(std::log(measured_ms / levels[0]));
    for (int k = 1; k < 3; ++k) {
        const double d = std::abs(std::log(measured_ms / levels[k]));
        if (d < best_d) {
            best_d = d;
            best = k;
        }
    }
    return static_cast<Level>(best);
}

/// Combos consistent with a level.
inline std::vector<Combo> combos_at(Level l) {
    switch (l) {
        case Level::low: return {Combo::LL};
        case Level::mid: return {Combo::HL, Combo::LH};
        case Level::high: return {Combo::HH};
    }
    return {};
}

namespace detail {

inline Selection nearest_selection(double r, const SystemParams& params) {
    return std::abs(std::log(r / params.r_low)) <= std::abs(std::log(r / params.r_high)) ? Selection::L
                                                                                          : Selection::H;
}

}  // namespace detail

/// Partner resistance implied by the measured wire mean square, given one's
/// own resistor: invert the Johnson formula for R_P, then the parallel
/// formula for the partner, then snap to {R_L, R_H}.
inline double infer_other_resistor(double r_own, double measured_ms, const SystemParams& params) {
    const bool own_low = std::abs(r_own - params.r_low) <= 1e-12 * params.r_low;
    const bool own_high = std::abs(r_own - params.r_high) <= 1e-12 * params.r_high;
    detail::require(own_low || own_high, "infer_other_resistor: own resistance must be R_L or R_H");
    detail::require(measured_ms >= 0.0, "infer_other_resistor: mean square must be >= 0");

    const double r_p = measured_ms / (4.0 * params.boltzmann * params.t_eff * params.bandwidth);
    if (r_p > 0.0 && r_p < r_own) {
        const double partner = r_p * r_own / (r_own - r_p);
        return params.resistance(detail::nearest_selection(partner, params));
    }

    // R_P at or above R_own has no positive partner. Accept the nearest
    // valid level only if the measurement is within 50% of it.
    double best_r = 0.0;
    double best_rel = std::numeric_limits<double>::infinity();
    for (Selection s : {Selection::L, Selection::H}) {
        const double level = expected_mean_square(r_own, params.resistance(s), params);
        const double rel = std::abs(measured_ms - level) / level;
        if (rel < best_rel) {
            best_rel = rel;
            best_r = params.resistance(s);
        }
    }
    if (best_rel <= 0.5) return best_r;
    throw InferenceDegenerate("infer_other_resistor: measured mean square " + std::to_string(measured_ms) +
                              " V^2 implies R_P >= own resistance");
}

}  // namespace kljn
