#pragma once

#include <array>
#include <string>
#include <string_view>

#include "kljn/errors.hpp"

namespace kljn {

enum class Selection { L, H };
enum class Side { alice, bob };

/// Resistor combination, Alice's letter first. Declaration order matches the
/// row order of the published tables.
enum class Combo { HH, LL, HL, LH };

inline constexpr std::array<Combo, 4> kAllCombos{Combo::HH, Combo::LL, Combo::HL, Combo::LH};

enum class Channel { voltage, current, power, source };

enum class MixingMode { johnson_scaled, unit_scaled };

enum class Knowledge { bilateral, unilateral_alice };

constexpr Selection alice_of(Combo c) {
    return (c == Combo::LL || c == Combo::LH) ? Selection::L : Selection::H;
}
constexpr Selection bob_of(Combo c) {
    return (c == Combo::LL || c == Combo::HL) ? Selection::L : Selection::H;
}
constexpr Selection side_of(Combo c, Side s) { return s == Side::alice ? alice_of(c) : bob_of(c); }

constexpr Combo make_combo(Selection alice, Selection bob) {
    if (alice == Selection::L) return bob == Selection::L ? Combo::LL : Combo::LH;
    return bob == Selection::L ? Combo::HL : Combo::HH;
}

constexpr bool is_secure(Combo c) { return alice_of(c) != bob_of(c); }

inline std::string to_string(Selection s) { return s == Selection::L ? "L" : "H"; }
inline std::string to_string(Side s) { return s == Side::alice ? "alice" : "bob"; }

inline std::string to_string(Combo c) {
    switch (c) {
        case Combo::HH: return "HH";
        case Combo::LL: return "LL";
        case Combo::HL: return "HL";
        case Combo::LH: return "LH";
    }
    return "?";
}

inline std::string to_string(Channel c) {
    switch (c) {
        case Channel::voltage: return "voltage";
        case Channel::current: return "current";
        case Channel::power: return "power";
        case Channel::source: return "source";
    }
    return "?";
}

inline std::string to_string(MixingMode m) {
    return m == MixingMode::johnson_scaled ? "johnson-scaled" : "unit-scaled";
}

inline std::string to_string(Knowledge k) {
    return k == Knowledge::bilateral ? "bilateral" : "unilateral-alice";
}

inline Combo parse_combo(std::string_view s) {
    for (Combo c : kAllCombos)
        if (to_string(c) == s) return c;
    throw InvalidArgument("unknown resistor combination '" + std::string(s) + "'");
}

inline Selection parse_selection(std::string_view s) {
    if (s == "L") return Selection::L;
    if (s == "H") return Selection::H;
    throw InvalidArgument("unknown resistor selection '" + std::string(s) + "'");
}

inline Channel parse_channel(std::string_view s) {
    for (Channel c : {Channel::voltage, Channel::current, Channel::power, Channel::source})
        if (to_string(c) == s) return c;
    throw InvalidArgument("unknown channel '" + std::string(s) + "'");
}

inline MixingMode parse_mixing_mode(std::string_view s) {
    if (s == "johnson-scaled") return MixingMode::johnson_scaled;
    if (s == "unit-scaled") return MixingMode::unit_scaled;
    throw InvalidArgument("unknown mixing mode '" + std::string(s) + "'");
}

inline Knowledge parse_knowledge(std::string_view s) {
    if (s == "bilateral") return Knowledge::bilateral;
    if (s == "unilateral-alice") return Knowledge::unilateral_alice;
    throw InvalidArgument("unknown knowledge '" + std::string(s) + "'");
}

}  // namespace kljn

namespace kljn {

enum class AttackKind { wire_bilateral, source_bilateral, wire_unilateral, source_unilateral };

/// How Eve turns four probe scores into a guess. `level_gated` first
/// classifies the measured mean-square level and only considers the
/// combinations consistent with it (LH/HL for a secure period); `all_combos`
/// takes the argmax over all four.
enum class DecisionRule { level_gated, all_combos };

inline std::string to_string(AttackKind a) {
    switch (a) {
        case AttackKind::wire_bilateral: return "wire-bilateral";
        case AttackKind::source_bilateral: return "source-bilateral";
        case AttackKind::wire_unilateral: return "wire-unilateral";
        case AttackKind::source_unilateral: return "source-unilateral";
    }
    return "?";
}

inline AttackKind parse_attack(std::string_view s) {
    for (AttackKind a : {AttackKind::wire_bilateral, AttackKind::source_bilateral, AttackKind::wire_unilateral,
                         AttackKind::source_unilateral})
        if (to_string(a) == s) return a;
    throw InvalidArgument("unknown attack '" + std::string(s) + "'");
}

constexpr Knowledge knowledge_of(AttackKind a) {
    return (a == AttackKind::wire_bilateral || a == AttackKind::source_bilateral) ? Knowledge::bilateral
                                                                                  : Knowledge::unilateral_alice;
}

constexpr bool is_wire_attack(AttackKind a) {
    return a == AttackKind::wire_bilateral || a == AttackKind::wire_unilateral;
}

inline std::string to_string(DecisionRule r) { return r == DecisionRule::level_gated ? "level-gated" : "all"; }

inline DecisionRule parse_decision_rule(std::string_view s) {
    if (s == "level-gated") return DecisionRule::level_gated;
    if (s == "all") return DecisionRule::all_combos;
    throw InvalidArgument("unknown decision rule '" + std::string(s) + "'");
}

}  // namespace kljn
