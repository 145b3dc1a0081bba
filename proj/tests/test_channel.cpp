#include <catch_amalgamated.hpp>

#include <cmath>

#include "kljn/kljn_channel.hpp"

using namespace kljn;

TEST_CASE("wire obeys both loop equations and P = U I", "[channel][property]") {
    const SystemParams p;
    const SourceBank bank = make_source_bank(p, RngStream::derive(42, "trial", 3));
    for (Combo c : kAllCombos) {
        const WireRecord w = synthesize_wire(bank, c, p);
        const NoiseTrace& ua = bank.get(Side::alice, alice_of(c));
        const NoiseTrace& ub = bank.get(Side::bob, bob_of(c));
        const double ra = p.resistance(alice_of(c)), rb = p.resistance(bob_of(c));
        for (std::size_t t = 0; t < w.u_w.size(); ++t) {
            REQUIRE(w.u_w[t] == Catch::Approx(ua[t] - w.i_w[t] * ra).margin(1e-9 * (std::abs(ua[t]) + 1.0)));
            REQUIRE(w.u_w[t] == Catch::Approx(ub[t] + w.i_w[t] * rb).margin(1e-9 * (std::abs(ub[t]) + 1.0)));
            REQUIRE(w.p_w[t] == w.u_w[t] * w.i_w[t]);
        }
    }
}

TEST_CASE("wire synthesis validates inputs", "[channel]") {
    const NoiseTrace a({1.0, 2.0}, 1.0), b({1.0, 2.0, 3.0}, 1.0), c({1.0, 2.0}, 2.0);
    CHECK_THROWS_AS(synthesize_wire(a, b, 1.0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(synthesize_wire(a, c, 1.0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(synthesize_wire(a, a, 0.0, 1.0), InvalidArgument);
}

TEST_CASE("channel accessor", "[channel]") {
    const NoiseTrace a({1.0, -1.0}, 1.0), b({0.5, 0.5}, 1.0);
    const WireRecord w = synthesize_wire(a, b, 1.0, 1.0);
    CHECK(&w.channel(Channel::voltage) == &w.u_w);
    CHECK(&w.channel(Channel::current) == &w.i_w);
    CHECK(&w.channel(Channel::power) == &w.p_w);
    CHECK_THROWS_AS(w.channel(Channel::source), InvalidArgument);
}

TEST_CASE("theoretical mean-square levels", "[channel]") {
    const SystemParams p;
    CHECK(expected_mean_square(Combo::LL, p) == Catch::Approx(138.0).margin(0.05));
    CHECK(expected_mean_square(Combo::LH, p) == Catch::Approx(250.9).margin(0.05));
    CHECK(expected_mean_square(Combo::HL, p) == Catch::Approx(250.9).margin(0.05));
    CHECK(expected_mean_square(Combo::HH, p) == Catch::Approx(1380.0).margin(0.05));
    CHECK(parallel_resistance(10e3, 10e3) == 5e3);
}

TEST_CASE("level classification", "[channel]") {
    const SystemParams p;
    CHECK(classify_level(expected_mean_square(Combo::LL, p), p) == Level::low);
    CHECK(classify_level(expected_mean_square(Combo::LH, p), p) == Level::mid);
    CHECK(classify_level(expected_mean_square(Combo::HH, p), p) == Level::high);
    CHECK(classify_level(0.0, p) == Level::low);
    CHECK(classify_level(1e6, p) == Level::high);
    CHECK(combos_at(Level::mid) == std::vector<Combo>{Combo::HL, Combo::LH});
    CHECK(combos_at(Level::low) == std::vector<Combo>{Combo::LL});
    CHECK(to_string(Level::mid) == "mid");
    CHECK_THROWS_AS(classify_level(-1.0, p), InvalidArgument);
}

TEST_CASE("secure periods classify as mid for almost every realisation", "[channel][property]") {
    const SystemParams p;
    int mid = 0;
    for (std::uint64_t t = 0; t < 300; ++t) {
        const SourceBank bank = make_source_bank(p, RngStream::derive(7, "trial", t));
        mid += classify_level(synthesize_wire(bank, t % 2 ? Combo::LH : Combo::HL, p).u_w.mean_square(), p) == Level::mid;
    }
    REQUIRE(mid == 300);
}

TEST_CASE("partner resistance inference", "[channel]") {
    const SystemParams p;
    CHECK(infer_other_resistor(p.r_low, expected_mean_square(Combo::LH, p), p) == p.r_high);
    CHECK(infer_other_resistor(p.r_high, expected_mean_square(Combo::HL, p), p) == p.r_low);
    CHECK(infer_other_resistor(p.r_low, expected_mean_square(Combo::LL, p), p) == p.r_low);
    CHECK(infer_other_resistor(p.r_high, expected_mean_square(Combo::HH, p), p) == p.r_high);
    // Own R_L with a mean square above anything R_L can produce, but near LH.
    CHECK(infer_other_resistor(p.r_low, 280.0, p) == p.r_high);
    CHECK_THROWS_AS(infer_other_resistor(p.r_low, 1380.0, p), InferenceDegenerate);
    CHECK_THROWS_AS(infer_other_resistor(55e3, 250.0, p), InvalidArgument);
}

TEST_CASE("resistor choice and key bit", "[channel]") {
    CHECK(ResistorChoice::from(Combo::LH).key_bit() == 0);
    CHECK(ResistorChoice::from(Combo::HL).key_bit() == 1);
    CHECK_FALSE(ResistorChoice::from(Combo::HH).key_bit().has_value());
    CHECK(ResistorChoice::from(Combo::LL).combo() == Combo::LL);
    CHECK(ResistorChoice::from(Combo::HL).secure());
}

TEST_CASE("mean power on the wire vanishes", "[channel][property]") {
    const SystemParams p;
    for (Combo c : kAllCombos) {
        int inside = 0;
        for (std::uint64_t t = 0; t < 200; ++t) {
            const SourceBank bank = make_source_bank(p, RngStream::derive(11, "trial", t));
            const auto pw = synthesize_wire(bank, c, p).p_w.samples();
            const double se = stats::stddev(pw) / std::sqrt(static_cast<double>(pw.size()));
            inside += std::abs(stats::mean(pw)) <= 3.0 * se;
        }
        REQUIRE(inside >= 190);
    }
}
