#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "kljn/attacks.hpp"
#include "kljn/noise_gen.hpp"
#include "kljn/spectral.hpp"

using namespace kljn;

namespace {

double lag1(const NoiseTrace& t) {
    const auto s = t.samples();
    return ccc(s.subspan(0, s.size() - 1), s.subspan(1));
}

}  // namespace

TEST_CASE("Johnson RMS of the default resistors", "[noise]") {
    const SystemParams p;
    CHECK(johnson_rms(p.r_low, p) == Catch::Approx(16.613).margin(5e-4));
    CHECK(johnson_rms(p.r_high, p) == Catch::Approx(52.536).margin(5e-4));
    CHECK(p.tau() == Catch::Approx(1e-3));

    SystemParams codata = p;
    codata.boltzmann = kBoltzmannCodata;
    CHECK(johnson_rms(p.r_low, codata) > johnson_rms(p.r_low, p));
}

TEST_CASE("invalid parameters are rejected", "[noise]") {
    SystemParams p;
    p.n_steps = 1;
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
    p = {};
    p.r_high = p.r_low;
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
    p = {};
    p.bandwidth = 0.0;
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
    p = {};
    p.ensemble = 0;
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
    CHECK_THROWS_AS(johnson_rms(-1.0, SystemParams{}), InvalidArgument);
}

TEST_CASE("traces reject bad samples and spacing", "[noise]") {
    CHECK_THROWS_AS(NoiseTrace({1.0}, 1.0), InvalidArgument);
    CHECK_THROWS_AS(NoiseTrace({1.0, 2.0}, 0.0), InvalidArgument);
    CHECK_THROWS_AS(NoiseTrace({1.0, std::nan("")}, 1.0), NumericError);
    const NoiseTrace t({3.0, 4.0}, 0.5, "x");
    CHECK(t.mean_square() == 12.5);
    CHECK(t.relabeled("y") == t);
    CHECK(t.relabeled("y").label() == "y");
}

TEST_CASE("unit Gaussian is centred and normalised", "[noise][property]") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        RngStream r(seed);
        const NoiseTrace g = generate_unit_gaussian(4096, 10, r);
        REQUIRE(std::abs(stats::mean(g.samples())) < 1e-12);
        REQUIRE(g.rms() == Catch::Approx(1.0).epsilon(1e-12));
    }
    RngStream a(1), b(1);
    REQUIRE(generate_unit_gaussian(256, 3, a) == generate_unit_gaussian(256, 3, b));
}

TEST_CASE("antialias doubles the rate and removes power above the old band", "[noise]") {
    RngStream r(11);
    const NoiseTrace raw = generate_unit_gaussian(1024, 10, r, 1e-3);
    const NoiseTrace fine = antialias(raw);
    REQUIRE(fine.size() == 2048);
    REQUIRE(fine.dt() == Catch::Approx(0.5e-3));
    REQUIRE(fine.rms() == Catch::Approx(raw.rms()).epsilon(1e-12));

    const auto psd = spectral::periodogram(fine.samples(), fine.dt());
    double in = 0.0, out = 0.0;
    for (std::size_t k = 1; k < psd.power.size(); ++k) (psd.frequency(k) <= 500.0 ? in : out) += psd.power[k];
    REQUIRE(out < 1e-20 * in);

    // Band-limited interpolation passes through the original samples.
    std::vector<double> even(1024);
    for (std::size_t i = 0; i < 1024; ++i) even[i] = fine[2 * i];
    REQUIRE(ccc(even, raw.samples()) > 0.999);
}

TEST_CASE("antialias length rules", "[noise]") {
    const NoiseTrace odd(std::vector<double>(1000, 0.0), 1.0);
    CHECK_THROWS_AS(antialias(odd), InvalidArgument);
    RngStream r(2);
    const NoiseTrace g = generate_unit_gaussian(1000, 1, r);
    const NoiseTrace fine = antialias(g, false);
    CHECK(fine.size() == 2000);
    CHECK(fine.rms() == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("synthesised noise is white, centred and Johnson-scaled", "[noise][property]") {
    const SystemParams p;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const RngStream r = RngStream::derive(seed, "test-noise");
        const NoiseTrace u = make_johnson_noise(p.r_low, p, r);
        REQUIRE(u.size() == p.n_steps);
        REQUIRE(u.dt() == Catch::Approx(p.tau()));
        REQUIRE(std::abs(stats::mean(u.samples())) < 1e-10);
        REQUIRE(u.rms() == Catch::Approx(johnson_rms(p.r_low, p)).epsilon(1e-12));
        REQUIRE(std::abs(lag1(u)) < 4.5 / std::sqrt(static_cast<double>(p.n_steps)));
    }
}

TEST_CASE("stages of the pipeline are consistent", "[noise]") {
    SystemParams p;
    p.n_steps = 1000;
    const NoiseStages s = synthesize_unit_noise(p, RngStream(3));
    CHECK(s.raw.size() == 1024);
    CHECK(s.antialiased.size() == 2048);
    CHECK(s.output.size() == 1000);
    CHECK(s.output == make_unit_noise(p, RngStream(3)));
}

TEST_CASE("noise quality summary at moderate length", "[noise]") {
    SystemParams p;
    p.n_steps = 1 << 16;
    const NoiseStages s = synthesize_unit_noise(p, RngStream(8));
    const NoiseTrace scaled = scale_to_johnson(s.output, p.r_high, p);
    const NoiseQuality q = assess_noise(scaled, s, p.r_high, p);
    CHECK(q.rms_rel_error() < 1e-12);
    CHECK(std::abs(q.skewness) < 0.05);
    CHECK(std::abs(q.excess_kurtosis) < 0.1);
    CHECK(q.flatness_db < 3.0);
    CHECK(q.rejection_db > 100.0);
}

TEST_CASE("source bank members are independent", "[noise][property]") {
    const SystemParams p;
    const SourceBank bank = make_source_bank(p, RngStream::derive(42, "trial", 0));
    const NoiseTrace* all[4] = {&bank.u_HA, &bank.u_LA, &bank.u_HB, &bank.u_LB};
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) REQUIRE(std::abs(ccc(*all[i], *all[j])) < 5.0 / std::sqrt(1000.0));
    CHECK(bank.get(Side::alice, Selection::L).rms() == Catch::Approx(johnson_rms(p.r_low, p)));
    CHECK(bank.get(Side::bob, Selection::H).rms() == Catch::Approx(johnson_rms(p.r_high, p)));
}

TEST_CASE("Eve's copy correlation follows the design value", "[noise][property]") {
    SystemParams p;
    p.n_steps = 20000;
    const NoiseTrace src = make_johnson_noise(p.r_low, p, RngStream(21));
    for (double m : {0.1, 0.5, 1.0, 3.0}) {
        const NoiseTrace copy = make_eve_copy(src, p.r_low, m, MixingMode::unit_scaled, p, RngStream(22));
        const double rho = design_rho(m, MixingMode::unit_scaled, p.r_low, p);
        REQUIRE(rho == Catch::Approx(1.0 / std::sqrt(1.0 + m * m)));
        REQUIRE(ccc(src, copy) == Catch::Approx(rho).margin(4.0 * (1.0 - rho * rho) / std::sqrt(20000.0) + 1e-3));
        REQUIRE(copy.rms() == Catch::Approx(johnson_rms(p.r_low, p)).epsilon(1e-12));
    }
    // Johnson-scaled mixing multiplies M by the RMS voltage.
    CHECK(mixing_multiplier(0.1, MixingMode::johnson_scaled, p.r_low, p) ==
          Catch::Approx(0.1 * johnson_rms(p.r_low, p)));
    CHECK(design_rho(0.1, MixingMode::johnson_scaled, p.r_high, p) < design_rho(0.1, MixingMode::johnson_scaled, p.r_low, p));
}

TEST_CASE("M = 0 copy is the source itself", "[noise]") {
    const SystemParams p;
    const NoiseTrace src = make_johnson_noise(p.r_high, p, RngStream(4));
    const NoiseTrace copy = make_eve_copy(src, p.r_high, 0.0, MixingMode::johnson_scaled, p, RngStream(5));
    REQUIRE(copy == src);
    CHECK_THROWS_AS(make_eve_copy(src, p.r_high, -1.0, MixingMode::johnson_scaled, p, RngStream(5)), InvalidArgument);
}

TEST_CASE("Eve model uses per-resistor design correlations", "[noise]") {
    const SystemParams p;
    const RngStream trial = RngStream::derive(1, "trial", 0);
    const SourceBank bank = make_source_bank(p, trial);
    const EveModel eve = eve_model(bank, 0.5, MixingMode::johnson_scaled, p, trial);
    CHECK(eve.rho_low == Catch::Approx(design_rho(0.5, MixingMode::johnson_scaled, p.r_low, p)));
    CHECK(eve.rho_high == Catch::Approx(design_rho(0.5, MixingMode::johnson_scaled, p.r_high, p)));
    CHECK(eve.copies.u_LA.size() == bank.u_LA.size());
    CHECK_FALSE(eve.copies.u_LA == bank.u_LA);
}
