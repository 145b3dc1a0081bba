#include <catch_amalgamated.hpp>

#include <concepts>
#include <random>
#include <set>

#include "kljn/rng.hpp"
#include "kljn/stats.hpp"

using kljn::RngStream;

static_assert(std::uniform_random_bit_generator<RngStream>);

TEST_CASE("derive is a pure function of its arguments", "[rng]") {
    RngStream a = RngStream::derive(42, "trial", 7, 1);
    RngStream b = RngStream::derive(42, "trial", 7, 1);
    REQUIRE(a.key() == b.key());
    for (int i = 0; i < 100; ++i) REQUIRE(a() == b());
}

TEST_CASE("every derivation coordinate changes the key", "[rng]") {
    const auto base = RngStream::derive(42, "trial", 7, 1).key();
    CHECK(RngStream::derive(43, "trial", 7, 1).key() != base);
    CHECK(RngStream::derive(42, "source", 7, 1).key() != base);
    CHECK(RngStream::derive(42, "trial", 8, 1).key() != base);
    CHECK(RngStream::derive(42, "trial", 7, 2).key() != base);
}

TEST_CASE("trial and sub-index keys do not collide", "[rng][property]") {
    std::set<std::uint64_t> keys;
    for (std::uint64_t t = 0; t < 2000; ++t)
        for (std::uint64_t s = 0; s < 4; ++s) keys.insert(RngStream::derive(1, "trial", t, s).key());
    REQUIRE(keys.size() == 8000);
}

TEST_CASE("split depends on identity, not position", "[rng]") {
    RngStream parent = RngStream::derive(5, "trial", 3);
    const auto before = parent.split("source", 2).key();
    for (int i = 0; i < 37; ++i) parent();
    REQUIRE(parent.split("source", 2).key() == before);
    REQUIRE(parent.split("source", 3).key() != before);
    REQUIRE(parent.split("eve-mix", 2).key() != before);
}

TEST_CASE("uniform draws lie in [0,1) with the right mean", "[rng][property]") {
    RngStream r(123);
    kljn::stats::Accumulator acc;
    for (int i = 0; i < 200000; ++i) {
        const double u = r.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        acc.add(u);
    }
    REQUIRE(std::abs(acc.mean() - 0.5) < 5.0 * acc.standard_error());
    REQUIRE(acc.variance() == Catch::Approx(1.0 / 12.0).epsilon(0.01));
}

TEST_CASE("streams drive standard distributions", "[rng]") {
    RngStream r = RngStream::derive(9, "gauss");
    std::normal_distribution<double> nd;
    kljn::stats::Accumulator acc;
    for (int i = 0; i < 100000; ++i) acc.add(nd(r));
    REQUIRE(std::abs(acc.mean()) < 5.0 * acc.standard_error());
    REQUIRE(acc.variance() == Catch::Approx(1.0).epsilon(0.02));
}

TEST_CASE("sibling streams are uncorrelated", "[rng][property]") {
    RngStream a = RngStream::derive(42, "trial", 0).split("source", 0);
    RngStream b = RngStream::derive(42, "trial", 0).split("source", 1);
    const int n = 100000;
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += (a.uniform() - 0.5) * (b.uniform() - 0.5);
    const double corr = (s / n) * 12.0;
    REQUIRE(std::abs(corr) < 5.0 / std::sqrt(n));
}
