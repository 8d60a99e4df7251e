#include "nlx/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using nlx::Philox4x32;

TEST_CASE("philox block matches the published known-answer vectors") {
    using A4 = std::array<std::uint32_t, 4>;
    CHECK(Philox4x32::block({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(Philox4x32::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
          A4{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(Philox4x32::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
          A4{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("stream output is the block of (position, stream) under the seed key") {
    Philox4x32 g(0x0123456789abcdefull, 5);
    const auto c = Philox4x32::block({0, 0, 5, 0}, {0x89abcdefu, 0x01234567u});
    CHECK(g() == ((static_cast<std::uint64_t>(c[1]) << 32) | c[0]));
    CHECK(g() == ((static_cast<std::uint64_t>(c[3]) << 32) | c[2]));
    CHECK(g.position() == 1);
}

TEST_CASE("same seed and stream reproduce; different streams do not collide") {
    Philox4x32 a(42, 7), b(42, 7), c(42, 8), d(43, 7);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 1000; ++i) {
        const auto x = a();
        CHECK(x == b());
        seen.insert(x);
        seen.insert(c());
        seen.insert(d());
    }
    CHECK(seen.size() == 3000);
}

TEST_CASE("uniform_open stays inside (0, 1) with the right first two moments") {
    Philox4x32 g(9, 0);
    const int n = 200000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = g.uniform_open();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        s += u;
        s2 += u * u;
    }
    CHECK(std::abs(s / n - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
    CHECK(std::abs(s2 / n - 1.0 / 3.0) < 4.0 * std::sqrt(4.0 / 45.0 / n));
}
