#include <stdexcept>
#include <cmath>

#include "doctest.h"
#include "sgdlab/rng.hpp"

using sgdlab::NoiseStream;
using sgdlab::Philox4x32;

// Known-answer vectors of the reference Philox4x32-10 implementation.
TEST_CASE("philox known answers") {
    using C = Philox4x32::Counter;
    using K = Philox4x32::Key;
    CHECK(Philox4x32::generate(C{0, 0, 0, 0}, K{0, 0}) == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(Philox4x32::generate(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, K{0xffffffff, 0xffffffff}) ==
          C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(Philox4x32::generate(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}) ==
          C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("substreams are reproducible and distinct") {
    NoiseStream a(7, 0, 12), b(7, 0, 12), c(7, 1, 12), d(7, 0, 13), e(8, 0, 12);
    for (int i = 0; i < 10; ++i) {
        const double va = a.uniform();
        CHECK(va == b.uniform());
        CHECK(va != c.uniform());
        CHECK(va != d.uniform());
        CHECK(va != e.uniform());
    }
}

TEST_CASE("uniform moments") {
    NoiseStream s(1, 0, 0);
    const int n = 200000;
    double sum = 0, sum2 = 0, lo = 1, hi = 0;
    for (int i = 0; i < n; ++i) {
        const double u = s.uniform();
        sum += u;
        sum2 += u * u;
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    CHECK(lo > 0.0);
    CHECK(hi < 1.0);
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.005));
    CHECK(sum2 / n - (sum / n) * (sum / n) == doctest::Approx(1.0 / 12).epsilon(0.01));
}

TEST_CASE("normal moments") {
    NoiseStream s(2, 0, 0);
    const int n = 200000;
    double sum = 0, sum2 = 0, sum4 = 0;
    for (int i = 0; i < n; ++i) {
        const double z = s.normal();
        sum += z;
        sum2 += z * z;
        sum4 += z * z * z * z;
    }
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(sum2 / n == doctest::Approx(1.0).epsilon(0.01));
    CHECK(sum4 / n == doctest::Approx(3.0).epsilon(0.03));
}
