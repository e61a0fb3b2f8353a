#include <doctest.h>

#include "reference_oracles.hpp"
#include "umbra/degrade.hpp"

using namespace umbra;

namespace {

RawMask square_in_field(int field, int lo, int hi) {
    RawMask m(field, field, 0);
    for (int y = lo; y < hi; ++y)
        for (int x = lo; x < hi; ++x) m.at(y, x) = 255;
    return m;
}

}  // namespace

TEST_CASE("extract_contour") {
    SUBCASE("solid 5x5 square, band 1: the 16 border pixels") {
        RawMask m = square_in_field(9, 2, 7);
        auto contour = extract_contour(m, 1);
        CHECK(contour.size() == 16);
        for (std::size_t p : contour) {
            const int y = (int)(p / 9), x = (int)(p % 9);
            CHECK(m.at(y, x) == 255);
            CHECK((y == 2 || y == 6 || x == 2 || x == 6));
        }
    }
    SUBCASE("all-shadow image has no contour") {
        RawMask m(6, 6, 255);
        CHECK(extract_contour(m, 1).empty());
    }
    SUBCASE("single shadow pixel is its own contour") {
        RawMask m(5, 5, 0);
        m.at(2, 3) = 255;
        auto contour = extract_contour(m, 1);
        REQUIRE(contour.size() == 1);
        CHECK(contour[0] == 2u * 5 + 3);
    }
    SUBCASE("band 2 contour strictly contains band 1") {
        RawMask m = square_in_field(12, 2, 10);
        auto b1 = extract_contour(m, 1);
        auto b2 = extract_contour(m, 2);
        CHECK(b2.size() > b1.size());
    }
    SUBCASE("empty mask gives an empty set") {
        CHECK(extract_contour(RawMask(4, 4, 0), 2).empty());
    }
}

TEST_CASE("degrade_mask") {
    SUBCASE("target 0 flips nothing") {
        RawMask m = square_in_field(10, 2, 7);
        DegradeResult r = degrade_mask(m, DegradeSpec{0.0, 7, 1});
        CHECK(r.flipped == 0);
        CHECK(r.mask.data == m.data);
        CHECK(*r.achieved.ber == 0.0);
    }
    SUBCASE("flipping the whole contour of a 5x5 square matches the confusion-count oracle") {
        RawMask m = square_in_field(10, 2, 7);  // 25 shadow pixels, 16 on the band-1 contour
        const double max_target = 50.0 * 16.0 / 25.0;  // every flip is a new false negative
        DegradeResult r = degrade_mask(m, DegradeSpec{max_target, 3, 1});
        CHECK(r.flipped == 16);
        CHECK(*r.achieved.ber ==
              doctest::Approx(oracle::ber_from_counts(9, 75, 0, 16)).epsilon(1e-12));
    }
    SUBCASE("unreachable target names the maximum achievable BER") {
        RawMask m = square_in_field(10, 2, 7);
        CHECK_THROWS_WITH_AS(degrade_mask(m, DegradeSpec{90.0, 1, 1}),
                             doctest::Contains("unreachable"), DegradeError);
    }
    SUBCASE("deterministic per seed, different across seeds") {
        RawMask m = square_in_field(24, 4, 20);
        DegradeResult a = degrade_mask(m, DegradeSpec{4.0, 11, 2});
        DegradeResult b = degrade_mask(m, DegradeSpec{4.0, 11, 2});
        CHECK(a.mask.data == b.mask.data);
        CHECK(*a.achieved.ber == *b.achieved.ber);
        DegradeResult c = degrade_mask(m, DegradeSpec{4.0, 12, 2});
        CHECK(a.mask.data != c.mask.data);  // same count, different subset
        CHECK(a.flipped == c.flipped);
    }
    SUBCASE("degradation only shrinks the shadow set") {
        RawMask m = square_in_field(20, 3, 16);
        DegradeResult r = degrade_mask(m, DegradeSpec{3.0, 5, 2});
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (m.data[i] == 0) CHECK(r.mask.data[i] == 0);
            if (r.mask.data[i] == 255) CHECK(m.data[i] == 255);
        }
        CHECK(r.achieved.fp == 0);
    }
    SUBCASE("achieved BER is monotone in the flip count and lands within one flip") {
        RawMask m = square_in_field(32, 4, 28);  // 576 shadow pixels
        const double granularity = 50.0 / 576.0;
        double prev = -1.0;
        for (double target : {0.5, 1.0, 2.0, 4.0}) {
            DegradeResult r = degrade_mask(m, DegradeSpec{target, 9, 2});
            CHECK(std::fabs(*r.achieved.ber - target) <= granularity);
            CHECK(*r.achieved.ber >= prev);
            prev = *r.achieved.ber;
        }
    }
}
