#include <doctest.h>

#include "reference_oracles.hpp"
#include "umbra/metrics.hpp"

using namespace umbra;

namespace {

void check_triple(const RegionValues& got, const oracle::RegionTriple& want, double tol) {
    REQUIRE(got.shadow.has_value() == want.s.has_value());
    REQUIRE(got.nonshadow.has_value() == want.ns.has_value());
    REQUIRE(got.all.has_value() == want.all.has_value());
    if (want.s) CHECK(std::fabs(*got.shadow - *want.s) < tol);
    if (want.ns) CHECK(std::fabs(*got.nonshadow - *want.ns) < tol);
    if (want.all) CHECK(std::fabs(*got.all - *want.all) < tol);
}

}  // namespace

TEST_CASE("mae_lab") {
    std::mt19937_64 rng(51);

    SUBCASE("identical images give zero in every region") {
        FloatImage img = oracle::random_byte_image(16, 16, 3, rng);
        RawMask mask = oracle::random_mask(16, 16, rng);
        RegionValues v = mae_lab(img, img, mask);
        CHECK(*v.shadow == 0.0);
        CHECK(*v.nonshadow == 0.0);
        CHECK(*v.all == 0.0);
    }
    SUBCASE("L shifted by +1 gives exactly 1/3 (channel-mean convention)") {
        FloatImage lab_a(4, 4, 3, Range::Lab);
        std::uniform_real_distribution<double> dl(20, 80), dab(-30, 30);
        for (std::size_t p = 0; p < 16; ++p) {
            lab_a.data[p * 3 + 0] = dl(rng);
            lab_a.data[p * 3 + 1] = dab(rng);
            lab_a.data[p * 3 + 2] = dab(rng);
        }
        FloatImage lab_b = lab_a;
        for (std::size_t p = 0; p < 16; ++p) lab_b.data[p * 3] += 1.0;
        RawMask mask = oracle::random_mask(4, 4, rng);
        RegionValues v = mae_lab_from_lab(lab_a, lab_b, mask);
        CHECK(*v.all == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    }
    SUBCASE("random pairs match the naive oracle") {
        for (int rep = 0; rep < 5; ++rep) {
            FloatImage a = oracle::random_byte_image(16, 16, 3, rng);
            FloatImage b = oracle::random_byte_image(16, 16, 3, rng);
            RawMask mask = oracle::random_mask(16, 16, rng);
            check_triple(mae_lab(a, b, mask), oracle::mae_lab(a, b, mask), 1e-10);
        }
    }
    SUBCASE("empty region reports nullopt") {
        FloatImage a = oracle::random_byte_image(8, 8, 3, rng);
        RawMask empty(8, 8, 0);
        RegionValues v = mae_lab(a, a, empty);
        CHECK(!v.shadow.has_value());
        CHECK(v.nonshadow.has_value());
    }
    SUBCASE("S and NS combine to All as the pixel-weighted mean") {
        FloatImage a = oracle::random_byte_image(12, 12, 3, rng);
        FloatImage b = oracle::random_byte_image(12, 12, 3, rng);
        RawMask mask = oracle::random_mask(12, 12, rng);
        RegionValues v = mae_lab(a, b, mask);
        const double s_cnt = (double)mask.shadow_count();
        const double n_cnt = (double)(mask.size() - mask.shadow_count());
        const double combined = (*v.shadow * s_cnt + *v.nonshadow * n_cnt) / (s_cnt + n_cnt);
        CHECK(*v.all == doctest::Approx(combined).epsilon(1e-12));
    }
}

TEST_CASE("psnr") {
    std::mt19937_64 rng(52);
    RawMask mask = oracle::random_mask(16, 16, rng);

    SUBCASE("identical images cap at 100 dB") {
        FloatImage img = oracle::random_byte_image(16, 16, 3, rng);
        RegionValues v = psnr(img, img, mask);
        CHECK(*v.shadow == 100.0);
        CHECK(*v.all == 100.0);
    }
    SUBCASE("uniform error of 255 gives 0 dB") {
        FloatImage a(16, 16, 3, Range::Raw255, 0.0);
        FloatImage b(16, 16, 3, Range::Raw255, 255.0);
        RegionValues v = psnr(a, b, mask);
        CHECK(*v.all == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("random pairs match the naive oracle within 1e-8 dB") {
        for (int rep = 0; rep < 5; ++rep) {
            FloatImage a = oracle::random_byte_image(16, 16, 3, rng);
            FloatImage b = oracle::random_byte_image(16, 16, 3, rng);
            check_triple(psnr(a, b, mask), oracle::psnr(a, b, mask), 1e-8);
        }
    }
}

TEST_CASE("ssim") {
    std::mt19937_64 rng(53);

    SUBCASE("identical images give exactly 1.0") {
        FloatImage img = oracle::random_byte_image(16, 16, 3, rng);
        RawMask mask = oracle::random_mask(16, 16, rng);
        RegionValues v = ssim(img, img, mask);
        CHECK(*v.shadow == 1.0);
        CHECK(*v.nonshadow == 1.0);
        CHECK(*v.all == 1.0);
    }
    SUBCASE("constant 0 vs constant 255 matches the naive value") {
        FloatImage a(16, 16, 3, Range::Raw255, 0.0);
        FloatImage b(16, 16, 3, Range::Raw255, 255.0);
        RawMask mask(16, 16, 0);
        RegionValues v = ssim(a, b, mask);
        auto want = oracle::ssim(a, b, mask);
        CHECK(std::fabs(*v.all - *want.all) < 1e-10);
        // constant images, zero variance: ssim = C1*C2 / ((mu_a^2+mu_b^2+C1)*C2)
        const double c1 = 6.5025;
        const double expect = c1 / (255.0 * 255.0 + c1);
        CHECK(*v.all == doctest::Approx(expect).epsilon(1e-9));
    }
    SUBCASE("random pairs match the naive windowed oracle within 1e-8") {
        for (int rep = 0; rep < 3; ++rep) {
            FloatImage a = oracle::random_byte_image(16, 16, 3, rng);
            FloatImage b = oracle::random_byte_image(16, 16, 3, rng);
            RawMask mask = oracle::random_mask(16, 16, rng);
            check_triple(ssim(a, b, mask), oracle::ssim(a, b, mask), 1e-8);
        }
    }
    SUBCASE("images below 11x11 are rejected") {
        FloatImage small(8, 8, 3, Range::Raw255, 0.0);
        CHECK_THROWS_AS(ssim(small, small, RawMask(8, 8, 0)), MetricError);
    }
}

TEST_CASE("ber") {
    SUBCASE("identical masks give 0") {
        std::mt19937_64 rng(54);
        RawMask m = oracle::random_mask(8, 8, rng);
        BerScore s = ber(m, m);
        CHECK(*s.ber == 0.0);
        CHECK(s.fp == 0);
        CHECK(s.fn == 0);
    }
    SUBCASE("complement gives 100") {
        std::mt19937_64 rng(55);
        RawMask m = oracle::random_mask(8, 8, rng);
        RawMask inv = m;
        for (auto& v : inv.data) v = v == 255 ? 0 : 255;
        CHECK(*ber(inv, m).ber == 100.0);
    }
    SUBCASE("frozen confusion layout: tp=4 fn=4 tn=6 fp=2 -> 37.5") {
        // 4x4 grid: gt shadow on the top two rows.
        RawMask gt(4, 4);
        RawMask pred(4, 4);
        for (int x = 0; x < 4; ++x) {
            gt.at(0, x) = 255;
            gt.at(1, x) = 255;
        }
        // pred: half the shadow kept (tp=4), 2 false alarms below
        pred.at(0, 0) = pred.at(0, 1) = pred.at(1, 0) = pred.at(1, 1) = 255;
        pred.at(2, 0) = pred.at(2, 1) = 255;
        BerScore s = ber(pred, gt);
        CHECK(s.tp == 4);
        CHECK(s.fn == 4);
        CHECK(s.fp == 2);
        CHECK(s.tn == 6);
        CHECK(*s.ber == doctest::Approx(37.5).epsilon(1e-12));
        CHECK(*s.ber ==
              doctest::Approx(oracle::ber_from_counts(s.tp, s.tn, s.fp, s.fn)).epsilon(1e-12));
    }
    SUBCASE("single-class ground truth has no defined BER") {
        RawMask gt(4, 4, 255);
        RawMask pred(4, 4, 0);
        CHECK(!ber(pred, gt).ber.has_value());
    }
    SUBCASE("non-binary masks rejected") {
        RawMask soft(2, 2, 0);
        soft.data[1] = 128;
        CHECK_THROWS_AS(ber(soft, RawMask(2, 2, 0)), MetricError);
    }
}

TEST_CASE("metrics are permutation symmetric") {
    // Pure pointwise statistics: permuting all rasters together leaves
    // MAE/PSNR/BER untouched (SSIM is windowed, so excluded).
    std::mt19937_64 rng(56);
    FloatImage a = oracle::random_byte_image(6, 6, 3, rng);
    FloatImage b = oracle::random_byte_image(6, 6, 3, rng);
    RawMask m = oracle::random_mask(6, 6, rng);

    std::vector<std::size_t> perm(36);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    FloatImage pa = a, pb = b;
    RawMask pm = m;
    for (std::size_t i = 0; i < 36; ++i) {
        for (int c = 0; c < 3; ++c) {
            pa.data[i * 3 + c] = a.data[perm[i] * 3 + c];
            pb.data[i * 3 + c] = b.data[perm[i] * 3 + c];
        }
        pm.data[i] = m.data[perm[i]];
    }
    RegionValues v1 = mae_lab(a, b, m);
    RegionValues v2 = mae_lab(pa, pb, pm);
    CHECK(*v1.all == doctest::Approx(*v2.all).epsilon(1e-12));
    CHECK(*v1.shadow == doctest::Approx(*v2.shadow).epsilon(1e-12));
    RegionValues p1 = psnr(a, b, m);
    RegionValues p2 = psnr(pa, pb, pm);
    CHECK(*p1.all == doctest::Approx(*p2.all).epsilon(1e-12));
}
