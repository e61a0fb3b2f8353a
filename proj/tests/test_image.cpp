#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "reference_oracles.hpp"
#include "umbra/color.hpp"
#include "umbra/image.hpp"
#include "umbra/image_io.hpp"
#include "umbra/masks.hpp"

using namespace umbra;
namespace fs = std::filesystem;

TEST_CASE("png round-trips are byte-exact") {
    auto dir = oracle::scratch_dir("image");
    std::mt19937_64 rng(11);

    SUBCASE("2x2 all-zero rgb") {
        FloatImage img(2, 2, 3, Range::Raw255, 0.0);
        save_image(img, (dir / "zero.png").string());
        FloatImage back = load_image((dir / "zero.png").string());
        CHECK(back.height == 2);
        CHECK(back.width == 2);
        CHECK(back.channels == 3);
        for (double v : back.data) CHECK(v == 0.0);
    }
    SUBCASE("1x1 white pixel") {
        FloatImage img(1, 1, 3, Range::Raw255, 255.0);
        save_image(img, (dir / "white.png").string());
        FloatImage back = load_image((dir / "white.png").string());
        CHECK(back.data == std::vector<double>{255.0, 255.0, 255.0});
    }
    SUBCASE("random 8x8, rgb and gray, png and pnm") {
        for (int ch : {1, 3}) {
            FloatImage img = oracle::random_byte_image(8, 8, ch, rng);
            for (const char* ext : {".png", ch == 1 ? ".pgm" : ".ppm"}) {
                const std::string path = (dir / ("rt" + std::to_string(ch) + ext)).string();
                save_image(img, path);
                FloatImage back = load_image(path);
                CHECK(back.data == img.data);
            }
        }
    }
    SUBCASE("missing file and truncated data raise errors naming the path") {
        CHECK_THROWS_WITH_AS(load_image((dir / "nope.png").string()),
                             doctest::Contains("nope.png"), ImageError);
        std::ofstream(dir / "trunc.ppm") << "P6\n4 4\n255\nab";
        CHECK_THROWS_AS(load_image((dir / "trunc.ppm").string()), ImageError);
    }
    fs::remove_all(dir);
}

TEST_CASE("signed normalization") {
    FloatImage img(1, 3, 1, Range::Raw255);
    img.data = {0.0, 127.5, 255.0};
    FloatImage s = normalize_signed(img);
    CHECK(s.data[0] == -1.0);
    CHECK(s.data[1] == 0.0);
    CHECK(s.data[2] == 1.0);

    FloatImage back = denormalize_signed(s);
    CHECK(back.data[0] == 0.0);
    CHECK(back.data[1] == 127.5);
    CHECK(back.data[2] == 255.0);

    SUBCASE("wrong range tag is a contract violation") {
        CHECK_THROWS_AS(normalize_signed(s), ImageError);
        CHECK_THROWS_AS(denormalize_signed(img), ImageError);
    }

    SUBCASE("random round-trip within 1e-12, clamped first") {
        std::mt19937_64 rng(3);
        FloatImage x = oracle::random_image(4, 4, 3, rng, -1.3, 1.3, Range::Signed1);
        FloatImage rt = normalize_signed(denormalize_signed(x));
        for (std::size_t i = 0; i < x.size(); ++i)
            CHECK(std::fabs(rt.data[i] - std::clamp(x.data[i], -1.0, 1.0)) < 1e-12);
    }

    SUBCASE("strictly monotone") {
        std::mt19937_64 rng(4);
        FloatImage a = oracle::random_image(2, 2, 1, rng, 0, 254, Range::Raw255);
        FloatImage b = a;
        for (double& v : b.data) v += 1.0;
        FloatImage na = normalize_signed(a), nb = normalize_signed(b);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(nb.data[i] > na.data[i]);
    }
}

TEST_CASE("rgb_to_lab reference points") {
    FloatImage px(1, 1, 3, Range::Unit1);

    SUBCASE("white") {
        px.data = {1.0, 1.0, 1.0};
        FloatImage lab = rgb_to_lab(px);
        CHECK(std::fabs(lab.data[0] - 100.0) < 0.01);
        CHECK(std::fabs(lab.data[1]) < 0.01);
        CHECK(std::fabs(lab.data[2]) < 0.01);
    }
    SUBCASE("black maps to origin") {
        px.data = {0.0, 0.0, 0.0};
        FloatImage lab = rgb_to_lab(px);
        CHECK(std::fabs(lab.data[0]) < 1e-9);
        CHECK(std::fabs(lab.data[1]) < 1e-9);
        CHECK(std::fabs(lab.data[2]) < 1e-9);
    }
    SUBCASE("srgb red, frozen from the sRGB->XYZ(D65)->Lab chain") {
        px.data = {1.0, 0.0, 0.0};
        FloatImage lab = rgb_to_lab(px);
        CHECK(std::fabs(lab.data[0] - 53.2408) < 0.05);
        CHECK(std::fabs(lab.data[1] - 80.0925) < 0.05);
        CHECK(std::fabs(lab.data[2] - 67.2032) < 0.05);
    }
    SUBCASE("grayscale inputs have |a|,|b| < 0.01") {
        for (double v : {0.04, 0.2, 0.5, 0.73, 0.99}) {
            px.data = {v, v, v};
            FloatImage lab = rgb_to_lab(px);
            CHECK(std::fabs(lab.data[1]) < 0.01);
            CHECK(std::fabs(lab.data[2]) < 0.01);
        }
    }
    SUBCASE("channel count validated") {
        FloatImage gray(1, 1, 1, Range::Unit1, 0.5);
        CHECK_THROWS_AS(rgb_to_lab(gray), ImageError);
    }
}

TEST_CASE("mask loading binarizes at 127") {
    auto dir = oracle::scratch_dir("mask");
    FloatImage soft(1, 4, 1, Range::Raw255);
    soft.data = {0.0, 127.0, 128.0, 255.0};
    save_image(soft, (dir / "soft.png").string());
    RawMask m = load_mask((dir / "soft.png").string());
    CHECK(m.data == std::vector<std::uint8_t>{0, 0, 255, 255});
    CHECK(m.is_binary());
    fs::remove_all(dir);
}

TEST_CASE("unit and signed binarization") {
    RawMask m(2, 2);
    m.data = {0, 255, 255, 0};

    UnitMask ms = binarize_unit(m);
    CHECK(ms.data == std::vector<double>{0.0, 1.0, 1.0, 0.0});

    SignedMask mp = binarize_signed(m);
    CHECK(mp.data == std::vector<double>{-1.0, 1.0, 1.0, -1.0});

    SUBCASE("identity Mp = 2*Ms - 1 on random masks") {
        std::mt19937_64 rng(7);
        RawMask r = oracle::random_mask(9, 13, rng);
        UnitMask u = binarize_unit(r);
        SignedMask s = binarize_signed(r);
        for (std::size_t i = 0; i < r.size(); ++i)
            CHECK(s.data[i] == 2.0 * u.data[i] - 1.0);
    }
    SUBCASE("all-255 and all-0") {
        RawMask full(3, 3, 255), empty(3, 3, 0);
        for (double v : binarize_unit(full).data) CHECK(v == 1.0);
        for (double v : binarize_unit(empty).data) CHECK(v == 0.0);
    }
}

TEST_CASE("sign statistics") {
    RawMask mask(2, 2);
    mask.data = {255, 255, 0, 0};

    SUBCASE("uniform negative image") {
        FloatImage img(2, 2, 3, Range::Signed1, -0.5);
        SignStats st = sign_statistics(img, mask);
        CHECK(*st.shadow_neg_frac == 1.0);
        CHECK(*st.nonshadow_neg_frac == 1.0);
        CHECK(*st.shadow_pos_frac == 0.0);
    }
    SUBCASE("zeros count separately") {
        FloatImage img(2, 2, 3, Range::Signed1, 0.0);
        SignStats st = sign_statistics(img, mask);
        CHECK(*st.shadow_pos_frac == 0.0);
        CHECK(*st.shadow_neg_frac == 0.0);
        CHECK(*st.nonshadow_pos_frac == 0.0);
        CHECK(*st.nonshadow_neg_frac == 0.0);
    }
    SUBCASE("empty region reports nullopt") {
        RawMask all_shadow(2, 2, 255);
        FloatImage img(2, 2, 3, Range::Signed1, 0.25);
        SignStats st = sign_statistics(img, all_shadow);
        CHECK(!st.nonshadow_pos_frac.has_value());
        CHECK(*st.shadow_pos_frac == 1.0);
    }
    SUBCASE("pos + neg <= 1 per region (zeros separate)") {
        std::mt19937_64 rng(9);
        FloatImage img = oracle::random_image(6, 6, 3, rng, -1.0, 1.0, Range::Signed1);
        img.data[0] = 0.0;
        RawMask m = oracle::random_mask(6, 6, rng);
        SignStats st = sign_statistics(img, m);
        if (st.shadow_pos_frac)
            CHECK(*st.shadow_pos_frac + *st.shadow_neg_frac <= 1.0 + 1e-12);
    }
}

TEST_CASE("nearest-neighbor resize keeps corners") {
    FloatImage img(2, 2, 1, Range::Raw255);
    img.data = {1, 2, 3, 4};
    FloatImage up = resize_nearest(img, 4, 4);
    CHECK(up.at(0, 0, 0) == 1);
    CHECK(up.at(0, 3, 0) == 2);
    CHECK(up.at(3, 0, 0) == 3);
    CHECK(up.at(3, 3, 0) == 4);
}
