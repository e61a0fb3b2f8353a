#include <doctest.h>

#include "reference_oracles.hpp"
#include "umbra/shadow_model.hpp"

using namespace umbra;

namespace {

SceneParams random_scene(int n, std::mt19937_64& rng) {
    SceneParams scene;
    scene.reflectance = oracle::random_image(n, n, 3, rng, 0.05, 0.95, Range::Unit1);
    std::uniform_real_distribution<double> d(0.1, 0.6);
    for (int c = 0; c < 3; ++c) {
        scene.ambient_illum[c] = d(rng);
        scene.direct_illum[c] = d(rng);
    }
    return scene;
}

AttenuationField uniform_atten(int n, double a) {
    return AttenuationField{FloatImage(n, n, 1, Range::Unit1, a)};
}

RawMask center_square(int n, int lo, int hi) {
    RawMask m(n, n, 0);
    for (int y = lo; y < hi; ++y)
        for (int x = lo; x < hi; ++x) m.at(y, x) = 255;
    return m;
}

}  // namespace

TEST_CASE("render_shadow_free") {
    std::mt19937_64 rng(21);

    SUBCASE("zero reflectance gives black") {
        SceneParams s = random_scene(4, rng);
        for (double& v : s.reflectance.data) v = 0.0;
        FloatImage img = render_shadow_free(s);
        for (double v : img.data) CHECK(v == 0.0);
    }
    SUBCASE("L_d=0, L_a=1, R=1 gives uniform 255") {
        SceneParams s;
        s.reflectance = FloatImage(3, 3, 3, Range::Unit1, 1.0);
        s.direct_illum = {0, 0, 0};
        s.ambient_illum = {1, 1, 1};
        FloatImage img = render_shadow_free(s);
        for (double v : img.data) CHECK(v == 255.0);
    }
    SUBCASE("random scene equals elementwise brute force") {
        SceneParams s = random_scene(5, rng);
        FloatImage img = render_shadow_free(s);
        for (int y = 0; y < 5; ++y)
            for (int x = 0; x < 5; ++x)
                for (int c = 0; c < 3; ++c) {
                    const double expect =
                        255.0 * std::clamp((s.direct_illum[c] + s.ambient_illum[c]) *
                                               s.reflectance.at(y, x, c),
                                           0.0, 1.0);
                    CHECK(img.at(y, x, c) == expect);
                }
    }
}

TEST_CASE("render_shadow") {
    std::mt19937_64 rng(22);
    const int n = 6;
    RawMask mask = center_square(n, 1, 5);

    SUBCASE("a=1 with no direct light: shadow equals shadow-free") {
        SceneParams s = random_scene(n, rng);
        s.direct_illum = {0, 0, 0};
        FloatImage sh = render_shadow(s, uniform_atten(n, 1.0), mask);
        FloatImage free = render_shadow_free(s);
        CHECK(sh.data == free.data);
    }
    SUBCASE("a=0.5 with no direct light halves the shadow pixels") {
        SceneParams s = random_scene(n, rng);
        s.direct_illum = {0, 0, 0};
        s.ambient_illum = {1, 1, 1};
        for (double& v : s.reflectance.data) v *= 0.9;  // keep clamp inactive
        FloatImage sh = render_shadow(s, uniform_atten(n, 0.5), mask);
        FloatImage free = render_shadow_free(s);
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x)
                for (int c = 0; c < 3; ++c) {
                    if (mask.at(y, x) == 255)
                        CHECK(sh.at(y, x, c) == doctest::Approx(free.at(y, x, c) / 2).epsilon(1e-12));
                    else
                        CHECK(sh.at(y, x, c) == free.at(y, x, c));
                }
    }
    SUBCASE("random scene equals brute force; darker than shadow-free inside mask") {
        SceneParams s = random_scene(n, rng);
        AttenuationField a = uniform_atten(n, 0.37);
        FloatImage sh = render_shadow(s, a, mask);
        FloatImage free = render_shadow_free(s);
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x)
                for (int c = 0; c < 3; ++c) {
                    const bool in = mask.at(y, x) == 255;
                    const double expect =
                        in ? 255.0 * std::clamp(0.37 * s.ambient_illum[c] *
                                                    s.reflectance.at(y, x, c),
                                                0.0, 1.0)
                           : free.at(y, x, c);
                    CHECK(sh.at(y, x, c) == expect);
                    if (in) CHECK(sh.at(y, x, c) <= free.at(y, x, c));
                }
    }
    SUBCASE("dimension mismatch rejected") {
        SceneParams s = random_scene(n, rng);
        CHECK_THROWS_AS(render_shadow(s, uniform_atten(n + 1, 0.5), mask), ShadowModelError);
    }
}

TEST_CASE("relight") {
    std::mt19937_64 rng(23);
    const int n = 8;
    RawMask mask = center_square(n, 2, 6);

    SUBCASE("render_shadow -> relight recovers render_shadow_free within 0.5/255") {
        SceneParams s = random_scene(n, rng);
        // keep everything strictly inside [0,1] so no clamp fires
        for (int c = 0; c < 3; ++c) {
            const double total = s.direct_illum[c] + s.ambient_illum[c];
            s.direct_illum[c] /= total * 1.05;
            s.ambient_illum[c] /= total * 1.05;
        }
        AttenuationField a = uniform_atten(n, 0.42);
        FloatImage sh = render_shadow(s, a, mask);
        FloatImage lit = relight(sh, s, a, mask);
        FloatImage expect = render_shadow_free(s);
        for (std::size_t i = 0; i < lit.size(); ++i)
            CHECK(std::fabs(lit.data[i] - expect.data[i]) < 0.5 / 255.0);
    }
    SUBCASE("a=1, L_d=0: identity on the shadow region") {
        SceneParams s = random_scene(n, rng);
        s.direct_illum = {0, 0, 0};
        FloatImage sh = render_shadow(s, uniform_atten(n, 1.0), mask);
        FloatImage lit = relight(sh, s, uniform_atten(n, 1.0), mask);
        CHECK(lit.data == sh.data);
    }
    SUBCASE("empty mask returns the input unchanged") {
        SceneParams s = random_scene(n, rng);
        RawMask empty(n, n, 0);
        FloatImage sh = render_shadow(s, uniform_atten(n, 0.5), empty);
        FloatImage lit = relight(sh, s, uniform_atten(n, 0.5), empty);
        CHECK(lit.data == sh.data);
    }
    SUBCASE("zero attenuation inside the mask is a singularity") {
        SceneParams s = random_scene(n, rng);
        AttenuationField a = uniform_atten(n, 0.0);
        FloatImage sh = render_shadow_free(s);
        CHECK_THROWS_AS(relight(sh, s, a, mask), ShadowModelError);
    }
}

TEST_CASE("apply_linear_map") {
    std::mt19937_64 rng(24);
    const int n = 6;
    RawMask mask = center_square(n, 1, 5);
    FloatImage img = oracle::random_image(n, n, 3, rng, 10, 90);

    SUBCASE("identity parameters") {
        FloatImage out = apply_linear_map(img, LinearShadowParams{}, mask);
        CHECK(out.data == img.data);
    }
    SUBCASE("w=2 on a constant-50 region doubles it") {
        FloatImage c50(n, n, 3, Range::Raw255, 50.0);
        LinearShadowParams p;
        p.w = {2, 2, 2};
        FloatImage out = apply_linear_map(c50, p, mask);
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x)
                for (int c = 0; c < 3; ++c)
                    CHECK(out.at(y, x, c) == (mask.at(y, x) == 255 ? 100.0 : 50.0));
    }
}

TEST_CASE("fit_linear_map") {
    std::mt19937_64 rng(25);
    const int n = 8;
    RawMask mask = center_square(n, 1, 7);

    SUBCASE("round-trip recovery of (2.5, 25.5) within 1e-6") {
        FloatImage shadow = oracle::random_image(n, n, 3, rng, 10, 90);
        LinearShadowParams truth;
        truth.w = {2.5, 2.5, 2.5};
        truth.b = {25.5, 25.5, 25.5};
        FloatImage lit = apply_linear_map(shadow, truth, mask);
        LinearShadowParams fit = fit_linear_map(shadow, lit, mask);
        for (int c = 0; c < 3; ++c) {
            CHECK(std::fabs(fit.w[c] - 2.5) < 1e-6);
            CHECK(std::fabs(fit.b[c] - 25.5) < 1e-6);
            CHECK(fit.residual_rms[c] < 1e-6);
        }
    }
    SUBCASE("lit = shadow gives w=1, b=0") {
        FloatImage shadow = oracle::random_image(n, n, 3, rng, 5, 250);
        LinearShadowParams fit = fit_linear_map(shadow, shadow, mask);
        for (int c = 0; c < 3; ++c) {
            CHECK(std::fabs(fit.w[c] - 1.0) < 1e-12);
            CHECK(std::fabs(fit.b[c]) < 1e-9);
        }
    }
    SUBCASE("noiseless render pair with constant illumination: residual < 1e-6") {
        SceneParams s = random_scene(n, rng);
        for (int c = 0; c < 3; ++c) {
            const double total = s.direct_illum[c] + s.ambient_illum[c];
            s.direct_illum[c] /= total;
            s.ambient_illum[c] /= total;  // L_d + L_a = 1, keeps values in range
        }
        const double a = 0.4;
        FloatImage sh = render_shadow(s, uniform_atten(n, a), mask);
        FloatImage free = render_shadow_free(s);
        LinearShadowParams fit = fit_linear_map(sh, free, mask);
        for (int c = 0; c < 3; ++c) {
            const double w_expect = 1.0 / (a * s.ambient_illum[c]);
            CHECK(std::fabs(fit.w[c] - w_expect) < 1e-6 * w_expect);
            CHECK(fit.residual_rms[c] < 1e-6);
            CHECK(fit.w[c] > 1.0);  // physical regime
        }
    }
    SUBCASE("constant shadow channel is rank-deficient") {
        FloatImage flat(n, n, 3, Range::Raw255, 42.0);
        FloatImage lit = oracle::random_image(n, n, 3, rng, 0, 255);
        CHECK_THROWS_AS(fit_linear_map(flat, lit, mask), ShadowModelError);
    }
    SUBCASE("fewer than 2 masked pixels rejected") {
        RawMask tiny(n, n, 0);
        tiny.at(0, 0) = 255;
        FloatImage a = oracle::random_image(n, n, 3, rng, 0, 255);
        CHECK_THROWS_AS(fit_linear_map(a, a, tiny), ShadowModelError);
    }
}
