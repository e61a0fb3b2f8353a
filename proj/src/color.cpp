#include "umbra/color.hpp"

#include <cmath>

namespace umbra {
namespace {

// D65 reference white.
constexpr double kWhiteX = 0.95047;
constexpr double kWhiteY = 1.00000;
constexpr double kWhiteZ = 1.08883;

inline double srgb_to_linear(double v) {
    return v > 0.04045 ? std::pow((v + 0.055) / 1.055, 2.4) : v / 12.92;
}

inline double lab_f(double t) {
    constexpr double delta = 6.0 / 29.0;
    constexpr double delta3 = delta * delta * delta;
    return t > delta3 ? std::cbrt(t) : t / (3.0 * delta * delta) + 4.0 / 29.0;
}

}  // namespace

std::array<double, 3> rgb_to_lab_pixel(double r, double g, double b) {
    const double rl = srgb_to_linear(r);
    const double gl = srgb_to_linear(g);
    const double bl = srgb_to_linear(b);

    const double x = 0.4124564 * rl + 0.3575761 * gl + 0.1804375 * bl;
    const double y = 0.2126729 * rl + 0.7151522 * gl + 0.0721750 * bl;
    const double z = 0.0193339 * rl + 0.1191920 * gl + 0.9503041 * bl;

    const double fx = lab_f(x / kWhiteX);
    const double fy = lab_f(y / kWhiteY);
    const double fz = lab_f(z / kWhiteZ);

    return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

FloatImage rgb_to_lab(const FloatImage& img) {
    img.require_range(Range::Unit1, "rgb_to_lab");
    if (img.channels != 3) throw ImageError("rgb_to_lab: expected 3 channels");
    FloatImage out(img.height, img.width, 3, Range::Lab);
    for (std::size_t p = 0; p < img.pixel_count(); ++p) {
        const double* px = img.data.data() + p * 3;
        auto lab = rgb_to_lab_pixel(px[0], px[1], px[2]);
        double* q = out.data.data() + p * 3;
        q[0] = lab[0];
        q[1] = lab[1];
        q[2] = lab[2];
    }
    return out;
}

}  // namespace umbra
