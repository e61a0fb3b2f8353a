#include "umbra/masks.hpp"

namespace umbra {

UnitMask binarize_unit(const RawMask& mask) {
    UnitMask out{mask.height, mask.width, std::vector<double>(mask.size())};
    for (std::size_t i = 0; i < mask.size(); ++i) out.data[i] = mask.data[i] / 255.0;
    return out;
}

SignedMask binarize_signed(const RawMask& mask) {
    SignedMask out{mask.height, mask.width, std::vector<double>(mask.size())};
    for (std::size_t i = 0; i < mask.size(); ++i)
        out.data[i] = (mask.data[i] / 255.0) * 2.0 - 1.0;
    return out;
}

SignStats sign_statistics(const FloatImage& img, const RawMask& mask) {
    img.require_range(Range::Signed1, "sign_statistics");
    if (img.height != mask.height || img.width != mask.width)
        throw ImageError("sign_statistics: image/mask dimension mismatch");

    std::size_t s_pos = 0, s_neg = 0, s_tot = 0;
    std::size_t n_pos = 0, n_neg = 0, n_tot = 0;
    for (std::size_t p = 0; p < img.pixel_count(); ++p) {
        const bool shadow = mask.data[p] == 255;
        for (int c = 0; c < img.channels; ++c) {
            const double v = img.data[p * img.channels + c];
            if (shadow) {
                ++s_tot;
                if (v > 0) ++s_pos;
                else if (v < 0) ++s_neg;
            } else {
                ++n_tot;
                if (v > 0) ++n_pos;
                else if (v < 0) ++n_neg;
            }
        }
    }

    SignStats st;
    if (s_tot) {
        st.shadow_pos_frac = (double)s_pos / (double)s_tot;
        st.shadow_neg_frac = (double)s_neg / (double)s_tot;
    }
    if (n_tot) {
        st.nonshadow_pos_frac = (double)n_pos / (double)n_tot;
        st.nonshadow_neg_frac = (double)n_neg / (double)n_tot;
    }
    return st;
}

}  // namespace umbra
