#include "umbra/image_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <vector>

namespace umbra {
namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

bool has_suffix(const std::string& s, const char* suf) {
    std::size_t n = std::strlen(suf);
    return s.size() >= n && s.compare(s.size() - n, n, suf) == 0;
}

std::vector<std::uint8_t> decode_png(const std::string& path, int& h, int& w, int& ch) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw ImageError("cannot open image: " + path);

    png_byte sig[8];
    if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8))
        throw ImageError("not a PNG file: " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ImageError("libpng init failed for: " + path);
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ImageError("PNG decode error in: " + path);
    }
    png_init_io(png, fp.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const int bit_depth = png_get_bit_depth(png, info);
    const int color_type = png_get_color_type(png, info);
    if (bit_depth == 16) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ImageError("unsupported 16-bit depth in: " + path);
    }
    if (color_type & PNG_COLOR_MASK_ALPHA) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ImageError("unsupported alpha channel in: " + path);
    }
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8)
        png_set_expand_gray_1_2_4_to_8(png);
    png_read_update_info(png, info);

    h = (int)png_get_image_height(png, info);
    w = (int)png_get_image_width(png, info);
    ch = (int)png_get_channels(png, info);
    if (ch != 1 && ch != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ImageError("unsupported channel count (" + std::to_string(ch) + ") in: " + path);
    }

    std::vector<std::uint8_t> bytes((std::size_t)h * w * ch);
    std::vector<png_bytep> rows(h);
    for (int y = 0; y < h; ++y) rows[y] = bytes.data() + (std::size_t)y * w * ch;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return bytes;
}

void encode_png(const std::string& path, const std::uint8_t* bytes, int h, int w, int ch) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw ImageError("cannot write image: " + path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw ImageError("libpng init failed for: " + path);
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw ImageError("PNG encode error for: " + path);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, w, h, 8,
                 ch == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_bytep> rows(h);
    for (int y = 0; y < h; ++y)
        rows[y] = const_cast<png_bytep>(bytes + (std::size_t)y * w * ch);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

// Binary PPM (P6) / PGM (P5), maxval 255.
std::vector<std::uint8_t> decode_pnm(const std::string& path, int& h, int& w, int& ch) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ImageError("cannot open image: " + path);
    std::string magic;
    in >> magic;
    if (magic == "P6") ch = 3;
    else if (magic == "P5") ch = 1;
    else throw ImageError("unsupported PNM magic '" + magic + "' in: " + path);

    auto next_int = [&](int& v) {
        // Skip whitespace and '#' comments between header fields.
        for (;;) {
            int c = in.peek();
            if (c == '#') {
                std::string line;
                std::getline(in, line);
            } else if (std::isspace(c)) {
                in.get();
            } else {
                break;
            }
        }
        if (!(in >> v)) throw ImageError("truncated PNM header in: " + path);
    };
    int maxval = 0;
    next_int(w);
    next_int(h);
    next_int(maxval);
    if (maxval != 255) throw ImageError("unsupported PNM maxval in: " + path);
    in.get();  // single whitespace after maxval

    std::vector<std::uint8_t> bytes((std::size_t)h * w * ch);
    in.read(reinterpret_cast<char*>(bytes.data()), (std::streamsize)bytes.size());
    if ((std::size_t)in.gcount() != bytes.size())
        throw ImageError("truncated PNM data in: " + path);
    return bytes;
}

void encode_pnm(const std::string& path, const std::uint8_t* bytes, int h, int w, int ch) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ImageError("cannot write image: " + path);
    out << (ch == 3 ? "P6" : "P5") << "\n" << w << " " << h << "\n255\n";
    out.write(reinterpret_cast<const char*>(bytes), (std::streamsize)h * w * ch);
    if (!out) throw ImageError("write failed: " + path);
}

std::vector<std::uint8_t> decode_any(const std::string& path, int& h, int& w, int& ch) {
    if (has_suffix(path, ".ppm") || has_suffix(path, ".pgm")) return decode_pnm(path, h, w, ch);
    return decode_png(path, h, w, ch);
}

std::uint8_t quantize(double v) {
    return (std::uint8_t)std::lround(std::fmin(std::fmax(v, 0.0), 255.0));
}

}  // namespace

FloatImage load_image(const std::string& path) {
    int h, w, ch;
    std::vector<std::uint8_t> bytes = decode_any(path, h, w, ch);
    FloatImage img(h, w, ch, Range::Raw255);
    for (std::size_t i = 0; i < bytes.size(); ++i) img.data[i] = (double)bytes[i];
    return img;
}

RawMask load_mask(const std::string& path) {
    int h, w, ch;
    std::vector<std::uint8_t> bytes = decode_any(path, h, w, ch);
    RawMask soft(h, w);
    if (ch == 1) {
        soft.data.assign(bytes.begin(), bytes.end());
    } else {
        for (std::size_t p = 0; p < soft.size(); ++p) {
            const std::uint8_t r = bytes[p * 3], g = bytes[p * 3 + 1], b = bytes[p * 3 + 2];
            if (r != g || g != b)
                throw ImageError("mask has non-grayscale pixels: " + path);
            soft.data[p] = r;
        }
    }
    return binarize(soft);
}

void save_image(const FloatImage& img, const std::string& path) {
    img.require_range(Range::Raw255, "save_image");
    std::vector<std::uint8_t> bytes(img.size());
    for (std::size_t i = 0; i < img.size(); ++i) bytes[i] = quantize(img.data[i]);
    if (has_suffix(path, ".ppm") || has_suffix(path, ".pgm"))
        encode_pnm(path, bytes.data(), img.height, img.width, img.channels);
    else
        encode_png(path, bytes.data(), img.height, img.width, img.channels);
}

void save_mask(const RawMask& mask, const std::string& path) {
    if (has_suffix(path, ".pgm"))
        encode_pnm(path, mask.data.data(), mask.height, mask.width, 1);
    else
        encode_png(path, mask.data.data(), mask.height, mask.width, 1);
}

}  // namespace umbra
