#include "xpatch/png_io.hpp"

#include <png.h>

#include <openssl/evp.h>

#include <csetjmp>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>

namespace xpatch::io {

namespace {

void png_warn(png_structp, png_const_charp) {}

struct ReadCursor {
    std::span<const std::uint8_t> bytes;
    std::size_t pos = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_png(const Image& image) {
    if (image.channels() != 1 && image.channels() != 3)
        throw std::invalid_argument("encode_png: only gray or RGB images");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, png_warn);
    png_infop info = png_create_info_struct(png);
    std::vector<std::uint8_t> out;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("png: encoding failed");
    }
    {
        png_set_write_fn(
            png, &out,
            [](png_structp p, png_bytep data, png_size_t len) {
                auto* v = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(p));
                v->insert(v->end(), data, data + len);
            },
            nullptr);
        png_set_IHDR(png, info, image.width(), image.height(), 8,
                     image.channels() == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                     PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
        png_write_info(png, info);
        const std::size_t stride = static_cast<std::size_t>(image.width()) * image.channels();
        for (int r = 0; r < image.height(); ++r)
            png_write_row(png, const_cast<png_bytep>(image.data().data() + r * stride));
        png_write_end(png, nullptr);
    }
    png_destroy_write_struct(&png, &info);
    return out;
}

Image decode_png(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) throw std::runtime_error("png: not a PNG stream");
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, png_warn);
    png_infop info = png_create_info_struct(png);
    ReadCursor cursor{bytes};
    Image image;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("png: malformed stream");
    }
    {
        png_set_read_fn(png, &cursor, [](png_structp p, png_bytep data, png_size_t len) {
            auto* c = static_cast<ReadCursor*>(png_get_io_ptr(p));
            if (c->pos + len > c->bytes.size()) png_error(p, "truncated stream");
            std::memcpy(data, c->bytes.data() + c->pos, len);
            c->pos += len;
        });
        png_read_info(png, info);
        int color = png_get_color_type(png, info);
        int depth = png_get_bit_depth(png, info);
        if (depth == 16) png_set_strip_16(png);
        if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
        if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
        if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
        png_read_update_info(png, info);
        int channels = png_get_channels(png, info);
        int w = static_cast<int>(png_get_image_width(png, info));
        int h = static_cast<int>(png_get_image_height(png, info));
        image = Image(h, w, channels);
        const std::size_t stride = static_cast<std::size_t>(w) * channels;
        for (int r = 0; r < h; ++r) png_read_row(png, image.data().data() + r * stride, nullptr);
        png_read_end(png, nullptr);
    }
    png_destroy_read_struct(&png, &info, nullptr);
    return image;
}

void write_png(const std::filesystem::path& path, const Image& image) {
    auto bytes = encode_png(image);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

Image read_png(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return decode_png(bytes);
}

void write_mask_png(const std::filesystem::path& path, const BinaryMask& mask) {
    Image img(mask.height(), mask.width(), 1);
    for (std::size_t i = 0; i < mask.bits().size(); ++i) img.data()[i] = mask.bits()[i] ? 255 : 0;
    write_png(path, img);
}

BinaryMask read_mask_png(const std::filesystem::path& path) {
    Image img = read_png(path);
    BinaryMask mask(img.height(), img.width());
    for (int r = 0; r < img.height(); ++r)
        for (int c = 0; c < img.width(); ++c)
            if (img.at(r, c, 0) >= 128) mask.set(r, c);
    return mask;
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
    std::string out(4 * ((bytes.size() + 2) / 3), '\0');
    int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(), static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
    if (text.size() % 4 != 0) throw std::runtime_error("base64: length is not a multiple of 4");
    std::vector<std::uint8_t> out(3 * (text.size() / 4));
    int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                            static_cast<int>(text.size()));
    if (n < 0) throw std::runtime_error("base64: invalid input");
    // EVP_DecodeBlock keeps the padding bytes.
    std::size_t pad = 0;
    if (!text.empty() && text.back() == '=') ++pad;
    if (text.size() > 1 && text[text.size() - 2] == '=') ++pad;
    out.resize(static_cast<std::size_t>(n) - pad);
    return out;
}

}  // namespace xpatch::io
