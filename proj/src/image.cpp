#include "facesketch/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

namespace fsk {

namespace {

struct RawPng {
    int width = 0;
    int height = 0;
    int channels = 0;   // 1 gray, 3 rgb
    int bit_depth = 0;  // 8 or 16
    std::vector<std::uint8_t> bytes;  // rows, 16-bit samples big-endian
};

void on_png_error(png_structp png, png_const_charp message)
{
    throw std::runtime_error(std::string("png: ") + message);
    (void)png;
}

void on_png_warning(png_structp, png_const_charp) {}

std::vector<std::uint8_t> encode(const RawPng& raw)
{
    std::vector<std::uint8_t> out;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, on_png_error, on_png_warning);
    if (!png) throw std::runtime_error("png: cannot create write struct");
    png_infop info = png_create_info_struct(png);
    try {
        if (!info) throw std::runtime_error("png: cannot create info struct");
        png_set_write_fn(
            png, &out,
            [](png_structp p, png_bytep data, png_size_t len) {
                auto* v = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(p));
                v->insert(v->end(), data, data + len);
            },
            nullptr);
        png_set_IHDR(png, info, raw.width, raw.height, raw.bit_depth,
                     raw.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                     PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
        png_write_info(png, info);
        const std::size_t stride = static_cast<std::size_t>(raw.width) * raw.channels * (raw.bit_depth / 8);
        for (int j = 0; j < raw.height; ++j) png_write_row(png, const_cast<png_bytep>(raw.bytes.data() + j * stride));
        png_write_end(png, nullptr);
    } catch (...) {
        png_destroy_write_struct(&png, &info);
        throw;
    }
    png_destroy_write_struct(&png, &info);
    return out;
}

RawPng decode(const std::vector<std::uint8_t>& bytes)
{
    if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) throw std::runtime_error("png: not a PNG stream");
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, on_png_error, on_png_warning);
    if (!png) throw std::runtime_error("png: cannot create read struct");
    png_infop info = png_create_info_struct(png);
    struct Cursor {
        const std::vector<std::uint8_t>* data;
        std::size_t pos;
    } cursor{&bytes, 0};
    RawPng raw;
    try {
        if (!info) throw std::runtime_error("png: cannot create info struct");
        png_set_read_fn(png, &cursor, [](png_structp p, png_bytep out, png_size_t len) {
            auto* c = static_cast<Cursor*>(png_get_io_ptr(p));
            if (c->pos + len > c->data->size()) png_error(p, "truncated stream");
            std::memcpy(out, c->data->data() + c->pos, len);
            c->pos += len;
        });
        png_read_info(png, info);
        const int color = png_get_color_type(png, info);
        const int depth = png_get_bit_depth(png, info);
        if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
        if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
        if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
        png_read_update_info(png, info);
        raw.width = static_cast<int>(png_get_image_width(png, info));
        raw.height = static_cast<int>(png_get_image_height(png, info));
        raw.channels = png_get_channels(png, info);
        raw.bit_depth = png_get_bit_depth(png, info);
        const std::size_t stride = png_get_rowbytes(png, info);
        raw.bytes.resize(stride * raw.height);
        for (int j = 0; j < raw.height; ++j) png_read_row(png, raw.bytes.data() + j * stride, nullptr);
        png_read_end(png, nullptr);
    } catch (...) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw;
    }
    png_destroy_read_struct(&png, &info, nullptr);
    return raw;
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<std::uint8_t> read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint8_t unit_to_byte(double v) { return static_cast<std::uint8_t>(std::lround(std::clamp((v + 1.0) / 2.0, 0.0, 1.0) * 255.0)); }

}  // namespace

std::size_t DepthMap::valid_count() const { return static_cast<std::size_t>(std::count(valid.data.begin(), valid.data.end(), 1)); }

std::uint16_t depth_to_code(double z)
{
    const long code = std::lround(std::clamp((z + 1.0) / 2.0, 0.0, 1.0) * 65535.0);
    return static_cast<std::uint16_t>(std::max(code, 1L));
}

double code_to_depth(std::uint16_t code) { return code / 65535.0 * 2.0 - 1.0; }

Rgb normal_to_rgb(const Vec3& n) { return {unit_to_byte(n.x()), unit_to_byte(n.y()), unit_to_byte(n.z())}; }

RgbImage normal_map_to_rgb(const NormalMap& normals)
{
    RgbImage out(normals.width(), normals.height());
    for (std::size_t k = 0; k < out.size(); ++k)
        if (normals.valid.data[k]) out.data[k] = normal_to_rgb(normals.n.data[k]);
    return out;
}

void write_depth_png(const DepthMap& depth, const std::string& path)
{
    RawPng raw{depth.width(), depth.height(), 1, 16, {}};
    raw.bytes.resize(depth.z.size() * 2);
    for (std::size_t k = 0; k < depth.z.size(); ++k) {
        const std::uint16_t code = depth.valid.data[k] ? depth_to_code(depth.z.data[k]) : 0;
        raw.bytes[2 * k] = static_cast<std::uint8_t>(code >> 8);
        raw.bytes[2 * k + 1] = static_cast<std::uint8_t>(code & 0xff);
    }
    write_file(path, encode(raw));
}

DepthMap read_depth_png(const std::string& path)
{
    const RawPng raw = decode(read_file(path));
    if (raw.channels != 1 || raw.bit_depth != 16) throw std::runtime_error("depth PNG must be 16-bit grayscale: " + path);
    DepthMap depth(raw.width, raw.height);
    for (std::size_t k = 0; k < depth.z.size(); ++k) {
        const std::uint16_t code = static_cast<std::uint16_t>((raw.bytes[2 * k] << 8) | raw.bytes[2 * k + 1]);
        if (code == 0) continue;
        depth.valid.data[k] = 1;
        depth.z.data[k] = code_to_depth(code);
    }
    return depth;
}

void write_normal_png(const NormalMap& normals, const std::string& path) { write_rgb_png(normal_map_to_rgb(normals), path); }

NormalMap read_normal_png(const std::string& path)
{
    const RgbImage rgb = read_rgb_png(path);
    NormalMap out(rgb.width, rgb.height);
    for (std::size_t k = 0; k < rgb.size(); ++k) {
        const Rgb& c = rgb.data[k];
        if (c == Rgb{}) continue;
        const Vec3 n(c.r / 255.0 * 2 - 1, c.g / 255.0 * 2 - 1, c.b / 255.0 * 2 - 1);
        out.n.data[k] = n.normalized();
        out.valid.data[k] = 1;
    }
    return out;
}

std::vector<std::uint8_t> encode_rgb_png(const RgbImage& image)
{
    RawPng raw{image.width, image.height, 3, 8, {}};
    raw.bytes.resize(image.size() * 3);
    for (std::size_t k = 0; k < image.size(); ++k) {
        raw.bytes[3 * k] = image.data[k].r;
        raw.bytes[3 * k + 1] = image.data[k].g;
        raw.bytes[3 * k + 2] = image.data[k].b;
    }
    return encode(raw);
}

RgbImage decode_rgb_png(const std::vector<std::uint8_t>& bytes)
{
    const RawPng raw = decode(bytes);
    if (raw.bit_depth != 8 || (raw.channels != 3 && raw.channels != 1))
        throw std::runtime_error("expected an 8-bit RGB or gray PNG");
    RgbImage out(raw.width, raw.height);
    for (std::size_t k = 0; k < out.size(); ++k) {
        if (raw.channels == 3) out.data[k] = {raw.bytes[3 * k], raw.bytes[3 * k + 1], raw.bytes[3 * k + 2]};
        else out.data[k] = {raw.bytes[k], raw.bytes[k], raw.bytes[k]};
    }
    return out;
}

void write_rgb_png(const RgbImage& image, const std::string& path) { write_file(path, encode_rgb_png(image)); }

RgbImage read_rgb_png(const std::string& path) { return decode_rgb_png(read_file(path)); }

}  // namespace fsk
