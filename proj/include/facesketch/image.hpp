#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "facesketch/mesh.hpp"

namespace fsk {

/// Row-major W x H raster; (i, j) = (column, row), row 0 at the top.
template <typename T>
struct Image {
    int width = 0;
    int height = 0;
    std::vector<T> data;

    Image() = default;
    Image(int w, int h, const T& fill = T()) : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill)
    {
        if (w < 0 || h < 0) throw std::invalid_argument("Image: negative size");
    }

    std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * width + i; }
    T& at(int i, int j) { return data[index(i, j)]; }
    const T& at(int i, int j) const { return data[index(i, j)]; }
    bool contains(int i, int j) const { return i >= 0 && j >= 0 && i < width && j < height; }
    std::size_t size() const { return data.size(); }
    bool empty() const { return data.empty(); }
    bool same_size(int w, int h) const { return width == w && height == h; }
    template <typename U>
    bool same_size(const Image<U>& o) const { return width == o.width && height == o.height; }
};

using Mask = Image<std::uint8_t>;

/// Frontal orthographic camera: x right, y up, z toward the viewer, view
/// volume [-1,1]^2 x [-1,1]. Pixel (i, j) centre sits at
/// x = -1 + 2(i + 0.5)/W, y = 1 - 2(j + 0.5)/H.
struct OrthoCamera {
    int width = 512;
    int height = 512;

    double x_of(double i) const { return -1.0 + 2.0 * (i + 0.5) / width; }
    double y_of(double j) const { return 1.0 - 2.0 * (j + 0.5) / height; }
    /// Continuous pixel coordinates; integer values are pixel centres.
    double col_of(double x) const { return (x + 1.0) * width / 2.0 - 0.5; }
    double row_of(double y) const { return (1.0 - y) * height / 2.0 - 0.5; }
    /// Model units per pixel along x (equal to y for square rasters).
    double pixel_size() const { return 2.0 / width; }
};

/// Camera-space z per pixel (larger is closer); `valid` = 0 marks background.
struct DepthMap {
    Image<double> z;
    Mask valid;

    DepthMap() = default;
    DepthMap(int w, int h) : z(w, h, 0.0), valid(w, h, 0) {}
    int width() const { return z.width; }
    int height() const { return z.height; }
    bool ok(int i, int j) const { return valid.contains(i, j) && valid.at(i, j); }
    std::size_t valid_count() const;
};

struct NormalMap {
    Image<Vec3> n;
    Mask valid;

    NormalMap() = default;
    NormalMap(int w, int h) : n(w, h, Vec3::Zero()), valid(w, h, 0) {}
    int width() const { return n.width; }
    int height() const { return n.height; }
};

/// Pixel displacements (dx right, dy down).
using FlowField = Image<Vec2>;

struct PointCloud {
    std::vector<Vec3> points;
    std::vector<Vec3> normals;  // empty or one per point
};

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Rgb&) const = default;
};
using RgbImage = Image<Rgb>;

// PNG files. Depth: 16-bit gray, value = round((z+1)/2 * 65535), 0 = invalid.
// Normals: 8-bit RGB, channel = round((n+1)/2 * 255), black = invalid.
void write_depth_png(const DepthMap& depth, const std::string& path);
DepthMap read_depth_png(const std::string& path);
void write_normal_png(const NormalMap& normals, const std::string& path);
NormalMap read_normal_png(const std::string& path);
void write_rgb_png(const RgbImage& image, const std::string& path);
RgbImage read_rgb_png(const std::string& path);
std::vector<std::uint8_t> encode_rgb_png(const RgbImage& image);
RgbImage decode_rgb_png(const std::vector<std::uint8_t>& bytes);

std::uint16_t depth_to_code(double z);
double code_to_depth(std::uint16_t code);
Rgb normal_to_rgb(const Vec3& n);
RgbImage normal_map_to_rgb(const NormalMap& normals);

}  // namespace fsk
