#pragma once

#include <optional>
#include <string>
#include <vector>

#include "facesketch/image.hpp"
#include "facesketch/mesh.hpp"

namespace fsk {

enum class StrokeKind { ridge, valley, contour };

std::string to_string(StrokeKind kind);
/// Throws std::invalid_argument for unknown names.
StrokeKind stroke_kind_from_string(const std::string& name);

/// Canvas coordinates are in pixels with pixel (i, j) covering
/// [i, i+1) x [j, j+1); y grows downward.
struct Stroke {
    StrokeKind kind = StrokeKind::ridge;
    std::vector<Vec2> polyline;
    double depth = 0.5;  // a in [0, 1]; 1 is the strongest
    double width = 3.0;  // px

    bool operator==(const Stroke&) const = default;
};

/// Throws std::invalid_argument unless the polyline has >= 2 finite points,
/// depth lies in [0, 1] and width > 0.
void validate_stroke(const Stroke& stroke);

/// Stroke intensity c = round(255 - 254 a): 255 for a = 0, 1 for a = 1.
int stroke_intensity(double depth);

using SketchImage = RgbImage;

/// Ridge pixels (c,0,0), valley (0,c,0), contour (255,255,255) on black.
/// Later strokes overwrite earlier ones.
SketchImage encode_strokes(const std::vector<Stroke>& strokes, int width, int height);

struct DecodedPixel {
    StrokeKind kind;
    double depth;  // exact inverse of the intensity rule; contour pixels report 0
};
std::optional<DecodedPixel> decode_pixel(const Rgb& pixel);

/// Silhouette pixels of the frontal depth render plus interior depth jumps
/// larger than `jump` (marked on the nearer side).
SketchImage render_contours(const TriMesh& mesh, int width = 512, int height = 512, double jump = 0.05);

/// White contour pixels with the user's strokes drawn on top.
SketchImage compose_sketch(const SketchImage& contours, const std::vector<Stroke>& strokes);

/// Windowed Gaussian profile: 1 at d = 0, 0 for d >= 3 sigma, continuous.
double stroke_profile(double distance, double sigma);

/// Signed displacement (model units): sum over strokes of
/// s * A * (1 - c/255) * G(distance to polyline) with s = +1 ridge, -1 valley,
/// sigma = width. Contour strokes contribute nothing.
Image<double> stroke_displacement_field(const std::vector<Stroke>& strokes, int width, int height,
                                        double amplitude = 0.06);

/// Pixels within 3 sigma of any ridge or valley polyline.
Mask stroke_support(const std::vector<Stroke>& strokes, int width, int height);

/// Reflection about the canvas vertical midline (symmetric mode).
Stroke mirror_stroke(const Stroke& stroke, int canvas_width);

double distance_to_polyline(const Vec2& p, const std::vector<Vec2>& polyline);

}  // namespace fsk
