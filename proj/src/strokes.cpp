#include "facesketch/strokes.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "facesketch/imageops.hpp"

namespace fsk {

namespace {

struct PixelRange {
    int i0, i1, j0, j1;
};

PixelRange bounds(const std::vector<Vec2>& polyline, double margin, int width, int height)
{
    double xmin = polyline[0].x(), xmax = xmin, ymin = polyline[0].y(), ymax = ymin;
    for (const Vec2& p : polyline) {
        xmin = std::min(xmin, p.x());
        xmax = std::max(xmax, p.x());
        ymin = std::min(ymin, p.y());
        ymax = std::max(ymax, p.y());
    }
    return {std::max(0, static_cast<int>(std::floor(xmin - margin - 0.5))),
            std::min(width - 1, static_cast<int>(std::ceil(xmax + margin - 0.5))),
            std::max(0, static_cast<int>(std::floor(ymin - margin - 0.5))),
            std::min(height - 1, static_cast<int>(std::ceil(ymax + margin - 0.5)))};
}

// Visits pixels whose centre lies within `radius` of the polyline.
template <typename Visit>
void for_each_near(const Stroke& s, double radius, int width, int height, Visit&& visit)
{
    const PixelRange r = bounds(s.polyline, radius, width, height);
    for (int j = r.j0; j <= r.j1; ++j)
        for (int i = r.i0; i <= r.i1; ++i) {
            const double d = distance_to_polyline(Vec2(i + 0.5, j + 0.5), s.polyline);
            if (d <= radius) visit(i, j, d);
        }
}

}  // namespace

std::string to_string(StrokeKind kind)
{
    switch (kind) {
    case StrokeKind::ridge: return "ridge";
    case StrokeKind::valley: return "valley";
    case StrokeKind::contour: return "contour";
    }
    return "ridge";
}

StrokeKind stroke_kind_from_string(const std::string& name)
{
    if (name == "ridge") return StrokeKind::ridge;
    if (name == "valley") return StrokeKind::valley;
    if (name == "contour") return StrokeKind::contour;
    throw std::invalid_argument("unknown stroke kind: " + name);
}

void validate_stroke(const Stroke& stroke)
{
    if (stroke.polyline.size() < 2) throw std::invalid_argument("stroke polyline needs at least 2 points");
    for (const Vec2& p : stroke.polyline)
        if (!p.allFinite()) throw std::invalid_argument("stroke polyline has non-finite coordinates");
    if (!(stroke.depth >= 0.0 && stroke.depth <= 1.0)) throw std::invalid_argument("stroke depth must lie in [0, 1]");
    if (!(stroke.width > 0.0)) throw std::invalid_argument("stroke width must be positive");
}

int stroke_intensity(double depth) { return static_cast<int>(std::lround(255.0 - 254.0 * std::clamp(depth, 0.0, 1.0))); }

double distance_to_polyline(const Vec2& p, const std::vector<Vec2>& polyline)
{
    double best = (p - polyline[0]).squaredNorm();
    for (std::size_t k = 0; k + 1 < polyline.size(); ++k) {
        const Vec2 a = polyline[k], ab = polyline[k + 1] - a;
        const double len2 = ab.squaredNorm();
        const double t = len2 > 0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
        best = std::min(best, (p - a - t * ab).squaredNorm());
    }
    return std::sqrt(best);
}

SketchImage encode_strokes(const std::vector<Stroke>& strokes, int width, int height)
{
    SketchImage img(width, height);
    for (const Stroke& s : strokes) {
        validate_stroke(s);
        const auto c = static_cast<std::uint8_t>(stroke_intensity(s.depth));
        Rgb colour{255, 255, 255};
        if (s.kind == StrokeKind::ridge) colour = {c, 0, 0};
        else if (s.kind == StrokeKind::valley) colour = {0, c, 0};
        // at least ~one pixel wide so thin strokes stay 8-connected
        const double radius = std::max(0.5 * s.width, 0.75);
        for_each_near(s, radius, width, height, [&](int i, int j, double) { img.at(i, j) = colour; });
    }
    return img;
}

std::optional<DecodedPixel> decode_pixel(const Rgb& p)
{
    if (p.r == 255 && p.g == 255 && p.b == 255) return DecodedPixel{StrokeKind::contour, 0.0};
    if (p.r > 0 && p.g == 0 && p.b == 0) return DecodedPixel{StrokeKind::ridge, (255.0 - p.r) / 254.0};
    if (p.g > 0 && p.r == 0 && p.b == 0) return DecodedPixel{StrokeKind::valley, (255.0 - p.g) / 254.0};
    return std::nullopt;
}

SketchImage render_contours(const TriMesh& mesh, int width, int height, double jump)
{
    SketchImage img(width, height);
    if (mesh.empty()) return img;
    const DepthMap d = render_depth(mesh, OrthoCamera{width, height});
    constexpr int kNeighbour[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (int j = 0; j < height; ++j)
        for (int i = 0; i < width; ++i) {
            if (!d.ok(i, j)) continue;
            bool edge = false;
            for (const auto& o : kNeighbour) {
                const int a = i + o[0], b = j + o[1];
                if (!d.ok(a, b)) edge = true;
                else if (d.z.at(i, j) - d.z.at(a, b) > jump) edge = true;
            }
            if (edge) img.at(i, j) = {255, 255, 255};
        }
    return img;
}

SketchImage compose_sketch(const SketchImage& contours, const std::vector<Stroke>& strokes)
{
    SketchImage out = contours;
    const SketchImage drawn = encode_strokes(strokes, contours.width, contours.height);
    for (std::size_t k = 0; k < out.size(); ++k)
        if (drawn.data[k] != Rgb{}) out.data[k] = drawn.data[k];
    return out;
}

double stroke_profile(double distance, double sigma)
{
    if (!(distance < 3.0 * sigma)) return 0.0;
    const double floor = std::exp(-4.5);
    return (std::exp(-distance * distance / (2.0 * sigma * sigma)) - floor) / (1.0 - floor);
}

Image<double> stroke_displacement_field(const std::vector<Stroke>& strokes, int width, int height, double amplitude)
{
    if (!(amplitude > 0)) throw std::invalid_argument("displacement amplitude must be positive");
    Image<double> delta(width, height, 0.0);
    for (const Stroke& s : strokes) {
        validate_stroke(s);
        if (s.kind == StrokeKind::contour) continue;
        const double sign = s.kind == StrokeKind::ridge ? 1.0 : -1.0;
        const double scale = sign * amplitude * (1.0 - stroke_intensity(s.depth) / 255.0);
        const double sigma = s.width;
        for_each_near(s, 3.0 * sigma, width, height,
                      [&](int i, int j, double d) { delta.at(i, j) += scale * stroke_profile(d, sigma); });
    }
    return delta;
}

Mask stroke_support(const std::vector<Stroke>& strokes, int width, int height)
{
    Mask m(width, height, 0);
    for (const Stroke& s : strokes) {
        if (s.kind == StrokeKind::contour) continue;
        for_each_near(s, 3.0 * s.width, width, height, [&](int i, int j, double d) {
            if (d < 3.0 * s.width) m.at(i, j) = 1;
        });
    }
    return m;
}

Stroke mirror_stroke(const Stroke& stroke, int canvas_width)
{
    Stroke out = stroke;
    for (Vec2& p : out.polyline) p.x() = canvas_width - p.x();
    return out;
}

}  // namespace fsk
