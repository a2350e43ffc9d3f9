#include "facesketch/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "facesketch/imageops.hpp"
#include "facesketch/remesh.hpp"

namespace fsk {

TriMesh bump_head()
{
    TriMesh m = make_icosphere(4, 0.6);
    for (Vec3& v : m.vertices) v.z() *= 0.8;
    return m;
}

namespace {

double bilinear(const Image<double>& img, double u, double v)
{
    const int i0 = static_cast<int>(std::floor(u)), j0 = static_cast<int>(std::floor(v));
    const double tu = u - i0, tv = v - j0;
    auto at = [&](int i, int j) { return img.contains(i, j) ? img.at(i, j) : 0.0; };
    return (1 - tv) * ((1 - tu) * at(i0, j0) + tu * at(i0 + 1, j0)) +
           tv * ((1 - tu) * at(i0, j0 + 1) + tu * at(i0 + 1, j0 + 1));
}

}  // namespace

TriMesh displaced_target(const TriMesh& coarse, const std::vector<Stroke>& strokes, const RefineConfig& config,
                         int levels, double margin_px)
{
    const OrthoCamera cam{config.raster, config.raster};
    TriMesh m = coarse;
    for (int level = 0; level < levels; ++level) {
        std::vector<int> region;
        for (std::size_t t = 0; t < m.triangles.size(); ++t) {
            const Tri& tri = m.triangles[t];
            const Vec3 c = (m.vertices[tri[0]] + m.vertices[tri[1]] + m.vertices[tri[2]]) / 3.0;
            if (c.z() < 0) continue;
            const Vec2 px(cam.col_of(c.x()) + 0.5, cam.row_of(c.y()) + 0.5);
            for (const Stroke& s : strokes) {
                if (s.kind == StrokeKind::contour) continue;
                if (distance_to_polyline(px, s.polyline) < 3.0 * s.width + margin_px) {
                    region.push_back(static_cast<int>(t));
                    break;
                }
            }
        }
        if (region.empty()) break;
        m = subdivide_region(m, region).mesh;
    }
    const Image<double> delta = stroke_displacement_field(strokes, cam.width, cam.height, config.amplitude);
    const std::vector<char> visible = visible_vertices(m, render_depth(m, cam), cam, 1e-3);
    for (std::size_t v = 0; v < m.vertices.size(); ++v) {
        if (!visible[v]) continue;
        Vec3& p = m.vertices[v];
        p.z() += bilinear(delta, cam.col_of(p.x()), cam.row_of(p.y()));
    }
    return m;
}

std::vector<BumpCase> bump_suite(const RefineConfig& config)
{
    const TriMesh head = bump_head();
    std::vector<BumpCase> cases;
    cases.push_back({"straight_ridge", head, {{StrokeKind::ridge, {{190, 200}, {322, 200}}, 0.8, 4.0}}, {}});
    cases.push_back({"diagonal_valley", head, {{StrokeKind::valley, {{200, 180}, {320, 300}}, 0.8, 4.0}}, {}});
    cases.push_back({"ridge_and_valley",
                     head,
                     {{StrokeKind::ridge, {{180, 300}, {220, 280}, {260, 275}, {300, 280}, {340, 300}}, 0.6, 3.0},
                      {StrokeKind::valley, {{230, 160}, {256, 150}, {282, 160}}, 0.7, 5.0}},
                     {}});
    for (BumpCase& c : cases) c.target = displaced_target(c.coarse, c.strokes, config);
    return cases;
}

const char* to_string(Guidance g)
{
    switch (g) {
    case Guidance::combined: return "combined";
    case Guidance::implicit_only: return "implicit_only";
    case Guidance::depth_only: return "depth_only";
    }
    return "?";
}

RefineConfig with_guidance(RefineConfig config, Guidance g)
{
    if (g == Guidance::implicit_only) config.depth_iterations = 0;
    if (g == Guidance::depth_only) config.implicit_iterations = 0;
    return config;
}

DepthMap shift_depth(const DepthMap& depth, int dx, int dy)
{
    DepthMap out = depth;
    for (int j = 0; j < depth.height(); ++j)
        for (int i = 0; i < depth.width(); ++i) {
            const int si = i - dx, sj = j - dy;
            const bool ok = depth.ok(si, sj);
            out.valid.at(i, j) = ok;
            out.z.at(i, j) = ok ? depth.z.at(si, sj) : 0.0;
        }
    return out;
}

ProviderBundle shifted_providers(const RefineConfig& config, int dx, int dy)
{
    ProviderBundle b = procedural_providers(config);
    auto enhance = b.depth_enhance;
    b.depth_enhance = [enhance, dx, dy](const DepthMap& current, const NormalMap& normals) {
        return shift_depth(enhance(current, normals), dx, dy);
    };
    return b;
}

std::vector<Vec2> circle_contour(double cx, double cy, double radius, int n)
{
    std::vector<Vec2> c;
    for (int k = 0; k <= n; ++k) {
        const double t = 2 * std::numbers::pi * k / n;
        c.emplace_back(cx + radius * std::cos(t), cy + radius * std::sin(t));
    }
    return c;
}

PartSketch demo_sketch()
{
    PartSketch s;
    s.layers["face"] = circle_contour(256, 256, 128);
    s.layers["left_ear"] = circle_contour(130, 250, 30);
    s.layers["right_ear"] = circle_contour(382, 250, 30);
    return s;
}

PartLayout demo_layout()
{
    PartLayout l;
    l.transforms["left_ear"] = PartTransform{Vec3(0.0, 0.04, 0.0), 1.15};
    l.transforms["right_ear"] = PartTransform{Vec3(0.0, 0.04, 0.0), 1.15};
    return l;
}

std::vector<Vec2> demo_profile_target(const TriMesh& coarse, const ProfileOptions& options)
{
    std::vector<Vec2> target = extract_profile(coarse, options.canvas);
    for (Vec2& p : target) {
        const double t = (p.y() - 300.0) / 20.0;
        p.x() -= 25.0 * std::exp(-t * t);
    }
    return target;
}

std::vector<Stroke> demo_strokes()
{
    return {{StrokeKind::ridge, {{200, 205}, {230, 198}, {256, 196}, {282, 198}, {312, 205}}, 0.6, 4.0},
            {StrokeKind::ridge, {{256, 228}, {256, 262}, {256, 286}}, 0.5, 3.0},
            {StrokeKind::valley, {{214, 330}, {236, 338}, {256, 340}, {276, 338}, {298, 330}}, 0.7, 3.0}};
}

Project demo_project()
{
    Project p;
    p.sketch = demo_sketch();
    p.layout = demo_layout();
    const TriMesh merged =
        merge_parts(apply_layout(generate_parts(p.sketch, p.config.coarse), p.layout), p.config.coarse);
    p.profile_edits.push_back({demo_profile_target(merged, p.config.profile), 1.0});
    double t = 2.0;
    for (const Stroke& s : demo_strokes()) p.strokes.push_back({s, t++});
    return p;
}

}  // namespace fsk
