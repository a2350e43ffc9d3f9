#include "facesketch/coarse.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>

#include "facesketch/field.hpp"
#include "facesketch/image.hpp"
#include "facesketch/imageops.hpp"
#include "facesketch/marching_cubes.hpp"
#include "facesketch/mesh_to_field.hpp"
#include "facesketch/remesh.hpp"
#include "facesketch/strokes.hpp"

namespace fsk {

namespace {

// Truncation of the part distance fields. Extraction and the max-union only
// need exact values within a couple of cells of the zero set.
double union_band(const CoarseOptions& o) { return 3.0 * 2.0 / o.part_resolution; }

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2)
{
    const double d1 = cross2(q2 - q1, p1 - q1), d2 = cross2(q2 - q1, p2 - q1);
    const double d3 = cross2(p2 - p1, q1 - p1), d4 = cross2(p2 - p1, q2 - p1);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
    const auto on_segment = [](const Vec2& a, const Vec2& b, const Vec2& p) {
        return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) && std::min(a.y(), b.y()) <= p.y() &&
               p.y() <= std::max(a.y(), b.y());
    };
    return (d1 == 0 && on_segment(q1, q2, p1)) || (d2 == 0 && on_segment(q1, q2, p2)) ||
           (d3 == 0 && on_segment(p1, p2, q1)) || (d4 == 0 && on_segment(p1, p2, q2));
}

// Distinct consecutive points of a closed contour, without the closing duplicate.
std::vector<Vec2> ring_points(const std::vector<Vec2>& contour)
{
    std::vector<Vec2> out;
    for (const Vec2& p : contour)
        if (out.empty() || (p - out.back()).norm() > 1e-9) out.push_back(p);
    while (out.size() > 1 && (out.back() - out.front()).norm() <= 1.0) out.pop_back();
    return out;
}

bool inside_polygon(const std::vector<Vec2>& ring, const Vec2& p)
{
    bool inside = false;
    for (std::size_t a = 0, b = ring.size() - 1; a < ring.size(); b = a++) {
        const Vec2& u = ring[a];
        const Vec2& v = ring[b];
        if ((u.y() > p.y()) != (v.y() > p.y()) && p.x() < (v.x() - u.x()) * (p.y() - u.y()) / (v.y() - u.y()) + u.x())
            inside = !inside;
    }
    return inside;
}

TriMesh inflate(const std::string& name, const std::vector<Vec2>& contour, const CoarseOptions& opt)
{
    const int W = opt.canvas;
    const double px = 2.0 / W;
    std::vector<Vec2> ring = ring_points(contour);
    std::vector<Vec2> closed = ring;
    closed.push_back(ring.front());

    double xmin = ring[0].x(), xmax = xmin, ymin = ring[0].y(), ymax = ymin;
    for (const Vec2& p : ring) {
        xmin = std::min(xmin, p.x());
        xmax = std::max(xmax, p.x());
        ymin = std::min(ymin, p.y());
        ymax = std::max(ymax, p.y());
    }
    const int margin = 6;
    const int i0 = static_cast<int>(std::floor(xmin)) - margin, i1 = static_cast<int>(std::ceil(xmax)) + margin;
    const int j0 = static_cast<int>(std::floor(ymin)) - margin, j1 = static_cast<int>(std::ceil(ymax)) + margin;
    const int gw = i1 - i0 + 1, gh = j1 - j0 + 1;

    // signed canvas distance to the contour (px), positive inside
    Image<double> dist(gw, gh);
    double dmax = 0;
    for (int j = 0; j < gh; ++j)
        for (int i = 0; i < gw; ++i) {
            const Vec2 c(i0 + i + 0.5, j0 + j + 0.5);
            const double d = distance_to_polyline(c, closed);
            const bool in = inside_polygon(ring, c);
            dist.at(i, j) = in ? d : -d;
            if (in) dmax = std::max(dmax, d);
        }
    if (dmax * px < 1.5 * 2.0 / opt.part_resolution)
        throw std::invalid_argument("layer " + name + ": contour too small to inflate");

    Image<double> height(gw, gh);
    for (std::size_t k = 0; k < height.size(); ++k) {
        const double d = dist.data[k];
        height.data[k] = d > 0 ? inflation_height(d * px, dmax * px, opt.beta) : d * px;
    }
    const LambdaField solid([&](const Vec3& p) {
        const double u = std::clamp((p.x() + 1.0) * W / 2.0 - 0.5 - i0, 0.0, gw - 1.0);
        const double v = std::clamp((1.0 - p.y()) * W / 2.0 - 0.5 - j0, 0.0, gh - 1.0);
        const int a = std::min(static_cast<int>(u), gw - 2), b = std::min(static_cast<int>(v), gh - 2);
        const double tu = u - a, tv = v - b;
        const double h = (1 - tv) * ((1 - tu) * height.at(a, b) + tu * height.at(a + 1, b)) +
                         tv * ((1 - tu) * height.at(a, b + 1) + tu * height.at(a + 1, b + 1));
        return h - std::abs(p.z());
    });
    const double hmax = opt.beta * dmax * px;
    const double zpad = hmax + 4.0 * px;
    Box box;
    box.min = Vec3(-1.0 + 2.0 * (i0 + 0.5) / W, 1.0 - 2.0 * (j1 + 0.5) / W, -zpad);
    box.max = Vec3(-1.0 + 2.0 * (i1 + 0.5) / W, 1.0 - 2.0 * (j0 + 0.5) / W, zpad);
    const TriMesh surface = marching_cubes(solid, opt.heightfield_resolution, box);
    TriMesh part = marching_cubes(mesh_to_field(surface, opt.part_resolution, model_box(), union_band(opt)));
    if (part.empty()) throw std::invalid_argument("layer " + name + ": contour too small to inflate");
    return part;
}

}  // namespace

bool is_part_name(const std::string& name)
{
    if (name == "face" || name == "left_ear" || name == "right_ear") return true;
    for (int k = 1; k <= kMaxAttachments; ++k)
        if (name == "attachment_" + std::to_string(k)) return true;
    return false;
}

void validate_contour(const std::string& layer, const std::vector<Vec2>& contour)
{
    for (const Vec2& p : contour)
        if (!p.allFinite()) throw std::invalid_argument("layer " + layer + ": non-finite point");
    if (contour.size() < 4 || (contour.front() - contour.back()).norm() > 1.0)
        throw std::invalid_argument("layer " + layer + ": contour is not closed");
    const std::vector<Vec2> ring = ring_points(contour);
    if (ring.size() < 3) throw std::invalid_argument("layer " + layer + ": contour needs at least 3 distinct points");
    const std::size_t n = ring.size();
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 2; b < n; ++b) {
            if (a == 0 && b == n - 1) continue;  // adjacent through the closing edge
            if (segments_intersect(ring[a], ring[(a + 1) % n], ring[b], ring[(b + 1) % n]))
                throw std::invalid_argument("layer " + layer + ": contour self-intersects");
        }
}

void validate_part_sketch(const PartSketch& sketch)
{
    if (!sketch.layers.count("face")) throw std::invalid_argument("sketch has no face layer");
    for (const auto& [name, contour] : sketch.layers) {
        if (!is_part_name(name)) throw std::invalid_argument("unknown layer: " + name);
        validate_contour(name, contour);
    }
}

double inflation_height(double distance, double max_distance, double beta)
{
    if (!(max_distance > 0) || distance <= 0) return 0.0;
    return beta * std::sqrt(distance / max_distance) * max_distance;
}

PartMeshes generate_parts(const PartSketch& sketch, const CoarseOptions& options)
{
    validate_part_sketch(sketch);
    PartMeshes parts;
    for (const auto& [name, contour] : sketch.layers) parts[name] = inflate(name, contour, options);
    return parts;
}

PartMeshes copy_part(const PartMeshes& parts, const PartCopy& copy)
{
    const auto it = parts.find(copy.source);
    if (it == parts.end()) throw std::invalid_argument("copy: unknown part " + copy.source);
    if (parts.count(copy.name)) throw std::invalid_argument("copy: part already exists: " + copy.name);
    if (copy.name.empty()) throw std::invalid_argument("copy: empty name");
    PartMeshes out = parts;
    TriMesh m = copy.mirror_x ? mirror_x(it->second) : it->second;
    transform_vertices(m, 1.0, Vec3::Zero(), copy.offset);
    out[copy.name] = std::move(m);
    return out;
}

PartMeshes apply_layout(const PartMeshes& parts, const PartLayout& layout)
{
    PartMeshes out = parts;
    for (const auto& [name, t] : layout.transforms) {
        const auto it = out.find(name);
        if (it == out.end()) throw std::invalid_argument("layout: unknown part " + name);
        if (!(t.scale > 0)) throw std::invalid_argument("layout: scale must be positive for " + name);
        if (!t.translation.allFinite()) throw std::invalid_argument("layout: non-finite translation for " + name);
        if (name == "face") {
            if (t == PartTransform{}) continue;
            throw std::invalid_argument("layout: the face part is fixed");
        }
        const Box b = bounding_box(it->second);
        transform_vertices(it->second, t.scale, 0.5 * (b.min + b.max), t.translation);
    }
    for (const PartCopy& c : layout.copies) out = copy_part(out, c);
    return out;
}

TriMesh merge_parts(const PartMeshes& parts, const CoarseOptions& options)
{
    GridField acc;
    bool any = false;
    for (const auto& [name, mesh] : parts) {
        if (mesh.empty()) continue;
        GridField g = mesh_to_field(mesh, options.part_resolution, model_box(), union_band(options));
        acc = any ? field_union(acc, g) : std::move(g);
        any = true;
    }
    if (!any) throw std::invalid_argument("merge_parts: no non-empty parts");
    // keep the extraction closed where a part touches the model box
    const int n = acc.points_per_axis();
    const double cap = -0.5 * acc.spacing();
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                if (i == 0 || j == 0 || k == 0 || i == n - 1 || j == n - 1 || k == n - 1)
                    acc.at(i, j, k) = std::min(acc.at(i, j, k), cap);
    TriMesh raw = marching_cubes(acc);
    TriMesh cleaned = collapse_degenerate_edges(raw);
    if (is_watertight(cleaned)) raw = std::move(cleaned);
    const double target = options.remesh_fraction * bounding_box(raw).diagonal();
    return remesh(raw, target, options.remesh_iterations);
}

Vec2 SideView::to_canvas(double y, double z) const { return Vec2((1.0 - z) * canvas / 2.0, (1.0 - y) * canvas / 2.0); }

Vec2 SideView::to_model(const Vec2& c) const { return Vec2(1.0 - 2.0 * c.y() / canvas, 1.0 - 2.0 * c.x() / canvas); }

namespace {

// (x, y, z) -> (-z, y, x): the side camera's right, up and toward-viewer axes.
TriMesh to_side_frame(const TriMesh& mesh)
{
    TriMesh r = mesh;
    r.normals.clear();
    for (Vec3& v : r.vertices) v = Vec3(-v.z(), v.y(), v.x());
    return r;
}

struct Curve {
    std::vector<double> y, z;  // model units, y descending

    double length_to(std::size_t k) const
    {
        double s = 0;
        for (std::size_t a = 1; a <= k; ++a) s += std::hypot(y[a] - y[a - 1], z[a] - z[a - 1]);
        return s;
    }
};

Curve to_curve(const std::vector<Vec2>& canvas_points, const SideView& view)
{
    Curve c;
    for (const Vec2& p : canvas_points) {
        const Vec2 m = view.to_model(p);
        c.y.push_back(m.x());
        c.z.push_back(m.y());
    }
    return c;
}

// z at height y along the first segment that spans it; nullopt outside.
std::optional<double> z_at_height(const Curve& c, double y)
{
    for (std::size_t k = 0; k + 1 < c.y.size(); ++k) {
        const double a = c.y[k], b = c.y[k + 1];
        if ((a >= y && y >= b) || (b >= y && y >= a)) {
            const double t = a == b ? 0.0 : (y - a) / (b - a);
            return c.z[k] + t * (c.z[k + 1] - c.z[k]);
        }
    }
    return std::nullopt;
}

Vec2 point_at_length(const Curve& c, double s)
{
    double acc = 0;
    for (std::size_t k = 0; k + 1 < c.y.size(); ++k) {
        const double seg = std::hypot(c.y[k + 1] - c.y[k], c.z[k + 1] - c.z[k]);
        if (acc + seg >= s && seg > 0) {
            const double t = (s - acc) / seg;
            return Vec2(c.y[k] + t * (c.y[k + 1] - c.y[k]), c.z[k] + t * (c.z[k + 1] - c.z[k]));
        }
        acc += seg;
    }
    return Vec2(c.y.back(), c.z.back());
}

}  // namespace

std::vector<Vec2> extract_profile(const TriMesh& mesh, int canvas)
{
    const DepthMap d = render_depth(to_side_frame(mesh), OrthoCamera{canvas, canvas});
    const SideView view{canvas};
    std::vector<Vec2> profile;
    for (int j = 0; j < canvas; ++j)
        for (int i = 0; i < canvas; ++i) {
            if (!d.ok(i, j)) continue;
            const Vec2 p(i, j + 0.5);  // left pixel edge: the silhouette itself
            if (view.to_model(p).y() >= 0) profile.push_back(p);
            break;
        }
    return profile;
}

ProfileEdit profile_depth_edit(const TriMesh& mesh, const std::vector<Vec2>& target, const ProfileOptions& options)
{
    if (target.size() < 2) throw std::invalid_argument("profile target needs at least 2 points");
    for (const Vec2& p : target)
        if (!p.allFinite()) throw std::invalid_argument("profile target has non-finite points");
    if (!(target.front().y() < target.back().y())) throw std::invalid_argument("profile target must run top to bottom");

    const SideView view{options.canvas};
    const std::vector<Vec2> current_px = extract_profile(mesh, options.canvas);
    if (current_px.size() < 2) throw std::runtime_error("degenerate silhouette");
    const Curve current = to_curve(current_px, view);
    const Curve goal = to_curve(target, view);
    const double top = current.y.front(), bottom = current.y.back();
    const double goal_top = goal.y.front(), goal_bottom = goal.y.back();
    const double tol = options.handle_tolerance_px * 2.0 / options.canvas;
    const double current_length = current.length_to(current.y.size() - 1);
    const double goal_length = goal.length_to(goal.y.size() - 1);

    ProfileEdit out;
    std::map<int, Vec3> handles;
    for (int v = 0; v < static_cast<int>(mesh.vertices.size()); ++v) {
        const Vec3& p = mesh.vertices[v];
        if (p.z() < 0 || p.y() > top || p.y() < bottom) continue;
        const auto zc = z_at_height(current, p.y());
        if (!zc || std::abs(p.z() - *zc) > tol) continue;
        double goal_z = 0, current_z = *zc;
        if (options.correspondence == ProfileCorrespondence::height) {
            const double s = top > bottom ? (top - p.y()) / (top - bottom) : 0.0;
            const auto zg = z_at_height(goal, goal_top + s * (goal_bottom - goal_top));
            if (!zg) continue;
            goal_z = *zg;
        } else {
            // arc length of the current profile down to this height
            std::size_t k = 0;
            while (k + 1 < current.y.size() && current.y[k + 1] >= p.y()) ++k;
            double s = current.length_to(k);
            if (k + 1 < current.y.size()) {
                const double t = (p.y() - current.y[k]) / (current.y[k + 1] - current.y[k]);
                s += t * std::hypot(current.y[k + 1] - current.y[k], current.z[k + 1] - current.z[k]);
            }
            const double u = current_length > 0 ? s / current_length : 0.0;
            goal_z = point_at_length(goal, u * goal_length).y();
            current_z = point_at_length(current, s).y();
        }
        handles[v] = Vec3(p.x(), p.y(), p.z() + goal_z - current_z);
        out.handles.push_back(v);
    }
    if (handles.size() < 4) throw std::runtime_error("degenerate silhouette: fewer than 4 silhouette vertices");
    const auto adj = vertex_adjacency(mesh);
    out.roi = ring_neighborhood(adj, out.handles, options.rings);
    out.mesh = laplacian_deform(mesh, handles, out.roi);
    return out;
}

}  // namespace fsk
