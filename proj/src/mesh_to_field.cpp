#include "facesketch/mesh_to_field.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fsk {

namespace {

struct Vertex2 {
    double x, y;
    int id;
};

// Edge function evaluated with a fixed vertex order so that a shared edge
// yields bit-identical magnitudes from both incident triangles.
double edge_function(const Vertex2& p, const Vertex2& q, double x, double y)
{
    if (p.id < q.id) return (q.x - p.x) * (y - p.y) - (q.y - p.y) * (x - p.x);
    return -((p.x - q.x) * (y - q.y) - (p.y - q.y) * (x - q.x));
}

// Top-left rule for counter-clockwise triangles in a y-up frame.
bool owns_edge(const Vertex2& p, const Vertex2& q)
{
    const double dx = q.x - p.x;
    const double dy = q.y - p.y;
    return dy < 0.0 || (dy == 0.0 && dx < 0.0);
}

}  // namespace

MeshDistanceField::MeshDistanceField(const TriMesh& mesh, int resolution, const Box& bounds, double band)
    : resolution_(resolution), points_(resolution + 1), origin_(bounds.min), band_(band)
{
    if (resolution < 1) throw std::invalid_argument("mesh_to_field: resolution must be positive");
    if (!(band > 0.0)) throw std::invalid_argument("mesh_to_field: band must be positive");
    const std::size_t open = boundary_edge_count(mesh);
    if (open > 0) {
        throw std::invalid_argument("mesh_to_field: mesh is open (" + std::to_string(open) + " boundary edges)");
    }
    validate_indices(mesh);
    spacing_ = bounds.extent().maxCoeff() / resolution;
    bricks_ = (points_ + kBrick - 1) / kBrick;
    bvh_ = TriangleBVH(mesh);
    build_columns(mesh);
    const std::size_t n = static_cast<std::size_t>(points_);
    values_.assign(n * n * n, 0.0);
    const std::size_t nb = static_cast<std::size_t>(bricks_) * bricks_ * bricks_;
    brick_once_ = std::make_unique<std::once_flag[]>(nb);
    brick_done_ = std::make_unique<std::atomic<bool>[]>(nb);
    for (std::size_t b = 0; b < nb; ++b) brick_done_[b].store(false, std::memory_order_relaxed);
}

void MeshDistanceField::build_columns(const TriMesh& mesh)
{
    const std::size_t n = static_cast<std::size_t>(points_);
    std::vector<std::vector<std::pair<double, int>>> cols(n * n);
    for (const Tri& f : mesh.triangles) {
        Vertex2 v[3];
        double z[3];
        for (int k = 0; k < 3; ++k) {
            const Vec3& p = mesh.vertices[f[k]];
            v[k] = {p.x(), p.y(), f[k]};
            z[k] = p.z();
        }
        const double area2 = edge_function(v[0], v[1], v[2].x, v[2].y);
        if (area2 == 0.0) continue;  // edge-on: never crossed transversally
        const int sign = area2 > 0.0 ? 1 : -1;
        if (sign < 0) {
            std::swap(v[1], v[2]);
            std::swap(z[1], z[2]);
        }
        const double xmin = std::min({v[0].x, v[1].x, v[2].x});
        const double xmax = std::max({v[0].x, v[1].x, v[2].x});
        const double ymin = std::min({v[0].y, v[1].y, v[2].y});
        const double ymax = std::max({v[0].y, v[1].y, v[2].y});
        const int i0 = std::max(0, static_cast<int>(std::ceil((xmin - origin_.x()) / spacing_)));
        const int i1 = std::min(points_ - 1, static_cast<int>(std::floor((xmax - origin_.x()) / spacing_)));
        const int j0 = std::max(0, static_cast<int>(std::ceil((ymin - origin_.y()) / spacing_)));
        const int j1 = std::min(points_ - 1, static_cast<int>(std::floor((ymax - origin_.y()) / spacing_)));
        const double total = std::abs(area2);
        for (int j = j0; j <= j1; ++j) {
            const double y = origin_.y() + spacing_ * j;
            for (int i = i0; i <= i1; ++i) {
                const double x = origin_.x() + spacing_ * i;
                double w[3];
                bool inside = true;
                for (int e = 0; e < 3 && inside; ++e) {
                    const Vertex2& p = v[(e + 1) % 3];
                    const Vertex2& q = v[(e + 2) % 3];
                    w[e] = edge_function(p, q, x, y);
                    inside = w[e] > 0.0 || (w[e] == 0.0 && owns_edge(p, q));
                }
                if (!inside) continue;
                const double zc = (w[0] * z[0] + w[1] * z[1] + w[2] * z[2]) / total;
                cols[static_cast<std::size_t>(j) * n + i].emplace_back(zc, sign);
            }
        }
    }
    crossing_z_.resize(n * n);
    winding_above_.resize(n * n);
    for (std::size_t c = 0; c < cols.size(); ++c) {
        auto& list = cols[c];
        std::sort(list.begin(), list.end());
        auto& zs = crossing_z_[c];
        auto& above = winding_above_[c];
        zs.resize(list.size());
        above.resize(list.size() + 1);
        above[list.size()] = 0;
        for (std::size_t m = list.size(); m-- > 0;) {
            zs[m] = list[m].first;
            above[m] = above[m + 1] + list[m].second;
        }
    }
}

int MeshDistanceField::lattice_winding(int i, int j, int k) const
{
    const std::size_t c = static_cast<std::size_t>(j) * points_ + i;
    const double z = origin_.z() + spacing_ * k;
    const auto& zs = crossing_z_[c];
    const auto m = std::upper_bound(zs.begin(), zs.end(), z) - zs.begin();
    return winding_above_[c][m];
}

void MeshDistanceField::compute_brick(int bi, int bj, int bk) const
{
    const int i0 = bi * kBrick, i1 = std::min(points_, i0 + kBrick);
    const int j0 = bj * kBrick, j1 = std::min(points_, j0 + kBrick);
    const int k0 = bk * kBrick, k1 = std::min(points_, k0 + kBrick);
    const std::size_t n = static_cast<std::size_t>(points_);
    for (int j = j0; j < j1; ++j) {
        for (int i = i0; i < i1; ++i) {
            const std::size_t c = static_cast<std::size_t>(j) * n + i;
            const auto& zs = crossing_z_[c];
            const auto& above = winding_above_[c];
            std::size_t m = std::upper_bound(zs.begin(), zs.end(), origin_.z() + spacing_ * k0) - zs.begin();
            double prev = -1.0;
            for (int k = k0; k < k1; ++k) {
                const Vec3 p = origin_ + spacing_ * Vec3(i, j, k);
                while (m < zs.size() && zs[m] <= p.z()) ++m;
                const bool inside = above[m] > 0;  // integer winding > 0.5
                const double cap = band_ * band_;
                double bound = cap;
                if (prev >= 0.0) {
                    const double b = (prev + spacing_) * (1.0 + 1e-12) + 1e-15;
                    bound = std::min(bound, b * b);
                }
                ClosestHit hit = bvh_.closest(p, bound);
                if (hit.triangle < 0 && bound < cap) hit = bvh_.closest(p, cap);
                const double d = hit.triangle < 0 ? band_ : std::min(std::sqrt(hit.squared_distance), band_);
                prev = d;
                values_[(static_cast<std::size_t>(k) * n + j) * n + i] = inside ? d : -d;
            }
        }
    }
}

void MeshDistanceField::ensure_brick(int bi, int bj, int bk) const
{
    const std::size_t b = (static_cast<std::size_t>(bk) * bricks_ + bj) * bricks_ + bi;
    if (brick_done_[b].load(std::memory_order_acquire)) return;
    std::call_once(brick_once_[b], [&] {
        compute_brick(bi, bj, bk);
        brick_done_[b].store(true, std::memory_order_release);
    });
}

double MeshDistanceField::lattice_value(int i, int j, int k) const
{
    ensure_brick(i / kBrick, j / kBrick, k / kBrick);
    return values_[(static_cast<std::size_t>(k) * points_ + j) * points_ + i];
}

double MeshDistanceField::sample(const Vec3& p) const
{
    const Vec3 u = (p - origin_) / spacing_;
    int idx[3];
    double frac[3];
    for (int a = 0; a < 3; ++a) {
        const double c = std::clamp(u[a], 0.0, static_cast<double>(resolution_));
        int i = static_cast<int>(std::floor(c));
        if (i >= resolution_) i = resolution_ - 1;
        idx[a] = i;
        frac[a] = c - i;
    }
    const auto [i, j, k] = idx;
    const double fx = frac[0], fy = frac[1], fz = frac[2];
    auto at = [&](int a, int b, int c) { return lattice_value(a, b, c); };
    const double c00 = at(i, j, k) * (1 - fx) + at(i + 1, j, k) * fx;
    const double c10 = at(i, j + 1, k) * (1 - fx) + at(i + 1, j + 1, k) * fx;
    const double c01 = at(i, j, k + 1) * (1 - fx) + at(i + 1, j, k + 1) * fx;
    const double c11 = at(i, j + 1, k + 1) * (1 - fx) + at(i + 1, j + 1, k + 1) * fx;
    const double c0 = c00 * (1 - fy) + c10 * fy;
    const double c1 = c01 * (1 - fy) + c11 * fy;
    return c0 * (1 - fz) + c1 * fz;
}

double MeshDistanceField::evaluated_fraction() const
{
    const std::size_t nb = static_cast<std::size_t>(bricks_) * bricks_ * bricks_;
    std::size_t done = 0;
    for (std::size_t b = 0; b < nb; ++b) done += brick_done_[b].load(std::memory_order_relaxed) ? 1 : 0;
    return static_cast<double>(done) / static_cast<double>(nb);
}

GridField MeshDistanceField::materialize() const
{
    for (int bk = 0; bk < bricks_; ++bk)
        for (int bj = 0; bj < bricks_; ++bj)
            for (int bi = 0; bi < bricks_; ++bi) ensure_brick(bi, bj, bk);
    GridField grid(resolution_, Box{origin_, origin_ + Vec3::Constant(spacing_ * resolution_)});
    grid.values() = values_;
    return grid;
}

GridField mesh_to_field(const TriMesh& mesh, int resolution, const Box& bounds, double band)
{
    return MeshDistanceField(mesh, resolution, bounds, band).materialize();
}

SurfaceDistanceField::SurfaceDistanceField(const TriMesh& mesh, int resolution, double exact_band, const Box& bounds,
                                           double band)
    : lattice_(mesh, resolution, bounds, band), bvh_(mesh), exact_band_(exact_band)
{
    if (!(exact_band > 0.0)) throw std::invalid_argument("SurfaceDistanceField: exact_band must be positive");
    face_normals_.reserve(mesh.triangles.size());
    for (const Tri& t : mesh.triangles) {
        const Vec3 n = (mesh.vertices[t[1]] - mesh.vertices[t[0]]).cross(mesh.vertices[t[2]] - mesh.vertices[t[0]]);
        const double len = n.norm();
        face_normals_.push_back(len > 0 ? Vec3(n / len) : Vec3::Zero());
    }
}

double SurfaceDistanceField::sample(const Vec3& p) const
{
    const double coarse = lattice_.sample(p);
    const double a = std::abs(coarse);
    if (a >= 2.0 * exact_band_) return coarse;
    // the lattice is off by its interpolation error only, so its sign is
    // trusted away from the zero set; closer in the nearest face decides
    const double reach = 2.0 * exact_band_ + lattice_.spacing();
    const ClosestHit hit = bvh_.closest(p, reach * reach);
    if (hit.triangle < 0) return coarse;
    const double d = std::sqrt(hit.squared_distance);
    double sign;
    if (a >= 0.1 * lattice_.spacing())
        sign = coarse > 0 ? 1.0 : -1.0;
    else
        sign = (p - hit.point).dot(face_normals_[hit.triangle]) > 0 ? -1.0 : 1.0;
    const double exact = sign * d;
    if (a <= exact_band_) return exact;
    const double t = (a - exact_band_) / exact_band_;
    return (1.0 - t) * exact + t * coarse;
}

}  // namespace fsk
