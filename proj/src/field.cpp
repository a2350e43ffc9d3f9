#include "facesketch/field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fsk {

Vec3 ScalarField::gradient(const Vec3& p) const
{
    constexpr double h = 1e-3;
    Vec3 g;
    for (int a = 0; a < 3; ++a) {
        Vec3 d = Vec3::Zero();
        d[a] = h;
        g[a] = (sample(p + d) - sample(p - d)) / (2.0 * h);
    }
    return g;
}

Vec3 SphereField::gradient(const Vec3& p) const
{
    const Vec3 d = p - center_;
    const double len = d.norm();
    if (len == 0.0) return Vec3::Zero();
    return -d / len;
}

double EllipsoidField::sample(const Vec3& p) const
{
    const Vec3 q = p - center_;
    const double k0 = q.cwiseQuotient(radii_).norm();
    const double k1 = q.cwiseQuotient(radii_.cwiseProduct(radii_)).norm();
    if (k1 == 0.0) return radii_.minCoeff();
    return -k0 * (k0 - 1.0) / k1;
}

double CapsuleField::sample(const Vec3& p) const
{
    const Vec3 ab = b_ - a_;
    const double denom = ab.squaredNorm();
    const double t = denom > 0.0 ? std::clamp((p - a_).dot(ab) / denom, 0.0, 1.0) : 0.0;
    return radius_ - (p - (a_ + t * ab)).norm();
}

GridField::GridField(int resolution, const Box& bounds)
    : resolution_(resolution), origin_(bounds.min)
{
    if (resolution < 1) throw std::invalid_argument("grid resolution must be positive");
    const Vec3 ext = bounds.extent();
    spacing_ = ext.maxCoeff() / resolution;
    const std::size_t n = static_cast<std::size_t>(resolution) + 1;
    values_.assign(n * n * n, 0.0);
}

Box GridField::bounds() const
{
    return Box{origin_, origin_ + Vec3::Constant(spacing_ * resolution_)};
}

bool GridField::same_lattice(const GridField& other) const
{
    return resolution_ == other.resolution_ && origin_ == other.origin_ && spacing_ == other.spacing_;
}

double GridField::sample(const Vec3& p) const
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
    const double c00 = at(i, j, k) * (1 - fx) + at(i + 1, j, k) * fx;
    const double c10 = at(i, j + 1, k) * (1 - fx) + at(i + 1, j + 1, k) * fx;
    const double c01 = at(i, j, k + 1) * (1 - fx) + at(i + 1, j, k + 1) * fx;
    const double c11 = at(i, j + 1, k + 1) * (1 - fx) + at(i + 1, j + 1, k + 1) * fx;
    const double c0 = c00 * (1 - fy) + c10 * fy;
    const double c1 = c01 * (1 - fy) + c11 * fy;
    return c0 * (1 - fz) + c1 * fz;
}

GridField sample_to_grid(const ScalarField& field, int resolution, const Box& bounds)
{
    GridField grid(resolution, bounds);
    const int n = grid.points_per_axis();
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) grid.at(i, j, k) = field.sample(grid.lattice_point(i, j, k));
    return grid;
}

GridField field_union(const GridField& a, const GridField& b)
{
    if (!a.same_lattice(b)) throw std::invalid_argument("field_union: lattice mismatch");
    GridField out = a;
    auto& dst = out.values();
    const auto& src = b.values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = std::max(dst[i], src[i]);
    return out;
}

}  // namespace fsk
