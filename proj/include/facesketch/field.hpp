#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "facesketch/mesh.hpp"

namespace fsk {

/// Signed-distance sampler. Positive inside, negative outside, zero on the
/// surface. Implementations must be safe to sample from several threads.
class ScalarField {
public:
    virtual ~ScalarField() = default;
    virtual double sample(const Vec3& p) const = 0;
    /// Central differences with step 1e-3 unless overridden analytically.
    virtual Vec3 gradient(const Vec3& p) const;
};

class SphereField final : public ScalarField {
public:
    SphereField(const Vec3& center, double radius) : center_(center), radius_(radius) {}
    double sample(const Vec3& p) const override { return radius_ - (p - center_).norm(); }
    Vec3 gradient(const Vec3& p) const override;

private:
    Vec3 center_;
    double radius_;
};

/// First-order ellipsoid distance estimate (exact on the surface and along
/// the axes, a close bound elsewhere).
class EllipsoidField final : public ScalarField {
public:
    EllipsoidField(const Vec3& center, const Vec3& radii) : center_(center), radii_(radii) {}
    double sample(const Vec3& p) const override;

private:
    Vec3 center_;
    Vec3 radii_;
};

class CapsuleField final : public ScalarField {
public:
    CapsuleField(const Vec3& a, const Vec3& b, double radius) : a_(a), b_(b), radius_(radius) {}
    double sample(const Vec3& p) const override;

private:
    Vec3 a_, b_;
    double radius_;
};

class ConstantField final : public ScalarField {
public:
    explicit ConstantField(double value) : value_(value) {}
    double sample(const Vec3&) const override { return value_; }
    Vec3 gradient(const Vec3&) const override { return Vec3::Zero(); }

private:
    double value_;
};

class LambdaField final : public ScalarField {
public:
    explicit LambdaField(std::function<double(const Vec3&)> fn) : fn_(std::move(fn)) {}
    double sample(const Vec3& p) const override { return fn_(p); }

private:
    std::function<double(const Vec3&)> fn_;
};

/// Regular lattice of (R+1)^3 samples spanning `bounds` with R cells per
/// axis; sampled with trilinear interpolation (clamped at the bounds).
class GridField final : public ScalarField {
public:
    GridField() = default;
    GridField(int resolution, const Box& bounds);

    int resolution() const { return resolution_; }
    int points_per_axis() const { return resolution_ + 1; }
    const Vec3& origin() const { return origin_; }
    double spacing() const { return spacing_; }
    Box bounds() const;

    std::size_t index(int i, int j, int k) const
    {
        const std::size_t n = static_cast<std::size_t>(resolution_) + 1;
        return (static_cast<std::size_t>(k) * n + static_cast<std::size_t>(j)) * n + static_cast<std::size_t>(i);
    }
    Vec3 lattice_point(int i, int j, int k) const { return origin_ + spacing_ * Vec3(i, j, k); }
    double at(int i, int j, int k) const { return values_[index(i, j, k)]; }
    double& at(int i, int j, int k) { return values_[index(i, j, k)]; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    bool same_lattice(const GridField& other) const;

    double sample(const Vec3& p) const override;

private:
    int resolution_ = 0;
    Vec3 origin_ = Vec3::Zero();
    double spacing_ = 0.0;
    std::vector<double> values_;
};

/// Samples `field` at every lattice point.
GridField sample_to_grid(const ScalarField& field, int resolution, const Box& bounds);

/// Per-lattice max (positive-inside union). Throws std::invalid_argument when
/// the lattices differ.
GridField field_union(const GridField& a, const GridField& b);

}  // namespace fsk
