#pragma once

#include <atomic>
#include <limits>
#include <memory>
#include <mutex>
#include <vector>

#include "facesketch/bvh.hpp"
#include "facesketch/field.hpp"

namespace fsk {

/// Signed distance of a closed mesh on a regular lattice, evaluated lazily in
/// 8^3 bricks. Lattice values are sign * exact distance, where the sign is the
/// winding number thresholded at 0.5. For a closed oriented mesh the winding
/// number equals the signed count of surface crossings along +z, which is how
/// it is evaluated here: one crossing list per lattice column, shared by every
/// point of that column.
///
/// Between lattice points the field is trilinear, so it samples identically to
/// the GridField returned by materialize().
class MeshDistanceField final : public ScalarField {
public:
    /// Throws std::invalid_argument if the mesh has boundary edges. With a
    /// finite `band`, magnitudes are clamped to it (truncated distance); the
    /// sign is unaffected.
    MeshDistanceField(const TriMesh& mesh, int resolution, const Box& bounds = model_box(),
                      double band = std::numeric_limits<double>::infinity());

    int resolution() const { return resolution_; }
    double spacing() const { return spacing_; }
    const Vec3& origin() const { return origin_; }

    double lattice_value(int i, int j, int k) const;
    double sample(const Vec3& p) const override;
    /// Fraction of bricks evaluated so far.
    double evaluated_fraction() const;
    GridField materialize() const;

    /// Winding number at a lattice point (integer for closed meshes).
    int lattice_winding(int i, int j, int k) const;

private:
    static constexpr int kBrick = 8;

    void ensure_brick(int bi, int bj, int bk) const;
    void compute_brick(int bi, int bj, int bk) const;
    void build_columns(const TriMesh& mesh);

    int resolution_;
    int points_;
    int bricks_;
    Vec3 origin_;
    double spacing_;
    double band_;
    TriangleBVH bvh_;
    // Per column (i, j): crossing heights ascending and the signed crossing
    // count strictly above each entry.
    std::vector<std::vector<double>> crossing_z_;
    std::vector<std::vector<int>> winding_above_;
    mutable std::vector<double> values_;
    mutable std::unique_ptr<std::once_flag[]> brick_once_;
    mutable std::unique_ptr<std::atomic<bool>[]> brick_done_;
};

/// MeshDistanceField refined to the exact signed distance near the surface:
/// exact within `exact_band` of the zero set, the lattice beyond twice that,
/// linearly blended in between. Vertices of the mesh sample exactly 0.
class SurfaceDistanceField final : public ScalarField {
public:
    SurfaceDistanceField(const TriMesh& mesh, int resolution, double exact_band, const Box& bounds = model_box(),
                         double band = std::numeric_limits<double>::infinity());

    double sample(const Vec3& p) const override;
    const MeshDistanceField& lattice() const { return lattice_; }
    double exact_band() const { return exact_band_; }

private:
    MeshDistanceField lattice_;
    TriangleBVH bvh_;
    std::vector<Vec3> face_normals_;
    double exact_band_;
};

/// Eager lattice of signed distances; see MeshDistanceField.
GridField mesh_to_field(const TriMesh& mesh, int resolution, const Box& bounds = model_box(),
                        double band = std::numeric_limits<double>::infinity());

}  // namespace fsk
