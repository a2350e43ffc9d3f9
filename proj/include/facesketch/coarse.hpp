#pragma once

#include <map>
#include <string>
#include <vector>

#include "facesketch/mesh.hpp"

namespace fsk {

/// Closed contour per layer in coarse-canvas pixels (same convention as
/// strokes). Layer names: "face", "left_ear", "right_ear", "attachment_1" ..
/// "attachment_4".
struct PartSketch {
    std::map<std::string, std::vector<Vec2>> layers;
};

inline constexpr int kMaxAttachments = 4;

bool is_part_name(const std::string& name);

/// Throws std::invalid_argument naming the offending layer when a contour is
/// open (first and last point more than 1 px apart), self-intersecting, has
/// fewer than 3 distinct points, or the face layer is missing.
void validate_part_sketch(const PartSketch& sketch);
void validate_contour(const std::string& layer, const std::vector<Vec2>& contour);

struct CoarseOptions {
    int canvas = 512;
    double beta = 0.8;               // height scale of the inflation
    int part_resolution = 64;        // common lattice for parts and merge
    int heightfield_resolution = 96; // extraction of the inflated solid
    double remesh_fraction = 0.02;   // target edge length / bbox diagonal
    int remesh_iterations = 4;
};

using PartMeshes = std::map<std::string, TriMesh>;

/// Inflated height of the canvas distance transform: beta * sqrt(d/d_max) * d_max
/// (model units).
double inflation_height(double distance, double max_distance, double beta);

/// One closed mesh per layer, placed at its sketched canvas location with
/// z-centroid 0.
PartMeshes generate_parts(const PartSketch& sketch, const CoarseOptions& options = {});

struct PartTransform {
    Vec3 translation = Vec3::Zero();
    double scale = 1.0;  // about the part's bounding-box centre

    bool operator==(const PartTransform&) const = default;
};

struct PartCopy {
    std::string source;
    std::string name;
    bool mirror_x = true;  // reflect about the x = 0 plane
    Vec3 offset = Vec3::Zero();

    bool operator==(const PartCopy&) const = default;
};

/// Face stays at identity. Copies are made after the transforms, so a copy
/// of a moved ear mirrors the moved ear.
struct PartLayout {
    std::map<std::string, PartTransform> transforms;
    std::vector<PartCopy> copies;
};

/// Throws std::invalid_argument for unknown part names, non-positive scale,
/// a transformed face, or a copy whose name already exists.
PartMeshes apply_layout(const PartMeshes& parts, const PartLayout& layout);

/// Duplicates `source` under `name`, mirrored about x = 0 and/or offset.
PartMeshes copy_part(const PartMeshes& parts, const PartCopy& copy);

/// Union on the common lattice, re-extraction and remeshing.
TriMesh merge_parts(const PartMeshes& parts, const CoarseOptions& options = {});

/// Side view seen from +x: canvas x grows toward -z (the face looks left),
/// canvas y grows downward.
struct SideView {
    int canvas = 512;

    Vec2 to_canvas(double y, double z) const;
    /// (y, z) in model units.
    Vec2 to_model(const Vec2& canvas_point) const;
};

/// Front-most silhouette (z >= 0) of the side render, one point per raster
/// row, ordered top to bottom, in side-canvas pixels.
std::vector<Vec2> extract_profile(const TriMesh& mesh, int canvas = 512);

enum class ProfileCorrespondence {
    height,      // normalized vertical extent
    arc_length,  // normalized arc length of both polylines
};

struct ProfileOptions {
    int canvas = 512;
    int rings = 3;
    double handle_tolerance_px = 1.5;
    ProfileCorrespondence correspondence = ProfileCorrespondence::height;
};

struct ProfileEdit {
    TriMesh mesh;
    std::vector<int> handles;
    std::vector<int> roi;
};

/// Moves the silhouette vertices onto `target` (y kept, z from the target)
/// and solves a Laplacian deformation over their 3-ring. Throws
/// std::invalid_argument for a target that is not ordered top to bottom and
/// std::runtime_error when fewer than 4 silhouette vertices are found.
ProfileEdit profile_depth_edit(const TriMesh& mesh, const std::vector<Vec2>& target, const ProfileOptions& options = {});

}  // namespace fsk
