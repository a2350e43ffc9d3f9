#pragma once

#include <map>
#include <utility>
#include <vector>

#include "facesketch/mesh.hpp"

namespace fsk {

/// Default target edge length: 2% of the bounding-box diagonal.
double default_remesh_target(const TriMesh& mesh);

/// Isotropic remeshing: per iteration split edges longer than 4/3 L, collapse
/// edges shorter than 4/5 L, flip toward valence 6, relax tangentially and
/// project back onto the input surface. Closed input stays closed.
TriMesh remesh(const TriMesh& mesh, double target_edge_length, int iterations = 4);

struct Subdivision {
    TriMesh mesh;
    /// For every output vertex the pair of input vertices it was created
    /// from; (v, v) for vertices carried over unchanged.
    std::vector<std::pair<int, int>> parents;
};

/// 1-to-4 split of the region triangles at edge midpoints. Neighbours that
/// share split edges are split conformally (no T-junctions); everything else
/// is copied through. Input vertex ids are preserved.
Subdivision subdivide_region(const TriMesh& mesh, const std::vector<int>& region);

/// Uniform-weight Laplacian editing with hard handle constraints. Vertices
/// outside `roi` are fixed; handles must lie in `roi`. The free vertices solve
/// L x = delta with delta the original differential coordinates.
/// Throws std::invalid_argument for handles outside the roi and
/// std::runtime_error when part of the roi has no constrained neighbour.
TriMesh laplacian_deform(const TriMesh& mesh, const std::map<int, Vec3>& handles, const std::vector<int>& roi);

}  // namespace fsk
