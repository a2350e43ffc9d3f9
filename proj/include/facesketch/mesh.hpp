#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace fsk {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Tri = std::array<int, 3>;

struct Box {
    Vec3 min = Vec3::Constant(-1.0);
    Vec3 max = Vec3::Constant(1.0);

    Vec3 extent() const { return max - min; }
    double diagonal() const { return extent().norm(); }
};

/// The normalized model-space cube [-1,1]^3 that every head lives in.
inline Box model_box() { return Box{}; }

/// Indexed triangle surface. Winding is counter-clockwise seen from outside.
struct TriMesh {
    std::vector<Vec3> vertices;
    std::vector<Tri> triangles;
    /// Optional per-vertex unit normals; empty when not computed.
    std::vector<Vec3> normals;

    std::size_t num_vertices() const { return vertices.size(); }
    std::size_t num_triangles() const { return triangles.size(); }
    bool empty() const { return triangles.empty(); }
    bool has_normals() const { return normals.size() == vertices.size() && !vertices.empty(); }
};

/// Unnormalized face normal (length = 2 * area).
Vec3 face_normal(const TriMesh& mesh, std::size_t t);
double triangle_area(const TriMesh& mesh, std::size_t t);
double surface_area(const TriMesh& mesh);
/// Signed enclosed volume; positive for outward-oriented closed meshes.
double signed_volume(const TriMesh& mesh);
Box bounding_box(const TriMesh& mesh);
Vec3 centroid(const TriMesh& mesh);

/// Area-weighted unit vertex normals.
std::vector<Vec3> vertex_normals(const TriMesh& mesh);
void compute_vertex_normals(TriMesh& mesh);

struct EdgeAudit {
    std::size_t edges = 0;
    std::size_t boundary = 0;      // used by exactly one triangle
    std::size_t nonmanifold = 0;   // used by three or more
    std::size_t inconsistent = 0;  // two uses with the same direction
};
EdgeAudit audit_edges(const TriMesh& mesh);
std::size_t boundary_edge_count(const TriMesh& mesh);
/// Closed, orientable, edge-manifold.
bool is_watertight(const TriMesh& mesh);
int connected_components(const TriMesh& mesh);
/// Per-vertex component label (vertex connectivity through triangles).
std::vector<int> component_labels(const TriMesh& mesh, int* count = nullptr);

/// Throws std::invalid_argument on out-of-range or repeated indices.
void validate_indices(const TriMesh& mesh);

/// Sorted, unique one-ring neighbours for every vertex.
std::vector<std::vector<int>> vertex_adjacency(const TriMesh& mesh);
/// Vertices within `rings` edge hops of any seed, seeds included.
std::vector<int> ring_neighborhood(const std::vector<std::vector<int>>& adjacency,
                                   const std::vector<int>& seeds, int rings);

/// Drops unreferenced vertices and remaps triangles. Normals are dropped.
TriMesh compact(const TriMesh& mesh);
/// Collapses edges shorter than `min_length`; drops the triangles that
/// degenerate. Applied before every linear solve and after extraction.
TriMesh collapse_degenerate_edges(const TriMesh& mesh, double min_length = 1e-6);

void transform_vertices(TriMesh& mesh, double scale, const Vec3& pivot, const Vec3& translation);
TriMesh mirror_x(const TriMesh& mesh);
TriMesh concatenate(const TriMesh& a, const TriMesh& b);

// OBJ: ASCII, v/f records, 1-based indices.
void write_obj(std::ostream& out, const TriMesh& mesh);
std::string to_obj_string(const TriMesh& mesh);
TriMesh read_obj(std::istream& in);
TriMesh parse_obj_string(const std::string& text);
/// Throws std::invalid_argument for an empty mesh, std::runtime_error on I/O.
void export_obj(const TriMesh& mesh, const std::string& path);
TriMesh import_obj(const std::string& path);
/// Point records only (`v x y z`), used for debug dumps of point clouds.
void write_obj_points(std::ostream& out, const std::vector<Vec3>& points);

// Primitive builders used by tests, the bench and the verifier.
TriMesh make_icosahedron(double radius = 1.0);
TriMesh make_icosphere(int subdivisions, double radius = 1.0, const Vec3& center = Vec3::Zero());
TriMesh make_tetrahedron();
TriMesh make_cube(double half = 0.5);

}  // namespace fsk
