#pragma once

#include <limits>
#include <vector>

#include "facesketch/mesh.hpp"

namespace fsk {

/// Closest point on triangle (a,b,c) to p.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

struct ClosestHit {
    double squared_distance = std::numeric_limits<double>::infinity();
    Vec3 point = Vec3::Zero();
    int triangle = -1;
};

/// Axis-aligned bounding-volume hierarchy over the triangles of a mesh.
/// Holds a copy of the geometry, so it stays valid after the mesh changes.
class TriangleBVH {
public:
    TriangleBVH() = default;
    explicit TriangleBVH(const TriMesh& mesh);

    /// Exact closest surface point. `bound_sq` is an optional upper bound on
    /// the squared distance used to prune the search; if no triangle is closer
    /// than the bound the result has triangle == -1.
    ClosestHit closest(const Vec3& p, double bound_sq = std::numeric_limits<double>::infinity()) const;

    bool empty() const { return nodes_.empty(); }

private:
    struct Node {
        Vec3 lo, hi;
        int left = -1;   // child index, or -1 for a leaf
        int right = -1;
        int first = 0;   // leaf range into order_
        int count = 0;
    };

    int build(int first, int count, int depth);

    std::vector<Vec3> a_, b_, c_;
    std::vector<int> order_;
    std::vector<Node> nodes_;
};

/// Generalized winding number by solid angles (O(triangles) per query).
double winding_number(const TriMesh& mesh, const Vec3& p);

}  // namespace fsk
