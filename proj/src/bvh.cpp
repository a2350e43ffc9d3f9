#include "facesketch/bvh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fsk {

// Ericson, Real-Time Collision Detection, 5.1.5.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c)
{
    const Vec3 ab = b - a;
    const Vec3 ac = c - a;
    const Vec3 ap = p - a;
    const double d1 = ab.dot(ap);
    const double d2 = ac.dot(ap);
    if (d1 <= 0.0 && d2 <= 0.0) return a;

    const Vec3 bp = p - b;
    const double d3 = ab.dot(bp);
    const double d4 = ac.dot(bp);
    if (d3 >= 0.0 && d4 <= d3) return b;

    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
        const double v = d1 / (d1 - d3);
        return a + v * ab;
    }

    const Vec3 cp = p - c;
    const double d5 = ab.dot(cp);
    const double d6 = ac.dot(cp);
    if (d6 >= 0.0 && d5 <= d6) return c;

    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
        const double w = d2 / (d2 - d6);
        return a + w * ac;
    }

    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
        const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + w * (c - b);
    }

    const double denom = 1.0 / (va + vb + vc);
    const double v = vb * denom;
    const double w = vc * denom;
    return a + ab * v + ac * w;
}

TriangleBVH::TriangleBVH(const TriMesh& mesh)
{
    const int n = static_cast<int>(mesh.triangles.size());
    if (n == 0) return;
    a_.resize(n);
    b_.resize(n);
    c_.resize(n);
    for (int t = 0; t < n; ++t) {
        a_[t] = mesh.vertices[mesh.triangles[t][0]];
        b_[t] = mesh.vertices[mesh.triangles[t][1]];
        c_[t] = mesh.vertices[mesh.triangles[t][2]];
    }
    order_.resize(n);
    for (int t = 0; t < n; ++t) order_[t] = t;
    nodes_.reserve(2 * n / 4 + 8);
    build(0, n, 0);
}

int TriangleBVH::build(int first, int count, int depth)
{
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 hi = -lo;
    Vec3 clo = lo, chi = hi;
    for (int i = first; i < first + count; ++i) {
        const int t = order_[i];
        lo = lo.cwiseMin(a_[t]).cwiseMin(b_[t]).cwiseMin(c_[t]);
        hi = hi.cwiseMax(a_[t]).cwiseMax(b_[t]).cwiseMax(c_[t]);
        const Vec3 cen = (a_[t] + b_[t] + c_[t]) / 3.0;
        clo = clo.cwiseMin(cen);
        chi = chi.cwiseMax(cen);
    }
    nodes_[id].lo = lo;
    nodes_[id].hi = hi;
    constexpr int kLeafSize = 4;
    if (count <= kLeafSize || depth > 48) {
        nodes_[id].first = first;
        nodes_[id].count = count;
        return id;
    }
    int axis = 0;
    (chi - clo).maxCoeff(&axis);
    const int mid = first + count / 2;
    std::nth_element(order_.begin() + first, order_.begin() + mid, order_.begin() + first + count,
                     [&](int s, int t) {
                         const double cs = a_[s][axis] + b_[s][axis] + c_[s][axis];
                         const double ct = a_[t][axis] + b_[t][axis] + c_[t][axis];
                         return cs < ct || (cs == ct && s < t);
                     });
    const int left = build(first, mid - first, depth + 1);
    const int right = build(mid, first + count - mid, depth + 1);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

namespace {

double box_distance_sq(const Vec3& p, const Vec3& lo, const Vec3& hi)
{
    const Vec3 d = (lo - p).cwiseMax(p - hi).cwiseMax(0.0);
    return d.squaredNorm();
}

}  // namespace

ClosestHit TriangleBVH::closest(const Vec3& p, double bound_sq) const
{
    ClosestHit hit;
    hit.squared_distance = bound_sq;
    if (nodes_.empty()) return hit;
    int stack[128];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const Node& node = nodes_[stack[--top]];
        if (box_distance_sq(p, node.lo, node.hi) >= hit.squared_distance) continue;
        if (node.left < 0) {
            for (int i = node.first; i < node.first + node.count; ++i) {
                const int t = order_[i];
                const Vec3 q = closest_point_on_triangle(p, a_[t], b_[t], c_[t]);
                const double d2 = (q - p).squaredNorm();
                if (d2 < hit.squared_distance || (d2 == hit.squared_distance && hit.triangle >= 0 && t < hit.triangle)) {
                    hit.squared_distance = d2;
                    hit.point = q;
                    hit.triangle = t;
                }
            }
            continue;
        }
        const Node& l = nodes_[node.left];
        const Node& r = nodes_[node.right];
        const double dl = box_distance_sq(p, l.lo, l.hi);
        const double dr = box_distance_sq(p, r.lo, r.hi);
        // push the farther child first so the nearer one is popped next
        if (dl <= dr) {
            if (dr < hit.squared_distance) stack[top++] = node.right;
            if (dl < hit.squared_distance) stack[top++] = node.left;
        } else {
            if (dl < hit.squared_distance) stack[top++] = node.left;
            if (dr < hit.squared_distance) stack[top++] = node.right;
        }
    }
    return hit;
}

double winding_number(const TriMesh& mesh, const Vec3& p)
{
    // Van Oosterom & Strackee solid angle per triangle.
    double total = 0.0;
    for (const Tri& f : mesh.triangles) {
        const Vec3 a = mesh.vertices[f[0]] - p;
        const Vec3 b = mesh.vertices[f[1]] - p;
        const Vec3 c = mesh.vertices[f[2]] - p;
        const double la = a.norm(), lb = b.norm(), lc = c.norm();
        const double det = a.dot(b.cross(c));
        const double div = la * lb * lc + a.dot(b) * lc + b.dot(c) * la + c.dot(a) * lb;
        total += 2.0 * std::atan2(det, div);
    }
    return total / (4.0 * std::numbers::pi);
}

}  // namespace fsk
