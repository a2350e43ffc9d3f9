#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>

#include "facesketch/remesh.hpp"

namespace fsk {

Subdivision subdivide_region(const TriMesh& mesh, const std::vector<int>& region)
{
    const int nt = static_cast<int>(mesh.triangles.size());
    for (int f : region)
        if (f < 0 || f >= nt) throw std::invalid_argument("subdivide_region: triangle id out of range");

    Subdivision out;
    out.mesh.vertices = mesh.vertices;
    out.parents.reserve(mesh.vertices.size());
    for (int v = 0; v < static_cast<int>(mesh.vertices.size()); ++v) out.parents.emplace_back(v, v);

    const auto key = [](int a, int b) {
        if (a > b) std::swap(a, b);
        return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
    };
    std::unordered_map<std::uint64_t, int> midpoint;
    for (int f : region) {
        const Tri& t = mesh.triangles[f];
        for (int k = 0; k < 3; ++k) {
            const int a = t[k], b = t[(k + 1) % 3];
            if (midpoint.emplace(key(a, b), static_cast<int>(out.mesh.vertices.size())).second) {
                out.mesh.vertices.push_back(0.5 * (mesh.vertices[a] + mesh.vertices[b]));
                out.parents.emplace_back(std::min(a, b), std::max(a, b));
            }
        }
    }

    auto& tris = out.mesh.triangles;
    tris.reserve(mesh.triangles.size() + 3 * midpoint.size());
    const auto& P = out.mesh.vertices;
    for (const Tri& t : mesh.triangles) {
        int m[3];
        int splits = 0;
        for (int k = 0; k < 3; ++k) {
            const auto it = midpoint.find(key(t[k], t[(k + 1) % 3]));
            m[k] = it == midpoint.end() ? -1 : it->second;
            splits += m[k] >= 0;
        }
        if (splits == 0) {
            tris.push_back(t);
        } else if (splits == 3) {
            tris.push_back({t[0], m[0], m[2]});
            tris.push_back({t[1], m[1], m[0]});
            tris.push_back({t[2], m[2], m[1]});
            tris.push_back({m[0], m[1], m[2]});
        } else if (splits == 1) {
            const int k = m[0] >= 0 ? 0 : (m[1] >= 0 ? 1 : 2);
            const int a = t[k], b = t[(k + 1) % 3], c = t[(k + 2) % 3];
            tris.push_back({a, m[k], c});
            tris.push_back({m[k], b, c});
        } else {
            // edge (a, b) stays whole; m1 on (b, c), m2 on (c, a)
            const int k = m[0] < 0 ? 0 : (m[1] < 0 ? 1 : 2);
            const int a = t[k], b = t[(k + 1) % 3], c = t[(k + 2) % 3];
            const int m1 = m[(k + 1) % 3], m2 = m[(k + 2) % 3];
            tris.push_back({m1, c, m2});
            if ((P[a] - P[m1]).squaredNorm() <= (P[b] - P[m2]).squaredNorm()) {
                tris.push_back({a, b, m1});
                tris.push_back({a, m1, m2});
            } else {
                tris.push_back({a, b, m2});
                tris.push_back({b, m1, m2});
            }
        }
    }
    return out;
}

}  // namespace fsk
