#include "facesketch/marching_cubes.hpp"

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace fsk {

namespace {

#include "mc_tables.inc"

// Corner offsets (i, j, k) in the table's corner numbering.
constexpr int kCorner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                               {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
constexpr int kEdgeCorners[12][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6},
                                     {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};

// Slice-by-slice extraction. `fill_slice(k, out)` writes the n*n lattice
// values of slice k (x fastest).
template <typename FillSlice>
TriMesh extract(int resolution, const Vec3& origin, double spacing, FillSlice&& fill_slice)
{
    const int n = resolution + 1;
    const std::size_t nn = static_cast<std::size_t>(n) * n;
    std::vector<double> slice[2] = {std::vector<double>(nn), std::vector<double>(nn)};
    // vertex ids on x- and y-directed edges of slices k and k+1, z-edges of the slab
    std::vector<int> xe[2] = {std::vector<int>(nn, -1), std::vector<int>(nn, -1)};
    std::vector<int> ye[2] = {std::vector<int>(nn, -1), std::vector<int>(nn, -1)};
    std::vector<int> ze(nn, -1);

    TriMesh mesh;
    fill_slice(0, slice[0]);

    auto vertex_on = [&](int i, int j, int k, int axis, double va, double vb) {
        const double t = va / (va - vb);
        Vec3 p(i, j, k);
        p[axis] += t;
        mesh.vertices.push_back(origin + spacing * p);
        return static_cast<int>(mesh.vertices.size()) - 1;
    };

    for (int k = 0; k < resolution; ++k) {
        const std::vector<double>& lo = slice[k & 1];
        std::vector<double>& hi = slice[(k + 1) & 1];
        fill_slice(k + 1, hi);
        std::vector<int>& xlo = xe[k & 1];
        std::vector<int>& ylo = ye[k & 1];
        std::vector<int>& xhi = xe[(k + 1) & 1];
        std::vector<int>& yhi = ye[(k + 1) & 1];
        std::fill(xhi.begin(), xhi.end(), -1);
        std::fill(yhi.begin(), yhi.end(), -1);
        std::fill(ze.begin(), ze.end(), -1);

        for (int j = 0; j < resolution; ++j) {
            for (int i = 0; i < resolution; ++i) {
                double v[8];
                int cube = 0;
                for (int c = 0; c < 8; ++c) {
                    const std::size_t idx = static_cast<std::size_t>(j + kCorner[c][1]) * n + (i + kCorner[c][0]);
                    v[c] = kCorner[c][2] ? hi[idx] : lo[idx];
                    if (!(v[c] > 0.0)) cube |= 1 << c;  // outside (or on the surface)
                }
                const int edges = kEdgeTable[cube];
                if (edges == 0) continue;
                int vid[12];
                for (int e = 0; e < 12; ++e) {
                    if (!(edges & (1 << e))) continue;
                    const int ca = kEdgeCorners[e][0];
                    const int cb = kEdgeCorners[e][1];
                    // canonical lattice edge: start at the lower corner
                    int a = ca, b = cb;
                    int axis = 0;
                    for (int d = 0; d < 3; ++d) {
                        if (kCorner[ca][d] != kCorner[cb][d]) axis = d;
                    }
                    if (kCorner[ca][axis] > kCorner[cb][axis]) std::swap(a, b);
                    const int li = i + kCorner[a][0];
                    const int lj = j + kCorner[a][1];
                    const int lk = kCorner[a][2];
                    const std::size_t cell = static_cast<std::size_t>(lj) * n + li;
                    int* slot = nullptr;
                    if (axis == 2) slot = &ze[cell];
                    else if (axis == 0) slot = lk ? &xhi[cell] : &xlo[cell];
                    else slot = lk ? &yhi[cell] : &ylo[cell];
                    if (*slot < 0) *slot = vertex_on(li, lj, k + lk, axis, v[a], v[b]);
                    vid[e] = *slot;
                }
                for (int t = 0; kTriTable[cube][t] != -1; t += 3) {
                    mesh.triangles.push_back(
                        {vid[kTriTable[cube][t]], vid[kTriTable[cube][t + 1]], vid[kTriTable[cube][t + 2]]});
                }
            }
        }
    }
    return mesh;
}

}  // namespace

TriMesh marching_cubes(const ScalarField& field, int resolution, const Box& bounds)
{
    if (resolution < 1) throw std::invalid_argument("marching_cubes: resolution must be positive");
    const double spacing = bounds.extent().maxCoeff() / resolution;
    const Vec3 origin = bounds.min;
    const int n = resolution + 1;
    return extract(resolution, origin, spacing, [&](int k, std::vector<double>& out) {
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                out[static_cast<std::size_t>(j) * n + i] = field.sample(origin + spacing * Vec3(i, j, k));
    });
}

TriMesh marching_cubes(const GridField& grid)
{
    const int n = grid.points_per_axis();
    return extract(grid.resolution(), grid.origin(), grid.spacing(), [&](int k, std::vector<double>& out) {
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(j) * n + i] = grid.at(i, j, k);
    });
}

}  // namespace fsk
