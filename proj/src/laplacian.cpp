#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <stdexcept>

#include "facesketch/remesh.hpp"

namespace fsk {

TriMesh laplacian_deform(const TriMesh& mesh, const std::map<int, Vec3>& handles, const std::vector<int>& roi)
{
    const int n = static_cast<int>(mesh.vertices.size());
    std::vector<char> in_roi(n, 0);
    for (int v : roi) {
        if (v < 0 || v >= n) throw std::invalid_argument("laplacian_deform: roi vertex out of range");
        in_roi[v] = 1;
    }
    for (const auto& [v, target] : handles) {
        if (v < 0 || v >= n || !in_roi[v]) throw std::invalid_argument("laplacian_deform: handle outside roi");
    }

    TriMesh out = mesh;
    out.normals.clear();
    for (const auto& [v, target] : handles) out.vertices[v] = target;

    // free = roi minus handles; column index per free vertex
    std::vector<int> column(n, -1);
    std::vector<int> free;
    for (int v = 0; v < n; ++v) {
        if (in_roi[v] && !handles.count(v)) {
            column[v] = static_cast<int>(free.size());
            free.push_back(v);
        }
    }
    if (free.empty()) return out;

    const auto adj = vertex_adjacency(mesh);

    // every free component must touch a constrained vertex
    std::vector<char> anchored(free.size(), 0);
    std::vector<int> stack;
    for (std::size_t i = 0; i < free.size(); ++i) {
        for (int u : adj[free[i]]) {
            if (column[u] < 0 && !anchored[i]) {
                anchored[i] = 1;
                stack.push_back(static_cast<int>(i));
            }
        }
    }
    while (!stack.empty()) {
        const int i = stack.back();
        stack.pop_back();
        for (int u : adj[free[i]]) {
            if (column[u] >= 0 && !anchored[column[u]]) {
                anchored[column[u]] = 1;
                stack.push_back(column[u]);
            }
        }
    }
    for (char a : anchored)
        if (!a) throw std::runtime_error("laplacian_deform: singular system, roi component without anchors");

    const int m = static_cast<int>(free.size());
    std::vector<Eigen::Triplet<double>> entries;
    Eigen::MatrixXd rhs(m, 3);
    for (int i = 0; i < m; ++i) {
        const int v = free[i];
        const auto& ring = adj[v];
        Vec3 delta = static_cast<double>(ring.size()) * mesh.vertices[v];
        for (int u : ring) delta -= mesh.vertices[u];
        entries.emplace_back(i, i, static_cast<double>(ring.size()));
        for (int u : ring) {
            if (column[u] >= 0) entries.emplace_back(i, column[u], -1.0);
            else delta += out.vertices[u];
        }
        rhs.row(i) = delta.transpose();
    }
    Eigen::SparseMatrix<double> A(m, m);
    A.setFromTriplets(entries.begin(), entries.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
    if (solver.info() != Eigen::Success) throw std::runtime_error("laplacian_deform: factorization failed");
    const Eigen::MatrixXd x = solver.solve(rhs);
    if (solver.info() != Eigen::Success) throw std::runtime_error("laplacian_deform: solve failed");
    for (int i = 0; i < m; ++i) out.vertices[free[i]] = x.row(i).transpose();
    return out;
}

}  // namespace fsk
