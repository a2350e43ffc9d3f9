#include "facesketch/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace fsk {

Vec3 face_normal(const TriMesh& mesh, std::size_t t)
{
    const Tri& f = mesh.triangles[t];
    const Vec3& a = mesh.vertices[f[0]];
    return (mesh.vertices[f[1]] - a).cross(mesh.vertices[f[2]] - a);
}

double triangle_area(const TriMesh& mesh, std::size_t t) { return 0.5 * face_normal(mesh, t).norm(); }

double surface_area(const TriMesh& mesh)
{
    double area = 0.0;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) area += triangle_area(mesh, t);
    return area;
}

double signed_volume(const TriMesh& mesh)
{
    double vol = 0.0;
    for (const Tri& f : mesh.triangles) {
        vol += mesh.vertices[f[0]].dot(mesh.vertices[f[1]].cross(mesh.vertices[f[2]]));
    }
    return vol / 6.0;
}

Box bounding_box(const TriMesh& mesh)
{
    Box box{Vec3::Constant(std::numeric_limits<double>::infinity()),
            Vec3::Constant(-std::numeric_limits<double>::infinity())};
    for (const Vec3& v : mesh.vertices) {
        box.min = box.min.cwiseMin(v);
        box.max = box.max.cwiseMax(v);
    }
    return box;
}

Vec3 centroid(const TriMesh& mesh)
{
    Vec3 c = Vec3::Zero();
    if (mesh.vertices.empty()) return c;
    for (const Vec3& v : mesh.vertices) c += v;
    return c / static_cast<double>(mesh.vertices.size());
}

std::vector<Vec3> vertex_normals(const TriMesh& mesh)
{
    std::vector<Vec3> normals(mesh.vertices.size(), Vec3::Zero());
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const Vec3 n = face_normal(mesh, t);  // area weighting is implicit in the length
        for (int v : mesh.triangles[t]) normals[v] += n;
    }
    for (Vec3& n : normals) {
        const double len = n.norm();
        n = len > 0.0 ? Vec3(n / len) : Vec3(0.0, 0.0, 1.0);
    }
    return normals;
}

void compute_vertex_normals(TriMesh& mesh) { mesh.normals = vertex_normals(mesh); }

namespace {

std::uint64_t edge_key(int a, int b)
{
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
}

}  // namespace

EdgeAudit audit_edges(const TriMesh& mesh)
{
    // directed count per undirected edge: forward uses (a<b) and backward uses
    struct Uses {
        int forward = 0;
        int backward = 0;
    };
    std::unordered_map<std::uint64_t, Uses> edges;
    edges.reserve(mesh.triangles.size() * 2);
    for (const Tri& f : mesh.triangles) {
        for (int k = 0; k < 3; ++k) {
            const int a = f[k];
            const int b = f[(k + 1) % 3];
            Uses& u = edges[edge_key(std::min(a, b), std::max(a, b))];
            (a < b ? u.forward : u.backward)++;
        }
    }
    EdgeAudit audit;
    audit.edges = edges.size();
    for (const auto& [key, u] : edges) {
        const int total = u.forward + u.backward;
        if (total == 1) ++audit.boundary;
        else if (total > 2) ++audit.nonmanifold;
        else if (u.forward != 1) ++audit.inconsistent;
    }
    return audit;
}

std::size_t boundary_edge_count(const TriMesh& mesh) { return audit_edges(mesh).boundary; }

bool is_watertight(const TriMesh& mesh)
{
    if (mesh.empty()) return false;
    const EdgeAudit a = audit_edges(mesh);
    return a.boundary == 0 && a.nonmanifold == 0 && a.inconsistent == 0;
}

std::vector<int> component_labels(const TriMesh& mesh, int* count)
{
    const int n = static_cast<int>(mesh.vertices.size());
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    std::vector<char> used(n, 0);
    for (const Tri& f : mesh.triangles) {
        for (int k = 0; k < 3; ++k) used[f[k]] = 1;
        for (int k = 1; k < 3; ++k) {
            const int ra = find(f[0]);
            const int rb = find(f[k]);
            if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
        }
    }
    std::vector<int> label(n, -1);
    std::vector<int> root_label(n, -1);
    int next = 0;
    for (int v = 0; v < n; ++v) {
        if (!used[v]) continue;
        const int r = find(v);
        if (root_label[r] < 0) root_label[r] = next++;
        label[v] = root_label[r];
    }
    if (count) *count = next;
    return label;
}

int connected_components(const TriMesh& mesh)
{
    int count = 0;
    component_labels(mesh, &count);
    return count;
}

void validate_indices(const TriMesh& mesh)
{
    const auto n = static_cast<long long>(mesh.vertices.size());
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const Tri& f = mesh.triangles[t];
        for (int v : f) {
            if (v < 0 || v >= n) {
                throw std::invalid_argument("triangle " + std::to_string(t) + " has out-of-range index " +
                                            std::to_string(v));
            }
        }
        if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) {
            throw std::invalid_argument("triangle " + std::to_string(t) + " repeats a vertex");
        }
    }
}

std::vector<std::vector<int>> vertex_adjacency(const TriMesh& mesh)
{
    std::vector<std::vector<int>> adj(mesh.vertices.size());
    for (const Tri& f : mesh.triangles) {
        for (int k = 0; k < 3; ++k) {
            adj[f[k]].push_back(f[(k + 1) % 3]);
            adj[f[k]].push_back(f[(k + 2) % 3]);
        }
    }
    for (auto& nb : adj) {
        std::sort(nb.begin(), nb.end());
        nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    }
    return adj;
}

std::vector<int> ring_neighborhood(const std::vector<std::vector<int>>& adjacency,
                                   const std::vector<int>& seeds, int rings)
{
    std::vector<int> dist(adjacency.size(), -1);
    std::vector<int> frontier;
    for (int s : seeds) {
        if (dist[s] < 0) {
            dist[s] = 0;
            frontier.push_back(s);
        }
    }
    std::vector<int> result = frontier;
    for (int r = 1; r <= rings && !frontier.empty(); ++r) {
        std::vector<int> next;
        for (int v : frontier) {
            for (int w : adjacency[v]) {
                if (dist[w] < 0) {
                    dist[w] = r;
                    next.push_back(w);
                    result.push_back(w);
                }
            }
        }
        frontier.swap(next);
    }
    std::sort(result.begin(), result.end());
    return result;
}

TriMesh compact(const TriMesh& mesh)
{
    std::vector<int> remap(mesh.vertices.size(), -1);
    TriMesh out;
    out.triangles.reserve(mesh.triangles.size());
    for (const Tri& f : mesh.triangles) {
        Tri g;
        for (int k = 0; k < 3; ++k) {
            int& r = remap[f[k]];
            if (r < 0) {
                r = static_cast<int>(out.vertices.size());
                out.vertices.push_back(mesh.vertices[f[k]]);
            }
            g[k] = r;
        }
        out.triangles.push_back(g);
    }
    return out;
}

TriMesh collapse_degenerate_edges(const TriMesh& mesh, double min_length)
{
    const int n = static_cast<int>(mesh.vertices.size());
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    bool any = false;
    for (const Tri& f : mesh.triangles) {
        for (int k = 0; k < 3; ++k) {
            const int a = f[k];
            const int b = f[(k + 1) % 3];
            if ((mesh.vertices[a] - mesh.vertices[b]).norm() < min_length) {
                const int ra = find(a);
                const int rb = find(b);
                if (ra != rb) {
                    parent[std::max(ra, rb)] = std::min(ra, rb);
                    any = true;
                }
            }
        }
    }
    if (!any) {
        TriMesh copy = mesh;
        copy.normals.clear();
        return copy;
    }
    TriMesh merged;
    merged.vertices = mesh.vertices;
    for (const Tri& f : mesh.triangles) {
        const Tri g{find(f[0]), find(f[1]), find(f[2])};
        if (g[0] == g[1] || g[1] == g[2] || g[0] == g[2]) continue;
        merged.triangles.push_back(g);
    }
    return compact(merged);
}

void transform_vertices(TriMesh& mesh, double scale, const Vec3& pivot, const Vec3& translation)
{
    for (Vec3& v : mesh.vertices) v = pivot + scale * (v - pivot) + translation;
}

TriMesh mirror_x(const TriMesh& mesh)
{
    TriMesh out;
    out.vertices.reserve(mesh.vertices.size());
    for (const Vec3& v : mesh.vertices) out.vertices.emplace_back(-v.x(), v.y(), v.z());
    out.triangles.reserve(mesh.triangles.size());
    // reflection reverses orientation; swap two indices to keep normals outward
    for (const Tri& f : mesh.triangles) out.triangles.push_back({f[0], f[2], f[1]});
    return out;
}

TriMesh concatenate(const TriMesh& a, const TriMesh& b)
{
    TriMesh out = a;
    out.normals.clear();
    const int offset = static_cast<int>(a.vertices.size());
    out.vertices.insert(out.vertices.end(), b.vertices.begin(), b.vertices.end());
    for (const Tri& f : b.triangles) out.triangles.push_back({f[0] + offset, f[1] + offset, f[2] + offset});
    return out;
}

void write_obj(std::ostream& out, const TriMesh& mesh)
{
    char buf[96];
    for (const Vec3& v : mesh.vertices) {
        std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", v.x(), v.y(), v.z());
        out << buf;
    }
    for (const Tri& f : mesh.triangles) {
        std::snprintf(buf, sizeof buf, "f %d %d %d\n", f[0] + 1, f[1] + 1, f[2] + 1);
        out << buf;
    }
}

std::string to_obj_string(const TriMesh& mesh)
{
    std::ostringstream ss;
    write_obj(ss, mesh);
    return ss.str();
}

TriMesh read_obj(std::istream& in)
{
    TriMesh mesh;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.size() < 2) continue;
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "v") {
            Vec3 v;
            if (!(ls >> v.x() >> v.y() >> v.z())) {
                throw std::runtime_error("obj line " + std::to_string(line_no) + ": malformed vertex");
            }
            mesh.vertices.push_back(v);
        } else if (tag == "f") {
            std::vector<int> idx;
            std::string tok;
            while (ls >> tok) {
                // accept v, v/vt, v//vn and v/vt/vn
                const int i = std::stoi(tok.substr(0, tok.find('/')));
                idx.push_back(i > 0 ? i - 1 : static_cast<int>(mesh.vertices.size()) + i);
            }
            if (idx.size() < 3) throw std::runtime_error("obj line " + std::to_string(line_no) + ": short face");
            for (std::size_t k = 1; k + 1 < idx.size(); ++k) mesh.triangles.push_back({idx[0], idx[k], idx[k + 1]});
        }
    }
    validate_indices(mesh);
    return mesh;
}

TriMesh parse_obj_string(const std::string& text)
{
    std::istringstream ss(text);
    return read_obj(ss);
}

void export_obj(const TriMesh& mesh, const std::string& path)
{
    if (mesh.empty()) throw std::invalid_argument("refusing to export an empty mesh");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    write_obj(out, mesh);
    if (!out) throw std::runtime_error("write failed: " + path);
}

TriMesh import_obj(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_obj(in);
}

void write_obj_points(std::ostream& out, const std::vector<Vec3>& points)
{
    char buf[96];
    for (const Vec3& p : points) {
        std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", p.x(), p.y(), p.z());
        out << buf;
    }
}

TriMesh make_icosahedron(double radius)
{
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    TriMesh m;
    m.vertices = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                  {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
    for (Vec3& v : m.vertices) v = v.normalized() * radius;
    m.triangles = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                   {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                   {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
    return m;
}

TriMesh make_icosphere(int subdivisions, double radius, const Vec3& center)
{
    TriMesh m = make_icosahedron(1.0);
    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<int, int>, int> mid;
        auto midpoint = [&](int a, int b) {
            const auto key = std::minmax(a, b);
            auto it = mid.find(key);
            if (it != mid.end()) return it->second;
            const int id = static_cast<int>(m.vertices.size());
            m.vertices.push_back((m.vertices[a] + m.vertices[b]).normalized());
            mid.emplace(key, id);
            return id;
        };
        std::vector<Tri> next;
        next.reserve(m.triangles.size() * 4);
        for (const Tri& f : m.triangles) {
            const int ab = midpoint(f[0], f[1]);
            const int bc = midpoint(f[1], f[2]);
            const int ca = midpoint(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        m.triangles.swap(next);
    }
    for (Vec3& v : m.vertices) v = center + radius * v;
    return m;
}

TriMesh make_tetrahedron()
{
    TriMesh m;
    m.vertices = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
    m.triangles = {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}};
    return m;
}

TriMesh make_cube(double half)
{
    TriMesh m;
    for (int i = 0; i < 8; ++i) {
        m.vertices.emplace_back((i & 1) ? half : -half, (i & 2) ? half : -half, (i & 4) ? half : -half);
    }
    m.triangles = {{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6}, {0, 1, 4}, {1, 5, 4},
                   {2, 6, 3}, {3, 6, 7}, {0, 4, 2}, {2, 4, 6}, {1, 3, 5}, {3, 7, 5}};
    return m;
}

}  // namespace fsk
