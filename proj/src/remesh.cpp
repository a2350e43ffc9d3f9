#include "facesketch/remesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_set>

#include "facesketch/bvh.hpp"

namespace fsk {

namespace {

std::uint64_t edge_key(int a, int b)
{
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

struct Edge {
    int a, b;    // a < b
    int f0, f1;  // f1 < 0 when the edge is not shared by exactly two faces
};

int slot_of(const Tri& t, int v)
{
    for (int k = 0; k < 3; ++k)
        if (t[k] == v) return k;
    return -1;
}

class Work {
public:
    std::vector<Vec3> V;
    std::vector<Tri> F;
    std::vector<char> alive;

    explicit Work(const TriMesh& m) : V(m.vertices), F(m.triangles), alive(m.triangles.size(), 1) {}

    std::vector<Edge> edges() const
    {
        std::vector<std::pair<std::uint64_t, int>> half;
        half.reserve(F.size() * 3);
        for (std::size_t f = 0; f < F.size(); ++f) {
            if (!alive[f]) continue;
            for (int k = 0; k < 3; ++k) half.emplace_back(edge_key(F[f][k], F[f][(k + 1) % 3]), static_cast<int>(f));
        }
        std::sort(half.begin(), half.end());
        std::vector<Edge> out;
        out.reserve(half.size() / 2);
        for (std::size_t i = 0; i < half.size();) {
            std::size_t j = i;
            while (j < half.size() && half[j].first == half[i].first) ++j;
            const int a = static_cast<int>(half[i].first >> 32);
            const int b = static_cast<int>(half[i].first & 0xffffffffu);
            out.push_back({a, b, half[i].second, j - i == 2 ? half[i + 1].second : -1});
            i = j;
        }
        return out;
    }

    // vertex -> incident faces at the time of the call (CSR)
    void vertex_faces(std::vector<int>& start, std::vector<int>& list) const
    {
        start.assign(V.size() + 1, 0);
        for (std::size_t f = 0; f < F.size(); ++f)
            if (alive[f])
                for (int v : F[f]) ++start[v + 1];
        for (std::size_t i = 0; i < V.size(); ++i) start[i + 1] += start[i];
        list.resize(start.back());
        std::vector<int> fill(start.begin(), start.end() - 1);
        for (std::size_t f = 0; f < F.size(); ++f)
            if (alive[f])
                for (int v : F[f]) list[fill[v]++] = static_cast<int>(f);
    }

    double len2(int a, int b) const { return (V[a] - V[b]).squaredNorm(); }

    Vec3 normal(const Tri& t) const { return (V[t[1]] - V[t[0]]).cross(V[t[2]] - V[t[0]]); }

    // orient (a, b) so that face f holds the directed edge a->b; returns the apex
    int orient(int f, int& a, int& b) const
    {
        const Tri& t = F[f];
        int k = slot_of(t, a);
        if (t[(k + 1) % 3] != b) {
            std::swap(a, b);
            k = slot_of(t, a);
        }
        return t[(k + 2) % 3];
    }

    int apex(int f, int a, int b) const
    {
        for (int v : F[f])
            if (v != a && v != b) return v;
        return -1;
    }

    TriMesh to_mesh() const
    {
        TriMesh m;
        m.vertices = V;
        for (std::size_t f = 0; f < F.size(); ++f)
            if (alive[f]) m.triangles.push_back(F[f]);
        return compact(m);
    }
};

int split_long_edges(Work& w, double high)
{
    int total = 0;
    for (int pass = 0; pass < 64; ++pass) {
        std::vector<std::pair<double, Edge>> cand;
        for (const Edge& e : w.edges()) {
            const double l2 = w.len2(e.a, e.b);
            if (e.f1 >= 0 && l2 > high * high) cand.emplace_back(l2, e);
        }
        if (cand.empty()) break;
        std::stable_sort(cand.begin(), cand.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
        std::vector<char> touched(w.F.size(), 0);
        for (const auto& [l2, e] : cand) {
            if (touched[e.f0] || touched[e.f1]) continue;
            int a = e.a, b = e.b;
            const int c = w.orient(e.f0, a, b);
            const int d = w.apex(e.f1, a, b);
            const int m = static_cast<int>(w.V.size());
            w.V.push_back(0.5 * (w.V[a] + w.V[b]));
            w.F[e.f0] = {a, m, c};
            w.F[e.f1] = {b, m, d};
            w.F.push_back({m, b, c});
            w.F.push_back({m, a, d});
            w.alive.push_back(1);
            w.alive.push_back(1);
            touched[e.f0] = touched[e.f1] = 1;
            ++total;
        }
    }
    return total;
}

void ring_of(const Work& w, const std::vector<int>& start, const std::vector<int>& list, int v, std::vector<int>& out)
{
    out.clear();
    for (int i = start[v]; i < start[v + 1]; ++i) {
        const int f = list[i];
        if (!w.alive[f] || slot_of(w.F[f], v) < 0) continue;
        for (int u : w.F[f])
            if (u != v) out.push_back(u);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
}

int collapse_short_edges(Work& w, double low, double high)
{
    int total = 0;
    std::vector<int> start, list, ra, rb, rc, common;
    for (int pass = 0; pass < 64; ++pass) {
        std::vector<std::pair<double, Edge>> cand;
        for (const Edge& e : w.edges()) {
            const double l2 = w.len2(e.a, e.b);
            if (e.f1 >= 0 && l2 < low * low) cand.emplace_back(l2, e);
        }
        if (cand.empty()) break;
        std::stable_sort(cand.begin(), cand.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
        w.vertex_faces(start, list);
        std::vector<char> touched(w.F.size(), 0);
        int done = 0;
        auto blocked = [&](int v) {
            for (int i = start[v]; i < start[v + 1]; ++i)
                if (touched[list[i]]) return true;
            return false;
        };
        auto can_collapse = [&](int src, int dst, const std::vector<int>& rsrc) {
            for (int n : rsrc)
                if (n != dst && w.len2(dst, n) > high * high) return false;
            for (int i = start[src]; i < start[src + 1]; ++i) {
                const int f = list[i];
                if (!w.alive[f] || slot_of(w.F[f], dst) >= 0) continue;
                Tri t = w.F[f];
                const Vec3 before = w.normal(t);
                t[slot_of(t, src)] = dst;
                const Vec3 after = w.normal(t);
                if (after.squaredNorm() < 1e-30 || after.dot(before) <= 0.0) return false;
            }
            return true;
        };
        for (const auto& [l2, e] : cand) {
            if (blocked(e.a) || blocked(e.b)) continue;
            ring_of(w, start, list, e.a, ra);
            ring_of(w, start, list, e.b, rb);
            common.clear();
            std::set_intersection(ra.begin(), ra.end(), rb.begin(), rb.end(), std::back_inserter(common));
            if (common.size() != 2) continue;  // link condition
            if (ra.size() + rb.size() - 4 < 3) continue;
            bool thin = false;
            for (int c : common) {
                ring_of(w, start, list, c, rc);
                if (rc.size() <= 3) thin = true;
            }
            if (thin) continue;
            int src = e.a, dst = e.b;
            if (!can_collapse(src, dst, ra)) {
                std::swap(src, dst);
                if (!can_collapse(src, dst, rb)) continue;
            }
            for (int v : {e.a, e.b})
                for (int i = start[v]; i < start[v + 1]; ++i) touched[list[i]] = 1;
            for (int i = start[src]; i < start[src + 1]; ++i) {
                const int f = list[i];
                if (!w.alive[f]) continue;
                if (slot_of(w.F[f], dst) >= 0) w.alive[f] = 0;
                else w.F[f][slot_of(w.F[f], src)] = dst;
            }
            ++done;
        }
        total += done;
        if (done == 0) break;
    }
    return total;
}

int flip_for_valence(Work& w, double high)
{
    int total = 0;
    for (int pass = 0; pass < 16; ++pass) {
        const std::vector<Edge> edges = w.edges();
        std::vector<int> valence(w.V.size(), 0);
        std::unordered_set<std::uint64_t> present;
        present.reserve(edges.size() * 2);
        for (const Edge& e : edges) {
            ++valence[e.a];
            ++valence[e.b];
            present.insert(edge_key(e.a, e.b));
        }
        std::vector<char> touched(w.F.size(), 0);
        int done = 0;
        for (const Edge& e : edges) {
            if (e.f1 < 0 || touched[e.f0] || touched[e.f1]) continue;
            int a = e.a, b = e.b;
            const int c = w.orient(e.f0, a, b);
            const int d = w.apex(e.f1, a, b);
            if (c == d || valence[a] <= 3 || valence[b] <= 3) continue;
            if (present.count(edge_key(c, d))) continue;
            const auto dev = [](int v) { return std::abs(v - 6); };
            const int before = dev(valence[a]) + dev(valence[b]) + dev(valence[c]) + dev(valence[d]);
            const int after = dev(valence[a] - 1) + dev(valence[b] - 1) + dev(valence[c] + 1) + dev(valence[d] + 1);
            if (after >= before) continue;
            if (w.len2(c, d) > high * high) continue;
            const Tri t0 = {d, b, c};
            const Tri t1 = {c, a, d};
            const Vec3 old = w.normal(w.F[e.f0]) + w.normal(w.F[e.f1]);
            const Vec3 n0 = w.normal(t0), n1 = w.normal(t1);
            if (n0.squaredNorm() < 1e-30 || n1.squaredNorm() < 1e-30) continue;
            if (n0.dot(old) <= 0.0 || n1.dot(old) <= 0.0 || n0.dot(n1) <= 0.0) continue;
            w.F[e.f0] = t0;
            w.F[e.f1] = t1;
            touched[e.f0] = touched[e.f1] = 1;
            --valence[a];
            --valence[b];
            ++valence[c];
            ++valence[d];
            present.erase(edge_key(a, b));
            present.insert(edge_key(c, d));
            ++done;
        }
        total += done;
        if (done == 0) break;
    }
    return total;
}

void relax_and_project(Work& w, const TriangleBVH& reference)
{
    // area-weighted centroid of the incident faces, moved within the tangent plane
    std::vector<Vec3> normal(w.V.size(), Vec3::Zero());
    std::vector<Vec3> centre(w.V.size(), Vec3::Zero());
    std::vector<double> area(w.V.size(), 0.0);
    for (std::size_t f = 0; f < w.F.size(); ++f) {
        if (!w.alive[f]) continue;
        const Tri& t = w.F[f];
        const Vec3 n = w.normal(t);
        const double a = n.norm();
        const Vec3 c = (w.V[t[0]] + w.V[t[1]] + w.V[t[2]]) / 3.0;
        for (int v : t) {
            normal[v] += n;
            centre[v] += a * c;
            area[v] += a;
        }
    }
    std::vector<Vec3> next = w.V;
    for (std::size_t v = 0; v < w.V.size(); ++v) {
        if (!(area[v] > 0)) continue;
        const Vec3 q = centre[v] / area[v];
        const Vec3 n = normal[v].normalized();
        next[v] = reference.closest(q + n * n.dot(w.V[v] - q)).point;
    }
    w.V = std::move(next);
}

}  // namespace

double default_remesh_target(const TriMesh& mesh) { return 0.02 * bounding_box(mesh).diagonal(); }

TriMesh remesh(const TriMesh& mesh, double target_edge_length, int iterations)
{
    if (!(target_edge_length > 0)) throw std::invalid_argument("remesh: target edge length must be positive");
    if (mesh.empty()) return mesh;
    const double low = 0.8 * target_edge_length;
    const double high = 4.0 / 3.0 * target_edge_length;
    const TriangleBVH reference(mesh);
    Work w(mesh);
    for (int it = 0; it < iterations; ++it) {
        split_long_edges(w, high);
        collapse_short_edges(w, low, high);
        flip_for_valence(w, high);
        relax_and_project(w, reference);
    }
    // relaxation can stretch a few edges past the bound; split those once more
    const std::size_t before = w.V.size();
    split_long_edges(w, high);
    for (std::size_t v = before; v < w.V.size(); ++v) w.V[v] = reference.closest(w.V[v]).point;
    return w.to_mesh();
}

}  // namespace fsk
