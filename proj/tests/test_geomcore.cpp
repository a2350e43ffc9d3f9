#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "facesketch/bvh.hpp"
#include "facesketch/field.hpp"
#include "facesketch/marching_cubes.hpp"
#include "facesketch/mesh.hpp"
#include "facesketch/mesh_to_field.hpp"
#include "facesketch/remesh.hpp"
#include "oracles.hpp"

using namespace fsk;

namespace {

double max_abs_field(const ScalarField& f, const TriMesh& m)
{
    double worst = 0;
    for (const Vec3& v : m.vertices) worst = std::max(worst, std::abs(f.sample(v)));
    return worst;
}

}  // namespace

TEST(Primitives, BuildersAreClosedAndOutward)
{
    for (const TriMesh& m : {make_tetrahedron(), make_cube(), make_icosahedron(), make_icosphere(2)}) {
        EXPECT_TRUE(is_watertight(m));
        EXPECT_GT(signed_volume(m), 0.0);
        EXPECT_NO_THROW(validate_indices(m));
    }
}

TEST(Primitives, VertexNormalsAreUnit)
{
    const TriMesh m = make_icosphere(3, 0.7);
    for (const Vec3& n : vertex_normals(m)) EXPECT_NEAR(n.norm(), 1.0, 1e-6);
}

TEST(Primitives, ValidateRejectsBadIndices)
{
    TriMesh m = make_tetrahedron();
    m.triangles.push_back({0, 0, 1});
    EXPECT_THROW(validate_indices(m), std::invalid_argument);
    m.triangles.back() = {0, 1, 9};
    EXPECT_THROW(validate_indices(m), std::invalid_argument);
}

TEST(Primitives, ObjRoundTripIsExact)
{
    const TriMesh m = make_icosphere(3, 0.4321, Vec3(0.1, -0.2, 0.3));
    const TriMesh back = parse_obj_string(to_obj_string(m));
    ASSERT_EQ(back.vertices.size(), m.vertices.size());
    ASSERT_EQ(back.triangles, m.triangles);
    for (std::size_t i = 0; i < m.vertices.size(); ++i) EXPECT_LE((back.vertices[i] - m.vertices[i]).norm(), 1e-12);
}

TEST(Fields, DistanceGradientsHaveUnitLength)
{
    const SphereField sphere(Vec3(0.1, 0, 0), 0.5);
    const CapsuleField capsule(Vec3(-0.3, 0, 0), Vec3(0.3, 0.1, 0), 0.25);
    const GridField grid = sample_to_grid(sphere, 64, model_box());
    for (const Vec3& p : oracle::random_points(200, -0.8, 0.8, 7)) {
        if ((p - Vec3(0.1, 0, 0)).norm() < 0.05) continue;
        EXPECT_NEAR(sphere.gradient(p).norm(), 1.0, 0.1);
        EXPECT_NEAR(capsule.gradient(p).norm(), 1.0, 0.1);
        EXPECT_NEAR(grid.gradient(p).norm(), 1.0, 0.1);
    }
}

TEST(Fields, GridSamplesLatticeExactlyAndIsContinuous)
{
    const GridField grid = sample_to_grid(CapsuleField(Vec3(-0.2, 0, 0), Vec3(0.2, 0, 0), 0.3), 16, model_box());
    for (int k = 0; k <= 16; k += 3)
        for (int j = 0; j <= 16; j += 5)
            for (int i = 0; i <= 16; i += 2) EXPECT_EQ(grid.sample(grid.lattice_point(i, j, k)), grid.at(i, j, k));
    // across a cell face the two one-sided limits agree
    const double x = grid.lattice_point(5, 0, 0).x();
    for (double y : {-0.31, 0.07, 0.52}) {
        const double a = grid.sample(Vec3(x - 1e-12, y, 0.1));
        const double b = grid.sample(Vec3(x + 1e-12, y, 0.1));
        EXPECT_NEAR(a, b, 1e-9);
    }
}

TEST(MarchingCubes, SphereResidualAndArea)
{
    const SphereField sphere(Vec3::Zero(), 0.5);
    const TriMesh m = marching_cubes(sphere, 64, model_box());
    const double voxel = 2.0 / 64;
    EXPECT_LE(max_abs_field(sphere, m), 1.5 * voxel);
    const double area = surface_area(m);
    const double exact = 4 * std::numbers::pi * 0.25;
    EXPECT_LE(std::abs(area - exact) / exact, 0.05);
    EXPECT_TRUE(is_watertight(m));
    EXPECT_GT(signed_volume(m), 0.0);  // outward orientation
}

TEST(MarchingCubes, NormalsPointTowardDecreasingField)
{
    const EllipsoidField f(Vec3(0.05, 0, 0), Vec3(0.6, 0.4, 0.3));
    const TriMesh m = marching_cubes(f, 48, model_box());
    int agree = 0;
    for (std::size_t t = 0; t < m.triangles.size(); ++t) {
        const Vec3 n = face_normal(m, t);
        const Vec3 c = (m.vertices[m.triangles[t][0]] + m.vertices[m.triangles[t][1]] + m.vertices[m.triangles[t][2]]) / 3;
        if (n.dot(f.gradient(c)) < 0) ++agree;
    }
    EXPECT_GE(agree, static_cast<int>(0.99 * m.triangles.size()));
}

TEST(MarchingCubes, UniformSignGivesEmptyMesh)
{
    EXPECT_TRUE(marching_cubes(ConstantField(-1.0), 16, model_box()).empty());
    EXPECT_TRUE(marching_cubes(ConstantField(1.0), 16, model_box()).empty());
}

TEST(MarchingCubes, ResidualAcrossShapesAndResolutions)
{
    const SphereField sphere(Vec3(0.03, -0.02, 0.01), 0.55);
    const EllipsoidField ellipsoid(Vec3::Zero(), Vec3(0.7, 0.5, 0.4));
    const CapsuleField capsule(Vec3(-0.4, -0.1, 0), Vec3(0.4, 0.2, 0.05), 0.3);
    for (int res : {64, 128}) {
        const double voxel = 2.0 / res;
        for (const ScalarField* f : {static_cast<const ScalarField*>(&sphere), static_cast<const ScalarField*>(&ellipsoid),
                                     static_cast<const ScalarField*>(&capsule)}) {
            const TriMesh m = marching_cubes(*f, res, model_box());
            EXPECT_LE(max_abs_field(*f, m), 1.5 * voxel) << "res " << res;
            EXPECT_TRUE(is_watertight(m));
        }
    }
}

TEST(MeshToField, CubeCenterAndFarOutside)
{
    const GridField g = mesh_to_field(make_cube(0.5), 64, model_box());
    const double h = g.spacing();
    EXPECT_NEAR(g.at(32, 32, 32), 0.5, h);
    EXPECT_LT(g.at(0, 0, 0), 0.0);
    EXPECT_LT(g.at(64, 3, 60), 0.0);
    // analytic cube SDF at a handful of lattice points
    for (int i = 8; i <= 56; i += 12) {
        const Vec3 p = g.lattice_point(i, 30, 35);
        const Vec3 q = p.cwiseAbs() - Vec3::Constant(0.5);
        const double outside = q.cwiseMax(0.0).norm();
        const double inside = std::min(q.maxCoeff(), 0.0);
        EXPECT_NEAR(g.at(i, 30, 35), -(outside + inside), 1e-12);
    }
}

TEST(MeshToField, RejectsOpenMesh)
{
    TriMesh m = make_icosphere(1, 0.5);
    m.triangles.pop_back();
    EXPECT_THROW(mesh_to_field(m, 16, model_box()), std::invalid_argument);
}

TEST(MeshToField, SignAgreesWithRayParityAndWindingNumber)
{
    const TriMesh m = marching_cubes(EllipsoidField(Vec3(0.05, 0.02, -0.03), Vec3(0.6, 0.45, 0.35)), 40, model_box());
    const MeshDistanceField field(m, 64, model_box());
    std::mt19937 rng(11);
    std::uniform_int_distribution<int> idx(0, 64);
    int agree = 0;
    const Vec3 dir = Vec3(0.57, 0.31, 0.76).normalized();
    for (int s = 0; s < 1000; ++s) {
        const int i = idx(rng), j = idx(rng), k = idx(rng);
        const double v = field.lattice_value(i, j, k);
        if (v == 0.0) continue;
        const Vec3 p = Vec3(-1, -1, -1) + field.spacing() * Vec3(i, j, k);
        const bool parity = oracle::inside_by_ray_parity(p, m, dir);
        if ((v > 0) == parity) ++agree;
        if (s % 50 == 0) EXPECT_EQ(winding_number(m, p) > 0.5, v > 0);
    }
    EXPECT_EQ(agree, 1000);
}

TEST(MeshToField, ExactDistanceAgainstBruteForce)
{
    const TriMesh m = make_icosphere(2, 0.5);
    const MeshDistanceField field(m, 32, model_box());
    for (int i = 0; i <= 32; i += 4)
        for (int j = 0; j <= 32; j += 8)
            for (int k = 1; k <= 32; k += 7) {
                const Vec3 p = Vec3(-1, -1, -1) + field.spacing() * Vec3(i, j, k);
                EXPECT_NEAR(std::abs(field.lattice_value(i, j, k)), oracle::point_mesh_distance(p, m), 1e-12);
            }
}

TEST(MeshToField, RoundTripHausdorff)
{
    const TriMesh sphere = make_icosphere(4, 0.5);
    const GridField g = mesh_to_field(sphere, 64, model_box());
    const TriMesh back = marching_cubes(g);
    EXPECT_LE(oracle::hausdorff(back, sphere), 2 * g.spacing());
}

TEST(MeshToField, LazyMatchesEager)
{
    const TriMesh m = make_icosphere(3, 0.45, Vec3(0.1, 0, 0));
    const MeshDistanceField lazy(m, 32, model_box());
    EXPECT_EQ(lazy.evaluated_fraction(), 0.0);
    const double probe = lazy.sample(Vec3(0.2, 0.1, 0.05));
    EXPECT_LT(lazy.evaluated_fraction(), 0.1);
    const GridField eager = mesh_to_field(m, 32, model_box());
    EXPECT_EQ(probe, eager.sample(Vec3(0.2, 0.1, 0.05)));
    EXPECT_EQ(lazy.materialize().values(), eager.values());
}

TEST(MeshToField, BandTruncatesMagnitudeOnly)
{
    const TriMesh m = make_icosphere(3, 0.45, Vec3(0.1, 0, 0));
    const GridField full = mesh_to_field(m, 32, model_box());
    const double band = 3 * full.spacing();
    const GridField cut = mesh_to_field(m, 32, model_box(), band);
    for (std::size_t k = 0; k < full.values().size(); ++k) {
        const double a = full.values()[k], b = cut.values()[k];
        EXPECT_EQ(std::signbit(a), std::signbit(b));
        if (std::abs(a) <= band) EXPECT_EQ(a, b);
        else EXPECT_EQ(std::abs(b), band);
    }
    EXPECT_THROW(mesh_to_field(m, 8, model_box(), 0.0), std::invalid_argument);
}

TEST(Bvh, ClosestPointAgainstBruteForce)
{
    const TriMesh m = make_icosphere(3, 0.5, Vec3(0.05, -0.1, 0));
    const TriangleBVH bvh(m);
    for (const Vec3& p : oracle::random_points(300, -1, 1, 17)) {
        const ClosestHit hit = bvh.closest(p);
        EXPECT_NEAR(std::sqrt(hit.squared_distance), oracle::point_mesh_distance(p, m), 1e-12);
        EXPECT_NEAR((hit.point - p).squaredNorm(), hit.squared_distance, 1e-15);
    }
}

TEST(SurfaceDistance, ExactNearTheSurfaceLatticeFarAway)
{
    const TriMesh m = make_icosphere(3, 0.5, Vec3(0.05, -0.1, 0));
    const double h = 2.0 / 32;
    const SurfaceDistanceField near(m, 32, 2 * h);
    for (const Vec3& v : m.vertices) EXPECT_EQ(near.sample(v), 0.0);
    int exact = 0, far = 0;
    for (const Vec3& p : oracle::random_points(3000, -1, 1, 23)) {
        const double lattice = near.lattice().sample(p);
        const double got = near.sample(p);
        if (std::abs(lattice) <= 2 * h) {
            const double d = oracle::point_mesh_distance(p, m);
            const bool inside = oracle::inside_by_ray_parity(p, m, Vec3(0.3, 0.2, 1).normalized());
            EXPECT_NEAR(got, inside ? d : -d, 1e-12);
            ++exact;
        } else if (std::abs(lattice) >= 4 * h) {
            EXPECT_EQ(got, lattice);
            ++far;
        }
    }
    EXPECT_GT(exact, 50);
    EXPECT_GT(far, 500);
    EXPECT_THROW(SurfaceDistanceField(m, 32, 0.0), std::invalid_argument);
}

TEST(FieldUnion, IdempotentCommutativeAssociative)
{
    const GridField a = sample_to_grid(SphereField(Vec3(-0.2, 0, 0), 0.4), 24, model_box());
    const GridField b = sample_to_grid(CapsuleField(Vec3(0, -0.3, 0), Vec3(0.3, 0.3, 0), 0.2), 24, model_box());
    const GridField c = sample_to_grid(EllipsoidField(Vec3(0.2, 0.2, 0.1), Vec3(0.3, 0.2, 0.5)), 24, model_box());
    EXPECT_EQ(field_union(a, a).values(), a.values());
    EXPECT_EQ(field_union(a, b).values(), field_union(b, a).values());
    EXPECT_EQ(field_union(field_union(a, b), c).values(), field_union(a, field_union(b, c)).values());
}

TEST(FieldUnion, ComponentsOfExtractedUnion)
{
    const auto grid = [](const Vec3& c, double r) { return sample_to_grid(SphereField(c, r), 64, model_box()); };
    const TriMesh disjoint = marching_cubes(field_union(grid(Vec3(-0.5, 0, 0), 0.3), grid(Vec3(0.5, 0, 0), 0.3)));
    EXPECT_EQ(connected_components(disjoint), 2);
    const TriMesh overlap = marching_cubes(field_union(grid(Vec3(-0.15, 0, 0), 0.3), grid(Vec3(0.15, 0, 0), 0.3)));
    EXPECT_EQ(connected_components(overlap), 1);
    EXPECT_EQ(boundary_edge_count(overlap), 0u);
}

TEST(FieldUnion, LatticeMismatchThrows)
{
    const GridField a(16, model_box());
    const GridField b(32, model_box());
    EXPECT_THROW(field_union(a, b), std::invalid_argument);
}

namespace {

std::vector<double> edge_lengths(const TriMesh& m)
{
    std::vector<double> out;
    for (const auto& t : m.triangles)
        for (int k = 0; k < 3; ++k)
            if (t[k] < t[(k + 1) % 3]) out.push_back((m.vertices[t[k]] - m.vertices[t[(k + 1) % 3]]).norm());
    return out;
}

double fraction_within(const std::vector<double>& lengths, double lo, double hi)
{
    const auto n = std::count_if(lengths.begin(), lengths.end(), [&](double l) { return l >= lo && l <= hi; });
    return static_cast<double>(n) / lengths.size();
}

double mean(const std::vector<double>& v)
{
    double s = 0;
    for (double x : v) s += x;
    return s / v.size();
}

}  // namespace

TEST(Remesh, IcosahedronReachesTarget)
{
    const TriMesh ico = make_icosahedron();
    const TriMesh m = remesh(ico, 0.05, 4);
    EXPECT_TRUE(is_watertight(m));
    const auto lengths = edge_lengths(m);
    EXPECT_LE(*std::max_element(lengths.begin(), lengths.end()), 0.075);
    EXPECT_GE(fraction_within(lengths, 0.025, 0.075), 0.9);
    EXPECT_LE(oracle::directed_hausdorff(m, ico), 0.05);
}

TEST(Remesh, IsotropicSphereKeepsHistogram)
{
    // an isotropic mesh at the target length is a fixed point up to 5% of the length distribution
    const TriMesh seed = make_icosphere(3, 0.5);
    const double target = mean(edge_lengths(seed));
    const TriMesh iso = remesh(seed, target, 4);
    const TriMesh again = remesh(iso, target, 4);
    EXPECT_TRUE(is_watertight(again));
    auto before = edge_lengths(iso), after = edge_lengths(again);
    EXPECT_NEAR(static_cast<double>(after.size()), static_cast<double>(before.size()), 0.05 * before.size());
    std::sort(before.begin(), before.end());
    std::sort(after.begin(), after.end());
    for (int q = 0; q <= 10; ++q) {
        const double lb = before[std::min(before.size() - 1, q * before.size() / 10)];
        const double la = after[std::min(after.size() - 1, q * after.size() / 10)];
        EXPECT_NEAR(la, lb, 0.05 * target) << "decile " << q;
    }
}

TEST(Remesh, ExtractedSurfaceStaysClosedAndClose)
{
    const TriMesh raw = marching_cubes(EllipsoidField(Vec3(0.02, 0, 0), Vec3(0.6, 0.45, 0.35)), 48, model_box());
    const double target = default_remesh_target(raw);
    const TriMesh m = remesh(raw, target, 4);
    EXPECT_EQ(boundary_edge_count(raw), 0u);
    EXPECT_EQ(boundary_edge_count(m), 0u);
    EXPECT_TRUE(is_watertight(m));
    EXPECT_GE(fraction_within(edge_lengths(m), 0.5 * target, 1.5 * target), 0.9);
    EXPECT_LE(oracle::directed_hausdorff(m, raw), target);
}

TEST(Subdivide, EmptyRegionIsIdentity)
{
    const TriMesh m = make_icosphere(1);
    const Subdivision s = subdivide_region(m, {});
    EXPECT_EQ(s.mesh.triangles, m.triangles);
    EXPECT_EQ(s.mesh.vertices, m.vertices);
}

TEST(Subdivide, SingleTetrahedronFaceIsConformal)
{
    const TriMesh tet = make_tetrahedron();
    const Subdivision s = subdivide_region(tet, {0});
    EXPECT_EQ(s.mesh.triangles.size(), 4u + 3u * 2u);
    EXPECT_TRUE(is_watertight(s.mesh));  // every edge shared by exactly two triangles: no T-junctions
    EXPECT_NEAR(surface_area(s.mesh), surface_area(tet), 1e-12);
    EXPECT_NEAR(signed_volume(s.mesh), signed_volume(tet), 1e-12);
    ASSERT_EQ(s.parents.size(), s.mesh.vertices.size());
    for (std::size_t v = 0; v < s.parents.size(); ++v) {
        const auto [a, b] = s.parents[v];
        EXPECT_LE((s.mesh.vertices[v] - 0.5 * (tet.vertices[a] + tet.vertices[b])).norm(), 1e-15);
    }
}

TEST(Subdivide, FullRegionQuadruples)
{
    const TriMesh m = make_icosphere(2);
    std::vector<int> all(m.triangles.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    const Subdivision s = subdivide_region(m, all);
    EXPECT_EQ(s.mesh.triangles.size(), 4 * m.triangles.size());
    EXPECT_TRUE(is_watertight(s.mesh));
    for (std::size_t v = 0; v < m.vertices.size(); ++v) EXPECT_EQ(s.mesh.vertices[v], m.vertices[v]);
}

TEST(Subdivide, PatchKeepsClosureAndRejectsBadIds)
{
    const TriMesh m = make_icosphere(3, 0.5);
    const Subdivision s = subdivide_region(m, {3, 4, 5, 17, 90, 91, 300});
    EXPECT_EQ(boundary_edge_count(s.mesh), 0u);
    EXPECT_TRUE(is_watertight(s.mesh));
    EXPECT_THROW(subdivide_region(m, {static_cast<int>(m.triangles.size())}), std::invalid_argument);
}

namespace {

// Two rows of vertices along x joined by triangles.
TriMesh strip(int n)
{
    TriMesh m;
    for (int i = 0; i < n; ++i) {
        m.vertices.emplace_back(0.1 * i, 0.0, 0.0);
        m.vertices.emplace_back(0.1 * i, 0.1, 0.0);
    }
    for (int i = 0; i + 1 < n; ++i) {
        const int a = 2 * i, b = 2 * i + 1, c = 2 * i + 2, d = 2 * i + 3;
        m.triangles.push_back({a, c, d});
        m.triangles.push_back({a, d, b});
    }
    return m;
}

std::vector<int> all_vertices(const TriMesh& m)
{
    std::vector<int> v(m.vertices.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<int>(i);
    return v;
}

}  // namespace

TEST(Laplacian, HandlesAtRestAreAFixedPoint)
{
    const TriMesh m = make_icosphere(3, 0.5);
    const auto adj = vertex_adjacency(m);
    const std::vector<int> roi = ring_neighborhood(adj, {0, 40}, 3);
    const TriMesh out = laplacian_deform(m, {{0, m.vertices[0]}, {40, m.vertices[40]}}, roi);
    for (std::size_t v = 0; v < m.vertices.size(); ++v) EXPECT_LE((out.vertices[v] - m.vertices[v]).norm(), 1e-9);
}

TEST(Laplacian, StripFollowsRigidTranslation)
{
    const TriMesh m = strip(12);
    const Vec3 t(0.03, -0.2, 0.5);
    std::map<int, Vec3> handles;
    for (int v : {0, 1, 22, 23}) handles[v] = m.vertices[v] + t;
    const TriMesh out = laplacian_deform(m, handles, all_vertices(m));
    for (std::size_t v = 0; v < m.vertices.size(); ++v) EXPECT_LE((out.vertices[v] - (m.vertices[v] + t)).norm(), 1e-9);
}

TEST(Laplacian, DisplacementDecaysWithRingDistance)
{
    const TriMesh m = make_icosphere(3, 0.5);
    const auto adj = vertex_adjacency(m);
    const int h = 7;
    const std::vector<int> roi = ring_neighborhood(adj, {h}, 2);
    const Vec3 target = m.vertices[h] + 0.1 * m.vertices[h].normalized();
    const TriMesh out = laplacian_deform(m, {{h, target}}, roi);
    double prev = 0.1 + 1e-12;
    for (int ring = 0; ring <= 3; ++ring) {
        const auto inner = ring == 0 ? std::vector<int>{} : ring_neighborhood(adj, {h}, ring - 1);
        const auto outer = ring_neighborhood(adj, {h}, ring);
        double sum = 0;
        int count = 0;
        for (int v : outer) {
            if (std::find(inner.begin(), inner.end(), v) != inner.end()) continue;
            sum += (out.vertices[v] - m.vertices[v]).norm();
            ++count;
        }
        const double avg = sum / count;
        EXPECT_LT(avg, prev) << "ring " << ring;
        prev = avg;
    }
    EXPECT_NEAR(prev, 0.0, 1e-15);  // ring 3 lies outside the roi
}

TEST(Laplacian, ConstraintsAreExactAndTranslationEquivariant)
{
    const TriMesh m = make_icosphere(3, 0.5);
    const auto adj = vertex_adjacency(m);
    const std::vector<int> roi = ring_neighborhood(adj, {5, 6}, 3);
    const std::map<int, Vec3> handles = {{5, m.vertices[5] * 1.2}, {6, m.vertices[6] * 0.9}};
    const TriMesh out = laplacian_deform(m, handles, roi);
    for (const auto& [v, p] : handles) EXPECT_LE((out.vertices[v] - p).norm(), 1e-12);
    std::vector<char> in(m.vertices.size(), 0);
    for (int v : roi) in[v] = 1;
    for (std::size_t v = 0; v < m.vertices.size(); ++v)
        if (!in[v]) EXPECT_EQ(out.vertices[v], m.vertices[v]);

    const Vec3 t(0.3, -0.1, 0.25);
    TriMesh shifted = m;
    for (Vec3& p : shifted.vertices) p += t;
    std::map<int, Vec3> shifted_handles;
    for (const auto& [v, p] : handles) shifted_handles[v] = p + t;
    const TriMesh out2 = laplacian_deform(shifted, shifted_handles, roi);
    for (std::size_t v = 0; v < m.vertices.size(); ++v) EXPECT_LE((out2.vertices[v] - out.vertices[v] - t).norm(), 1e-8);
}

TEST(Laplacian, RejectsBadConstraints)
{
    const TriMesh m = make_icosphere(2, 0.5);
    EXPECT_THROW(laplacian_deform(m, {{3, Vec3::Zero()}}, {4, 5}), std::invalid_argument);
    EXPECT_THROW(laplacian_deform(m, {}, all_vertices(m)), std::runtime_error);
}
