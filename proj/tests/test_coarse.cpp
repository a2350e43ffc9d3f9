#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <numbers>

#include "facesketch/coarse.hpp"
#include "facesketch/mesh_to_field.hpp"
#include "oracles.hpp"

using namespace fsk;

namespace {

constexpr double kVoxel = 2.0 / 64;

std::vector<Vec2> circle(double cx, double cy, double r, int n = 96)
{
    std::vector<Vec2> c;
    for (int k = 0; k <= n; ++k) {
        const double t = 2 * std::numbers::pi * k / n;
        c.emplace_back(cx + r * std::cos(t), cy + r * std::sin(t));
    }
    return c;
}

PartSketch face_with_ears()
{
    PartSketch s;
    s.layers["face"] = circle(256, 256, 128);
    s.layers["left_ear"] = circle(130, 250, 30);
    s.layers["right_ear"] = circle(382, 250, 30);
    return s;
}

// Generated once; every test below only reads it.
const PartMeshes& standard_parts()
{
    static const PartMeshes parts = generate_parts(face_with_ears());
    return parts;
}

const TriMesh& standard_merge()
{
    static const TriMesh merged = merge_parts(standard_parts());
    return merged;
}

double centre_x(const TriMesh& m)
{
    const Box b = bounding_box(m);
    return 0.5 * (b.min.x() + b.max.x());
}

}  // namespace

TEST(Inflation, HeightProfile)
{
    EXPECT_EQ(inflation_height(0.0, 1.0, 0.8), 0.0);
    EXPECT_DOUBLE_EQ(inflation_height(1.0, 1.0, 0.8), 0.8);
    EXPECT_DOUBLE_EQ(inflation_height(0.25, 1.0, 0.8), 0.4);
    EXPECT_EQ(inflation_height(-1.0, 1.0, 0.8), 0.0);
}

TEST(Parts, CircleInflatesToExpectedHeight)
{
    const TriMesh& face = standard_parts().at("face");
    ASSERT_TRUE(is_watertight(face));
    const Box b = bounding_box(face);
    // r = 128 px: d_max * beta = 128 * (2/512) * 0.8 = 0.4
    EXPECT_NEAR(b.max.z(), 0.4, kVoxel);
    EXPECT_NEAR(b.min.z(), -0.4, kVoxel);
    EXPECT_NEAR(b.max.x(), 0.5, kVoxel);
    EXPECT_NEAR(centroid(face).z(), 0.0, kVoxel);
}

TEST(Parts, OnePerLayerAtSketchedLocation)
{
    const PartMeshes& parts = standard_parts();
    ASSERT_EQ(parts.size(), 3u);
    for (const auto& [name, m] : parts) EXPECT_TRUE(is_watertight(m)) << name;
    EXPECT_LT(centre_x(parts.at("left_ear")), -0.4);
    EXPECT_GT(centre_x(parts.at("right_ear")), 0.4);
    EXPECT_NEAR(centre_x(parts.at("left_ear")), -centre_x(parts.at("right_ear")), kVoxel);
}

TEST(Parts, FaceOnlySketch)
{
    PartSketch s;
    s.layers["face"] = circle(256, 256, 100, 40);
    const PartMeshes parts = generate_parts(s);
    ASSERT_EQ(parts.size(), 1u);
    EXPECT_EQ(connected_components(merge_parts(parts)), 1);
}

TEST(Validation, RejectsBadSketches)
{
    PartSketch missing;
    missing.layers["left_ear"] = circle(100, 100, 20);
    EXPECT_THROW(validate_part_sketch(missing), std::invalid_argument);

    PartSketch unknown = face_with_ears();
    unknown.layers["tail"] = circle(100, 100, 20);
    EXPECT_THROW(validate_part_sketch(unknown), std::invalid_argument);
    unknown.layers.erase("tail");
    unknown.layers["attachment_5"] = circle(100, 100, 20);
    EXPECT_THROW(validate_part_sketch(unknown), std::invalid_argument);

    std::vector<Vec2> open = circle(256, 256, 50);
    open.pop_back();
    open.pop_back();
    EXPECT_THROW(validate_contour("face", open), std::invalid_argument);

    const std::vector<Vec2> bowtie = {{0, 0}, {10, 10}, {10, 0}, {0, 10}, {0, 0}};
    EXPECT_THROW(validate_contour("face", bowtie), std::invalid_argument);
    const std::vector<Vec2> degenerate = {{0, 0}, {5, 5}, {0, 0}, {0, 0}};
    EXPECT_THROW(validate_contour("face", degenerate), std::invalid_argument);

    PartSketch ok = face_with_ears();
    ok.layers["attachment_4"] = circle(256, 60, 20);
    EXPECT_NO_THROW(validate_part_sketch(ok));
    try {
        PartSketch named = face_with_ears();
        named.layers["left_ear"] = bowtie;
        validate_part_sketch(named);
        FAIL();
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("left_ear"), std::string::npos);
    }
}

TEST(Layout, IdentityTranslateAndMirror)
{
    const PartMeshes& parts = standard_parts();
    const PartMeshes same = apply_layout(parts, PartLayout{{{"face", {}}, {"left_ear", {}}}, {}});
    for (const auto& [name, m] : parts) EXPECT_EQ(same.at(name).vertices, m.vertices) << name;

    PartLayout move;
    move.transforms["left_ear"] = PartTransform{Vec3(-0.125, 0.25, 0.0), 1.0};
    const PartMeshes moved = apply_layout(parts, move);
    const TriMesh& before = parts.at("left_ear");
    const TriMesh& after = moved.at("left_ear");
    for (std::size_t v = 0; v < before.vertices.size(); ++v)
        EXPECT_EQ(after.vertices[v], before.vertices[v] + Vec3(-0.125, 0.25, 0.0));

    PartLayout scaled;
    scaled.transforms["right_ear"] = PartTransform{Vec3::Zero(), 1.5};
    const Box b0 = bounding_box(parts.at("right_ear"));
    const Box b1 = bounding_box(apply_layout(parts, scaled).at("right_ear"));
    EXPECT_NEAR((b1.max - b1.min).x(), 1.5 * (b0.max - b0.min).x(), 1e-12);
    EXPECT_NEAR((b1.max + b1.min).x(), (b0.max + b0.min).x(), 1e-12);

    PartMeshes only_left = parts;
    only_left.erase("right_ear");
    const PartMeshes copied = copy_part(only_left, PartCopy{"left_ear", "right_ear"});
    const TriMesh& src = only_left.at("left_ear");
    const TriMesh& dst = copied.at("right_ear");
    ASSERT_EQ(dst.vertices.size(), src.vertices.size());
    for (std::size_t v = 0; v < src.vertices.size(); ++v) {
        EXPECT_NEAR(dst.vertices[v].x(), -src.vertices[v].x(), 1e-9);
        EXPECT_NEAR(dst.vertices[v].y(), src.vertices[v].y(), 1e-9);
        EXPECT_NEAR(dst.vertices[v].z(), src.vertices[v].z(), 1e-9);
    }
    EXPECT_TRUE(is_watertight(dst));
    EXPECT_GT(signed_volume(dst), 0.0);
}

TEST(Layout, RejectsInvalidEdits)
{
    const PartMeshes& parts = standard_parts();
    PartLayout face;
    face.transforms["face"] = PartTransform{Vec3(0.1, 0, 0), 1.0};
    EXPECT_THROW(apply_layout(parts, face), std::invalid_argument);
    PartLayout unknown;
    unknown.transforms["nose"] = PartTransform{};
    EXPECT_THROW(apply_layout(parts, unknown), std::invalid_argument);
    PartLayout flat;
    flat.transforms["left_ear"] = PartTransform{Vec3::Zero(), 0.0};
    EXPECT_THROW(apply_layout(parts, flat), std::invalid_argument);
    EXPECT_THROW(copy_part(parts, PartCopy{"left_ear", "right_ear"}), std::invalid_argument);
    EXPECT_THROW(copy_part(parts, PartCopy{"tail", "tail_copy"}), std::invalid_argument);
}

TEST(Merge, SinglePartRoundTrips)
{
    PartMeshes one;
    one["face"] = standard_parts().at("face");
    const TriMesh merged = merge_parts(one);
    EXPECT_TRUE(is_watertight(merged));
    EXPECT_LE(oracle::hausdorff(merged, one["face"]), 2 * kVoxel);
}

TEST(Merge, OverlappingEarsFormOneClosedSurface)
{
    const TriMesh& merged = standard_merge();
    EXPECT_EQ(connected_components(merged), 1);
    EXPECT_EQ(boundary_edge_count(merged), 0u);
    EXPECT_TRUE(is_watertight(merged));
}

TEST(Merge, ContainsEveryPart)
{
    const MeshDistanceField inside(standard_merge(), 64, model_box());
    for (const auto& [name, m] : standard_parts())
        for (const Vec3& v : m.vertices) ASSERT_GE(inside.sample(v), -2 * kVoxel) << name;
}

TEST(Merge, DetachedEarStaysSeparate)
{
    PartLayout away;
    away.transforms["left_ear"] = PartTransform{Vec3(-0.35, 0, 0), 1.0};
    const PartMeshes parts = apply_layout(standard_parts(), away);
    const TriMesh merged = merge_parts(parts);
    EXPECT_EQ(connected_components(merged), 2);
    EXPECT_TRUE(is_watertight(merged));
}

TEST(Merge, RejectsEmptyInput)
{
    EXPECT_THROW(merge_parts(PartMeshes{}), std::invalid_argument);
}

TEST(SideView, RoundTrip)
{
    const SideView view{512};
    const Vec2 c = view.to_canvas(0.25, -0.5);
    EXPECT_DOUBLE_EQ(c.x(), 384.0);
    EXPECT_DOUBLE_EQ(c.y(), 192.0);
    const Vec2 m = view.to_model(c);
    EXPECT_DOUBLE_EQ(m.x(), 0.25);
    EXPECT_DOUBLE_EQ(m.y(), -0.5);
}

TEST(Profile, FrontHalfOrderedTopToBottom)
{
    const std::vector<Vec2> prof = extract_profile(standard_merge());
    ASSERT_GT(prof.size(), 100u);
    for (std::size_t k = 1; k < prof.size(); ++k) EXPECT_GT(prof[k].y(), prof[k - 1].y());
    const SideView view{512};
    double front = 0;
    for (const Vec2& p : prof) front = std::max(front, view.to_model(p).y());
    EXPECT_NEAR(front, bounding_box(standard_merge()).max.z(), 2.0 / 512 + 1e-9);
}

TEST(Profile, UnchangedTargetIsAFixedPoint)
{
    const TriMesh& mesh = standard_merge();
    const ProfileEdit e = profile_depth_edit(mesh, extract_profile(mesh));
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
        EXPECT_LE((e.mesh.vertices[v] - mesh.vertices[v]).norm(), 1e-6);
}

TEST(Profile, UniformOffsetMovesHandlesExactly)
{
    const TriMesh& mesh = standard_merge();
    std::vector<Vec2> target = extract_profile(mesh);
    for (Vec2& p : target) p.x() -= 0.1 * 512 / 2;  // canvas x grows toward -z
    const ProfileEdit e = profile_depth_edit(mesh, target);
    ASSERT_GE(e.handles.size(), 4u);
    for (int v : e.handles) {
        EXPECT_NEAR(e.mesh.vertices[v].z() - mesh.vertices[v].z(), 0.1, 1e-9);
        EXPECT_EQ(e.mesh.vertices[v].y(), mesh.vertices[v].y());
    }
}

TEST(Profile, BumpIsReproducedWithinTwoPixels)
{
    const TriMesh& mesh = standard_merge();
    std::vector<Vec2> target = extract_profile(mesh);
    for (Vec2& p : target) {
        const double t = (p.y() - 300) / 20;
        p.x() -= 25 * std::exp(-t * t);
    }
    const auto start = std::chrono::steady_clock::now();
    const ProfileEdit e = profile_depth_edit(mesh, target);
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    EXPECT_LT(ms, 100.0);

    std::vector<char> in_roi(mesh.vertices.size(), 0);
    for (int v : e.roi) in_roi[v] = 1;
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
        if (!in_roi[v]) EXPECT_EQ(e.mesh.vertices[v], mesh.vertices[v]);

    const std::vector<Vec2> after = extract_profile(e.mesh);
    double worst = 0;
    int matched = 0;
    for (const Vec2& p : after)
        for (const Vec2& q : target)
            if (std::abs(q.y() - p.y()) < 1e-9) {
                worst = std::max(worst, std::abs(q.x() - p.x()));
                ++matched;
            }
    EXPECT_GT(matched, 200);
    EXPECT_LE(worst, 2.0);
}

TEST(Profile, ArcLengthCorrespondenceIsSelectable)
{
    const TriMesh& mesh = standard_merge();
    ProfileOptions opt;
    opt.correspondence = ProfileCorrespondence::arc_length;
    const ProfileEdit e = profile_depth_edit(mesh, extract_profile(mesh), opt);
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
        EXPECT_LE((e.mesh.vertices[v] - mesh.vertices[v]).norm(), 1e-6);
}

TEST(Profile, RejectsDegenerateInput)
{
    const std::vector<Vec2> target = {{200, 100}, {200, 400}};
    EXPECT_THROW(profile_depth_edit(TriMesh{}, target), std::runtime_error);
    EXPECT_THROW(profile_depth_edit(make_tetrahedron(), target), std::runtime_error);
    EXPECT_THROW(profile_depth_edit(standard_merge(), {{200, 400}, {200, 100}}), std::invalid_argument);
    EXPECT_THROW(profile_depth_edit(standard_merge(), {{200, 100}}), std::invalid_argument);
}
