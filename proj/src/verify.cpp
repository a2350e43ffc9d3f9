#include "facesketch/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "facesketch/coarse.hpp"
#include "facesketch/idgmm.hpp"
#include "facesketch/imageops.hpp"
#include "facesketch/marching_cubes.hpp"
#include "facesketch/mesh_to_field.hpp"
#include "facesketch/remesh.hpp"
#include "facesketch/session.hpp"
#include "facesketch/strokes.hpp"
#include "facesketch/suggest.hpp"
#include "facesketch/synthetic.hpp"

namespace fsk {

namespace {

// A check returns an empty string on success, the reason otherwise.
using Check = std::function<std::string()>;

struct NamedCheck {
    std::string module;
    std::string name;
    Check run;
};

std::string fail(const std::string& what, double value, double bound)
{
    std::ostringstream s;
    s << what << " = " << value << " (bound " << bound << ")";
    return s.str();
}

std::vector<NamedCheck> geomcore_checks()
{
    return {
        {"geomcore", "marching cubes of a sphere is closed and on the surface",
         [] {
             const SphereField f(Vec3::Zero(), 0.5);
             const TriMesh m = marching_cubes(f, 32);
             if (!is_watertight(m)) return std::string("mesh has boundary or non-manifold edges");
             double worst = 0.0;
             for (const Vec3& v : m.vertices) worst = std::max(worst, std::abs(f.sample(v)));
             const double bound = 1.5 * 2.0 / 32;
             return worst <= bound ? std::string() : fail("max |sdf|", worst, bound);
         }},
        {"geomcore", "one implicit step lands on an analytic sphere",
         [] {
             const TriMesh sphere = make_icosphere(3, 1.2);
             std::vector<Vec3> radial;
             for (const Vec3& v : sphere.vertices) radial.push_back(v.normalized());
             const TriMesh m = implicit_update(sphere, SphereField(Vec3::Zero(), 1.0), radial, 1.0);
             double worst = 0.0;
             for (const Vec3& v : m.vertices) worst = std::max(worst, std::abs(v.norm() - 1.0));
             return worst <= 1e-6 ? std::string() : fail("max radius error", worst, 1e-6);
         }},
        {"geomcore", "laplacian editing keeps handles and fixed vertices",
         [] {
             const TriMesh m = make_icosphere(3, 0.5);
             const std::vector<int> roi = ring_neighborhood(vertex_adjacency(m), {0}, 3);
             const Vec3 target = m.vertices[0] * 1.2;
             const TriMesh out = laplacian_deform(m, {{0, target}}, roi);
             if ((out.vertices[0] - target).norm() > 1e-6) return fail("handle error", (out.vertices[0] - target).norm(), 1e-6);
             std::vector<char> in_roi(m.num_vertices(), 0);
             for (int v : roi) in_roi[v] = 1;
             for (std::size_t v = 0; v < m.num_vertices(); ++v)
                 if (!in_roi[v] && out.vertices[v] != m.vertices[v]) return std::string("a fixed vertex moved");
             return std::string();
         }},
        {"geomcore", "OBJ text round trip",
         [] {
             const TriMesh m = make_icosphere(2, 0.7);
             const TriMesh back = parse_obj_string(to_obj_string(m));
             if (back.triangles != m.triangles) return std::string("triangles differ");
             for (std::size_t v = 0; v < m.num_vertices(); ++v)
                 if ((back.vertices[v] - m.vertices[v]).norm() > 1e-12) return std::string("vertices differ");
             return std::string();
         }},
        {"geomcore", "mesh distance field sign",
         [] {
             const MeshDistanceField f(make_icosphere(3, 0.5), 32);
             if (!(f.sample(Vec3::Zero()) > 0.0)) return std::string("centre is not inside");
             if (!(f.sample(Vec3(0.9, 0.9, 0.9)) < 0.0)) return std::string("corner is not outside");
             return std::string();
         }},
    };
}

std::vector<NamedCheck> imageops_checks()
{
    return {
        {"imageops", "depth render of a sphere",
         [] {
             const OrthoCamera cam{128, 128};
             const DepthMap d = render_depth(make_icosphere(4, 0.5), cam);
             const double z = d.z.at(64, 64);
             if (!d.ok(64, 64)) return std::string("centre pixel invalid");
             if (d.ok(0, 0)) return std::string("corner pixel valid");
             return std::abs(z - 0.5) <= 0.01 ? std::string() : fail("centre depth error", std::abs(z - 0.5), 0.01);
         }},
        {"imageops", "flow recovers an integer shift",
         [] {
             const OrthoCamera cam{128, 128};
             const DepthMap d = render_depth(bump_head(), cam);
             const DepthMap shifted = shift_depth(d, 2, 0);
             // shifted(p) = d(p - (2, 0)), so the flow from d to shifted is (-2, 0)
             const FlowResult r = estimate_flow(d, shifted);
             std::vector<double> err;
             for (int j = 0; j < cam.height; ++j)
                 for (int i = 0; i < cam.width; ++i)
                     if (shifted.ok(i, j) && d.ok(i - 2, j)) err.push_back((r.flow.at(i, j) - Vec2(-2, 0)).norm());
             if (err.empty()) return std::string("no overlap");
             std::nth_element(err.begin(), err.begin() + err.size() / 2, err.end());
             const double med = err[err.size() / 2];
             return med <= 0.5 ? std::string() : fail("median endpoint error", med, 0.5);
         }},
        {"imageops", "zero flow warp is the identity",
         [] {
             const OrthoCamera cam{64, 64};
             const DepthMap d = render_depth(make_icosphere(3, 0.6), cam);
             const DepthMap w = warp_depth(d, FlowField(64, 64, Vec2::Zero()));
             return w.z.data == d.z.data && w.valid.data == d.valid.data ? std::string() : std::string("warp changed the map");
         }},
    };
}

std::vector<NamedCheck> strokes_checks()
{
    return {
        {"strokes", "intensity encoding round trip",
         [] {
             for (double a : {0.0, 0.25, 0.5, 1.0}) {
                 const Stroke s{StrokeKind::valley, {Vec2(2, 4), Vec2(12, 4)}, a, 1.0};
                 const SketchImage img = encode_strokes({s}, 16, 8);
                 const auto px = decode_pixel(img.at(6, 4));
                 if (!px || px->kind != StrokeKind::valley) return std::string("valley pixel not decoded");
                 if (stroke_intensity(px->depth) != stroke_intensity(a)) return std::string("intensity changed");
             }
             return std::string();
         }},
        {"strokes", "valley mirrors ridge, zero off the support",
         [] {
             Stroke ridge{StrokeKind::ridge, {Vec2(10, 32), Vec2(54, 32)}, 0.5, 3.0};
             Stroke valley = ridge;
             valley.kind = StrokeKind::valley;
             const Image<double> up = stroke_displacement_field({ridge}, 64, 64);
             const Image<double> down = stroke_displacement_field({valley}, 64, 64);
             if (!(up.at(32, 32) > 0.0)) return std::string("ridge does not raise");
             if (up.at(32, 32) != -down.at(32, 32)) return std::string("valley is not the mirror of the ridge");
             for (int j = 0; j < 64; ++j)
                 for (int i = 0; i < 64; ++i)
                     if (distance_to_polyline(Vec2(i + 0.5, j + 0.5), ridge.polyline) >= 9.0 && up.at(i, j) != 0.0)
                         return std::string("displacement outside the support");
             return std::string();
         }},
    };
}

std::vector<NamedCheck> coarse_checks()
{
    return {
        {"coarse", "demo parts and their merge are closed",
         [] {
             const PartMeshes parts = apply_layout(generate_parts(demo_sketch()), demo_layout());
             for (const auto& [name, mesh] : parts)
                 if (!is_watertight(mesh)) return "part " + name + " is open";
             const TriMesh merged = merge_parts(parts);
             if (!is_watertight(merged)) return std::string("merged mesh is open");
             return connected_components(merged) == 1 ? std::string() : std::string("merged mesh is not one piece");
         }},
        {"coarse", "open contours are rejected",
         [] {
             PartSketch s;
             s.layers["face"] = {Vec2(10, 10), Vec2(100, 10), Vec2(100, 100)};
             try {
                 validate_part_sketch(s);
             } catch (const std::invalid_argument&) {
                 return std::string();
             }
             return std::string("open face contour accepted");
         }},
    };
}

std::vector<NamedCheck> idgmm_checks()
{
    return {
        {"idgmm", "IDW equals the weighted mean of its neighbours",
         [] {
             const std::vector<Vec3> cloud{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 2, 0)};
             const Vec3 v(0.25, 0.5, 0.0);
             IdwOptions o;
             o.k = 3;
             const Vec3 got = idw_position(v, cloud, {0, 1, 2}, o);
             Vec3 num = Vec3::Zero();
             double den = 0.0;
             for (const Vec3& p : cloud) {
                 const double w = 1.0 / std::pow((p - v).norm(), 2.0);
                 num += w * p;
                 den += w;
             }
             const double err = (got - num / den).norm();
             if (err > 1e-12) return fail("weighted mean error", err, 1e-12);
             const Vec3 exact = idw_position(cloud[1] + Vec3(1e-9, 0, 0), cloud, {1, 0, 2}, o);
             return exact == cloud[1] ? std::string() : std::string("point within epsilon not snapped");
         }},
        {"idgmm", "refinement of a bump case stays closed",
         [] {
             const RefineConfig cfg;
             const BumpCase c = bump_suite(cfg).front();
             const RefineResult r = refine(c.coarse, c.strokes, procedural_providers(cfg), cfg);
             if (!r.ok) return "refine failed: " + r.diagnostic;
             if (!is_watertight(r.mesh)) return std::string("refined mesh is open");
             const double before = chamfer_distance(c.coarse, c.target, 4000);
             const double after = chamfer_distance(r.mesh, c.target, 4000);
             return after < before ? std::string() : fail("chamfer after refinement", after, before);
         }},
    };
}

std::vector<NamedCheck> suggest_checks(const std::string& corpus_path)
{
    return {
        {"suggest", "every entry retrieves itself first",
         [corpus_path] {
             std::vector<SuggestionEntry> entries;
             if (!corpus_path.empty()) {
                 entries = load_corpus(corpus_path);
             } else {
                 auto unit_circle = [](double r, double sx) {
                     std::vector<Vec2> c = circle_contour(0.5, 0.5, r, 48);
                     for (Vec2& p : c) p.x() = 0.5 + (p.x() - 0.5) * sx;
                     return c;
                 };
                 for (int k = 0; k < 4; ++k)
                     entries.push_back(make_entry("eye-" + std::to_string(k), SuggestionCategory::eye, "",
                                                  {Stroke{StrokeKind::contour, unit_circle(0.4, 0.4 + 0.2 * k), 0.5, 2.0}}));
             }
             const SuggestionIndex index(entries);
             for (const SuggestionEntry& e : index.entries()) {
                 SuggestionQuery q;
                 q.category = e.category;
                 q.style = e.style;
                 for (const Stroke& s : e.strokes) q.contour.push_back(s.polyline);
                 const auto hits = index.query(q);
                 if (hits.empty() || hits.front().id != e.id || hits.front().distance != 0.0)
                     return "entry " + e.id + " is not its own first hit";
             }
             return std::string();
         }},
        {"suggest", "descriptors are unit length",
         [] {
             const Descriptor d = stroke_descriptor({{Vec2(0, 0), Vec2(1, 0.3), Vec2(0.4, 1)}});
             double n = 0.0;
             for (double x : d) n += x * x;
             return std::abs(std::sqrt(n) - 1.0) <= 1e-12 ? std::string() : fail("norm", std::sqrt(n), 1.0);
         }},
    };
}

std::vector<NamedCheck> session_checks()
{
    return {
        {"session", "project text round trip",
         [] {
             const std::string text = project_to_string(demo_project());
             return project_to_string(project_from_string(text)) == text ? std::string()
                                                                          : std::string("reloaded project differs");
         }},
        {"session", "pipeline replay is byte-identical and closed at every stage",
         [] {
             const Project p = demo_project();
             const PipelineOutput a = run_pipeline(p);
             const PipelineOutput b = run_pipeline(p);
             for (const StageReport& s : a.stages)
                 if (s.boundary_edges != 0) return "stage " + s.stage + " is open";
             if (!a.fine || !b.fine) return std::string("no fine mesh");
             return to_obj_string(*a.fine) == to_obj_string(*b.fine) ? std::string()
                                                                      : std::string("replays differ");
         }},
    };
}

}  // namespace

std::vector<std::string> invariant_modules()
{
    return {"geomcore", "imageops", "strokes", "coarse", "idgmm", "suggest", "session"};
}

std::vector<CheckResult> run_invariant_suite(const VerifyOptions& options)
{
    const auto modules = invariant_modules();
    if (!options.module.empty() && std::find(modules.begin(), modules.end(), options.module) == modules.end())
        throw std::invalid_argument("verify: unknown module '" + options.module + "'");

    std::vector<NamedCheck> checks;
    for (auto group : {geomcore_checks(), imageops_checks(), strokes_checks(), coarse_checks(), idgmm_checks(),
                       suggest_checks(options.corpus_path), session_checks()})
        for (NamedCheck& c : group)
            if (options.module.empty() || c.module == options.module) checks.push_back(std::move(c));

    std::vector<CheckResult> results;
    for (const NamedCheck& c : checks) {
        CheckResult r{c.module, c.name, false, "", 0.0};
        const auto t0 = std::chrono::steady_clock::now();
        try {
            r.detail = c.run();
            r.passed = r.detail.empty();
        } catch (const std::exception& e) {
            r.detail = std::string("exception: ") + e.what();
        }
        r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        results.push_back(std::move(r));
    }
    return results;
}

}  // namespace fsk
