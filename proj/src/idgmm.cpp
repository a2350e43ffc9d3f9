#include "facesketch/idgmm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <stdexcept>

#include <boost/geometry.hpp>
#include <boost/geometry/index/rtree.hpp>

#include "facesketch/bvh.hpp"
#include "facesketch/imageops.hpp"
#include "facesketch/remesh.hpp"

namespace fsk {

namespace bg = boost::geometry;
namespace bgi = boost::geometry::index;

void RefineConfig::validate() const
{
    auto require = [](bool ok, const char* what) {
        if (!ok) throw std::invalid_argument(std::string("refine config: ") + what);
    };
    require(raster >= 16, "raster must be >= 16");
    require(field_resolution >= 8, "field_resolution must be >= 8");
    require(idw_k >= 1, "idw_k must be >= 1");
    require(idw_power > 0, "idw_power must be positive");
    require(idw_epsilon > 0, "idw_epsilon must be positive");
    require(idw_radius_px > 0, "idw_radius_px must be positive");
    require(step_clamp_voxels > 0, "step_clamp_voxels must be positive");
    require(visibility_voxels > 0, "visibility_voxels must be positive");
    require(change_voxels >= 0, "change_voxels must be >= 0");
    require(implicit_iterations >= 0 && depth_iterations >= 0, "iteration counts must be >= 0");
    require(subdivision_levels >= 0, "subdivision_levels must be >= 0");
    require(amplitude > 0, "amplitude must be positive");
}

// ---------------------------------------------------------------- providers

namespace {

// base + displacement on the support, `elsewhere` outside it
DepthMap target_depth(const ProviderState& state, const DepthMap& elsewhere)
{
    DepthMap out = elsewhere;
    const DepthMap& base = state.base_depth;
    if (!state.support.same_size(out.z) || !base.z.same_size(out.z)) return out;
    for (std::size_t k = 0; k < out.z.size(); ++k) {
        if (!out.valid.data[k] || !state.support.data[k]) continue;
        out.z.data[k] = (base.valid.data[k] ? base.z.data[k] : out.z.data[k]) + state.displacement.data[k];
    }
    return out;
}

}  // namespace

void prepare_provider_state(ProviderState& state, const std::vector<Stroke>& strokes, const DepthMap& coarse_depth,
                            const RefineConfig& config)
{
    if (!coarse_depth.z.same_size(config.raster, config.raster))
        throw std::invalid_argument("provider state: depth raster does not match the configuration");
    state.displacement = stroke_displacement_field(strokes, config.raster, config.raster, config.amplitude);
    state.support = stroke_support(strokes, config.raster, config.raster);
    state.base_depth = fill_region_smooth(coarse_depth, state.support);
    const DepthMap target = target_depth(state, coarse_depth);
    state.residual = Image<double>(config.raster, config.raster, 0.0);
    for (std::size_t k = 0; k < target.z.size(); ++k)
        if (coarse_depth.valid.data[k] && state.support.data[k])
            state.residual.data[k] = target.z.data[k] - coarse_depth.z.data[k];
}


NormalMap proc_normal_synth(const ProviderState& state, const DepthMap& coarse_depth)
{
    return normal_from_depth(target_depth(state, coarse_depth), OrthoCamera{coarse_depth.width(), coarse_depth.height()});
}

DepthMap proc_depth_enhance(const ProviderState& state, const DepthMap& current_depth)
{
    return target_depth(state, current_depth);
}

ProceduralSdf::ProceduralSdf(std::shared_ptr<const ScalarField> base, Image<double> displacement, double tau)
    : base_(std::move(base)), displacement_(std::move(displacement)), tau_(tau)
{
    if (!base_) throw std::invalid_argument("ProceduralSdf: null base field");
    if (!(tau > 0)) throw std::invalid_argument("ProceduralSdf: tau must be positive");
}

double ProceduralSdf::displacement_at(const Vec3& p) const
{
    if (displacement_.empty()) return 0.0;
    const OrthoCamera cam{displacement_.width, displacement_.height};
    const double u = cam.col_of(p.x()), v = cam.row_of(p.y());
    if (u < -0.5 || v < -0.5 || u > cam.width - 0.5 || v > cam.height - 0.5) return 0.0;
    const double cu = std::clamp(u, 0.0, cam.width - 1.0), cv = std::clamp(v, 0.0, cam.height - 1.0);
    const int i = std::min(static_cast<int>(cu), cam.width - 2), j = std::min(static_cast<int>(cv), cam.height - 2);
    const double tu = cu - i, tv = cv - j;
    const auto& d = displacement_;
    return (1 - tv) * ((1 - tu) * d.at(i, j) + tu * d.at(i + 1, j)) + tv * ((1 - tu) * d.at(i, j + 1) + tu * d.at(i + 1, j + 1));
}

double ProceduralSdf::sample(const Vec3& p) const
{
    const double gc = base_->sample(p);
    if (std::abs(gc) > 5.0 * tau_) return gc;
    const double delta = displacement_at(p);
    if (delta == 0.0) return gc;
    const Vec3 g = base_->gradient(p);
    const double len = g.norm();
    if (!(len > 0)) return gc;
    const double outward_z = -g.z() / len;  // the field grows inward
    const double w = std::exp(-(gc / tau_) * (gc / tau_)) * std::max(0.0, outward_z);
    return gc + delta * w;
}

std::shared_ptr<const SurfaceDistanceField> coarse_field(const TriMesh& mesh, const RefineConfig& config)
{
    // 6 tau: beyond the 5 tau cutoff of the procedural term, far past the step clamp
    const double band = 6.0 * 3.0 * config.voxel();
    return std::make_shared<SurfaceDistanceField>(mesh, config.field_resolution, 3.0 * config.voxel(), model_box(),
                                                  band);
}

namespace {

// Block mean over factor x factor pixels: what a lattice of that pitch can
// represent of the displacement.
Image<double> box_reduce(const Image<double>& img, int factor)
{
    if (factor <= 1 || img.empty()) return img;
    const int w = (img.width + factor - 1) / factor, h = (img.height + factor - 1) / factor;
    Image<double> out(w, h, 0.0);
    for (int j = 0; j < h; ++j)
        for (int i = 0; i < w; ++i) {
            double sum = 0.0;
            int n = 0;
            for (int y = j * factor; y < std::min(img.height, (j + 1) * factor); ++y)
                for (int x = i * factor; x < std::min(img.width, (i + 1) * factor); ++x, ++n) sum += img.at(x, y);
            out.at(i, j) = sum / n;
        }
    return out;
}

}  // namespace

ProviderBundle procedural_providers(const RefineConfig& config)
{
    ProviderBundle b;
    b.state = std::make_shared<ProviderState>();
    const std::shared_ptr<ProviderState> state = b.state;
    b.normal_synth = [state](const SketchImage&, const DepthMap& dc) { return proc_normal_synth(*state, dc); };
    b.depth_enhance = [state](const DepthMap& current, const NormalMap&) { return proc_depth_enhance(*state, current); };
    b.sdf_provider = [state, config](const NormalMap&, const SketchImage&, const TriMesh& coarse) {
        // the implicit stage is band-limited to its lattice; finer relief is
        // left to the depth stage
        const int factor = std::max(1, config.raster / config.field_resolution);
        return std::shared_ptr<const ScalarField>(std::make_shared<ProceduralSdf>(
            coarse_field(coarse, config), box_reduce(state->residual, factor), 3.0 * config.voxel()));
    };
    b.flow_provider = [state](const DepthMap& enhanced, const DepthMap& current) {
        // align the context, not the relief: inside the stroke support the two
        // maps differ on purpose, so flow there is interpolated from around it
        FlowOptions options;
        if (state->support.same_size(enhanced.z)) options.ignore = state->support;
        return estimate_flow(enhanced, current, options).flow;
    };
    return b;
}

// ---------------------------------------------------------- implicit update

TriMesh implicit_update(const TriMesh& mesh, const ScalarField& field, double max_step, ImplicitUpdateStats* stats)
{
    return implicit_update(mesh, field, vertex_normals(mesh), max_step, stats);
}

TriMesh implicit_update(const TriMesh& mesh, const ScalarField& field, const std::vector<Vec3>& normals,
                        double max_step, ImplicitUpdateStats* stats)
{
    if (normals.size() != mesh.vertices.size()) throw std::invalid_argument("implicit_update: one normal per vertex");
    if (!(max_step > 0)) throw std::invalid_argument("implicit_update: max_step must be positive");
    const std::size_t n = mesh.vertices.size();
    ImplicitUpdateStats local;
    std::vector<Vec3> step(n);
    for (std::size_t v = 0; v < n; ++v) {
        const double g = field.sample(mesh.vertices[v]);
        const double s = std::clamp(g, -max_step, max_step);
        if (s != g) ++local.clamped;
        step[v] = s * normals[v];
    }

    std::vector<Vec3> before(mesh.triangles.size());
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const Tri& f = mesh.triangles[t];
        before[t] = (mesh.vertices[f[1]] - mesh.vertices[f[0]]).cross(mesh.vertices[f[2]] - mesh.vertices[f[0]]);
    }
    std::vector<double> scale(n, 1.0);
    std::vector<int> halvings(n, 0);
    TriMesh out = mesh;
    for (int round = 0; round <= 4; ++round) {
        for (std::size_t v = 0; v < n; ++v) out.vertices[v] = mesh.vertices[v] + scale[v] * step[v];
        std::vector<char> offending(n, 0);
        bool any = false;
        for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
            const Tri& f = mesh.triangles[t];
            const Vec3 now = (out.vertices[f[1]] - out.vertices[f[0]]).cross(out.vertices[f[2]] - out.vertices[f[0]]);
            if (before[t].squaredNorm() == 0.0 || now.dot(before[t]) > 0.0) continue;
            for (int c = 0; c < 3; ++c)
                if (scale[f[c]] > 0.0 && step[f[c]].squaredNorm() > 0.0) {
                    offending[f[c]] = 1;
                    any = true;
                }
        }
        if (!any) break;
        for (std::size_t v = 0; v < n; ++v) {
            if (!offending[v]) continue;
            if (halvings[v] < 3) {
                scale[v] *= 0.5;
                ++halvings[v];
            } else {
                scale[v] = 0.0;
            }
        }
    }
    for (std::size_t v = 0; v < n; ++v) {
        out.vertices[v] = mesh.vertices[v] + scale[v] * step[v];
        local.halved += halvings[v] > 0;
        local.frozen += scale[v] == 0.0 && step[v].squaredNorm() > 0.0;
    }
    out.normals.clear();
    if (stats) *stats = local;
    return out;
}

// --------------------------------------------------------------- point index

using BoostPoint = bg::model::point<double, 3, bg::cs::cartesian>;
using IndexedPoint = std::pair<BoostPoint, int>;

struct PointIndex::Tree {
    bgi::rtree<IndexedPoint, bgi::rstar<16>> rtree;
};

PointIndex::PointIndex() = default;
PointIndex::~PointIndex() = default;
PointIndex::PointIndex(PointIndex&&) noexcept = default;
PointIndex& PointIndex::operator=(PointIndex&&) noexcept = default;

PointIndex::PointIndex(const std::vector<Vec3>& points) : points_(points), tree_(std::make_unique<Tree>())
{
    std::vector<IndexedPoint> items;
    items.reserve(points.size());
    for (std::size_t k = 0; k < points.size(); ++k)
        items.emplace_back(BoostPoint(points[k].x(), points[k].y(), points[k].z()), static_cast<int>(k));
    tree_->rtree = bgi::rtree<IndexedPoint, bgi::rstar<16>>(items.begin(), items.end());  // packed bulk load
}

std::vector<int> PointIndex::nearest(const Vec3& p, int k) const
{
    std::vector<int> out;
    if (!tree_ || k < 1) return out;
    std::vector<IndexedPoint> hits;
    tree_->rtree.query(bgi::nearest(BoostPoint(p.x(), p.y(), p.z()), static_cast<unsigned>(k)), std::back_inserter(hits));
    std::vector<std::pair<double, int>> order;
    order.reserve(hits.size());
    for (const auto& h : hits) order.emplace_back((points_[h.second] - p).squaredNorm(), h.second);
    std::sort(order.begin(), order.end());
    for (const auto& o : order) out.push_back(o.second);
    return out;
}

// ------------------------------------------------------------------- IDW

Vec3 idw_position(const Vec3& v, const std::vector<Vec3>& cloud, const std::vector<int>& neighbours,
                  const IdwOptions& options)
{
    if (neighbours.empty()) return v;
    const double nearest = (cloud[neighbours.front()] - v).norm();
    if (nearest > options.radius) return v;
    if (nearest < options.epsilon) return cloud[neighbours.front()];
    Vec3 sum = Vec3::Zero();
    double weight = 0.0;
    for (int q : neighbours) {
        const double w = std::pow((cloud[q] - v).norm(), -options.power);
        sum += w * cloud[q];
        weight += w;
    }
    return sum / weight;
}

TriMesh idw_refine(const TriMesh& mesh, const PointCloud& cloud, const IdwOptions& options,
                   const std::vector<char>* active, int* moved)
{
    if (cloud.points.empty()) throw std::invalid_argument("idw_refine: empty point cloud");
    if (options.k < 1) throw std::invalid_argument("idw_refine: k must be >= 1");
    if (active && active->size() != mesh.vertices.size())
        throw std::invalid_argument("idw_refine: active mask size mismatch");
    const PointIndex index(cloud.points);
    TriMesh out = mesh;
    out.normals.clear();
    int count = 0;
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
        if (active && !(*active)[v]) continue;
        const Vec3& p = mesh.vertices[v];
        out.vertices[v] = idw_position(p, cloud.points, index.nearest(p, options.k), options);
        count += out.vertices[v] != p;
    }
    if (moved) *moved = count;
    return out;
}

std::vector<char> visible_vertices(const TriMesh& mesh, const DepthMap& depth, const OrthoCamera& cam, double tolerance)
{
    std::vector<char> out(mesh.vertices.size(), 0);
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
        const Vec3& p = mesh.vertices[v];
        const int i = static_cast<int>(std::floor(cam.col_of(p.x()) + 0.5));
        const int j = static_cast<int>(std::floor(cam.row_of(p.y()) + 0.5));
        if (!depth.ok(i, j)) continue;
        out[v] = p.z() >= depth.z.at(i, j) - tolerance;
    }
    return out;
}

int revert_folds(const TriMesh& before, TriMesh& after)
{
    if (before.vertices.size() != after.vertices.size() || before.triangles != after.triangles)
        throw std::invalid_argument("revert_folds: meshes differ in connectivity");
    auto normal = [](const TriMesh& m, const Tri& t) {
        return Vec3((m.vertices[t[1]] - m.vertices[t[0]]).cross(m.vertices[t[2]] - m.vertices[t[0]]));
    };
    std::vector<char> restored(after.vertices.size(), 0);
    int count = 0;
    for (bool changed = true; changed;) {
        changed = false;
        for (const Tri& t : after.triangles) {
            if (normal(after, t).dot(normal(before, t)) >= 0) continue;
            for (int v : t) {
                if (restored[v] || after.vertices[v] == before.vertices[v]) continue;
                after.vertices[v] = before.vertices[v];
                restored[v] = 1;
                ++count;
                changed = true;
            }
        }
    }
    return count;
}

Mask changed_region(const DepthMap& current, const DepthMap& guide, double tolerance, double radius_px)
{
    if (!current.z.same_size(guide.z)) throw std::invalid_argument("changed_region: raster size mismatch");
    const int w = current.z.width, h = current.z.height;
    Mask seed(w, h, 0);
    for (int j = 0; j < h; ++j)
        for (int i = 0; i < w; ++i) {
            // validity flips at the silhouette under sub-pixel warps and say
            // nothing about where the surface should go
            seed.at(i, j) = current.ok(i, j) && guide.ok(i, j) &&
                            std::abs(current.z.at(i, j) - guide.z.at(i, j)) > tolerance;
        }
    const int r = static_cast<int>(std::ceil(radius_px));
    const double r2 = radius_px * radius_px;
    Mask out(w, h, 0);
    for (int j = 0; j < h; ++j)
        for (int i = 0; i < w; ++i) {
            if (!seed.at(i, j)) continue;
            for (int dj = -r; dj <= r; ++dj)
                for (int di = -r; di <= r; ++di)
                    if (di * di + dj * dj <= r2 && out.contains(i + di, j + dj)) out.at(i + di, j + dj) = 1;
        }
    return out;
}

void restrict_to_mask(std::vector<char>& active, const TriMesh& mesh, const Mask& mask, const OrthoCamera& cam)
{
    for (std::size_t v = 0; v < active.size() && v < mesh.vertices.size(); ++v) {
        if (!active[v]) continue;
        const Vec3& p = mesh.vertices[v];
        const int i = static_cast<int>(std::floor(cam.col_of(p.x()) + 0.5));
        const int j = static_cast<int>(std::floor(cam.row_of(p.y()) + 0.5));
        active[v] = mask.contains(i, j) && mask.at(i, j);
    }
}

std::vector<int> stroke_region(const TriMesh& mesh, const std::vector<Stroke>& strokes, const OrthoCamera& cam)
{
    Mask footprint(cam.width, cam.height, 0);
    bool any = false;
    for (const Stroke& s : strokes) {
        if (s.kind == StrokeKind::contour) continue;
        const double reach = 1.5 * s.width;
        for (int j = 0; j < cam.height; ++j)
            for (int i = 0; i < cam.width; ++i)
                if (!footprint.at(i, j) && distance_to_polyline(Vec2(i + 0.5, j + 0.5), s.polyline) <= reach) {
                    footprint.at(i, j) = 1;
                    any = true;
                }
    }
    if (!any) return {};
    std::set<int> region;
    const Image<int> ids = render_triangle_ids(mesh, cam);
    for (std::size_t k = 0; k < ids.size(); ++k)
        if (footprint.data[k] && ids.data[k] >= 0) region.insert(ids.data[k]);
    // triangles smaller than a pixel may cover no pixel centre
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        if (face_normal(mesh, t).z() <= 0) continue;
        for (int c = 0; c < 3; ++c) {
            const Vec3& p = mesh.vertices[mesh.triangles[t][c]];
            const int i = static_cast<int>(std::floor(cam.col_of(p.x()) + 0.5));
            const int j = static_cast<int>(std::floor(cam.row_of(p.y()) + 0.5));
            if (footprint.contains(i, j) && footprint.at(i, j) && ids.at(i, j) >= 0) {
                region.insert(static_cast<int>(t));
                break;
            }
        }
    }
    return {region.begin(), region.end()};
}

// ------------------------------------------------------------------ refine

namespace {

FlowField negated(FlowField f)
{
    for (Vec2& v : f.data) v = -v;
    return f;
}

void dump(const RefineArtifacts& a, const std::string& dir)
{
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const fs::path d(dir);
    write_rgb_png(a.sketch, (d / "S_f.png").string());
    write_depth_png(a.coarse_depth, (d / "D_c.png").string());
    write_normal_png(a.normals, (d / "N.png").string());
    write_depth_png(a.current_depth, (d / "D_c_prime.png").string());
    write_depth_png(a.enhanced_depth, (d / "D_f.png").string());
    write_depth_png(a.warped_depth, (d / "D_f_prime.png").string());
    std::ofstream obj(d / "P.obj");
    write_obj_points(obj, a.cloud.points);
    export_obj(a.updated, (d / "M_c_prime.obj").string());
}

}  // namespace

RefineResult refine(const TriMesh& coarse, const std::vector<Stroke>& strokes, const ProviderBundle& providers,
                    const RefineConfig& config, bool keep_artifacts)
{
    const auto start = std::chrono::steady_clock::now();
    config.validate();
    if (coarse.empty()) throw std::invalid_argument("refine: empty mesh");
    if (boundary_edge_count(coarse) > 0) throw std::invalid_argument("refine: input mesh is not watertight");
    for (const Stroke& s : strokes) validate_stroke(s);
    if (!providers.normal_synth || !providers.depth_enhance || !providers.sdf_provider || !providers.flow_provider)
        throw std::invalid_argument("refine: incomplete provider bundle");

    const OrthoCamera cam{config.raster, config.raster};
    RefineResult result;
    auto art = std::make_shared<RefineArtifacts>();
    try {
        art->sketch = compose_sketch(render_contours(coarse, cam.width, cam.height), strokes);
        art->coarse_depth = render_depth(coarse, cam);

        TriMesh mesh = coarse;
        for (int level = 0; level < config.subdivision_levels; ++level) {
            const std::vector<int> region = stroke_region(mesh, strokes, cam);
            if (region.empty()) break;
            result.subdivided_triangles += static_cast<int>(region.size());
            mesh = subdivide_region(mesh, region).mesh;
        }

        if (providers.state) prepare_provider_state(*providers.state, strokes, art->coarse_depth, config);
        art->normals = providers.normal_synth(art->sketch, art->coarse_depth);

        for (int it = 0; it < config.implicit_iterations; ++it) {
            const auto field = providers.sdf_provider(art->normals, art->sketch, mesh);
            if (!field) throw std::runtime_error("sdf provider returned no field");
            mesh = implicit_update(mesh, *field, config.step_clamp_voxels * config.voxel(), &result.implicit);
        }
        art->updated = mesh;

        const IdwOptions idw{config.idw_k, config.idw_power, config.idw_epsilon,
                             config.idw_radius_px * config.pixel() + config.amplitude};
        for (int it = 0; it < config.depth_iterations; ++it) {
            art->current_depth = render_depth(mesh, cam);
            art->enhanced_depth = providers.depth_enhance(art->current_depth, art->normals);
            if (!art->enhanced_depth.z.same_size(art->current_depth.z))
                throw std::runtime_error("depth provider returned a raster of the wrong size");
            if (config.use_flow) {
                art->flow = config.flow_direction == FlowDirection::enhanced_to_current
                                ? providers.flow_provider(art->enhanced_depth, art->current_depth)
                                : negated(providers.flow_provider(art->current_depth, art->enhanced_depth));
                if (!art->flow.same_size(art->enhanced_depth.z))
                    throw std::runtime_error("flow provider returned a field of the wrong size");
                art->warped_depth = warp_depth(art->enhanced_depth, art->flow);
            } else {
                art->flow = FlowField(cam.width, cam.height, Vec2::Zero());
                art->warped_depth = art->enhanced_depth;
            }
            art->cloud = depth_to_points(art->warped_depth, cam);
            if (art->cloud.points.empty()) break;
            std::vector<char> active =
                visible_vertices(mesh, art->current_depth, cam, config.visibility_voxels * config.voxel());
            restrict_to_mask(active, mesh,
                             changed_region(art->current_depth, art->warped_depth,
                                            config.change_voxels * config.voxel(), 0.0),
                             cam);
            int moved = 0;
            TriMesh fitted = idw_refine(mesh, art->cloud, idw, &active, &moved);
            const int reverted = revert_folds(mesh, fitted);
            result.moved_vertices += moved - reverted;
            result.reverted_vertices += reverted;
            mesh = std::move(fitted);
        }
        if (boundary_edge_count(mesh) != 0) throw std::runtime_error("refinement opened the surface");
        result.mesh = std::move(mesh);
        if (!config.debug_dir.empty()) dump(*art, config.debug_dir);
    } catch (const std::exception& e) {
        result = RefineResult{};
        result.mesh = coarse;
        result.ok = false;
        result.diagnostic = e.what();
    }
    if (keep_artifacts) result.artifacts = art;
    result.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return result;
}

// ----------------------------------------------------------------- metrics

namespace {

std::vector<Vec3> sample_surface(const TriMesh& m, int samples, unsigned seed)
{
    std::vector<double> cdf(m.triangles.size());
    double total = 0;
    for (std::size_t t = 0; t < m.triangles.size(); ++t) cdf[t] = total += triangle_area(m, t);
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Vec3> out;
    out.reserve(samples);
    for (int s = 0; s < samples; ++s) {
        const double r = u(rng) * total;
        const std::size_t t = std::min<std::size_t>(std::lower_bound(cdf.begin(), cdf.end(), r) - cdf.begin(),
                                                    m.triangles.size() - 1);
        double a = u(rng), b = u(rng);
        if (a + b > 1) {
            a = 1 - a;
            b = 1 - b;
        }
        const Tri& f = m.triangles[t];
        out.push_back(m.vertices[f[0]] + a * (m.vertices[f[1]] - m.vertices[f[0]]) +
                      b * (m.vertices[f[2]] - m.vertices[f[0]]));
    }
    return out;
}

double mean_distance(const std::vector<Vec3>& points, const TriangleBVH& surface)
{
    double sum = 0;
    for (const Vec3& p : points) sum += std::sqrt(surface.closest(p).squared_distance);
    return points.empty() ? 0.0 : sum / points.size();
}

}  // namespace

double chamfer_distance(const TriMesh& a, const TriMesh& b, int samples, unsigned seed)
{
    if (a.triangles.empty() || b.triangles.empty()) throw std::invalid_argument("chamfer_distance: empty mesh");
    if (samples < 1) throw std::invalid_argument("chamfer_distance: samples must be positive");
    const TriangleBVH ba(a), bb(b);
    return 0.5 * (mean_distance(sample_surface(a, samples, seed), bb) + mean_distance(sample_surface(b, samples, seed + 1), ba));
}

}  // namespace fsk
