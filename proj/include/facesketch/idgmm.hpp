#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "facesketch/field.hpp"
#include "facesketch/image.hpp"
#include "facesketch/mesh.hpp"
#include "facesketch/mesh_to_field.hpp"
#include "facesketch/strokes.hpp"

namespace fsk {

/// Which way the depth alignment runs. `enhanced_to_current` warps D_f onto
/// the geometry of M'_c (the default); `current_to_enhanced` estimates the
/// opposite flow and applies its negation.
enum class FlowDirection { enhanced_to_current, current_to_enhanced };

struct RefineConfig {
    int raster = 512;
    int field_resolution = 128;
    int idw_k = 8;
    double idw_power = 2.0;
    double idw_epsilon = 1e-7;
    /// Search radius in raster pixels, widened by `amplitude` so a vertex one
    /// full stroke displacement away from the depth surface still qualifies.
    double idw_radius_px = 4.0;
    double step_clamp_voxels = 2.0;
    /// A vertex is refined only if it is visible in D'_c within this depth
    /// tolerance (voxels of the fine field).
    double visibility_voxels = 2.0;
    /// A vertex is refined only where D'_f and D'_c differ at its pixel by
    /// more than this (voxels); vertices already on their guidance depth keep
    /// their M'_c position.
    double change_voxels = 0.05;
    int implicit_iterations = 1;
    int depth_iterations = 1;
    int subdivision_levels = 3;
    double amplitude = 0.06;
    bool use_flow = true;
    FlowDirection flow_direction = FlowDirection::enhanced_to_current;
    /// Empty: no dumps. Otherwise D_c, N, D'_c, D_f, D'_f, S_f as PNG and P as OBJ.
    std::string debug_dir;

    double voxel() const { return 2.0 / field_resolution; }
    double pixel() const { return 2.0 / raster; }
    /// Throws std::invalid_argument on out-of-range values.
    void validate() const;
};

/// Stroke state shared by the procedural providers so that normals, depth
/// and the implicit field agree on one displacement raster.
struct ProviderState {
    Image<double> displacement;  // model units, per raster pixel
    Mask support;
    /// D_c with the support replaced by its smooth continuation: the coarse
    /// surface without any relief left by earlier refinements.
    DepthMap base_depth;
    /// Target depth minus D_c on the support, 0 elsewhere: what the implicit
    /// stage still has to add. Equals the displacement on a relief-free D_c.
    Image<double> residual;
};

struct ProviderBundle {
    std::function<NormalMap(const SketchImage& sketch, const DepthMap& coarse_depth)> normal_synth;
    std::function<DepthMap(const DepthMap& current_depth, const NormalMap& normals)> depth_enhance;
    std::function<std::shared_ptr<const ScalarField>(const NormalMap& normals, const SketchImage& sketch,
                                                     const TriMesh& coarse)>
        sdf_provider;
    /// Flow with dst(p) ~ src(p + flow(p)) for src = D_f, dst = D'_c.
    std::function<FlowField(const DepthMap& enhanced, const DepthMap& current)> flow_provider;
    std::shared_ptr<ProviderState> state;
};

/// Deterministic reference providers. `refine` fills the shared state from
/// the stroke list before calling them.
ProviderBundle procedural_providers(const RefineConfig& config = {});

/// Sets the displacement raster and support from `strokes`, the relief-free
/// base from D_c and the residual toward base + displacement.
void prepare_provider_state(ProviderState& state, const std::vector<Stroke>& strokes, const DepthMap& coarse_depth,
                            const RefineConfig& config);

/// N = normals of the target surface: base + displacement on the support,
/// D_c elsewhere.
NormalMap proc_normal_synth(const ProviderState& state, const DepthMap& coarse_depth);

/// D_f: base + displacement on the stroke support, D'_c elsewhere; validity
/// copied from D'_c. Repeating a refinement with the same strokes therefore
/// aims at the same surface instead of stacking relief.
DepthMap proc_depth_enhance(const ProviderState& state, const DepthMap& current_depth);

/// g = g_c + displacement(pi(p)) * w(p) with w = exp(-(g_c/tau)^2) * max(0, n_z),
/// n the outward unit normal of g_c and tau = 3 voxels. Exactly g_c where
/// |g_c| > 5 tau.
class ProceduralSdf final : public ScalarField {
public:
    ProceduralSdf(std::shared_ptr<const ScalarField> base, Image<double> displacement, double tau);

    double sample(const Vec3& p) const override;
    double tau() const { return tau_; }
    const ScalarField& base() const { return *base_; }

private:
    double displacement_at(const Vec3& p) const;

    std::shared_ptr<const ScalarField> base_;
    Image<double> displacement_;
    double tau_;
};

/// Coarse field of the fine stage: exact near `mesh`, a lazily evaluated
/// lattice truncated well outside the update band elsewhere.
std::shared_ptr<const SurfaceDistanceField> coarse_field(const TriMesh& mesh, const RefineConfig& config);

struct ImplicitUpdateStats {
    int clamped = 0;  // vertices whose step hit the clamp
    int halved = 0;   // vertices that needed at least one half step
    int frozen = 0;   // vertices left in place after three halvings
};

/// One pass of v' = v + clamp(g(v), +-max_step) n(v), n the area-weighted
/// outward vertex normal. Vertices whose move turns an incident face normal
/// by more than 90 degrees retry with half steps, at most three times.
TriMesh implicit_update(const TriMesh& mesh, const ScalarField& field, double max_step,
                        ImplicitUpdateStats* stats = nullptr);
/// Same with explicit per-vertex unit directions.
TriMesh implicit_update(const TriMesh& mesh, const ScalarField& field, const std::vector<Vec3>& normals,
                        double max_step, ImplicitUpdateStats* stats = nullptr);

/// K-nearest-neighbour index over 3D points (R-tree backed).
class PointIndex {
public:
    PointIndex();
    explicit PointIndex(const std::vector<Vec3>& points);
    ~PointIndex();
    PointIndex(PointIndex&&) noexcept;
    PointIndex& operator=(PointIndex&&) noexcept;

    /// Up to k indices ordered by (distance, index).
    std::vector<int> nearest(const Vec3& p, int k) const;
    std::size_t size() const { return points_.size(); }
    const std::vector<Vec3>& points() const { return points_; }

private:
    struct Tree;
    std::vector<Vec3> points_;
    std::unique_ptr<Tree> tree_;
};

struct IdwOptions {
    int k = 8;
    double power = 2.0;
    double epsilon = 1e-7;
    double radius = std::numeric_limits<double>::infinity();
};

/// New position of `v` from its K nearest cloud points: the exact point if
/// one lies closer than epsilon, else the inverse-distance weighted mean.
/// Returns `v` when the nearest point is farther than the radius.
Vec3 idw_position(const Vec3& v, const std::vector<Vec3>& cloud, const std::vector<int>& neighbours,
                  const IdwOptions& options);

/// Moves every active vertex (all when `active` is null) by idw_position.
/// Throws std::invalid_argument for an empty cloud or k < 1.
TriMesh idw_refine(const TriMesh& mesh, const PointCloud& cloud, const IdwOptions& options,
                   const std::vector<char>* active = nullptr, int* moved = nullptr);

/// Vertices whose pixel is valid in `depth` and whose z is within `tolerance`
/// of the rendered surface (or in front of it).
std::vector<char> visible_vertices(const TriMesh& mesh, const DepthMap& depth, const OrthoCamera& cam,
                                   double tolerance);

/// Restores, from `before`, every vertex of a triangle whose normal in
/// `after` turned by more than 90 degrees, repeating until no such triangle
/// is left. Returns the number of restored vertices.
int revert_folds(const TriMesh& before, TriMesh& after);

/// Pixels valid in both rasters whose depths differ by more than
/// `tolerance`, dilated by a disk of `radius_px`.
Mask changed_region(const DepthMap& current, const DepthMap& guide, double tolerance, double radius_px);

/// Active vertices whose rounded pixel is set in `mask`; the others are cleared.
void restrict_to_mask(std::vector<char>& active, const TriMesh& mesh, const Mask& mask, const OrthoCamera& cam);

/// Front-facing triangles covering a pixel within 1.5 stroke widths of a
/// ridge or valley polyline (the stroke footprint dilated by its width).
std::vector<int> stroke_region(const TriMesh& mesh, const std::vector<Stroke>& strokes, const OrthoCamera& cam);

struct RefineArtifacts {
    SketchImage sketch;
    DepthMap coarse_depth, current_depth, enhanced_depth, warped_depth;
    NormalMap normals;
    FlowField flow;
    PointCloud cloud;
    TriMesh updated;  // M'_c
};

struct RefineResult {
    TriMesh mesh;
    bool ok = true;
    std::string diagnostic;
    int subdivided_triangles = 0;
    int moved_vertices = 0;
    int reverted_vertices = 0;  // IDW moves undone by the fold guard
    ImplicitUpdateStats implicit;
    double wall_ms = 0.0;
    /// Filled only when requested.
    std::shared_ptr<RefineArtifacts> artifacts;
};

/// Implicit-guided update followed by flow-aligned depth-guided refinement.
/// A provider failure returns the input mesh with ok = false and a diagnostic.
/// Throws std::invalid_argument for an open input mesh or invalid strokes.
RefineResult refine(const TriMesh& coarse, const std::vector<Stroke>& strokes, const ProviderBundle& providers,
                    const RefineConfig& config = {}, bool keep_artifacts = false);

/// Symmetric mean nearest-surface distance between area-uniform samples of
/// both meshes (`samples` per mesh, fixed seed).
double chamfer_distance(const TriMesh& a, const TriMesh& b, int samples = 20000, unsigned seed = 7);

}  // namespace fsk
