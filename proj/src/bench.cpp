#include "facesketch/bench.hpp"

#include <chrono>
#include <sstream>

#include "facesketch/imageops.hpp"
#include "facesketch/marching_cubes.hpp"
#include "facesketch/mesh_to_field.hpp"

namespace fsk {

namespace {

double ms_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

BenchReport bench_mc_vs_idgmm(const ScalarField& shape, const std::vector<Stroke>& strokes,
                              const BenchOptions& options)
{
    if (options.coarse_grid < 2 || options.mc_grid < 2) throw std::invalid_argument("bench: grid below 2");
    const RefineConfig& cfg = options.refine;
    cfg.validate();
    const TriMesh coarse = marching_cubes(shape, options.coarse_grid);
    if (coarse.empty()) throw std::invalid_argument("bench: shape has no surface inside the model box");

    BenchReport report;
    report.coarse_vertices = coarse.num_vertices();

    {
        const ProviderBundle providers = procedural_providers(cfg);
        const auto t0 = std::chrono::steady_clock::now();
        const RefineResult r = refine(coarse, strokes, providers, cfg);
        report.idgmm = {"idgmm", cfg.field_resolution, ms_since(t0), r.mesh.num_vertices(), r.mesh.num_triangles()};
        if (!r.ok) throw std::runtime_error("bench: refine failed: " + r.diagnostic);
    }

    {
        // Same field the refinement deforms toward, built on the same coarse mesh.
        const ProviderBundle providers = procedural_providers(cfg);
        const OrthoCamera cam{cfg.raster, cfg.raster};
        const DepthMap depth = render_depth(coarse, cam);
        prepare_provider_state(*providers.state, strokes, depth, cfg);
        const auto t0 = std::chrono::steady_clock::now();
        const auto field = providers.sdf_provider(NormalMap{}, SketchImage{}, coarse);
        const TriMesh mc = marching_cubes(*field, options.mc_grid);
        report.marching_cubes = {"marching_cubes", options.mc_grid, ms_since(t0), mc.num_vertices(), mc.num_triangles()};
    }
    return report;
}

std::shared_ptr<const ScalarField> bench_shape(const std::string& name)
{
    if (name == "sphere") return std::make_shared<SphereField>(Vec3::Zero(), 0.6);
    if (name == "ellipsoid") return std::make_shared<EllipsoidField>(Vec3::Zero(), Vec3(0.55, 0.7, 0.5));
    const TriMesh mesh = import_obj(name);
    return std::make_shared<MeshDistanceField>(mesh, 128);
}

std::string bench_csv(const BenchReport& report)
{
    std::ostringstream out;
    out << "method,grid,wall_ms,vertices,triangles\n";
    for (const BenchRow* row : {&report.idgmm, &report.marching_cubes})
        out << row->method << ',' << row->grid << ',' << row->wall_ms << ',' << row->vertices << ',' << row->triangles
            << '\n';
    return out.str();
}

}  // namespace fsk
