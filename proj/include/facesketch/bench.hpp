#pragma once

#include <memory>
#include <string>
#include <vector>

#include "facesketch/field.hpp"
#include "facesketch/idgmm.hpp"

namespace fsk {

struct BenchRow {
    std::string method;  // "idgmm" or "marching_cubes"
    int grid = 0;        // lattice resolution the method worked at
    double wall_ms = 0.0;
    std::size_t vertices = 0;
    std::size_t triangles = 0;
};

struct BenchOptions {
    int coarse_grid = 64;  // extraction of the coarse mesh, untimed
    int mc_grid = 256;
    RefineConfig refine;   // field_resolution and raster of the IDGMM pass
};

struct BenchReport {
    BenchRow idgmm;
    BenchRow marching_cubes;
    std::size_t coarse_vertices = 0;

    /// Marching-cubes time over refinement time.
    double ratio() const { return idgmm.wall_ms > 0.0 ? marching_cubes.wall_ms / idgmm.wall_ms : 0.0; }
};

/// Times one refinement pass of the coarse extraction of `shape` with
/// `strokes` against marching cubes at mc_grid^3 of the fine implicit field
/// that pass deforms toward (procedural providers), on this machine.
BenchReport bench_mc_vs_idgmm(const ScalarField& shape, const std::vector<Stroke>& strokes,
                              const BenchOptions& options = {});

/// "sphere" (radius 0.6), "ellipsoid" (radii 0.55, 0.7, 0.5) or a path to a
/// closed OBJ, whose signed distance is taken at 128^3.
std::shared_ptr<const ScalarField> bench_shape(const std::string& name);

/// Header plus one line per method: method,grid,wall_ms,vertices,triangles.
std::string bench_csv(const BenchReport& report);

}  // namespace fsk
