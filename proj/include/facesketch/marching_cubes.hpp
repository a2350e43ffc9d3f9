#pragma once

#include "facesketch/field.hpp"
#include "facesketch/mesh.hpp"

namespace fsk {

/// Zero-level isosurface of `field` sampled on a resolution^3 lattice over
/// `bounds`. Triangles are oriented toward decreasing field (outward for the
/// positive-inside convention); a field with uniform sign yields an empty mesh.
TriMesh marching_cubes(const ScalarField& field, int resolution, const Box& bounds = model_box());

/// Same, reading the lattice values of `grid` directly.
TriMesh marching_cubes(const GridField& grid);

}  // namespace fsk
