#pragma once

#include "facesketch/image.hpp"
#include "facesketch/mesh.hpp"

namespace fsk {

/// Z-buffered rasterization of the front-facing triangles (max z wins).
/// Coverage is sampled at pixel centres with a top-left tie rule, so pixels on
/// a shared edge belong to exactly one triangle.
DepthMap render_depth(const TriMesh& mesh, const OrthoCamera& cam);

/// Per-pixel triangle id of the visible surface, -1 for background.
Image<int> render_triangle_ids(const TriMesh& mesh, const OrthoCamera& cam);

/// n ~ (-dz/dx, -dz/dy, 1) from central differences in model units, one-sided
/// at mask borders. Always unit length and front-facing on valid pixels.
NormalMap normal_from_depth(const DepthMap& depth, const OrthoCamera& cam);

struct FlowOptions {
    int levels = 5;               // 32 px coarsest at 512: a 4 px diagonal shift is under 0.2 px there
    double alpha = 10.0;          // smoothness weight on [0,255] intensities
    int iterations = 100;         // per level
    int warps_per_level = 4;      // re-linearizations sharing the iteration budget
    double relaxation = 1.9;      // SOR factor
    /// Optional, same size as the maps: nonzero pixels drop the data term, so
    /// flow there is filled in by the smoothness term alone.
    Mask ignore;
};

struct FlowResult {
    FlowField flow;
    /// Set when the two valid regions do not overlap; flow is then zero.
    bool disjoint = false;
};

/// Coarse-to-fine Horn-Schunck flow with dst(p) ~ src(p + flow(p)).
/// Flow is zero where dst is invalid.
FlowResult estimate_flow(const DepthMap& src, const DepthMap& dst, const FlowOptions& options = {});

/// Gather warp: out(p) = depth(p + flow(p)) by bilinear interpolation over
/// the taps with nonzero weight; invalid when any such tap is invalid or the
/// sample leaves the raster.
DepthMap warp_depth(const DepthMap& depth, const FlowField& flow);

/// One point per valid pixel with i % stride == 0 and j % stride == 0.
PointCloud depth_to_points(const DepthMap& depth, const OrthoCamera& cam, int stride = 1,
                           const NormalMap* normals = nullptr);

/// Replaces the valid pixels of `region` by the smoothest continuation of the
/// surrounding depth (least-squares zero Laplacian, i.e. discrete biharmonic):
/// planes and quadratics are reproduced exactly away from the mask border.
DepthMap fill_region_smooth(const DepthMap& depth, const Mask& region);

/// Shape preview: normals of the (stroke-displaced) depth.
NormalMap render_normal_preview(const DepthMap& depth, const OrthoCamera& cam);

}  // namespace fsk
