#pragma once

#include <string>
#include <vector>

#include "facesketch/idgmm.hpp"
#include "facesketch/session.hpp"

namespace fsk {

/// Smooth closed stand-in for a coarse head: an icosphere of radius 0.6
/// flattened to 0.8 in z (2562 vertices).
TriMesh bump_head();

/// `coarse` with its visible front displaced toward the viewer by the stroke
/// displacement raster: the surface a perfect refinement would produce.
/// Triangles within 3 sigma + `margin_px` of a stroke are subdivided
/// `levels` times first so the relief is resolved.
TriMesh displaced_target(const TriMesh& coarse, const std::vector<Stroke>& strokes, const RefineConfig& config,
                         int levels = 5, double margin_px = 12.0);

struct BumpCase {
    std::string name;
    TriMesh coarse;
    std::vector<Stroke> strokes;
    TriMesh target;
};

/// Three fixed cases: a straight ridge, a diagonal valley, and a curved ridge
/// with a short valley above it.
std::vector<BumpCase> bump_suite(const RefineConfig& config = {});

enum class Guidance { combined, implicit_only, depth_only };

const char* to_string(Guidance g);

/// `config` with the iteration count of the dropped stage set to 0.
RefineConfig with_guidance(RefineConfig config, Guidance g);

/// Depth map translated by (dx, dy) pixels; uncovered pixels become invalid.
DepthMap shift_depth(const DepthMap& depth, int dx, int dy);

/// Procedural providers whose depth enhancement is misregistered by
/// (dx, dy) pixels.
ProviderBundle shifted_providers(const RefineConfig& config, int dx, int dy);

/// Closed polyline of `n` segments (first point repeated at the end).
std::vector<Vec2> circle_contour(double cx, double cy, double radius, int n = 96);

/// Face circle of radius 128 px centred on the 512 canvas with two ear
/// circles of radius 30 px at its sides.
PartSketch demo_sketch();

/// Both ears scaled by 1.15 and raised by 0.04.
PartLayout demo_layout();

/// Silhouette of `coarse` pushed 25 px toward the viewer around canvas row
/// 300 (a nose bump).
std::vector<Vec2> demo_profile_target(const TriMesh& coarse, const ProfileOptions& options = {});

/// Brow ridge, nose ridge and mouth valley on the 512 raster.
std::vector<Stroke> demo_strokes();

/// demo_sketch, demo_layout, one demo profile edit and the three demo
/// strokes, with default configuration.
Project demo_project();

}  // namespace fsk
