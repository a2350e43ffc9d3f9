#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "facesketch/coarse.hpp"
#include "facesketch/idgmm.hpp"
#include "facesketch/strokes.hpp"

namespace fsk {

using Json = nlohmann::json;

/// Malformed or ill-typed input. `location` is "line L, column C" for syntax
/// errors and a JSON pointer ("/strokes/3/a") for schema errors.
class JsonInputError : public std::invalid_argument {
public:
    JsonInputError(std::string location, const std::string& message);
    const std::string& location() const { return location_; }
    const std::string& detail() const { return detail_; }

private:
    std::string location_;
    std::string detail_;
};

/// Syntax errors carry the line and column of the failure.
Json parse_json_text(const std::string& text);

// Every *_from_json throws JsonInputError with `where` extended to the
// offending member. Missing optional members take their C++ defaults.

Json to_json(const Vec2& p);
Json to_json(const std::vector<Vec2>& polyline);
std::vector<Vec2> polyline_from_json(const Json& j, const std::string& where = "");

/// {kind, a, width, points}
Json to_json(const Stroke& stroke);
Stroke stroke_from_json(const Json& j, const std::string& where = "");

/// {layers: {name: [[x, y], ...]}}
Json to_json(const PartSketch& sketch);
PartSketch part_sketch_from_json(const Json& j, const std::string& where = "");

/// {transforms: {name: {translation, scale}}, copies: [{source, name, mirror_x, offset}]}
Json to_json(const PartLayout& layout);
PartLayout part_layout_from_json(const Json& j, const std::string& where = "");

/// Every field except debug_dir, which is a runtime setting.
Json to_json(const RefineConfig& config);
RefineConfig refine_config_from_json(const Json& j, const std::string& where = "");

Json to_json(const CoarseOptions& options);
CoarseOptions coarse_options_from_json(const Json& j, const std::string& where = "");

Json to_json(const ProfileOptions& options);
ProfileOptions profile_options_from_json(const Json& j, const std::string& where = "");

/// {vertices, triangles, boundary_edges, components, watertight, bbox: {min, max}}
Json mesh_summary(const TriMesh& mesh);

}  // namespace fsk
