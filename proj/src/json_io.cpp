#include "facesketch/json_io.hpp"

#include <algorithm>
#include <cmath>

namespace fsk {

JsonInputError::JsonInputError(std::string location, const std::string& message)
    : std::invalid_argument((location.empty() ? std::string("/") : location) + ": " + message),
      location_(location.empty() ? "/" : std::move(location)),
      detail_(message)
{
}

Json parse_json_text(const std::string& text)
{
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        // byte is 1-based and points at the failing character
        const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(end), '\n');
        const std::size_t nl = text.rfind('\n', end == 0 ? 0 : end - 1);
        const std::size_t column = nl == std::string::npos || end == 0 ? end + 1 : end - nl;
        std::string msg = e.what();
        if (const auto pos = msg.find("parse error"); pos != std::string::npos) msg = msg.substr(pos);
        throw JsonInputError("line " + std::to_string(line) + ", column " + std::to_string(column), msg);
    }
}

namespace {

std::string member(const std::string& where, const std::string& key) { return where + "/" + key; }
std::string element(const std::string& where, std::size_t k) { return where + "/" + std::to_string(k); }

const Json& require(const Json& j, const std::string& key, const std::string& where)
{
    if (!j.is_object()) throw JsonInputError(where, "expected an object");
    const auto it = j.find(key);
    if (it == j.end()) throw JsonInputError(member(where, key), "missing member");
    return *it;
}

void require_object(const Json& j, const std::string& where)
{
    if (!j.is_object()) throw JsonInputError(where, "expected an object");
}

double as_number(const Json& j, const std::string& where)
{
    if (!j.is_number()) throw JsonInputError(where, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw JsonInputError(where, "expected a finite number");
    return v;
}

int as_int(const Json& j, const std::string& where)
{
    if (!j.is_number_integer()) throw JsonInputError(where, "expected an integer");
    return j.get<int>();
}

bool as_bool(const Json& j, const std::string& where)
{
    if (!j.is_boolean()) throw JsonInputError(where, "expected true or false");
    return j.get<bool>();
}

std::string as_string(const Json& j, const std::string& where)
{
    if (!j.is_string()) throw JsonInputError(where, "expected a string");
    return j.get<std::string>();
}

template <typename T, typename Read>
void optional(const Json& j, const std::string& key, const std::string& where, T& out, Read read)
{
    if (const auto it = j.find(key); it != j.end()) out = read(*it, member(where, key));
}

Vec2 vec2_from_json(const Json& j, const std::string& where)
{
    if (!j.is_array() || j.size() != 2) throw JsonInputError(where, "expected [x, y]");
    return {as_number(j[0], element(where, 0)), as_number(j[1], element(where, 1))};
}

Vec3 vec3_from_json(const Json& j, const std::string& where)
{
    if (!j.is_array() || j.size() != 3) throw JsonInputError(where, "expected [x, y, z]");
    return {as_number(j[0], element(where, 0)), as_number(j[1], element(where, 1)), as_number(j[2], element(where, 2))};
}

Json to_json3(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

// Rethrows library validation failures at `where`.
template <typename F>
void check(const std::string& where, F&& f)
{
    try {
        f();
    } catch (const JsonInputError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw JsonInputError(where, e.what());
    }
}

}  // namespace

Json to_json(const Vec2& p) { return Json::array({p.x(), p.y()}); }

Json to_json(const std::vector<Vec2>& polyline)
{
    Json out = Json::array();
    for (const Vec2& p : polyline) out.push_back(to_json(p));
    return out;
}

std::vector<Vec2> polyline_from_json(const Json& j, const std::string& where)
{
    if (!j.is_array()) throw JsonInputError(where, "expected an array of [x, y]");
    std::vector<Vec2> out;
    out.reserve(j.size());
    for (std::size_t k = 0; k < j.size(); ++k) out.push_back(vec2_from_json(j[k], element(where, k)));
    return out;
}

Json to_json(const Stroke& s)
{
    return {{"kind", to_string(s.kind)}, {"a", s.depth}, {"width", s.width}, {"points", to_json(s.polyline)}};
}

Stroke stroke_from_json(const Json& j, const std::string& where)
{
    Stroke s;
    const std::string kind = as_string(require(j, "kind", where), member(where, "kind"));
    check(member(where, "kind"), [&] { s.kind = stroke_kind_from_string(kind); });
    optional(j, "a", where, s.depth, as_number);
    optional(j, "width", where, s.width, as_number);
    s.polyline = polyline_from_json(require(j, "points", where), member(where, "points"));
    check(where, [&] { validate_stroke(s); });
    return s;
}

Json to_json(const PartSketch& sketch)
{
    Json layers = Json::object();
    for (const auto& [name, contour] : sketch.layers) layers[name] = to_json(contour);
    return {{"layers", layers}};
}

PartSketch part_sketch_from_json(const Json& j, const std::string& where)
{
    const Json& layers = require(j, "layers", where);
    const std::string lw = member(where, "layers");
    require_object(layers, lw);
    PartSketch sketch;
    for (const auto& [name, contour] : layers.items()) {
        const std::string at = member(lw, name);
        if (!is_part_name(name)) throw JsonInputError(at, "unknown layer name");
        sketch.layers[name] = polyline_from_json(contour, at);
        check(at, [&] { validate_contour(name, sketch.layers[name]); });
    }
    if (!sketch.layers.count("face")) throw JsonInputError(member(lw, "face"), "missing member");
    return sketch;
}

Json to_json(const PartLayout& layout)
{
    Json transforms = Json::object();
    for (const auto& [name, t] : layout.transforms)
        transforms[name] = {{"translation", to_json3(t.translation)}, {"scale", t.scale}};
    Json copies = Json::array();
    for (const PartCopy& c : layout.copies)
        copies.push_back(
            {{"source", c.source}, {"name", c.name}, {"mirror_x", c.mirror_x}, {"offset", to_json3(c.offset)}});
    return {{"transforms", transforms}, {"copies", copies}};
}

PartLayout part_layout_from_json(const Json& j, const std::string& where)
{
    require_object(j, where);
    PartLayout layout;
    if (const auto it = j.find("transforms"); it != j.end()) {
        const std::string tw = member(where, "transforms");
        require_object(*it, tw);
        for (const auto& [name, t] : it->items()) {
            const std::string at = member(tw, name);
            if (!is_part_name(name)) throw JsonInputError(at, "unknown part name");
            require_object(t, at);
            PartTransform pt;
            optional(t, "translation", at, pt.translation, vec3_from_json);
            optional(t, "scale", at, pt.scale, as_number);
            if (!(pt.scale > 0)) throw JsonInputError(member(at, "scale"), "scale must be positive");
            layout.transforms[name] = pt;
        }
    }
    if (const auto it = j.find("copies"); it != j.end()) {
        const std::string cw = member(where, "copies");
        if (!it->is_array()) throw JsonInputError(cw, "expected an array");
        for (std::size_t k = 0; k < it->size(); ++k) {
            const Json& c = (*it)[k];
            const std::string at = element(cw, k);
            PartCopy pc;
            pc.source = as_string(require(c, "source", at), member(at, "source"));
            pc.name = as_string(require(c, "name", at), member(at, "name"));
            if (!is_part_name(pc.source)) throw JsonInputError(member(at, "source"), "unknown part name");
            if (!is_part_name(pc.name)) throw JsonInputError(member(at, "name"), "unknown part name");
            optional(c, "mirror_x", at, pc.mirror_x, as_bool);
            optional(c, "offset", at, pc.offset, vec3_from_json);
            layout.copies.push_back(pc);
        }
    }
    return layout;
}

Json to_json(const RefineConfig& c)
{
    return {{"raster", c.raster},
            {"field_resolution", c.field_resolution},
            {"idw_k", c.idw_k},
            {"idw_power", c.idw_power},
            {"idw_epsilon", c.idw_epsilon},
            {"idw_radius_px", c.idw_radius_px},
            {"step_clamp_voxels", c.step_clamp_voxels},
            {"visibility_voxels", c.visibility_voxels},
            {"change_voxels", c.change_voxels},
            {"implicit_iterations", c.implicit_iterations},
            {"depth_iterations", c.depth_iterations},
            {"subdivision_levels", c.subdivision_levels},
            {"amplitude", c.amplitude},
            {"use_flow", c.use_flow},
            {"flow_direction",
             c.flow_direction == FlowDirection::enhanced_to_current ? "enhanced_to_current" : "current_to_enhanced"}};
}

RefineConfig refine_config_from_json(const Json& j, const std::string& where)
{
    require_object(j, where);
    RefineConfig c;
    optional(j, "raster", where, c.raster, as_int);
    optional(j, "field_resolution", where, c.field_resolution, as_int);
    optional(j, "idw_k", where, c.idw_k, as_int);
    optional(j, "idw_power", where, c.idw_power, as_number);
    optional(j, "idw_epsilon", where, c.idw_epsilon, as_number);
    optional(j, "idw_radius_px", where, c.idw_radius_px, as_number);
    optional(j, "step_clamp_voxels", where, c.step_clamp_voxels, as_number);
    optional(j, "visibility_voxels", where, c.visibility_voxels, as_number);
    optional(j, "change_voxels", where, c.change_voxels, as_number);
    optional(j, "implicit_iterations", where, c.implicit_iterations, as_int);
    optional(j, "depth_iterations", where, c.depth_iterations, as_int);
    optional(j, "subdivision_levels", where, c.subdivision_levels, as_int);
    optional(j, "amplitude", where, c.amplitude, as_number);
    optional(j, "use_flow", where, c.use_flow, as_bool);
    if (const auto it = j.find("flow_direction"); it != j.end()) {
        const std::string at = member(where, "flow_direction");
        const std::string d = as_string(*it, at);
        if (d == "enhanced_to_current")
            c.flow_direction = FlowDirection::enhanced_to_current;
        else if (d == "current_to_enhanced")
            c.flow_direction = FlowDirection::current_to_enhanced;
        else
            throw JsonInputError(at, "expected enhanced_to_current or current_to_enhanced");
    }
    check(where, [&] { c.validate(); });
    return c;
}

Json to_json(const CoarseOptions& o)
{
    return {{"canvas", o.canvas},
            {"beta", o.beta},
            {"part_resolution", o.part_resolution},
            {"heightfield_resolution", o.heightfield_resolution},
            {"remesh_fraction", o.remesh_fraction},
            {"remesh_iterations", o.remesh_iterations}};
}

CoarseOptions coarse_options_from_json(const Json& j, const std::string& where)
{
    require_object(j, where);
    CoarseOptions o;
    optional(j, "canvas", where, o.canvas, as_int);
    optional(j, "beta", where, o.beta, as_number);
    optional(j, "part_resolution", where, o.part_resolution, as_int);
    optional(j, "heightfield_resolution", where, o.heightfield_resolution, as_int);
    optional(j, "remesh_fraction", where, o.remesh_fraction, as_number);
    optional(j, "remesh_iterations", where, o.remesh_iterations, as_int);
    if (o.canvas < 16) throw JsonInputError(member(where, "canvas"), "must be >= 16");
    if (!(o.beta > 0)) throw JsonInputError(member(where, "beta"), "must be positive");
    if (o.part_resolution < 8) throw JsonInputError(member(where, "part_resolution"), "must be >= 8");
    if (o.heightfield_resolution < 8) throw JsonInputError(member(where, "heightfield_resolution"), "must be >= 8");
    if (!(o.remesh_fraction > 0)) throw JsonInputError(member(where, "remesh_fraction"), "must be positive");
    if (o.remesh_iterations < 0) throw JsonInputError(member(where, "remesh_iterations"), "must be >= 0");
    return o;
}

Json to_json(const ProfileOptions& o)
{
    return {{"canvas", o.canvas},
            {"rings", o.rings},
            {"handle_tolerance_px", o.handle_tolerance_px},
            {"correspondence", o.correspondence == ProfileCorrespondence::height ? "height" : "arc_length"}};
}

ProfileOptions profile_options_from_json(const Json& j, const std::string& where)
{
    require_object(j, where);
    ProfileOptions o;
    optional(j, "canvas", where, o.canvas, as_int);
    optional(j, "rings", where, o.rings, as_int);
    optional(j, "handle_tolerance_px", where, o.handle_tolerance_px, as_number);
    if (const auto it = j.find("correspondence"); it != j.end()) {
        const std::string at = member(where, "correspondence");
        const std::string c = as_string(*it, at);
        if (c == "height")
            o.correspondence = ProfileCorrespondence::height;
        else if (c == "arc_length")
            o.correspondence = ProfileCorrespondence::arc_length;
        else
            throw JsonInputError(at, "expected height or arc_length");
    }
    if (o.canvas < 16) throw JsonInputError(member(where, "canvas"), "must be >= 16");
    if (o.rings < 0) throw JsonInputError(member(where, "rings"), "must be >= 0");
    if (!(o.handle_tolerance_px > 0)) throw JsonInputError(member(where, "handle_tolerance_px"), "must be positive");
    return o;
}

Json mesh_summary(const TriMesh& mesh)
{
    const Box box = bounding_box(mesh);
    return {{"vertices", mesh.num_vertices()},
            {"triangles", mesh.num_triangles()},
            {"boundary_edges", boundary_edge_count(mesh)},
            {"components", connected_components(mesh)},
            {"watertight", is_watertight(mesh)},
            {"bbox", {{"min", to_json3(box.min)}, {"max", to_json3(box.max)}}}};
}

}  // namespace fsk
