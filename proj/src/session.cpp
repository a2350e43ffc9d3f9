#include "facesketch/session.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "facesketch/image.hpp"
#include "facesketch/imageops.hpp"

namespace fsk {

ProjectVersionError::ProjectVersionError(int found, int supported)
    : std::runtime_error("project schema version " + std::to_string(found) + " needs migration to version " +
                         std::to_string(supported) + "; no migration is defined"),
      found_(found),
      supported_(supported)
{
}

std::vector<Stroke> strokes_of(const std::vector<TimedStroke>& log)
{
    std::vector<Stroke> out;
    out.reserve(log.size());
    for (const TimedStroke& s : log) out.push_back(s.stroke);
    return out;
}

// ------------------------------------------------------------------ JSON

Json project_to_json(const Project& p)
{
    Json edits = Json::array();
    for (const ProfileEditRecord& e : p.profile_edits) edits.push_back({{"t", e.t}, {"target", to_json(e.target)}});
    Json strokes = Json::array();
    for (const TimedStroke& s : p.strokes) {
        Json j = to_json(s.stroke);
        j["t"] = s.t;
        strokes.push_back(std::move(j));
    }
    return {{"schema_version", p.schema_version},
            {"sketch", to_json(p.sketch)},
            {"layout", to_json(p.layout)},
            {"profile_edits", edits},
            {"strokes", strokes},
            {"config",
             {{"refine", to_json(p.config.refine)},
              {"coarse", to_json(p.config.coarse)},
              {"profile", to_json(p.config.profile)}}}};
}

namespace {

double timestamp(const Json& j, const std::string& where)
{
    const auto it = j.find("t");
    if (it == j.end()) return 0.0;
    if (!it->is_number()) throw JsonInputError(where + "/t", "expected a number");
    return it->get<double>();
}

}  // namespace

Project project_from_json(const Json& j)
{
    if (!j.is_object()) throw JsonInputError("/", "expected an object");
    const auto version = j.find("schema_version");
    if (version == j.end()) throw JsonInputError("/schema_version", "missing member");
    if (!version->is_number_integer()) throw JsonInputError("/schema_version", "expected an integer");
    if (version->get<int>() != kProjectSchemaVersion) throw ProjectVersionError(version->get<int>(), kProjectSchemaVersion);

    Project p;
    if (const auto it = j.find("sketch"); it != j.end()) {
        // an empty sketch is a project that has not been started
        if (it->is_object() && it->contains("layers") && (*it)["layers"].is_object() && (*it)["layers"].empty())
            p.sketch = {};
        else
            p.sketch = part_sketch_from_json(*it, "/sketch");
    }
    if (const auto it = j.find("layout"); it != j.end()) p.layout = part_layout_from_json(*it, "/layout");
    if (const auto it = j.find("profile_edits"); it != j.end()) {
        if (!it->is_array()) throw JsonInputError("/profile_edits", "expected an array");
        for (std::size_t k = 0; k < it->size(); ++k) {
            const std::string at = "/profile_edits/" + std::to_string(k);
            const Json& e = (*it)[k];
            if (!e.is_object() || !e.contains("target")) throw JsonInputError(at + "/target", "missing member");
            p.profile_edits.push_back({polyline_from_json(e["target"], at + "/target"), timestamp(e, at)});
        }
    }
    if (const auto it = j.find("strokes"); it != j.end()) {
        if (!it->is_array()) throw JsonInputError("/strokes", "expected an array");
        for (std::size_t k = 0; k < it->size(); ++k) {
            const std::string at = "/strokes/" + std::to_string(k);
            p.strokes.push_back({stroke_from_json((*it)[k], at), timestamp((*it)[k], at)});
        }
    }
    if (const auto it = j.find("config"); it != j.end()) {
        if (!it->is_object()) throw JsonInputError("/config", "expected an object");
        if (const auto c = it->find("refine"); c != it->end()) p.config.refine = refine_config_from_json(*c, "/config/refine");
        if (const auto c = it->find("coarse"); c != it->end()) p.config.coarse = coarse_options_from_json(*c, "/config/coarse");
        if (const auto c = it->find("profile"); c != it->end())
            p.config.profile = profile_options_from_json(*c, "/config/profile");
    }
    return p;
}

std::string project_to_string(const Project& project) { return project_to_json(project).dump(1) + "\n"; }

Project project_from_string(const std::string& text) { return project_from_json(parse_json_text(text)); }

void save_project(const Project& project, const std::string& path)
{
    const std::string text = project_to_string(project);
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + tmp + " for writing");
        out << text;
        if (!out.flush()) throw std::runtime_error("write failed: " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw std::runtime_error("cannot replace " + path);
    }
}

Project load_project(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open project: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return project_from_string(ss.str());
}

// -------------------------------------------------------------- pipeline

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) { return std::chrono::duration<double, std::milli>(Clock::now() - t0).count(); }

StageReport report(std::string stage, const TriMesh& m, Clock::time_point t0)
{
    return {std::move(stage), m.num_vertices(), m.num_triangles(), boundary_edge_count(m), ms_since(t0)};
}

struct CoarseStage {
    PartMeshes parts;
    TriMesh mesh;
};

CoarseStage coarse_stage(const Project& p, std::vector<StageReport>* reports)
{
    CoarseStage out;
    if (p.sketch.layers.empty()) {
        if (!p.profile_edits.empty()) throw std::invalid_argument("profile edits without a sketch");
        return out;
    }
    auto t0 = Clock::now();
    const PartMeshes raw = generate_parts(p.sketch, p.config.coarse);
    if (reports)
        for (const auto& [name, mesh] : raw) reports->push_back(report("part:" + name, mesh, t0));

    t0 = Clock::now();
    out.parts = apply_layout(raw, p.layout);
    if (reports) {
        TriMesh all;
        for (const auto& [name, mesh] : out.parts) {
            const int base = static_cast<int>(all.vertices.size());
            all.vertices.insert(all.vertices.end(), mesh.vertices.begin(), mesh.vertices.end());
            for (Tri t : mesh.triangles) all.triangles.push_back({t[0] + base, t[1] + base, t[2] + base});
        }
        reports->push_back(report("layout", all, t0));
    }

    t0 = Clock::now();
    out.mesh = merge_parts(out.parts, p.config.coarse);
    if (reports) reports->push_back(report("merge", out.mesh, t0));

    for (std::size_t k = 0; k < p.profile_edits.size(); ++k) {
        t0 = Clock::now();
        out.mesh = profile_depth_edit(out.mesh, p.profile_edits[k].target, p.config.profile).mesh;
        if (reports) reports->push_back(report("profile:" + std::to_string(k), out.mesh, t0));
    }
    return out;
}

RefineResult refine_stage(const TriMesh& coarse, const Project& p, const std::string& debug_dir)
{
    RefineConfig cfg = p.config.refine;
    cfg.debug_dir = debug_dir;
    RefineResult r = refine(coarse, strokes_of(p.strokes), procedural_providers(cfg), cfg);
    if (!r.ok) throw std::runtime_error("refine failed: " + r.diagnostic);
    return r;
}

OrthoCamera raster_camera(const RefineConfig& c) { return OrthoCamera{c.raster, c.raster}; }

}  // namespace

PipelineOutput run_pipeline(const Project& project, const PipelineOptions& options)
{
    if (project.schema_version != kProjectSchemaVersion)
        throw ProjectVersionError(project.schema_version, kProjectSchemaVersion);
    PipelineOutput out;
    CoarseStage c = coarse_stage(project, &out.stages);
    out.parts = std::move(c.parts);
    out.coarse = std::move(c.mesh);
    if (out.coarse.empty() || !options.refine) return out;
    if (project.strokes.empty()) {
        out.fine = out.coarse;
        return out;
    }
    const auto t0 = Clock::now();
    out.refine = refine_stage(out.coarse, project, options.debug_dir);
    out.fine = out.refine.mesh;
    out.stages.push_back(report("refine", *out.fine, t0));
    return out;
}

std::vector<std::uint8_t> stroke_preview_png(const DepthMap& coarse_depth, const std::vector<Stroke>& strokes,
                                             const RefineConfig& config)
{
    ProviderState state;
    prepare_provider_state(state, strokes, coarse_depth, config);
    return encode_rgb_png(normal_map_to_rgb(proc_normal_synth(state, coarse_depth)));
}

// --------------------------------------------------------------- session

ModelingSession::ModelingSession() : ModelingSession(Project{}) {}

ModelingSession::ModelingSession(Project project, std::string debug_dir) : debug_dir_(std::move(debug_dir))
{
    load(std::move(project));
}

ModelingSession::Coarse ModelingSession::build_coarse(const Project& p) const
{
    CoarseStage stage = coarse_stage(p, nullptr);
    Coarse c{std::move(stage.parts), std::move(stage.mesh), {}};
    if (!c.mesh.empty()) c.depth = render_depth(c.mesh, raster_camera(p.config.refine));
    return c;
}

void ModelingSession::commit(Project p, Coarse c)
{
    std::vector<std::uint8_t> preview;
    if (!c.mesh.empty()) preview = stroke_preview_png(c.depth, strokes_of(p.strokes), p.config.refine);
    project_ = std::move(p);
    parts_ = std::move(c.parts);
    coarse_ = std::move(c.mesh);
    coarse_depth_ = std::move(c.depth);
    preview_ = std::move(preview);
    fine_.reset();
    last_refine_ = {};
}

void ModelingSession::load(Project project)
{
    if (project.schema_version != kProjectSchemaVersion)
        throw ProjectVersionError(project.schema_version, kProjectSchemaVersion);
    Coarse c = build_coarse(project);
    std::optional<TriMesh> fine;
    RefineResult r;
    if (!c.mesh.empty()) {
        if (project.strokes.empty()) {
            fine = c.mesh;
        } else {
            r = refine_stage(c.mesh, project, debug_dir_);
            fine = r.mesh;
        }
    }
    commit(std::move(project), std::move(c));
    fine_ = std::move(fine);
    last_refine_ = std::move(r);
}

void ModelingSession::set_sketch(PartSketch sketch)
{
    validate_part_sketch(sketch);
    Project p = project_;
    p.sketch = std::move(sketch);
    Coarse c = build_coarse(p);
    commit(std::move(p), std::move(c));
}

void ModelingSession::set_layout(PartLayout layout)
{
    Project p = project_;
    p.layout = std::move(layout);
    if (p.sketch.layers.empty()) {
        // validated against the parts once a sketch arrives
        commit(std::move(p), Coarse{});
        return;
    }
    Coarse c = build_coarse(p);
    commit(std::move(p), std::move(c));
}

void ModelingSession::set_config(ProjectConfig config)
{
    config.refine.validate();
    Project p = project_;
    p.config = std::move(config);
    Coarse c = build_coarse(p);
    commit(std::move(p), std::move(c));
}

void ModelingSession::add_profile_edit(ProfileEditRecord edit)
{
    if (!has_coarse()) throw SessionStateError("profile edit needs a coarse mesh");
    Project p = project_;
    Coarse c{parts_, profile_depth_edit(coarse_, edit.target, p.config.profile).mesh, {}};
    c.depth = render_depth(c.mesh, raster_camera(p.config.refine));
    p.profile_edits.push_back(std::move(edit));
    commit(std::move(p), std::move(c));
}

const std::vector<std::uint8_t>& ModelingSession::add_strokes(const std::vector<TimedStroke>& strokes)
{
    if (!has_coarse()) throw SessionStateError("strokes need a coarse mesh");
    if (strokes.empty()) return preview_;
    for (const TimedStroke& s : strokes) validate_stroke(s.stroke);
    Project p = project_;
    p.strokes.insert(p.strokes.end(), strokes.begin(), strokes.end());
    std::vector<std::uint8_t> preview = stroke_preview_png(coarse_depth_, strokes_of(p.strokes), p.config.refine);
    project_ = std::move(p);
    preview_ = std::move(preview);
    fine_.reset();
    return preview_;
}

const TriMesh& ModelingSession::refine()
{
    if (!has_coarse()) throw SessionStateError("refine needs a coarse mesh");
    if (project_.strokes.empty()) {
        last_refine_ = {};
        last_refine_.mesh = coarse_;
        fine_ = coarse_;
        return *fine_;
    }
    RefineResult r = refine_stage(coarse_, project_, debug_dir_);
    fine_ = r.mesh;
    last_refine_ = std::move(r);
    return *fine_;
}

void ModelingSession::truncate(std::size_t profile_edits, std::size_t strokes)
{
    Project p = project_;
    if (profile_edits < p.profile_edits.size()) p.profile_edits.resize(profile_edits);
    if (strokes < p.strokes.size()) p.strokes.resize(strokes);
    Coarse c = build_coarse(p);
    commit(std::move(p), std::move(c));
}

}  // namespace fsk
