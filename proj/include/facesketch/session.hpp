#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "facesketch/coarse.hpp"
#include "facesketch/idgmm.hpp"
#include "facesketch/json_io.hpp"
#include "facesketch/strokes.hpp"

namespace fsk {

inline constexpr int kProjectSchemaVersion = 1;

struct TimedStroke {
    Stroke stroke;
    double t = 0.0;  // seconds, caller-defined origin

    bool operator==(const TimedStroke&) const = default;
};

struct ProfileEditRecord {
    std::vector<Vec2> target;  // side-canvas pixels, top to bottom
    double t = 0.0;

    bool operator==(const ProfileEditRecord&) const = default;
};

struct ProjectConfig {
    RefineConfig refine;
    CoarseOptions coarse;
    ProfileOptions profile;
};

/// Input log of a modeling session. The meshes are derived from it by
/// run_pipeline and are never persisted.
struct Project {
    int schema_version = kProjectSchemaVersion;
    PartSketch sketch;  // no layers: nothing modeled yet
    PartLayout layout;
    std::vector<ProfileEditRecord> profile_edits;
    std::vector<TimedStroke> strokes;
    ProjectConfig config;
};

/// Thrown by load for a file written under another schema version.
class ProjectVersionError : public std::runtime_error {
public:
    ProjectVersionError(int found, int supported);
    int found() const { return found_; }
    int supported() const { return supported_; }

private:
    int found_, supported_;
};

/// Numbers are written in shortest round-trip form, so coordinates reload
/// bit-exactly.
Json project_to_json(const Project& project);
/// Throws ProjectVersionError or JsonInputError.
Project project_from_json(const Json& j);
std::string project_to_string(const Project& project);
Project project_from_string(const std::string& text);

/// Writes to a temporary sibling and renames, so a failed save leaves the
/// previous file intact.
void save_project(const Project& project, const std::string& path);
/// Throws std::runtime_error when the file cannot be read.
Project load_project(const std::string& path);

struct StageReport {
    std::string stage;  // "part:<name>", "layout", "merge", "profile:<k>", "refine"
    std::size_t vertices = 0;
    std::size_t triangles = 0;
    std::size_t boundary_edges = 0;
    double wall_ms = 0.0;
};

struct PipelineOptions {
    bool refine = true;
    std::string debug_dir;  // forwarded to RefineConfig::debug_dir
};

struct PipelineOutput {
    PartMeshes parts;    // after layout
    TriMesh coarse;      // M_c: merged parts with every profile edit applied
    std::optional<TriMesh> fine;  // M_f; equals M_c when there are no strokes
    RefineResult refine;          // diagnostics of the refine stage when it ran
    std::vector<StageReport> stages;
};

/// Replays the whole log: generate_parts, apply_layout, merge_parts, each
/// profile edit in order, then one refine with every stroke. Deterministic:
/// equal projects give bit-identical meshes. A project without sketch layers
/// yields empty meshes. Throws std::invalid_argument for an invalid log.
PipelineOutput run_pipeline(const Project& project, const PipelineOptions& options = {});

/// Normal-map preview of the strokes over a cached D_c, computed in image
/// space only. PNG bytes, RGB8, background black.
std::vector<std::uint8_t> stroke_preview_png(const DepthMap& coarse_depth, const std::vector<Stroke>& strokes,
                                             const RefineConfig& config);

std::vector<Stroke> strokes_of(const std::vector<TimedStroke>& log);

/// Operation that needs state the session does not have yet, e.g. a profile
/// edit before any coarse sketch.
class SessionStateError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Mutable view of one project with its derived meshes and rasters. Every
/// mutation either completes and leaves the caches equal to
/// run_pipeline(project()) (fine mesh excepted, see fine_is_current) or
/// throws and leaves the session unchanged. Not thread-safe; callers
/// serialize access.
class ModelingSession {
public:
    ModelingSession();
    /// Replays `project` including the refine stage.
    explicit ModelingSession(Project project, std::string debug_dir = "");

    const Project& project() const { return project_; }
    bool has_coarse() const { return !coarse_.empty(); }
    const TriMesh& coarse_mesh() const { return coarse_; }
    /// Null until refine() ran for the current input.
    const TriMesh* fine_mesh() const { return fine_ ? &*fine_ : nullptr; }
    bool fine_is_current() const { return fine_.has_value(); }
    const DepthMap& coarse_depth() const { return coarse_depth_; }
    const std::vector<std::uint8_t>& preview_png() const { return preview_; }
    const RefineResult& last_refine() const { return last_refine_; }

    /// Replaces the sketch; layout and profile edits are kept and replayed.
    void set_sketch(PartSketch sketch);
    void set_layout(PartLayout layout);
    void set_config(ProjectConfig config);
    /// Throws SessionStateError without a coarse mesh.
    void add_profile_edit(ProfileEditRecord edit);
    /// Appends strokes and refreshes the preview. Invalidates the fine mesh
    /// unless `strokes` is empty. Throws SessionStateError without a coarse
    /// mesh.
    const std::vector<std::uint8_t>& add_strokes(const std::vector<TimedStroke>& strokes);
    /// Refines M_c with every stroke. Throws SessionStateError without a
    /// coarse mesh.
    const TriMesh& refine();
    /// Undo: keeps the first `profile_edits` edits and `strokes` strokes and
    /// replays.
    void truncate(std::size_t profile_edits, std::size_t strokes);
    /// Replaces the whole project and replays it.
    void load(Project project);

    void set_debug_dir(std::string dir) { debug_dir_ = std::move(dir); }

private:
    struct Coarse {
        PartMeshes parts;
        TriMesh mesh;
        DepthMap depth;
    };
    Coarse build_coarse(const Project& p) const;
    void commit(Project p, Coarse c);

    Project project_;
    PartMeshes parts_;
    TriMesh coarse_;
    DepthMap coarse_depth_;
    std::optional<TriMesh> fine_;
    RefineResult last_refine_;
    std::vector<std::uint8_t> preview_;
    std::string debug_dir_;
};

}  // namespace fsk
