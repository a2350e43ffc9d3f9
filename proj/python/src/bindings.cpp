#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "facesketch/bench.hpp"
#include "facesketch/marching_cubes.hpp"
#include "facesketch/session.hpp"
#include "facesketch/suggest.hpp"
#include "facesketch/synthetic.hpp"
#include "facesketch/verify.hpp"

namespace py = pybind11;
using namespace fsk;

namespace {

// Documents cross the boundary as JSON text; the Python package converts
// dicts with the json module.

py::array_t<double> vertices_array(const TriMesh& m)
{
    py::array_t<double> out({static_cast<py::ssize_t>(m.num_vertices()), py::ssize_t{3}});
    auto a = out.mutable_unchecked<2>();
    for (std::size_t v = 0; v < m.num_vertices(); ++v)
        for (int c = 0; c < 3; ++c) a(v, c) = m.vertices[v][c];
    return out;
}

py::array_t<int> triangles_array(const TriMesh& m)
{
    py::array_t<int> out({static_cast<py::ssize_t>(m.num_triangles()), py::ssize_t{3}});
    auto a = out.mutable_unchecked<2>();
    for (std::size_t t = 0; t < m.num_triangles(); ++t)
        for (int c = 0; c < 3; ++c) a(t, c) = m.triangles[t][c];
    return out;
}

TriMesh mesh_from_arrays(py::array_t<double, py::array::c_style | py::array::forcecast> vertices,
                         py::array_t<int, py::array::c_style | py::array::forcecast> triangles)
{
    if (vertices.ndim() != 2 || vertices.shape(1) != 3) throw std::invalid_argument("vertices must be N x 3");
    if (triangles.ndim() != 2 || triangles.shape(1) != 3) throw std::invalid_argument("triangles must be M x 3");
    TriMesh m;
    auto v = vertices.unchecked<2>();
    auto t = triangles.unchecked<2>();
    for (py::ssize_t i = 0; i < v.shape(0); ++i) m.vertices.emplace_back(v(i, 0), v(i, 1), v(i, 2));
    for (py::ssize_t i = 0; i < t.shape(0); ++i) m.triangles.push_back({t(i, 0), t(i, 1), t(i, 2)});
    validate_indices(m);
    return m;
}

py::bytes as_bytes(const std::vector<std::uint8_t>& b)
{
    return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
}

std::vector<TimedStroke> strokes_from_text(const std::string& text)
{
    const Json j = parse_json_text(text);
    const Json& list = j.is_object() ? j.at("strokes") : j;
    if (!list.is_array()) throw JsonInputError("", "expected a list of strokes");
    std::vector<TimedStroke> out;
    for (std::size_t k = 0; k < list.size(); ++k)
        out.push_back({stroke_from_json(list[k], "/" + std::to_string(k)), static_cast<double>(k)});
    return out;
}

py::dict stage_dict(const StageReport& s)
{
    py::dict d;
    d["stage"] = s.stage;
    d["vertices"] = s.vertices;
    d["triangles"] = s.triangles;
    d["boundary_edges"] = s.boundary_edges;
    d["wall_ms"] = s.wall_ms;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Sketch-based face modeling: coarse part inflation and implicit/depth guided refinement";

    py::register_exception<JsonInputError>(m, "JsonInputError", PyExc_ValueError);
    py::register_exception<ProjectVersionError>(m, "ProjectVersionError", PyExc_ValueError);
    py::register_exception<SessionStateError>(m, "SessionStateError", PyExc_RuntimeError);

    py::class_<TriMesh>(m, "Mesh")
        .def(py::init(&mesh_from_arrays), py::arg("vertices"), py::arg("triangles"))
        .def_property_readonly("vertices", &vertices_array)
        .def_property_readonly("triangles", &triangles_array)
        .def_property_readonly("num_vertices", &TriMesh::num_vertices)
        .def_property_readonly("num_triangles", &TriMesh::num_triangles)
        .def("boundary_edges", &boundary_edge_count)
        .def("is_watertight", &is_watertight)
        .def("surface_area", &surface_area)
        .def("to_obj", &to_obj_string)
        .def_static("from_obj", &parse_obj_string, py::arg("text"))
        .def("__repr__", [](const TriMesh& t) {
            return "<Mesh " + std::to_string(t.num_vertices()) + " vertices, " + std::to_string(t.num_triangles()) +
                   " triangles>";
        });

    m.def("sphere_mesh", [](double radius, int resolution) {
        return marching_cubes(SphereField(Vec3::Zero(), radius), resolution);
    }, py::arg("radius"), py::arg("resolution") = 64, "Marching-cubes extraction of a centred sphere.");

    m.def("demo_project_json", [] { return project_to_string(demo_project()); });

    m.def("run_pipeline_json", [](const std::string& project_json, bool refine) {
        const Project p = project_from_string(project_json);
        PipelineOutput out;
        {
            py::gil_scoped_release release;
            out = run_pipeline(p, {refine, ""});
        }
        py::dict d;
        d["coarse"] = out.coarse;
        d["fine"] = out.fine ? py::cast(*out.fine) : py::none();
        py::list stages;
        for (const StageReport& s : out.stages) stages.append(stage_dict(s));
        d["stages"] = stages;
        return d;
    }, py::arg("project_json"), py::arg("refine") = true);

    py::class_<ModelingSession>(m, "_Session")
        .def(py::init<>())
        .def(py::init([](const std::string& project_json) { return ModelingSession(project_from_string(project_json)); }))
        .def("set_sketch_json", [](ModelingSession& s, const std::string& text) {
            s.set_sketch(part_sketch_from_json(parse_json_text(text)));
        })
        .def("set_layout_json", [](ModelingSession& s, const std::string& text) {
            s.set_layout(part_layout_from_json(parse_json_text(text)));
        })
        .def("add_strokes_json", [](ModelingSession& s, const std::string& text) {
            return as_bytes(s.add_strokes(strokes_from_text(text)));
        })
        .def("refine", [](ModelingSession& s) {
            py::gil_scoped_release release;
            return s.refine();
        })
        .def("truncate", &ModelingSession::truncate, py::arg("profile_edits"), py::arg("strokes"))
        .def_property_readonly("has_coarse", &ModelingSession::has_coarse)
        .def_property_readonly("coarse_mesh", &ModelingSession::coarse_mesh)
        .def_property_readonly("fine_mesh", [](const ModelingSession& s) -> py::object {
            return s.fine_mesh() ? py::cast(*s.fine_mesh()) : py::none();
        })
        .def_property_readonly("preview_png", [](const ModelingSession& s) { return as_bytes(s.preview_png()); })
        .def("project_json", [](const ModelingSession& s) { return project_to_string(s.project()); });

    py::class_<SuggestionIndex>(m, "SuggestionIndex")
        .def(py::init([](const std::string& path) { return SuggestionIndex(load_corpus(path)); }), py::arg("corpus_path"))
        .def("__len__", &SuggestionIndex::size)
        .def("query_json", [](const SuggestionIndex& idx, const std::string& text) {
            std::vector<std::pair<std::string, double>> out;
            for (const Suggestion& s : idx.query(parse_query(text))) out.emplace_back(s.id, s.distance);
            return out;
        });

    m.def("verify", [](const std::string& module, const std::string& corpus) {
        std::vector<CheckResult> results;
        {
            py::gil_scoped_release release;
            results = run_invariant_suite({corpus, module});
        }
        py::list out;
        for (const CheckResult& r : results) {
            py::dict d;
            d["module"] = r.module;
            d["name"] = r.name;
            d["passed"] = r.passed;
            d["detail"] = r.detail;
            out.append(d);
        }
        return out;
    }, py::arg("module") = "", py::arg("corpus") = "");

    m.def("bench_mc_vs_idgmm", [](const std::string& field, int grid, int coarse_grid) {
        BenchOptions o;
        o.mc_grid = grid;
        o.coarse_grid = coarse_grid;
        const auto shape = bench_shape(field);
        BenchReport r;
        {
            py::gil_scoped_release release;
            r = bench_mc_vs_idgmm(*shape, demo_strokes(), o);
        }
        return bench_csv(r);
    }, py::arg("field") = "sphere", py::arg("grid") = 256, py::arg("coarse_grid") = 64);
}
