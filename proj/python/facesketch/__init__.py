"""Python access to the facesketch modeling library.

Documents (sketches, strokes, projects, queries) use the same JSON layout as
the REST service; dicts and lists are serialized before crossing into C++.
"""

import json

from ._core import (
    JsonInputError,
    Mesh,
    ProjectVersionError,
    SessionStateError,
    SuggestionIndex as _SuggestionIndex,
    _Session,
    bench_mc_vs_idgmm,
    demo_project_json,
    run_pipeline_json,
    sphere_mesh,
    verify,
)

__all__ = [
    "JsonInputError",
    "Mesh",
    "ModelingSession",
    "ProjectVersionError",
    "SessionStateError",
    "SuggestionIndex",
    "bench_mc_vs_idgmm",
    "demo_project",
    "run_pipeline",
    "sphere_mesh",
    "verify",
]


def _text(doc):
    return doc if isinstance(doc, str) else json.dumps(doc)


def demo_project():
    return json.loads(demo_project_json())


def run_pipeline(project, refine=True):
    """Replays a project; returns {"coarse": Mesh, "fine": Mesh | None, "stages": [...]}."""
    return run_pipeline_json(_text(project), refine)


class ModelingSession:
    """One editable project with its derived meshes."""

    def __init__(self, project=None):
        self._s = _Session() if project is None else _Session(_text(project))

    def set_sketch(self, sketch):
        self._s.set_sketch_json(_text(sketch))

    def set_layout(self, layout):
        self._s.set_layout_json(_text(layout))

    def add_strokes(self, strokes):
        """Appends strokes; returns the PNG normal-map preview."""
        return self._s.add_strokes_json(_text(strokes))

    def refine(self):
        return self._s.refine()

    def truncate(self, profile_edits, strokes):
        self._s.truncate(profile_edits, strokes)

    @property
    def coarse_mesh(self):
        return self._s.coarse_mesh if self._s.has_coarse else None

    @property
    def fine_mesh(self):
        return self._s.fine_mesh

    @property
    def preview_png(self):
        return self._s.preview_png

    @property
    def project(self):
        return json.loads(self._s.project_json())


class SuggestionIndex:
    def __init__(self, corpus_path):
        self._index = _SuggestionIndex(str(corpus_path))

    def __len__(self):
        return len(self._index)

    def query(self, category, contour, style="", top_n=20):
        """Ranked (id, distance) pairs; `contour` is one polyline or a list of them."""
        q = {"category": category, "contour": contour, "top_n": top_n}
        if style:
            q["style"] = style
        return self._index.query_json(json.dumps(q))
