"""Surface reconstruction by wrapping: flow-guided collapses of the Delaunay complex.

Typical use::

    from wrapsurf import build, nested_family, sample_torus
    cx = build(sample_torus(3.0, 1.0, 1000))
    stages = nested_family(cx, max_stages=2)
    stages[1].surface.report()   # genus 1
"""
from . import delaunay, errors, flow, kernel, meshio, sculpt
from .delaunay import OMEGA, DelaunayComplex, build
from .flow import check_acyclic, g_at, is_critical, sinks
from .meshio import read_points, sample_sphere, sample_torus, write_surface
from .sculpt import WrapStage, boundary_surface, nested_family, wrap

__all__ = [
    "OMEGA",
    "DelaunayComplex",
    "WrapStage",
    "boundary_surface",
    "build",
    "check_acyclic",
    "delaunay",
    "errors",
    "flow",
    "g_at",
    "is_critical",
    "kernel",
    "meshio",
    "nested_family",
    "read_points",
    "sample_sphere",
    "sample_torus",
    "sculpt",
    "sinks",
    "wrap",
    "write_surface",
]
__version__ = "0.1.0"
