"""Spectral edge statistics of random regular graphs.

Submodules: ``graphs`` (sampling, switchings, forest counts), ``spectral``
(normalized adjacency, Green's functions, Lanczos), ``limit_laws``
(Kesten-McKay, semicircle, tree oracle), ``free_conv`` (free convolution with
the semicircle and its edges), ``dbm`` (constrained GOE and interpolation),
``tracy_widom`` (Painleve II tables and Fredholm oracles) and ``experiments``
(seeded campaigns and the identity suite).
"""

from __future__ import annotations

from .errors import RRGError
from .experiments import ExperimentConfig, RunReport
from .graphs import RegularGraph, SwitchMove, random_regular_graph
from .spectral import extreme_eigenvalues, green_function
from .tracy_widom import get_table

__all__ = [
    "ExperimentConfig",
    "RRGError",
    "RegularGraph",
    "RunReport",
    "SwitchMove",
    "extreme_eigenvalues",
    "get_table",
    "green_function",
    "random_regular_graph",
]

__version__ = "0.1.0"
