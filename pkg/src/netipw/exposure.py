"""K-neighborhood exposure mappings and realized exposure vectors."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class ExposureSpec:
    """An exposure mapping with its neighborhood radius and finite support.

    Built-ins cover own treatment (K=0), any-treated-neighbor (K=1) and
    binned treated-neighbor fractions (K=1). A custom mapping is any pure
    function ``(i, d, g, out_links) -> value`` with declared radius and
    support.
    """

    kind: str                      # "own" | "any-nbr" | "frac-nbr" | "custom"
    radius: int
    support: tuple
    bin_edges: tuple = ()
    custom_fn: Optional[Callable] = field(default=None, compare=False)

    def __post_init__(self):
        if self.radius < 0:
            raise InputError("exposure radius must be nonnegative")
        if not self.support:
            raise InputError("exposure support is empty")


def own_treatment():
    return ExposureSpec(kind="own", radius=0, support=(0, 1))


def any_treated_neighbor():
    return ExposureSpec(kind="any-nbr", radius=1, support=(0, 1))


def fraction_treated_binned(bin_edges):
    """Exposure = index of the bin containing the treated-neighbor fraction.

    ``bin_edges`` must be increasing and span [0, 1]; bin b covers
    [e_b, e_{b+1}) with the last bin closed. Isolated nodes land in bin 0.
    """
    edges = tuple(float(e) for e in bin_edges)
    if len(edges) < 2 or any(a >= b for a, b in zip(edges, edges[1:])):
        raise InputError("bin edges must be strictly increasing")
    if edges[0] != 0.0 or edges[-1] != 1.0:
        raise InputError("bin edges must span [0, 1]")
    return ExposureSpec(kind="frac-nbr", radius=1,
                        support=tuple(range(len(edges) - 1)),
                        bin_edges=edges)


def custom_exposure(fn, radius, support):
    return ExposureSpec(kind="custom", radius=radius, support=tuple(support),
                        custom_fn=fn)


def exposure_radius(spec):
    """Declared neighborhood radius K of the mapping."""
    return spec.radius


def compute_exposures(spec, d, g, out_links=None):
    """Realized exposures T_i for assignment vector ``d``.

    Neighbor counts use ``out_links`` (directed neighbor lists, one array
    per node) when provided, else the undirected adjacency of ``g``.
    """
    d = np.asarray(d)
    if d.shape != (g.n,):
        raise InputError(f"assignment length {d.shape} != n={g.n}")
    df = d.astype(np.float64)

    if spec.kind == "own":
        t = d.astype(np.int64)
    elif spec.kind in ("any-nbr", "frac-nbr"):
        if out_links is not None:
            treated = np.array([df[nbrs].sum() for nbrs in out_links])
            degs = np.array([len(nbrs) for nbrs in out_links], dtype=np.float64)
        else:
            treated = g.adjacency() @ df
            degs = g.degrees.astype(np.float64)
        if spec.kind == "any-nbr":
            t = (treated > 0).astype(np.int64)
        else:
            frac = np.divide(treated, degs, out=np.zeros_like(treated),
                             where=degs > 0)
            edges = np.asarray(spec.bin_edges)
            t = np.clip(np.searchsorted(edges, frac, side="right") - 1,
                        0, len(edges) - 2).astype(np.int64)
    elif spec.kind == "custom":
        t = np.array([spec.custom_fn(i, d, g, out_links) for i in range(g.n)])
    else:
        raise InputError(f"unknown exposure kind {spec.kind!r}")

    support = set(spec.support)
    bad = [v for v in np.unique(t) if v not in support]
    if bad:
        raise InputError(f"exposure value {bad[0]} outside declared support")
    return t


def parse_exposure(text):
    """Parse a CLI exposure string: ``own``, ``any-nbr``, or
    ``frac-nbr:<comma-separated bin edges>``."""
    if text == "own":
        return own_treatment()
    if text == "any-nbr":
        return any_treated_neighbor()
    if text.startswith("frac-nbr:"):
        try:
            edges = [float(x) for x in text.split(":", 1)[1].split(",")]
        except ValueError as exc:
            raise InputError(f"bad bin edges in {text!r}") from exc
        return fraction_treated_binned(edges)
    raise InputError(f"unknown exposure {text!r}")
