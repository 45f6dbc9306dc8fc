"""Seeded random graph generators: configuration model (stub matching with
erasure) and random geometric graph, plus the synthetic degree-sequence
calibration shipped with the package."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np
from scipy.spatial import cKDTree

from .errors import InputError
from .graph import Graph, build_graph

log = logging.getLogger(__name__)

#: Seed used to produce the shipped calibration degree files.
CALIBRATION_SEED = 7

#: Network sizes with a shipped calibration file (mean degree 7.96).
CALIBRATION_SIZES = (805, 1456, 2725)


@dataclass(frozen=True)
class RggPlacement:
    """Unit-square positions and link radius behind a generated RGG."""

    positions: np.ndarray  # (n, 2) in [0, 1]^2
    radius: float


def configuration_model(degree_sequence, seed):
    """Random graph with (at most) the given degrees via stub matching.

    Each node gets degree_i stubs; stubs are paired uniformly at random and
    self-loops / multi-edges erased, so realized degrees never exceed the
    requested ones. An odd degree total is padded by incrementing the first
    lowest-degree entry (logged).
    """
    deg = np.asarray(degree_sequence, dtype=np.int64)
    n = deg.size
    if n < 1:
        raise InputError("degree sequence is empty")
    if deg.min() < 0:
        raise InputError("degrees must be nonnegative")
    if deg.max() >= n:
        raise InputError(f"degree {deg.max()} impossible with n={n}")
    if deg.sum() % 2 == 1:
        deg = deg.copy()
        pad_at = int(np.argmin(deg))
        deg[pad_at] += 1
        log.warning("odd degree total; padded node %d to degree %d",
                    pad_at, deg[pad_at])
    rng = np.random.default_rng(seed)
    stubs = np.repeat(np.arange(n, dtype=np.int64), deg)
    rng.shuffle(stubs)
    pairs = stubs.reshape(-1, 2)
    return build_graph(pairs, n)


def rgg(n, kappa, seed, literal_radius=False):
    """Random geometric graph on the unit square.

    Positions are iid uniform; two nodes link iff their Euclidean distance
    is at most r = sqrt(kappa / (pi * n)), which makes ``kappa`` the
    limiting expected degree. ``literal_radius`` switches to
    r = (kappa / (pi * n))**2 instead.

    Returns
    -------
    (Graph, RggPlacement)
        The placement is returned so outcome models can build homophilous
        unobservables from the first coordinate.
    """
    if n < 1:
        raise InputError("n must be at least 1")
    if kappa <= 0:
        raise InputError("kappa must be positive")
    rng = np.random.default_rng(seed)
    positions = rng.random((n, 2))
    base = kappa / (math.pi * n)
    radius = base ** 2 if literal_radius else math.sqrt(base)
    if n >= 2:
        tree = cKDTree(positions)
        pairs = tree.query_pairs(radius, output_type="ndarray")
    else:
        pairs = np.empty((0, 2), dtype=np.int64)
    g = build_graph(pairs, n)
    return g, RggPlacement(positions=positions, radius=radius)


def synthetic_degree_sequence(n, mean_degree=7.96, low=1, high=10,
                              seed=CALIBRATION_SEED):
    """Deterministic degree sequence with the given mean, clipped to
    [low, high] and adjusted to an even total (survey-style top-censored
    draws around the target mean)."""
    if n < 1:
        raise InputError("n must be at least 1")
    if not low <= mean_degree <= high:
        raise InputError("mean_degree outside [low, high]")
    rng = np.random.default_rng(seed)
    deg = np.clip(np.rint(rng.normal(mean_degree + 0.4, 1.7, size=n)),
                  low, high).astype(np.int64)
    target = int(round(n * mean_degree))
    if target % 2 == 1:
        target += 1
    total = int(deg.sum())
    while total != target:
        i = int(rng.integers(n))
        if total < target and deg[i] < high:
            deg[i] += 1
            total += 1
        elif total > target and deg[i] > low:
            deg[i] -= 1
            total -= 1
    return deg


def calibration_degrees(n):
    """Load the shipped degree sequence for a supported network size."""
    if n not in CALIBRATION_SIZES:
        raise InputError(
            f"no calibration file for n={n}; available: {CALIBRATION_SIZES}"
        )
    ref = resources.files("netipw").joinpath(f"data/degrees_{n}.txt")
    with ref.open() as fh:
        return _read_degrees(fh)


def read_degree_file(path):
    """Read a degree-sequence file: one nonnegative integer per line."""
    with open(path) as fh:
        return _read_degrees(fh)


def write_degree_file(degrees, path):
    with open(path, "w") as fh:
        for d in degrees:
            fh.write(f"{int(d)}\n")


def _read_degrees(fh):
    out = []
    for lineno, line in enumerate(fh, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            d = int(line)
        except ValueError as exc:
            raise InputError(f"line {lineno}: non-integer degree") from exc
        if d < 0:
            raise InputError(f"line {lineno}: negative degree")
        out.append(d)
    if not out:
        raise InputError("degree file is empty")
    return np.asarray(out, dtype=np.int64)
