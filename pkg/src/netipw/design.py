"""Treatment randomization schemes and exact / Monte-Carlo propensity
scores, including pairwise joint propensities for the AS variance
estimator."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InputError, UnsupportedExposureError
from .exposure import compute_exposures

_MC_CHUNK = 4096
_MC_REPS_WARN = 10_000


@dataclass(frozen=True)
class Design:
    """A randomization scheme over n units.

    Bernoulli: independent draws with per-unit probability ``p`` (zero for
    ineligible units). Blocks: disjoint unit sets, each with a fixed
    treated count drawn uniformly without replacement. Ineligible units
    are always untreated.
    """

    n: int
    kind: str  # "bernoulli" | "blocks"
    p: Optional[np.ndarray] = None
    blocks: tuple = ()
    treat_counts: tuple = ()

    @property
    def eligible(self):
        if self.kind == "bernoulli":
            return self.p > 0
        mask = np.zeros(self.n, dtype=bool)
        for b in self.blocks:
            mask[b] = True
        return mask


def bernoulli_design(n, p, eligible=None):
    """Independent Bernoulli assignment; ``p`` scalar or per-unit.

    ``eligible`` (bool mask or id list) zeroes the probability elsewhere.
    """
    if n < 1:
        raise InputError("n must be at least 1")
    pv = np.full(n, float(p)) if np.isscalar(p) else np.asarray(p, dtype=np.float64).copy()
    if pv.shape != (n,):
        raise InputError("p must be scalar or length n")
    if pv.min() < 0 or pv.max() > 1:
        raise InputError("probabilities must lie in [0, 1]")
    if eligible is not None:
        mask = np.zeros(n, dtype=bool)
        mask[np.asarray(eligible)] = True
        pv = np.where(mask, pv, 0.0)
    pv.setflags(write=False)
    return Design(n=n, kind="bernoulli", p=pv)


def block_design(n, blocks, treat_counts):
    """Block randomization: exactly ``treat_counts[b]`` treated per block."""
    if n < 1:
        raise InputError("n must be at least 1")
    blk = tuple(np.asarray(b, dtype=np.int64) for b in blocks)
    tc = tuple(int(t) for t in treat_counts)
    if len(blk) != len(tc):
        raise InputError("one treated count per block required")
    seen = np.zeros(n, dtype=bool)
    for b, t in zip(blk, tc):
        if b.size == 0:
            raise InputError("empty block")
        if b.min() < 0 or b.max() >= n:
            raise InputError("block member outside 0..n-1")
        if seen[b].any():
            raise InputError("blocks must be disjoint")
        seen[b] = True
        if not 0 <= t <= b.size:
            raise InputError(f"treated count {t} outside 0..{b.size}")
    return Design(n=n, kind="blocks", blocks=blk, treat_counts=tc)


def sample_assignment(design, seed):
    """Draw one assignment vector, deterministic in ``seed``."""
    return _sample(design, np.random.default_rng(seed), 1)[0]


def sample_assignments(design, reps, seed):
    """Draw ``reps`` independent assignment vectors as a (reps, n) array."""
    return _sample(design, np.random.default_rng(seed), reps)


def _sample(design, rng, reps):
    d = np.zeros((reps, design.n), dtype=np.int8)
    if design.kind == "bernoulli":
        d[:] = rng.random((reps, design.n)) < design.p
    else:
        for b, t in zip(design.blocks, design.treat_counts):
            if t == 0:
                continue
            if t == b.size:
                d[:, b] = 1
                continue
            u = rng.random((reps, b.size))
            chosen = np.argpartition(u, t - 1, axis=1)[:, :t]
            rows = np.repeat(np.arange(reps), t)
            d[rows, b[chosen].ravel()] = 1
    return d


@dataclass
class PropensityTable:
    """Marginal and (optionally) pairwise exposure propensities.

    ``pi[t]`` is the length-n array of P(T_i = t). When pairwise values
    are filled, ``pair[(t, t')]`` is an (m, m) array over ``pair_units``
    with P(T_i = t, T_j = t'), and ``pair_zero[(t, t')]`` marks the
    analytically confirmed structural zeros.
    """

    support: tuple
    pi: dict
    method: str  # "exact" | "monte_carlo"
    overlap_min: float
    overlap_max: float
    mc_reps: Optional[int] = None
    mc_seed: Optional[int] = None
    pair_units: Optional[np.ndarray] = None
    pair: Optional[dict] = None
    pair_zero: Optional[dict] = None
    warnings: list = field(default_factory=list)

    def pi_of(self, i, t):
        return float(self.pi[t][i])

    def pair_of(self, i, j, t, tp):
        pos = {int(u): a for a, u in enumerate(self.pair_units)}
        return float(self.pair[(t, tp)][pos[i], pos[j]])

    def overlap_ok(self, lo, hi):
        return lo <= self.overlap_min and self.overlap_max <= hi


def _eligible_neighbor_stats(design, exposure, g, out_links):
    """Per-unit eligible-neighbor incidence used by closed forms."""
    elig = design.eligible
    if out_links is not None:
        nbrs = [np.asarray(nb, dtype=np.int64) for nb in out_links]
    else:
        nbrs = [g.neighbors(i) for i in range(g.n)]
    return elig, [nb[elig[nb]] for nb in nbrs]


def propensity(design, exposure, g, out_links=None, method="exact",
               mc_reps=100_000, seed=0):
    """Marginal propensities pi_i(t) for every t in the exposure support.

    Closed forms cover own-treatment (any design) and any-treated-neighbor
    (Bernoulli products; block designs via products of hypergeometric
    zero-success probabilities across independent blocks). Other exposures
    need ``method="monte_carlo"``.
    """
    if method == "monte_carlo":
        return _mc_propensity(design, exposure, g, out_links, mc_reps, seed,
                              pairwise_units=None)

    if exposure.kind == "own":
        pi1 = _own_pi1(design)
        pi = {1: pi1, 0: 1.0 - pi1}
    elif exposure.kind == "any-nbr":
        elig, enbrs = _eligible_neighbor_stats(design, exposure, g, out_links)
        if design.kind == "bernoulli":
            pi0 = np.array([np.prod(1.0 - design.p[nb]) if nb.size else 1.0
                            for nb in enbrs])
        else:
            pos_block = np.full(design.n, -1, dtype=np.int64)
            for bi, b in enumerate(design.blocks):
                pos_block[b] = bi
            pi0 = np.ones(design.n)
            for i, nb in enumerate(enbrs):
                if nb.size == 0:
                    continue
                counts = np.bincount(pos_block[nb],
                                     minlength=len(design.blocks))
                for bi, cnt in enumerate(counts):
                    if cnt == 0:
                        continue
                    pi0[i] *= _hyp_zero(len(design.blocks[bi]),
                                        design.treat_counts[bi], int(cnt))
        pi = {0: pi0, 1: 1.0 - pi0}
    else:
        raise UnsupportedExposureError(
            f"no closed-form propensity for exposure {exposure.kind!r}; "
            "request method='monte_carlo'"
        )
    return _finish_table(exposure, pi, method="exact")


def _own_pi1(design):
    if design.kind == "bernoulli":
        return design.p.astype(np.float64).copy()
    pi1 = np.zeros(design.n)
    for b, t in zip(design.blocks, design.treat_counts):
        pi1[b] = t / b.size
    return pi1


def _hyp_zero(block_size, treated, exposed_members):
    """P(0 treated among ``exposed_members``) when drawing ``treated`` of
    ``block_size`` without replacement."""
    free = block_size - exposed_members
    if treated > free:
        return 0.0
    return math.comb(free, treated) / math.comb(block_size, treated)


def _finish_table(exposure, pi, method, **extra):
    stacked = np.stack([pi[t] for t in exposure.support])
    table = PropensityTable(
        support=exposure.support,
        pi=pi,
        method=method,
        overlap_min=float(stacked.min()),
        overlap_max=float(stacked.max()),
        **extra,
    )
    return table


def pairwise_propensity(design, exposure, g, units=None, out_links=None,
                        mc_reps=100_000, seed=0):
    """Joint propensities pi_ij(t, t') over the ``units`` subset.

    Exact closed forms: own-treatment (independent products, within-block
    hypergeometric pairs) and any-treated-neighbor under Bernoulli
    (inclusion-exclusion over the union of eligible neighborhoods, with
    shared-neighbor structural zeros detected analytically). Everything
    else falls back to Monte Carlo with ``mc_reps`` draws; MC zeros that
    the analytic detector cannot confirm are flagged in the warnings.
    """
    units = np.arange(g.n, dtype=np.int64) if units is None \
        else np.asarray(units, dtype=np.int64)

    if exposure.kind == "own":
        return _own_pairwise(design, exposure, units)
    if exposure.kind == "any-nbr" and design.kind == "bernoulli":
        return _anynbr_bernoulli_pairwise(design, exposure, g, units,
                                          out_links)
    return _mc_propensity(design, exposure, g, out_links, mc_reps, seed,
                          pairwise_units=units)


def _own_pairwise(design, exposure, units):
    pi1 = _own_pi1(design)
    m = units.size
    q1 = pi1[units]
    if design.kind == "bernoulli":
        p11 = np.outer(q1, q1)
        p10 = np.outer(q1, 1.0 - q1)
    else:
        pos_block = np.full(design.n, -1, dtype=np.int64)
        size_of = np.zeros(len(design.blocks), dtype=np.int64)
        for bi, b in enumerate(design.blocks):
            pos_block[b] = bi
            size_of[bi] = b.size
        p11 = np.outer(q1, q1)
        p10 = np.outer(q1, 1.0 - q1)
        ub = pos_block[units]
        for bi, (b, t) in enumerate(zip(design.blocks, design.treat_counts)):
            members = np.flatnonzero(ub == bi)
            if members.size < 2:
                continue
            B = b.size
            both = t * (t - 1) / (B * (B - 1))
            one = t * (B - t) / (B * (B - 1))
            ix = np.ix_(members, members)
            p11[ix] = both
            p10[ix] = one
    # diagonal: a unit realizes exactly one exposure value
    np.fill_diagonal(p11, q1)
    np.fill_diagonal(p10, 0.0)
    p00 = 1.0 - p11 - p10 - p10.T
    np.fill_diagonal(p00, 1.0 - q1)
    zero10 = np.zeros_like(p10, dtype=bool)
    np.fill_diagonal(zero10, True)
    pi = {1: pi1, 0: 1.0 - pi1}
    return _finish_table(
        exposure, pi, method="exact", pair_units=units,
        pair={(1, 1): p11, (1, 0): p10, (0, 1): p10.T.copy(), (0, 0): p00},
        pair_zero={(1, 1): np.zeros_like(zero10), (1, 0): zero10,
                   (0, 1): zero10.T.copy(), (0, 0): np.zeros_like(zero10)},
    )


def _anynbr_bernoulli_pairwise(design, exposure, g, units, out_links):
    elig, enbrs = _eligible_neighbor_stats(design, exposure, g, out_links)
    p = design.p
    n = design.n
    # incidence over eligible neighbors of the selected units
    m = units.size
    logq = np.zeros(n)
    ok = p < 1.0
    logq[ok] = np.log1p(-p[ok])
    inc = np.zeros((m, n))
    forced = np.zeros(m, dtype=bool)  # some neighbor treated surely
    for a, u in enumerate(units):
        nb = enbrs[u]
        inc[a, nb] = 1.0
        if np.any(p[nb] >= 1.0):
            forced[a] = True
    li = inc @ logq
    pi0_all = np.array([np.prod(1.0 - p[nb]) if nb.size else 1.0
                        for nb in enbrs])
    pi = {0: pi0_all, 1: 1.0 - pi0_all}

    counts = inc @ inc.T                      # |N_i^e ∩ N_j^e|, exact ints
    ci = np.diag(counts).copy()
    common_log = (inc * logq[None, :]) @ inc.T
    q0 = np.where(forced, 0.0, np.exp(li))    # pi_i(0) over units
    with np.errstate(invalid="ignore"):
        p00 = np.where(forced[:, None] | forced[None, :], 0.0,
                       np.exp(li[:, None] + li[None, :] - common_log))
    # subset structure: N_i^e ⊆ N_j^e forces T_i=1 => T_j=1
    subset_ij = counts == ci[:, None]         # i's set inside j's
    p00[subset_ij] = q0[np.nonzero(subset_ij)[1]]  # union = N_j^e
    p00[subset_ij.T] = q0[np.nonzero(subset_ij.T)[0]]
    p10 = q0[None, :] - p00                   # P(T_i=1, T_j=0)
    p01 = q0[:, None] - p00
    p11 = 1.0 - q0[:, None] - q0[None, :] + p00
    p10[subset_ij] = 0.0
    p01[subset_ij.T] = 0.0
    # diagonal conventions
    np.fill_diagonal(p00, q0)
    np.fill_diagonal(p10, 0.0)
    np.fill_diagonal(p01, 0.0)
    np.fill_diagonal(p11, 1.0 - q0)
    zero10 = subset_ij.copy()
    np.fill_diagonal(zero10, True)
    return _finish_table(
        exposure, pi, method="exact", pair_units=units,
        pair={(1, 1): p11, (1, 0): p10, (0, 1): p01, (0, 0): p00},
        pair_zero={(1, 1): np.zeros_like(zero10), (1, 0): zero10,
                   (0, 1): zero10.T.copy(), (0, 0): np.zeros_like(zero10)},
    )


def _mc_propensity(design, exposure, g, out_links, mc_reps, seed,
                   pairwise_units):
    warnings = []
    if mc_reps < _MC_REPS_WARN:
        warnings.append(
            f"mc_reps={mc_reps} below {_MC_REPS_WARN}; propensities may be "
            "noisy"
        )
    rng = np.random.default_rng(seed)
    support = exposure.support
    counts = {t: np.zeros(design.n) for t in support}
    pair_counts = None
    units = pairwise_units
    if units is not None:
        m = units.size
        pair_counts = {(t, tp): np.zeros((m, m)) for t in support
                       for tp in support}
    done = 0
    while done < mc_reps:
        chunk = min(_MC_CHUNK, mc_reps - done)
        draws = _sample(design, rng, chunk)
        tmat = _exposures_many(exposure, draws, g, out_links)
        for t in support:
            ind = tmat == t
            counts[t] += ind.sum(axis=0)
            if pair_counts is not None:
                sub = ind[:, units].astype(np.float64)
                for tp in support:
                    subp = (tmat[:, units] == tp).astype(np.float64)
                    pair_counts[(t, tp)] += sub.T @ subp
        done += chunk
    pi = {t: counts[t] / mc_reps for t in support}
    extra = dict(mc_reps=mc_reps, mc_seed=seed)
    if pair_counts is not None:
        pair = {k: v / mc_reps for k, v in pair_counts.items()}
        pair_zero = {k: np.zeros_like(v, dtype=bool) for k, v in pair.items()}
        _confirm_structural_zeros(design, exposure, g, out_links, units,
                                  pair, pair_zero, warnings)
        extra.update(pair_units=units, pair=pair, pair_zero=pair_zero)
    table = _finish_table(exposure, pi, method="monte_carlo", **extra)
    table.warnings.extend(warnings)
    return table


def _exposures_many(exposure, draws, g, out_links):
    """Vectorized exposures for a (reps, n) stack of assignments."""
    if exposure.kind == "own":
        return draws.astype(np.int64)
    if exposure.kind in ("any-nbr", "frac-nbr"):
        if out_links is not None:
            treated = np.stack(
                [draws[:, nb].sum(axis=1) if len(nb) else
                 np.zeros(draws.shape[0]) for nb in out_links], axis=1)
            degs = np.array([len(nb) for nb in out_links], dtype=np.float64)
        else:
            treated = (g.adjacency() @ draws.T.astype(np.float64)).T
            degs = g.degrees.astype(np.float64)
        if exposure.kind == "any-nbr":
            return (treated > 0).astype(np.int64)
        frac = np.divide(treated, degs[None, :], out=np.zeros_like(treated),
                         where=degs[None, :] > 0)
        edges = np.asarray(exposure.bin_edges)
        return np.clip(np.searchsorted(edges, frac, side="right") - 1,
                       0, len(edges) - 2).astype(np.int64)
    return np.stack([compute_exposures(exposure, d, g, out_links)
                     for d in draws])


def _confirm_structural_zeros(design, exposure, g, out_links, units,
                              pair, pair_zero, warnings):
    """Mark analytically provable zeros; flag unconfirmed MC zeros."""
    m = units.size
    if exposure.kind == "any-nbr":
        elig, enbrs = _eligible_neighbor_stats(design, exposure, g, out_links)
        inc = np.zeros((m, design.n))
        for a, u in enumerate(units):
            inc[a, enbrs[u]] = 1.0
        counts = inc @ inc.T
        subset_ij = counts == np.diag(counts)[:, None]
        zero10 = subset_ij.copy()
        np.fill_diagonal(zero10, True)
        pair_zero[(1, 0)] |= zero10
        pair_zero[(0, 1)] |= zero10.T
        pair[(1, 0)][pair_zero[(1, 0)]] = 0.0
        pair[(0, 1)][pair_zero[(0, 1)]] = 0.0
    # a unit realizes exactly one exposure value
    for t in exposure.support:
        for tp in exposure.support:
            if t != tp:
                np.fill_diagonal(pair_zero[(t, tp)], True)
                np.fill_diagonal(pair[(t, tp)], 0.0)
    unconfirmed = 0
    for key, mat in pair.items():
        unconfirmed += int(np.sum((mat == 0.0) & ~pair_zero[key]))
    if unconfirmed:
        warnings.append(
            f"{unconfirmed} Monte-Carlo zero pair propensities not "
            "analytically confirmed as structural"
        )


# ---------------------------------------------------------------------------
# Units CSV interface: header id,outcome,treatment,eligible,block

@dataclass
class UnitsTable:
    n: int
    outcome: np.ndarray
    treatment: Optional[np.ndarray]  # None when the tool assigns
    eligible: np.ndarray
    block: Optional[list]  # block label per unit, None for Bernoulli data


def read_units_csv(path):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        need = {"id", "outcome", "treatment", "eligible", "block"}
        if reader.fieldnames is None or need - set(reader.fieldnames):
            raise InputError(
                f"{path}: expected header with columns {sorted(need)}"
            )
        rows = list(reader)
    n = len(rows)
    if n == 0:
        raise InputError(f"{path}: no units")
    outcome = np.zeros(n)
    treatment = np.full(n, -1, dtype=np.int64)
    eligible = np.zeros(n, dtype=bool)
    block = [""] * n
    seen = np.zeros(n, dtype=bool)
    for row in rows:
        try:
            i = int(row["id"])
        except ValueError as exc:
            raise InputError(f"{path}: non-integer id {row['id']!r}") from exc
        if not 0 <= i < n or seen[i]:
            raise InputError(f"{path}: ids must be a permutation of 0..{n-1}")
        seen[i] = True
        outcome[i] = float(row["outcome"]) if row["outcome"] != "" else np.nan
        if row["treatment"] != "":
            treatment[i] = int(row["treatment"])
        eligible[i] = row["eligible"] not in ("", "0", "false", "False")
        block[i] = row["block"]
    has_treat = bool(np.all(treatment >= 0))
    has_block = any(b != "" for b in block)
    return UnitsTable(
        n=n,
        outcome=outcome,
        treatment=treatment if has_treat else None,
        eligible=eligible,
        block=block if has_block else None,
    )


def write_units_csv(path, outcome, treatment, eligible, block=None):
    n = len(outcome)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "outcome", "treatment", "eligible", "block"])
        for i in range(n):
            writer.writerow([
                i,
                repr(float(outcome[i])),
                "" if treatment is None else int(treatment[i]),
                int(bool(eligible[i])),
                "" if block is None else block[i],
            ])


def design_from_units(table, p=None):
    """Reconstruct the randomization scheme recorded in a units CSV.

    Block labels present: a block design with the observed treated count
    per block. Otherwise Bernoulli with probability ``p`` on the eligible
    set (required).
    """
    if table.block is not None:
        labels = {}
        for i, lab in enumerate(table.block):
            if lab != "":
                labels.setdefault(lab, []).append(i)
        if table.treatment is None:
            raise InputError("block design requires a treatment column")
        blocks = [np.asarray(v, dtype=np.int64) for v in labels.values()]
        counts = [int(table.treatment[b].sum()) for b in blocks]
        return block_design(table.n, blocks, counts)
    if p is None:
        raise InputError("Bernoulli data needs an assignment probability p")
    return bernoulli_design(table.n, p, eligible=np.flatnonzero(table.eligible))
