"""Coarse-geometric operator predicates and constructions.

An operator on a point set is *controlled* when its matrix support has
bounded spread (propagation), and Schur-bounded when its row/column sums of
block operator norms are finite; these are the finite-window shadows of the
Roe-algebra axioms.  The module also provides exact position commutators
[T, X_j], conjugation by covering isometries for subset inclusions, seeded
controlled random perturbations, and trace-summability profiles of the
confinement weight (1 + |x|^2)^(-s/2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput
from .geometry import DeloneSet, GridIndex
from .groupoid import BlockOperator

__all__ = [
    "SupportStats",
    "support_stats",
    "is_controlled",
    "position_commutator",
    "subset_injection",
    "covering_embed",
    "random_perturbation",
    "summability_profile",
]


@dataclass(frozen=True)
class SupportStats:
    """Support and size diagnostics of a block operator.

    propagation: max |x_i - x_j| over stored pairs; schur_row is
    sup_i sum_j of block operator norms, schur_col the column counterpart.
    """

    propagation: float
    nnz_blocks: int
    schur_row: float
    schur_col: float


def _block_norm(b: np.ndarray) -> float:
    return float(np.linalg.svd(b, compute_uv=False)[0])


def support_stats(T: BlockOperator) -> SupportStats:
    pts = T.sites.points
    n = len(T.sites)
    row = np.zeros(n)
    col = np.zeros(n)
    prop = 0.0
    for (i, j), b in T.entries.items():
        nrm = _block_norm(b)
        row[i] += nrm
        col[j] += nrm
        if i != j:
            prop = max(prop, float(np.linalg.norm(pts[i] - pts[j])))
    schur_row = float(row.max()) if n else 0.0
    schur_col = float(col.max()) if n else 0.0
    return SupportStats(prop, len(T.entries), schur_row, schur_col)


def is_controlled(T: BlockOperator, R: float) -> bool:
    """True iff the propagation of T is at most R."""
    if R < 0:
        raise InvalidInput("R must be nonnegative")
    return support_stats(T).propagation <= R


def position_commutator(T: BlockOperator, axis: int) -> BlockOperator:
    """[T, X_axis]: entry (i, j) is (x_j[axis] - x_i[axis]) * T_{i,j}, exactly.

    Anti-Hermitian whenever T is Hermitian; diagonal blocks drop out.
    """
    if not 0 <= axis < T.sites.dim:
        raise InvalidInput(f"axis {axis} out of range for dim {T.sites.dim}")
    coords = T.sites.points[:, axis]
    entries = {}
    for (i, j), b in T.entries.items():
        w = coords[j] - coords[i]
        if w != 0.0:
            entries[(i, j)] = w * b
    return BlockOperator(T.sites, T.block_dim, entries, hermitian=False)


def subset_injection(X: DeloneSet, Y: DeloneSet) -> np.ndarray:
    """Index map sending each X-site to the identical Y-site (distance 0).

    Raises InvalidInput when some X point is missing from Y or two X points
    collide onto one Y index.
    """
    if X.dim != Y.dim:
        raise InvalidInput("point sets have different dimensions")
    index = GridIndex(Y.points, cell=max(2.0 * Y.r_pack, 1e-9))
    out = np.empty(len(X), dtype=int)
    for i, x in enumerate(X.points):
        hits = index.query(x, 1e-12)
        if hits.size != 1:
            raise InvalidInput(f"X point {i} has {hits.size} matches in Y")
        out[i] = hits[0]
    if np.unique(out).size != out.size:
        raise InvalidInput("injection is not injective")
    return out


def covering_embed(T: BlockOperator, Y: DeloneSet, injection: np.ndarray) -> BlockOperator:
    """Conjugate T by the covering isometry V|x> = |injection(x)>.

    Entries are copied verbatim under the index map; every other row and
    column of the result is zero, so propagation, Schur norms and the nonzero
    spectrum are preserved exactly.
    """
    injection = np.asarray(injection, dtype=int)
    if injection.shape != (len(T.sites),):
        raise InvalidInput("injection length does not match the domain")
    if np.unique(injection).size != injection.size:
        raise InvalidInput("injection is not injective")
    if injection.min(initial=0) < 0 or injection.max(initial=-1) >= len(Y):
        raise InvalidInput("injection runs out of the codomain index range")
    d = np.linalg.norm(Y.points[injection] - T.sites.points, axis=1)
    if d.size and d.max() > 1e-12:
        raise InvalidInput("injection moves a site; only distance-0 embeddings are allowed")
    entries = {(int(injection[i]), int(injection[j])): b
               for (i, j), b in T.entries.items()}
    return BlockOperator(Y, T.block_dim, entries, hermitian=T.hermitian)


def random_perturbation(sites: DeloneSet, R: float, strength: float,
                        block_dim: int, symmetry: str = "none",
                        grading: np.ndarray | None = None,
                        seed: int = 0) -> BlockOperator:
    """Seeded Hermitian block noise with propagation <= R and per-block
    operator norm <= strength.

    Blocks are complex Gaussian, symmetrized, then clipped to the norm
    budget.  With symmetry="chiral" each block is projected onto the
    anticommutant of the supplied on-site grading, (B - G B G)/2, which
    anti-commutes with G exactly (G has +-1 diagonal).
    """
    if strength < 0:
        raise InvalidInput("strength must be nonnegative")
    if R < 0:
        raise InvalidInput("R must be nonnegative")
    if symmetry not in ("none", "chiral"):
        raise InvalidInput(f"unknown symmetry {symmetry!r}")
    if symmetry == "chiral":
        if grading is None:
            raise InvalidInput("chiral symmetry needs the on-site grading")
        grading = np.asarray(grading)
        if grading.shape != (block_dim, block_dim):
            raise InvalidInput("grading shape does not match block_dim")

    if strength == 0.0 or len(sites) == 0:
        return BlockOperator(sites, block_dim, {}, hermitian=True)

    pts = sites.points
    index = GridIndex(pts, cell=max(R, 1e-9))
    rng = np.random.default_rng(seed)
    entries: dict[tuple[int, int], np.ndarray] = {}
    for i in range(len(sites)):
        for j in index.query(pts[i], R):
            j = int(j)
            if j < i:
                continue
            B = rng.standard_normal((block_dim, block_dim)) \
                + 1.0j * rng.standard_normal((block_dim, block_dim))
            if j == i:
                B = 0.5 * (B + B.conj().T)
            if symmetry == "chiral":
                B = 0.5 * (B - grading @ B @ grading)
            nrm = _block_norm(B)
            if nrm > strength:
                B = B * (strength / nrm)
            if np.abs(B).max() > 0:
                entries[(i, j)] = B
                if j != i:
                    entries[(j, i)] = B.conj().T
    return BlockOperator(sites, block_dim, entries, hermitian=True)


def summability_profile(sites: DeloneSet, s: float, radii,
                        center=None) -> np.ndarray:
    """Partial sums 2^d * sum_{|x-c| <= rho} (1 + |x-c|^2)^(-s/2) over radii.

    For s > d these grow monotonically with shrinking shell increments —
    the finite-window trace-summability trend of the confinement weight.
    """
    radii = np.asarray(radii, dtype=float)
    if radii.size == 0 or np.any(np.diff(radii) <= 0):
        raise InvalidInput("radii must be a nonempty increasing sequence")
    c = sites.window_center if center is None else np.asarray(center, dtype=float)
    r2 = np.sum((sites.points - c) ** 2, axis=1)
    weight = (1.0 + r2) ** (-0.5 * s)
    factor = 2.0 ** sites.dim
    return np.array([factor * float(weight[r2 <= rho * rho].sum()) for rho in radii])
