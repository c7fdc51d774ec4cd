"""Pattern-equivariant hopping kernels and their localized representations.

A hopping function is a compactly supported kernel f(local pattern, a) valued
in N x N complex blocks.  Its localized representation on a point set omega
is the block operator with matrix elements

    <x| pi_omega(f) |y> = f(omega - x, y - x),

i.e. entry (i, j) is the kernel evaluated on the pattern seen from site i and
the displacement to site j.  Self-adjointness of the represented operator is
exactly the involution identity f(w, a) = f(w - a, -a)^dagger, which is
verified on every stored pair.

The stacking map sends an operator T on Lambda to the operator on the product
Lambda x L with entries T_{x,y} * delta_{a,b}: the original hopping repeated
identically along every layer of L, with no hopping between layers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Callable, Mapping

import numpy as np

from .errors import InvalidInput, KernelNotSelfAdjoint
from .geometry import DeloneSet, GridIndex, LocalPattern, product_delone, translate

__all__ = [
    "HoppingFunction",
    "BlockOperator",
    "builtin_model",
    "represent",
    "covariance_check",
    "stack_operator",
    "bloch_hamiltonian",
    "PAULI",
]

_TOL = 1e-9

PAULI = {
    "x": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}


@dataclass(frozen=True)
class HoppingFunction:
    """A finite-range groupoid kernel: (LocalPattern, displacement) -> block.

    The kernel must vanish for |a| > R_f and may inspect the pattern only
    within rho_f.  It must be a pure function of its arguments.
    """

    dim: int
    R_f: float
    rho_f: float
    N: int
    kernel: Callable[[LocalPattern, np.ndarray], np.ndarray]
    tag: str
    params: Mapping = field(default_factory=dict)


@dataclass(frozen=True)
class BlockOperator:
    """Sparse site-indexed block matrix on l^2(sites) (x) C^N.

    entries maps (row site, column site) to a nonzero N x N complex block;
    dense index p = site * N + orbital.
    """

    sites: DeloneSet
    block_dim: int
    entries: Mapping[tuple[int, int], np.ndarray]
    hermitian: bool = False

    def __post_init__(self):
        frozen = {}
        for key, block in self.entries.items():
            b = np.asarray(block, dtype=complex)
            if b.shape != (self.block_dim, self.block_dim):
                raise InvalidInput(f"block {key} has wrong shape {b.shape}")
            if not np.abs(b).max() > 0:
                raise InvalidInput(f"stored block {key} is zero")
            b = b.copy()
            b.setflags(write=False)
            frozen[key] = b
        object.__setattr__(self, "entries", MappingProxyType(frozen))

    @property
    def dense_dim(self) -> int:
        return len(self.sites) * self.block_dim

    def block(self, i: int, j: int) -> np.ndarray:
        """Entry (i, j), a zero block if absent."""
        hit = self.entries.get((i, j))
        if hit is None:
            return np.zeros((self.block_dim, self.block_dim), dtype=complex)
        return hit

    def to_dense(self) -> np.ndarray:
        N = self.block_dim
        out = np.zeros((self.dense_dim, self.dense_dim), dtype=complex)
        for (i, j), b in self.entries.items():
            out[i * N:(i + 1) * N, j * N:(j + 1) * N] = b
        return out

    def add(self, other: "BlockOperator") -> "BlockOperator":
        if other.block_dim != self.block_dim or len(other.sites) != len(self.sites):
            raise InvalidInput("operator shapes do not match")
        if not np.array_equal(other.sites.points, self.sites.points):
            raise InvalidInput("operators live on different site lists")
        keys = sorted(set(self.entries) | set(other.entries))
        entries = {}
        for key in keys:
            b = self.block(*key) + other.block(*key)
            if np.abs(b).max() > 0:
                entries[key] = b
        return BlockOperator(self.sites, self.block_dim, entries,
                             hermitian=self.hermitian and other.hermitian)

    @staticmethod
    def identity(sites: DeloneSet, block_dim: int) -> "BlockOperator":
        eye = np.eye(block_dim, dtype=complex)
        entries = {(i, i): eye for i in range(len(sites))}
        return BlockOperator(sites, block_dim, entries, hermitian=True)


# ---------------------------------------------------------------------------
# Built-in models
# ---------------------------------------------------------------------------

def _nn_laplacian(dim: int, t: float = 1.0, distance: float = 1.0) -> HoppingFunction:
    def kernel(pattern, a):
        if abs(np.linalg.norm(a) - distance) <= _TOL:
            return np.array([[t]], dtype=complex)
        return np.zeros((1, 1), dtype=complex)

    return HoppingFunction(dim, distance + _TOL, distance + _TOL, 1, kernel,
                           "nn_laplacian", {"t": t, "distance": distance, "dim": dim})


def _dimer_chain_1d(t1: float = 1.0) -> HoppingFunction:
    """Decoupled on-site dimers: the flat, trivial chiral reference."""
    onsite = t1 * PAULI["x"]

    def kernel(pattern, a):
        if np.linalg.norm(a) <= _TOL:
            return onsite.copy()
        return np.zeros((2, 2), dtype=complex)

    return HoppingFunction(1, 1e-6, 1e-6, 2, kernel, "dimer_chain_1d", {"t1": t1})


def _chiral_ssh_1d(t1: float = 0.5, t2: float = 1.0, max_gap: float = 2.0) -> HoppingFunction:
    """Two-orbital chain: intra-cell hopping t1 on site, inter-cell hopping t2
    along the successor bond.

    Each site carries an (A, B) orbital pair; t1 couples them on site and t2
    couples B to the A orbital of the next site along the chain.  The
    successor displacement is read off the local pattern (smallest positive
    gap), so the kernel is pattern-equivariant and works unchanged on
    aperiodic chains, where the bond lengths vary but the A-B-A-B structure
    along the sorted site order is the same.  Chiral grading: sigma_z per
    site.
    """
    lower = np.array([[0.0, 0.0], [t2, 0.0]], dtype=complex)  # a = +gap
    upper = lower.conj().T                                    # a = -gap
    onsite = t1 * PAULI["x"]

    def kernel(pattern, a):
        s = float(a[0])
        if abs(s) <= _TOL:
            return onsite.copy()
        coords = pattern.points[:, 0]
        if s > 0:
            pos = coords[coords > _TOL]
            if pos.size and abs(s - pos.min()) <= _TOL:
                return lower.copy()
        else:
            neg = coords[coords < -_TOL]
            if neg.size and abs(s - neg.max()) <= _TOL:
                return upper.copy()
        return np.zeros((2, 2), dtype=complex)

    return HoppingFunction(1, max_gap, max_gap, 2, kernel, "chiral_ssh_1d",
                           {"t1": t1, "t2": t2, "max_gap": max_gap})


def _chern_2band_2d(M: float = 1.0, t: float = 1.0, range_cut: float = 2.2) -> HoppingFunction:
    """Two-band kernel carrying a Chern phase on arbitrary planar patterns.

    Hopping along displacement a combines a sigma_z part with an in-plane
    sigma part phased by the bond angle phi = arg(a_0 + i a_1), with a smooth
    radial envelope t * exp(1 - |a|) cut off at range_cut; the on-site block
    is the mass term M sigma_z.  On the unit square lattice the
    nearest-neighbor part reduces to the standard two-band Chern model with
    d(k) = (t sin k1, t sin k2, M - t cos k1 - t cos k2), and the orientation
    is chosen so that M = 1, t = 1 carries Chern number +1 (the longer bonds
    widen the topological mass window but keep that phase assignment).
    """
    sz, sx, sy = PAULI["z"], PAULI["x"], PAULI["y"]
    onsite = M * sz

    def kernel(pattern, a):
        r = float(np.linalg.norm(a))
        if r <= _TOL:
            return onsite.copy()
        if r > range_cut:
            return np.zeros((2, 2), dtype=complex)
        amp = t * math.exp(1.0 - r)
        phi = math.atan2(float(a[1]), float(a[0]))
        return -0.5 * amp * (sz + 1.0j * (math.cos(phi) * sx + math.sin(phi) * sy))

    return HoppingFunction(2, range_cut, 0.1, 2, kernel, "chern_2band_2d",
                           {"M": M, "t": t, "range_cut": range_cut})


_BUILTINS = {
    "nn_laplacian": _nn_laplacian,
    "dimer_chain_1d": _dimer_chain_1d,
    "chiral_ssh_1d": _chiral_ssh_1d,
    "chern_2band_2d": _chern_2band_2d,
}


def builtin_model(name: str, **params) -> HoppingFunction:
    """Construct one of the built-in hopping functions by name."""
    try:
        factory = _BUILTINS[name]
    except KeyError:
        raise InvalidInput(f"unknown model {name!r}; choices: {sorted(_BUILTINS)}")
    try:
        return factory(**params)
    except TypeError as err:
        raise InvalidInput(f"bad parameters for model {name!r}: {err}")


# ---------------------------------------------------------------------------
# Localized representation
# ---------------------------------------------------------------------------

def represent(f: HoppingFunction, omega: DeloneSet) -> BlockOperator:
    """Materialize pi_omega(f): entry (i, j) = f(pattern at i, x_j - x_i).

    Raises KernelNotSelfAdjoint when the involution identity fails on any
    stored pair (tolerance 1e-12); on success the result carries
    hermitian=True.
    """
    if f.dim != omega.dim:
        raise InvalidInput("kernel dimension does not match the point set")
    n = len(omega)
    pts = omega.points
    radius = max(f.R_f, 1e-9)
    cell = max(radius, f.rho_f, 1e-9)
    index = GridIndex(pts, cell=cell)

    entries: dict[tuple[int, int], np.ndarray] = {}
    for i in range(n):
        pat_idx = index.query(pts[i], f.rho_f) if f.rho_f > 0 else np.array([i])
        pattern = LocalPattern(omega.dim, f.rho_f, pts[pat_idx] - pts[i])
        for j in index.query(pts[i], radius):
            block = np.asarray(f.kernel(pattern, pts[j] - pts[i]), dtype=complex)
            if np.abs(block).max() > 0:
                entries[(i, int(j))] = block

    worst = 0.0
    worst_pair = None
    for (i, j), b in entries.items():
        partner = entries.get((j, i))
        other = partner.conj().T if partner is not None else np.zeros_like(b)
        res = float(np.abs(b - other).max())
        if res > worst:
            worst, worst_pair = res, (i, j)
    if worst > 1e-12:
        raise KernelNotSelfAdjoint(
            f"involution identity fails at site pair {worst_pair}: residual {worst:.3e}"
        )
    return BlockOperator(omega, f.N, entries, hermitian=True)


def covariance_check(f: HoppingFunction, omega: DeloneSet, v) -> float:
    """Max deviation of pi_{omega - v}(f) from pi_omega(f) on interior pairs.

    The site bijection x -> x - v identifies the two operators; sites within
    R_f + rho_f of the window boundary are excluded, since their patterns are
    truncated differently before and after the translation.
    """
    v = np.asarray(v, dtype=float)
    h1 = represent(f, omega)
    h2 = represent(f, translate(omega, v))
    lo, hi = omega.window
    margin = f.R_f + f.rho_f
    interior = np.all((omega.points - lo >= margin) & (hi - omega.points >= margin), axis=1)

    res = 0.0
    for key in set(h1.entries) | set(h2.entries):
        i, j = key
        if interior[i] and interior[j]:
            res = max(res, float(np.abs(h1.block(i, j) - h2.block(i, j)).max()))
    return res


def stack_operator(T: BlockOperator, L: DeloneSet) -> BlockOperator:
    """Stack T along L: entries ((x,a),(y,b)) = T_{x,y} delta_{a,b}.

    The result lives on the product point set, with product site (i, a) at
    index i * len(L) + a; its spectrum is the spectrum of T with every
    eigenvalue repeated len(L) times.
    """
    prod = product_delone(T.sites, L)
    nb = len(L)
    entries = {}
    for (i, j), b in T.entries.items():
        for a in range(nb):
            entries[(i * nb + a, j * nb + a)] = b
    return BlockOperator(prod, T.block_dim, entries, hermitian=T.hermitian)


def bloch_hamiltonian(f: HoppingFunction, basis) -> Callable[[np.ndarray], np.ndarray]:
    """Periodic (Bloch) reduction of a kernel on the lattice spanned by basis.

    Returns k -> H(k) = sum_a f(pattern, a) exp(i k . a) over lattice
    displacements a with |a| <= R_f, with `pattern` the lattice pattern seen
    from any site.  Hermitian for every k because of the involution identity.
    """
    basis = np.asarray(basis, dtype=float)
    d = basis.shape[0]
    if f.dim != d:
        raise InvalidInput("kernel dimension does not match the lattice basis")
    reach = max(f.R_f, f.rho_f)
    shortest = min(np.linalg.norm(basis, axis=0))
    kmax = int(math.ceil(reach / shortest)) + 1
    rng = np.arange(-kmax, kmax + 1)
    ns = np.stack(np.meshgrid(*([rng] * d), indexing="ij"), axis=-1).reshape(-1, d)
    vecs = ns @ basis.T
    norms = np.linalg.norm(vecs, axis=1)

    pat_pts = vecs[norms <= f.rho_f + 1e-12]
    pat_pts = pat_pts[np.lexsort(pat_pts.T[::-1])]
    pattern = LocalPattern(d, max(f.rho_f, 1e-9), pat_pts)

    hops: list[tuple[np.ndarray, np.ndarray]] = []
    for a, r in zip(vecs, norms):
        if r <= f.R_f + 1e-12:
            block = np.asarray(f.kernel(pattern, a), dtype=complex)
            if np.abs(block).max() > 0:
                hops.append((a.copy(), block))

    def hk(k) -> np.ndarray:
        k = np.atleast_1d(np.asarray(k, dtype=float))
        out = np.zeros((f.N, f.N), dtype=complex)
        for a, block in hops:
            out += block * np.exp(1.0j * float(k @ a))
        return out

    return hk
