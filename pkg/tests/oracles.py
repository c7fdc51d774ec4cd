"""Independent reference implementations used to cross-check the package.

Everything here is deliberately written with the dumbest workable algorithm
(brute-force scans, closed forms, direct geometric integration) and shares no
code with the package, so agreement is meaningful evidence.
"""

import math

import numpy as np

TAU = (1.0 + math.sqrt(5.0)) / 2.0

SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SY = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SZ = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


def brute_neighbors(points, x, radius):
    """All indices with |p - x| <= radius by a plain O(n) scan."""
    points = np.asarray(points, dtype=float)
    x = np.asarray(x, dtype=float)
    out = [i for i, p in enumerate(points) if np.linalg.norm(p - x) <= radius]
    return np.array(out, dtype=np.int64)


def brute_min_pair(points):
    """Half the minimum pairwise distance, by the O(n^2) double loop."""
    points = np.asarray(points, dtype=float)
    best = math.inf
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            best = min(best, float(np.linalg.norm(points[i] - points[j])))
    return best / 2.0


def brute_cover_scan(points, lo, hi, erode, step):
    """Max over a grid of centers (eroded window) of the nearest-site distance."""
    points = np.asarray(points, dtype=float)
    lo = np.asarray(lo, dtype=float) + erode
    hi = np.asarray(hi, dtype=float) - erode
    axes = [np.arange(a, b + step / 2, step) for a, b in zip(lo, hi)]
    worst = 0.0
    for c in np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(lo)):
        worst = max(worst, float(np.linalg.norm(points - c, axis=1).min()))
    return worst


def fibonacci_word(min_length):
    """Prefix of the infinite Fibonacci substitution word L -> LS, S -> L."""
    word = "L"
    while len(word) < min_length:
        word = "".join("LS" if ch == "L" else "L" for ch in word)
    return word


def gap_word(points_1d, tol=1e-9):
    """Consecutive-gap letters of a sorted 1D point list: tau -> L, 1 -> S."""
    gaps = np.diff(np.asarray(points_1d, dtype=float).ravel())
    letters = []
    for g in gaps:
        if abs(g - TAU) <= tol:
            letters.append("L")
        elif abs(g - 1.0) <= tol:
            letters.append("S")
        else:
            raise AssertionError(f"gap {g!r} is neither 1 nor tau")
    return "".join(letters)


def path_graph_eigenvalues(n, t=1.0):
    """Spectrum of the n-site open chain with hopping t: 2 t cos(k pi / (n+1))."""
    k = np.arange(1, n + 1)
    return np.sort(2.0 * t * np.cos(k * np.pi / (n + 1)))


def _solid_angle(a, b, c):
    """Oriented solid angle of the spherical triangle (a, b, c)."""
    num = float(np.dot(a, np.cross(b, c)))
    den = 1.0 + float(a @ b) + float(b @ c) + float(c @ a)
    return 2.0 * math.atan2(num, den)


def dvector_chern_lower(hk, n=96):
    """Chern number of the band below 0 of a traceless 2-band Bloch family.

    Decomposes h(k) = d(k) . sigma and sums oriented solid angles of the
    d-hat image over the triangulated k-torus; the mapping degree equals
    minus the lower-band Chern number.  The sign is anchored by counting
    preimages of the north pole for d = (sin k1, sin k2, M - cos k1 - cos k2)
    by hand: at M inside the (0, 2) lobe the preimages (pi,0), (0,pi), (pi,pi)
    carry Jacobian signs -1, -1, +1, so the degree is -1 while the lower band
    has Chern +1.
    """
    ks = 2.0 * np.pi * np.arange(n) / n
    u = np.empty((n, n, 3))
    for i, k1 in enumerate(ks):
        for j, k2 in enumerate(ks):
            h = hk(np.array([k1, k2]))
            d = np.array([h[0, 1].real, -h[0, 1].imag,
                          (h[0, 0] - h[1, 1]).real / 2.0])
            u[i, j] = d / np.linalg.norm(d)
    total = 0.0
    for i in range(n):
        for j in range(n):
            a, b = u[i, j], u[(i + 1) % n, j]
            c, d = u[(i + 1) % n, (j + 1) % n], u[i, (j + 1) % n]
            total += _solid_angle(a, b, c) + _solid_angle(a, c, d)
    deg = total / (4.0 * np.pi)
    nearest = round(deg)
    assert abs(deg - nearest) < 1e-6, f"degree {deg} is not integral"
    return -nearest


def winding_unwrap(ak, n=4096):
    """Winding of det A(k) over [0, 2pi) via phase unwrapping of dense samples."""
    ks = 2.0 * np.pi * np.arange(n + 1) / n
    dets = np.array([np.linalg.det(np.atleast_2d(ak(k))) for k in ks])
    assert np.abs(dets).min() > 1e-12, "det A(k) vanishes on the sample grid"
    phases = np.unwrap(np.angle(dets))
    w = (phases[-1] - phases[0]) / (2.0 * np.pi)
    nearest = round(w)
    assert abs(w - nearest) < 1e-6, f"winding {w} is not integral"
    return nearest
