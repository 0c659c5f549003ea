"""Guided vector modes of a step-index cylindrical waveguide.

Exact hybrid-mode (HE/EH) solutions for a homogeneous core of radius ``a``
in a homogeneous cladding. Lengths are in nm. Fields use units where the
vacuum impedance is 1, so H is measured in units of E/Z0.

Angular convention for azimuthal order m (one polarization):

    E_r, H_phi, E_z  ~ cos(m phi)
    E_phi, H_r, H_z  ~ sin(m phi)

The transverse components are real; the longitudinal ones are in
quadrature (purely imaginary).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq
from scipy.special import j0, j1, jv, k0e, k1e, kve

__all__ = [
    "ModeNotGuidedError",
    "ModeSolution",
    "solve_mode",
    "solve_modes",
    "guided_mode_family",
    "he11_index",
    "mode_overlap",
    "overlap_matrix",
    "radial_quadrature",
]

DELTA = 1e-6
N_SCAN = 2000
MIN_W = 0.05  # modes closer to cutoff than this are treated as not guided


class ModeNotGuidedError(ValueError):
    """Requested mode has no root in (n_clad, n_core)."""


def _kratio(m, w):
    # K_m'(w) / (w K_m(w)); exponentially scaled Bessel K keeps large w finite
    if m == 1:
        # dedicated order-0/1 routines are much faster than the general ones
        k0, k = k0e(w), k1e(w)
        kp = -0.5 * (k0 + k0 + 2 * k / w)
    else:
        k = kve(m, w)
        kp = -0.5 * (kve(m - 1, w) + kve(m + 1, w))
    return kp / (w * k)


def _kve(m, w):
    m = abs(m)
    if m == 0:
        return k0e(w)
    if m == 1:
        return k1e(w)
    if m == 2:
        return k0e(w) + 2 * k1e(w) / w
    return kve(m, w)


def _jm(m, u):
    """J_m(u) and J_m'(u) from a single pair of neighbouring orders."""
    if m == 1:
        jm1, jm = j0(u), j1(u)
    else:
        jm1, jm = jv(m - 1, u), jv(m, u)
    # J_m' = J_{m-1} - (m/u) J_m
    return jm, jm1 - m * jm / u


def _dispersion(n_eff, radius, n_core, n_clad, k0, m, family):
    """Pole-free dispersion function; zero at guided HE/EH modes."""
    n_eff = np.asarray(n_eff, dtype=float)
    u = radius * k0 * np.sqrt(n_core**2 - n_eff**2)
    w = radius * k0 * np.sqrt(n_eff**2 - n_clad**2)
    kq = _kratio(m, w)
    c = (n_core**2 + n_clad**2) / (2 * n_core**2)
    rp = np.sqrt(
        ((n_core**2 - n_clad**2) / (2 * n_core**2)) ** 2 * kq**2
        + (m * n_eff / n_core) ** 2 * (1 / u**2 + 1 / w**2) ** 2
    )
    sign = 1.0 if family == "HE" else -1.0
    J, Jp = _jm(m, u)
    t1 = u * Jp
    t2 = u**2 * J * (c * kq + sign * rp)
    return t1 + t2, np.maximum(np.abs(t1), np.abs(t2))


def _roots(radius, n_core, n_clad, k0, m, family, limit=None):
    u_min = radius * k0 * np.sqrt(n_core**2 - (n_core - DELTA) ** 2)
    u_max = radius * k0 * np.sqrt(n_core**2 - (n_clad + DELTA) ** 2)
    # uniform sampling in u resolves the Bessel oscillations evenly
    u = np.linspace(u_min, u_max, N_SCAN)
    ne = np.sqrt(n_core**2 - (u / (radius * k0)) ** 2)
    f, _ = _dispersion(ne, radius, n_core, n_clad, k0, m, family)
    idx = np.nonzero(np.sign(f[:-1]) * np.sign(f[1:]) < 0)[0]

    def fun(x):
        return float(_dispersion(x, radius, n_core, n_clad, k0, m, family)[0])

    roots = []
    # sign changes are ordered by increasing u, i.e. decreasing n_eff
    for i in idx[:limit]:
        lo, hi = sorted((ne[i], ne[i + 1]))
        r = brentq(fun, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
        w = radius * k0 * np.sqrt(r**2 - n_clad**2)
        if w >= MIN_W:
            roots.append(r)
    return sorted(roots, reverse=True)


@dataclass(frozen=True)
class ModeSolution:
    """A power-normalized guided hybrid mode.

    ``label`` is ``(family, m, p)``; ``amp_e`` and ``amp_h`` are the core
    amplitudes of E_z and H_z chosen so the axial power flux is one.
    """

    label: tuple
    n_eff: float
    radius: float
    wavelength: float
    n_core: float
    n_clad: float
    amp_e: float = 1.0
    amp_h: float = 0.0
    residual: float = 0.0
    _cache: dict = field(default_factory=dict, repr=False, compare=False, hash=False)

    @property
    def m(self) -> int:
        return self.label[1]

    @property
    def k0(self) -> float:
        return 2 * np.pi / self.wavelength

    @property
    def propagation_constant(self) -> float:
        return self.k0 * self.n_eff

    @property
    def u(self) -> float:
        return self.radius * self.k0 * np.sqrt(self.n_core**2 - self.n_eff**2)

    @property
    def w(self) -> float:
        return self.radius * self.k0 * np.sqrt(self.n_eff**2 - self.n_clad**2)

    @property
    def decay(self) -> float:
        """Field decay constant in the cladding, 1/nm."""
        return self.w / self.radius

    def radial_fields(self, r):
        """Radial profiles (e_r, e_phi, e_z, h_r, h_phi, h_z) at radii ``r``.

        e_z and h_z are returned as their imaginary parts.
        """
        r = np.atleast_1d(np.asarray(r, dtype=float))
        a, m, k0 = self.radius, self.m, self.k0
        beta = self.propagation_constant
        h, q = self.u / a, self.w / a
        A, B = self.amp_e, self.amp_h
        out = np.zeros((6, r.size))
        inside = r < a
        ri = np.where(r[inside] == 0, 1e-12 * a, r[inside])
        x = h * ri
        J, Jp = _jm(m, x)
        n1sq = self.n_core**2
        out[0, inside] = (beta * h * A * Jp + k0 * m * B * J / ri) / h**2
        out[1, inside] = -(beta * m * A * J / ri + k0 * h * B * Jp) / h**2
        out[2, inside] = A * J
        out[3, inside] = (beta * h * B * Jp + k0 * n1sq * m * A * J / ri) / h**2
        out[4, inside] = (beta * m * B * J / ri + k0 * n1sq * h * A * Jp) / h**2
        out[5, inside] = B * J

        ro = r[~inside]
        if ro.size:
            y = q * ro
            scale = _jm(m, self.u)[0] / _kve(m, self.w)
            decay = np.exp(-(y - self.w))
            K = _kve(m, y) * decay * scale
            Kp = -0.5 * (_kve(m - 1, y) + _kve(m + 1, y)) * decay * scale
            C, D = A, B
            n2sq = self.n_clad**2
            out[0, ~inside] = -(beta * q * C * Kp + k0 * m * D * K / ro) / q**2
            out[1, ~inside] = (beta * m * C * K / ro + k0 * q * D * Kp) / q**2
            out[2, ~inside] = C * K
            out[3, ~inside] = -(beta * q * D * Kp + k0 * n2sq * m * C * K / ro) / q**2
            out[4, ~inside] = -(beta * m * D * K / ro + k0 * n2sq * q * C * Kp) / q**2
            out[5, ~inside] = D * K
        return out

    def field_sampler(self, r, phi):
        """Complex cylindrical components of E and H at (r, phi)."""
        r, phi = np.broadcast_arrays(np.asarray(r, float), np.asarray(phi, float))
        f = self.radial_fields(r.ravel()).reshape((6,) + r.shape)
        c, s = np.cos(self.m * phi), np.sin(self.m * phi)
        return {
            "E_r": f[0] * c + 0j,
            "E_phi": f[1] * s + 0j,
            "E_z": 1j * f[2] * c,
            "H_r": f[3] * s + 0j,
            "H_phi": f[4] * c + 0j,
            "H_z": 1j * f[5] * s,
        }

    def power(self, order: int = 1) -> float:
        """Axial power flux; ``order`` scales the quadrature resolution."""
        r, wt = radial_quadrature([self.radius], self.decay, order=order)
        f = self.radial_fields(r)
        return float(np.pi / 2 * np.sum(wt * r * (f[0] * f[4] - f[1] * f[3])))

    def energy_integrals(self):
        """Transverse integrals (int eps|E_t|^2 dA, int eps|E_z|^2 dA) and eps|E|^2 on axis."""
        if "energy" not in self._cache:
            r, wt = radial_quadrature([self.radius], self.decay)
            f = self.radial_fields(r)
            eps = np.where(r < self.radius, self.n_core**2, self.n_clad**2)
            # angular averages: cos^2 and sin^2 both integrate to pi
            wt_ = np.pi * np.sum(wt * r * eps * (f[0] ** 2 + f[1] ** 2))
            wz = np.pi * np.sum(wt * r * eps * f[2] ** 2)
            f0 = self.radial_fields(np.array([1e-9 * self.radius]))
            # on axis (m = 1): E_r cos - E_phi sin gives |E_x| = |e_r| = |e_phi|
            peak = self.n_core**2 * (f0[0, 0] ** 2 if self.m == 1 else 0.0)
            self._cache["energy"] = (float(wt_), float(wz), float(peak))
        return self._cache["energy"]


@lru_cache(maxsize=64)
def _gauss(n):
    return np.polynomial.legendre.leggauss(n)


def radial_quadrature(breaks, decay, order: int = 1, n_per=64):
    """Gauss-Legendre nodes and weights on [0, inf) for piecewise fields.

    ``breaks`` are radii where fields have kinks; beyond the last one the
    integrand decays like exp(-2 * decay * r).
    """
    x, w = _gauss(n_per * order)
    edges = [0.0] + sorted(float(b) for b in breaks)
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi > lo:
            nodes.append(0.5 * (hi - lo) * x + 0.5 * (hi + lo))
            weights.append(0.5 * (hi - lo) * w)
    last = edges[-1]
    tail = 40.0 / decay
    width = min(last, 1.0 / decay) / 4.0
    lo = last
    xt, wt = _gauss(24 * order)
    while lo < last + tail:
        hi = lo + width
        nodes.append(0.5 * (hi - lo) * xt + 0.5 * (hi + lo))
        weights.append(0.5 * (hi - lo) * wt)
        lo, width = hi, width * 2
    return np.concatenate(nodes), np.concatenate(weights)


def _normalize(label, n_eff, radius, n_core, n_clad, wavelength, residual):
    k0 = 2 * np.pi / wavelength
    m = label[1]
    u = radius * k0 * np.sqrt(n_core**2 - n_eff**2)
    w = radius * k0 * np.sqrt(n_eff**2 - n_clad**2)
    h, q = u / radius, w / radius
    beta = k0 * n_eff
    J, Jp = _jm(m, u)
    kq = _kratio(m, w) * w  # K'/K
    b_over_a = -(m * beta / radius) * J * (1 / h**2 + 1 / q**2) / (k0 * (Jp / h + J * kq / q))
    mode = ModeSolution(label, float(n_eff), radius, wavelength, n_core, n_clad, 1.0, b_over_a, residual)
    p = mode.power()
    if p <= 0:
        raise RuntimeError(f"non-positive power flux for mode {label}")
    s = 1 / np.sqrt(p)
    # fix the sign so that the dominant transverse field points along +x on axis
    r0 = np.array([0.25 * radius])
    if mode.radial_fields(r0)[0, 0] < 0:
        s = -s
    return ModeSolution(label, float(n_eff), radius, wavelength, n_core, n_clad, s, s * b_over_a, residual)


def solve_mode(radius, n_core, n_clad, wavelength, label=("HE", 1, 1)) -> ModeSolution:
    """Solve one labeled hybrid mode ``(family, m, p)``.

    Raises ModeNotGuidedError if the mode is cut off.
    """
    family, m, p = label
    if radius <= 0 or wavelength <= 0:
        raise ValueError("radius and wavelength must be positive")
    if n_core <= n_clad:
        raise ValueError("n_core must exceed n_clad")
    if family not in ("HE", "EH") or m < 1 or p < 1:
        raise ValueError(f"unsupported mode label {label!r}")
    k0 = 2 * np.pi / wavelength
    roots = _roots(radius, n_core, n_clad, k0, m, family)
    if len(roots) < p:
        raise ModeNotGuidedError(f"{family}{m}{p} not guided at radius {radius} nm")
    n_eff = roots[p - 1]
    f, scale = _dispersion(n_eff, radius, n_core, n_clad, k0, m, family)
    return _normalize(tuple(label), n_eff, radius, n_core, n_clad, wavelength, float(abs(f) / scale))


def guided_mode_family(radius, n_core, n_clad, wavelength, m=1, limit=None):
    """Guided HE_m and EH_m modes sorted by decreasing n_eff (at most ``limit``)."""
    k0 = 2 * np.pi / wavelength
    found = []
    for family in ("HE", "EH"):
        for p, ne in enumerate(_roots(radius, n_core, n_clad, k0, m, family, limit), start=1):
            found.append(((family, m, p), ne))
    found.sort(key=lambda t: -t[1])
    found = found[:limit]
    modes = []
    for label, ne in found:
        f, scale = _dispersion(ne, radius, n_core, n_clad, k0, m, label[0])
        modes.append(_normalize(label, ne, radius, n_core, n_clad, wavelength, float(abs(f) / scale)))
    return modes


def solve_modes(radius, n_core, n_clad, wavelength, n_modes, m=1):
    """The ``n_modes`` highest-index guided modes of azimuthal order m.

    Fewer are returned when fewer are guided.
    """
    return guided_mode_family(radius, n_core, n_clad, wavelength, m, limit=n_modes)


@lru_cache(maxsize=200_000)
def he11_index(radius: float, n_core: float, wavelength: float, n_clad: float = 1.0) -> float:
    """Effective index of HE11 (cached; per-process cache)."""
    k0 = 2 * np.pi / wavelength
    roots = _roots(radius, n_core, n_clad, k0, 1, "HE", limit=1)
    if not roots:
        raise ModeNotGuidedError("HE11 not found")
    return float(roots[0])


def mode_overlap(a: ModeSolution, b: ModeSolution, order: int = 1) -> float:
    """Cross-power overlap 1/2 * int (E_a x H_b) . z dA of two normalized modes.

    Modes of different azimuthal order are orthogonal and give 0.
    """
    if not np.isclose(a.wavelength, b.wavelength, rtol=1e-12):
        raise ValueError("modes must share the wavelength")
    if a.m != b.m:
        return 0.0
    r, wt = radial_quadrature([a.radius, b.radius], min(a.decay, b.decay), order=order)
    fa, fb = a.radial_fields(r), b.radial_fields(r)
    return float(np.pi / 2 * np.sum(wt * r * (fa[0] * fb[4] - fa[1] * fb[3])))


def overlap_matrix(left, right, order: int = 1):
    """Matrix O[i, j] = mode_overlap(left[i], right[j])."""
    if not left or not right:
        return np.zeros((len(left), len(right)))
    decay = min(m.decay for m in list(left) + list(right))
    radii = {m.radius for m in list(left) + list(right)}
    r, wt = radial_quadrature(sorted(radii), decay, order=order)
    fl = np.array([m.radial_fields(r) for m in left])
    fr = np.array([m.radial_fields(r) for m in right])
    wr = wt * r * np.pi / 2
    return np.einsum("k,ik,jk->ij", wr, fl[:, 0], fr[:, 4]) - np.einsum(
        "k,ik,jk->ij", wr, fl[:, 1], fr[:, 3]
    )
