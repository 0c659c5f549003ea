"""One-dimensional effective-index model along the device axis.

Each layer becomes a segment whose index is the local HE11 effective index.
Uniform layers use the index at their mean radius; long homogeneous tapers
are graded segments (index varies along z, no internal reflection, phase
k0 * integral n dz), which is the fine-staircase limit of the same model.
Material dispersion of n_eff is a quadratic in wavelength through three
sampling wavelengths.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Chebyshev
from scipy.optimize import brentq

from .geometry import DeviceGeometry
from .modesolver import _gauss, he11_index, solve_mode

log = logging.getLogger(__name__)

LAMBDA_STEP = 20.0  # spacing of the dispersion sampling wavelengths (nm)
SCAN_HALF_WIDTH = 30.0
SCAN_STEP = 0.05
CHEB_NODES = 32


class ResonanceNotFoundError(RuntimeError):
    pass


@dataclass(frozen=True)
class Segment:
    """Axial segment; ``index`` holds one Chebyshev polynomial in z per sampling wavelength."""

    thickness: float
    index: tuple
    radius_bottom: float = 1.0
    radius_top: float = 1.0
    n_core: float = 1.0
    graded: bool = False

    def n(self, weights, z):
        return sum(w * p(z) for w, p in zip(weights, self.index))

    def phase_integral(self, weights, z=None):
        """Integral of n from the segment bottom to z (default: whole segment)."""
        z = self.thickness if z is None else z
        return sum(w * (p.integ(lbnd=0)(z)) for w, p in zip(weights, self.index))


def _const(n, d):
    return Chebyshev([n], domain=[0, d])


def uniform_segment(n, d, nodes=3):
    """Non-dispersive uniform segment of index ``n`` and thickness ``d``."""
    return Segment(d, tuple(_const(n, d) for _ in range(nodes)))


@dataclass(frozen=True)
class AxialStack:
    """Segments from substrate to top with the QD inside ``segments[qd_segment]``.

    ``r_bottom``/``r_top`` override the Fresnel reflection at the outer
    boundaries (e.g. ideal mirrors).
    """

    segments: tuple
    qd_segment: int
    qd_offset: float
    wavelength: float
    n_substrate: float = 1.0
    n_exit: float = 1.0
    lambda_nodes: tuple = (0.0, 0.0, 0.0)
    r_bottom: complex | None = None
    r_top: complex | None = None
    top_limit: int | None = None  # segments at or above this index are excluded from V
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    # construction --------------------------------------------------------
    @classmethod
    def from_uniform(cls, indices, thicknesses, qd_segment, qd_offset, wavelength, n_substrate=1.0, n_exit=1.0, **kw):
        segs = tuple(uniform_segment(n, d) for n, d in zip(indices, thicknesses))
        lam = float(wavelength)
        return cls(segs, qd_segment, qd_offset, lam, n_substrate, n_exit, (lam - LAMBDA_STEP, lam, lam + LAMBDA_STEP), **kw)

    @classmethod
    def from_geometry(cls, geom: DeviceGeometry, dispersion: bool = True, exclude_top_taper: bool = True):
        lam0 = geom.design_wavelength
        lams = (lam0 - LAMBDA_STEP, lam0, lam0 + LAMBDA_STEP) if dispersion else (lam0, lam0, lam0)
        segs = []
        for layer in geom.layers:
            n_core, d = layer.material.refractive_index, layer.thickness
            graded = layer.is_taper and d > lam0
            if graded:
                polys = tuple(
                    Chebyshev.interpolate(
                        lambda z, lam=lam: np.array(
                            [he11_index(float(layer.radius_bottom + (layer.radius_top - layer.radius_bottom) * zi / d), n_core, lam) for zi in np.atleast_1d(z)]
                        ),
                        CHEB_NODES - 1,
                        domain=[0, d],
                    )
                    for lam in lams
                )
            elif np.isfinite(layer.mean_radius):
                polys = tuple(_const(he11_index(float(layer.mean_radius), n_core, lam), d) for lam in lams)
            else:
                polys = tuple(_const(n_core, d) for _ in lams)
            segs.append(Segment(d, polys, layer.radius_bottom, layer.radius_top, n_core, graded))
        top_limit = geom.top_taper_index if exclude_top_taper else None
        if exclude_top_taper and top_limit is None and geom.layers[-1].material.name == "AR":
            top_limit = len(geom.layers) - 1
        return cls(
            tuple(segs),
            geom.qd_layer_index,
            geom.qd_axial_offset,
            lam0,
            geom.substrate.refractive_index,
            1.0,
            lams,
            top_limit=top_limit,
        )

    # dispersion ----------------------------------------------------------
    def weights(self, lam):
        """Quadratic Lagrange weights of the three sampling wavelengths."""
        lam = np.asarray(lam)
        a, b, c = self.lambda_nodes
        if a == b == c:
            return (np.ones_like(lam), np.zeros_like(lam), np.zeros_like(lam))
        return (
            (lam - b) * (lam - c) / ((a - b) * (a - c)),
            (lam - a) * (lam - c) / ((b - a) * (b - c)),
            (lam - a) * (lam - b) / ((c - a) * (c - b)),
        )

    def _ends(self, w):
        """Index at the bottom and top of every segment, and its phase thickness factor."""
        nb = [s.n(w, 0.0) for s in self.segments]
        nt = [s.n(w, s.thickness) for s in self.segments]
        pint = [s.phase_integral(w) for s in self.segments]
        return nb, nt, pint

    # reflection ----------------------------------------------------------
    def reflections(self, lam):
        """(r_up, r_down) seen from the QD plane, vectorized over wavelength."""
        lam = np.asarray(lam, dtype=complex if np.iscomplexobj(lam) else float)
        w = self.weights(lam)
        k0 = 2 * np.pi / lam
        nb, nt, pint = self._ends(w)
        q, segs = self.qd_segment, self.segments
        z_q = self.qd_offset

        # looking up: start at the exit boundary and walk down to the QD
        if self.r_top is not None:
            r = np.full(np.shape(lam), self.r_top, dtype=complex)
        else:
            r = (nt[-1] - self.n_exit) / (nt[-1] + self.n_exit) + 0j
        for j in range(len(segs) - 1, q, -1):
            r = r * np.exp(2j * k0 * pint[j])
            rho = (nt[j - 1] - nb[j]) / (nt[j - 1] + nb[j])
            r = (rho + r) / (1 + rho * r)
        r_up = r * np.exp(2j * k0 * (pint[q] - segs[q].phase_integral(w, z_q)))

        if self.r_bottom is not None:
            r = np.full(np.shape(lam), self.r_bottom, dtype=complex)
        else:
            r = (nb[0] - self.n_substrate) / (nb[0] + self.n_substrate) + 0j
        for j in range(0, q):
            r = r * np.exp(2j * k0 * pint[j])
            rho = (nb[j + 1] - nt[j]) / (nb[j + 1] + nt[j])
            r = (rho + r) / (1 + rho * r)
        r_down = r * np.exp(2j * k0 * segs[q].phase_integral(w, z_q))
        return r_up, r_down

    def ldos(self, lam):
        """Emitter power into the axial channel relative to a homogeneous medium."""
        ru, rd = self.reflections(lam)
        return np.real((1 + ru) * (1 + rd) / (1 - ru * rd))

    def upward_fraction(self, lam):
        """Share of the emitted power leaving through the top boundary."""
        ru, rd = self.reflections(lam)
        den = np.abs(1 - ru * rd) ** 2
        up = np.abs(1 + rd) ** 2 * (1 - np.abs(ru) ** 2) / den
        down = np.abs(1 + ru) ** 2 * (1 - np.abs(rd) ** 2) / den
        return up / (up + down)


def dbr_reflection(n_incident, layers, n_exit, wavelength):
    """Amplitude reflection of a layer list [(n, d), ...] seen from ``n_incident``.

    Layers are ordered away from the incidence side.
    """
    segs = [uniform_segment(n_incident, 1.0)] + [uniform_segment(n, d) for n, d in layers]
    stack = AxialStack(
        tuple(segs), 0, 1.0, wavelength, 1.0, n_exit, (wavelength, wavelength, wavelength)
    )
    return stack.reflections(wavelength)[0]


# resonance -----------------------------------------------------------------
def _round_trip(stack, lam):
    ru, rd = stack.reflections(lam)
    return ru * rd


def find_resonances(stack: AxialStack, half_width=SCAN_HALF_WIDTH, step=SCAN_STEP):
    """All antinode resonances (zero round-trip phase, QD at a field maximum) in the scan window."""
    lam0 = stack.wavelength
    grid = np.arange(lam0 - half_width, lam0 + half_width + 0.5 * step, step)
    rt = _round_trip(stack, grid)
    out = []
    im = np.imag(rt)
    for i in np.nonzero(np.sign(im[:-1]) != np.sign(im[1:]))[0]:
        if np.real(rt[i]) <= 0 or np.real(rt[i + 1]) <= 0:
            continue
        lam = brentq(lambda x: np.imag(_round_trip(stack, x)), grid[i], grid[i + 1], xtol=1e-12)
        ru, _ = stack.reflections(lam)
        if np.real(ru) > 0:  # node resonances have the mirrors in antiphase at the QD
            out.append(lam)
    return out


def find_resonance(stack: AxialStack, **kw) -> float:
    """Antinode resonance nearest the design wavelength, at the LDOS maximum."""
    res = find_resonances(stack, **kw)
    if not res:
        raise ResonanceNotFoundError(f"no cavity resonance within {SCAN_HALF_WIDTH} nm of {stack.wavelength} nm")
    lam = min(res, key=lambda x: abs(x - stack.wavelength))
    width = lam / max(complex_pole_q(stack, lam), 1.0)
    from scipy.optimize import minimize_scalar

    opt = minimize_scalar(
        lambda x: -stack.ldos(x),
        bracket=(lam - 0.3 * width, lam, lam + 0.3 * width),
        tol=1e-12,
    )
    if abs(opt.x - lam) < width:
        lam = float(opt.x)
    return lam


def complex_pole_q(stack: AxialStack, lam: float) -> float:
    """Q from the complex-wavelength zero of 1 - r_up r_down near ``lam``."""
    f = lambda x: 1 - _round_trip(stack, x)
    z = complex(lam)
    h = 1e-6 * lam
    for _ in range(60):
        d = (f(z + h) - f(z - h)) / (2 * h)
        step = f(z) / d
        z -= step
        if abs(step) < 1e-13 * lam:
            break
    return float(np.real(z) / (2 * abs(np.imag(z))))


def fwhm_q(stack: AxialStack, lam_c: float) -> float:
    """Q from the half-maximum points of the LDOS peak."""
    peak = stack.ldos(lam_c)
    base = 0.0
    half = base + 0.5 * (peak - base)
    q0 = complex_pole_q(stack, lam_c)
    width = lam_c / q0
    f = lambda x: stack.ldos(x) - half
    span = width
    while f(lam_c - span) > 0 and span < 10:
        span *= 1.5
    lo = brentq(f, lam_c - span, lam_c, xtol=1e-14)
    span = width
    while f(lam_c + span) > 0 and span < 10:
        span *= 1.5
    hi = brentq(f, lam_c, lam_c + span, xtol=1e-14)
    return float(lam_c / (hi - lo))


def quality_factor(stack: AxialStack, lam_c: float | None = None) -> float:
    """Cavity Q from the complex pole of the round trip (Lorentzian linewidth)."""
    lam_c = find_resonance(stack) if lam_c is None else lam_c
    return complex_pole_q(stack, lam_c)


# mode volume ---------------------------------------------------------------
def _amplitudes(stack: AxialStack, lam: float):
    """Power-normalized up/down amplitudes (a_j, b_j) of the cavity field.

    In segment j the waves are a_j exp(+i k0 P_j(z)) and b_j exp(-i k0 P_j(z))
    with P_j the index integral from the segment bottom. The up-going wave
    is normalized to 1 on the QD plane.
    """
    w = stack.weights(lam)
    k0 = 2 * np.pi / lam
    nb, nt, pint = stack._ends(w)
    segs, q = stack.segments, stack.qd_segment
    n = len(segs)
    ph = [k0 * p for p in pint]

    # D/U at the bottom of segments above the QD
    rho = np.zeros(n, complex)
    r = stack.r_top if stack.r_top is not None else (nt[-1] - stack.n_exit) / (nt[-1] + stack.n_exit)
    for j in range(n - 1, q, -1):
        r = r * np.exp(2j * ph[j])
        rho[j] = r
        f = (nt[j - 1] - nb[j]) / (nt[j - 1] + nb[j])
        r = (f + r) / (1 + f * r)
    r_up = r * np.exp(2j * (ph[q] - k0 * segs[q].phase_integral(w, stack.qd_offset)))
    # U/D at the top of segments below the QD
    sigma = np.zeros(n, complex)
    r = stack.r_bottom if stack.r_bottom is not None else (nb[0] - stack.n_substrate) / (nb[0] + stack.n_substrate)
    for j in range(q):
        r = r * np.exp(2j * ph[j])
        sigma[j] = r
        f = (nb[j + 1] - nt[j]) / (nb[j + 1] + nt[j])
        r = (f + r) / (1 + f * r)

    a = np.zeros(n, complex)
    b = np.zeros(n, complex)
    pq = k0 * segs[q].phase_integral(w, stack.qd_offset)
    a[q] = np.exp(-1j * pq)
    b[q] = r_up * np.exp(1j * pq)
    for j in range(q + 1, n):
        e = (a[j - 1] * np.exp(1j * ph[j - 1]) + b[j - 1] * np.exp(-1j * ph[j - 1])) / np.sqrt(nt[j - 1])
        a[j] = e * np.sqrt(nb[j]) / (1 + rho[j])
        b[j] = rho[j] * a[j]
    for j in range(q - 1, -1, -1):
        e = (a[j + 1] + b[j + 1]) / np.sqrt(nb[j + 1])
        down = e * np.sqrt(nt[j]) / (1 + sigma[j])
        a[j] = sigma[j] * down * np.exp(-1j * ph[j])
        b[j] = down * np.exp(1j * ph[j])
    return a, b, r_up, w


def _transverse_fit(seg: Segment, lam: float):
    """Chebyshev fits in z of (W_t, W_z, on-axis density) of the local unit-power HE11 mode."""
    key = (seg.radius_bottom, seg.radius_top, seg.n_core, seg.thickness, lam, seg.graded)
    if key in _TRANSVERSE:
        return _TRANSVERSE[key]
    d = seg.thickness

    def sample(z):
        z = np.atleast_1d(z)
        out = []
        for zi in z:
            r = seg.radius_bottom + (seg.radius_top - seg.radius_bottom) * zi / d
            out.append(solve_mode(float(r), seg.n_core, 1.0, lam).energy_integrals())
        return np.array(out)

    if seg.graded:
        nodes = Chebyshev.basis(CHEB_NODES).roots() * 0.5 * d + 0.5 * d
        vals = sample(nodes)
        fits = tuple(Chebyshev.fit(nodes, vals[:, k], CHEB_NODES - 1, domain=[0, d]) for k in range(3))
    else:
        vals = sample([0.5 * d])[0]
        fits = tuple(_const(v, d) for v in vals)
    if len(_TRANSVERSE) > 20000:
        _TRANSVERSE.clear()
    _TRANSVERSE[key] = fits
    return fits


_TRANSVERSE: dict = {}


def _segment_energy(seg, a, b, w, k0, wt_fit, wz_fit):
    """Integral over a segment of W_t|u + d|^2 + W_z|u - d|^2."""
    d = seg.thickness
    if not seg.graded:
        kap = k0 * seg.n(w, 0.0)
        osc = a * np.conj(b) * (np.exp(2j * kap * d) - 1) / (2j * kap)
        base = (abs(a) ** 2 + abs(b) ** 2) * d
        wt, wz = float(wt_fit(0.0)), float(wz_fit(0.0))
        return wt * (base + 2 * np.real(osc)) + wz * (base - 2 * np.real(osc))
    total_phase = float(np.real(k0 * seg.phase_integral(w)))
    pieces = max(8, int(np.ceil(total_phase / np.pi)))
    x, gw = _gauss(8)
    edges = np.linspace(0.0, d, pieces + 1)
    z = (0.5 * (edges[:-1] + edges[1:])[:, None] + 0.5 * np.diff(edges)[:, None] * x).ravel()
    zw = (0.5 * np.diff(edges)[:, None] * gw).ravel()
    p = k0 * seg.phase_integral(w, z)
    u = a * np.exp(1j * p)
    v = b * np.exp(-1j * p)
    return float(np.sum(zw * (wt_fit(z) * np.abs(u + v) ** 2 + wz_fit(z) * np.abs(u - v) ** 2)))


def mode_volume(stack: AxialStack, lam_c: float | None = None, transverse=None, n_ref: float = 3.4788) -> float:
    """Normalized mode volume V/(lambda_C/n_ref)^3 with the field normalized on the QD.

    ``transverse`` optionally replaces the local HE11 modes by fixed
    (W_t, W_z, on-axis density) values or a ModeSolution.
    """
    lam_c = find_resonance(stack) if lam_c is None else lam_c
    a, b, r_up, w = _amplitudes(stack, lam_c)
    k0 = 2 * np.pi / lam_c
    segs, q = stack.segments, stack.qd_segment
    if transverse is not None and not isinstance(transverse, tuple):
        transverse = transverse.energy_integrals()

    def fits(seg):
        if transverse is not None:
            return tuple(_const(v, seg.thickness) for v in transverse)
        return _transverse_fit(seg, lam_c)

    stop = len(segs) if stack.top_limit is None else stack.top_limit
    energy = 0.0
    for j in range(stop):
        wt, wz, _ = fits(segs[j])
        energy += _segment_energy(segs[j], a[j], b[j], w, k0, wt, wz)
    dens0 = float(fits(segs[q])[2](stack.qd_offset)) * abs(1 + r_up) ** 2
    v = energy / dens0
    return float(v / (lam_c / n_ref) ** 3)


def axial_intensity(stack: AxialStack, lam: float, z):
    """Squared one-dimensional field |E(z)|^2 (up-going wave on the QD set to 1)."""
    a, b, _, w = _amplitudes(stack, lam)
    k0 = 2 * np.pi / lam
    z = np.atleast_1d(np.asarray(z, float))
    bounds = np.concatenate([[0.0], np.cumsum([s.thickness for s in stack.segments])])
    out = np.zeros(z.shape)
    idx = np.clip(np.searchsorted(bounds, z, side="right") - 1, 0, len(stack.segments) - 1)
    for j in np.unique(idx):
        m = idx == j
        seg = stack.segments[j]
        zl = z[m] - bounds[j]
        p = k0 * seg.phase_integral(w, zl)
        out[m] = np.abs(a[j] * np.exp(1j * p) + b[j] * np.exp(-1j * p)) ** 2 / np.real(seg.n(w, zl))
    return out


def antinode_positions(stack: AxialStack, lam: float, span: float | None = None, resolution: float = 1.0):
    """Heights of |E|^2 maxima within ``span`` nm of the QD (default: half a wavelength)."""
    bounds = np.concatenate([[0.0], np.cumsum([s.thickness for s in stack.segments])])
    z_qd = bounds[stack.qd_segment] + stack.qd_offset
    span = lam / 2 if span is None else span
    z = np.arange(max(0.0, z_qd - span), min(bounds[-1], z_qd + span) + resolution, resolution)
    e = axial_intensity(stack, lam, z)
    peaks = [i for i in range(1, len(z) - 1) if e[i] >= e[i - 1] and e[i] > e[i + 1]]
    out = []
    for i in peaks:
        # parabolic refinement
        den = e[i - 1] - 2 * e[i] + e[i + 1]
        shift = 0.5 * (e[i - 1] - e[i + 1]) / den if den != 0 else 0.0
        out.append(float(z[i] + shift * resolution))
    return out


def purcell(q: float, v_n: float) -> float:
    """Purcell factor 3 Q / (4 pi^2 V_n)."""
    if not (q > 0 and v_n > 0):
        raise ValueError("Q and V_n must be positive")
    return 3.0 / (4 * np.pi**2) * q / v_n


@dataclass(frozen=True)
class CavityCharacter:
    wavelength: float
    q: float
    v_n: float
    purcell: float
    antinode_positions: tuple
    q_fwhm: float = float("nan")
    upward_fraction: float = float("nan")
    qd_height: float = 0.0


def characterize(stack: AxialStack) -> CavityCharacter:
    """Resonance, Q, V_n, Purcell factor and top escape fraction of a cavity stack."""
    lam_c = find_resonance(stack)
    q = complex_pole_q(stack, lam_c)
    v_n = mode_volume(stack, lam_c)
    bounds = np.concatenate([[0.0], np.cumsum([s.thickness for s in stack.segments])])
    z_qd = float(bounds[stack.qd_segment] + stack.qd_offset)
    try:
        q_fw = fwhm_q(stack, lam_c)
    except ValueError:
        q_fw = float("nan")
    return CavityCharacter(
        wavelength=lam_c,
        q=q,
        v_n=v_n,
        purcell=purcell(q, v_n),
        antinode_positions=tuple(antinode_positions(stack, lam_c)),
        q_fwhm=q_fw,
        upward_fraction=float(stack.upward_fraction(lam_c)),
        qd_height=z_qd,
    )
