"""HE11 transmission through a linear (conical) taper by staircase mode matching.

The cone is cut into cylinders. At every step the guided m = 1 modes on both
sides are matched with a Galerkin projection and the junction scattering
matrices are chained with the Redheffer star product.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .geometry import GAAS, Layer
from .modesolver import overlap_matrix, solve_modes

log = logging.getLogger(__name__)

MAX_STEP = 20.0  # nm, finest default staircase height
MIN_SEGMENTS = 400


@dataclass(frozen=True)
class SMatrix:
    r11: np.ndarray
    t21: np.ndarray
    t12: np.ndarray
    r22: np.ndarray

    def full(self) -> np.ndarray:
        return np.block([[self.r11, self.t12], [self.t21, self.r22]])


@dataclass(frozen=True)
class TaperResult:
    t11: float
    n_segments: int
    n_modes: int
    min_basis: int
    basis_reduced: bool
    max_unitarity_error: float
    t21: np.ndarray


def junction(overlap: np.ndarray) -> SMatrix:
    """Scattering matrix of a step with real cross-overlaps O_ij = <E_left_i, H_right_j>.

    Transverse E continuity is tested with the right-side H modes and H
    continuity with the left-side E modes. The result is unitary for any
    real O and reciprocal (t12 = t21^T).
    """
    o = np.asarray(overlap, dtype=float)
    n_left = o.shape[0]
    eye_l = np.eye(n_left)
    inv = np.linalg.inv(eye_l + o @ o.T)
    r11 = inv @ (eye_l - o @ o.T)
    t21 = 2 * o.T @ inv
    t12 = 2 * inv @ o
    r22 = o.T @ t12 - np.eye(o.shape[1])
    return SMatrix(r11, t21, t12, r22)


def star(a: SMatrix, b: SMatrix) -> SMatrix:
    """Redheffer star product: ``a`` followed by ``b``."""
    n = a.r22.shape[0]
    eye = np.eye(n)
    inv1 = np.linalg.inv(eye - b.r11 @ a.r22)
    inv2 = np.linalg.inv(eye - a.r22 @ b.r11)
    return SMatrix(
        r11=a.r11 + a.t12 @ inv1 @ b.r11 @ a.t21,
        t21=b.t21 @ inv2 @ a.t21,
        t12=a.t12 @ inv1 @ b.t12,
        r22=b.r22 + b.t21 @ inv2 @ a.r22 @ b.t12,
    )


def _propagate(s: SMatrix, phase: np.ndarray) -> SMatrix:
    p = np.exp(1j * phase)
    return SMatrix(s.r11, p[:, None] * s.t21, s.t12 * p[None, :], p[:, None] * s.r22 * p[None, :])


def top_taper(r0: float = 114.0, r_top: float = 930.0, theta_deg: float = 0.8, material=GAAS) -> Layer:
    """Cone from r0 to r_top with the given sidewall angle."""
    if theta_deg <= 0 or theta_deg >= 90:
        raise ValueError("sidewall angle must lie in (0, 90) degrees")
    height = abs(r_top - r0) / math.tan(math.radians(theta_deg))
    return Layer(material, height, r0, r_top)


def default_segments(height: float) -> int:
    return max(int(math.ceil(height / MAX_STEP)), MIN_SEGMENTS)


def taper_transmission(
    taper: Layer,
    wavelength: float,
    n_modes: int = 4,
    n_segments: int | None = None,
    n_clad: float = 1.0,
) -> TaperResult:
    """Fundamental-mode power transmission through a staircased cone.

    The input and output guides are semi-infinite cylinders with the end
    radii of ``taper``. Where fewer than ``n_modes`` modes are guided the
    basis shrinks locally; this is flagged in the result.
    """
    if n_modes < 1:
        raise ValueError("need at least one mode")
    n_segments = default_segments(taper.thickness) if n_segments is None else int(n_segments)
    if n_segments < 10:
        raise ValueError("need at least 10 segments")
    n_core = taper.material.refractive_index
    dr = (taper.radius_top - taper.radius_bottom) / n_segments
    height = taper.thickness / n_segments
    radii = [taper.radius_bottom] + [taper.radius_bottom + (k + 0.5) * dr for k in range(n_segments)] + [taper.radius_top]

    basis = [solve_modes(float(r), n_core, n_clad, wavelength, n_modes) for r in radii]
    sizes = [len(b) for b in basis]
    if basis[0][0].label != ("HE", 1, 1) or basis[-1][0].label != ("HE", 1, 1):
        raise RuntimeError("HE11 is not the leading mode at the taper ends")
    reduced = min(sizes) < n_modes
    if reduced:
        log.info("taper basis reduced to %d mode(s) where fewer than %d are guided", min(sizes), n_modes)

    total = None
    worst = 0.0
    for k in range(len(radii) - 1):
        # symmetrized cross overlap: the reversed structure gives exactly the transpose
        o = 0.5 * (overlap_matrix(basis[k], basis[k + 1]) + overlap_matrix(basis[k + 1], basis[k]).T)
        s = junction(o)
        worst = max(worst, unitarity_error(s))
        if 0 < k + 1 < len(radii) - 1:
            beta = np.array([m.propagation_constant for m in basis[k + 1]])
            s = _propagate(s, beta * height)
        total = s if total is None else star(total, s)
    t11 = float(abs(total.t21[0, 0]) ** 2)
    return TaperResult(t11, n_segments, n_modes, min(sizes), reduced, worst, total.t21)


def unitarity_error(s: SMatrix) -> float:
    m = s.full()
    return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))


def t11_vs_angle(thetas, r0=114.0, r_top=930.0, wavelength=925.0, n_modes=4, material=GAAS):
    """T11 for each sidewall angle (degrees)."""
    return [taper_transmission(top_taper(r0, r_top, t, material), wavelength, n_modes).t11 for t in thetas]
