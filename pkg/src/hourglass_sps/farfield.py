"""Far field of a guided mode leaving an AR-coated facet, and lens collection.

The facet field is expanded into plane waves inside the core material; each
component crosses the planar core/AR/air stack with its Fresnel coefficient.
Power is normalized to the propagating part of that expansion, so
``transmitted + reflected == 1`` (reflected includes total internal
reflection).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import j0, j1

from .modesolver import ModeSolution, _gauss, he11_index, radial_quadrature
from .thinfilm import planar_rt

N_THETA = 400
N_TABLE = 1501


@dataclass(frozen=True)
class FarField:
    """Far-field amplitude of an order-1 mode, E_theta ~ cos(phi), E_phi ~ sin(phi).

    ``e_theta`` and ``e_phi`` return the complex radial parts at polar angle
    theta; |E|^2 integrates over the sphere to the transmitted power fraction.
    """

    e_theta: Callable
    e_phi: Callable
    wavelength: float
    radius: float
    transmitted: float
    reflected: float = 0.0

    def total_power(self) -> float:
        return self.transmitted + self.reflected

    def grid(self, theta, phi):
        """(E_theta, E_phi) sampled on a meshgrid of polar and azimuthal angles."""
        th, ph = np.meshgrid(np.asarray(theta, float), np.asarray(phi, float), indexing="ij")
        return self.e_theta(th) * np.cos(ph), self.e_phi(th) * np.sin(ph)

    def intensity(self, theta):
        """Azimuthally integrated power per unit polar angle, dP/dtheta."""
        theta = np.asarray(theta, float)
        return np.pi * (np.abs(self.e_theta(theta)) ** 2 + np.abs(self.e_phi(theta)) ** 2) * np.sin(theta)

    def encircled_power(self, theta_max) -> float:
        """Radiated power fraction inside polar angle ``theta_max``."""
        if theta_max <= 0:
            return 0.0
        x, w = _gauss(N_THETA)
        th = 0.5 * theta_max * (x + 1)
        return float(0.5 * theta_max * np.sum(w * self.intensity(th)))

    def divergence_half_angle(self, fraction: float = 1 - np.exp(-2)) -> float:
        """Polar angle enclosing ``fraction`` of the radiated power."""
        from scipy.optimize import brentq

        target = fraction * self.encircled_power(np.pi / 2)
        return brentq(lambda t: self.encircled_power(t) - target, 1e-9, np.pi / 2, xtol=1e-10)


def ar_layer(radius, n_core, wavelength):
    """Index and thickness of the quarter-wave AR coating for a facet of given radius."""
    n_ar = np.sqrt(n_core)
    n_eff_ar = he11_index(float(radius), float(n_ar), float(wavelength))
    return n_ar, wavelength / (4 * n_eff_ar)


def far_field(mode: ModeSolution, ar: bool | tuple = True) -> FarField:
    """Far field radiated by ``mode`` through the facet.

    ``ar`` is True for the default quarter-wave coating, False for a bare
    facet, or an explicit (index, thickness_nm) pair.
    """
    if mode.m != 1:
        raise ValueError("far field implemented for azimuthal order 1")
    lam, n1, n2 = mode.wavelength, mode.n_core, mode.n_clad
    k0 = 2 * np.pi / lam
    if ar is True:
        layers = [ar_layer(mode.radius, n1, lam)]
    elif ar is False:
        layers = []
    else:
        layers = [tuple(ar)]
    stack_n = [n1] + [n for n, _ in layers] + [n2]
    stack_d = [d for _, d in layers]

    r, wt = radial_quadrature([mode.radius], mode.decay, order=3)
    f = mode.radial_fields(r)
    g0 = 0.5 * (f[0] - f[1]) * wt * r
    g2 = 0.5 * (f[0] + f[1]) * wt * r

    def spectrum(kt):
        kt = np.asarray(kt, float)
        kr = np.multiply.outer(kt, r)
        b0 = j0(kr)
        with np.errstate(invalid="ignore", divide="ignore"):
            b2 = np.where(kr > 1e-8, 2 * j1(kr) / kr - b0, 0.0)
        a0 = b0 @ g0
        a2 = b2 @ g2
        return 2 * np.pi * (a0 - a2), -2 * np.pi * (a0 + a2)

    # power of the propagating plane-wave expansion inside the core medium
    x, w = _gauss(N_THETA)
    th1 = 0.25 * np.pi * (x + 1)
    w1 = 0.25 * np.pi * w
    p_amp, s_amp = spectrum(n1 * k0 * np.sin(th1))
    c1 = np.cos(th1)
    dens = np.pi * (n1 * k0) ** 2 * np.sin(th1) * (c1**2 * np.abs(s_amp) ** 2 + np.abs(p_amp) ** 2)
    p_inc = float(np.sum(w1 * dens))
    _, ts, _, Ts = planar_rt(stack_n, stack_d, lam, n1 * np.sin(th1), "s")
    _, tp, _, Tp = planar_rt(stack_n, stack_d, lam, n1 * np.sin(th1), "p")
    dens_t = np.pi * (n1 * k0) ** 2 * np.sin(th1) * (c1**2 * Ts * np.abs(s_amp) ** 2 + Tp * np.abs(p_amp) ** 2)
    transmitted = float(np.sum(w1 * dens_t)) / p_inc

    def amplitudes(theta):
        theta = np.asarray(theta, float)
        st = np.sin(theta)
        cos1 = np.sqrt(1 - (st / n1) ** 2)
        p, s = spectrum(k0 * st)
        _, tsa, _, Tsa = planar_rt(stack_n, stack_d, lam, st, "s")
        _, tpa, _, Tpa = planar_rt(stack_n, stack_d, lam, st, "p")
        ct = np.cos(theta)
        e_th = np.sqrt(k0**2 * ct * Tpa / (cos1 * p_inc)) * p * np.exp(1j * np.angle(tpa))
        e_ph = np.sqrt(k0**2 * ct * Tsa * cos1 / p_inc) * s * np.exp(1j * np.angle(tsa))
        return e_th, e_ph

    # amplitudes are smooth in theta; tabulate once and interpolate
    grid = np.linspace(0.0, np.pi / 2 - 1e-6, N_TABLE)
    e_th, e_ph = amplitudes(grid)
    spl_th, spl_ph = CubicSpline(grid, e_th), CubicSpline(grid, e_ph)
    return FarField(
        e_theta=spl_th,
        e_phi=spl_ph,
        wavelength=lam,
        radius=mode.radius,
        transmitted=transmitted,
        reflected=1.0 - transmitted,
    )


def _check_na(na):
    if not 0 < na <= 1:
        raise ValueError(f"NA must lie in (0, 1], got {na}")


def lens_transmission(ff: FarField, na: float) -> float:
    """Fraction of the mode power radiated into the cone sin(theta) <= NA."""
    _check_na(na)
    return ff.encircled_power(float(np.arcsin(na)))


def _gaussian_overlap(ff, na, waist, nodes=N_THETA):
    th_max = float(np.arcsin(na))
    x, w = _gauss(nodes)
    th = 0.5 * th_max * (x + 1)
    wt = 0.5 * th_max * w * np.sin(th)
    k0 = 2 * np.pi / ff.wavelength
    # x-polarized Gaussian in the pupil of an aplanatic lens
    g = np.exp(-((k0 * waist * np.sin(th) / 2) ** 2)) * np.sqrt(np.cos(th))
    overlap = np.pi * np.sum(wt * (ff.e_theta(th) - ff.e_phi(th)) * g)
    norm = 2 * np.pi * np.sum(wt * g**2)
    return float(np.abs(overlap) ** 2 / norm)


def gaussian_coupling(ff: FarField, na: float, return_waist: bool = False):
    """Power coupled into the best-matched Gaussian inside the NA cone.

    The waist is optimized over [0.2 R, 5 R] with R the source radius.
    """
    _check_na(na)
    waist = _golden_max(lambda wst: _gaussian_overlap(ff, na, wst), 0.2 * ff.radius, 5 * ff.radius)
    value = _gaussian_overlap(ff, na, waist)
    return (value, waist) if return_waist else value


def _golden_max(f, a, b, rtol=1e-4):
    """Golden-section search for the maximum of a unimodal f on [a, b]."""
    inv_phi = (np.sqrt(5) - 1) / 2
    c, d = b - inv_phi * (b - a), a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > rtol * 0.5 * (a + b):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)
