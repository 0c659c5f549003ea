"""Polaron-frame phonon quantities for a QD coupled to longitudinal acoustic phonons.

Units: time in ps, angular frequencies in 1/ps, alpha in ps^2. The spectral
density is J(w) = alpha w^3 exp(-w^2 / w_b^2).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

from .modesolver import _gauss

HBAR_OVER_KB = 7.638232577e-12 * 1e12  # K ps
CUTOFF_FACTOR = 8.0


@dataclass(frozen=True)
class PhononEnv:
    """Super-ohmic phonon bath; ``alpha`` in ps^2, ``omega_b`` in 1/ps, ``temperature`` in K."""

    alpha: float = 0.0
    omega_b: float = 1.0
    temperature: float = 4.0
    enabled: bool = True

    def __post_init__(self):
        if self.alpha < 0 or self.omega_b <= 0 or self.temperature < 0:
            raise ValueError("need alpha >= 0, omega_b > 0, T >= 0")

    @property
    def active(self) -> bool:
        return self.enabled and self.alpha > 0

    def thermal_rate(self) -> float:
        """k_B T / hbar in 1/ps."""
        return self.temperature / HBAR_OVER_KB


def _coth_term(w, kt):
    """coth(w / 2kT), equal to 1 at zero temperature."""
    if kt == 0:
        return np.ones_like(w)
    x = w / (2 * kt)
    return 1 / np.tanh(np.maximum(x, 1e-300))


def _occupation(w, kt):
    if kt == 0:
        return np.zeros_like(w)
    return 1 / np.expm1(w / kt)


def _phi0_integrand(w, env):
    kt = env.thermal_rate()
    # J/w^2 coth(w/2kT), finite at w -> 0
    if kt == 0:
        return env.alpha * w * np.exp(-((w / env.omega_b) ** 2))
    return env.alpha * w * np.exp(-((w / env.omega_b) ** 2)) * _coth_term(w, kt)


def franck_condon(env: PhononEnv, epsabs: float = 1e-8) -> float:
    """B = exp(-phi(0)/2) with phi(0) = integral J(w)/w^2 coth(hbar w / 2 k T) dw."""
    if not env.active:
        return 1.0
    val, err = quad(lambda w: float(_phi0_integrand(np.array(w), env)), 0, CUTOFF_FACTOR * env.omega_b, epsabs=epsabs, limit=400)
    if not np.isfinite(val) or val > 700:
        raise OverflowError("phonon exponent diverges; check alpha, omega_b and T")
    return float(np.exp(-0.5 * val))


@dataclass(frozen=True)
class PolaronKernel:
    """Spectra of the polaron correlation functions G_u = B^2 sinh(phi), G_g = B^2 (cosh(phi) - 1)."""

    env: PhononEnv
    B: float
    tau: np.ndarray
    weights: np.ndarray
    rem_u: np.ndarray  # sinh(phi) - phi, one-phonon part handled analytically
    g_g: np.ndarray  # cosh(phi) - 1

    def _half_fourier(self, f, w):
        w = np.atleast_1d(np.asarray(w, float))
        return 2 * np.real(np.exp(1j * np.outer(w, self.tau)) @ (self.weights * f))

    def one_phonon(self, w):
        """2 Re int_0^inf phi(tau) e^{i w tau} dtau in closed form."""
        env = self.env
        w = np.atleast_1d(np.asarray(w, float))
        kt = env.thermal_rate()
        a = np.abs(w)
        jw = env.alpha * a * np.exp(-((a / env.omega_b) ** 2))  # J/w^2
        with np.errstate(divide="ignore", invalid="ignore"):
            n = _occupation(a, kt)
            s = np.where(w > 0, jw * (n + 1), jw * n)
        if kt > 0:
            s = np.where(a < 1e-12, env.alpha * kt, s)
        else:
            s = np.where(a < 1e-12, 0.0, s)
        return 2 * np.pi * s

    def spectrum_u(self, w):
        """Phonon-assisted transition spectrum, w > 0 means energy given to the bath."""
        if not self.env.active:
            return np.zeros(np.shape(np.atleast_1d(w)))
        return self.B**2 * (self.one_phonon(w) + self._half_fourier(self.rem_u, w))

    def spectrum_g(self, w):
        if not self.env.active:
            return np.zeros(np.shape(np.atleast_1d(w)))
        return self.B**2 * self._half_fourier(self.g_g, w)

    def rates(self, splitting: float, which: str = "u"):
        """(downward, upward) rate factors at a level splitting > 0, detailed balance imposed."""
        spectrum = self.spectrum_u if which == "u" else self.spectrum_g
        if splitting <= 0:
            v = float(spectrum(0.0)[0])
            return v, v
        down = float(spectrum(splitting)[0])
        kt = self.env.thermal_rate()
        up = 0.0 if kt == 0 else down * np.exp(-splitting / kt)
        return down, up


def phi(env: PhononEnv, tau, nodes: int = 1600):
    """Phonon propagator phi(tau) = int J/w^2 [coth cos(w tau) - i sin(w tau)] dw."""
    tau = np.atleast_1d(np.asarray(tau, float))
    x, wq = _gauss(nodes)
    top = CUTOFF_FACTOR * env.omega_b
    w = 0.5 * top * (x + 1)
    wq = 0.5 * top * wq
    kt = env.thermal_rate()
    jw = env.alpha * w * np.exp(-((w / env.omega_b) ** 2))
    ct = _coth_term(w, kt) if kt > 0 else np.ones_like(w)
    wt = np.outer(tau, w)
    return (np.cos(wt) * ct - 1j * np.sin(wt)) @ (wq * jw)


@lru_cache(maxsize=64)
def polaron_kernel(env: PhononEnv, tau_factor: float = 40.0, n_tau: int = 4001) -> PolaronKernel:
    """B factor and correlation-function tables for ``env``."""
    B = franck_condon(env)
    tau = np.linspace(0.0, tau_factor / env.omega_b, n_tau)
    w = np.full(n_tau, tau[1] - tau[0])
    w[0] = w[-1] = 0.5 * w[0]
    if env.active:
        p = phi(env, tau)
        rem_u = np.sinh(p) - p
        g_g = np.cosh(p) - 1
    else:
        rem_u = g_g = np.zeros(n_tau, complex)
    return PolaronKernel(env, B, tau, w, rem_u, g_g)


def polaron_transform(env: PhononEnv):
    """(B, rate_kernel) where rate_kernel(splitting) gives (downward, upward) factors.

    Multiply by g^2 to obtain rates in 1/ps between polariton states.
    """
    kern = polaron_kernel(env)
    return kern.B, kern.rates


REPRESENTATIVE_INAS = PhononEnv(alpha=0.027, omega_b=2.2, temperature=4.0, enabled=True)
