"""Single-mode source model: beta, transmission, efficiency and cavity QED parameters."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SPEED_OF_LIGHT = 2.99792458e17  # nm/s

# micropillar reference design, for comparison reports only
MICROPILLAR_EPSILON = 0.95
MICROPILLAR_ETA = 0.997
MICROPILLAR_EPS_ETA = 0.95


def beta(purcell: float, background_ratio: float) -> float:
    """Spontaneous emission fraction into the cavity mode, F_p / (F_p + Gamma_B/Gamma_Bulk)."""
    if purcell < 0 or background_ratio < 0:
        raise ValueError("rates must be non-negative")
    if purcell == 0 and background_ratio == 0:
        raise ZeroDivisionError("beta undefined when both rates vanish")
    return purcell / (purcell + background_ratio)


def _fraction(x, name):
    if not 0 <= x <= 1:
        raise ValueError(f"{name} must lie in [0, 1], got {x}")


def transmission(gamma_l: float, t11: float, upward_fraction: float = 1.0) -> float:
    """Cavity-mode transmission to the lens, gamma = f_up * gamma^L * T11."""
    for x, n in ((gamma_l, "gamma_L"), (t11, "T11"), (upward_fraction, "upward fraction")):
        _fraction(x, n)
    return upward_fraction * gamma_l * t11


def single_mode_efficiency(beta_: float, gamma: float) -> float:
    _fraction(beta_, "beta")
    _fraction(gamma, "gamma")
    return beta_ * gamma


def n_photon_success(epsilon: float, eta: float, n: int) -> float:
    """Probability that all of N sources emit and interfere successfully, (eps * eta)^N."""
    _fraction(epsilon, "epsilon")
    _fraction(eta, "eta")
    if n < 1:
        raise ValueError("N must be at least 1")
    return (epsilon * eta) ** n


def cavity_parameters(character, wavelength: float, gamma_bulk: float):
    """(g, kappa) in rad/s from Q, V_n and the bulk emission rate (1/s).

    kappa = omega / Q and g = sqrt(F_p kappa Gamma_Bulk) / 2, which makes the
    bad-cavity rate 4 g^2 / kappa equal to F_p Gamma_Bulk.
    """
    q, purcell_ = character.q, character.purcell
    if not (q > 0 and character.v_n > 0 and gamma_bulk > 0 and wavelength > 0):
        raise ValueError("Q, V_n, Gamma_Bulk and wavelength must be positive")
    kappa = 2 * np.pi * SPEED_OF_LIGHT / wavelength / q
    g = 0.5 * np.sqrt(purcell_ * kappa * gamma_bulk)
    return float(g), float(kappa)


@dataclass(frozen=True)
class FigureOfMerit:
    """Efficiency and indistinguishability of one design point."""

    beta: float
    gamma_l: float
    t11: float
    gamma: float
    eps_s: float
    eps: float
    eta: float
    eps_eta: float
    descriptor: dict = field(default_factory=dict)

    COLUMNS = ("beta", "gamma_L", "T11", "gamma", "eps_s", "eps", "eta", "eps_eta")

    @classmethod
    def build(cls, beta_, gamma_l, t11, gamma, eps, eta, descriptor=None):
        return cls(
            beta=beta_,
            gamma_l=gamma_l,
            t11=t11,
            gamma=gamma,
            eps_s=beta_ * gamma,
            eps=eps,
            eta=eta,
            eps_eta=eps * eta,
            descriptor=dict(descriptor or {}),
        )

    def values(self):
        return (self.beta, self.gamma_l, self.t11, self.gamma, self.eps_s, self.eps, self.eta, self.eps_eta)
