"""Planar multilayer reflection/transmission (characteristic-matrix method)."""

import numpy as np


def _cos(n, n_sin):
    c = np.sqrt(1 - (n_sin / n) ** 2 + 0j)
    # evanescent branch decays away from the interface
    return np.where(np.imag(c) < 0, -c, c)


def planar_rt(indices, thicknesses, wavelength, n_sin=0.0, pol="s"):
    """Amplitude and power coefficients of a planar stack.

    ``indices`` runs from the incidence medium to the exit medium;
    ``thicknesses`` (nm) covers the inner layers only. ``n_sin`` is the
    conserved n*sin(theta), scalar or array. Returns (r, t, R, T).
    """
    indices = [complex(n) for n in indices]
    if len(thicknesses) != len(indices) - 2:
        raise ValueError("need one thickness per inner layer")
    n_sin = np.asarray(n_sin, dtype=complex)
    k0 = 2 * np.pi / wavelength

    def admittance(n):
        c = _cos(n, n_sin)
        return (n * c if pol == "s" else n / c), c

    eta0, _ = admittance(indices[0])
    eta_s, _ = admittance(indices[-1])
    m11 = np.ones_like(n_sin)
    m12 = np.zeros_like(n_sin)
    m21 = np.zeros_like(n_sin)
    m22 = np.ones_like(n_sin)
    for n, d in zip(indices[1:-1], thicknesses):
        eta, c = admittance(n)
        delta = k0 * n * c * d
        cs, sn = np.cos(delta), np.sin(delta)
        a11, a12, a21, a22 = cs, 1j * sn / eta, 1j * eta * sn, cs
        m11, m12, m21, m22 = (
            m11 * a11 + m12 * a21,
            m11 * a12 + m12 * a22,
            m21 * a11 + m22 * a21,
            m21 * a12 + m22 * a22,
        )
    b = m11 + m12 * eta_s
    c = m21 + m22 * eta_s
    r = (eta0 * b - c) / (eta0 * b + c)
    t = 2 * eta0 / (eta0 * b + c)
    R = np.abs(r) ** 2
    T = np.real(eta_s) / np.real(eta0) * np.abs(t) ** 2
    return r, t, R, T
