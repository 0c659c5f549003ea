"""Independent reference computations used only by the tests."""

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigs


def fd_hybrid_index(radius, n_core, n_clad, wavelength, m=1, dr=0.5, pad=600.0):
    """Largest-index order-m mode from a radial finite-difference H-field solver.

    Unknowns are h_r, h_phi on a staggered radial grid; the interface sits on
    a cell face and the E_z-carrying flux uses the harmonic mean of eps there.
    """
    n_in = int(round(radius / dr))
    dr = radius / n_in
    n = n_in + int(np.ceil(pad / dr))
    r = (np.arange(n) + 0.5) * dr
    rf = (np.arange(n + 1)) * dr  # faces, rf[i] is the left face of cell i
    eps = np.where(r < radius, n_core**2, n_clad**2)
    k0 = 2 * np.pi / wavelength
    inv_eps_face = np.empty(n + 1)
    inv_eps_face[1:-1] = 0.5 * (1 / eps[:-1] + 1 / eps[1:])
    inv_eps_face[0] = 1 / eps[0]
    inv_eps_face[-1] = 1 / eps[-1]

    A = sp.lil_matrix((2 * n, 2 * n))
    R, P = slice(0, n), slice(n, 2 * n)
    for i in range(n):
        ir, ip = i, n + i
        # r-equation: (1/r)(r h')' - (m^2 + 1) h / r^2 - 2m h_phi / r^2 + k0^2 eps h
        cl = rf[i] / (r[i] * dr**2)
        cr = rf[i + 1] / (r[i] * dr**2)
        A[ir, ir] += -(cl + cr) - (m**2 + 1) / r[i] ** 2 + k0**2 * eps[i]
        if i > 0:
            A[ir, ir - 1] += cl
        if i < n - 1:
            A[ir, ir + 1] += cr
        A[ir, ip] += -2 * m / r[i] ** 2

        # phi-equation: eps D[F] - (m/r)(h_r' + h_r/r) - m^2 h_phi / r^2 + k0^2 eps h_phi
        # F at face f: inv_eps/rf * ((r h_phi)' + m * avg(h_r))
        for face, sgn in ((i + 1, 1.0), (i, -1.0)):
            if face == 0:
                continue  # E_z vanishes on the axis for m >= 1
            c = sgn * eps[i] / dr * inv_eps_face[face] / rf[face]
            left, right = face - 1, face
            if right < n:
                A[ip, n + right] += c * r[right] / dr
                A[ip, right] += c * m / 2
            if left >= 0:
                A[ip, n + left] += -c * r[left] / dr
                A[ip, left] += c * m / 2
        A[ip, ip] += -(m**2) / r[i] ** 2 + k0**2 * eps[i]
        # -(m/r) h_r' with an even extension of h_r through the axis
        lo = i - 1 if i > 0 else 0
        if i < n - 1:
            A[ip, i + 1] += -(m / r[i]) / (2 * dr)
        A[ip, lo] += (m / r[i]) / (2 * dr)
        A[ip, ir] += -m / r[i] ** 2
    A = A.tocsc()
    target = (k0 * n_core) ** 2
    vals = eigs(A, k=6, sigma=target, return_eigenvectors=False)
    vals = np.real(vals[np.abs(np.imag(vals)) < 1e-9 * target])
    vals = vals[(vals < target) & (vals > (k0 * n_clad) ** 2)]
    return float(np.sqrt(vals.max()) / k0)


def bragg_reflection_closed_form(n_inc, layers, n_exit):
    """Normal-incidence reflection of quarter-wave layers at the design wavelength.

    Each quarter-wave layer maps the load admittance Y to n^2 / Y.
    ``layers`` lists indices from the incidence side.
    """
    y = n_exit
    for n in reversed(layers):
        y = n**2 / y
    return (n_inc - y) / (n_inc + y)


def brute_force_dephased_eta(gamma, gamma_pd, n=2000, t_max_factor=30.0):
    """Two-time integral for a decaying, dephased two-level emitter on a grid."""
    t_max = t_max_factor / gamma
    t = np.linspace(0, t_max, n)
    dt = t[1] - t[0]
    T, TAU = np.meshgrid(t, t, indexing="ij")
    pop_t = np.exp(-gamma * T)
    pop_tt = np.exp(-gamma * (T + TAU))
    g1 = np.exp(-gamma * T) * np.exp(-(gamma / 2 + gamma_pd) * TAU)
    w = np.full(n, dt)
    w[[0, -1]] = dt / 2
    ww = np.outer(w, w)
    num = np.sum(ww * np.abs(g1) ** 2)
    den = np.sum(ww * pop_t * pop_tt)
    return num / den
