"""Polaron master equation for a QD in a single-mode cavity and the resulting
two-photon indistinguishability.

The Hilbert space is truncated to one excitation, {|e,0>, |g,1>, |g,0>}. Input
rates are in 1/s (angular frequencies in rad/s) and converted to 1/ps inside.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .phonons import PhononEnv, polaron_kernel

E0, G1, G0 = 0, 1, 2
PS = 1e-12
DECAY_FLOOR = 1e-8
DEFAULT_STEPS = 1200


class UndefinedEtaError(ValueError):
    """Raised when the selected channel never emits."""


@dataclass(frozen=True)
class EmitterCavityParams:
    """QD-cavity rates: g, kappa, Gamma_B, Gamma_Bulk, gamma_pd in 1/s; detuning in rad/s."""

    g: float
    kappa: float
    gamma_b: float
    gamma_bulk: float = 1e9
    detuning: float = 0.0
    gamma_pd: float = 0.0
    phonons: PhononEnv = field(default_factory=lambda: PhononEnv(enabled=False))

    def __post_init__(self):
        for name in ("g", "kappa", "gamma_b", "gamma_bulk", "gamma_pd"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and non-negative")
        if not np.isfinite(self.detuning):
            raise ValueError("detuning must be finite")


@dataclass(frozen=True)
class CorrelationGrid:
    """Uniform two-time grid of the first-order correlation function."""

    t: np.ndarray  # s
    g1: np.ndarray  # G1(t_i, tau_j)
    population: np.ndarray  # n(t_k) on the doubled grid
    dt: float  # s
    channel: str
    emitted: float  # rate * integral of the population, per excitation
    states: np.ndarray  # density matrices rho(t_k) on the doubled grid


def _ket(i):
    v = np.zeros(3)
    v[i] = 1.0
    return v


def _op(i, j):
    return np.outer(_ket(i), _ket(j))


def _dissipator(c):
    eye = np.eye(3)
    cdc = c.conj().T @ c
    # row-major vec: vec(A X B) = kron(A, B^T) vec(X)
    return np.kron(c, c.conj()) - 0.5 * np.kron(cdc, eye) - 0.5 * np.kron(eye, cdc.T)


def _hamiltonian_term(h):
    eye = np.eye(3)
    return -1j * (np.kron(h, eye) - np.kron(eye, h.T))


def collapse_operators(p: EmitterCavityParams):
    """Hamiltonian (1/ps) and list of collapse operators for the polaron master equation."""
    g, kappa, gb = p.g * PS, p.kappa * PS, p.gamma_b * PS
    gpd, delta = p.gamma_pd * PS, p.detuning * PS
    env = p.phonons
    kern = polaron_kernel(env) if env.active else None
    B = kern.B if kern else 1.0

    h = delta * _op(E0, E0) + B * g * (_op(E0, G1) + _op(G1, E0))
    ops = []
    if kappa > 0:
        ops.append(np.sqrt(kappa) * _op(G0, G1))
    if gb > 0:
        ops.append(np.sqrt(gb) * _op(G0, E0))
    if gpd > 0:
        ops.append(np.sqrt(2 * gpd) * _op(E0, E0))

    if kern is not None and g > 0:
        # polariton basis of the one-excitation block
        evals, evecs = np.linalg.eigh(h[:2, :2])
        x_g = g * np.array([[0, 1], [1, 0]], complex)
        x_u = 1j * g * np.array([[0, 1], [-1, 0]], complex)
        for x, which in ((x_g, "g"), (x_u, "u")):
            xd = evecs.conj().T @ x @ evecs
            for a in range(2):
                for b in range(2):
                    if a == b:
                        continue
                    split = evals[a] - evals[b]
                    down, up = kern.rates(abs(split), which)
                    rate = (down if split > 0 else up) * abs(xd[b, a]) ** 2
                    if rate > 0:
                        ket = np.zeros((3, 3), complex)
                        ket[:2, :2] = np.outer(evecs[:, b], evecs[:, a].conj())
                        ops.append(np.sqrt(rate) * ket)
            s0 = kern.rates(0.0, which)[0]
            diag = np.diag(xd)
            if s0 > 0 and np.any(np.abs(diag) > 0):
                d = np.zeros((3, 3), complex)
                d[:2, :2] = evecs @ np.diag(diag) @ evecs.conj().T
                ops.append(np.sqrt(s0) * d)
    return h, ops


def liouvillian(p: EmitterCavityParams) -> np.ndarray:
    h, ops = collapse_operators(p)
    lv = _hamiltonian_term(h).astype(complex)
    for c in ops:
        lv = lv + _dissipator(c)
    return lv


def _channel(p: EmitterCavityParams, channel: str):
    if channel == "cavity":
        return _op(G0, G1), p.kappa
    if channel == "emitter":
        return _op(G0, E0), p.gamma_b
    raise ValueError("channel must be 'cavity' or 'emitter'")


def _slowest_decay(lv):
    ev = np.linalg.eigvals(lv)
    re = -ev.real
    re = re[re > 1e-12 * max(1.0, re.max())]
    if re.size == 0:
        raise UndefinedEtaError("no decaying dynamics")
    return re.min()


def evolve(p: EmitterCavityParams, channel: str = "cavity", steps: int = DEFAULT_STEPS) -> CorrelationGrid:
    """Propagate from |e,0> until the excitation falls below 1e-8 and build G1(t, tau).

    Each step uses the exact propagator exp(L dt); G1 follows from the
    quantum regression theorem.
    """
    op, rate = _channel(p, channel)
    lv = liouvillian(p)
    t_max = np.log(1 / DECAY_FLOOR) / _slowest_decay(lv)
    dt = t_max / steps
    prop = expm(lv * dt)

    rho = np.zeros((3, 3), complex)
    rho[E0, E0] = 1
    n_tot = 2 * steps + 1
    states = np.empty((n_tot, 9), complex)
    x = rho.reshape(-1)
    for k in range(n_tot):
        states[k] = x
        x = prop @ x
    rhos = states.reshape(n_tot, 3, 3)
    excited = rhos[:, E0, E0].real + rhos[:, G1, G1].real
    if excited[steps] > DECAY_FLOOR * 10:
        raise RuntimeError("excitation did not decay within the integration window")

    pop = np.einsum("ij,kjl,li->k", op, rhos, op.conj().T).real  # <op^dag op>
    # G1(t, tau) = Tr[op^dag exp(L tau) (op rho(t))]
    seeds = np.einsum("ij,kjl->kil", op, rhos[: steps + 1]).reshape(steps + 1, 9)
    row = op.conj().reshape(-1)  # Tr[op^dag X] as a row vector
    left = np.empty((steps + 1, 9), complex)
    v = row.copy()
    prop_t = prop.T
    for j in range(steps + 1):
        left[j] = v
        v = prop_t @ v
    g1 = seeds @ left.T  # [t_i, tau_j]

    w = np.full(n_tot, dt)
    w[0] = w[-1] = 0.5 * dt
    emitted = float(rate * PS * np.sum(w * pop))
    t = np.arange(steps + 1) * dt * PS
    return CorrelationGrid(t, g1, pop, dt * PS, channel, emitted, rhos)


def _trapezoid(n, dt):
    w = np.full(n, dt)
    w[0] = w[-1] = 0.5 * dt
    return w


def indistinguishability(grid: CorrelationGrid) -> float:
    """eta = int int |G1(t,tau)|^2 / int int n(t) n(t+tau) over t, tau >= 0."""
    n = grid.g1.shape[0]
    pop = grid.population
    if not np.any(pop > 0) or pop.max() < 1e-300:
        raise UndefinedEtaError(f"{grid.channel} channel never populated")
    w = _trapezoid(n, grid.dt)
    num = w @ (np.abs(grid.g1) ** 2) @ w
    idx = np.arange(n)
    den_mat = pop[idx[:, None] + idx[None, :]]
    den = w @ (pop[:n, None] * den_mat) @ w
    if den <= 0:
        raise UndefinedEtaError(f"{grid.channel} channel never populated")
    return float(num / den)


def indistinguishability_exact(p: EmitterCavityParams, channel: str = "cavity") -> float:
    """eta from an eigen-decomposition of the Liouvillian.

    G1 is a double sum of exponentials, so both time integrals are done in
    closed form. Used as an independent check of the grid result.
    """
    op, _ = _channel(p, channel)
    lam, vec = np.linalg.eig(liouvillian(p))
    inv = np.linalg.inv(vec)
    keep = lam.real < -1e-12 * np.abs(lam).max()
    rho0 = np.zeros(9, complex)
    rho0[3 * E0 + E0] = 1
    c0 = np.where(keep, inv @ rho0, 0)
    opv = np.stack([(op @ vec[:, i].reshape(3, 3)).reshape(-1) for i in range(9)], 1)
    proj = inv @ opv
    out = op.conj().reshape(-1) @ vec
    # G1(t, tau) = sum_ji C_ji exp(lam_i t) exp(lam_j tau)
    coef = out[:, None] * proj * c0[None, :]
    coef[~keep, :] = 0
    with np.errstate(divide="ignore", invalid="ignore"):
        d = np.where(keep[:, None] & keep[None, :], 1 / (lam[:, None] + lam.conj()[None, :]), 0)
    inner = coef @ d @ coef.conj().T
    num = np.sum(d * inner).real
    a = (op.conj().T @ op).conj().reshape(-1) @ vec * c0
    total = np.sum(np.where(keep, -a / np.where(keep, lam, 1), 0)).real
    den = 0.5 * total**2
    if den < 1e-300:
        raise UndefinedEtaError(f"{channel} channel never populated")
    return float(num / den)


def channel_yields(p: EmitterCavityParams):
    """(kappa int n_cav dt, Gamma_B int n_qd dt) for one initial excitation.

    The block {e0, g1} x {e0, g1} of the Liouvillian does not feed back from
    |g0>, so the time integrals follow from one linear solve.
    """
    lv = liouvillian(p)
    idx = [3 * i + j for i in (E0, G1) for j in (E0, G1)]
    sub = lv[np.ix_(idx, idx)]
    rho0 = np.zeros(4, complex)
    rho0[0] = 1
    integral = np.linalg.solve(sub, -rho0)
    return float(p.kappa * PS * integral[3].real), float(p.gamma_b * PS * integral[0].real)


def cavity_yield(p: EmitterCavityParams) -> float:
    """Fraction of the initial excitation leaving through the cavity."""
    return channel_yields(p)[0]


def compute_eta(p: EmitterCavityParams, method: str = "exact", steps: int = DEFAULT_STEPS) -> float:
    """Cavity-channel eta by closed-form integration ("exact") or on the time grid ("grid")."""
    if method == "exact":
        return indistinguishability_exact(p)
    if method == "grid":
        return indistinguishability(evolve(p, "cavity", steps))
    raise ValueError("method must be 'exact' or 'grid'")


def eta_vs_design(points, method: str = "exact"):
    """[(label, eta, error)] for (label, EmitterCavityParams) pairs; failures give eta = nan."""
    out = []
    for label, p in points:
        try:
            out.append((label, compute_eta(p, method), None))
        except (ValueError, RuntimeError, np.linalg.LinAlgError) as exc:
            out.append((label, float("nan"), f"{type(exc).__name__}: {exc}"))
    return out
