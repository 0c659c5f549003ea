"""Design-point pipelines, parallel sweeps and CSV output."""

from __future__ import annotations

import datetime as _dt
import logging
import math
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .axial import AxialStack, characterize
from .config import Config, from_dict
from .dynamics import EmitterCavityParams, cavity_yield, compute_eta
from .emission import FigureOfMerit, beta, cavity_parameters, transmission
from .farfield import far_field, gaussian_coupling, lens_transmission
from .geometry import Material, build_hourglass
from .modesolver import solve_mode
from .phonons import PhononEnv
from .taper import taper_transmission, top_taper

log = logging.getLogger(__name__)

FIG_COLUMNS = {
    "fig2": ("R_top_nm", "gamma_L", "gamma_L_T"),
    "fig3": ("theta_deg", "T11", "n_segments", "basis_reduced"),
    "fig4": ("n_top", "beta", "F_p", "Q", "V_n", "lambda_c_nm", "Q_fwhm", "f_up"),
    "fig5": ("n_top", "eps_s", "eps", "eta", "eps_eta", "beta", "gamma", "g_per_s", "kappa_per_s"),
}
DESCRIPTOR_COLUMNS = ("n_top", "r0_nm", "r_top_nm", "theta_deg", "lambda_c_nm", "Q", "V_n", "F_p", "f_up")
FIG_COLUMNS["evaluate"] = DESCRIPTOR_COLUMNS + FigureOfMerit.COLUMNS


# design-point pipelines ----------------------------------------------------
def _materials(cfg: Config):
    m = cfg["materials"]
    return Material(m["high"]["name"], m["high"]["n"]), Material(m["low"]["name"], m["low"]["n"])


def design_geometry(cfg: Config, **overrides):
    g = dict(cfg["geometry"], **overrides)
    high, low = _materials(cfg)
    return build_hourglass(
        r0=g["r0_nm"],
        r_top=g["r_top_nm"],
        theta_deg=g["theta_deg"],
        h=g["h_nm"],
        n_top=int(g["n_top"]),
        n_bot=int(g["n_bot"]),
        wavelength=g["wavelength_nm"],
        high=high,
        low=low,
        tune_antinode=g["tune_antinode"],
        ar=g["ar_coating"],
    )


def collection_point(cfg: Config, r_top: float, wavelength: float | None = None) -> dict:
    """gamma^L (Gaussian) and gamma^L_T (total) of the HE11 mode at the top facet."""
    lam = cfg["geometry"]["wavelength_nm"] if wavelength is None else wavelength
    high, _ = _materials(cfg)
    mode = solve_mode(float(r_top), high.refractive_index, cfg["materials"]["clad_n"], lam)
    ff = far_field(mode, ar=cfg["geometry"]["ar_coating"])
    na = cfg["collection"]["na"]
    return {"R_top_nm": r_top, "gamma_L": gaussian_coupling(ff, na), "gamma_L_T": lens_transmission(ff, na)}


def taper_point(cfg: Config, theta_deg: float, wavelength: float | None = None) -> dict:
    g = cfg["geometry"]
    lam = g["wavelength_nm"] if wavelength is None else wavelength
    high, _ = _materials(cfg)
    c = cfg["collection"]
    res = taper_transmission(
        top_taper(g["r0_nm"], g["r_top_nm"], float(theta_deg), high),
        lam,
        n_modes=c["taper_modes"],
        n_segments=c["taper_segments"],
        n_clad=cfg["materials"]["clad_n"],
    )
    return {"theta_deg": theta_deg, "T11": res.t11, "n_segments": res.n_segments, "basis_reduced": res.basis_reduced}


def background_ratio(cfg: Config) -> float:
    """Gamma_B / Gamma_Bulk at the QD radius, from the fixed value or the radius table."""
    e = cfg["emitter"]
    if e["gamma_b_table"] is None:
        return float(e["gamma_b_ratio"])
    radii, ratios = np.array(e["gamma_b_table"], float).T
    return float(np.interp(cfg["geometry"]["r0_nm"], radii, ratios))


def cavity_point(cfg: Config, n_top: int) -> dict:
    geom = design_geometry(cfg, n_top=int(n_top))
    ch = characterize(AxialStack.from_geometry(geom))
    return {
        "n_top": int(n_top),
        "beta": beta(ch.purcell, background_ratio(cfg)),
        "F_p": ch.purcell,
        "Q": ch.q,
        "V_n": ch.v_n,
        "lambda_c_nm": ch.wavelength,
        "Q_fwhm": ch.q_fwhm,
        "f_up": ch.upward_fraction,
        "_character": ch,
    }


def phonon_env(cfg: Config) -> PhononEnv:
    p = cfg["phonons"]
    if not p["enabled"]:
        return PhononEnv(enabled=False)
    return PhononEnv(alpha=p["alpha_ps2"], omega_b=p["omega_b_per_ps"], temperature=p["temperature_k"], enabled=True)


def emitter_params(cfg: Config, character) -> EmitterCavityParams:
    e = cfg["emitter"]
    g, kappa = cavity_parameters(character, character.wavelength, e["gamma_bulk_per_s"])
    return EmitterCavityParams(
        g=g,
        kappa=kappa,
        gamma_b=background_ratio(cfg) * e["gamma_bulk_per_s"],
        gamma_bulk=e["gamma_bulk_per_s"],
        detuning=e["detuning_rad_per_s"],
        gamma_pd=e["gamma_pd_per_s"],
        phonons=phonon_env(cfg),
    )


def figure_of_merit(cfg: Config, n_top: int | None = None, t11: float | None = None) -> tuple:
    """(FigureOfMerit, extra columns) for one design; T11 is computed unless given."""
    g = cfg["geometry"]
    n_top = int(g["n_top"] if n_top is None else n_top)
    cav = cavity_point(cfg, n_top)
    ch = cav["_character"]
    if t11 is None:
        t11 = taper_point(cfg, g["theta_deg"])["T11"]
    gamma_l = collection_point(cfg, g["r_top_nm"], ch.wavelength)["gamma_L"]
    gam = transmission(gamma_l, t11, min(ch.upward_fraction, 1.0))
    params = emitter_params(cfg, ch)
    eps = cavity_yield(params) * gam
    eta = compute_eta(params)
    descriptor = {
        "n_top": n_top,
        "r0_nm": g["r0_nm"],
        "r_top_nm": g["r_top_nm"],
        "theta_deg": g["theta_deg"],
        "lambda_c_nm": ch.wavelength,
        "Q": ch.q,
        "V_n": ch.v_n,
        "F_p": ch.purcell,
        "f_up": ch.upward_fraction,
    }
    fom = FigureOfMerit.build(cav["beta"], gamma_l, t11, gam, eps, eta, descriptor)
    return fom, {"g_per_s": params.g, "kappa_per_s": params.kappa}


def evaluate_row(cfg: Config, n_top=None, t11=None) -> dict:
    fom, _ = figure_of_merit(cfg, n_top, t11)
    row = dict(fom.descriptor)
    row.update(zip(FigureOfMerit.COLUMNS, fom.values()))
    return row


def fig5_row(cfg: Config, n_top: int, t11: float) -> dict:
    fom, extra = figure_of_merit(cfg, n_top, t11)
    return {
        "n_top": int(n_top),
        "eps_s": fom.eps_s,
        "eps": fom.eps,
        "eta": fom.eta,
        "eps_eta": fom.eps_eta,
        "beta": fom.beta,
        "gamma": fom.gamma,
        **extra,
    }


# sweep runner --------------------------------------------------------------
def _point(task):
    kind, cfg_dict, value, extra = task
    cfg = from_dict(cfg_dict)
    try:
        if kind == "fig2":
            row = collection_point(cfg, value)
        elif kind == "fig3":
            row = taper_point(cfg, value)
        elif kind == "fig4":
            row = cavity_point(cfg, value)
            row.pop("_character")
        elif kind == "fig5":
            row = fig5_row(cfg, value, extra)
        elif kind == "evaluate":
            row = evaluate_row(cfg, value, extra)
        else:
            raise ValueError(f"unknown sweep kind {kind}")
        row["status"] = "ok"
    except Exception as exc:  # a failed point is recorded, the sweep goes on
        log.warning("%s point %r failed: %s", kind, value, exc)
        row = {FIG_COLUMNS[kind][0]: value, "status": f"error: {type(exc).__name__}: {exc}"}
    return row


def run_points(kind: str, cfg: Config, values, jobs: int = 1, extra=None) -> list:
    """Evaluate ``values`` in order; rows are returned in input order whatever ``jobs`` is."""
    tasks = [(kind, cfg.to_dict(), v, extra) for v in values]
    if jobs <= 1 or len(tasks) == 1:
        return [_point(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_point, tasks))


# CSV -----------------------------------------------------------------------
def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        return f"{v:.9g}"
    return str(v).replace(",", ";").replace("\n", " ")


def write_csv(path, command: str, columns, rows, cfg: Config, timestamp: str | None = None) -> None:
    """CSV with a '#' header block (version, command, config hash, timestamp)."""
    if timestamp is None:
        timestamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    cols = tuple(columns) + ("status",)
    lines = [
        f"# hourglass-sps {__version__}",
        f"# command: {command}",
        f"# config_sha256: {cfg.digest()}",
        f"# created: {timestamp}",
        ",".join(cols),
    ]
    for row in rows:
        lines.append(",".join(format_value(row.get(c, float("nan"))) for c in cols))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv(path):
    """(header comments, column names, rows as lists of strings)."""
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    header = [ln for ln in lines if ln.startswith("#")]
    body = [ln for ln in lines if not ln.startswith("#")]
    return header, body[0].split(","), [ln.split(",") for ln in body[1:]]


# optimization --------------------------------------------------------------
INV_PHI = (math.sqrt(5) - 1) / 2


def optimize(cfg: Config, parameter: str, lower, upper, jobs: int = 1, tol: float = 1e-3, max_evals: int = 30):
    """Golden-section search of eps*eta over one design parameter.

    ``n_top`` is searched over integers; ``r_top_nm`` and ``theta_deg`` are
    continuous. Returns (best value, best row, all evaluated rows sorted by
    parameter value).
    """
    if parameter not in ("n_top", "r_top_nm", "theta_deg"):
        raise ValueError("optimize supports n_top, r_top_nm or theta_deg")
    if not lower < upper:
        raise ValueError("need lower < upper")
    cache = {}
    t11_fixed = taper_point(cfg, cfg["geometry"]["theta_deg"])["T11"] if parameter != "theta_deg" else None

    def score(x):
        if x not in cache:
            local = cfg if parameter == "n_top" else cfg.replace(f"geometry.{parameter}", float(x))
            n = int(x) if parameter == "n_top" else None
            row = run_points("evaluate", local, [n], jobs=1, extra=t11_fixed)[0]
            row[parameter] = x
            cache[x] = row
        v = cache[x].get("eps_eta", float("nan"))
        return -math.inf if v is None or math.isnan(v) else v

    a, b = lower, upper
    if parameter == "n_top":
        a, b = int(a), int(b)
        while b - a > 2:
            c = a + int(round((b - a) * (1 - INV_PHI)))
            d = a + int(round((b - a) * INV_PHI))
            if d <= c:
                d = c + 1
            if score(c) >= score(d):
                b = d
            else:
                a = c
        best = max(range(a, b + 1), key=lambda x: (score(x), -x))
    else:
        c, d = b - INV_PHI * (b - a), a + INV_PHI * (b - a)
        evals = 0
        while b - a > tol * max(abs(a), abs(b), 1.0) and evals < max_evals:
            if score(c) >= score(d):
                b, d = d, c
                c = b - INV_PHI * (b - a)
            else:
                a, c = c, d
                d = a + INV_PHI * (b - a)
            evals += 1
        best = max(cache, key=lambda x: (score(x), -x))
    rows = [cache[k] for k in sorted(cache)]
    return best, cache[best], rows
