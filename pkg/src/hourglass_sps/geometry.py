"""Materials and axial layer stacks of hourglass and micropillar sources.

Layers are listed from the substrate upwards. Every layer is a straight-sided
cone (or cylinder) described by its thickness and end radii; tapered DBR
layers are quarter-wave at the HE11 index of a rod with the layer's mean
radius.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import yaml

from .modesolver import _gauss, he11_index

DESIGN_WAVELENGTH = 925.0


@dataclass(frozen=True)
class Material:
    name: str
    refractive_index: float

    def __post_init__(self):
        if not self.refractive_index >= 1:
            raise ValueError(f"refractive index of {self.name} must be >= 1")


GAAS = Material("GaAs", 3.4788)
ALGAAS = Material("AlGaAs", 2.9895)
AIR = Material("air", 1.0)


def ar_material(n_core: float) -> Material:
    return Material("AR", math.sqrt(n_core))


@dataclass(frozen=True)
class Layer:
    material: Material
    thickness: float
    radius_bottom: float
    radius_top: float

    def __post_init__(self):
        if not self.thickness > 0:
            raise ValueError("layer thickness must be positive")
        if not (self.radius_bottom > 0 and self.radius_top > 0):
            raise ValueError("layer radii must be positive")

    @property
    def is_taper(self) -> bool:
        return self.radius_bottom != self.radius_top

    @property
    def mean_radius(self) -> float:
        return 0.5 * (self.radius_bottom + self.radius_top)

    def flipped(self) -> "Layer":
        return Layer(self.material, self.thickness, self.radius_top, self.radius_bottom)


@dataclass(frozen=True)
class DeviceGeometry:
    """Axial stack of a pillar-type source, substrate to top."""

    layers: tuple
    qd_layer_index: int
    qd_axial_offset: float
    design_wavelength: float
    center_radius: float
    top_radius: float
    sidewall_angle: float
    qd_dbr_separation: float
    n_top: int
    n_bot: int
    kind: str = "hourglass"
    substrate: Material = GAAS
    top_taper_index: int | None = None  # homogeneous GaAs section above the top DBR
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        layers = tuple(self.layers)
        object.__setattr__(self, "layers", layers)
        for lo, hi in zip(layers[:-1], layers[1:]):
            if lo.radius_top != hi.radius_bottom:
                raise ValueError("layer radii are not contiguous")
        if not 0 <= self.qd_layer_index < len(layers):
            raise ValueError("QD layer index out of range")
        if not 0 <= self.qd_axial_offset <= layers[self.qd_layer_index].thickness:
            raise ValueError("QD offset lies outside its layer")
        if self.sidewall_angle < 0:
            raise ValueError("sidewall angle must be non-negative")

    @property
    def boundaries(self) -> np.ndarray:
        """Interface heights (nm) measured from the substrate top."""
        return np.concatenate([[0.0], np.cumsum([l.thickness for l in self.layers])])

    @property
    def qd_height(self) -> float:
        return float(self.boundaries[self.qd_layer_index] + self.qd_axial_offset)

    @property
    def total_height(self) -> float:
        return float(self.boundaries[-1])

    @property
    def top_taper_height(self) -> float:
        """Height from the QD plane to the top of the GaAs section (AR excluded)."""
        top = len(self.layers) - (1 if self.layers[-1].material.name == "AR" else 0)
        return float(self.boundaries[top] - self.qd_height)

    def section(self, start: int, stop: int) -> tuple:
        return self.layers[start:stop]

    # serialization -------------------------------------------------------
    def to_dict(self) -> dict:
        materials = {}
        for l in self.layers + (Layer(self.substrate, 1.0, 1.0, 1.0),):
            materials[l.material.name] = l.material.refractive_index
        return {
            "kind": self.kind,
            "design_wavelength_nm": self.design_wavelength,
            "center_radius_nm": self.center_radius,
            "top_radius_nm": self.top_radius,
            "sidewall_angle_deg": self.sidewall_angle,
            "qd_dbr_separation_nm": self.qd_dbr_separation,
            "n_top": self.n_top,
            "n_bot": self.n_bot,
            "qd_layer_index": self.qd_layer_index,
            "qd_axial_offset_nm": self.qd_axial_offset,
            "top_taper_index": self.top_taper_index,
            "substrate": self.substrate.name,
            "materials": materials,
            "layers": [
                {
                    "material": l.material.name,
                    "thickness_nm": l.thickness,
                    "r_bot_nm": l.radius_bottom,
                    "r_top_nm": l.radius_top,
                }
                for l in self.layers
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DeviceGeometry":
        mats = {k: Material(k, float(v)) for k, v in data["materials"].items()}
        layers = tuple(
            Layer(mats[d["material"]], float(d["thickness_nm"]), float(d["r_bot_nm"]), float(d["r_top_nm"]))
            for d in data["layers"]
        )
        return cls(
            layers=layers,
            qd_layer_index=int(data["qd_layer_index"]),
            qd_axial_offset=float(data["qd_axial_offset_nm"]),
            design_wavelength=float(data["design_wavelength_nm"]),
            center_radius=float(data["center_radius_nm"]),
            top_radius=float(data["top_radius_nm"]),
            sidewall_angle=float(data["sidewall_angle_deg"]),
            qd_dbr_separation=float(data["qd_dbr_separation_nm"]),
            n_top=int(data["n_top"]),
            n_bot=int(data["n_bot"]),
            kind=data.get("kind", "hourglass"),
            substrate=mats[data["substrate"]],
            top_taper_index=data.get("top_taper_index"),
        )

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    @classmethod
    def from_yaml(cls, text: str) -> "DeviceGeometry":
        return cls.from_dict(yaml.safe_load(text))


def quarter_wave_thickness(material: Material, n_eff: float, wavelength: float) -> float:
    """Thickness giving a quarter-wave phase at effective index ``n_eff``."""
    if not (n_eff >= 1 and wavelength > 0):
        raise ValueError("need n_eff >= 1 and a positive wavelength")
    return wavelength / (4 * n_eff)


def ar_coating(n_core: float, n_eff_ar: float, wavelength: float, radius: float = math.inf) -> Layer:
    """Quarter-wave anti-reflection layer of index sqrt(n_core)."""
    if not n_core >= 1:
        raise ValueError("core index must be >= 1")
    mat = ar_material(n_core)
    return Layer(mat, quarter_wave_thickness(mat, n_eff_ar, wavelength), radius, radius)


def _local_quarter_wave(material, r_start, tan_t, wavelength, guess):
    """Fixed point d = lambda / (4 n_eff(r_start + d tan / 2))."""
    d = guess
    for _ in range(50):
        n = he11_index(r_start + 0.5 * d * tan_t, material.refractive_index, wavelength)
        d_new = quarter_wave_thickness(material, n, wavelength)
        if abs(d_new - d) <= 1e-13 * d:
            return d_new
        d = d_new
    raise RuntimeError("quarter-wave iteration did not converge")


def _dbr_outward(n_pairs, r_start, tan_t, wavelength, low, high):
    """Layers of a tapered DBR built outward from the cavity (low index first)."""
    out, r = [], r_start
    guess = {low.name: wavelength / (4 * low.refractive_index), high.name: wavelength / (4 * high.refractive_index)}
    for _ in range(n_pairs):
        for mat in (low, high):
            d = _local_quarter_wave(mat, r, tan_t, wavelength, guess[mat.name])
            guess[mat.name] = d
            r_next = r + d * tan_t
            out.append(Layer(mat, d, r, r_next))
            r = r_next
    return out


def spacer_phase(h, r0, tan_t, n_core, wavelength, nodes=48):
    """k0 * integral of the local HE11 index over a tapered spacer of height h."""
    k0 = 2 * np.pi / wavelength
    if tan_t == 0:
        return k0 * he11_index(float(r0), n_core, wavelength) * h
    x, w = _gauss(nodes)
    z = 0.5 * h * (x + 1)
    n = np.array([he11_index(float(r0 + zi * tan_t), n_core, wavelength) for zi in z])
    return k0 * 0.5 * h * float(np.sum(w * n))


def antinode_spacer(h, r0, tan_t, n_core, wavelength):
    """Spacer height nearest ``h`` whose one-way phase is a multiple of pi.

    With a low-index first DBR layer the mirror reflects with zero phase, so
    this places a field antinode on the QD plane.
    """
    k0 = 2 * np.pi / wavelength
    target = np.pi * max(1, round(spacer_phase(h, r0, tan_t, n_core, wavelength) / np.pi))
    for _ in range(20):
        err = target - spacer_phase(h, r0, tan_t, n_core, wavelength)
        step = err / (k0 * he11_index(float(r0 + h * tan_t), n_core, wavelength))
        h += step
        if abs(step) < 1e-9:
            break
    return h


def build_hourglass(
    r0: float = 114.0,
    r_top: float = 930.0,
    theta_deg: float = 0.8,
    h: float = 24142.0,
    n_top: int = 11,
    n_bot: int = 46,
    wavelength: float = DESIGN_WAVELENGTH,
    high: Material = GAAS,
    low: Material = ALGAAS,
    tune_antinode: bool = True,
    ar: bool = True,
) -> DeviceGeometry:
    """Symmetric hourglass: tapered bottom DBR, two spacers, tapered top DBR, top taper, AR.

    With ``tune_antinode`` the spacer height is moved (by less than half a
    wavelength in the material) so the QD sits on a field antinode.
    """
    if min(r0, r_top, h, wavelength) <= 0 or n_top < 0 or n_bot < 0:
        raise ValueError("lengths must be positive and pair counts non-negative")
    if theta_deg < 0 or theta_deg >= 90:
        raise ValueError("sidewall angle must lie in [0, 90) degrees")
    if r_top < r0:
        raise ValueError("top radius must not be smaller than the center radius")
    if r_top == r0:
        theta_deg = 0.0  # straight pillar, the angle is irrelevant
    tan_t = math.tan(math.radians(theta_deg))
    if tan_t == 0 and r_top != r0:
        raise ValueError("a zero sidewall angle needs r_top == r0")

    h_requested = h
    if tune_antinode:
        h = antinode_spacer(h, r0, tan_t, high.refractive_index, wavelength)
    r_h = r0 + h * tan_t
    spacer = Layer(high, h, r0, r_h)
    dbr = _dbr_outward(max(n_top, n_bot), r_h, tan_t, wavelength, low, high)
    top_dbr = dbr[: 2 * n_top]
    bot_dbr = [l.flipped() for l in reversed(dbr[: 2 * n_bot])]

    r_dbr = top_dbr[-1].radius_top if top_dbr else r_h
    if r_dbr > r_top * (1 + 1e-12):
        raise ValueError("top DBR is wider than the requested top radius")
    upper = list(top_dbr)
    top_taper_index = None
    if r_top > r_dbr and tan_t > 0:
        top_taper_index = len(bot_dbr) + 2 + len(upper)
        upper.append(Layer(high, (r_top - r_dbr) / tan_t, r_dbr, r_top))
    if ar:
        n_eff_ar = he11_index(float(r_top), math.sqrt(high.refractive_index), wavelength)
        upper.append(ar_coating(high.refractive_index, n_eff_ar, wavelength, upper[-1].radius_top if upper else r_h))

    layers = tuple(bot_dbr) + (spacer.flipped(), spacer) + tuple(upper)
    return DeviceGeometry(
        layers=layers,
        qd_layer_index=len(bot_dbr) + 1,
        qd_axial_offset=0.0,
        design_wavelength=wavelength,
        center_radius=r0,
        top_radius=r_top,
        sidewall_angle=theta_deg,
        qd_dbr_separation=h,
        n_top=n_top,
        n_bot=n_bot,
        kind="hourglass",
        substrate=high,
        top_taper_index=top_taper_index,
        extra={"requested_separation": h_requested},
    )


def build_micropillar(
    radius: float = 1000.0,
    n_top: int = 20,
    n_bot: int = 30,
    wavelength: float = DESIGN_WAVELENGTH,
    high: Material = GAAS,
    low: Material = ALGAAS,
    ar: bool = False,
) -> DeviceGeometry:
    """Cylindrical micropillar with a one-wavelength cavity and the QD at its center."""
    if radius <= 0 or wavelength <= 0 or n_top < 0 or n_bot < 0:
        raise ValueError("lengths must be positive and pair counts non-negative")
    n_cav = he11_index(float(radius), high.refractive_index, wavelength)
    cavity = Layer(high, wavelength / n_cav, radius, radius)
    dbr = _dbr_outward(max(n_top, n_bot), radius, 0.0, wavelength, low, high)
    top = list(dbr[: 2 * n_top])
    bot = list(reversed(dbr[: 2 * n_bot]))
    if ar:
        n_eff_ar = he11_index(float(radius), math.sqrt(high.refractive_index), wavelength)
        top.append(ar_coating(high.refractive_index, n_eff_ar, wavelength, radius))
    return DeviceGeometry(
        layers=tuple(bot) + (cavity,) + tuple(top),
        qd_layer_index=len(bot),
        qd_axial_offset=0.5 * cavity.thickness,
        design_wavelength=wavelength,
        center_radius=radius,
        top_radius=radius,
        sidewall_angle=0.0,
        qd_dbr_separation=0.5 * cavity.thickness,
        n_top=n_top,
        n_bot=n_bot,
        kind="micropillar",
        substrate=high,
    )
