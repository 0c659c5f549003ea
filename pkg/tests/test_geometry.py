import math

import pytest

from hourglass_sps.geometry import (
    ALGAAS,
    GAAS,
    DeviceGeometry,
    Layer,
    Material,
    ar_coating,
    ar_material,
    build_hourglass,
    build_micropillar,
    quarter_wave_thickness,
)
from hourglass_sps.modesolver import he11_index

LAM = 925.0


@pytest.fixture(scope="module")
def hourglass():
    return build_hourglass()


def test_quarter_wave_examples():
    assert quarter_wave_thickness(GAAS, 3.4788, LAM) == pytest.approx(66.47, abs=5e-3)
    assert quarter_wave_thickness(GAAS, 1.0, LAM) == pytest.approx(231.25, abs=1e-12)
    ar = ar_material(3.4788)
    assert ar.refractive_index == pytest.approx(1.8652, abs=1e-4)
    # 925 / (4 * 1.8652) = 123.981, quoted to two decimals as 123.99
    assert quarter_wave_thickness(ar, 1.8652, LAM) == pytest.approx(123.99, abs=1e-2)


@pytest.mark.parametrize("n_eff,lam", [(0.5, LAM), (3.0, 0.0), (3.0, -1.0)])
def test_quarter_wave_rejects_bad_input(n_eff, lam):
    with pytest.raises(ValueError):
        quarter_wave_thickness(GAAS, n_eff, lam)


def test_ar_coating_examples():
    layer = ar_coating(3.4788, 1.8652, LAM)
    assert layer.material.refractive_index == pytest.approx(1.8652, abs=1e-4)
    assert layer.thickness == pytest.approx(123.99, abs=1e-2)
    vac = ar_coating(1.0, 1.0, LAM)
    assert vac.material.refractive_index == 1.0
    assert vac.thickness == pytest.approx(231.25)
    n_eff = he11_index(930.0, math.sqrt(3.4788), LAM)
    assert ar_coating(3.4788, n_eff, LAM).thickness == pytest.approx(LAM / (4 * n_eff), rel=1e-14)
    with pytest.raises(ValueError):
        ar_coating(0.9, 1.0, LAM)


def test_material_and_layer_validation():
    with pytest.raises(ValueError):
        Material("bad", 0.9)
    with pytest.raises(ValueError):
        Layer(GAAS, 0.0, 100.0, 100.0)
    with pytest.raises(ValueError):
        Layer(GAAS, 10.0, -1.0, 100.0)
    assert Layer(GAAS, 10.0, 100.0, 120.0).is_taper
    assert not Layer(GAAS, 10.0, 100.0, 100.0).is_taper


def test_top_taper_height_matches_design(hourglass):
    assert hourglass.top_taper_height == pytest.approx(58500.0, rel=0.05)


def test_top_taper_height_decreases_with_angle():
    heights = [build_hourglass(theta_deg=t, n_top=4, n_bot=4).top_taper_height for t in (0.5, 0.8, 1.0, 1.5)]
    assert all(a > b for a, b in zip(heights, heights[1:]))


def test_straight_pillar_when_radii_equal():
    geom = build_hourglass(r0=500.0, r_top=500.0, n_top=3, n_bot=3)
    assert geom.sidewall_angle == 0.0
    assert all(l.radius_bottom == 500.0 and l.radius_top == 500.0 for l in geom.layers)


def test_inverted_taper_rejected():
    with pytest.raises(ValueError):
        build_hourglass(r0=500.0, r_top=400.0)


def test_contiguity(hourglass):
    for a, b in zip(hourglass.layers, hourglass.layers[1:]):
        assert a.radius_top == b.radius_bottom
    assert hourglass.layers[hourglass.qd_layer_index].radius_bottom == 114.0


def test_dbr_layers_quarter_wave(hourglass):
    dbr = [l for l in hourglass.layers if l.material in (GAAS, ALGAAS) and l.thickness < 200]
    assert len(dbr) == 2 * (hourglass.n_top + hourglass.n_bot)
    for l in dbr:
        n = he11_index(l.mean_radius, l.material.refractive_index, LAM)
        assert n * l.thickness == pytest.approx(LAM / 4, rel=1e-9)


def test_mirror_symmetry_about_qd(hourglass):
    q = hourglass.qd_layer_index
    below = hourglass.layers[:q][::-1]
    above = hourglass.layers[q:]
    for lo, hi in zip(below, above[: 1 + 2 * hourglass.n_top]):
        assert lo.material == hi.material
        assert lo.thickness == pytest.approx(hi.thickness, rel=1e-12)
        assert lo.radius_top == pytest.approx(hi.radius_bottom, rel=1e-12)
        assert lo.radius_bottom == pytest.approx(hi.radius_top, rel=1e-12)


def test_layer_structure(hourglass):
    layers = hourglass.layers
    assert len(layers) == 2 * 46 + 2 + 2 * 11 + 2
    assert layers[-1].material.name == "AR"
    assert layers[-2].is_taper and layers[-2].radius_top == pytest.approx(930.0)
    assert hourglass.qd_axial_offset == 0.0


def test_antinode_tuning_moves_spacer_less_than_half_wave(hourglass):
    n = he11_index(114.0, 3.4788, LAM)
    assert abs(hourglass.qd_dbr_separation - 24142.0) < LAM / (2 * n)


def test_deterministic_and_round_trip(hourglass):
    again = build_hourglass()
    assert again.to_yaml() == hourglass.to_yaml()
    back = DeviceGeometry.from_yaml(hourglass.to_yaml())
    assert back == hourglass
    assert back.to_yaml() == hourglass.to_yaml()


def test_micropillar_structure():
    geom = build_micropillar(radius=1000.0, n_top=20, n_bot=30)
    assert len(geom.layers) == 2 * (20 + 30) + 1
    cav = geom.layers[geom.qd_layer_index]
    assert geom.qd_axial_offset == pytest.approx(cav.thickness / 2)
    assert all(l.radius_bottom == 1000.0 == l.radius_top for l in geom.layers)
    with_ar = build_micropillar(radius=1000.0, n_top=20, n_bot=30, ar=True)
    assert len(with_ar.layers) == 2 * (20 + 30) + 1 + 1


def test_micropillar_rejects_bad_radius():
    with pytest.raises(ValueError):
        build_micropillar(radius=0.0)


def test_geometry_rejects_gap():
    a = Layer(GAAS, 10.0, 100.0, 100.0)
    b = Layer(GAAS, 10.0, 110.0, 110.0)
    with pytest.raises(ValueError):
        DeviceGeometry(
            layers=(a, b), qd_layer_index=0, qd_axial_offset=1.0, design_wavelength=LAM, center_radius=100.0,
            top_radius=110.0, sidewall_angle=0.0, qd_dbr_separation=10.0, n_top=0, n_bot=0,
        )


def test_spacer_wider_than_top_radius_rejected():
    with pytest.raises(ValueError):
        build_hourglass(theta_deg=3.0)
