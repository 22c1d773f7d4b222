"""Data families, mollification, cut-off."""

import numpy as np
import pytest

from axivort.fields import GridField, NormSpec, WholeSpace, lp_norm
from axivort.initdata import (
    DataFamily,
    MollifierSpec,
    cutoff,
    cutoff_profile,
    family_q,
    make_approx_data,
    make_initial,
    mollifier_stencil,
    mollify,
)

# adaptive-quadrature oracle of ||q||_L1 for the default gaussian ring
RING_L1 = 1.233700550417167


def test_family_validation():
    with pytest.raises(ValueError, match="unknown family"):
        DataFamily("vortex_soup")
    with pytest.raises(ValueError, match="unknown parameters"):
        make_initial(DataFamily("gaussian_ring", {"sigma": 1.0}), h=0.1)
    with pytest.raises(ValueError, match="L1"):
        make_initial(DataFamily("near_sheet", {"decay": 1.8}), h=0.1)


def test_gaussian_ring_l1_golden():
    fld = make_initial(DataFamily("gaussian_ring"), grid=(3.0, -2.0, 2.0, 0.02))
    val = lp_norm(fld, NormSpec(1.0, WholeSpace()))
    assert val == pytest.approx(RING_L1, rel=1e-5)


def test_zero_amplitude_gives_zero_field():
    fld = make_initial(DataFamily("gaussian_ring", {"amplitude": 0.0}), h=0.1)
    assert np.all(fld.values == 0.0)


def test_manufactured_family_matches_kernel_oracle():
    fld = make_initial(DataFamily("manufactured"), grid=(2.0, -2.0, 2.0, 0.1))
    R, Z = np.meshgrid(fld.r_nodes(), fld.z_nodes(), indexing="ij")
    E = np.exp(-R ** 2 - Z ** 2)
    omega = -(3.0 - 14.0 * R ** 2 + 4.0 * R ** 4 + 4.0 * Z ** 2 * R ** 2) * E
    assert np.allclose(fld.values, omega / R, rtol=1e-14, atol=0.0)


def test_near_sheet_integrability_profile():
    # finite L1 and Lp, slow radial decay ~ r^{-2.25}
    fld = make_initial(DataFamily("near_sheet"), h=0.05)
    for p in (1.0, 1.2, 2.0):
        assert np.isfinite(lp_norm(fld, NormSpec(p, WholeSpace())))
    q = family_q(DataFamily("near_sheet"))
    assert q(8.0, 0.0) / q(4.0, 0.0) == pytest.approx(2 ** -2.25, rel=1e-2)


def test_mollifier_stencil_mass_and_coarse_grid():
    for profile in ("bump", "quartic"):
        w = mollifier_stencil(MollifierSpec(eps=0.2, profile=profile), 0.05)
        assert w.sum() == pytest.approx(1.0, abs=1e-14)
    with pytest.raises(ValueError, match="too coarse"):
        mollifier_stencil(MollifierSpec(eps=0.2), 0.15)


def test_mollify_constant_block_interior():
    h, eps = 0.05, 0.15
    f = lambda R, Z: np.where((R > 0.4) & (R < 1.6) & (abs(Z) < 0.6), 3.0, 0.0)
    nr, nz = 40, 40
    R, Z = np.meshgrid((np.arange(nr) + 0.5) * h, -1.0 + (np.arange(nz) + 0.5) * h,
                       indexing="ij")
    fld = GridField(2.0, -1.0, 1.0, h, f(R, Z))
    out = mollify(fld, MollifierSpec(eps=eps))
    Ro, Zo = np.meshgrid(out.r_nodes(), out.z_nodes(), indexing="ij")
    interior = (Ro > 0.4 + 1.5 * eps) & (Ro < 1.6 - 1.5 * eps) & (np.abs(Zo) < 0.6 - 1.5 * eps)
    assert np.max(np.abs(out.values[interior] - 3.0)) < 1e-12


def test_mollify_l1_never_grows_for_ring_data():
    rng = np.random.default_rng(77)
    h = 0.05
    for _ in range(8):
        # random smooth ring-type fields supported away from the axis
        fld = make_initial(
            DataFamily("gaussian_ring",
                       {"center_r": rng.uniform(1.2, 1.8),
                        "center_z": rng.uniform(-0.3, 0.3),
                        "width": rng.uniform(0.12, 0.2),
                        "amplitude": rng.uniform(0.5, 2.0)}),
            grid=(3.2, -1.8, 1.8, h))
        out = mollify(fld, MollifierSpec(eps=0.12))
        for p in (1.0, 2.0):
            a = lp_norm(out, NormSpec(p, WholeSpace()))
            b = lp_norm(fld, NormSpec(p, WholeSpace()))
            assert a <= b * (1.0 + 1e-10)


def test_mollify_second_order_in_eps():
    h = 0.02
    fld = make_initial(DataFamily("gaussian_ring"), grid=(2.6, -1.4, 1.4, h))
    errs = []
    for eps in (0.16, 0.08):
        out = mollify(fld, MollifierSpec(eps=eps))
        diff = GridField(fld.r_max, fld.z_min, fld.z_max, h, out.values - fld.values)
        errs.append(lp_norm(diff, NormSpec(2.0, WholeSpace())))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.25)


def test_mollify_commutes_with_z_translation():
    h = 0.05
    shift_cells = 6
    fld = make_initial(DataFamily("gaussian_ring"), grid=(2.6, -1.6, 1.6, h))
    shifted = GridField(fld.r_max, fld.z_min, fld.z_max, h,
                        np.roll(fld.values, shift_cells, axis=1))
    a = mollify(shifted, MollifierSpec(eps=0.12)).values
    b = np.roll(mollify(fld, MollifierSpec(eps=0.12)).values, shift_cells, axis=1)
    # interior columns agree exactly (away from the rolled-in strip)
    assert np.allclose(a[:, 8:-8], b[:, 8:-8], atol=1e-15)


def test_cutoff_plateau_and_support():
    h = 0.05
    fld = make_initial(DataFamily("gaussian_ring"), grid=(2.6, -1.4, 1.4, h))
    spec = MollifierSpec(eps=0.2)          # grow mode: plateau |x| <= 5
    out = cutoff(fld, spec)
    assert np.array_equal(out.values, fld.values)   # fully inside the plateau
    narrow = make_initial(DataFamily("gaussian_ring",
                                     {"center_r": 1.5, "width": 0.12}),
                          grid=(2.6, -1.4, 1.4, h))
    far = MollifierSpec(eps=4.0)           # support |x| <= 0.5: field outside
    gone = cutoff(narrow, far)
    norm0 = lp_norm(narrow, NormSpec(1.0, WholeSpace()))
    assert lp_norm(gone, NormSpec(1.0, WholeSpace())) < 1e-12 * norm0
    # |chi| <= 1 so no norm grows
    mid = MollifierSpec(eps=0.8)
    cut = cutoff(fld, mid)
    for p in (1.0, 2.0):
        assert lp_norm(cut, NormSpec(p, WholeSpace())) <= lp_norm(fld, NormSpec(p, WholeSpace()))


def test_cutoff_profile_modes():
    spec_grow = MollifierSpec(eps=0.5, cutoff_scale_mode="grow")
    assert cutoff_profile(spec_grow, np.array([1.9]))[0] == 1.0   # plateau到 1/eps = 2
    assert cutoff_profile(spec_grow, np.array([4.1]))[0] == 0.0   # beyond 2/eps = 4
    spec_lit = MollifierSpec(eps=0.5, cutoff_scale_mode="paper_literal")
    assert cutoff_profile(spec_lit, np.array([0.4]))[0] == 1.0    # plateau eps
    assert cutoff_profile(spec_lit, np.array([1.1]))[0] == 0.0    # beyond 2 eps


def test_approx_data_norm_inflation_bounded():
    h = 0.04
    fld = make_initial(DataFamily("gaussian_ring"), grid=(3.0, -1.6, 1.6, h))
    for order in ("mollify_then_cutoff", "cutoff_then_mollify"):
        out = make_approx_data(fld, MollifierSpec(eps=0.1), order=order)
        for p in (1.0, 2.0):
            a = lp_norm(out, NormSpec(p, WholeSpace()))
            b = lp_norm(fld, NormSpec(p, WholeSpace()))
            assert a <= (1.0 + 1e-8) * b


def test_approx_data_smoothness_under_refinement():
    # discrete 4th derivative of the mollified+cut field stays bounded
    vals = []
    for h in (0.04, 0.02):
        fld = make_initial(DataFamily("near_sheet"), grid=(4.0, -1.2, 1.2, h))
        out = make_approx_data(fld, MollifierSpec(eps=0.2))
        d4 = np.abs(np.diff(out.values, n=4, axis=0)).max() / h ** 4
        vals.append(d4)
    assert vals[1] < 2.0 * vals[0] + 1.0
