import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from axiflow.profile import (
    AxisInterval,
    PinchError,
    RadiusProfile,
    audit_identities,
    derivatives,
    geometric_state,
    integrate,
    profile_from_dict,
    profile_to_dict,
    read_profile,
    surface_laplacian,
    write_profile,
)
from axiflow.scenarios import catenoid_segment, cylinder, perturbed_cylinder
from oracles import catenoid_curvatures, curvatures, laplacian_of_cos, observed_order, perturbed


def from_func(func, n, a=0.0, b=1.0):
    return RadiusProfile.from_function(func, a, b, n)


# -------------------------------------------------------------- validation


def test_interval_rejects_reversed_ends():
    with pytest.raises(ValueError):
        AxisInterval(1.0, 1.0)
    assert AxisInterval(-1.0, 2.0).length == 3.0


@pytest.mark.parametrize("n,size", [(15, 16), (32, 32)])
def test_profile_shape_validation(n, size):
    with pytest.raises(ValueError):
        RadiusProfile(AxisInterval(0, 1), n, np.ones(size))


def test_profile_rejects_nonfinite():
    rho = np.ones(33)
    rho[4] = np.nan
    with pytest.raises(ValueError):
        RadiusProfile(AxisInterval(0, 1), 32, rho)


def test_profile_is_read_only():
    prof = cylinder(n_cells=16)
    with pytest.raises(ValueError):
        prof.rho[0] = 2.0


def test_nodes_are_uniform():
    prof = cylinder(a=-1.0, b=3.0, n_cells=16)
    assert prof.dx == 0.25
    assert prof.x[0] == -1.0 and prof.x[-1] == 3.0


# ------------------------------------------------------------ derivatives


def test_constant_profile_has_zero_derivatives():
    d1, d2 = derivatives(cylinder(n_cells=32))
    assert np.all(d1 == 0.0) and np.all(d2 == 0.0)


def test_cosine_derivatives_at_midpoint():
    # rho may cross zero here: derivatives do not need a positive profile
    prof = from_func(lambda x: np.cos(np.pi * x), 128)
    d1, d2 = derivatives(prof)
    mid = 64
    assert abs(d2[mid]) <= 1e-3
    second_order = np.pi**3 * prof.dx**2 / 6.0
    assert abs(d1[mid] + np.pi) <= 1.01 * second_order
    assert abs(d1[mid] + np.pi) >= 0.5 * second_order


def test_ghost_reflection_gives_zero_end_slopes():
    prof = from_func(lambda x: 2.0 + np.cos(2 * np.pi * x), 50)
    d1, _ = derivatives(prof)
    assert d1[0] == 0.0 and d1[-1] == 0.0


# -------------------------------------------------------- geometric state


@pytest.mark.parametrize("r", [0.3, 1.0, 2.5])
def test_cylinder_state(r):
    s = geometric_state(cylinder(r=r, n_cells=40))
    np.testing.assert_allclose(s.p, 1 / r, rtol=1e-15)
    np.testing.assert_allclose(s.H, 1 / r, rtol=1e-15)
    np.testing.assert_allclose(s.A2, 1 / r**2, rtol=1e-15)
    assert np.all(s.k == 0) and np.all(s.q == 0) and np.all(s.v == 1)
    assert s.surface_area == pytest.approx(2 * np.pi * r, rel=1e-14)
    assert s.enclosed_volume == pytest.approx(np.pi * r * r, rel=1e-14)


def test_state_exact_relations():
    s = geometric_state(perturbed_cylinder(n_cells=64))
    prof = perturbed_cylinder(n_cells=64)
    assert np.array_equal(s.y, prof.rho)
    assert np.array_equal(s.H, s.k + s.p)
    assert np.array_equal(s.A2, s.k * s.k + s.p * s.p)
    assert np.all(s.v >= 1.0) and np.all(s.p > 0)


def test_catenoid_is_minimal():
    c, x0 = 0.5, 0.5
    errs = []
    for n in (64, 128, 256):
        prof = catenoid_segment(c=c, x0=x0, n_cells=n)
        s = geometric_state(prof)
        p, k = catenoid_curvatures(prof.x, c, x0)
        # end nodes see the reflected (Neumann) slope, not the catenoid's
        np.testing.assert_allclose(s.p[1:-1], p[1:-1], rtol=prof.dx**2)
        errs.append(np.abs(s.H[1:-1]).max())
    assert errs[-1] < 1e-4
    assert observed_order(errs).min() >= 1.9


def test_pinch_reported():
    rho = np.ones(17)
    rho[3] = 0.0
    with pytest.raises(PinchError):
        geometric_state(RadiusProfile(AxisInterval(0, 1), 16, rho))


def test_perturbed_against_high_resolution_closed_form():
    prof = perturbed_cylinder(n_cells=4096)
    rho, d1, d2 = perturbed(prof.x)
    v, p, k, H = curvatures(rho, d1, d2)
    s = geometric_state(prof)
    np.testing.assert_allclose(s.v, v, atol=1e-7)
    np.testing.assert_allclose(s.p, p, atol=1e-7)
    np.testing.assert_allclose(s.k, k, atol=1e-6)
    np.testing.assert_allclose(s.H, H, atol=1e-6)
    assert s.enclosed_volume == pytest.approx(np.pi * (1 + 0.1**2 / 2), rel=1e-12)


def test_refinement_order_k_H_laplacian():
    ek, eh, el = [], [], []
    for n in (32, 64, 128, 256):
        prof = perturbed_cylinder(n_cells=n)
        rho, d1, d2 = perturbed(prof.x)
        _, _, k, H = curvatures(rho, d1, d2)
        s = geometric_state(prof)
        lap = surface_laplacian(prof, np.cos(2 * np.pi * prof.x))
        ek.append(np.abs(s.k - k).max())
        eh.append(np.abs(s.H - H).max())
        el.append(np.abs(lap - laplacian_of_cos(prof.x, rho, d1, d2)).max())
    for errs in (ek, eh, el):
        assert observed_order(errs).min() >= 1.9


# -------------------------------------------------------------- laplacian


@given(c=st.floats(-10, 10), amp=st.floats(0.0, 0.4), m=st.integers(1, 4))
@settings(max_examples=40, deadline=None)
def test_laplacian_of_constant_is_zero(c, amp, m):
    prof = from_func(lambda x: 1 + amp * np.cos(m * np.pi * x), 32)
    assert np.all(surface_laplacian(prof, np.full(33, c)) == 0.0)


def test_cylinder_laplacian_is_flat():
    prof = cylinder(r=0.7, n_cells=128)
    f = np.cos(2 * np.pi * prof.x)
    lap = surface_laplacian(prof, f)
    np.testing.assert_allclose(lap, -4 * np.pi**2 * f, atol=(2 * np.pi) ** 4 * prof.dx**2 / 12 * 1.01)


def test_cylinder_stationary_balance():
    r = 1.7
    prof = cylinder(r=r, n_cells=32)
    s = geometric_state(prof)
    lap = surface_laplacian(prof, s.y)
    h = 1 / r
    assert np.all(lap == 0.0)
    np.testing.assert_allclose(lap - 1 / s.y + h * s.p * s.y, 0.0, atol=1e-15)


def test_laplacian_shape_checked():
    with pytest.raises(ValueError):
        surface_laplacian(cylinder(n_cells=16), np.ones(5))


# -------------------------------------------------------------- identities


profiles = st.builds(
    lambda r, a1, a2, a3, n, L: RadiusProfile.from_function(
        lambda x: r * (1 + a1 * np.cos(np.pi * x / L) + a2 * np.cos(2 * np.pi * x / L) + a3 * np.cos(5 * np.pi * x / L)),
        0.0,
        L,
        n,
    ),
    r=st.floats(1e-3, 1e3),
    a1=st.floats(-0.3, 0.3),
    a2=st.floats(-0.3, 0.3),
    a3=st.floats(-0.3, 0.3),
    n=st.integers(16, 300),
    L=st.floats(0.05, 20.0),
)


@given(profiles)
@settings(max_examples=200, deadline=None)
def test_pointwise_identities_hold(prof):
    s = geometric_state(prof)
    pq, vy = s.identity_residuals()
    assert pq <= 1e-12 and vy <= 1e-12
    assert np.all(s.v >= 1.0) and np.all(s.p > 0)
    assert s.rho1[0] == 0.0 and s.rho1[-1] == 0.0


@given(profiles, st.floats(0.1, 10.0))
@settings(max_examples=60, deadline=None)
def test_curvature_scales_inversely_with_length(prof, lam):
    a, b = prof.interval.a, prof.interval.b
    scaled = RadiusProfile(AxisInterval(lam * a, lam * b), prof.n_cells, lam * prof.rho)
    s0, s1 = geometric_state(prof), geometric_state(scaled)
    # rounding in rho'' is about eps * rho / dx^2 in absolute terms
    noise = 64 * np.finfo(float).eps * prof.rho.max() / prof.dx**2
    np.testing.assert_allclose(s1.H * lam, s0.H, rtol=1e-10, atol=noise)
    np.testing.assert_allclose(s1.k * lam, s0.k, rtol=1e-10, atol=noise)
    np.testing.assert_allclose(s1.p * lam, s0.p, rtol=1e-10)


def test_audit_collects_every_state():
    with audit_identities() as audit:
        for n in (16, 32):
            geometric_state(perturbed_cylinder(n_cells=n))
    assert audit.count == 2
    assert audit.max_pq <= 1e-12 and audit.max_vy <= 1e-12
    geometric_state(cylinder(n_cells=16))
    assert audit.count == 2


# ------------------------------------------------------------ quadrature


def test_trapezoid_exact_on_linear():
    x = np.linspace(0, 2, 17)
    assert integrate(3 * x + 1, x[1] - x[0]) == pytest.approx(8.0, rel=1e-15)


# -------------------------------------------------------------- snapshot IO


@given(profiles, st.floats(0, 1e3))
@settings(max_examples=50, deadline=None)
def test_dict_round_trip(prof, t):
    t2, back = profile_from_dict(json.loads(json.dumps(profile_to_dict(prof, t))))
    assert back == prof and t2 == t


def test_file_round_trip_is_bit_exact(tmp_path):
    prof = perturbed_cylinder(n_cells=37)
    write_profile(tmp_path / "s.json", prof, 0.125, alpha=2.0)
    t, back = read_profile(tmp_path / "s.json")
    assert t == 0.125 and back == prof
    data = json.loads((tmp_path / "s.json").read_text())
    assert set(data) == {"a", "b", "n_cells", "rho", "t", "alpha"}


def test_malformed_snapshot():
    with pytest.raises(ValueError):
        profile_from_dict({"a": 0, "b": 1, "rho": [1.0] * 17})
