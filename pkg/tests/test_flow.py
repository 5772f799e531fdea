"""Skew-product stepping, closed-form orbits, distality, conjugacy."""

from fractions import Fraction

import pytest
from mpmath import mp

from mobiusflow.contfrac import (
    ResourceBudgetError,
    angle_digest,
    frac_mod1,
    rational_angle,
)
from mobiusflow.flow import (
    BETA_FIX,
    DIRECT_STEP_LIMIT,
    FlowConfig,
    FrequencyVector,
    TorusPoint,
    birkhoff_avg,
    build_conjugacy,
    check_conjugacy,
    distality_probe,
    flow_config_from_json,
    flow_config_to_json,
    metric_d,
    orbit_direct,
    orbit_fast,
    orbit_rows,
    pairing,
    psi_inv,
    psi_map,
    step,
)
from mobiusflow.harmonic import FourierSeries, analytic_h_sample, furstenberg_h
from mobiusflow.phases import cis
from mobiusflow.summation import KahanComplex


def _circle(a, b):
    e = abs(a - b) % 1.0
    return min(e, 1.0 - e)


def _cfg(angle, v=4, h=None):
    return FlowConfig(alpha=angle, h=h if h is not None else analytic_h_sample(1.0, 6, 11), v=v)


# ---------------------------------------------------------------------------
# value objects


def test_torus_point_validation():
    with pytest.raises(ValueError):
        TorusPoint((0.5,))
    with pytest.raises(ValueError):
        TorusPoint((0.5, 1.0))
    with pytest.raises(ValueError):
        TorusPoint((-0.1, 0.5))
    p = TorusPoint((0.5, 0.25, 0.125))
    assert p.v == 3


def test_frequency_vector_conventions():
    b = FrequencyVector((3, 1, -2))
    assert b.rho == -1  # base entry does not count
    assert b.norm == 3
    assert b.top_index == 3
    assert not b.is_zero
    assert b.label() == "3;1;-2"
    assert FrequencyVector((5, 0)).top_index == 1
    assert FrequencyVector(()).is_zero
    e2 = FrequencyVector.unit(2, 4)
    assert e2.entries == (0, 1, 0, 0)
    with pytest.raises(ValueError):
        FrequencyVector.unit(0)


def test_flow_config_validation(exp_angle):
    with pytest.raises(ValueError):
        FlowConfig(alpha=exp_angle, h=FourierSeries({}), v=1)
    with pytest.raises(ValueError):
        FlowConfig(alpha=exp_angle, h=FourierSeries({}), v=4, beta_fix=-1)


def test_beta_fixed_point_against_mpmath():
    with mp.workdps(60):
        want = int(mp.floor((mp.sqrt(5) - 1) / 2 * 2**128))
    assert BETA_FIX == want


def test_flow_config_json_roundtrip(exp_angle, poly_angle):
    cfg = _cfg(exp_angle)
    doc = flow_config_to_json(cfg)
    back = flow_config_from_json(doc, exp_angle)
    assert back == cfg
    with pytest.raises(ValueError):
        flow_config_from_json(doc, poly_angle)


# ---------------------------------------------------------------------------
# stepping and the exact base coordinate


def test_zero_series_is_a_pure_rotation(exp_angle):
    cfg = _cfg(exp_angle, v=3, h=FourierSeries({}))
    x = TorusPoint((0.0, 0.3, 0.7))
    y = orbit_direct(cfg, x, 1000)
    assert y.coords[1:] == (0.3, 0.7)
    assert y.coords[0] == frac_mod1(1000, exp_angle)
    assert y.base_steps == 1000 and y.base_angle == angle_digest(exp_angle)


def test_repeated_step_keeps_base_exact(exp_angle):
    cfg = _cfg(exp_angle, v=2)
    x = TorusPoint((0.0, 0.5))
    for _ in range(50):
        x = step(cfg, x)
    assert x.base_steps == 50
    assert x.coords[0] == frac_mod1(50, exp_angle)


def test_hand_seed_fraction_oracle(exp_angle):
    cfg = _cfg(exp_angle, v=2, h=FourierSeries({}))
    x = TorusPoint((0.3, 0.0))
    y = orbit_direct(cfg, x, 777)
    l, q = exp_angle.snapshot
    want = (Fraction(0.3) + 777 * Fraction(l, q)) % 1
    assert y.coords[0] == want.numerator / want.denominator


def test_truncation_is_exact(exp_angle):
    h = analytic_h_sample(1.0, 5, 3)
    big = FlowConfig(alpha=exp_angle, h=h, v=6)
    small = FlowConfig(alpha=exp_angle, h=h, v=3)
    xb = TorusPoint((0.1, 0.2, 0.3, 0.4, 0.5, 0.6))
    xs = TorusPoint((0.1, 0.2, 0.3))
    yb = orbit_direct(big, xb, 400)
    ys = orbit_direct(small, xs, 400)
    assert yb.coords[:3] == ys.coords


def test_semigroup_property(exp_angle):
    cfg = _cfg(exp_angle, v=4)
    x = TorusPoint((0.3, 0.71, 0.05, 0.42))
    once = orbit_direct(cfg, x, 1500)
    twice = orbit_direct(cfg, orbit_direct(cfg, x, 700), 800)
    assert once.coords[0] == twice.coords[0]
    for a, b in zip(once.coords[1:], twice.coords[1:]):
        assert _circle(a, b) < 1e-10


def test_fast_matches_direct(exp_angle, poly_angle):
    for angle in (exp_angle, poly_angle):
        cfg = _cfg(angle, v=4)
        x = TorusPoint((0.3, 0.71, 0.05, 0.42))
        for n in (1, 13, 500, 2000):
            a = orbit_direct(cfg, x, n)
            b = orbit_fast(cfg, x, n)
            assert a.coords[0] == b.coords[0]
            for u, w in zip(a.coords[1:], b.coords[1:]):
                assert _circle(u, w) < 1e-8


def test_fast_handles_resonant_rational():
    angle = rational_angle(1, 3)
    h = FourierSeries({3: 0.1, -3: 0.1, 0: 0.05})
    cfg = FlowConfig(alpha=angle, h=h, v=3)
    x = TorusPoint((0.2, 0.4, 0.6))
    a = orbit_direct(cfg, x, 600)
    b = orbit_fast(cfg, x, 600)
    for u, w in zip(a.coords, b.coords):
        assert _circle(u, w) < 1e-9


def test_mean_drift_is_dyadic_exact(exp_angle):
    cfg = _cfg(exp_angle, v=3, h=FourierSeries({0: 0.3}))
    x = TorusPoint((0.0, 0.25, 0.75))
    a = orbit_direct(cfg, x, 5000)
    b = orbit_fast(cfg, x, 5000)
    for u, w in zip(a.coords, b.coords):
        assert _circle(u, w) < 1e-11


def test_orbit_guards(exp_angle):
    cfg = _cfg(exp_angle, v=3)
    x = TorusPoint((0.1, 0.2, 0.3))
    with pytest.raises(ValueError):
        orbit_direct(cfg, TorusPoint((0.1, 0.2)), 5)
    with pytest.raises(ValueError):
        orbit_direct(cfg, x, -1)
    with pytest.raises(ResourceBudgetError):
        orbit_direct(cfg, x, DIRECT_STEP_LIMIT + 1)
    assert orbit_direct(cfg, x, 0) is x
    big = orbit_fast(cfg, x, 10**12)  # closed form has no step cap
    assert all(0.0 <= c < 1.0 for c in big.coords)


def test_orbit_rows_match_direct(exp_angle):
    cfg = _cfg(exp_angle, v=3)
    x = TorusPoint((0.3, 0.9, 0.2))
    rows = list(orbit_rows(cfg, x, 40))
    assert len(rows) == 41
    assert rows[0] == (0, x.coords)
    for n, coords in rows[1:]:
        want = orbit_direct(cfg, x, n)
        assert coords[0] == want.coords[0]
        for a, b in zip(coords[1:], want.coords[1:]):
            assert _circle(a, b) < 1e-10


# ---------------------------------------------------------------------------
# pairing, metric, distality


def test_pairing_and_metric():
    x = TorusPoint((0.25, 0.5))
    assert pairing(FrequencyVector((1, 2)), x) == 0.25
    assert pairing(FrequencyVector.unit(2, 2), x) == 0.5
    with pytest.raises(ValueError):
        pairing(FrequencyVector((0, 0, 1)), x)
    y = TorusPoint((0.75, 0.75))
    assert metric_d(x, y) == 0.5 * 0.5 + 0.25 * 0.25
    with pytest.raises(ValueError):
        metric_d(x, TorusPoint((0.1, 0.2, 0.3)))


def test_distality_same_base_pins_distance(exp_angle):
    cfg = _cfg(exp_angle, v=3)
    x = TorusPoint((0.2, 0.3, 0.4))
    y = TorusPoint((0.2, 0.45, 0.4))
    pr = distality_probe(cfg, x, y, 400)
    assert pr.same_base
    assert abs(pr.bound - 0.0375) < 1e-15  # gap 0.15 at coordinate 2, weight 1/4
    assert pr.passed
    assert pr.spread < 1e-12  # increments cancel exactly on a shared stream


def test_distality_split_base(exp_angle):
    cfg = _cfg(exp_angle, v=3)
    x = TorusPoint((0.37, 0.3, 0.4))
    y = TorusPoint((0.62, 0.3, 0.4))
    pr = distality_probe(cfg, x, y, 400)
    assert not pr.same_base
    assert pr.bound == pytest.approx(0.125, abs=1e-15)
    assert pr.passed
    assert pr.min_distance >= pr.bound - 1e-12


def test_distality_guards(exp_angle):
    cfg = _cfg(exp_angle, v=3)
    x = TorusPoint((0.1, 0.2, 0.3))
    with pytest.raises(ValueError):
        distality_probe(cfg, x, x, 10)
    with pytest.raises(ValueError):
        distality_probe(cfg, x, TorusPoint((0.1, 0.2, 0.4)), -1)


# ---------------------------------------------------------------------------
# Birkhoff averages


def test_birkhoff_zero_vector(exp_angle):
    cfg = _cfg(exp_angle, v=3)
    x = TorusPoint((0.1, 0.2, 0.3))
    assert birkhoff_avg(cfg, FrequencyVector((0, 0, 0)), x, 1000) == 1.0 + 0j


def test_birkhoff_base_vector_oracle(exp_angle):
    cfg = _cfg(exp_angle, v=2)
    x = TorusPoint((0.0, 0.5))
    n = 3000
    got = birkhoff_avg(cfg, FrequencyVector((1, 0)), x, n)
    acc = KahanComplex()
    for j in range(1, n + 1):
        z = cis(frac_mod1(j, exp_angle))
        acc.add_parts(z.real, z.imag)
    want = acc.value / n
    assert abs(got - want) < 1e-9
    # the base rotation equidistributes, so the average is already small
    assert abs(got) < 0.05


def test_birkhoff_fiber_vector_against_stepping(exp_angle):
    cfg = _cfg(exp_angle, v=3)
    x = TorusPoint((0.3, 0.9, 0.2))
    b = FrequencyVector((0, 1, 1))
    n = 500
    got = birkhoff_avg(cfg, b, x, n)
    acc = 0j
    xn = x
    for _ in range(n):
        xn = step(cfg, xn)
        acc += cis(pairing(b, xn))
    assert abs(got - acc / n) < 1e-9


def test_birkhoff_guards(exp_angle):
    cfg = _cfg(exp_angle, v=2)
    x = TorusPoint((0.1, 0.2))
    with pytest.raises(ValueError):
        birkhoff_avg(cfg, FrequencyVector((0, 0, 1)), x, 100)
    with pytest.raises(ValueError):
        birkhoff_avg(cfg, FrequencyVector((1, 0)), x, 0)
    with pytest.raises(ResourceBudgetError):
        birkhoff_avg(cfg, FrequencyVector((1, 0)), x, DIRECT_STEP_LIMIT + 1)


# ---------------------------------------------------------------------------
# conjugacy


def test_conjugacy_straightens_slow_modes(poly_angle):
    from mobiusflow.harmonic import smooth_h_sample
    from mobiusflow.spectrum import classify_tau

    cfg = FlowConfig(alpha=poly_angle, h=smooth_h_sample(4.0, 60, 9), v=4)
    pair = build_conjugacy(cfg, 4)
    for m in pair.top.h.support():
        if m:
            assert classify_tau(m, poly_angle).theorem2_class == "M1"
    x = TorusPoint((0.3, 0.71, 0.05, 0.42))
    cert = check_conjugacy(pair, x, [1, 5, 50, 200])
    assert cert.passed
    assert cert.worst_defect == max(cert.defects)
    for d, bud in zip(cert.defects, cert.budgets):
        assert d <= bud
    doc = cert.to_json()
    assert doc["pass"] is True and len(doc["defects"]) == 4


def test_conjugacy_psi_roundtrip(poly_angle):
    from mobiusflow.harmonic import smooth_h_sample

    cfg = FlowConfig(alpha=poly_angle, h=smooth_h_sample(4.0, 60, 9), v=3)
    pair = build_conjugacy(cfg, 4)
    x = TorusPoint((0.3, 0.71, 0.05))
    back = psi_inv(pair, psi_map(pair, x))
    assert back.coords[0] == x.coords[0]
    for a, b in zip(back.coords[1:], x.coords[1:]):
        assert _circle(a, b) < 1e-12


def test_conjugacy_pure_fast_part_needs_no_psi(poly_angle):
    # a ladder series on a fully sharp angle lands in M1 entirely
    h = furstenberg_h(poly_angle, [0.5, 0.25])
    cfg = FlowConfig(alpha=poly_angle, h=h, v=3)
    pair = build_conjugacy(cfg, 4)
    assert len(pair.psi.series) == 0
    assert pair.psi.identity_error_bound == 0.0
    x = TorusPoint((0.2, 0.4, 0.8))
    cert = check_conjugacy(pair, x, [1, 10, 100])
    assert cert.passed
    assert cert.defects == (0.0, 0.0, 0.0)  # top equals base bit for bit


def test_conjugacy_needs_positive_steps(poly_angle):
    from mobiusflow.harmonic import smooth_h_sample

    cfg = FlowConfig(alpha=poly_angle, h=smooth_h_sample(4.0, 20, 9), v=3)
    pair = build_conjugacy(cfg, 4)
    with pytest.raises(ValueError):
        check_conjugacy(pair, TorusPoint((0.1, 0.2, 0.3)), [0, 5])
