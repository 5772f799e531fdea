"""Correlation sums: reductions, kernel vs brute force, rational closed form.

The generic path is checked against three independent computations: the
sieve alone (b = 0), the twisted rotation sum (h = 0), and literal orbit
stepping with per-point pairing.  The stepped oracle itself drifts by about
an ulp per step, so those comparisons get the looser 5e-9 line while the
algebraically equivalent routes must agree to 1e-10 or exactly.
"""

import math
import warnings

import pytest

from mobiusflow.contfrac import (
    PrecisionFloorError,
    explicit_angle,
    rational_angle,
)
from mobiusflow.experiments import (
    CSV_HEADER,
    THETA_FLOOR,
    correlation_sum,
    irregularity_demo,
    rational_case,
    records_digest,
    records_to_csv,
    sweep,
)
from mobiusflow.flow import FlowConfig, FrequencyVector, TorusPoint, pairing, step
from mobiusflow.harmonic import FourierSeries, analytic_h_sample, furstenberg_h
from mobiusflow.moebius import sieve_full, sieve_segment, twisted_sum
from mobiusflow.phases import cis


@pytest.fixture(scope="module")
def exp_cfg(exp_angle):
    return FlowConfig(alpha=exp_angle, h=analytic_h_sample(1.0, 6, 11), v=4)


X4 = TorusPoint((0.3, 0.71, 0.05, 0.42))
B_MIXED = FrequencyVector((1, 2, 0, -1))


def _stepped_oracle(cfg, b, x, n_top, length):
    table = sieve_segment(n_top, n_top)
    acc = 0j
    xn = x
    for n in range(1, n_top + 1):
        xn = step(cfg, xn)
        if n > n_top - length:
            mu = table.mu(n)
            if mu:
                acc += mu * cis(pairing(b, xn))
    return acc


# ---------------------------------------------------------------------------
# exact reductions


def test_zero_vector_is_mertens(exp_cfg):
    rec = correlation_sum(exp_cfg, FrequencyVector((0, 0, 0, 0)), X4, 1000, 500)
    full = sieve_full(1000)
    want = sum(full.mu(n) for n in range(501, 1001))
    assert rec.value == complex(want, 0.0)
    assert rec.value.imag == 0.0
    assert rec.theta == pytest.approx(math.log(500) / math.log(1000))


def test_empty_series_is_twisted_rotation(exp_cfg, exp_angle):
    cfg = FlowConfig(alpha=exp_angle, h=FourierSeries({}), v=4)
    rec = correlation_sum(cfg, FrequencyVector.unit(1, 4), X4, 2000, 900)
    tw = twisted_sum(2000, 900, 1, 0, exp_angle, mult=1)
    assert rec.value == cis(0.3 % 1.0) * tw.value
    # a tail entry and a negative base multiplier keep the identity
    bmix = FrequencyVector((-2, 0, 3, 0))
    rec = correlation_sum(cfg, bmix, X4, 2000, 900)
    tw = twisted_sum(2000, 900, 1, 0, exp_angle, mult=-2)
    assert rec.value == cis((-2 * 0.3 + 3 * 0.05) % 1.0) * tw.value


# ---------------------------------------------------------------------------
# kernel path against literal stepping


def test_kernel_matches_stepped_orbit(exp_cfg):
    rec = correlation_sum(exp_cfg, B_MIXED, X4, 400, 400)
    want = _stepped_oracle(exp_cfg, B_MIXED, X4, 400, 400)
    assert abs(rec.value - want) < 1e-10


def test_kernel_matches_stepping_on_short_suffix(exp_cfg):
    rec = correlation_sum(exp_cfg, B_MIXED, X4, 600, 150)
    want = _stepped_oracle(exp_cfg, B_MIXED, X4, 600, 150)
    assert abs(rec.value - want) < 1e-10


def test_kernel_poly_ladder_series(poly_angle):
    h = furstenberg_h(poly_angle, [0.5, 0.25, 0.125], k_cut=3)
    cfg = FlowConfig(alpha=poly_angle, h=h, v=3)
    x = TorusPoint((0.3, 0.9, 0.2))
    b = FrequencyVector((0, 1, 1))
    rec = correlation_sum(cfg, b, x, 300, 300)
    want = _stepped_oracle(cfg, b, x, 300, 300)
    assert abs(rec.value - want) < 1e-10


def test_kernel_determinism(exp_cfg):
    a = correlation_sum(exp_cfg, B_MIXED, X4, 5000, 1200)
    b = correlation_sum(exp_cfg, B_MIXED, X4, 5000, 1200)
    assert a.value == b.value


def test_correlation_guards(exp_cfg, exp_angle):
    with pytest.raises(ValueError):
        correlation_sum(exp_cfg, B_MIXED, X4, 100, 101)
    with pytest.raises(ValueError):
        correlation_sum(exp_cfg, FrequencyVector((1, 0, 0, 0, 1)), X4, 100, 100)
    # a 3-digit snapshot cannot carry residue streams a million steps
    shallow = explicit_angle([2, 9, 2, 1, 3])
    cfg = FlowConfig(alpha=shallow, h=FourierSeries({1: 0.1, -1: 0.1}), v=2)
    with pytest.raises(PrecisionFloorError):
        correlation_sum(cfg, FrequencyVector((1, 0)), TorusPoint((0.1, 0.2)), 10**6, 10)


# ---------------------------------------------------------------------------
# rational closed form


def test_rational_matches_generic_at_scale(exp_cfg):
    cfg = FlowConfig(alpha=rational_angle(1, 2), h=exp_cfg.h, v=4)
    rec_g = correlation_sum(cfg, B_MIXED, X4, 100000, 1000)
    rec_r = rational_case(cfg, B_MIXED, X4, 100000, 1000)
    assert abs(rec_g.value - rec_r.value) < 1e-9
    assert rec_g.theta == rec_r.theta


def test_rational_matches_stepping(exp_cfg):
    cfg = FlowConfig(alpha=rational_angle(1, 2), h=exp_cfg.h, v=4)
    rec = rational_case(cfg, B_MIXED, X4, 500, 500)
    want = _stepped_oracle(cfg, B_MIXED, X4, 500, 500)
    assert abs(rec.value - want) < 5e-9


def test_alpha_zero_degenerates(exp_cfg):
    cfg = FlowConfig(alpha=rational_angle(0, 1), h=exp_cfg.h, v=4)
    rec_g = correlation_sum(cfg, B_MIXED, X4, 2000, 2000)
    rec_r = rational_case(cfg, B_MIXED, X4, 2000, 2000)
    assert abs(rec_g.value - rec_r.value) < 1e-9
    want = _stepped_oracle(cfg, B_MIXED, X4, 2000, 2000)
    assert abs(rec_g.value - want) < 5e-9


def test_rational_needs_exact_angle(exp_cfg):
    with pytest.raises(ValueError):
        rational_case(exp_cfg, B_MIXED, X4, 1000, 1000)


# ---------------------------------------------------------------------------
# sweeps and records


def test_sweep_shapes_and_window(exp_cfg):
    recs = sweep(exp_cfg, B_MIXED, X4, 0.7, [10**3, 10**4, 10**5])
    assert [r.n_top for r in recs] == [10**3, 10**4, 10**5]
    for r in recs:
        assert r.length == min(r.n_top, math.ceil(r.n_top**0.7))
        assert r.theta == 0.7
        assert abs(r.value) <= r.length + 1e-9
        assert 0.0 <= r.normalized <= 1.0
        assert r.in_window
    full = sweep(exp_cfg, B_MIXED, X4, 1.0, [100])[0]
    assert full.length == 100 and full.in_window


def test_sweep_guards(exp_cfg):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        sweep(exp_cfg, B_MIXED, X4, THETA_FLOOR, [100])
    assert any(issubclass(w.category, RuntimeWarning) for w in caught)
    with pytest.raises(ValueError):
        sweep(exp_cfg, B_MIXED, X4, 0.7, [100, 100])
    with pytest.raises(ValueError):
        sweep(exp_cfg, B_MIXED, X4, 0.7, [200, 100])


def test_csv_and_digest_reproducibility(exp_cfg):
    recs = sweep(exp_cfg, B_MIXED, X4, 0.7, [10**3, 10**4])
    csv = records_to_csv(recs)
    lines = csv.strip().split("\n")
    assert lines[0] == CSV_HEADER
    assert len(lines) == 3
    assert lines[1].startswith("1000,")
    cells = lines[1].split(",")
    assert cells[3] == B_MIXED.label() == "1;2;0;-1"
    again = sweep(exp_cfg, B_MIXED, X4, 0.7, [10**3, 10**4])
    assert [r.value for r in again] == [r.value for r in recs]
    assert records_digest(again) == records_digest(recs)
    # the digest pins everything except the wall-clock column
    assert len(records_digest(recs)) == 16


# ---------------------------------------------------------------------------
# irregularity demonstration


def test_irregularity_table(exp_cfg):
    table = irregularity_demo(exp_cfg, X4, k_range=(1, 2, 3), dyadic=(128, 256))
    assert len(table.rows) == 5
    assert [r[0] for r in table.rows][:3] == ["q_1", "q_2", "q_3"]
    assert all(abs(r[2]) <= 1.0 + 1e-12 for r in table.rows)
    assert table.spread >= 0.0
    doc = table.to_json()
    assert len(doc["rows"]) == 5
    assert doc["spread"] == table.spread


def test_irregularity_guards(exp_cfg, poly_angle):
    cfg_p = FlowConfig(alpha=poly_angle, h=analytic_h_sample(1.0, 4, 2), v=3)
    with pytest.raises(ValueError):
        irregularity_demo(cfg_p, TorusPoint((0.3, 0.9, 0.2)))
    with pytest.raises(ValueError):
        irregularity_demo(exp_cfg, X4, k_range=(4,))  # q_4 is astronomically big
