import math

import numpy as np
import pytest

from frontspeed import fields as F
from frontspeed import reactions as R
from frontspeed.dispersion import (Dispersion, DispersionCurve, convexity_check,
                                   golden_section, lambda_for_speed, minimal_speed,
                                   regularized_minimal_speed, sample_curve)
from frontspeed.errors import OrderingError, StructureError
from oracles import dense_mu

G16 = F.CellGrid(2, 16, 128)
G1 = F.CellGrid(1, 8, 16)
CELL = F.cellular(1.0)
K = (1.0, 0.0)


@pytest.fixture(scope="module")
def cellular_speed():
    disp = Dispersion(CELL, 1.0, K, G16, tol=1e-11)
    return disp, minimal_speed(CELL, 1.0, K, G16, tol_c=1e-7, dispersion=disp)


def test_sample_curve_zero_field():
    curve = sample_curve(F.zero(), 1.0, K, [0.0, 0.5, 1.0, 2.0], G16)
    assert np.allclose(curve.mus, [1.0, 1.25, 2.0, 5.0], atol=1e-9)
    assert curve.converged.all()


def test_sample_curve_mu_at_zero_any_field():
    curve = sample_curve(F.shear(1.0), 0.7, K, [0.0, 1.0], G16)
    assert curve.mus[0] == pytest.approx(0.7, abs=1e-6)


def test_sample_curve_matches_dense_oracle():
    lams = [0.25, 1.0, 2.0, 3.0]
    curve = sample_curve(CELL, 1.0, K, lams, G16)
    for lam, mu in zip(lams, curve.mus):
        assert mu == pytest.approx(dense_mu(CELL, 1.0, K, lam, 16, 1), abs=1e-5)


def test_sample_curve_threads_give_identical_values():
    lams = np.linspace(0.5, 2.0, 4)
    serial = sample_curve(CELL, 1.0, K, lams, G16)
    threaded = sample_curve(CELL, 1.0, K, lams, G16, threads=2)
    assert np.array_equal(serial.mus, threaded.mus)


def test_sample_curve_flags_unconverged_points():
    curve = sample_curve(CELL, 1.0, K, [0.5, 1.0], G16, tol=1e-30, max_iter=3)
    assert not curve.converged.any()
    assert "false" in curve.csv_text()


def test_sample_curve_rejects_bad_lambdas():
    with pytest.raises(ValueError):
        sample_curve(F.zero(), 1.0, K, [1.0, 0.5], G16)
    with pytest.raises(ValueError):
        sample_curve(F.zero(), 1.0, K, [-0.5, 0.5], G16)


def test_curve_csv_format():
    curve = DispersionCurve(K, [0.5, 1.0], [1.25, 2.0], [True, True])
    text = curve.csv_text(comment="zero field")
    lines = text.splitlines()
    assert lines[0] == "# zero field"
    assert lines[1] == "lambda,mu,mu_over_lambda,converged"
    assert lines[2].split(",")[2].startswith("2.5")
    assert lines[3].endswith(",true")


# --- convexity --------------------------------------------------------------

def test_convexity_zero_field_parabola():
    curve = sample_curve(F.zero(), 1.0, K, np.linspace(0.25, 3, 17), G16)
    rep = convexity_check(curve)
    assert rep.passed and rep.worst <= 1e-9 and rep.checked == 15


def test_convexity_cellular():
    curve = sample_curve(CELL, 1.0, K, np.linspace(0.25, 3, 17), G16)
    assert convexity_check(curve, 1e-6).passed


def test_convexity_adversarial_bump():
    lams = np.linspace(0.5, 2.5, 9)
    mus = lams ** 2 + 1
    mus[4] += 0.1  # lambda = 1.5
    rep = convexity_check(DispersionCurve(K, lams, mus, [True] * 9))
    assert not rep.passed
    assert rep.lam_at == pytest.approx(1.5)
    assert rep.worst == pytest.approx(0.1 - 0.0625, abs=1e-12)


def test_convexity_needs_three_points():
    with pytest.raises(ValueError):
        convexity_check(DispersionCurve(K, [0.5, 1.0], [1.0, 2.0], [True, True]))


# --- minimal speed ----------------------------------------------------------

def test_golden_section_quadratic():
    x, fx, (a, b), _ = golden_section(lambda x: (x - 1.3) ** 2, 0.0, 4.0, 1e-10)
    assert x == pytest.approx(1.3, abs=1e-9) and b - a <= 1e-10


@pytest.mark.parametrize("r", [1.0, 0.25, 4.0])
def test_minimal_speed_zero_field(r):
    res = minimal_speed(F.zero(1), r, (1.0,), G1)
    assert res.c_star == pytest.approx(2 * math.sqrt(r), rel=1e-9)
    assert res.lambda_star == pytest.approx(math.sqrt(r), rel=1e-5)


def test_minimal_speed_requires_positive_rate():
    with pytest.raises(ValueError):
        minimal_speed(F.zero(1), 0.0, (1.0,), G1)


class _Linear:
    """A fake dispersion whose mu/lambda never turns upward."""
    r = 1.0

    def mu(self, lam):
        return 1.0 + 0.5 * lam


def test_bracket_failure_is_a_structure_error():
    with pytest.raises(StructureError):
        minimal_speed(None, 1.0, K, G16, dispersion=_Linear())


def test_cellular_speed_properties(cellular_speed):
    disp, res = cellular_speed
    assert res.c_star >= 2.0
    assert res.c_star == pytest.approx(disp.mu(res.lambda_star) / res.lambda_star, rel=1e-12)
    g = lambda lam: disp.mu(lam) / lam
    assert g(res.lambda_star) <= min(g(0.5 * res.lambda_star), g(2 * res.lambda_star))
    assert res.c_star >= R.heinze_lower_bound(R.kpp(1.0))


def test_cellular_speed_grid_invariance(cellular_speed):
    _, res = cellular_speed
    fine = minimal_speed(CELL, 1.0, K, F.CellGrid(2, 32, 256), tol_c=1e-7)
    assert fine.c_star == pytest.approx(res.c_star, rel=1e-4)


def test_both_directions_exceed_heinze_bound():
    field = F.shear(1.0, eps_t=0.5)
    bound = R.heinze_lower_bound(R.kpp(1.0))
    for k in ((0.0, 1.0), (0.0, -1.0)):
        assert minimal_speed(field, 1.0, k, G16, tol_c=1e-5).c_star >= bound


def test_shifted_speeds_increase_to_unshifted():
    base = minimal_speed(F.zero(1), 1.0, (1.0,), G1).c_star
    prev = -math.inf
    for delta in (0.2, 0.1, 0.05):
        c = minimal_speed(F.zero(1), 1.0, (1.0,), G1, delta=delta).c_star
        assert c == pytest.approx(2 * math.sqrt(1 - delta), rel=1e-9)
        assert prev < c <= base
        prev = c


def test_shifted_speed_cellular(cellular_speed):
    _, res = cellular_speed
    c = minimal_speed(CELL, 1.0, K, G16, tol_c=1e-7, delta=0.05).c_star
    assert c <= res.c_star


# --- regularized speed ------------------------------------------------------

def test_regularized_closed_form():
    res = regularized_minimal_speed(F.zero(1), 1.0, (1.0,), G1, eps=1.0)
    assert res.c_star == pytest.approx(2 * math.sqrt(2), abs=1e-9)
    assert res.lambda_star == pytest.approx(1 / math.sqrt(2), rel=1e-5)


def test_regularized_sequence_decreases_to_two():
    vals = [regularized_minimal_speed(F.zero(1), 1.0, (1.0,), G1, eps=e).c_star
            for e in (0.5, 0.1, 0.01, 0.0)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert vals[-1] == pytest.approx(2.0, abs=1e-9)


def test_regularized_cellular_bound(cellular_speed):
    disp, res = cellular_speed
    reg = regularized_minimal_speed(CELL, 1.0, K, G16, eps=0.1, tol_c=1e-7, dispersion=disp)
    assert res.c_star <= reg.c_star <= res.c_star + 0.1 * res.lambda_star


def test_regularized_rejects_negative_eps():
    with pytest.raises(ValueError):
        regularized_minimal_speed(F.zero(1), 1.0, (1.0,), G1, eps=-0.1)


# --- lambda_for_speed -------------------------------------------------------

def test_lambda_for_speed_zero_field():
    disp = Dispersion(F.zero(1), 1.0, (1.0,), G1)
    speed = minimal_speed(None, 1.0, (1.0,), G1, dispersion=disp)
    assert lambda_for_speed(disp, speed, 2.5) == pytest.approx(0.5, abs=1e-8)
    assert lambda_for_speed(disp, speed, 2.0) == speed.lambda_star
    with pytest.raises(OrderingError):
        lambda_for_speed(disp, speed, 1.9)


def test_lambda_for_speed_cellular(cellular_speed):
    disp, res = cellular_speed
    c = 1.1 * res.c_star
    lam_c = lambda_for_speed(disp, res, c)
    assert 0 < lam_c < res.lambda_star
    assert disp.mu(lam_c) / lam_c == pytest.approx(c, abs=1e-6)
