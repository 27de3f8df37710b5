import io
import math

import numpy as np
import pytest

from bounds import (
    BOUNDS_COLUMNS,
    balanced_radius,
    bounds_frame,
    caratheodory_product,
    curve_table,
    gamma_lower,
    gamma_lower_product_form,
    j_closed,
    j_quadrature,
    lower_simple,
    shields,
    thm1_upper,
    thm1_upper_general,
    write_csv,
)
from errors import DomainError


def test_closed_form_examples():
    assert shields(0.5, 2.0) == pytest.approx(3.290994, abs=1e-6)
    assert thm1_upper(2.0) == pytest.approx(3.133893, abs=1e-6)
    assert lower_simple(2.0) == pytest.approx(1.6, abs=1e-15)
    assert j_closed(2.0) == pytest.approx(math.sqrt(9.0 / 7.0), rel=1e-15)


def test_gamma_examples():
    assert gamma_lower(2.0) == pytest.approx(1.694137, abs=1e-6)
    assert caratheodory_product(2.0) == pytest.approx(1.129425, abs=1e-6)
    assert gamma_lower(1.001) == pytest.approx(math.pi / 2, abs=1e-2)


@pytest.mark.parametrize("R", [1.05, 1.5, 2.0, 3.0, 10.0])
def test_gamma_stable_form_matches_product(R):
    assert gamma_lower(R) == pytest.approx(gamma_lower_product_form(R), rel=1e-10)


@pytest.mark.parametrize("R", [1.1, 2.0, 10.0])
@pytest.mark.parametrize("phi", [0.0, 1.0, 2.5])
def test_j_quadrature_matches_closed_form(R, phi):
    assert j_quadrature(R, phi) == pytest.approx(j_closed(R), rel=1e-10)


def test_upper_bound_picks_the_smaller_term():
    # J wins up to R ≈ 3.15, Shields' bound beyond
    for R in np.geomspace(1.01, 3.0, 25):
        assert thm1_upper(R) == pytest.approx(2.0 + j_closed(R), rel=1e-14)
        assert thm1_upper(R) < shields(1.0 / R, R)
    for R in np.geomspace(4.0, 100.0, 25):
        assert thm1_upper(R) == pytest.approx(shields(1.0 / R, R), rel=1e-14)
    assert thm1_upper(1.0 + 1e-9) <= 2.0 + 2.0 / math.sqrt(3.0) + 1e-12


def test_envelope_ordering():
    for R in np.geomspace(1.001, 1000.0, 40):
        simple, gamma = lower_simple(R), gamma_lower(R)
        assert simple < gamma < 2.0
        assert gamma <= thm1_upper(R)
        assert 3.0 <= thm1_upper(R) <= 2.0 + 2.0 / math.sqrt(3.0) + 1e-12


def test_monotonicity():
    grid = np.geomspace(1.2, 50.0, 30)
    gammas = [gamma_lower(R) for R in grid]
    uppers = [thm1_upper(R) for R in grid]
    assert all(b >= a - 1e-12 for a, b in zip(gammas, gammas[1:]))
    assert all(b <= a for a, b in zip(uppers, uppers[1:]))
    assert thm1_upper(1e6) == pytest.approx(3.0, abs=1e-5)


def test_general_annulus_scaling():
    assert balanced_radius(0.25, 4.0) == pytest.approx(4.0)
    assert thm1_upper_general(0.25, 4.0) == pytest.approx(thm1_upper(4.0))
    assert thm1_upper_general(1.0, 4.0) == pytest.approx(thm1_upper(2.0))


@pytest.mark.parametrize("R", [1.0, 0.5, -2.0, float("nan"), float("inf")])
def test_domain_errors(R):
    for fn in (j_closed, thm1_upper, lower_simple, gamma_lower):
        with pytest.raises(DomainError):
            fn(R)


def test_shields_domain():
    with pytest.raises(DomainError):
        shields(2.0, 2.0)
    with pytest.raises(DomainError):
        shields(0.0, 1.0)


def test_curve_table_rows():
    rows = curve_table([2.0, 1.5, 10.0])
    assert [row.R for row in rows] == [2.0, 1.5, 10.0]
    first = rows[0]
    assert first.lower_simple == pytest.approx(1.6)
    assert first.gamma == pytest.approx(1.694137, abs=1e-6)
    assert first.upper_new == pytest.approx(3.133893, abs=1e-6)
    assert first.upper_shields == pytest.approx(2.0 + math.sqrt(5.0 / 3.0))
    assert first.upper_min == min(first.upper_new, first.upper_shields)


def test_curve_table_reports_bad_index():
    with pytest.raises(DomainError) as info:
        curve_table([2.0, 3.0, 0.5])
    assert info.value.index == 2


def test_csv_output():
    buffer = io.StringIO()
    write_csv(curve_table([2.0, 3.0]), buffer)
    lines = buffer.getvalue().splitlines()
    assert lines[0] == ",".join(BOUNDS_COLUMNS)
    assert lines[0] == "R,lower_simple,gamma,upper_new,upper_shields,upper_min"
    assert len(lines) == 3
    assert lines[1].startswith("2,1.6,1.69413")
    assert list(bounds_frame(curve_table([2.0])).columns) == BOUNDS_COLUMNS
