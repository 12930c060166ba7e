"""Equilibria of the autonomous field and the node data of the saddles."""

import math

import numpy as np
import pytest

from forced_heteroclinic.system.equilibria import classify_eigenvalues, find_equilibria, node_data, saddle_points
from forced_heteroclinic.system.params import SystemParams


def test_unforced_equilibria(unforced):
    """ν = 0: origin, the saddles (0, 0, ±1) and four foci on the equator."""
    equilibria = find_equilibria(unforced)
    labels = [eq.label for eq in equilibria]
    assert labels.count("focus") == 4, labels
    assert {"O", "v", "w"} <= set(labels)
    by_label = {eq.label: eq for eq in equilibria if eq.label != "focus"}
    np.testing.assert_allclose(by_label["v"].point, [0.0, 0.0, 1.0], atol=1e-12)
    np.testing.assert_allclose(by_label["w"].point, [0.0, 0.0, -1.0], atol=1e-12)
    np.testing.assert_allclose(by_label["O"].point, [0.0, 0.0, 0.0], atol=1e-12)
    for eq in equilibria:
        assert eq.residual < 1e-12, f"{eq.label} residual {eq.residual}"
        if eq.label == "focus":
            assert abs(abs(eq.point[0]) - math.sqrt(0.5)) < 1e-10
            assert abs(abs(eq.point[1]) - math.sqrt(0.5)) < 1e-10


def test_node_data_matches_alpha_beta(unforced):
    """c = α − β and e = α + β at both saddles when ν = 0."""
    data = node_data(unforced)
    assert data.c_v == pytest.approx(1.1, abs=1e-10)
    assert data.e_v == pytest.approx(0.9, abs=1e-10)
    assert data.c_w == pytest.approx(1.1, abs=1e-10)
    assert data.e_w == pytest.approx(0.9, abs=1e-10)
    assert data.delta == pytest.approx((1.1 / 0.9) ** 2, rel=1e-9)


def test_saddles_persist_under_small_nu():
    p = SystemParams(nu=0.05, mu=0.0)
    v, w = saddle_points(p)
    assert v.point[1] == 0.0 and w.point[1] == 0.0
    assert v.point[2] > 0.5 > -0.5 > w.point[2]
    assert v.residual < 1e-12 and w.residual < 1e-12


def test_equilibria_require_autonomous_field(forced):
    with pytest.raises(ValueError):
        find_equilibria(forced)


@pytest.mark.parametrize(
    "values,expected",
    [
        ([-1.0, -2.0], "sink"),
        ([1.0, 2.0], "source"),
        ([-1.0, 0.5], "saddle"),
        ([complex(-1.0, 1.0), complex(-1.0, -1.0)], "focus"),
    ],
)
def test_classify_eigenvalues(values, expected):
    assert classify_eigenvalues(values) == expected
