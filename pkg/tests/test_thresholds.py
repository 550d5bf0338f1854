import numpy as np
import pytest

from sunsebdf.numerics.constants import R3_HAT_POLY, R3_POLY, R30_POLY
from sunsebdf.numerics.exceptions import BracketFailure
from sunsebdf.stability import format_complex, positive_roots, threshold_roots
from sunsebdf.stability.thresholds import _single_root


def test_root_values(roots):
    assert roots.r3 == pytest.approx(2.553, abs=1e-3)
    assert roots.r3_hat == pytest.approx(3.4405, abs=1e-4)
    assert roots.r30 == pytest.approx(1.839, abs=1e-3)
    assert roots.r3_tilde[0] == pytest.approx(2.5808, abs=1e-4)
    assert roots.r3_tilde[1] == pytest.approx(0.1304, abs=1e-4)
    assert roots.r30 < roots.r3 < roots.r3_hat


def test_residuals(roots):
    assert set(roots.residuals) == {"R3", "R3_hat", "R30", "R3_tilde_1", "R3_tilde_2"}
    assert max(roots.residuals.values()) < 1e-9
    assert abs(np.polyval(R3_POLY, roots.r3)) < 1e-9
    assert abs(np.polyval(R3_HAT_POLY, roots.r3_hat)) < 1e-9
    assert abs(np.polyval(R30_POLY, roots.r30)) < 1e-9


def test_tangential_point(roots):
    assert abs(roots.tangential_point - complex(0.4979, 0.5454)) < 1e-3


def test_contact_point_lies_on_unit_disk(roots):
    z = roots.contact_point
    assert abs(z - 0.5j) == pytest.approx(0.5, abs=1e-14)
    assert abs(z - roots.tangential_point) < 5e-3


def test_roots_are_cached():
    assert threshold_roots() is threshold_roots()


def test_positive_roots_of_a_quadratic():
    assert positive_roots((1, -3, 2)) == pytest.approx([1.0, 2.0], abs=1e-10)
    assert positive_roots((1, 0, 1)) == []


def test_single_root_needs_exactly_one():
    with pytest.raises(BracketFailure):
        _single_root("quadratic", (1, -3, 2))


@pytest.mark.parametrize(
    "z,text",
    [
        (complex(0.49791, 0.54538), "0.4979+0.5454i"),
        (complex(1.0, -0.25), "1.0000-0.2500i"),
        (complex(-0.5, 0.0), "-0.5000+0.0000i"),
    ],
)
def test_format_complex(z, text):
    assert format_complex(z) == text
