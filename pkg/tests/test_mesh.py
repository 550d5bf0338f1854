import io

import numpy as np
import pytest

from sunsebdf.numerics.constants import PRNG_NAME
from sunsebdf.numerics.exceptions import CapUnsatisfiable, InvalidArgument
from sunsebdf.numerics.mesh import (
    TimeMesh,
    build_graded,
    build_random,
    build_ratio_pattern,
    build_uniform,
    stats,
    to_csv,
)


def test_uniform_steps_and_ratios():
    mesh = build_uniform(4, 1.0)
    assert mesh.N == 4
    np.testing.assert_allclose(mesh.steps[1:], 0.25)
    np.testing.assert_array_equal(mesh.ratios[1:], [0.0, 1.0, 1.0, 1.0])
    assert mesh.nodes[-1] == 1.0


def test_uniform_single_step():
    mesh = build_uniform(1, 1.0)
    assert mesh.steps[1] == 1.0
    assert mesh.ratios[1] == 0.0


def test_uniform_thirty_steps_has_unit_ratios():
    mesh = build_uniform(30, 1.0)
    np.testing.assert_array_equal(mesh.ratios[2:], np.ones(29))


@pytest.mark.parametrize("N,T", [(0, 1.0), (4, 0.0), (4, -1.0)])
def test_uniform_rejects_bad_arguments(N, T):
    with pytest.raises(InvalidArgument):
        build_uniform(N, T)


def test_graded_first_step_ratio():
    s = stats(build_graded(40, 1.0, 2.0), threshold=2.553)
    assert s.first_step_ratio == pytest.approx(79.0, rel=1e-12)


@pytest.mark.parametrize("gamma,rmax", [(2.0, 3.0), (3.0, 7.0), (4.0, 15.0)])
def test_graded_max_ratio_is_r2(gamma, rmax):
    mesh = build_graded(80, 1.0, gamma)
    assert mesh.ratios[2] == rmax
    assert mesh.max_ratio == rmax
    assert np.all(np.diff(mesh.ratios[2:]) <= 0)
    assert mesh.ratios[-1] > 1.0


def test_graded_gamma_one_is_uniform():
    mesh = build_graded(2, 1.0, 1.0)
    np.testing.assert_allclose(mesh.nodes, [0.0, 0.5, 1.0])
    assert mesh.ratios[2] == 1.0


def test_graded_rejects_decreasing_grading():
    with pytest.raises(InvalidArgument):
        build_graded(10, 1.0, 0.5)


def test_random_is_reproducible():
    a = build_random(50, 1.0, seed=12345)
    b = build_random(50, 1.0, seed=12345)
    c = build_random(50, 1.0, seed=12346)
    np.testing.assert_array_equal(a.steps, b.steps)
    assert not np.array_equal(a.steps, c.steps)
    assert a.provenance["prng"] == PRNG_NAME
    assert a.provenance["seed"] == 12345
    assert a.steps[1:].sum() == pytest.approx(1.0, abs=1e-14)


def test_random_cap_redraws_whole_mesh():
    mesh = build_random(6, 1.0, seed=3, ratio_cap=2.0)
    assert np.all(mesh.ratios[2:] < 2.0)
    assert mesh.provenance["draws"] >= 1


def test_random_cap_unsatisfiable():
    with pytest.raises(CapUnsatisfiable) as info:
        build_random(50, 1.0, seed=0, ratio_cap=0.5, max_retries=20)
    assert info.value.retries == 20


def test_ratio_pattern_stays_below_scale():
    mesh = build_ratio_pattern(100, 1.0, scale=2.54, seed=9)
    assert np.all(mesh.ratios[2:] < 2.54)
    assert np.all(mesh.ratios[2:] > 0)
    assert mesh.horizon == pytest.approx(1.0, abs=1e-14)
    assert mesh.family == "ratio-pattern"


def test_from_steps_and_violation_count():
    mesh = TimeMesh.from_steps([1.0, 3.0, 1.0, 4.0])
    np.testing.assert_allclose(mesh.ratios[2:], [3.0, 1 / 3, 4.0])
    s = stats(mesh, threshold=3.0)
    assert s.violation_count == 2
    assert s.max_ratio == 4.0
    assert s.violation_count <= mesh.N - 1


def test_from_steps_rejects_zero_step():
    with pytest.raises(InvalidArgument):
        TimeMesh.from_steps([0.5, 0.0, 0.5])


def test_inconsistent_ratios_rejected():
    nodes = np.array([0.0, 0.5, 1.0])
    steps = np.array([0.0, 0.5, 0.5])
    with pytest.raises(InvalidArgument):
        TimeMesh(nodes, steps, np.array([0.0, 0.0, 2.0]))


def test_mesh_arrays_are_read_only():
    mesh = build_uniform(4, 1.0)
    with pytest.raises(ValueError):
        mesh.steps[1] = 3.0


def test_to_csv():
    buf = io.StringIO()
    to_csv(build_uniform(4, 1.0), buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "k,t_k,tau_k,r_k"
    assert len(lines) == 6
    assert lines[1] == "0,0,,"
    assert lines[3].startswith("2,0.5,0.25,1")
