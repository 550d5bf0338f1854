import csv
import io
import json

import numpy as np
import pytest

from sunsebdf.cli import (
    ExperimentReport,
    ReportRow,
    check_graded,
    check_random,
    default_random_seeds,
    figure_doc,
    main,
    screen_seeds,
    table_graded,
    table_random,
)
from sunsebdf.numerics.exceptions import InvalidArgument
from sunsebdf.numerics.kernels import uniform_bdf3_doc


def _rows(path):
    lines = [line for line in path.read_text().splitlines() if not line.startswith("#")]
    return list(csv.DictReader(lines))


def test_verify_roots(tmp_path, roots):
    out = tmp_path / "roots.csv"
    assert main(["verify", "roots", "--check", "--out", str(out)]) == 0
    rows = _rows(out)
    values = {row["name"]: row["value"] for row in rows}
    assert float(values["R3"]) == pytest.approx(roots.r3, rel=1e-14)
    assert values["tangential_point"].startswith("0.49")


def test_mesh_dump(tmp_path):
    out = tmp_path / "mesh.csv"
    assert main(["mesh", "--family", "uniform", "--N", "4", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[:3] == ["# family=uniform", "# N=4", "# T=1.0"]
    assert lines[3] == "k,t_k,tau_k,r_k"
    assert len(_rows(out)) == 5


def test_uniform_table_orders():
    report = table_graded("bdf2", [1.0], [20, 40, 80])
    assert [row.N for row in report.rows] == [20, 40, 80]
    assert report.rows[0].order is None
    for row in report.rows[1:]:
        assert row.order == pytest.approx(2.0, abs=0.1)
    assert all(row.violations is None for row in report.rows)
    buf = io.StringIO()
    report.to_csv(buf)
    body = [line for line in buf.getvalue().splitlines() if not line.startswith("#")]
    assert body[0] == "N,tau,e_N,order,r_max,tau_over_tau1,N1,gamma,seed,status"
    assert body[1].split(",")[3] == ""


def test_random_table_is_reproducible(tmp_path):
    argv = ["table-random", "--method", "bdf3", "--seed", "3", "--levels", "20,40"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(argv + ["--out", str(a)]) == 0
    assert main(argv + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert "# prng=numpy.random.PCG64" in a.read_text()
    rows = _rows(a)
    assert [row["seed"] for row in rows] == ["3", "3"]
    assert rows[0]["N1"] != ""


def test_graded_table_check_passes(tmp_path):
    out = tmp_path / "graded.csv"
    argv = ["table-graded", "--gamma", "2", "--levels", "40,80", "--check", "--out", str(out)]
    assert main(argv) == 0
    rows = _rows(out)
    assert float(rows[1]["order"]) == pytest.approx(1.97, abs=0.03)
    assert float(rows[0]["tau_over_tau1"]) == pytest.approx(79.0)


def test_check_detects_wrong_errors():
    report = table_graded("bdf2", [2.0], [40, 80])
    assert check_graded(report) == []
    report.rows[0].error *= 2
    failures = check_graded(report)
    assert len(failures) == 1
    assert "N=40" in failures[0]


def test_random_check_flags_orders():
    report = ExperimentReport("table-random", {"method": "bdf2"})
    report.add(ReportRow(N=40, error=1e-3, seed=0))
    report.add(ReportRow(N=80, error=5e-4, order=1.0, seed=0))
    report.add(ReportRow(N=160, status="failed at step 3: diverged", seed=0))
    failures = check_random(report)
    assert len(failures) == 2
    assert "order 1.000" in failures[0]


def test_json_envelope(tmp_path):
    out = tmp_path / "table.json"
    argv = ["table-random", "--seed", "1", "--levels", "20,40", "--json", "--out", str(out)]
    assert main(argv) == 0
    doc = json.loads(out.read_text())
    assert doc["command"] == "table-random"
    assert doc["config"]["seed"] == [1]
    assert doc["check"] == {"requested": False, "failures": []}
    assert doc["rows"][0]["order"] is None
    assert "timestamp" in doc


def test_mesh_json(tmp_path):
    out = tmp_path / "mesh.json"
    assert main(["mesh", "--family", "random", "--N", "10", "--json", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["config"]["prng"] == "numpy.random.PCG64"
    assert len(doc["rows"]) == 11


def test_uniform_figure_matches_closed_form():
    fig = figure_doc("uniform", n=40)
    expected = uniform_bdf3_doc(40)[40, 40 - np.arange(38)]
    np.testing.assert_allclose(fig.theta, expected, atol=1e-12)
    assert fig.violation_fraction == 0.0
    assert fig.certified


def test_scaled_figure_violation_fraction(roots):
    fractions = [figure_doc("scaled-random", n=200, scale=3.0, seed=s).violation_fraction for s in range(50)]
    assert np.mean(fractions) == pytest.approx(1 - roots.r3 / 3, abs=0.05)


def test_figure_rejects_bad_input():
    with pytest.raises(InvalidArgument):
        figure_doc("uniform", n=2)
    with pytest.raises(InvalidArgument):
        figure_doc("zigzag")


def test_figure_command(tmp_path):
    out = tmp_path / "fig.csv"
    assert main(["figure-doc", "--n", "30", "--out", str(out)]) == 0
    rows = _rows(out)
    assert len(rows) == 3 * 28
    assert {row["pattern"] for row in rows} == {"a", "b", "c"}
    assert "# a=uniform" in out.read_text()


def test_capped_random_certificate(tmp_path):
    out = tmp_path / "cert.csv"
    argv = ["verify", "certificate", "--family", "random", "--cap", "2.54", "--N", "200", "--check"]
    assert main(argv + ["--out", str(out)]) == 0
    assert "verdict=pass" in out.read_text().splitlines()[-1]


def test_failed_certificate_exit_code(tmp_path):
    out = tmp_path / "cert.csv"
    argv = ["verify", "certificate", "--family", "ratio-pattern", "--scale", "10", "--N", "60"]
    assert main(argv + ["--check", "--out", str(out)]) == 2
    assert main(argv + ["--out", str(out)]) == 0


def test_bad_levels_exit_code():
    assert main(["table-graded", "--levels", "40,70"]) == 1


def test_integrate_command(tmp_path):
    out = tmp_path / "traj.csv"
    argv = ["integrate", "--family", "uniform", "--N", "10", "--method", "bdf3", "--out", str(out)]
    assert main(argv) == 0
    rows = _rows(out)
    assert len(rows) == 11
    assert float(rows[-1]["v_1"]) == pytest.approx(np.exp(-1.0), rel=2e-2)


def test_perturb_command(tmp_path):
    out = tmp_path / "perturb.csv"
    argv = ["perturb", "--family", "graded", "--N", "80", "--epsilon", "1e-5", "--check"]
    assert main(argv + ["--out", str(out)]) == 0
    rows = _rows(out)
    assert rows[0]["bound"] == ""
    assert float(rows[-1]["vtilde_abs"]) <= float(rows[-1]["bound"])


def test_verify_lemmas_command(tmp_path):
    out = tmp_path / "lemmas.csv"
    assert main(["verify", "lemmas", "--grid", "0.05", "--check", "--out", str(out)]) == 0
    rows = _rows(out)
    assert len(rows) == 5
    assert all(float(row["worst_margin"]) > 0 for row in rows)


@pytest.mark.slow
@pytest.mark.parametrize("method", ["bdf2", "bdf3"])
def test_graded_tables_match_published(method):
    report = table_graded(method, [2.0, 3.0, 4.0])
    assert check_graded(report) == []
    target = {"bdf2": 2.0, "bdf3": 3.0}[method]
    for rows in report.cases().values():
        assert rows[-1].order == pytest.approx(target, abs=0.05)


@pytest.mark.slow
def test_default_seeds_meet_order_ranges():
    seeds = default_random_seeds()
    assert len(seeds) == 5
    assert seeds[:3] == (0, 2, 3)
    for method in ("bdf2", "bdf3"):
        assert check_random(table_random(method, seeds)) == []


@pytest.mark.slow
def test_screening_skips_seeds_off_the_bdf3_range():
    assert screen_seeds(3, range(5)) == (0, 2, 3)
    assert screen_seeds(5, range(5), methods=("bdf2",)) == (0, 1, 2, 3, 4)


def test_screening_needs_enough_candidates():
    with pytest.raises(InvalidArgument):
        screen_seeds(1, [])


def test_doc_dump(tmp_path):
    out = tmp_path / "doc.csv"
    assert main(["figure-doc", "--pattern", "uniform", "--n", "10", "--dump", "doc", "--out", str(out)]) == 0
    text = out.read_text()
    assert "# dump=a doc" in text
    rows = _rows(out)
    assert list(rows[0]) == ["n", "j", "theta", "theta_hat"]
    assert len(rows) == sum(n - 2 for n in range(3, 11))
    theta = uniform_bdf3_doc(10)
    for row in rows:
        n, j = int(row["n"]), int(row["j"])
        assert float(row["theta"]) == pytest.approx(theta[n, j], abs=1e-12)
        assert row["theta_hat"] != ""


def test_doc_dump_needs_one_pattern(tmp_path):
    assert main(["figure-doc", "--dump", "doc", "--out", str(tmp_path / "doc.csv")]) == 1


@pytest.mark.parametrize(
    "argv", [["table-graded", "--gamma", "x"], ["no-such-command"], ["figure-doc", "--dump", "both"]]
)
def test_usage_errors_are_not_check_failures(argv):
    assert main(argv) == 1
