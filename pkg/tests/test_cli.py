import math
import subprocess
import sys

import numpy as np
import pytest
from scipy.integrate import trapezoid

from passage_lab.checks import Check
from passage_lab.cli import main
from passage_lab.linear import PassageProblem, first_passage_density


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def parse(text):
    lines = text.splitlines()
    manifest = [ln for ln in lines if ln.startswith("#")]
    body = [ln for ln in lines if not ln.startswith("#")]
    header = body[0].split(",")
    rows = np.array([[float(v) for v in ln.split(",")] for ln in body[1:]])
    return manifest, header, rows


def test_density_tau1(capsys):
    code, out, _ = run(capsys, "density", "--kind", "tau1", "--x", "0", "--a", "1", "--b", "-1", "--tmax", "5", "--points", "200")
    assert code == 0
    manifest, header, rows = parse(out)
    assert header == ["t", "density"]
    assert rows.shape == (200, 2) and np.all(np.isfinite(rows))
    p = PassageProblem(0.0, 1.0, -1.0)
    grid = np.geomspace(1e-4, 5.0, 200)
    np.testing.assert_allclose(rows[:, 0], grid, rtol=1e-11)
    np.testing.assert_allclose(rows[:, 1], [first_passage_density(p, t) for t in grid], rtol=1e-11, atol=1e-300)
    keys = [m.split(":")[0] for m in manifest]
    assert keys == ["# command", "# parameters", "# version", "# seed", "# timestamp"]


def test_density_psi_arcsine(capsys):
    code, out, _ = run(capsys, "density", "--kind", "psi", "--b", "0", "--t", "1", "--points", "99")
    assert code == 0
    _, _, rows = parse(out)
    assert rows.shape == (99, 2)
    np.testing.assert_allclose(rows[:, 1], rows[::-1, 1], rtol=1e-10)
    np.testing.assert_allclose(rows[:, 1], 1 / (math.pi * np.sqrt(rows[:, 0] * (1 - rows[:, 0]))), rtol=1e-10)


def test_density_tau2_integrates_to_one(capsys):
    code, out, _ = run(capsys, "density", "--kind", "tau2", "--x", "0", "--a", "1", "--b", "0")
    assert code == 0
    _, _, rows = parse(out)
    assert rows.shape == (1000, 2)
    assert trapezoid(rows[:, 1], rows[:, 0]) == pytest.approx(1.0, abs=1e-3)


def test_density_taun_and_t2(capsys, tmp_path):
    out_file = tmp_path / "t3.csv"
    assert main(["density", "--kind", "taun", "--n", "3", "--tmin", "0.1", "--tmax", "10", "--points", "20", "--out", str(out_file)]) == 0
    _, header, rows = parse(out_file.read_text())
    assert rows.shape == (20, 2) and np.all(rows[:, 1] > 0)
    code, out, _ = run(capsys, "density", "--kind", "t2", "--b", "-0.5", "--tmin", "0.1", "--tmax", "10", "--points", "5")
    assert code == 0 and parse(out)[2].shape == (5, 2)


def test_csv_is_reproducible_except_timestamp(capsys):
    argv = ["density", "--kind", "tau1", "--b", "-0.5", "--points", "30"]
    _, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    strip = lambda s: [ln for ln in s.splitlines() if not ln.startswith("# timestamp")]
    assert strip(first) == strip(second)


@pytest.mark.parametrize(
    "argv",
    [
        ["density", "--kind", "nope"],
        ["density", "--kind", "tau1", "--x", "1", "--a", "1"],
        ["density", "--kind", "tau1", "--tmin", "5", "--tmax", "1"],
        ["density", "--kind", "t2", "--b", "0.5"],
        ["reduce", "--process", "wf", "--z", "2", "--barrier", "0.5"],
        ["reduce", "--process", "ou", "--z", "2", "--s0", "1", "--mu", "1", "--sigma", "1"],
        ["reduce", "--process", "gbm", "--z", "1"],
        ["verify", "--paths", "0"],
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    try:
        code = main(argv)
    except SystemExit as exc:  # argparse rejects the flags itself
        code = exc.code
    assert code == 2
    assert capsys.readouterr().err


def test_non_convergence_exit_3(capsys, monkeypatch):
    from passage_lab import cli
    from passage_lab.numerics import ConvergenceError

    def boom(*_a, **_k):
        raise ConvergenceError("forced")

    monkeypatch.setattr(cli, "tau2_density", boom)
    code, _, err = run(capsys, "density", "--kind", "tau2", "--points", "3")
    assert code == 3 and "non-convergence" in err


def test_figure_1(capsys):
    code, out, _ = run(capsys, "figure", "--n", "1")
    assert code == 0
    _, header, rows = parse(out)
    assert header == ["b", "defect", "gamma"]
    assert rows.shape == (31, 3)
    assert np.all(rows[:, 1] <= rows[:, 2])
    assert rows[-1, 1] == 0.0 and rows[-1, 2] == 0.0


def test_figures_2_to_4_headers(capsys):
    expected = {
        2: ["t", "f_T2(b=0)", "f_T2(b=-0.5)", "f_T2(b=-1)"],
        3: ["t", "f_tau2(b=-2)", "f_tau2(b=-1)", "f_tau2(b=-0.5)", "f_tau2(b=0)"],
        4: ["t", "f_tau2", "f_IG"],
    }
    for n, header in expected.items():
        code, out, _ = run(capsys, "figure", "--n", str(n), "--points", "40")
        assert code == 0
        _, got, rows = parse(out)
        assert got == header and rows.shape == (40, len(header)) and np.all(np.isfinite(rows))


def test_reduce_outputs(capsys):
    code, out, _ = run(capsys, "reduce", "--process", "cir", "--z", "0.25", "--barrier", "1")
    assert code == 0 and "x' = 1\n" in out and "a' = 2\n" in out and "b' = 0\n" in out
    code, out, _ = run(capsys, "reduce", "--process", "ou", "--z", "0", "--s0", "1", "--mu", "1", "--sigma", "1.4142")
    assert code == 0 and "exp(2*t) - 1" in out
    code, out, _ = run(capsys, "reduce", "--process", "gbm", "--z", "1", "--r", "0.1", "--sigma", "0.2", "--s0", "0", "--muprime", "0.08")
    assert code == 0 and "b' = 0\n" in out


def test_reduce_emit_density(capsys):
    code, out, _ = run(
        capsys, "reduce", "--process", "ou", "--z", "0", "--s0", "1", "--mu", "1", "--sigma", "1.41421356237", "--emit-density", "--points", "50"
    )
    assert code == 0
    manifest, header, rows = parse(out)
    assert any(m.startswith("# time change") for m in manifest)
    assert rows.shape == (50, 2)


def test_verify_exit_codes(capsys, monkeypatch):
    from passage_lab import cli

    monkeypatch.setattr(cli, "run_suite", lambda *a, **k: [Check("good", True, "ok")])
    code, out, _ = run(capsys, "verify", "--suite", "analytic")
    assert code == 0 and "PASS" in out
    monkeypatch.setattr(cli, "run_suite", lambda *a, **k: [Check("good", True, "ok"), Check("bad identity", False, "no")])
    code, out, err = run(capsys, "verify", "--suite", "analytic")
    assert code == 1 and "FAIL" in out and "bad identity" in err


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "passage_lab", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and "passage-lab" in res.stdout


def test_verify_analytic_suite(capsys):
    from passage_lab.checks import ANALYTIC

    code, out, err = run(capsys, "verify", "--suite", "analytic")
    rows = [ln for ln in out.splitlines() if ln.startswith(("PASS", "FAIL"))]
    assert len(rows) == len(ANALYTIC)
    failed = [ln for ln in rows if ln.startswith("FAIL")]
    assert code == (1 if failed else 0)
    for ln in failed:
        assert ln.split("  ")[1].strip() in err
