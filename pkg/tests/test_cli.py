import json

import numpy as np
import pytest

from osync.cli import main
from osync.manifold import random_stiefel, read_tuple_csv, write_tuple_csv
from osync.model import load_problem


def run(capsys, *argv):
    code = main(list(argv))
    return code, json.loads(capsys.readouterr().out)


@pytest.fixture
def instance(tmp_path, capsys):
    code, out = run(capsys, "generate", "--n", "30", "--d", "2", "--kappa", "0.2",
                    "--seed", "4", "--out-dir", str(tmp_path))
    assert code == 0
    return tmp_path / "problem.csv"


def test_generate_writes_problem(instance):
    P = load_problem(instance)
    assert (P.n, P.d, P.seed) == (30, 2, 4)
    assert P.sigma == pytest.approx(0.2 * np.sqrt(15))


def test_solve_then_certify(instance, tmp_path, capsys):
    trace = tmp_path / "trace.csv"
    code, out = run(capsys, "solve", "--problem", str(instance), "--out-dir", str(tmp_path),
                    "--trace", str(trace), "--residual-tol", "1e-10",
                    "--fixed-point-tol", "1e-15")
    assert code == 0
    assert out["termination"] == "CertifiedStop"
    assert out["certificate"]["verdict"] == "CertifiedUniqueRankD"
    assert trace.read_text().splitlines()[0] == "iter,objective,residual"
    solution = tmp_path / "solution.csv"
    assert read_tuple_csv(solution).n == 30

    code, out = run(capsys, "certify", "--problem", str(instance), "--candidate", str(solution))
    assert code == 0
    assert "quadratic" in out["bound_cvx"]["rhs_terms"]
    assert "gamma" in out["bound_bm"]

    code, out = run(capsys, "certify", "--problem", str(instance), "--candidate", str(solution),
                    "--bm-p", "4")
    assert "not_applicable" in out["bound_bm"]

    code, out = run(capsys, "landscape-check", "--problem", str(instance), "--candidate", str(solution))
    assert code == 0
    assert out["socp"]["is_socp_numerically"] is True
    assert out["audit"]["first_order_margin"] >= -1e-6


def test_certify_exit_code_on_failure(instance, tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    write_tuple_csv(random_stiefel(30, 2, 2, 0), bad)
    code, out = run(capsys, "certify", "--problem", str(instance), "--candidate", str(bad))
    assert code == 1
    assert out["certificate"]["verdict"] == "Failed"


def test_solve_inline_random_init(capsys):
    code, out = run(capsys, "solve", "--n", "20", "--d", "2", "--sigma", "0", "--p", "4",
                    "--init", "random", "--seed", "1")
    assert code == 0 and out["termination"] == "CertifiedStop"
    assert out["distance_to_truth"] < 1e-8


def test_phase_transition_small(tmp_path, capsys):
    code, out = run(capsys, "phase-transition", "--d", "2", "--kappas", "0,0.5", "--ns", "20",
                    "--trials", "2", "--out-dir", str(tmp_path), "--quiet")
    assert code == 0
    assert len(out["cells"]) == 2
    assert out["cells"][0]["successes"] == 2
    assert (tmp_path / "heatmap.pgm").read_text().startswith("P2\n1 2\n255\n")


def test_sigma_and_kappa_are_exclusive(capsys):
    with pytest.raises(SystemExit):
        main(["generate", "--sigma", "1", "--kappa", "0.2"])
