import numpy as np
import pytest

from osync.experiment import (
    FULL_KAPPAS,
    FULL_NS,
    CellResult,
    ExperimentGrid,
    Regime,
    emit_heatmap,
    run_phase_transition,
    success_matrix,
)


def test_full_grid_shape():
    grid = ExperimentGrid.full()
    assert grid.kappa_values == FULL_KAPPAS
    assert len(FULL_KAPPAS) == 13 and FULL_KAPPAS[-1] == 0.6
    assert FULL_NS == tuple(range(100, 1001, 100))
    assert grid.trials == 20 and grid.p == 3
    assert ExperimentGrid(regime=Regime.BM, d=2).p == 4


def test_grid_validation():
    with pytest.raises(ValueError):
        ExperimentGrid(kappa_values=(-0.1,))
    with pytest.raises(ValueError):
        ExperimentGrid(trials=0)
    with pytest.raises(ValueError):
        ExperimentGrid(d=3, p=2)


def test_noiseless_column_always_succeeds():
    grid = ExperimentGrid(kappa_values=(0.0,), n_values=(20, 30), d=2, trials=3)
    results = run_phase_transition(grid)
    assert [r.fraction for r in results] == [1.0, 1.0]
    assert all(r.timeouts == 0 for r in results)


def test_bm_regime_noiseless():
    grid = ExperimentGrid(kappa_values=(0.0,), n_values=(20,), d=2, trials=3, regime=Regime.BM)
    assert run_phase_transition(grid)[0].successes == 3


def test_success_matrix_orientation():
    results = [CellResult(0.0, 100, 2, 2), CellResult(0.0, 200, 2, 2),
               CellResult(0.5, 100, 0, 2), CellResult(0.5, 200, 1, 2)]
    kappas, ns, M = success_matrix(results)
    assert kappas == [0.5, 0.0] and ns == [100, 200]
    assert np.array_equal(M, [[0.0, 0.5], [1.0, 1.0]])
    with pytest.raises(ValueError):
        success_matrix([])


def test_heatmap_golden(tmp_path):
    results = [CellResult(0.0, 100, 2, 2), CellResult(0.0, 200, 2, 2),
               CellResult(0.5, 100, 0, 2), CellResult(0.5, 200, 1, 2)]
    emit_heatmap(results, tmp_path / "h.csv", tmp_path / "h.pgm")
    assert (tmp_path / "h.csv").read_text() == "kappa\\n,100,200\n0.5,0.0000,0.5000\n0,1.0000,1.0000\n"
    assert (tmp_path / "h.pgm").read_text() == "P2\n2 2\n255\n0 128\n255 255\n"


@pytest.mark.parametrize("successes,level", [(1, 255), (0, 0)])
def test_heatmap_single_cell(tmp_path, successes, level):
    emit_heatmap([CellResult(0.1, 50, successes, 1)], tmp_path / "h.csv", tmp_path / "h.pgm")
    assert (tmp_path / "h.pgm").read_text().splitlines()[-1] == str(level)


def test_heatmap_unwritable_path_names_it(tmp_path):
    bad = tmp_path / "missing" / "h.csv"
    with pytest.raises(OSError, match="missing"):
        emit_heatmap([CellResult(0.1, 50, 1, 1)], bad)


def test_artifacts_are_deterministic(tmp_path):
    grid = ExperimentGrid(kappa_values=(0.2, 0.5), n_values=(20,), d=2, trials=3)
    run_phase_transition(grid, tmp_path / "a")
    run_phase_transition(grid, tmp_path / "b")
    for name in ("phase_transition.csv", "heatmap.csv", "heatmap.pgm"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert (tmp_path / "a" / "timings.csv").exists()


def test_worker_processes_do_not_change_results():
    grid = ExperimentGrid(kappa_values=(0.2, 0.5), n_values=(20,), d=2, trials=2)
    serial = run_phase_transition(grid)
    parallel = run_phase_transition(grid, threads=2)
    assert [(r.successes, r.mean_iters) for r in serial] == [(r.successes, r.mean_iters) for r in parallel]
