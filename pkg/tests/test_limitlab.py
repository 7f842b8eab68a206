import math

import numpy as np
import pytest

from fraclap.control import ControlConfig, eigen_solve_control
from fraclap.discretize import Grid, assemble_classical, norm_h
from fraclap.limitlab import (
    SweepConfig,
    SweepError,
    bbm_limit_check,
    default_s_ladder,
    liminf_check,
    recovery_sequence_check,
    run_sweep,
    state_convergence_check,
)

CONTROL = ControlConfig(mu=0.1, a=1.0, b=2.0, tol=1e-9)


def test_default_ladder_is_geometric():
    ladder = default_s_ladder(4)
    assert ladder == [0.5, 0.75, 0.875, 0.9375]


class TestRunSweep:
    def test_distances_and_costs_decrease_along_ladder(self):
        cfg = SweepConfig(grid=Grid(-1.0, 1.0, 256), s_list=[0.5, 0.7, 0.9, 0.99],
                          control=CONTROL)
        report = run_sweep(cfg)
        assert [r.s for r in report.rows] == [0.5, 0.7, 0.9, 0.99]
        gaps = [abs(r.J_star - report.J_star_classical) for r in report.rows]
        assert all(g1 > g2 for g1, g2 in zip(gaps, gaps[1:]))
        dist = [r.dist_f for r in report.rows]
        assert all(d1 > d2 for d1, d2 in zip(dist, dist[1:]))
        assert all(r.error == "" for r in report.rows)

    def test_singleton_ladder(self):
        cfg = SweepConfig(grid=Grid(-1.0, 1.0, 256), s_list=[0.99], control=CONTROL)
        report = run_sweep(cfg)
        assert len(report.rows) == 1
        assert report.rows[0].align >= 0.999

    def test_failed_reference_aborts(self, monkeypatch):
        import fraclap.limitlab as module

        def bad_reference(op, cfg):
            result = eigen_solve_control(op, cfg)
            return type(result)(**{**result.__dict__, "converged": False})

        monkeypatch.setattr(module, "eigen_solve_control", bad_reference)
        cfg = SweepConfig(grid=Grid(-1.0, 1.0, 32), s_list=[0.5], control=CONTROL)
        with pytest.raises(SweepError):
            run_sweep(cfg)

    def test_worker_pool_gives_identical_rows(self):
        grid = Grid(-1.0, 1.0, 64)
        serial = run_sweep(SweepConfig(grid=grid, s_list=[0.5, 0.75, 0.875],
                                       control=CONTROL, workers=1))
        parallel = run_sweep(SweepConfig(grid=grid, s_list=[0.5, 0.75, 0.875],
                                         control=CONTROL, workers=2))
        for r1, r2 in zip(serial.rows, parallel.rows):
            assert (r1.s, r1.J_star, r1.dist_f, r1.dist_u, r1.align,
                    r1.lambda_max, r1.seminorm_sq, r1.poincare_c) == \
                   (r2.s, r2.J_star, r2.dist_f, r2.dist_u, r2.align,
                    r2.lambda_max, r2.seminorm_sq, r2.poincare_c)

    def test_rejects_unsorted_ladder(self):
        with pytest.raises(ValueError):
            SweepConfig(grid=Grid(-1.0, 1.0, 16), s_list=[0.9, 0.5], control=CONTROL)


class TestStateConvergence:
    def test_unit_load_approaches_classical(self):
        n = 512
        grid = Grid(-1.0, 1.0, n)
        report = state_convergence_check(grid, np.ones(n), [0.9, 0.99, 0.999])
        dist = [r.dist_u for r in report.rows]
        gaps = [r.seminorm_gap for r in report.rows]
        assert all(d1 > d2 for d1, d2 in zip(dist, dist[1:]))
        assert all(g1 > g2 for g1, g2 in zip(gaps, gaps[1:]))
        assert dist[-1] <= 0.01 * report.u_norm_classical
        assert gaps[-1] <= 0.03 * report.seminorm_classical

    def test_zero_load_gives_zero_rows(self):
        grid = Grid(-1.0, 1.0, 32)
        report = state_convergence_check(grid, np.zeros(32), [0.5, 0.9])
        assert all(r.dist_u == 0.0 and r.seminorm_gap == 0.0 for r in report.rows)


class TestBbmLimit:
    def test_parabola_energy(self):
        n = 1024
        grid = Grid(-1.0, 1.0, n)
        v = 1.0 - grid.nodes() ** 2
        report = bbm_limit_check(grid, v, [0.9, 0.99, 0.999])
        target = 8.0 / 3.0
        assert report.energy_classical == pytest.approx(target, rel=0.01)
        gaps = [abs(r.energy - target) for r in report.rows]
        assert all(g1 > g2 for g1, g2 in zip(gaps, gaps[1:]))
        assert gaps[-1] <= 0.03 * target

    def test_zero_function(self):
        grid = Grid(-1.0, 1.0, 64)
        report = bbm_limit_check(grid, np.zeros(64), [0.5, 0.9])
        assert all(r.energy == 0.0 for r in report.rows)

    def test_lipschitz_kink(self):
        # The tent 1 - |x| has derivative of modulus 1 a.e., so the
        # classical energy is 2; a kink is fine for the limit.
        n = 1024
        grid = Grid(-1.0, 1.0, n)
        x = grid.nodes()
        v = 1.0 - np.abs(x)
        report = bbm_limit_check(grid, v, [0.9, 0.99, 0.999])
        gaps = [abs(r.energy - report.energy_classical) for r in report.rows]
        assert report.energy_classical == pytest.approx(2.0, rel=0.01)
        assert all(g1 > g2 for g1, g2 in zip(gaps, gaps[1:]))
        assert gaps[-1] <= 0.03 * report.energy_classical


class TestRecovery:
    def test_constant_midband_control(self):
        n = 256
        grid = Grid(-1.0, 1.0, n)
        f = np.ones(n)
        f *= 1.5 / norm_h(f, grid)
        report = recovery_sequence_check(grid, f, default_s_ladder(10), CONTROL)
        assert report.verdicts["recovery"]
        by_s = {r.s: r for r in report.recovery_rows}
        for s, row in by_s.items():
            if s >= 0.99:
                assert abs(row.margin) <= 0.02 * row.F_limit

    def test_inadmissible_control_is_infinite(self):
        n = 64
        grid = Grid(-1.0, 1.0, n)
        f = np.ones(n)
        f *= 3.0 / norm_h(f, grid)  # above the upper bound
        report = recovery_sequence_check(grid, f, [0.5, 0.9], CONTROL)
        assert all(math.isinf(r.F_s) for r in report.recovery_rows)
        assert all(math.isinf(r.F_limit) for r in report.recovery_rows)

    def test_classical_optimum_gaps_decrease(self):
        n = 128
        grid = Grid(-1.0, 1.0, n)
        ref = eigen_solve_control(assemble_classical(grid), CONTROL)
        report = recovery_sequence_check(grid, ref.f_star, [0.9, 0.99, 0.999], CONTROL)
        margins = [abs(r.margin) for r in report.recovery_rows]
        assert all(m1 > m2 for m1, m2 in zip(margins, margins[1:]))


class TestLiminf:
    def test_zero_amplitude_reduces_to_recovery(self):
        n = 64
        grid = Grid(-1.0, 1.0, n)
        f = np.ones(n)
        f *= 1.5 / norm_h(f, grid)
        ladder = default_s_ladder(6)
        rec = recovery_sequence_check(grid, f, ladder, CONTROL)
        lim = liminf_check(grid, f, 0.0, ladder, CONTROL)
        for r1, r2 in zip(rec.recovery_rows, lim.liminf_rows):
            assert r2.margin == pytest.approx(r1.margin, rel=1e-12, abs=1e-14)
        # With the control fixed the margins are nonnegative up to a small
        # transient at the coarse end of the ladder.
        assert all(r.margin >= -0.02 * r.F_limit for r in lim.liminf_rows)
        assert all(r.margin >= 0.0 for r in lim.liminf_rows[-2:])

    def test_oscillatory_family_tail_margins(self):
        n = 256
        grid = Grid(-1.0, 1.0, n)
        f = np.ones(n)
        f *= 1.5 / norm_h(f, grid)
        c = 0.1 * norm_h(f, grid)
        report = liminf_check(grid, f, c, default_s_ladder(12), CONTROL)
        assert report.verdicts["liminf"]
        tail = report.liminf_rows[-4:]
        assert all(r.margin >= -1e-3 for r in tail)

    def test_oscillation_leaving_annulus_is_rejected(self):
        n = 64
        grid = Grid(-1.0, 1.0, n)
        f = np.ones(n)
        f *= 1.9 / norm_h(f, grid)  # close to the upper bound
        with pytest.raises(ValueError):
            liminf_check(grid, f, 1.0, default_s_ladder(6), CONTROL)

    def test_base_control_must_be_admissible(self):
        n = 64
        grid = Grid(-1.0, 1.0, n)
        f = np.ones(n) * 1e-3  # far below the lower bound
        with pytest.raises(ValueError):
            liminf_check(grid, f, 0.0, [0.5, 0.9], CONTROL)
