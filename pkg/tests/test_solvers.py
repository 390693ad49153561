import csv

import numpy as np
import pytest

from mirrorstrat.linalg import gaussian_matrix
from mirrorstrat.regularizers import GroupL12, L1, Nuclear, soft_threshold
from mirrorstrat.solvers import (
    ProblemInstance,
    SolverBudgetError,
    SolverParams,
    dr_params,
    dr_solve,
    duality_gap,
    fb_params,
    fb_solve,
    objective,
    reference_solve,
)
from mirrorstrat.strata import leq, sandwich_holds


def sparse_instance(p=30, n=60, s=4, noise=0.05, lam=0.2, seed=0):
    phi = gaussian_matrix(p, n, seed)
    x0 = np.zeros(n)
    x0[: s] = np.where(np.arange(s) % 2 == 0, 1.0, -1.0)
    w = noise * gaussian_matrix(p, 1, seed + 1000)[:, 0]
    y0 = phi @ x0
    return ProblemInstance(phi, y0 + w, lam, L1(n), x0=x0, y0=y0, w=w)


def orthogonal_instance(y, lam=1.0):
    n = len(y)
    return ProblemInstance(np.eye(n), np.asarray(y, float), lam, L1(n))


class TestProblemInstance:
    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            ProblemInstance(np.eye(3), np.ones(2), 1.0, L1(3))

    def test_regularizer_mismatch(self):
        with pytest.raises(ValueError):
            ProblemInstance(np.eye(3), np.ones(3), 1.0, L1(4))

    def test_lambda_positive(self):
        with pytest.raises(ValueError):
            ProblemInstance(np.eye(2), np.ones(2), 0.0, L1(2))

    def test_ground_truth_consistency(self):
        with pytest.raises(ValueError):
            ProblemInstance(np.eye(2), np.ones(2), 1.0, L1(2), x0=np.zeros(2), y0=np.ones(2), w=np.ones(2))

    def test_ground_truth_filled(self):
        prob = sparse_instance()
        np.testing.assert_allclose(prob.y0 + prob.w, prob.y, atol=1e-12)

    def test_params_validation(self):
        with pytest.raises(ValueError):
            SolverParams(gamma=0.0)
        with pytest.raises(ValueError):
            SolverParams(gamma=1.0, max_iters=0)


class TestObjective:
    def test_at_truth_noiseless(self):
        prob = sparse_instance(noise=0.0)
        assert objective(prob, prob.x0) == pytest.approx(4.0, abs=1e-12)

    def test_at_zero(self):
        prob = sparse_instance()
        assert objective(prob, np.zeros(60)) == pytest.approx(prob.y @ prob.y / (2 * prob.lam))

    def test_random_point(self):
        prob = sparse_instance()
        x = gaussian_matrix(60, 1, 5)[:, 0]
        expected = np.abs(x).sum() + np.sum((prob.y - prob.phi @ x) ** 2) / (2 * prob.lam)
        assert objective(prob, x) == pytest.approx(expected, rel=1e-13)


class TestFB:
    def test_orthogonal_design_one_step(self):
        y = np.array([2.5, -0.3, 1.0, -4.0])
        prob = orthogonal_instance(y)
        trace = fb_solve(prob, SolverParams(gamma=1.0, max_iters=5, stop_tol=0.0))
        np.testing.assert_allclose(trace.x, soft_threshold(y, 1.0), atol=1e-15)
        # x1 is already a fixed point: the second step has zero residual
        assert trace.residuals[2] == 0.0

    def test_orthogonal_design_brute_force(self):
        # exhaustive grid minimization in N = 2
        y = np.array([1.7, -0.4])
        grid = np.linspace(-3, 3, 601)
        a, b = np.meshgrid(grid, grid, indexing="ij")
        obj = np.abs(a) + np.abs(b) + 0.5 * ((a - y[0]) ** 2 + (b - y[1]) ** 2)
        i, j = np.unravel_index(np.argmin(obj), obj.shape)
        x = fb_solve(orthogonal_instance(y), SolverParams(gamma=1.0)).x
        np.testing.assert_allclose(x, [grid[i], grid[j]], atol=0.01)
        np.testing.assert_allclose(x, [0.7, 0.0], atol=1e-15)

    def test_objective_nonincreasing(self):
        prob = sparse_instance()
        obj = fb_solve(prob, fb_params(prob, max_iters=3000)).objectives
        assert np.all(np.diff(obj) <= 1e-12 * np.abs(obj[:-1]))

    def test_nonincreasing_group_and_nuclear(self):
        phi = gaussian_matrix(20, 16, 3)
        for reg in (GroupL12.uniform(4, 4), Nuclear(4)):
            y = gaussian_matrix(20, 1, 4)[:, 0]
            prob = ProblemInstance(phi, y, 0.5, reg)
            obj = fb_solve(prob, fb_params(prob, max_iters=500)).objectives
            assert np.all(np.diff(obj) <= 1e-12 * np.abs(obj[:-1]))

    @pytest.mark.parametrize("factor", [0.0, 2.0, 2.5, -1.0])
    def test_step_rejected(self, factor):
        prob = sparse_instance()
        gamma = factor * prob.lam / prob.lipschitz
        if gamma <= 0:
            with pytest.raises(ValueError):
                SolverParams(gamma=gamma)
        else:
            with pytest.raises(ValueError, match="step"):
                fb_solve(prob, SolverParams(gamma=gamma))

    @pytest.mark.parametrize("tau", [0.0, 1.5])
    def test_tau_rejected(self, tau):
        prob = sparse_instance()
        with pytest.raises(ValueError, match="relaxation"):
            fb_solve(prob, fb_params(prob, tau=tau))

    def test_hook_called_per_iteration(self):
        prob = sparse_instance()
        seen = []
        trace = fb_solve(prob, fb_params(prob, max_iters=25, stop_tol=0.0), hook=seen.append)
        assert len(seen) == 26 == len(trace.records)
        assert [r.k for r in seen] == list(range(26))

    def test_budget_flag(self):
        prob = sparse_instance()
        trace = fb_solve(prob, fb_params(prob, max_iters=3))
        assert not trace.converged and trace.iterations == 3
        assert len(trace.records) <= 4

    def test_relaxed_converges(self):
        prob = sparse_instance()
        x = reference_solve(prob)
        trace = fb_solve(prob, fb_params(prob, tau=0.6, max_iters=100_000, stop_tol=1e-10))
        assert trace.converged
        np.testing.assert_allclose(trace.x, x, atol=1e-7)

    def test_noiseless_identification(self):
        # strict certificate: the least-squares certificate on the support stays below 1 off it
        prob = sparse_instance(p=40, n=60, s=3, noise=0.0, lam=1e-3)
        supp = np.flatnonzero(prob.x0)
        a = prob.phi[:, supp]
        q = a @ np.linalg.solve(a.T @ a, np.sign(prob.x0[supp]))
        off = np.setdiff1d(np.arange(60), supp)
        assert np.abs(prob.phi[:, off].T @ q).max() < 0.9
        trace = fb_solve(prob, fb_params(prob, max_iters=50_000, stop_tol=1e-10))
        assert trace.records[-1].r0 == 3

    def test_monotone_inclusion(self):
        prob = sparse_instance()
        trace = fb_solve(prob, fb_params(prob, max_iters=100_000, stop_tol=1e-11))
        gamma = fb_params(prob).gamma
        x = trace.x
        x_pre = x - gamma * prob.phi.T @ (prob.phi @ x - prob.y) / prob.lam
        x_post = prob.regularizer.prox(x_pre, gamma)
        u = (x_pre - x_post) / gamma
        np.testing.assert_allclose(prob.regularizer.project_subdifferential(x_post, u), u, atol=1e-6)


class TestDR:
    def test_orthogonal_matches_fb(self):
        y = np.array([2.5, -0.3, 1.0, -4.0, 0.9])
        prob = orthogonal_instance(y)
        x_dr = dr_solve(prob, SolverParams(gamma=0.7, stop_tol=1e-12, max_iters=10_000)).x
        np.testing.assert_allclose(x_dr, soft_threshold(y, 1.0), atol=1e-8)

    def test_agrees_with_reference(self):
        prob = sparse_instance()
        x_ref = reference_solve(prob)
        trace = dr_solve(prob, dr_params(prob, max_iters=100_000, stop_tol=1e-11))
        assert trace.converged
        np.testing.assert_allclose(trace.x, x_ref, atol=1e-8)
        assert abs(objective(prob, trace.x) - objective(prob, x_ref)) <= 10 * 1e-10

    @pytest.mark.parametrize("tau", [0.5, 1.0, 1.7])
    def test_residual_nonincreasing(self, tau):
        prob = sparse_instance()
        res = dr_solve(prob, dr_params(prob, tau=tau, max_iters=2000, stop_tol=0.0)).residuals[1:]
        assert np.all(np.diff(res) <= 1e-12 * res[:-1] + 1e-15)

    def test_reversed_order(self):
        prob = sparse_instance()
        a = dr_solve(prob, dr_params(prob, max_iters=100_000, stop_tol=1e-11), order="fg")
        b = dr_solve(prob, dr_params(prob, max_iters=100_000, stop_tol=1e-11), order="gf")
        assert abs(objective(prob, a.x) - objective(prob, b.x)) <= 1e-6

    @pytest.mark.parametrize("tau", [0.0, 2.0])
    def test_tau_rejected(self, tau):
        prob = sparse_instance()
        with pytest.raises(ValueError):
            dr_solve(prob, dr_params(prob, tau=tau))

    def test_order_rejected(self):
        prob = sparse_instance()
        with pytest.raises(ValueError):
            dr_solve(prob, order="ff")

    def test_inclusion(self):
        prob = sparse_instance()
        trace = dr_solve(prob, dr_params(prob, max_iters=100_000, stop_tol=1e-11))
        z, x, gamma = trace.aux["z"], trace.aux["x"], trace.aux["gamma"]
        u = (z - x) / gamma
        np.testing.assert_allclose(prob.regularizer.project_subdifferential(x, u), u, atol=1e-6)


class TestReference:
    def test_orthogonal(self):
        y = np.array([0.2, -3.0, 1.5])
        np.testing.assert_allclose(reference_solve(orthogonal_instance(y)), soft_threshold(y, 1.0), atol=1e-10)

    @pytest.mark.parametrize("seed", range(4))
    def test_duality_gap(self, seed):
        prob = sparse_instance(p=50, n=100, s=10, noise=0.1, lam=0.28, seed=seed)
        assert 0 <= duality_gap(prob, reference_solve(prob)) <= 1e-6

    def test_gap_group_nuclear(self):
        phi = gaussian_matrix(30, 16, 8)
        y = gaussian_matrix(30, 1, 9)[:, 0]
        for reg in (GroupL12.uniform(4, 4), Nuclear(4)):
            prob = ProblemInstance(phi, y, 0.5, reg)
            assert duality_gap(prob, reference_solve(prob)) <= 1e-6

    def test_budget_error(self):
        prob = sparse_instance()
        with pytest.raises(SolverBudgetError) as exc:
            reference_solve(prob, max_iters=5)
        assert exc.value.residual > 1e-10
        assert exc.value.x.shape == (60,)

    def test_tol_positive(self):
        with pytest.raises(ValueError):
            reference_solve(sparse_instance(), tol=0.0)


class TestEnlargedIdentification:
    THRESHOLD = 1e-6

    @pytest.mark.parametrize("seed", range(5))
    def test_fb_sandwich(self, seed):
        prob = sparse_instance(p=30, n=60, s=4, noise=1e-3, lam=0.05, seed=seed)
        self._check(prob, fb_solve(prob, fb_params(prob, max_iters=100_000, stop_tol=1e-10)))

    @pytest.mark.parametrize("seed", range(3))
    def test_dr_sandwich(self, seed):
        prob = sparse_instance(p=30, n=60, s=4, noise=1e-3, lam=0.05, seed=seed)
        self._check(prob, dr_solve(prob, dr_params(prob, max_iters=100_000, stop_tol=1e-10)))

    def _check(self, prob, trace):
        reg = prob.regularizer
        x_hat = reference_solve(prob)
        lower = reg.primal_stratum(x_hat)
        u = prob.phi.T @ (prob.y - prob.phi @ x_hat) / prob.lam
        upper = reg.mirror_map_conj(reg.dual_stratum(u))
        assert leq(lower, upper)
        tail = [r for r in trace.records if r.residual <= self.THRESHOLD]
        assert tail
        for r in tail:
            assert sandwich_holds(lower, r.stratum, upper), r.k


class TestTraceCsv:
    def test_columns(self, tmp_path):
        prob = sparse_instance()
        trace = fb_solve(prob, fb_params(prob, max_iters=10, stop_tol=0.0))
        path = tmp_path / "trace.csv"
        trace.to_csv(path)
        with open(path) as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["k", "objective", "r0", "stratum", "residual"]
        assert len(rows) == 12
        for row, rec in zip(rows[1:], trace.records):
            assert int(row[0]) == rec.k and float(row[1]) == rec.objective and int(row[2]) == rec.r0
