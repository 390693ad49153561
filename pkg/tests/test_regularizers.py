import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mirrorstrat.linalg import gaussian_matrix, rng_from_seed
from mirrorstrat.regularizers import (
    DEFAULT_TOL,
    GroupL12,
    InfeasibleDualError,
    L1,
    LInfBall,
    Nuclear,
    Tolerances,
)
from mirrorstrat.strata import (
    BlockSaturation,
    BlockSupport,
    Rank,
    SaturationCount,
    SaturationPattern,
    SignPattern,
    dim,
    geq,
    leq,
)

from oracles import NUCLEAR_GRID, brute_prox, group_value, l1_value, linf_indicator_value, nuclear2_value

ALL_KINDS = [L1(3), GroupL12([[0], [1, 2]]), Nuclear(2), LInfBall(3)]
finite = st.floats(-5, 5, allow_nan=False, allow_infinity=False)


def _vec(kind, seed):
    return 2.0 * gaussian_matrix(1, kind.size, seed)[0]


class TestTolerances:
    def test_defaults(self):
        assert DEFAULT_TOL.primal_zero_tol == 1e-8
        assert DEFAULT_TOL.dual_saturation_tol == 1e-6

    @pytest.mark.parametrize("bad", [0.0, -1e-3, 0.02])
    def test_range(self, bad):
        with pytest.raises(ValueError):
            Tolerances(primal_zero_tol=bad)
        with pytest.raises(ValueError):
            Tolerances(dual_saturation_tol=bad)


class TestEval:
    def test_l1(self):
        assert L1(3).eval(np.array([1.0, -2.0, 0.0])) == 3.0

    def test_nuclear_identity(self):
        assert Nuclear(2).eval(np.eye(2).ravel()) == pytest.approx(2.0)

    def test_linf_outside(self):
        assert LInfBall(2).eval(np.array([1.5, 0.0])) == math.inf
        assert LInfBall(2).eval(np.array([1.0, -0.3])) == 0.0

    def test_group(self):
        g = GroupL12([[0, 1], [2]])
        assert g.eval(np.array([3.0, 4.0, -1.0])) == pytest.approx(6.0)

    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_dimension_mismatch(self, kind):
        with pytest.raises(ValueError):
            kind.eval(np.zeros(kind.size + 1))
        with pytest.raises(ValueError):
            kind.prox(np.zeros(kind.size + 1), 1.0)


class TestGroupConstruction:
    def test_overlap_rejected(self):
        with pytest.raises(ValueError):
            GroupL12([[0, 1], [1, 2]])

    def test_gap_rejected(self):
        with pytest.raises(ValueError):
            GroupL12([[0], [2]])

    def test_empty_block_rejected(self):
        with pytest.raises(ValueError):
            GroupL12([[0, 1], []])

    def test_nuclear_side(self):
        assert Nuclear(3).size == 9
        with pytest.raises(ValueError):
            Nuclear(0)


class TestProx:
    def test_l1_example(self):
        np.testing.assert_allclose(L1(3).prox(np.array([1.2, -0.3, 0.5]), 0.5), [0.7, 0, 0], atol=1e-15)

    def test_nuclear_example(self):
        out = Nuclear(2).prox(np.diag([3.0, 0.5]).ravel(), 1.0)
        np.testing.assert_allclose(out, np.diag([2.0, 0.0]).ravel(), atol=1e-14)

    def test_nuclear_jacobi_backend(self):
        x = gaussian_matrix(1, 25, 4)[0]
        np.testing.assert_allclose(Nuclear(5, "jacobi").prox(x, 0.7), Nuclear(5).prox(x, 0.7), atol=1e-12)

    def test_group_example(self):
        np.testing.assert_allclose(GroupL12([[0, 1]]).prox(np.array([3.0, 4.0]), 1.0), [2.4, 3.2])

    def test_group_zero_block(self):
        np.testing.assert_array_equal(GroupL12([[0, 1]]).prox(np.zeros(2), 1.0), 0.0)

    def test_linf_clip(self):
        np.testing.assert_array_equal(LInfBall(3).prox(np.array([2.0, -0.5, -3.0]), 0.3), [1, -0.5, -1])

    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_mu_positive(self, kind):
        with pytest.raises(ValueError):
            kind.prox(np.zeros(kind.size), 0.0)
        with pytest.raises(ValueError):
            kind.prox_conjugate(np.zeros(kind.size), -1.0)

    @pytest.mark.parametrize(
        "kind,value,box,opts",
        [
            (L1(3), l1_value, None, {}),
            (GroupL12([[0], [1, 2]]), group_value([[0], [1, 2]]), None, {}),
            (Nuclear(2), nuclear2_value, None, NUCLEAR_GRID),
            (LInfBall(3), linf_indicator_value, 1.0, {}),
        ],
        ids=["l1", "group", "nuclear", "linf"],
    )
    def test_brute_force_oracle(self, kind, value, box, opts):
        rng = rng_from_seed(2024)
        for i in range(25):
            x = 3.0 * rng.standard_normal(kind.size)
            mu = float(rng.uniform(0.05, 2.0))
            # the prox moves x by at most mu * sup ||dR|| <= mu * sqrt(N)
            width = 1.0 if box else mu * math.sqrt(kind.size) + 0.1
            ref = brute_prox(value, x, mu, width, box=box, seed=i, **opts)
            np.testing.assert_allclose(kind.prox(x, mu), ref, atol=1e-3)


class TestMoreau:
    def test_l1_conjugate_example(self):
        np.testing.assert_allclose(L1(2).prox_conjugate(np.array([0.4, -2.0]), 1.0), [0.4, -1.0])

    def test_nuclear_conjugate_example(self):
        out = Nuclear(2).prox_conjugate(np.diag([3.0, 0.5]).ravel(), 1.0)
        np.testing.assert_allclose(out, np.diag([1.0, 0.5]).ravel(), atol=1e-14)

    @pytest.mark.parametrize("kind", [L1(7), GroupL12.uniform(3, 3), Nuclear(4), LInfBall(5)], ids=repr)
    def test_identity(self, kind):
        for seed in range(100):
            x = _vec(kind, seed)
            np.testing.assert_allclose(kind.prox(x, 1.0) + kind.prox_conjugate(x, 1.0), x, atol=1e-12)

    @pytest.mark.parametrize("kind", ALL_KINDS, ids=repr)
    def test_generic_formula(self, kind):
        # prox of mu R* equals x - mu prox_{R/mu}(x/mu) for any mu
        for seed in range(20):
            x, mu = _vec(kind, seed), 0.3 + seed / 10
            generic = x - mu * kind.prox(x / mu, 1.0 / mu)
            np.testing.assert_allclose(kind.prox_conjugate(x, mu), generic, atol=1e-12)


class TestConjugate:
    def test_l1(self):
        assert L1(2).conjugate(np.array([1.0, -0.2])) == 0.0
        assert L1(2).conjugate(np.array([1.1, 0.0])) == math.inf

    def test_linf(self):
        assert LInfBall(2).conjugate(np.array([1.0, -2.0])) == 3.0

    def test_nuclear(self):
        assert Nuclear(2).conjugate(np.diag([1.0, 0.5]).ravel()) == 0.0
        assert Nuclear(2).conjugate(np.diag([1.5, 0.5]).ravel()) == math.inf

    @pytest.mark.parametrize("kind", [L1(4), GroupL12.uniform(2, 2), Nuclear(2)], ids=repr)
    def test_fenchel_young(self, kind):
        # R(x) + R*(u) >= <x, u>, with equality for u in dR(x)
        for seed in range(20):
            x = _vec(kind, seed)
            u = kind.project_subdifferential(x, _vec(kind, seed + 100))
            assert kind.eval(x) + kind.conjugate(u) == pytest.approx(float(x @ u), abs=1e-10)


class TestComplexity:
    def test_l1_example(self):
        assert L1(3).complexity_index(np.array([1e-12, 2.0, -3.0])) == 2
        assert L1(3).complexity_index(np.zeros(3)) == 0

    def test_nuclear_rank4(self):
        a, b = gaussian_matrix(10, 4, 1), gaussian_matrix(4, 10, 2)
        assert Nuclear(10).complexity_index((a @ b).ravel()) == 4

    def test_group(self):
        g = GroupL12([[0], [1, 2]])
        assert g.complexity_index(np.array([0.0, 1.0, 1.0])) == 1

    def test_linf_counts_free_coordinates(self):
        assert LInfBall(3).complexity_index(np.array([1.0, 0.2, -1.0])) == 1

    @pytest.mark.parametrize("kind", [L1(5), GroupL12.uniform(3, 2), Nuclear(3), LInfBall(4)], ids=repr)
    def test_equals_dim(self, kind):
        rng = rng_from_seed(9)
        for _ in range(50):
            x = rng.standard_normal(kind.size)
            x[rng.random(kind.size) < 0.4] = 0.0
            if isinstance(kind, LInfBall):
                x = np.clip(2 * x, -1, 1)
            if isinstance(kind, Nuclear):
                x = kind.prox(x, 1.0)
            assert kind.complexity_index(x) == dim(kind.primal_stratum(x))


class TestStrata:
    def test_l1_primal(self):
        assert L1(3).primal_stratum(np.array([2.0, 0.0, -1.0])) == SignPattern((1, 0, -1))

    def test_nuclear_zero(self):
        assert Nuclear(3).primal_stratum(np.zeros(9)) == Rank(0, 3)

    def test_group_primal(self):
        g = GroupL12([[0], [1, 2]])
        assert g.primal_stratum(np.array([0.0, 1.0, 1.0])) == BlockSupport((False, True))

    def test_linf_primal(self):
        assert LInfBall(3).primal_stratum(np.array([1.0, 0.3, -1.0])) == SaturationPattern((1, 0, -1))

    def test_l1_dual(self):
        assert L1(3).dual_stratum(np.array([1.0, 0.3, -1.0])) == SaturationPattern((1, 0, -1))

    def test_nuclear_dual(self):
        assert Nuclear(3).dual_stratum(np.diag([1.0, 1.0, 0.5]).ravel()) == SaturationCount(2, 3)

    def test_group_dual(self):
        g = GroupL12([[0, 1], [2]])
        assert g.dual_stratum(np.array([0.6, 0.8, 0.5])) == BlockSaturation((True, False))

    def test_linf_dual(self):
        assert LInfBall(2).dual_stratum(np.array([0.5, 0.0])) == SignPattern((1, 0))

    def test_infeasible_dual(self):
        with pytest.raises(InfeasibleDualError):
            L1(2).dual_stratum(np.array([1.1, 0.0]))
        with pytest.raises(InfeasibleDualError):
            Nuclear(2).dual_stratum(np.diag([1.1, 0.0]).ravel())
        with pytest.raises(InfeasibleDualError):
            GroupL12([[0, 1]]).dual_stratum(np.array([1.0, 1.0]))

    def test_dual_tolerance_slack(self):
        assert L1(1).dual_stratum(np.array([1.0 + 5e-7])) == SaturationPattern((1,))


class TestMirrorMaps:
    def test_examples(self):
        assert L1(2).mirror_map(SignPattern((1, 0))) == SaturationPattern((1, 0))
        assert Nuclear(6).mirror_map(Rank(4, 6)) == SaturationCount(4, 6)
        assert L1(3).mirror_map_conj(SaturationPattern((1, -1, 0))) == SignPattern((1, -1, 0))
        assert Nuclear(8).mirror_map_conj(SaturationCount(7, 8)) == Rank(7, 8)
        g = GroupL12.uniform(3, 2)
        assert g.mirror_map_conj(BlockSaturation((True,) * 3)) == BlockSupport((True,) * 3)

    def test_kind_mismatch(self):
        with pytest.raises(TypeError):
            L1(2).mirror_map(Rank(1, 2))
        with pytest.raises(TypeError):
            Nuclear(2).mirror_map_conj(SignPattern((1, 0)))

    @pytest.mark.parametrize(
        "kind", [L1(4), GroupL12.uniform(3, 1), Nuclear(6), LInfBall(3)], ids=repr
    )
    def test_round_trip_and_order_reversal(self, kind):
        strata = list(kind.enumerate_primal_strata())
        for s in strata:
            assert kind.mirror_map_conj(kind.mirror_map(s)) == s
        for s, t in itertools.product(strata, repeat=2):
            assert leq(s, t) == geq(kind.mirror_map(s), kind.mirror_map(t))

    def test_l1_n5_monotone(self):
        kind = L1(5)
        strata = list(kind.enumerate_primal_strata())
        rng = rng_from_seed(1)
        for i, j in rng.integers(0, len(strata), size=(3000, 2)):
            s, t = strata[i], strata[j]
            if leq(s, t):
                assert geq(kind.mirror_map(s), kind.mirror_map(t))


class TestProjectSubdifferential:
    def test_l1_examples(self):
        np.testing.assert_array_equal(L1(2).project_subdifferential(np.array([2.0, 0.0]), np.array([0.1, 3.0])), [1, 1])
        np.testing.assert_array_equal(L1(2).project_subdifferential(np.zeros(2), np.array([0.5, -0.5])), [0.5, -0.5])

    def test_nuclear_example(self):
        out = Nuclear(2).project_subdifferential(np.diag([1.0, 0.0]).ravel(), np.diag([5.0, 2.0]).ravel())
        np.testing.assert_allclose(out, np.diag([1.0, 1.0]).ravel(), atol=1e-14)

    def test_nuclear_example_grid_minimality(self):
        # among diagonal members diag(1, t), |t| <= 1, of the subdifferential
        # at diag(1, 0), the projection of diag(5, 2) is the closest
        v = np.diag([5.0, 2.0]).ravel()
        out = Nuclear(2).project_subdifferential(np.diag([1.0, 0.0]).ravel(), v)
        best = min(np.linalg.norm(np.diag([1.0, t]).ravel() - v) for t in np.linspace(-1, 1, 2001))
        assert np.linalg.norm(out - v) <= best + 1e-12

    def test_group_active_block(self):
        g = GroupL12([[0, 1], [2, 3]])
        out = g.project_subdifferential(np.array([3.0, 4.0, 0.0, 0.0]), np.array([9.0, 9.0, 3.0, 4.0]))
        np.testing.assert_allclose(out, [0.6, 0.8, 0.6, 0.8])

    def test_linf_normal_cone(self):
        out = LInfBall(3).project_subdifferential(np.array([1.0, 0.2, -1.0]), np.array([-2.0, 5.0, -3.0]))
        np.testing.assert_array_equal(out, [0.0, 0.0, -3.0])

    @pytest.mark.parametrize("kind", [L1(6), GroupL12.uniform(3, 2), Nuclear(3), LInfBall(4)], ids=repr)
    def test_idempotent(self, kind):
        rng = rng_from_seed(5)
        for _ in range(30):
            x0 = kind.prox(3 * rng.standard_normal(kind.size), 1.0)
            p = kind.project_subdifferential(x0, 3 * rng.standard_normal(kind.size))
            np.testing.assert_allclose(kind.project_subdifferential(x0, p), p, atol=1e-10)

    @pytest.mark.parametrize("kind", [L1(6), GroupL12.uniform(3, 2), Nuclear(3), LInfBall(4)], ids=repr)
    def test_prox_optimality(self, kind):
        # (x - prox(x)) / mu lies in dR(prox(x))
        rng = rng_from_seed(6)
        for _ in range(30):
            x, mu = 3 * rng.standard_normal(kind.size), float(rng.uniform(0.1, 2))
            z = kind.prox(x, mu)
            g = (x - z) / mu
            np.testing.assert_allclose(kind.project_subdifferential(z, g), g, atol=1e-8)

    @pytest.mark.parametrize("kind", [L1(4), GroupL12.uniform(2, 2), Nuclear(2)], ids=repr)
    def test_projection_is_closest(self, kind):
        # any other member of dR(x0) is at least as far from v
        rng = rng_from_seed(8)
        for _ in range(20):
            x0 = kind.prox(2 * rng.standard_normal(kind.size), 1.0)
            v = 2 * rng.standard_normal(kind.size)
            p = kind.project_subdifferential(x0, v)
            for _ in range(20):
                other = kind.project_subdifferential(x0, 3 * rng.standard_normal(kind.size))
                assert np.linalg.norm(v - p) <= np.linalg.norm(v - other) + 1e-10


@settings(max_examples=60, deadline=None)
@given(arrays(float, 6, elements=finite), st.floats(0.01, 3.0))
def test_l1_prox_properties(x, mu):
    z = L1(6).prox(x, mu)
    assert np.all(np.abs(z) <= np.abs(x) + 1e-15)
    assert np.all(np.abs(x - z) <= mu + 1e-12)
    # Moreau with parameter mu: x = prox_{mu R}(x) + mu * proj_box(x / mu)
    np.testing.assert_allclose(x - z, mu * L1(6).prox_conjugate(x / mu, 1.0), atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(arrays(float, 9, elements=finite), arrays(float, 9, elements=finite))
def test_nuclear_prox_nonexpansive(x, y):
    k = Nuclear(3)
    assert np.linalg.norm(k.prox(x, 0.5) - k.prox(y, 0.5)) <= np.linalg.norm(x - y) + 1e-9


@settings(max_examples=40, deadline=None)
@given(arrays(float, 6, elements=finite))
def test_group_moreau_property(x):
    g = GroupL12.uniform(2, 3)
    np.testing.assert_allclose(g.prox(x, 1.0) + g.prox_conjugate(x, 1.0), x, atol=1e-12)
