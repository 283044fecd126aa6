# SPDX-FileCopyrightText: fradelay developers (2026)
# SPDX-License-Identifier: GPL-3.0-or-later
import numpy as np
import pytest

from fradelay import linops
from fradelay.exception import ConfigError, DomainError, NearDefectiveError
from fradelay.linops import JordanBlock, JordanStructure
from fradelay.nonlinearity import NonlinearitySpec

JORDAN_2 = np.array([[-1.0, 1.0], [0.0, -1.0]])


def jordan_pair(gamma=0.1):
    structure = linops.jordan_from_blocks(np.eye(2), [JordanBlock(lam=-1, size=2, eta=1)])
    return linops.gamma_rescale(structure, gamma)


class TestEigendecompose:
    def test_diagonal(self):
        j = linops.eigendecompose(np.diag([-1.0, -2.0]))
        np.testing.assert_allclose(j.lambdas, [-1, -2])
        np.testing.assert_allclose(np.abs(j.transform), np.eye(2), atol=1e-12)

    def test_rotation(self):
        A = np.array([[0.0, 1.0], [-1.0, 0.0]])
        j = linops.eigendecompose(A)
        assert sorted(j.lambdas, key=lambda z: z.imag) == pytest.approx([-1j, 1j])
        for lam, vector in zip(j.lambdas, j.transform.T):
            np.testing.assert_allclose(A @ vector, lam * vector, atol=1e-12)

    def test_defective(self):
        with pytest.raises(NearDefectiveError):
            linops.eigendecompose(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_cond_limit(self):
        A = np.array([[-1.0, 1.0], [0.0, -1.0 - 1e-6]])
        linops.eigendecompose(A)
        with pytest.raises(NearDefectiveError):
            linops.eigendecompose(A, cond_limit=10.0)

    def test_invalid(self):
        with pytest.raises(DomainError):
            linops.eigendecompose(np.ones((2, 3)))
        with pytest.raises(DomainError):
            linops.eigendecompose(np.array([[np.nan]]))


class TestJordanStructure:
    def test_verify(self):
        j = linops.jordan_from_blocks(np.eye(2), [JordanBlock(lam=-1, size=2, eta=1)])
        j.verify(JORDAN_2)
        np.testing.assert_allclose(j.jordan_matrix(), JORDAN_2)
        wrong = linops.jordan_from_blocks(np.eye(2), [JordanBlock(lam=-1, size=2, eta=0)])
        with pytest.raises(ConfigError):
            wrong.verify(JORDAN_2)

    def test_invalid(self):
        with pytest.raises(ConfigError):
            JordanBlock(lam=-1, size=0)
        with pytest.raises(ConfigError):
            JordanBlock(lam=-1, eta=2)
        with pytest.raises(ConfigError):
            JordanStructure(blocks=[JordanBlock(lam=-1)], transform=np.eye(2))
        with pytest.raises(NearDefectiveError):
            JordanStructure(blocks=[JordanBlock(lam=-1), JordanBlock(lam=-2)], transform=np.zeros((2, 2)))


class TestGammaRescale:
    def test_diagonal(self):
        ts = linops.gamma_rescale(linops.eigendecompose(np.diag([-1.0, -2.0])), 0.3)
        assert not ts.has_nilpotent
        np.testing.assert_allclose(np.abs(ts.combined_transform), np.eye(2), atol=1e-12)

    def test_block(self):
        ts = jordan_pair(0.1)
        assert ts.has_nilpotent
        np.testing.assert_allclose(ts.nilpotent, [[0, 0.1], [0, 0]])
        conjugated = ts.inverse_transform @ JORDAN_2 @ ts.combined_transform
        np.testing.assert_allclose(conjugated, np.diag(ts.diag_lambdas) + ts.nilpotent, atol=1e-14)

    def test_gamma_one(self):
        ts = jordan_pair(1.0)
        np.testing.assert_allclose(ts.combined_transform, np.eye(2))

    def test_invalid(self):
        with pytest.raises(DomainError):
            jordan_pair(0.0)


class TestTransformNonlinearity:
    def test_zero_diagonal(self):
        ts = linops.gamma_rescale(linops.eigendecompose(np.diag([-1.0, -2.0])))
        h = linops.transform_nonlinearity(NonlinearitySpec(), ts)
        u = np.array([[0.3, -0.2]])
        np.testing.assert_allclose(h(u, 2 * u), 0.0)

    def test_zero_block(self):
        h = linops.transform_nonlinearity(NonlinearitySpec(), jordan_pair(0.1))
        np.testing.assert_allclose(h(np.array([1.0, 2.0]), np.array([3.0, 5.0])), [0.5, 0.0])
        np.testing.assert_allclose(h(np.zeros(2), np.zeros(2)), 0.0)

    def test_identity(self):
        g = NonlinearitySpec("quadratic", (1.0, 0.5))
        ts = linops.gamma_rescale(linops.jordan_from_blocks(np.eye(2), [JordanBlock(-1), JordanBlock(-2)]))
        h = linops.transform_nonlinearity(g, ts)
        u = np.array([[0.3, -0.2]])
        v = np.array([[0.1, 0.4]])
        np.testing.assert_allclose(h(u, v), g(u, v))


class TestLipschitz:
    def test_analytic(self):
        assert linops.estimate_lipschitz(NonlinearitySpec(), 3.0) == 0.0
        assert linops.estimate_lipschitz(NonlinearitySpec("quadratic", (1.0,)), 0.1) == pytest.approx(0.2)
        b = np.array([[0.0, 2.0], [0.5, 0.0]])
        for rho in (1e-3, 1.0):
            assert linops.estimate_lipschitz(NonlinearitySpec("linear_perturb", b), rho, dim=2) == pytest.approx(2.0)

    def test_sampled(self):
        g = NonlinearitySpec("custom", func=lambda x, y: x ** 2)
        first = linops.estimate_lipschitz(g, 0.1, dim=2, samples=2000)
        assert 0 < first <= linops.MC_SAFETY * 0.2
        assert linops.estimate_lipschitz(g, 0.1, dim=2, samples=2000) == first

    def test_invalid(self):
        with pytest.raises(DomainError):
            linops.estimate_lipschitz(NonlinearitySpec(), 0.0)

    def test_small_rho_limit(self):
        g = NonlinearitySpec("quadratic", (1.0,))
        assert linops.lipschitz_h(jordan_pair(0.1), g, 1e-9) == pytest.approx(0.1, abs=1e-6)
        diagonal = linops.gamma_rescale(linops.eigendecompose(np.diag([-1.0, -2.0])))
        assert linops.lipschitz_h(diagonal, g, 1e-9) == pytest.approx(0.0, abs=1e-6)
