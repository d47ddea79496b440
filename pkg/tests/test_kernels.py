import os
import subprocess
import sys

import numpy as np
import pytest

from aldisplay import kernels

pytestmark = pytest.mark.skipif(
    not kernels.NUMBA_AVAILABLE, reason="numba not installed"
)


class TestBackendParity:
    """The numba twins must agree with the pure-numpy implementations."""

    def test_sqdist_matrix(self):
        rng = np.random.default_rng(0)
        x = rng.standard_normal((40, 5))
        c = rng.standard_normal((7, 5))
        a = kernels.sqdist_matrix_numpy(x, c)
        b = kernels.sqdist_matrix_numba(x, c)
        assert np.allclose(a, b, rtol=1e-12, atol=1e-12)
        # coincident point/center pairs give exact zeros on both paths
        a0 = kernels.sqdist_matrix_numpy(c, c)
        b0 = kernels.sqdist_matrix_numba(c, c)
        assert np.array_equal(np.diag(a0), np.zeros(7))
        assert np.array_equal(np.diag(b0), np.zeros(7))

    def test_logreg_fit(self):
        rng = np.random.default_rng(1)
        xb = np.hstack([rng.standard_normal((50, 3)), np.ones((50, 1))])
        y = rng.integers(0, 2, 50).astype(float)
        w_np, e_np, t_np = kernels.logreg_fit_numpy(xb, y, 0.1, 1e-3, 1e-8, 200)
        w_nb, e_nb, t_nb = kernels.logreg_fit_numba(xb, y, 0.1, 1e-3, 1e-8, 200)
        assert e_np == e_nb
        assert np.allclose(w_np, w_nb, rtol=1e-10, atol=1e-12)
        assert np.allclose(t_np, t_nb, rtol=1e-10, atol=1e-12)

    def test_relevance_iterate(self):
        rng = np.random.default_rng(2)
        static = rng.standard_normal(30)
        assign = rng.integers(0, 4, 30)
        for alpha in (0.0, 0.5, 1.0):
            mu_np, it_np, gap_np = kernels.relevance_iterate_numpy(
                static, assign, 4, alpha, 1e-10, 200
            )
            mu_nb, it_nb, gap_nb = kernels.relevance_iterate_numba(
                static, assign, 4, alpha, 1e-10, 200
            )
            assert it_np == it_nb
            assert np.allclose(mu_np, mu_nb, rtol=1e-10, atol=1e-14)

    def test_maxmin_greedy(self):
        rng = np.random.default_rng(3)
        feats = rng.standard_normal((25, 3))
        mind = np.sqrt(((feats - feats[0]) ** 2).sum(axis=1))
        a = kernels.maxmin_greedy_numpy(feats, mind, 10)
        b = kernels.maxmin_greedy_numba(feats, mind, 10)
        assert np.array_equal(a, b)


class TestEnvFlag:
    def test_disable_flag_selects_numpy(self):
        code = (
            "import aldisplay.kernels as k;"
            "print(k.backend(), k.sqdist_matrix is k.sqdist_matrix_numpy)"
        )
        env = dict(os.environ, ALDISPLAY_DISABLE_NUMBA="1")
        out = subprocess.run(
            [sys.executable, "-c", code], env=env, capture_output=True, text=True
        )
        assert out.stdout.split() == ["numpy", "True"]

    def test_default_selects_numba(self):
        env = {k: v for k, v in os.environ.items() if k != "ALDISPLAY_DISABLE_NUMBA"}
        code = "import aldisplay.kernels as k; print(k.backend())"
        out = subprocess.run(
            [sys.executable, "-c", code], env=env, capture_output=True, text=True
        )
        assert out.stdout.strip() == "numba"
