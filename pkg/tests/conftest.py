import numpy as np
import pytest

from hopetree.linalg import as_array


def planted(m, n, support, values=None, seed=0, normalize=False):
    """Gaussian matrix and y = A x for a signal on ``support``."""
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((m, n))
    if normalize:
        a /= np.linalg.norm(a, axis=0)
    x = np.zeros(n)
    x[list(support)] = rng.standard_normal(len(support)) if values is None else values
    return a, x, a @ x


def correlated_instance(m=12, n=16, seed=0, mix_noise=0.05):
    """OMP-adversarial K=2 instance: column 2 is nearly the sum of columns 0 and 1.

    y = a0 + a1 correlates best with column 2, so OMP's first pick is wrong.
    """
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((m, n))
    a /= np.linalg.norm(a, axis=0)
    mix = a[:, 0] + a[:, 1] + mix_noise * rng.standard_normal(m)
    a[:, 2] = mix / np.linalg.norm(mix)
    x = np.zeros(n)
    x[[0, 1]] = 1.0
    return a, x, a @ x


def check_result(phi, y, res, k=None, pruning=False, per_iter=1):
    """Post-hoc RecoveryResult invariants."""
    a = as_array(phi)
    off = np.ones(a.shape[1], bool)
    off[list(res.support)] = False
    assert np.all(res.x_hat[off] == 0)
    assert len(set(res.support)) == len(res.support)
    true_res = np.linalg.norm(y - a @ res.x_hat)
    assert res.residual_norm == pytest.approx(true_res, rel=1e-10, abs=1e-12)
    if k is not None:
        if pruning:
            assert len(res.support) <= k
        else:
            assert len(res.support) <= res.iterations * per_iter


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
