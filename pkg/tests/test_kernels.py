import numpy as np
import pytest

from turbsolve import _kernels


def random_problem(nx=23, ny=17, seed=0):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((nx, ny))
    cfx = 0.1 + rng.random((nx + 1, ny))
    cfy = 0.1 + rng.random((nx, ny + 1))
    kx = np.ones(nx + 1)
    ky = np.ones(ny + 1)
    kx[0] = kx[-1] = 0.5
    ky[0] = ky[-1] = 0.5
    return v, cfx, cfy, kx, ky, 1.3 / nx, 0.8 / ny


needs_numba = pytest.mark.skipif(not _kernels.NUMBA_AVAILABLE, reason="numba not installed")


@needs_numba
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_gradients_bitwise_identical(seed):
    v, *_, hx, hy = random_problem(seed=seed)
    ax, ay = _kernels._face_gradients_numpy(v, hx, hy)
    bx, by = _kernels._face_gradients_numba(v, hx, hy)
    assert np.array_equal(ax, bx)
    assert np.array_equal(ay, by)


@needs_numba
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_matvec_bitwise_identical(seed):
    v, cfx, cfy, _, _, hx, hy = random_problem(seed=seed)
    a = _kernels._matvec_numpy(v, cfx, cfy, hx, hy)
    b = _kernels._matvec_numba(v, cfx, cfy, hx, hy)
    assert np.array_equal(a, b)


@needs_numba
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_dissipation_bitwise_identical(seed):
    v, cfx, cfy, kx, ky, hx, hy = random_problem(seed=seed)
    a = _kernels._dissipation_numpy(v, cfx, cfy, kx, ky, hx, hy)
    b = _kernels._dissipation_numba(v, cfx, cfy, kx, ky, hx, hy)
    assert np.array_equal(a, b)


def test_resolve_flag():
    assert _kernels.resolve_flag(None, available=True) is True
    assert _kernels.resolve_flag(None, available=False) is False
    assert _kernels.resolve_flag("1", available=True) is True
    assert _kernels.resolve_flag("1", available=False) is False  # cannot force what is absent
    assert _kernels.resolve_flag("0", available=True) is False
    assert _kernels.resolve_flag("off", available=True) is False
    assert _kernels.resolve_flag("auto", available=True) is True


def test_runtime_toggle_changes_nothing(monkeypatch):
    v, cfx, cfy, _, _, hx, hy = random_problem(seed=3)
    monkeypatch.setattr(_kernels, "USE_NUMBA", False)
    a = _kernels.diffusion_matvec(v, cfx, cfy, hx, hy)
    if _kernels.NUMBA_AVAILABLE:
        monkeypatch.setattr(_kernels, "USE_NUMBA", True)
    b = _kernels.diffusion_matvec(v, cfx, cfy, hx, hy)
    assert np.array_equal(a, b)
