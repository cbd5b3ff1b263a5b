import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pharma_bertrand import _kernels
from pharma_bertrand._kernels import closed_form_batch, closed_form_kernel, count_choices

from conftest import draw_params


def table_for(params):
    return np.array([[p.alpha, p.theta, p.m, p.tx, p.c1, p.c2, p.c3, p.mu1, p.mu2] for p in params])


def test_closed_form_batch_backends_agree(rng):
    table = table_for(draw_params(rng, 2000))
    a = closed_form_batch(table, backend="numpy")
    b = closed_form_batch(table, backend="numba")
    assert a.shape == (2000, 3)
    np.testing.assert_allclose(a, b, rtol=1e-13, atol=0)


def test_closed_form_batch_matches_scalar(rng):
    table = table_for(draw_params(rng, 50))
    out = closed_form_batch(table)
    for row, prices in zip(table, out):
        assert tuple(prices) == pytest.approx(closed_form_kernel(*row), rel=1e-13)


def test_closed_form_batch_shape_check():
    with pytest.raises(ValueError):
        closed_form_batch(np.zeros((3, 8)))


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.floats(0.0, 1.0), min_size=0, max_size=200),
    st.tuples(*[st.floats(0.0, 1.0)] * 3),
    st.tuples(*[st.floats(-0.5, 1.0)] * 3),
    st.tuples(*[st.booleans()] * 3),
)
def test_count_choices_backends_agree(v, slopes, costs, offered):
    v = np.array(v, dtype=np.float64)
    a = count_choices(v, slopes, costs, offered, backend="numpy")
    b = count_choices(v, slopes, costs, offered, backend="numba")
    assert np.array_equal(a, b)
    assert a.sum() <= len(v)
    for ch in range(3):
        if not offered[ch]:
            assert a[ch] == 0


def test_tie_priority():
    v = np.array([0.5])
    # identical lines: online wins, then organized
    assert list(count_choices(v, (1.0, 1.0, 1.0), (0.1, 0.1, 0.1), (True, True, True))) == [0, 0, 1]
    assert list(count_choices(v, (1.0, 1.0, 1.0), (0.1, 0.1, 0.1), (True, True, False))) == [0, 1, 0]


def test_zero_utility_does_not_buy():
    v = np.array([0.5])
    assert count_choices(v, (1.0, 0.0, 0.0), (0.5, 0.0, 0.0), (True, False, False)).sum() == 0


def test_env_flag_selects_numpy_backend():
    env = dict(os.environ, PHARMA_BERTRAND_BACKEND="numpy")
    out = subprocess.run([sys.executable, "-c", "from pharma_bertrand import _kernels; print(_kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"


def test_env_flag_rejects_unknown_backend():
    env = dict(os.environ, PHARMA_BERTRAND_BACKEND="cuda")
    out = subprocess.run([sys.executable, "-c", "import pharma_bertrand"], env=env, capture_output=True, text=True)
    assert out.returncode != 0 and "PHARMA_BERTRAND_BACKEND" in out.stderr


def test_default_backend_is_known():
    assert _kernels.BACKEND in _kernels.IMPLEMENTATIONS
