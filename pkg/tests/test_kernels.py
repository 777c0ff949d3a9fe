import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from logsl import _kernels
from logsl.resonance import multiset_table


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31), st.floats(-2, 2), st.floats(0.0, 1.0), st.floats(-2, 2))
def test_substep_backends_agree(seed, c1, decay, c2):
    rng = np.random.default_rng(seed)
    v = (0.1 + rng.random(200) * 3) * np.exp(1j * rng.uniform(-math.pi, math.pi, 200))
    a, ma, pa = _kernels.nonlinear_substep_numba(v, c1, decay, c2)
    b, mb, pb = _kernels.nonlinear_substep_numpy(v, c1, decay, c2)
    assert np.abs(a - b).max() < 1e-12
    assert ma == pytest.approx(mb, rel=1e-15)
    assert pa == pytest.approx(pb, abs=1e-12)


@pytest.mark.parametrize("impl", [_kernels.nonlinear_substep_numba, _kernels.nonlinear_substep_numpy])
def test_wrapped_phase_in_principal_range(impl):
    v = np.exp(1j * np.linspace(-3, 3, 41)) * np.linspace(0.2, 5, 41)
    out, _, max_phase = impl(v, 7.3, 0.5, 0.0)
    assert max_phase <= math.pi
    assert np.allclose(np.abs(out), np.abs(v))


@pytest.mark.parametrize("lam,r,n_max", [(0.5, 3, 9), (0.23, 4, 8), (1.7, 5, 5)])
def test_scan_backends_agree(lam, r, n_max):
    _, sums, top3, off = multiset_table(lam, r, n_max)
    a = _kernels.divisor_scan_numba(sums, top3, off, r, n_max, 1e-13)
    b = _kernels.divisor_scan_numpy(sums, top3, off, r, n_max, 1e-13, chunk=7)
    for x, y in zip(a[:4], b[:4]):
        assert np.array_equal(x, y)
    assert a[4:] == b[4:]


def test_env_flag_selects_numpy_backend():
    code = "from logsl import _kernels as k; print(k.nonlinear_substep is k.nonlinear_substep_numpy)"
    for flag, expected in (("1", "True"), ("0", "False")):
        env = dict(os.environ, LOGSL_DISABLE_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        assert out.stdout.strip() == expected
