import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import crandn
from risemf import _kernels
from risemf._kernels import _search_py
from risemf.config import ScenarioConfig
from risemf.simulator import RunContext

needs_ext = pytest.mark.skipif(_kernels.BACKEND != "compiled", reason="compiled kernel not built")
CTX = RunContext.build(ScenarioConfig())


def _args(ch, books, bl, br, v, weights=None, radio=CTX.radio):
    w = CTX.pixels.weight_array if weights is None else weights
    return (ch.H_direct, ch.H_ris_ap, ch.H_ue_ris, ch.h_direct_pixel, ch.h_ris_pixel, w,
            books.ris_phasors, books.precoders, books.combiners, bl, br, v,
            radio.density_factor, radio.bandwidth, radio.noise_power, radio.max_tx_power)


def test_triple_gains_against_direct_products(rng):
    ch = CTX.generator.draw(rng)
    b = CTX.books
    eff, pix = _search_py.triple_gains(ch.H_direct, ch.H_ris_ap, ch.H_ue_ris, ch.h_direct_pixel,
                                       ch.h_ris_pixel, np.array([0.7]), b.ris_phasors, b.precoders,
                                       b.combiners)
    for u, a, r in [(0, 0, 0), (3, 9, 12), (12, 1, 5)]:
        H = ch.H_direct + ch.H_ris_ap @ np.diag(b.ris_phasors[r]) @ ch.H_ue_ris
        assert eff[u, a, r] == pytest.approx(abs(np.vdot(b.combiners[a], H @ b.precoders[u])) ** 2, rel=1e-10)
        g = ch.h_direct_pixel[0] + ch.h_ris_pixel[0] @ np.diag(b.ris_phasors[r]) @ ch.H_ue_ris
        assert pix[u, r] == pytest.approx(0.7 * abs(g @ b.precoders[u]) ** 2, rel=1e-10)


@needs_ext
@given(st.integers(0, 2**32 - 1), st.floats(0, 1e7), st.floats(0, 1e7), st.floats(0, 20))
def test_backends_agree(seed, bl, br, logv):
    ch = CTX.generator.draw(np.random.default_rng(seed))
    args = _args(ch, CTX.books, bl, br, 10**logv)
    py = _kernels.search(*args, backend="python")
    ext = _kernels.search(*args, backend="compiled")
    assert py[:3] == ext[:3]
    for x, y in zip(py[3:], ext[3:]):
        assert x == pytest.approx(y, rel=1e-9, abs=1e-300)


@needs_ext
def test_backends_agree_multi_pixel(rng):
    w = np.array([0.2, 0.0, 0.8])
    for _ in range(20):
        from risemf.channel import SlotChannels
        ch = SlotChannels(1e-5 * crandn(rng, 8, 8), 1e-5 * crandn(rng, 20, 8), 1e-5 * crandn(rng, 8, 20),
                          1e-5 * crandn(rng, 3, 8), 1e-5 * crandn(rng, 3, 20))
        args = _args(ch, CTX.books, 5e6, 1e6, 1e17, weights=w)
        assert _kernels.search(*args, backend="python")[:3] == _kernels.search(*args, backend="compiled")[:3]


@pytest.mark.parametrize("backend", ["python", "compiled"])
def test_ties_go_to_lowest_index(rng, backend):
    if backend == "compiled" and _kernels.BACKEND != "compiled":
        pytest.skip("compiled kernel not built")
    b = CTX.books
    # duplicate every codebook entry: each optimum appears twice, the first copy must win
    dup = b.subset(precoders=[i for i in range(13) for _ in (0, 1)],
                   combiners=[i for i in range(13) for _ in (0, 1)],
                   ris=[i for i in range(13) for _ in (0, 1)])
    ch = CTX.generator.draw(rng)
    u, a, r, *_ = _kernels.search(*_args(ch, dup, 5e6, 1e6, 1e17), backend=backend)
    assert u % 2 == 0 and a % 2 == 0 and r % 2 == 0
    u0, a0, r0, *_ = _kernels.search(*_args(ch, b, 5e6, 1e6, 1e17), backend=backend)
    assert (u // 2, a // 2, r // 2) == (u0, a0, r0)


def test_unknown_compiled_backend_raises_when_missing(monkeypatch):
    monkeypatch.setattr(_kernels, "_compiled_search", None)
    ch = CTX.generator.draw(np.random.default_rng(0))
    with pytest.raises(RuntimeError):
        _kernels.search(*_args(ch, CTX.books, 1.0, 0.0, 1.0), backend="compiled")


def test_env_var_forces_python_backend():
    env = dict(os.environ, RISEMF_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from risemf import _kernels; print(_kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
