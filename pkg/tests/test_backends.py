"""The compiled kernels must agree with the numpy fallback."""

import numpy as np
import pytest

from latspell.core import _kernels_py as P

C = pytest.importorskip(
    "latspell.core._kernels", reason="compiled kernels not built on this install"
)

RT = dict(rtol=1e-12, atol=1e-13)


def arrs(seed):
    rng = np.random.default_rng(seed)
    return {
        "W": rng.normal(size=(6, 9)),
        "b": rng.normal(size=6),
        "x": rng.normal(size=9),
        "u": rng.normal(size=4),
        "v": rng.normal(size=5),
        "a6": rng.normal(size=6),
        "b6": rng.normal(size=6),
        "g": rng.normal(size=6),
    }


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_forward_kernels_agree(seed):
    d = arrs(seed)
    assert np.allclose(P.matvec(d["W"], d["x"]), C.matvec(d["W"], d["x"]), **RT)
    assert np.allclose(
        P.affine1(d["W"], d["b"], d["x"]), C.affine1(d["W"], d["b"], d["x"]), **RT
    )
    assert np.allclose(
        P.affine2(d["W"], d["b"], d["u"], d["v"]),
        C.affine2(d["W"], d["b"], d["u"], d["v"]),
        **RT,
    )
    for name in ("sigmoid", "tanh", "one_minus", "negate"):
        assert np.allclose(getattr(P, name)(d["a6"]), getattr(C, name)(d["a6"]), **RT)
    for name in ("hadamard", "add"):
        assert np.allclose(
            getattr(P, name)(d["a6"], d["b6"]), getattr(C, name)(d["a6"], d["b6"]), **RT
        )
    assert np.allclose(P.concat2(d["u"], d["v"]), C.concat2(d["u"], d["v"]), **RT)


@pytest.mark.parametrize("seed", [0, 1])
def test_backward_kernels_agree_and_accumulate(seed):
    d = arrs(seed)

    def pair(shape):
        init = np.random.default_rng(99).normal(size=shape)  # nonzero: must accumulate
        return init.copy(), init.copy()

    gW_p, gW_c = pair((6, 9))
    gb_p, gb_c = pair(6)
    gx_p, gx_c = pair(9)
    P.affine1_bwd(d["W"], d["x"], d["g"], gW_p, gb_p, gx_p)
    C.affine1_bwd(d["W"], d["x"], d["g"], gW_c, gb_c, gx_c)
    assert np.allclose(gW_p, gW_c, **RT)
    assert np.allclose(gb_p, gb_c, **RT)
    assert np.allclose(gx_p, gx_c, **RT)

    gW_p, gW_c = pair((6, 9))
    gb_p, gb_c = pair(6)
    gu_p, gu_c = pair(4)
    gv_p, gv_c = pair(5)
    P.affine2_bwd(d["W"], d["u"], d["v"], d["g"], gW_p, gb_p, gu_p, gv_p)
    C.affine2_bwd(d["W"], d["u"], d["v"], d["g"], gW_c, gb_c, gu_c, gv_c)
    for a, b in ((gW_p, gW_c), (gb_p, gb_c), (gu_p, gu_c), (gv_p, gv_c)):
        assert np.allclose(a, b, **RT)

    y = P.sigmoid(d["a6"])
    ga_p, ga_c = pair(6)
    P.sigmoid_bwd(y, d["g"], ga_p)
    C.sigmoid_bwd(y, d["g"], ga_c)
    assert np.allclose(ga_p, ga_c, **RT)

    ga_p, ga_c = pair(6)
    gb2_p, gb2_c = pair(6)
    P.hadamard_bwd(d["a6"], d["b6"], d["g"], ga_p, gb2_p)
    C.hadamard_bwd(d["a6"], d["b6"], d["g"], ga_c, gb2_c)
    assert np.allclose(ga_p, ga_c, **RT)
    assert np.allclose(gb2_p, gb2_c, **RT)


def test_adam_and_norm_kernels_agree():
    rng = np.random.default_rng(5)
    p0 = rng.normal(size=16)
    g = rng.normal(size=16)
    m0 = np.abs(rng.normal(size=16)) * 0.01
    v0 = np.abs(rng.normal(size=16)) * 0.01

    p_p, m_p, v_p = p0.copy(), m0.copy(), v0.copy()
    p_c, m_c, v_c = p0.copy(), m0.copy(), v0.copy()
    P.adam_update(p_p, g, m_p, v_p, 3, 0.01, 0.9, 0.999, 1e-8)
    C.adam_update(p_c, g, m_c, v_c, 3, 0.01, 0.9, 0.999, 1e-8)
    assert np.allclose(p_p, p_c, **RT)
    assert np.allclose(m_p, m_c, **RT)
    assert np.allclose(v_p, v_c, **RT)

    assert P.grad_sqnorm(g) == pytest.approx(C.grad_sqnorm(g), rel=1e-12)
    s_p, s_c = g.copy(), g.copy()
    P.scale_(s_p, 0.3)
    C.scale_(s_c, 0.3)
    assert np.allclose(s_p, s_c, **RT)


def test_backend_selection_reports_name():
    from latspell.core import BACKEND

    assert BACKEND in ("python", "cython")
