"""Hypothesis strategies and a plain-numpy sampler for parameter sets."""

import numpy as np
from hypothesis import assume
from hypothesis import strategies as st

from autoion.params import SystemParams, rabi

finite = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False, allow_infinity=False)
positive = st.floats(min_value=0.05, max_value=2.0)


@st.composite
def complex_numbers(draw, scale=1.0):
    return complex(draw(finite), draw(finite)) * scale


@st.composite
def system_params(draw, pumped=True):
    """Generic parameter sets with both widths nonzero and, when ``pumped``,
    a Rabi splitting safely away from zero."""
    J = draw(positive) * np.exp(1j * draw(finite))
    V = draw(positive) * np.exp(1j * draw(finite))
    alpha = complex(draw(finite), draw(finite)) if pumped else 0.0
    p = SystemParams(
        E_a=draw(finite),
        E_b=draw(finite),
        E_L=draw(finite),
        mu_a=draw(complex_numbers()),
        mu_b=draw(complex_numbers()),
        mu=draw(positive) * np.exp(1j * draw(finite)),
        V=V,
        J=J,
        J_ab=draw(complex_numbers(0.5)),
        alpha_L=alpha,
    )
    if pumped:
        assume(rabi(p).delta_xi > 1e-3)
    return p


def random_params(rng: np.random.Generator) -> SystemParams:
    """Same distribution as :func:`system_params`, for loops that need
    hundreds of draws without shrinking."""
    def cplx(scale=1.0):
        return complex(rng.uniform(-2, 2), rng.uniform(-2, 2)) * scale

    while True:
        p = SystemParams(
            E_a=rng.uniform(-2, 2),
            E_b=rng.uniform(-2, 2),
            E_L=rng.uniform(-2, 2),
            mu_a=cplx(),
            mu_b=cplx(),
            mu=rng.uniform(0.05, 2) * np.exp(1j * rng.uniform(-2, 2)),
            V=rng.uniform(0.05, 2) * np.exp(1j * rng.uniform(-2, 2)),
            J=rng.uniform(0.05, 2) * np.exp(1j * rng.uniform(-2, 2)),
            J_ab=cplx(0.5),
            alpha_L=cplx(),
        )
        if rabi(p).delta_xi > 1e-3:
            return p
