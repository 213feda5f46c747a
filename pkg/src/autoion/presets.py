"""Run configurations for the published figure parameter sets.

Each preset is a plain dict in the CLI config format; the same documents
are shipped as JSON under ``configs/``.  The Omega ranges of the sweep
presets are a choice of ours (the figures show them only graphically).
"""

from __future__ import annotations

import copy

_CAPTION = {"gamma_a": 1.0, "gamma_b": 1.0, "E_a": 1.0, "E_b": 1.0, "E_L": 1.0, "J_ab": 0.0}
_MOLECULAR = {"q_a": 100.0, "q_b": 1.0, "gamma_a": 1e-4, "gamma_b": 1.0, "E_a": 1.0, "E_b": 1.0, "E_L": 1.0, "J_ab": 0.0}


def _spectrum(q_a, q_b, omegas, base=None):
    red = dict(base or _CAPTION)
    red.update({"q_a": q_a, "q_b": q_b, "Omega": omegas[0]})
    return {"mode": "spectrum", "reduced": red, "workflow": {"omegas": list(omegas)}}


def _sweep(reduced, lo, hi, count=200):
    red = dict(reduced)
    red.setdefault("Omega", hi)
    return {"mode": "sweep", "reduced": red, "workflow": {"omega_range": [lo, hi], "omega_count": count}}


PRESETS = {
    "fig2a": _spectrum(100.0, 100.0, [0.1, 1.0, 2.0]),
    "fig2b": _spectrum(1.0, 1.0, [0.1, 1.0, 2.0]),
    "fig4a": _spectrum(100.0, 1.0, [0.1, 1.0, 2.0]),
    "fig4b": _spectrum(1.0, 100.0, [0.1, 1.0, 2.0]),
    "fig5": _spectrum(100.0, 1.0, [0.005, 0.03, 0.05, 1.0], base=_MOLECULAR),
    "fig6": {
        "mode": "evolve",
        "reduced": {**_CAPTION, "q_a": 1.0, "q_b": 1.0, "Omega": 4.0},
        # early-time tails reach past +-8 Gamma; a wider window keeps t = 1 within 5%
        "workflow": {"times": [1.0, 5.0, 10.0, "inf"], "oracle": {"half_width": 16.0}},
    },
    "fig8a": _sweep({**_CAPTION, "q_a": 100.0, "q_b": 100.0}, 0.01, 5.0),
    "fig8b": _sweep({**_CAPTION, "q_a": 1.0, "q_b": 1.0}, 0.01, 5.0),
    "fig9": _sweep(_MOLECULAR, 0.001, 0.1),
}


def preset(name: str) -> dict:
    try:
        return copy.deepcopy(PRESETS[name])
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(sorted(PRESETS))}") from None
