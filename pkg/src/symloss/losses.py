"""Margin losses with symmetry, convexity, and half-line infimum metadata.

A margin loss maps a real margin z (typically y*g(x), or a score
difference for ranking) to a penalty.  A loss is *symmetric* when
l(z) + l(-z) is the same constant K for every z; the constant and the
half-line infima inf_{a>0} l(a) and inf_{a<=0} l(a) drive everything
downstream (risk decompositions, calibration checks, excess-risk
constants), so they are stored on the loss object analytically.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "Loss",
    "ZOO_NAMES",
    "make_loss",
    "zoo",
    "symmetry_defect",
    "loss_grad",
    "parse_loss_descriptor",
    "loss_descriptor",
]

ZOO_NAMES = (
    "zero_one",
    "squared",
    "hinge",
    "logistic",
    "savage",
    "ramp",
    "sigmoid",
    "unhinged",
    "barrier",
)


def _expit(t):
    """Stable 1/(1+exp(-t)); never overflows."""
    t = np.asarray(t, dtype=float)
    e = np.exp(-np.abs(t))
    return np.where(t >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


@dataclass(frozen=True)
class Loss:
    """A named margin loss and the metadata the toolkit needs about it.

    eval/deriv are vectorized callables (float or ndarray in, same out).
    ``deriv`` is None for evaluation-only losses.  ``inf_pos`` and
    ``inf_nonpos`` are the infima of eval over a>0 and a<=0; for losses
    that are unbounded below they are taken over ``clamp_domain``.
    ``clamp_domain`` also restricts minimizer grid searches.  ``argmin``
    is a canonical minimizing margin M (None when the infimum is not
    attained).  ``kinks`` lists the non-differentiable points so that
    gradient checks can stay away from them.
    """

    name: str
    params: dict = field(default_factory=dict)
    eval: Callable = None
    deriv: Callable | None = None
    symmetry_constant: float | None = None
    symmetric_band: tuple[float, float] | None = None
    inf_pos: float = 0.0
    inf_nonpos: float = 0.0
    clamp_domain: tuple[float, float] | None = None
    convex: bool = False
    recovers_eta: bool = False
    argmin: float | None = None
    minimizer_formula: str = ""
    kinks: tuple[float, ...] = ()

    @property
    def symmetric(self) -> bool:
        return self.symmetry_constant is not None


def _zero_one() -> Loss:
    # sign(0) = 0, so the loss abstains with value 0.5 at margin zero.
    return Loss(
        name="zero_one",
        eval=lambda z: 0.5 - 0.5 * np.sign(z),
        deriv=None,
        symmetry_constant=1.0,
        inf_pos=0.0,
        inf_nonpos=0.5,
        convex=False,
        recovers_eta=False,
        argmin=1.0,
        minimizer_formula="sign(eta - 1/2)",
        kinks=(0.0,),
    )


def _squared() -> Loss:
    return Loss(
        name="squared",
        eval=lambda z: (1.0 - np.asarray(z, float)) ** 2,
        deriv=lambda z: 2.0 * (np.asarray(z, float) - 1.0),
        inf_pos=0.0,
        inf_nonpos=1.0,
        convex=True,
        recovers_eta=True,
        argmin=1.0,
        minimizer_formula="2*eta - 1",
    )


def _hinge() -> Loss:
    # Kink at z=1 uses the right derivative 0.
    return Loss(
        name="hinge",
        eval=lambda z: np.maximum(0.0, 1.0 - np.asarray(z, float)),
        deriv=lambda z: np.where(np.asarray(z, float) < 1.0, -1.0, 0.0),
        inf_pos=0.0,
        inf_nonpos=1.0,
        convex=True,
        recovers_eta=False,
        argmin=1.0,
        minimizer_formula="sign(eta - 1/2)",
        kinks=(1.0,),
    )


def _logistic() -> Loss:
    return Loss(
        name="logistic",
        eval=lambda z: np.logaddexp(0.0, -np.asarray(z, float)),
        deriv=lambda z: -_expit(-np.asarray(z, float)),
        inf_pos=0.0,
        inf_nonpos=float(np.log(2.0)),
        convex=True,
        recovers_eta=True,
        argmin=None,
        minimizer_formula="log(eta / (1 - eta))",
    )


def _savage() -> Loss:
    def ev(z):
        return _expit(-2.0 * np.asarray(z, float)) ** 2

    def de(z):
        z = np.asarray(z, float)
        return -4.0 * _expit(-2.0 * z) ** 2 * _expit(2.0 * z)

    return Loss(
        name="savage",
        eval=ev,
        deriv=de,
        inf_pos=0.0,
        inf_nonpos=0.25,
        convex=False,
        recovers_eta=True,
        argmin=None,
        minimizer_formula="0.5*log(eta / (1 - eta))",
    )


def _ramp() -> Loss:
    # Flat outside [-1, 1]; at both kinks the flat-side derivative 0 is used.
    def de(z):
        z = np.asarray(z, float)
        return np.where((z > -1.0) & (z < 1.0), -0.5, 0.0)

    return Loss(
        name="ramp",
        eval=lambda z: np.maximum(0.0, np.minimum(1.0, 0.5 - 0.5 * np.asarray(z, float))),
        deriv=de,
        symmetry_constant=1.0,
        inf_pos=0.0,
        inf_nonpos=0.5,
        clamp_domain=(-1.0, 1.0),
        convex=False,
        recovers_eta=False,
        argmin=1.0,
        minimizer_formula="sign(eta - 1/2)",
        kinks=(-1.0, 1.0),
    )


def _sigmoid() -> Loss:
    def de(z):
        s = _expit(-np.asarray(z, float))
        return -s * (1.0 - s)

    return Loss(
        name="sigmoid",
        eval=lambda z: _expit(-np.asarray(z, float)),
        deriv=de,
        symmetry_constant=1.0,
        inf_pos=0.0,
        inf_nonpos=0.5,
        clamp_domain=(-1.0, 1.0),
        convex=False,
        recovers_eta=False,
        argmin=1.0,
        minimizer_formula="sign(eta - 1/2)",
    )


def _unhinged() -> Loss:
    # Negatively unbounded; infima are taken on the clamp domain [-1, 1].
    return Loss(
        name="unhinged",
        eval=lambda z: 1.0 - np.asarray(z, float),
        deriv=lambda z: np.full_like(np.asarray(z, float), -1.0),
        symmetry_constant=2.0,
        inf_pos=0.0,
        inf_nonpos=1.0,
        clamp_domain=(-1.0, 1.0),
        convex=True,
        recovers_eta=False,
        argmin=1.0,
        minimizer_formula="sign(eta - 1/2)",
    )


def _barrier(b: float, r: float) -> Loss:
    """max(-b(r+z)+r, max(b(z-r), r-z)): a convex hinge with steep walls.

    On [-r, r] the middle piece r-z is active, so l(z)+l(-z) = 2r there
    (symmetric band).  Outside, the slope-b walls give a large penalty
    that pushes margins back into the band.  The left kink sits at
    -b*r/(b-1), slightly left of -r; both kinks take the steep-side
    subgradient (-b and +b).
    """
    if not b > 1.0:
        raise ValueError(f"barrier loss needs b > 1, got b={b}")
    if not r > 0.0:
        raise ValueError(f"barrier loss needs r > 0, got r={r}")
    z_left = -b * r / (b - 1.0)

    def ev(z):
        z = np.asarray(z, float)
        return np.maximum(-b * (r + z) + r, np.maximum(b * (z - r), r - z))

    def de(z):
        z = np.asarray(z, float)
        return np.where(z <= z_left, -b, np.where(z < r, -1.0, b))

    return Loss(
        name="barrier",
        params={"b": float(b), "r": float(r)},
        eval=ev,
        deriv=de,
        symmetric_band=(-r, r),
        inf_pos=0.0,
        inf_nonpos=float(r),
        convex=True,
        recovers_eta=False,
        argmin=float(r),
        minimizer_formula="r*sign(eta - 1/2)",
        kinks=(z_left, float(r)),
    )


_FACTORIES = {
    "zero_one": _zero_one,
    "squared": _squared,
    "hinge": _hinge,
    "logistic": _logistic,
    "savage": _savage,
    "ramp": _ramp,
    "sigmoid": _sigmoid,
    "unhinged": _unhinged,
}


def make_loss(name: str, **params) -> Loss:
    """Construct a zoo loss by name.

    The barrier loss takes ``b`` (wall slope, > 1) and ``r`` (band
    half-width, > 0); they default to b=200, r=50.  All other losses
    take no parameters.
    """
    if name == "barrier":
        known = {"b", "r"}
        extra = set(params) - known
        if extra:
            raise ValueError(f"unknown barrier parameter(s): {sorted(extra)}")
        return _barrier(b=params.get("b", 200.0), r=params.get("r", 50.0))
    if name not in _FACTORIES:
        raise ValueError(f"unknown loss name: {name!r} (expected one of {ZOO_NAMES})")
    if params:
        raise ValueError(f"loss {name!r} takes no parameters, got {sorted(params)}")
    return _FACTORIES[name]()


def zoo() -> list[Loss]:
    """All nine zoo losses, with default barrier parameters."""
    return [make_loss(n) for n in ZOO_NAMES]


def symmetry_defect(loss: Loss, z) -> float:
    """l(z) + l(-z); equals K everywhere for a symmetric loss."""
    z = np.asarray(z, float)
    return loss.eval(z) + loss.eval(-z)


def loss_grad(loss: Loss, z) -> float:
    """A subderivative of the loss at z (documented one-sided choice at kinks)."""
    if loss.deriv is None:
        raise ValueError(
            f"loss {loss.name!r} is evaluation-only and has no gradient"
        )
    return loss.deriv(z)


_DESCRIPTOR_RE = re.compile(r"^\s*([a-z_][a-z0-9_]*)\s*(?:\((.*)\))?\s*$")


def parse_loss_descriptor(text: str) -> Loss:
    """Parse ``name`` or ``name(param=value,...)`` into a Loss.

    Examples: ``sigmoid``, ``barrier(b=200,r=50)``.
    """
    m = _DESCRIPTOR_RE.match(text)
    if m is None:
        raise ValueError(f"malformed loss descriptor: {text!r}")
    name, arglist = m.group(1), m.group(2)
    params = {}
    if arglist is not None and arglist.strip():
        for item in arglist.split(","):
            if "=" not in item:
                raise ValueError(
                    f"malformed parameter {item.strip()!r} in loss descriptor {text!r}"
                )
            key, _, value = item.partition("=")
            try:
                params[key.strip()] = float(value)
            except ValueError:
                raise ValueError(
                    f"non-numeric value for {key.strip()!r} in loss descriptor {text!r}"
                ) from None
    return make_loss(name, **params)


def loss_descriptor(loss: Loss) -> str:
    """Canonical descriptor string (inverse of parse_loss_descriptor)."""
    if not loss.params:
        return loss.name
    inner = ",".join(f"{k}={loss.params[k]:g}" for k in sorted(loss.params))
    return f"{loss.name}({inner})"
