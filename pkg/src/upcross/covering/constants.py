"""Explicit constants of the covering and tower-sandwich arguments.

Ceilings and floors are taken only after evaluating their arguments with
50 significant digits, so an argument that lands just below an integer in
double precision cannot shift K or D by one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from ..errors import PreconditionError

_DPS = 50


def _mp(x) -> mpmath.mpf:
    # floats are read as the decimal they print as
    if isinstance(x, float):
        return mpmath.mpf(repr(x))
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


def vitali_constant(q: float) -> float:
    """``C = 3^(q+1) / (3^(q+1) - 1)``."""
    with mpmath.workdps(_DPS):
        t = mpmath.power(3, _mp(q) + 1)
        return float(t / (t - 1))


def _log_c(x, q) -> mpmath.mpf:
    t = mpmath.power(3, _mp(q) + 1)
    return mpmath.log(_mp(x)) / mpmath.log(t / (t - 1))


def K_constant(eps: float, q: float) -> int:
    """``K = ceil(2 log_C(4 / eps))``."""
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    with mpmath.workdps(_DPS):
        return int(mpmath.ceil(2 * _log_c(4 / _mp(eps), q)))


def Delta_constant(q: float) -> float:
    """``Delta = max(144 q, 4)``."""
    return max(144 * q, 4)


def D_constant(delta: float, q: float) -> int:
    """Thinning step ``D = q * ceil(log(2 + 576 q/delta) / (log(1+delta) - log(1+2 delta/3))) + 1``."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    with mpmath.workdps(_DPS):
        d, qq = _mp(delta), _mp(q)
        arg = mpmath.log(2 + 576 * qq / d) / (mpmath.log(1 + d) - mpmath.log(1 + 2 * d / 3))
        out = qq * mpmath.ceil(arg) + 1
    if out != int(out):
        raise ValueError("D is an integer only for integer q")
    return int(out)


def min_sandwich_length(eps: float, q: float) -> float:
    """Smallest admissible tower-sandwich length, ``2 log_C(4 / eps)``."""
    with mpmath.workdps(_DPS):
        return float(2 * _log_c(4 / _mp(eps), q))


def min_vitali_height(eps: float, q: float) -> float:
    """Height needed by the effective Vitali covering, ``1 + log_C(2 / eps)``."""
    with mpmath.workdps(_DPS):
        return float(1 + _log_c(2 / _mp(eps), q))


def sandwich_bound(L: int, eps: float, q: float, *, strict: bool = True) -> float:
    """``(1 + eps/3^(q+1))^(-floor(L/K))``.

    With ``strict`` the length condition ``L >= 2 log_C(4/eps)`` is enforced.
    """
    if strict:
        with mpmath.workdps(_DPS):
            if L < 2 * _log_c(4 / _mp(eps), q):
                raise PreconditionError("tower too short", [f"L={L} < 2 log_C(4/eps)={min_sandwich_length(eps, q):.4f}"])
    K = K_constant(eps, q)
    with mpmath.workdps(_DPS):
        return float(mpmath.power(1 + _mp(eps) / mpmath.power(3, _mp(q) + 1), -(L // K)))


def radius_ratio_bound(t: float, q: float) -> float:
    """``((1 + t) / (1 + 2t/3))^(1/q)``: radius ratio forced by a volume ratio above 1 + t."""
    if not t > 0:
        raise ValueError("t must be positive")
    with mpmath.workdps(_DPS):
        tt = _mp(t)
        return float(mpmath.power((1 + tt) / (1 + 2 * tt / 3), 1 / _mp(q)))


def vitali_fraction(q: float) -> Fraction | float:
    """Guaranteed measured Vitali coverage ``3^-(q+1)``, exact for integer ``q``."""
    if float(q).is_integer():
        return Fraction(1, 3 ** int(q + 1))
    return 3.0 ** -(q + 1)


@dataclass(frozen=True)
class CoveringConstants:
    """All constants for a growth degree ``q`` (and, where needed, eps and delta)."""

    q: float
    eps: float | None = None
    delta: float | None = None

    @property
    def C_const(self) -> float:
        return vitali_constant(self.q)

    @property
    def Delta(self) -> float:
        return Delta_constant(self.q)

    @property
    def K(self) -> int:
        if self.eps is None:
            raise ValueError("K needs eps")
        return K_constant(self.eps, self.q)

    @property
    def D(self) -> int:
        if self.delta is None:
            raise ValueError("D needs delta")
        return D_constant(self.delta, self.q)

    def as_dict(self) -> dict:
        out = {"q": self.q, "C_const": self.C_const, "Delta": self.Delta}
        if self.eps is not None:
            out.update(eps=self.eps, K=self.K)
        if self.delta is not None:
            out.update(delta=self.delta, D=self.D)
        return out


def float_K(eps: float, q: float) -> int:
    """K in plain double precision; only used to cross-check :func:`K_constant`."""
    C = 3 ** (q + 1) / (3 ** (q + 1) - 1)
    return math.ceil(2 * math.log(4 / eps) / math.log(C))
