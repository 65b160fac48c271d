"""Second-order forward-mode jet arithmetic.

A :class:`Jet2` carries the value, gradient and Hessian of a scalar quantity
with respect to a fixed tuple of ``m`` parameters.  Every arithmetic rule is
hand-derived (no finite differences anywhere in this module), so geometric
identities built downstream see derivatives that are exact up to rounding.

The Hessian is constructed symmetric by every rule and never assembled
asymmetrically.
"""

from __future__ import annotations

import math

import numpy as np


class JetDomainError(ValueError):
    """A function was evaluated outside its domain (log of non-positive,
    sqrt of negative, tan at a pole, division by zero, bad power)."""

    def __init__(self, message: str):
        super().__init__(message)
        self.culprit: str | None = None  # offending subexpression, filled by the evaluator

    def __str__(self) -> str:
        base = super().__str__()
        if self.culprit is not None:
            return f"{base} in subexpression `{self.culprit}`"
        return base


class Jet2:
    """Truncated second-order Taylor data (value, gradient, Hessian)."""

    __slots__ = ("value", "grad", "hess")

    def __init__(self, value: float, grad: np.ndarray, hess: np.ndarray):
        self.value = float(value)
        self.grad = grad
        self.hess = hess

    @property
    def m(self) -> int:
        return self.grad.shape[0]

    @classmethod
    def constant(cls, value: float, m: int) -> "Jet2":
        return cls(value, np.zeros(m), np.zeros((m, m)))

    @classmethod
    def variable(cls, value: float, index: int, m: int) -> "Jet2":
        g = np.zeros(m)
        g[index] = 1.0
        return cls(value, g, np.zeros((m, m)))

    @property
    def is_constant(self) -> bool:
        return not self.grad.any() and not self.hess.any()

    def __repr__(self) -> str:
        return f"Jet2({self.value!r}, grad={self.grad!r})"

    # -- ring operations ----------------------------------------------------

    def __neg__(self) -> "Jet2":
        return Jet2(-self.value, -self.grad, -self.hess)

    def __add__(self, other: "Jet2") -> "Jet2":
        return Jet2(self.value + other.value, self.grad + other.grad, self.hess + other.hess)

    def __sub__(self, other: "Jet2") -> "Jet2":
        return Jet2(self.value - other.value, self.grad - other.grad, self.hess - other.hess)

    def __mul__(self, other: "Jet2") -> "Jet2":
        # (ab)'' = a''b + a'(x)b'(y) + a'(y)b'(x) + ab''
        cross = np.outer(self.grad, other.grad)
        return Jet2(
            self.value * other.value,
            self.value * other.grad + other.value * self.grad,
            self.value * other.hess + other.value * self.hess + cross + cross.T,
        )

    def __truediv__(self, other: "Jet2") -> "Jet2":
        b = other.value
        if b == 0.0:
            raise JetDomainError("division by zero")
        a = self.value
        cross = np.outer(self.grad, other.grad)
        hess = (
            self.hess / b
            - (cross + cross.T) / b**2
            - a * other.hess / b**2
            + 2.0 * a * np.outer(other.grad, other.grad) / b**3
        )
        return Jet2(a / b, self.grad / b - a * other.grad / b**2, hess)

    def __pow__(self, other: "Jet2") -> "Jet2":
        return jet_pow(self, other)

    # -- chain rule ---------------------------------------------------------

    def compose(self, f0: float, f1: float, f2: float) -> "Jet2":
        """Apply a univariate function with value f0 and derivatives f1, f2."""
        return Jet2(f0, f1 * self.grad, f1 * self.hess + f2 * np.outer(self.grad, self.grad))


def jet_pow(base: Jet2, expo: Jet2) -> Jet2:
    """Power rule with the domain policy of the expression language.

    A constant integer exponent uses polynomial semantics and accepts any
    base except 0^k for k <= 0.  Everything else requires base > 0 and goes
    through d(a^b) = a^b (b' ln a + b a'/a).
    """
    a = base.value
    if expo.is_constant:
        r = expo.value
        if r == round(r):
            k = round(r)
            if a == 0.0 and k <= 0:
                raise JetDomainError("zero base with non-positive integer exponent")
            v = a**k
            d1 = 0.0 if k == 0 else k * a ** (k - 1)
            d2 = 0.0 if k in (0, 1) else k * (k - 1) * a ** (k - 2)
            return base.compose(v, d1, d2)
        if a < 0.0:
            raise JetDomainError("negative base with non-integer exponent")
        if a == 0.0:
            if base.is_constant and r > 0:
                return Jet2.constant(0.0, base.m)
            raise JetDomainError("zero base with non-integer exponent")
        # fall through to the general rule with a constant exponent
    if a <= 0.0:
        raise JetDomainError("non-positive base with variable exponent")
    v = a**expo.value
    ln_a = math.log(a)
    # w = a^b:  w'/w = b' ln a + b a'/a
    u = expo.grad * ln_a + expo.value * base.grad / a
    du = (
        expo.hess * ln_a
        + (np.outer(expo.grad, base.grad) + np.outer(base.grad, expo.grad)) / a
        + expo.value * base.hess / a
        - expo.value * np.outer(base.grad, base.grad) / a**2
    )
    return Jet2(v, v * u, v * du + v * np.outer(u, u))


def jet_sin(x: Jet2) -> Jet2:
    s, c = math.sin(x.value), math.cos(x.value)
    return x.compose(s, c, -s)


def jet_cos(x: Jet2) -> Jet2:
    s, c = math.sin(x.value), math.cos(x.value)
    return x.compose(c, -s, -c)


def jet_tan(x: Jet2) -> Jet2:
    c = math.cos(x.value)
    if abs(c) < 1e-13:
        raise JetDomainError("tan at a pole")
    t = math.tan(x.value)
    sec2 = 1.0 + t * t
    return x.compose(t, sec2, 2.0 * t * sec2)


def jet_exp(x: Jet2) -> Jet2:
    e = math.exp(x.value)
    return x.compose(e, e, e)


def jet_log(x: Jet2) -> Jet2:
    if x.value <= 0.0:
        raise JetDomainError("log of a non-positive value")
    return x.compose(math.log(x.value), 1.0 / x.value, -1.0 / x.value**2)


def jet_sqrt(x: Jet2) -> Jet2:
    if x.value < 0.0:
        raise JetDomainError("sqrt of a negative value")
    if x.value == 0.0:
        if x.is_constant:
            return Jet2.constant(0.0, x.m)
        raise JetDomainError("sqrt at zero has no derivative")
    r = math.sqrt(x.value)
    return x.compose(r, 0.5 / r, -0.25 / (x.value * r))


FUNCTION_TABLE = {
    "sin": (jet_sin, math.sin),
    "cos": (jet_cos, math.cos),
    "tan": (jet_tan, math.tan),
    "exp": (jet_exp, math.exp),
    "log": (jet_log, math.log),
    "sqrt": (jet_sqrt, math.sqrt),
}
