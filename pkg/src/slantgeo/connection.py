"""Gauss/Weingarten objects, induced and normal connections, Lie brackets,
and covariant derivatives of the four structure blocks.

Vector fields come in two kinds.  A tangent field is given by m coefficient
functions in parameter coordinates and pushes forward through the Jacobian.
A normal field is an ambient-valued rule projected by I - P at every point;
its derivative picks up the closed-form projector derivative, so no
orthonormalized frame is ever differentiated.

With x, y the coefficient arrays of tangent fields X, Y and dx, dy their
parameter Jacobians, the ambient derivative of the pushforward of Y along X
is  Hxy + J (dy x)  where  Hxy_a = sum_ik H[a,i,k] y_i x_k.  Its tangential
part in frame coordinates is the induced connection, its normal part the
second fundamental form.  Second derivatives of the immersion are the
highest order ever required; that is a hard design boundary of this module.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dsl import ExprAst, ImmersionSpec
from .immersion import FramePoint, fields_jacobian, frame_at


# ---------------------------------------------------------------------------
# Field values


class TangentField:
    """A tangent vector field; ``at`` returns coefficients and their
    parameter derivatives (a, da) with da[i, k] = d_k a_i."""

    def at(self, fp: FramePoint) -> tuple[np.ndarray, np.ndarray]:
        # the field object itself is the key: identity hashing, and holding
        # the reference prevents id reuse from serving stale entries
        if self not in fp.cache:
            fp.cache[self] = self._eval(fp)
        return fp.cache[self]

    def _eval(self, fp: FramePoint) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def value(self, fp: FramePoint) -> np.ndarray:
        return self.at(fp)[0]


class NormalField:
    """A normal vector field; ``at`` returns the ambient value and its
    parameter derivatives (w, dw) with dw[:, k] = d_k w."""

    def at(self, fp: FramePoint) -> tuple[np.ndarray, np.ndarray]:
        if self not in fp.cache:
            fp.cache[self] = self._eval(fp)
        return fp.cache[self]

    def _eval(self, fp: FramePoint) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def value(self, fp: FramePoint) -> np.ndarray:
        return self.at(fp)[0]


class AstTangentField(TangentField):
    """Coefficients given by expressions of the parameters."""

    def __init__(self, spec: ImmersionSpec, coeffs: tuple[ExprAst, ...]):
        if len(coeffs) != spec.m:
            raise ValueError(f"expected {spec.m} coefficients, got {len(coeffs)}")
        self.spec = spec
        self.coeffs = coeffs

    def _eval(self, fp: FramePoint):
        return fields_jacobian(self.spec, self.coeffs, fp.p)


class CoordinateField(TangentField):
    """The coordinate tangent field d/du_i."""

    def __init__(self, index: int, m: int):
        self.index = index
        self.m = m

    def _eval(self, fp: FramePoint):
        a = np.zeros(self.m)
        a[self.index] = 1.0
        return a, np.zeros((self.m, self.m))


class ComboTangentField(TangentField):
    """Scalar-function combination sum_i f_i(u) E_i(u) of tangent fields."""

    def __init__(self, fields: list[TangentField], scalars: list["ScalarPoly"]):
        if len(fields) != len(scalars):
            raise ValueError("one scalar per field required")
        self.fields = fields
        self.scalars = scalars

    def _eval(self, fp: FramePoint):
        m = fp.m
        a = np.zeros(m)
        da = np.zeros((m, m))
        for f, s in zip(self.fields, self.scalars):
            e, de = f.at(fp)
            v, g = s.eval(fp.p)
            a += v * e
            da += v * de + np.outer(e, g)
        return a, da


class TImageField(TangentField):
    """The field p -> T(p) y(p) for a tangent field y."""

    def __init__(self, base: TangentField):
        self.base = base

    def _eval(self, fp: FramePoint):
        y, dy = self.base.at(fp)
        Tm, dT = _t_matrix(fp), _t_matrix_jet(fp)
        a = Tm @ y
        da = Tm @ dy + np.einsum("kij,j->ik", dT, y)
        return a, da


class BImageField(TangentField):
    """The tangent field p -> B(W(p)) for a normal field W; basis free,
    B(w) = Ginv J^T Phi w."""

    def __init__(self, base: NormalField):
        self.base = base

    def _eval(self, fp: FramePoint):
        w, dw = self.base.at(fp)
        phi = fp.phi
        Hk = np.moveaxis(fp.H, 2, 0)
        a = fp.Ginv @ (fp.J.T @ (phi @ w))
        da = np.empty((fp.m, fp.m))
        for k in range(fp.m):
            da[:, k] = (fp.dGinv[k] @ (fp.J.T @ (phi @ w))
                        + fp.Ginv @ (Hk[k].T @ (phi @ w))
                        + fp.Ginv @ (fp.J.T @ (phi @ dw[:, k])))
        return a, da


class ProjectedAmbientField(NormalField):
    """W = (I - P) r for an ambient rule r with known derivatives."""

    def __init__(self, spec: ImmersionSpec, raw: tuple[ExprAst, ...]):
        if len(raw) != spec.ambient_dim:
            raise ValueError(f"expected {spec.ambient_dim} ambient coefficients")
        self.spec = spec
        self.raw = raw

    def _eval(self, fp: FramePoint):
        r, dr = fields_jacobian(self.spec, self.raw, fp.p)  # dr is (N, m)
        Q = fp.Q
        w = Q @ r
        dw = Q @ dr - np.einsum("kab,b->ak", fp.dP, r)
        return w, dw


class FImageField(NormalField):
    """The normal field p -> F(p) y(p) for a tangent field y."""

    def __init__(self, base: TangentField):
        self.base = base

    def _eval(self, fp: FramePoint):
        y, dy = self.base.at(fp)
        phi = fp.phi
        Q = fp.Q
        Hk = np.moveaxis(fp.H, 2, 0)
        Fm = Q @ (phi @ fp.J)
        w = Fm @ y
        dw = np.empty((fp.ambient_dim, fp.m))
        for k in range(fp.m):
            dFk = -fp.dP[k] @ (phi @ fp.J) + Q @ (phi @ Hk[k])
            dw[:, k] = dFk @ y + Fm @ dy[:, k]
        return w, dw


class CImageField(NormalField):
    """The normal field p -> C(W(p)) for a normal field W; basis free,
    C(w) = (I - P) Phi w."""

    def __init__(self, base: NormalField):
        self.base = base

    def _eval(self, fp: FramePoint):
        w, dw = self.base.at(fp)
        phi = fp.phi
        Q = fp.Q
        v = Q @ (phi @ w)
        dv = Q @ (phi @ dw) - np.einsum("kab,b->ak", fp.dP, phi @ w)
        return v, dv


class XiOrthogonalField(TangentField):
    """Base field minus its Reeb component: Z - g(Z, xi) xi as a smooth field.

    Uses the closed-form derivative of xi_coords = Ginv J^T e_z, so the
    result stays exactly orthogonal to the Reeb direction at every point.
    """

    def __init__(self, base: TangentField):
        self.base = base

    def _eval(self, fp: FramePoint):
        a, da = self.base.at(fp)
        xi = fp.xi_coords
        ez = np.zeros(fp.ambient_dim)
        ez[-1] = 1.0
        Hk = np.moveaxis(fp.H, 2, 0)
        Gxi = fp.J.T @ ez                       # equals G @ xi_coords
        dxi = np.empty((fp.m, fp.m))
        dGxi = np.empty((fp.m, fp.m))
        for k in range(fp.m):
            dGxi[:, k] = Hk[k].T @ ez
            dxi[:, k] = fp.dGinv[k] @ Gxi + fp.Ginv @ dGxi[:, k]
        s = float(a @ Gxi)
        out = a - s * xi
        dout = np.empty((fp.m, fp.m))
        for k in range(fp.m):
            ds = float(da[:, k] @ Gxi) + float(a @ dGxi[:, k])
            dout[:, k] = da[:, k] - ds * xi - s * dxi[:, k]
        return out, dout


class ScalarPoly:
    """Quadratic scalar function c0 + c1.u + u^T c2 u with its gradient."""

    def __init__(self, c0: float, c1: np.ndarray, c2: np.ndarray | None = None):
        self.c0 = float(c0)
        self.c1 = np.asarray(c1, dtype=float)
        self.c2 = None if c2 is None else 0.5 * (np.asarray(c2) + np.asarray(c2).T)

    def eval(self, p: np.ndarray) -> tuple[float, np.ndarray]:
        v = self.c0 + float(self.c1 @ p)
        g = self.c1.copy()
        if self.c2 is not None:
            v += float(p @ self.c2 @ p)
            g += 2.0 * (self.c2 @ p)
        return v, g


# ---------------------------------------------------------------------------
# Frame-level operator matrices and their derivatives (cached per point)


def _cached(fp: FramePoint, key: str, build):
    if key not in fp.cache:
        fp.cache[key] = build()
    return fp.cache[key]


def _t_matrix(fp: FramePoint) -> np.ndarray:
    return _cached(fp, "Tm", lambda: fp.Ginv @ (fp.J.T @ (fp.phi @ fp.J)))


def _f_matrix(fp: FramePoint) -> np.ndarray:
    return _cached(fp, "Fm", lambda: fp.Q @ (fp.phi @ fp.J))


def _t_matrix_jet(fp: FramePoint) -> np.ndarray:
    """dT[k] = d_k Ginv J^T Phi J + Ginv d_k(J^T) Phi J + Ginv J^T Phi d_k J."""

    def build():
        phi = fp.phi
        Hk = np.moveaxis(fp.H, 2, 0)
        PhiJ = phi @ fp.J
        JtPhiJ = fp.J.T @ PhiJ
        dT = np.empty((fp.m, fp.m, fp.m))
        for k in range(fp.m):
            dT[k] = (fp.dGinv[k] @ JtPhiJ
                     + fp.Ginv @ (Hk[k].T @ PhiJ)
                     + fp.Ginv @ (fp.J.T @ (phi @ Hk[k])))
        return dT

    return _cached(fp, "dT", build)


# ---------------------------------------------------------------------------
# Point-level connection primitives


def hxy(fp: FramePoint, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Second-derivative contraction sum_ik H[:, i, k] y_i x_k (ambient)."""
    return np.einsum("aik,i,k->a", fp.H, y, x)


def nabla_at(fp: FramePoint, X: TangentField, Y: TangentField) -> np.ndarray:
    """Induced connection nabla_X Y in frame coordinates."""
    x, _ = X.at(fp)
    y, dy = Y.at(fp)
    return dy @ x + fp.Ginv @ (fp.J.T @ hxy(fp, x, y))


def dbar_at(fp: FramePoint, X: TangentField, Y: TangentField) -> np.ndarray:
    """Ambient derivative of the pushforward of Y along X."""
    x, _ = X.at(fp)
    y, dy = Y.at(fp)
    return hxy(fp, x, y) + fp.J @ (dy @ x)


def h_of(fp: FramePoint, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Second fundamental form on coefficient vectors (ambient, normal)."""
    return fp.Q @ hxy(fp, x, y)


def perp_nabla_at(fp: FramePoint, X: TangentField, W: NormalField) -> np.ndarray:
    """Normal connection nabla^perp_X W (ambient, normal)."""
    x, _ = X.at(fp)
    w, dw = W.at(fp)
    return fp.Q @ (dw @ x)


def shape_apply(fp: FramePoint, V: np.ndarray, x: np.ndarray) -> np.ndarray:
    """A_V x in frame coordinates for a normal vector V at this point."""
    M = np.einsum("aik,a->ik", fp.H, V)
    return fp.Ginv @ (M @ x)


def bracket_at(fp: FramePoint, X: TangentField, Y: TangentField) -> np.ndarray:
    """[X, Y]^k = sum_i (x_i d_i y_k - y_i d_i x_k) in parameter coordinates."""
    x, dx = X.at(fp)
    y, dy = Y.at(fp)
    return dy @ x - dx @ y


def b_apply(fp: FramePoint, w: np.ndarray) -> np.ndarray:
    return fp.Ginv @ (fp.J.T @ (fp.phi @ w))


def c_apply(fp: FramePoint, w: np.ndarray) -> np.ndarray:
    return fp.Q @ (fp.phi @ w)


def cov_T_at(fp: FramePoint, X: TangentField, Y: TangentField) -> np.ndarray:
    """(nabla_X T) Y = nabla_X (TY) - T (nabla_X Y), frame coordinates."""
    return nabla_at(fp, X, TImageField(Y)) - _t_matrix(fp) @ nabla_at(fp, X, Y)


def cov_F_at(fp: FramePoint, X: TangentField, Y: TangentField) -> np.ndarray:
    """(nabla_X F) Y = nabla^perp_X (FY) - F (nabla_X Y), ambient normal."""
    return perp_nabla_at(fp, X, FImageField(Y)) - _f_matrix(fp) @ nabla_at(fp, X, Y)


def cov_B_at(fp: FramePoint, X: TangentField, W: NormalField) -> np.ndarray:
    """(nabla_X B) W = nabla_X (BW) - B (nabla^perp_X W), frame coordinates."""
    return nabla_at(fp, X, BImageField(W)) - b_apply(fp, perp_nabla_at(fp, X, W))


def cov_C_at(fp: FramePoint, X: TangentField, W: NormalField) -> np.ndarray:
    """(nabla_X C) W = nabla^perp_X (CW) - C (nabla^perp_X W), ambient normal."""
    return perp_nabla_at(fp, X, CImageField(W)) - c_apply(fp, perp_nabla_at(fp, X, W))


# ---------------------------------------------------------------------------
# Public operations


@dataclass
class SecondFundamental:
    """h(d_i, d_j) as ambient normal vectors, symmetric in (i, j)."""

    h: np.ndarray       # (N, m, m)
    gamma: np.ndarray   # (m, m, m) induced Christoffel coefficients, gamma[:, i, j]

    def vector(self, i: int, j: int) -> np.ndarray:
        return self.h[:, i, j]


def second_fundamental(fp: FramePoint) -> SecondFundamental:
    """Normal projection of the coordinate Hessian, plus the tangential
    Christoffel part of the Gauss split J gamma + h = H."""
    h = np.einsum("ab,bij->aij", fp.Q, fp.H)
    gamma = np.einsum("kb,bij->kij", fp.Ginv @ fp.J.T, fp.H)
    return SecondFundamental(h=h, gamma=gamma)


def shape_operator(fp: FramePoint, V: np.ndarray) -> np.ndarray:
    """Shape operator A_V for a normal vector V, G-symmetric by construction."""
    V = np.asarray(V, dtype=float)
    norm = max(float(np.linalg.norm(V)), 1e-300)
    if float(np.max(np.abs(fp.P_tan @ V))) > 1e-8 * norm:
        raise ValueError("shape_operator needs a normal vector")
    M = np.einsum("aik,a->ik", fp.H, V)
    return fp.Ginv @ M


def induced_nabla(spec: ImmersionSpec, X: TangentField, Y: TangentField, p) -> np.ndarray:
    return nabla_at(frame_at(spec, p), X, Y)


def normal_nabla(spec: ImmersionSpec, X: TangentField, V: NormalField, p) -> np.ndarray:
    return perp_nabla_at(frame_at(spec, p), X, V)


def lie_bracket(spec: ImmersionSpec, X: TangentField, Y: TangentField, p) -> np.ndarray:
    return bracket_at(frame_at(spec, p), X, Y)


def covariant_ops_derivative(spec: ImmersionSpec, Z1: TangentField, target: str,
                             arg: TangentField | NormalField, p) -> np.ndarray:
    """Covariant derivative of one structure block along Z1.

    target "T" or "F" takes a tangent argument; "B" or "C" a normal one.
    T and B return frame coordinates, F and C ambient normal vectors.
    """
    fp = frame_at(spec, p)
    if target == "T":
        return cov_T_at(fp, Z1, arg)  # type: ignore[arg-type]
    if target == "F":
        return cov_F_at(fp, Z1, arg)  # type: ignore[arg-type]
    if target == "B":
        return cov_B_at(fp, Z1, arg)  # type: ignore[arg-type]
    if target == "C":
        return cov_C_at(fp, Z1, arg)  # type: ignore[arg-type]
    raise ValueError(f"unknown target {target!r}, expected one of T, F, B, C")
