"""Frames of a parametric immersion: Jacobian, Hessian, induced metric,
tangential projector, normal basis, and their closed-form derivatives.

All first and second derivatives come from jet evaluation of the coordinate
expressions.  Derivatives of derived operators (the inverse metric and the
tangential projector) use d(G^-1) = -G^-1 dG G^-1 and the product rule, so
nothing in this module differentiates numerically, and nothing
differentiates through the orthonormalized normal frame (Gram-Schmidt is
not smoothly stable under pivot swaps; the projector is basis free).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ambient import phi_matrix, xi_vector
from .dsl import ExprAst, ImmersionSpec, eval_jet2
from .jets import Jet2

#: relative eigenvalue floor of the induced metric below which the map is
#: declared not an immersion (condition number above 1e12)
RANK_RTOL = 1e-12

#: allowed residual of J @ xi_coords - xi
XI_TANGENCY_TOL = 1e-8


class ImmersionError(ValueError):
    """The map fails an immersion-side invariant at a concrete point."""

    def __init__(self, message: str, point: np.ndarray | None = None):
        self.point = None if point is None else np.asarray(point, dtype=float)
        if point is not None:
            message = f"{message} at p={np.asarray(point).tolist()}"
        super().__init__(message)


@dataclass
class FramePoint:
    """Per-point bundle of immersion data.

    Treat instances as immutable; ``cache`` holds field evaluations keyed by
    field identity and is an implementation detail.
    """

    p: np.ndarray          # (m,) parameter point
    x: np.ndarray          # (N,) image point, N = 2n+1
    J: np.ndarray          # (N, m) Jacobian, column j = pushforward of d/du_j
    H: np.ndarray          # (N, m, m) Hessian tensor, symmetric in the last two axes
    G: np.ndarray          # (m, m) induced metric J^T J
    Ginv: np.ndarray       # (m, m)
    P_tan: np.ndarray      # (N, N) tangential projector J Ginv J^T
    N: np.ndarray          # (N, N-m) orthonormal basis of the normal space
    xi_coords: np.ndarray  # (m,) coordinates of xi in the tangent frame
    n: int                 # ambient half-dimension
    dG: np.ndarray         # (m, m, m), dG[k] = d_k G
    dGinv: np.ndarray      # (m, m, m)
    dP: np.ndarray         # (m, N, N), dP[k] = d_k P_tan
    cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def m(self) -> int:
        return self.p.shape[0]

    @property
    def ambient_dim(self) -> int:
        return self.x.shape[0]

    @property
    def codim(self) -> int:
        return self.ambient_dim - self.m

    @property
    def Q(self) -> np.ndarray:
        """Normal projector I - P_tan."""
        return np.eye(self.ambient_dim) - self.P_tan

    @property
    def phi(self) -> np.ndarray:
        return phi_matrix(self.n)

    def g_tan(self, a: np.ndarray, b: np.ndarray) -> float:
        """Induced inner product of tangent vectors given in frame coordinates."""
        return float(a @ self.G @ b)


def _coordinate_jets(spec: ImmersionSpec, p: np.ndarray) -> list[Jet2]:
    jets = []
    zero = Jet2.constant(0.0, spec.m)
    for ast in spec.coords:
        jets.append(zero if ast is None else eval_jet2(ast, p, spec.constants))
    return jets


def frame_at(spec: ImmersionSpec, p) -> FramePoint:
    """Evaluate the frame bundle at a parameter point.

    Raises :class:`ImmersionError` when the Jacobian loses rank or when the
    Reeb direction is not tangent (the whole framework assumes xi in TM).
    """
    p = np.asarray(p, dtype=float)
    if p.shape != (spec.m,):
        raise ValueError(f"point has shape {p.shape}, expected ({spec.m},)")
    dim, m = spec.ambient_dim, spec.m
    jets = _coordinate_jets(spec, p)
    x = np.array([j.value for j in jets])
    J = np.array([j.grad for j in jets])
    H = np.array([j.hess for j in jets])
    H = 0.5 * (H + np.swapaxes(H, 1, 2))  # jets build symmetric Hessians; enforce bit-exactness

    G = J.T @ J
    eig = np.linalg.eigvalsh(G)
    if eig[0] < RANK_RTOL * max(eig[-1], 1e-300):
        raise ImmersionError(
            f"not an immersion: induced metric is rank deficient "
            f"(eigenvalue ratio {eig[0] / max(eig[-1], 1e-300):.2e})", p)
    Ginv = np.linalg.inv(G)
    P = J @ Ginv @ J.T

    xi = xi_vector(spec.n)
    xi_coords = Ginv @ (J.T @ xi)
    tangency = float(np.max(np.abs(J @ xi_coords - xi)))
    if tangency > XI_TANGENCY_TOL:
        raise ImmersionError(
            f"xi not tangent: invariant J @ xi_coords == xi fails "
            f"(residual {tangency:.2e})", p)

    # d_k J is the k-slice of the Hessian tensor
    Hk = np.moveaxis(H, 2, 0)                       # (m, N, m)
    dG = np.einsum("kai,aj->kij", Hk, J)
    dG = dG + np.swapaxes(dG, 1, 2)
    dGinv = -np.einsum("ij,kjl,lm->kim", Ginv, dG, Ginv)
    JG = J @ Ginv
    dP = (np.einsum("kai,ib->kab", Hk, JG.T)
          + np.einsum("ai,kij,bj->kab", J, dGinv, J)
          + np.einsum("ai,kbi->kab", JG, Hk))

    N = _normal_basis(P, m)

    return FramePoint(p=p, x=x, J=J, H=H, G=G, Ginv=Ginv, P_tan=P, N=N,
                      xi_coords=xi_coords, n=spec.n, dG=dG, dGinv=dGinv, dP=dP)


def _normal_basis(P: np.ndarray, m: int) -> np.ndarray:
    """Orthonormal basis of ker(P) by pivoted orthogonalization of I - P.

    Column order is fixed by pivot magnitude, ties broken by lowest index,
    so the basis is a deterministic function of the projector.
    """
    dim = P.shape[0]
    codim = dim - m
    R = np.eye(dim) - P
    cols = []
    for _ in range(codim):
        norms = np.linalg.norm(R, axis=0)
        piv = int(np.argmax(norms))  # argmax takes the first maximum
        if norms[piv] < 1e-10:
            raise ImmersionError("normal space collapsed during orthogonalization")
        q = R[:, piv] / norms[piv]
        for prev in cols:            # one re-orthogonalization pass
            q = q - prev * (prev @ q)
        q = q / np.linalg.norm(q)
        cols.append(q)
        R = R - np.outer(q, q @ R)
    if codim == 0:
        return np.zeros((dim, 0))
    return np.column_stack(cols)


def tangential_projector_jet(spec: ImmersionSpec, p, direction: int) -> np.ndarray:
    """Closed-form partial derivative of the tangential projector along one
    parameter direction."""
    fp = frame_at(spec, p)
    if not 0 <= direction < fp.m:
        raise ValueError(f"direction {direction} out of range for m={fp.m}")
    return fp.dP[direction]


# ---------------------------------------------------------------------------
# Deterministic sampling

_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47,
           53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107)


def _scrambled_vdc(index: int, base: int, mult: int) -> float:
    """Van der Corput radical inverse with a multiplicative digit scramble.

    The scramble maps digit 0 to 0, so index 0 always lands on 0 regardless
    of the seed; shifted by one half below, that pins the first sample to
    the box center.
    """
    value, denom = 0.0, 1.0
    while index > 0:
        index, digit = divmod(index, base)
        denom *= base
        value += ((digit * mult) % base) / denom
    return value


def sample_points(spec: ImmersionSpec, count: int, seed: int = 0) -> list[np.ndarray]:
    """Low-discrepancy points strictly inside the domain box.

    The box is shrunk by 1 percent per side, the first point is always the
    center, and identical (spec, count, seed) yield identical lists.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    m = spec.m
    if m > len(_PRIMES):
        raise ValueError(f"too many parameters for the sampler ({m})")
    rng = np.random.default_rng(np.random.SeedSequence([seed, m]))
    mults = [1 + int(rng.integers(0, _PRIMES[j] - 1)) for j in range(m)]
    lo = np.array([a for a, _ in spec.domain])
    hi = np.array([b for _, b in spec.domain])
    width = hi - lo
    lo_s = lo + 0.01 * width
    width_s = 0.98 * width
    points = []
    for i in range(count):
        t = np.array([math.modf(_scrambled_vdc(i, _PRIMES[j], mults[j]) + 0.5)[0]
                      for j in range(m)])
        points.append(lo_s + t * width_s)
    return points


def fields_jacobian(spec: ImmersionSpec, asts: tuple[ExprAst, ...], p: np.ndarray
                    ) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate a tuple of coefficient expressions and their first
    derivatives: returns (values (k,), grads (k, m))."""
    vals, grads = [], []
    for ast in asts:
        jet = eval_jet2(ast, p, spec.constants)
        vals.append(jet.value)
        grads.append(jet.grad)
    return np.array(vals), np.array(grads)
