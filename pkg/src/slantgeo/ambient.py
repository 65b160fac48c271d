"""The canonical almost contact metric structure on flat R^(2n+1).

Coordinates are interleaved (x1, y1, x2, y2, ..., xn, yn, z).  The structure
tensor acts by phi(dx_i) = dy_i, phi(dy_i) = -dx_i, phi(dz) = 0; the Reeb
field is xi = dz with eta = dz, and the metric is Euclidean.  Because all
structure tensors have constant coordinates and the metric is flat, the
parallelism identities nabla(phi) = 0 and nabla(xi) = 0 hold identically;
they are still asserted in the check suite as guardrails against sign or
layout bugs.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .report import CheckReport, IdentityRecord

#: residual bound for identities that hold to machine precision
MACHINE_TOL = 1e-14


class DimensionMismatch(ValueError):
    pass


def _check_dim(n: int, v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (2 * n + 1,):
        raise DimensionMismatch(
            f"expected an ambient vector of dimension {2 * n + 1}, got shape {v.shape}")
    return v


@lru_cache(maxsize=None)
def phi_matrix(n: int) -> np.ndarray:
    """Matrix of the structure tensor in the interleaved coordinate order."""
    dim = 2 * n + 1
    phi = np.zeros((dim, dim))
    for i in range(n):
        x, y = 2 * i, 2 * i + 1
        phi[y, x] = 1.0   # dx_i -> dy_i
        phi[x, y] = -1.0  # dy_i -> -dx_i
    phi.setflags(write=False)
    return phi


@lru_cache(maxsize=None)
def xi_vector(n: int) -> np.ndarray:
    xi = np.zeros(2 * n + 1)
    xi[-1] = 1.0
    xi.setflags(write=False)
    return xi


def phi_apply(n: int, v: np.ndarray) -> np.ndarray:
    """Apply the structure tensor to an ambient vector."""
    v = _check_dim(n, v)
    out = np.zeros_like(v)
    out[1:2 * n:2] = v[0:2 * n:2]
    out[0:2 * n:2] = -v[1:2 * n:2]
    return out


def eta_of(v: np.ndarray) -> float:
    """The contact one-form, i.e. the z-component."""
    return float(np.asarray(v, dtype=float)[-1])


def metric_g(v: np.ndarray, w: np.ndarray) -> float:
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    if v.shape != w.shape:
        raise DimensionMismatch(f"mismatched shapes {v.shape} and {w.shape}")
    return float(v @ w)


def verify_ambient_structure(n: int, trials: int = 100, seed: int = 0) -> CheckReport:
    """Check the defining identities of the structure over random vectors.

    Checks phi^2 = -I + eta (x) xi, eta(phi v) = 0, the metric compatibility
    g(phi v, phi w) = g(v, w) - eta(v) eta(w), and the constancy of phi and
    xi (their coordinate representations are position independent, so the
    flat connection annihilates them).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(np.random.SeedSequence([seed, n]))
    xi = xi_vector(n)
    phi = phi_matrix(n)
    res = {k: 0.0 for k in ("phi_square", "eta_phi", "metric_compat", "nabla_phi", "nabla_xi")}
    for _ in range(trials):
        v = rng.uniform(-1.0, 1.0, 2 * n + 1)
        w = rng.uniform(-1.0, 1.0, 2 * n + 1)
        pv = phi_apply(n, v)
        res["phi_square"] = max(res["phi_square"],
                                float(np.max(np.abs(phi_apply(n, pv) + v - eta_of(v) * xi))))
        res["eta_phi"] = max(res["eta_phi"], abs(eta_of(pv)))
        res["metric_compat"] = max(
            res["metric_compat"],
            abs(metric_g(pv, phi_apply(n, w)) - (metric_g(v, w) - eta_of(v) * eta_of(w))))
        # phi and xi are the same coordinate tensors at every point
        res["nabla_phi"] = max(res["nabla_phi"], float(np.max(np.abs(phi - phi_matrix(n)))))
        res["nabla_xi"] = max(res["nabla_xi"], float(np.max(np.abs(xi - xi_vector(n)))))
    records = tuple(
        IdentityRecord(id=name, points=trials, max_residual=value,
                       tolerance=MACHINE_TOL, passed=value <= MACHINE_TOL)
        for name, value in res.items()
    )
    return CheckReport.from_records("ambient_structure", records)
