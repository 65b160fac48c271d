"""Named verification suites.

Each suite evaluates a family of identities over deterministic sample
points and seeded test fields and returns a :class:`CheckReport`.  The
universal suites (gauss_weingarten, pointwise, lemma_3_5, lemma_3_6,
lemma_5_1, parallel_FB, and the expansion identities inside the
integrability/foliation suites) hold on every immersion that passes the
frame checks, so they double as an end-to-end self test of the engine.
Conditional records implement cross-implications at sample resolution and
report "vacuous" when their hypothesis never holds at tolerance.

Suites quantifying over the distributions D, D1, D2 need either declared
distributions or detected constant eigenvalue groups; otherwise they are
skipped with an explicit note.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass

import numpy as np

from .connection import (AstTangentField, BImageField, CImageField, ComboTangentField,
                         CoordinateField, FImageField, NormalField, ScalarPoly,
                         TangentField, TImageField, b_apply, bracket_at, c_apply,
                         cov_B_at, cov_C_at, cov_F_at, cov_T_at, dbar_at, h_of,
                         nabla_at, perp_nabla_at, second_fundamental, shape_apply,
                         _f_matrix, _t_matrix)
from .decomp import (EDGE_TOL, STRICT_TOL, slant_spectrum, structure_ops,
                     verify_declared_distributions, verify_pointwise_identities,
                     _declared_angle)
from .dsl import ImmersionSpec
from .immersion import FramePoint, frame_at, sample_points
from .report import CheckReport, IdentityRecord, Tolerances

SUITE_IDS = (
    "gauss_weingarten",
    "pointwise",
    "definition",
    "lemma_3_5",
    "lemma_3_6",
    "lemma_5_1",
    "integrability_D",
    "integrability_D1",
    "integrability_D2",
    "foliation_D",
    "foliation_D1",
    "foliation_D2",
    "parallel_T",
    "parallel_F",
    "parallel_FB",
)

#: tolerance for derivative-flavoured guardrails with a fixed bound
GUARD_TOL = 1e-8

#: allowed drift of a detected eigenspace projector across sample points
DETECT_TOL = 1e-7


class SuiteError(ValueError):
    """Unknown suite id or unusable suite preconditions."""


class _ConstantTangentField(TangentField):
    def __init__(self, coeffs: np.ndarray):
        self.coeffs = np.asarray(coeffs, dtype=float)

    def _eval(self, fp: FramePoint):
        return self.coeffs, np.zeros((fp.m, fp.m))


class _PolyTangentField(TangentField):
    def __init__(self, polys: list[ScalarPoly]):
        self.polys = polys

    def _eval(self, fp: FramePoint):
        m = fp.m
        a = np.empty(m)
        da = np.empty((m, m))
        for i, poly in enumerate(self.polys):
            a[i], da[i] = poly.eval(fp.p)
        return a, da


class _PolyNormalField(NormalField):
    """(I - P) applied to an ambient field with polynomial coefficients."""

    def __init__(self, polys: list[ScalarPoly]):
        self.polys = polys

    def _eval(self, fp: FramePoint):
        dim, m = fp.ambient_dim, fp.m
        r = np.empty(dim)
        dr = np.empty((dim, m))
        for a, poly in enumerate(self.polys):
            r[a], dr[a] = poly.eval(fp.p)
        w = fp.Q @ r
        dw = fp.Q @ dr - np.einsum("kab,b->ak", fp.dP, r)
        return w, dw


@dataclass
class _Distribution:
    fields: list[TangentField]
    angle: float | None         # None for the invariant slot
    source: str                 # declared | detected

    @property
    def dim(self) -> int:
        return len(self.fields)


def _rng(seed: int, *tags) -> np.random.Generator:
    entropy = [seed] + [zlib.crc32(str(t).encode()) for t in tags]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def _poly(rng: np.random.Generator, m: int, quadratic: bool = True) -> ScalarPoly:
    c0 = float(rng.uniform(0.6, 1.4)) * (1.0 if rng.uniform() < 0.5 else -1.0)
    c1 = rng.uniform(-0.5, 0.5, m)
    c2 = rng.uniform(-0.2, 0.2, (m, m)) if quadratic else None
    return ScalarPoly(c0, c1, c2)


class _Workspace:
    """Shared frames, spectra and seeded field pools for one verification run."""

    def __init__(self, spec: ImmersionSpec, count: int, seed: int, tol: Tolerances):
        self.spec = spec
        self.count = count
        self.seed = seed
        self.tol = tol
        self.points = sample_points(spec, count, seed)
        self.frames = [frame_at(spec, p) for p in self.points]
        self._spectra = None
        self._dists: dict[str, _Distribution] | None = None
        self._dist_note = ""
        m = spec.m
        rng_t = _rng(seed, "tangent-pool")
        self.tangent_pool: list[TangentField] = [
            _PolyTangentField([_poly(rng_t, m) for _ in range(m)]) for _ in range(2)]
        self.tangent_pool += [CoordinateField(i, m) for i in range(min(m, 3))]
        rng_n = _rng(seed, "normal-pool")
        self.normal_pool: list[NormalField] = []
        if spec.ambient_dim > m:
            self.normal_pool = [
                _PolyNormalField([_poly(rng_n, m, quadratic=False)
                                  for _ in range(spec.ambient_dim)])
                for _ in range(2)]

    # -- derived data -------------------------------------------------------

    @property
    def spectra(self):
        if self._spectra is None:
            self._spectra = []
            for fp in self.frames:
                ops = structure_ops(fp)
                self._spectra.append(
                    slant_spectrum(ops, fp.G, gap=self.tol.cluster_gap,
                                   xi_coords=fp.xi_coords))
        return self._spectra

    def distributions(self) -> dict[str, _Distribution]:
        if self._dists is None:
            self._dists, self._dist_note = self._resolve_distributions()
        return self._dists

    def dist_note(self) -> str:
        self.distributions()
        return self._dist_note

    def _resolve_distributions(self) -> tuple[dict[str, _Distribution], str]:
        spec = self.spec
        declared = {name for name in ("D", "D1", "D2") if name in spec.distributions}
        if declared:
            out: dict[str, _Distribution] = {}
            fp0 = self.frames[0]
            ops0 = structure_ops(fp0)
            for name in declared:
                fields = [AstTangentField(spec, comps)
                          for comps in spec.distributions[name]]
                angle = None
                if name in ("D1", "D2"):
                    angle = _declared_angle(spec, fp0, ops0, name)
                    if angle is None:
                        return {}, (f"declared distribution {name} has no uniform "
                                    f"slant angle")
                out[name] = _Distribution(fields=fields, angle=angle, source="declared")
            return out, ""
        return self._detect_distributions()

    def _detect_distributions(self) -> tuple[dict[str, _Distribution], str]:
        spectra = self.spectra
        ref = spectra[0]
        mults = tuple(g.mult for g in ref.groups)
        for sp in spectra[1:]:
            if tuple(g.mult for g in sp.groups) != mults:
                return {}, "eigenvalue clustering varies between points"
            if np.max(np.abs(sp.eigenvalues - ref.eigenvalues)) > self.tol.angle_constancy:
                return {}, "eigenvalues vary between points"
        # every group's eigenspace must be the same subspace at every point
        for gi, g in enumerate(ref.groups):
            V0 = ref.vectors[:, list(g.indices)]
            P0 = V0 @ (V0.T @ self.frames[0].G)
            for fp, sp in zip(self.frames[1:], spectra[1:]):
                gk = sp.groups[gi]
                Vk = sp.vectors[:, list(gk.indices)]
                Pk = Vk @ (Vk.T @ fp.G)
                if np.max(np.abs(Pk - P0)) > DETECT_TOL:
                    return {}, "eigenspaces vary between points"
        out: dict[str, _Distribution] = {}
        fp0 = self.frames[0]
        slant_slots: list[_Distribution] = []
        for g in ref.groups:
            V = ref.vectors[:, list(g.indices)]
            if g.value >= 1.0 - EDGE_TOL:
                out["D"] = _Distribution(
                    fields=[_ConstantTangentField(V[:, j]) for j in range(g.mult)],
                    angle=None, source="detected")
            elif g.value > EDGE_TOL:
                slant_slots.append(_Distribution(
                    fields=[_ConstantTangentField(V[:, j]) for j in range(g.mult)],
                    angle=g.angle, source="detected"))
            else:
                anti = self._anti_basis(fp0, V)
                if anti:
                    slant_slots.append(_Distribution(
                        fields=anti, angle=math.pi / 2.0, source="detected"))
        slant_slots.sort(key=lambda d: d.angle)
        if len(slant_slots) > 2:
            return {}, "more than two slant eigenvalue groups"
        for slot, dist in zip(("D1", "D2"), slant_slots):
            out[slot] = dist
        return out, ""

    def _anti_basis(self, fp: FramePoint, V: np.ndarray) -> list[TangentField]:
        """G-orthonormal basis of the zero group minus the Reeb direction."""
        xi = fp.xi_coords
        G = fp.G
        xi_n = xi / math.sqrt(float(xi @ G @ xi))
        cols = []
        W = V - np.outer(xi_n, (xi_n @ G @ V))
        for j in range(W.shape[1]):
            v = W[:, j]
            for c in cols:
                v = v - c * float(c @ G @ v)
            norm = math.sqrt(max(float(v @ G @ v), 0.0))
            if norm > 1e-8:
                cols.append(v / norm)
        return [_ConstantTangentField(c) for c in cols]

    def dist_combos(self, name: str, how_many: int = 2) -> list[TangentField]:
        """Seeded scalar-function combinations of one distribution's fields."""
        dist = self.distributions().get(name)
        if dist is None:
            return []
        rng = _rng(self.seed, "combo", name)
        out = []
        for _ in range(how_many):
            out.append(ComboTangentField(
                dist.fields, [_poly(rng, self.spec.m) for _ in dist.fields]))
        return out

    def sin2(self, name: str) -> float:
        dist = self.distributions()[name]
        return math.sin(dist.angle) ** 2 if dist.angle is not None else 0.0


def _record(id_: str, resid: float, tolerance: float, points: int,
            note: str | None = None) -> IdentityRecord:
    return IdentityRecord(id=id_, points=points, max_residual=resid,
                          tolerance=tolerance, passed=resid <= tolerance, note=note)


def _conditional(id_: str, hyp: float, concl: float, tolerance: float,
                 points: int, note: str = "") -> IdentityRecord:
    prefix = f"{note}; " if note else ""
    if hyp <= tolerance:
        return IdentityRecord(
            id=id_, points=points, max_residual=concl, tolerance=tolerance,
            passed=concl <= tolerance,
            note=f"{prefix}hypothesis holds (residual {hyp:.3e})")
    return IdentityRecord(
        id=id_, points=points, max_residual=0.0, tolerance=tolerance, passed=True,
        vacuous=True, note=f"{prefix}vacuous: hypothesis residual {hyp:.3e}")


def _pairs(pool: list, k: int) -> list[tuple]:
    out = []
    for a in pool:
        for b in pool:
            out.append((a, b))
            if len(out) >= k:
                return out
    return out


# ---------------------------------------------------------------------------
# Individual suites


def _suite_gauss_weingarten(ws: _Workspace) -> CheckReport:
    tol = ws.tol
    pts = len(ws.frames)
    pairs = _pairs(ws.tangent_pool, 6)
    res = {k: 0.0 for k in ("gauss_split", "shape_h_adjoint", "weingarten_tangential",
                            "metric_compat_tangent", "metric_compat_normal",
                            "bracket_antisymmetry", "bracket_tangency")}
    for fp in ws.frames:
        sf = second_fundamental(fp)
        recon = np.einsum("ak,kij->aij", fp.J, sf.gamma) + sf.h
        res["gauss_split"] = max(res["gauss_split"], float(np.max(np.abs(recon - fp.H))))
        for X, Y in pairs:
            x, y = X.value(fp), Y.value(fp)
            hv = h_of(fp, x, y)
            for V in ws.normal_pool:
                w = V.value(fp)
                res["shape_h_adjoint"] = max(res["shape_h_adjoint"], abs(
                    float(hv @ w) - float(shape_apply(fp, w, x) @ fp.G @ y)))
            nab_xy = nabla_at(fp, X, Y)
            # d_X g(Y, Z) = g(nabla_X Y, Z) + g(Y, nabla_X Z) over Z in the pool
            for Z in ws.tangent_pool[:2]:
                z, dz = Z.at(fp)
                ydot = Y.at(fp)[1] @ x
                zdot = dz @ x
                lhs = (float(ydot @ fp.G @ z) + float(zdot @ fp.G @ y)
                       + float(y @ np.einsum("kij,k->ij", fp.dG, x) @ z))
                rhs = float(nab_xy @ fp.G @ z) + float(y @ fp.G @ nabla_at(fp, X, Z))
                res["metric_compat_tangent"] = max(res["metric_compat_tangent"],
                                                   abs(lhs - rhs))
            br = bracket_at(fp, X, Y)
            res["bracket_antisymmetry"] = max(
                res["bracket_antisymmetry"],
                float(np.max(np.abs(br + bracket_at(fp, Y, X)))))
            res["bracket_tangency"] = max(res["bracket_tangency"], float(np.max(np.abs(
                (dbar_at(fp, X, Y) - dbar_at(fp, Y, X)) - fp.J @ br))))
        for X in ws.tangent_pool[:2]:
            x = X.value(fp)
            for V in ws.normal_pool:
                w, dw = V.at(fp)
                wdot = dw @ x
                res["weingarten_tangential"] = max(
                    res["weingarten_tangential"], float(np.max(np.abs(
                        fp.P_tan @ wdot + fp.J @ shape_apply(fp, w, x)))))
                for W2 in ws.normal_pool:
                    w2, dw2 = W2.at(fp)
                    lhs = float((dw @ x) @ w2) + float(w @ (dw2 @ x))
                    rhs = (float(perp_nabla_at(fp, X, V) @ w2)
                           + float(w @ perp_nabla_at(fp, X, W2)))
                    res["metric_compat_normal"] = max(res["metric_compat_normal"],
                                                      abs(lhs - rhs))
    tols = {
        "gauss_split": STRICT_TOL,
        "shape_h_adjoint": tol.algebraic,
        "weingarten_tangential": GUARD_TOL,
        "metric_compat_tangent": GUARD_TOL,
        "metric_compat_normal": GUARD_TOL,
        "bracket_antisymmetry": 0.0,
        "bracket_tangency": GUARD_TOL,
    }
    note = None if ws.normal_pool else "no normal directions; normal records trivial"
    records = tuple(_record(k, v, tols[k], pts) for k, v in res.items())
    return CheckReport.from_records("gauss_weingarten", records, note=note)


def _suite_pointwise(ws: _Workspace) -> CheckReport:
    merged: dict[str, IdentityRecord] = {}
    for i, fp in enumerate(ws.frames):
        ops = structure_ops(fp)
        rep = verify_pointwise_identities(fp, ops, ws.spectra[i], ws.tol,
                                          seed=ws.seed + 7919 * i)
        for r in rep.records:
            prev = merged.get(r.id)
            if prev is None or r.max_residual > prev.max_residual:
                merged[r.id] = r
    records = tuple(
        IdentityRecord(id=r.id, points=len(ws.frames), max_residual=r.max_residual,
                       tolerance=r.tolerance, passed=r.passed, note=r.note)
        for r in merged.values())
    return CheckReport.from_records("pointwise", records)


def _suite_definition(ws: _Workspace) -> CheckReport:
    return verify_declared_distributions(ws.spec, ws.count, ws.seed, ws.tol)


def _suite_lemma_3_5(ws: _Workspace) -> CheckReport:
    tol = ws.tol
    pts = len(ws.frames)
    pairs = _pairs(ws.tangent_pool, 4)
    timage = {id(Y): TImageField(Y) for _, Y in pairs}
    fimage = {id(Y): FImageField(Y) for _, Y in pairs}
    r_t = r_f = 0.0
    for fp in ws.frames:
        Tm = _t_matrix(fp)
        Fm = _f_matrix(fp)
        for X, Y in pairs:
            x, y = X.value(fp), Y.value(fp)
            hv = h_of(fp, x, y)
            fy = Fm @ y
            lhs_t = nabla_at(fp, X, timage[id(Y)]) - Tm @ nabla_at(fp, X, Y)
            rhs_t = shape_apply(fp, fy, x) + b_apply(fp, hv)
            r_t = max(r_t, float(np.max(np.abs(lhs_t - rhs_t))))
            lhs_f = perp_nabla_at(fp, X, fimage[id(Y)]) - Fm @ nabla_at(fp, X, Y)
            rhs_f = c_apply(fp, hv) - h_of(fp, x, Tm @ y)
            r_f = max(r_f, float(np.max(np.abs(lhs_f - rhs_f))))
    records = (
        _record("tangential_part", r_t, tol.derivative, pts),
        _record("normal_part", r_f, tol.derivative, pts),
    )
    return CheckReport.from_records("lemma_3_5", records)


def _suite_lemma_3_6(ws: _Workspace) -> CheckReport:
    tol = ws.tol
    pts = len(ws.frames)
    if not ws.normal_pool:
        return CheckReport.skipped("lemma_3_6", "no normal directions")
    bimage = {id(W): BImageField(W) for W in ws.normal_pool}
    cimage = {id(W): CImageField(W) for W in ws.normal_pool}
    r_b = r_c = r_b_plus = 0.0
    for fp in ws.frames:
        Tm = _t_matrix(fp)
        Fm = _f_matrix(fp)
        for Z1 in ws.tangent_pool[:2]:
            z1 = Z1.value(fp)
            for W in ws.normal_pool:
                w = W.value(fp)
                a_cw = shape_apply(fp, c_apply(fp, w), z1)
                t_aw = Tm @ shape_apply(fp, w, z1)
                lhs_b = (nabla_at(fp, Z1, bimage[id(W)])
                         - b_apply(fp, perp_nabla_at(fp, Z1, W)))
                r_b = max(r_b, float(np.max(np.abs(lhs_b - (a_cw - t_aw)))))
                r_b_plus = max(r_b_plus, float(np.max(np.abs(lhs_b - (a_cw + t_aw)))))
                lhs_c = (perp_nabla_at(fp, Z1, cimage[id(W)])
                         - c_apply(fp, perp_nabla_at(fp, Z1, W)))
                rhs_c = -Fm @ shape_apply(fp, w, z1) - h_of(fp, z1, b_apply(fp, w))
                r_c = max(r_c, float(np.max(np.abs(lhs_c - rhs_c))))
    records = (
        _record("tangential_part", r_b, tol.derivative, pts,
                note=f"additive sign variant residual {r_b_plus:.3e}"),
        _record("normal_part", r_c, tol.derivative, pts),
    )
    return CheckReport.from_records("lemma_3_6", records)


def _suite_lemma_5_1(ws: _Workspace) -> CheckReport:
    tol = ws.tol
    pts = len(ws.frames)
    pairs = _pairs(ws.tangent_pool, 4)
    r_T = r_F = r_B = r_C = r_B_plus = 0.0
    have_normals = bool(ws.normal_pool)
    for fp in ws.frames:
        Tm = _t_matrix(fp)
        Fm = _f_matrix(fp)
        for Z1, Z2 in pairs:
            z1, z2 = Z1.value(fp), Z2.value(fp)
            hv = h_of(fp, z1, z2)
            r_T = max(r_T, float(np.max(np.abs(
                cov_T_at(fp, Z1, Z2)
                - shape_apply(fp, Fm @ z2, z1) - b_apply(fp, hv)))))
            r_F = max(r_F, float(np.max(np.abs(
                cov_F_at(fp, Z1, Z2)
                - c_apply(fp, hv) + h_of(fp, z1, Tm @ z2)))))
        if have_normals:
            for Z1 in ws.tangent_pool[:2]:
                z1 = Z1.value(fp)
                for W in ws.normal_pool:
                    w = W.value(fp)
                    a_cw = shape_apply(fp, c_apply(fp, w), z1)
                    t_aw = Tm @ shape_apply(fp, w, z1)
                    covb = cov_B_at(fp, Z1, W)
                    r_B = max(r_B, float(np.max(np.abs(covb - (a_cw - t_aw)))))
                    r_B_plus = max(r_B_plus, float(np.max(np.abs(covb - (a_cw + t_aw)))))
                    r_C = max(r_C, float(np.max(np.abs(
                        cov_C_at(fp, Z1, W)
                        + Fm @ shape_apply(fp, w, z1) + h_of(fp, z1, b_apply(fp, w))))))
    records = [
        _record("cov_T", r_T, tol.derivative, pts),
        _record("cov_F", r_F, tol.derivative, pts),
    ]
    if have_normals:
        records.append(_record("cov_B", r_B, tol.derivative, pts,
                               note=f"additive sign variant residual {r_B_plus:.3e}"))
        records.append(_record("cov_C", r_C, tol.derivative, pts))
    note = None if have_normals else "no normal directions; cov_B/cov_C not applicable"
    return CheckReport.from_records("lemma_5_1", records=tuple(records), note=note)


def _complement_fields(ws: _Workspace, *names: str) -> list[tuple[str, TangentField]]:
    out = []
    for name in names:
        for f in ws.dist_combos(name, 1):
            out.append((name, f))
    return out


def _suite_integrability_D(ws: _Workspace) -> CheckReport:
    tol = ws.tol
    pts = len(ws.frames)
    dists = ws.distributions()
    if "D" not in dists:
        return CheckReport.skipped("integrability_D",
                                   ws.dist_note() or "no invariant distribution")
    dpairs = _pairs(ws.dist_combos("D", 2), 2)
    zfields = _complement_fields(ws, "D1", "D2")
    r_exp = cond = concl = 0.0
    trivial = not zfields
    for fp in ws.frames:
        Tm = _t_matrix(fp)
        phiJ = fp.phi @ fp.J
        for X, Y in dpairs:
            x, y = X.value(fp), Y.value(fp)
            tx, ty = Tm @ x, Tm @ y
            nab_x_ty = nabla_at(fp, X, TImageField(Y))
            nab_y_tx = nabla_at(fp, Y, TImageField(X))
            hdiff = h_of(fp, x, ty) - h_of(fp, y, tx)
            br = bracket_at(fp, X, Y)
            for _, Z in zfields:
                z = Z.value(fp)
                lhs = float(br @ fp.G @ z)
                t_term = float((Tm @ (nab_y_tx - nab_x_ty)) @ fp.G @ z)
                h_term = float(hdiff @ (phiJ @ z))
                r_exp = max(r_exp, abs(lhs - t_term - h_term))
                cond = max(cond, abs(-t_term - h_term))
                concl = max(concl, abs(lhs))
    note = "no slant distributions; identity trivially satisfied" if trivial else None
    records = (
        _record("bracket_expansion", r_exp, tol.derivative, pts, note=note),
        _conditional("condition_implies_integrability", cond, concl,
                     tol.derivative, pts),
    )
    return CheckReport.from_records("integrability_D", records)


def _slant_suite_parts(ws: _Workspace, slot: str):
    """Common setup for the D1/D2 suites: in-slot pairs, complement fields
    split into the invariant part and the other slant part, and sin^2."""
    dists = ws.distributions()
    if slot not in dists:
        return None
    other = "D2" if slot == "D1" else "D1"
    upairs = _pairs(ws.dist_combos(slot, 2), 2)
    zp = ws.dist_combos("D", 1) if "D" in dists else []
    zo = ws.dist_combos(other, 1) if other in dists else []
    return upairs, zp, zo, ws.sin2(slot)


def _suite_integrability_slant(ws: _Workspace, slot: str) -> CheckReport:
    suite = f"integrability_{slot}"
    tol = ws.tol
    pts = len(ws.frames)
    parts = _slant_suite_parts(ws, slot)
    if parts is None:
        return CheckReport.skipped(suite, ws.dist_note() or f"no {slot} distribution")
    upairs, zp, zo, s2 = parts
    r_exp = r_lit = 0.0
    cond_e = cond_f = cond_g = concl = 0.0
    trivial = not (zp or zo)
    for fp in ws.frames:
        Tm = _t_matrix(fp)
        Fm = _f_matrix(fp)
        G = fp.G
        for U, V in upairs:
            u, v = U.value(fp), V.value(fp)
            fu, fv = Fm @ u, Fm @ v
            ftu, ftv = Fm @ (Tm @ u), Fm @ (Tm @ v)
            FV, FU = FImageField(V), FImageField(U)
            pUV = perp_nabla_at(fp, U, FV)
            pVU = perp_nabla_at(fp, V, FU)
            br = bracket_at(fp, U, V)
            a_ftv_u = shape_apply(fp, ftv, u)
            a_ftu_v = shape_apply(fp, ftu, v)
            a_fv_u = shape_apply(fp, fv, u)
            a_fu_v = shape_apply(fp, fu, v)
            for zpf in zp or [None]:
                for zof in zo or [None]:
                    if zpf is None and zof is None:
                        continue
                    zp_v = zpf.value(fp) if zpf is not None else np.zeros(fp.m)
                    zo_v = zof.value(fp) if zof is not None else np.zeros(fp.m)
                    z = zp_v + zo_v
                    f_other = Fm @ zo_v
                    lhs = s2 * float(br @ G @ z)
                    term_a = float((a_ftv_u - a_ftu_v) @ G @ z)
                    term_b = float((a_fv_u - a_fu_v) @ G @ (Tm @ z))
                    term_c = float((pUV - pVU) @ f_other)
                    r_exp = max(r_exp, abs(lhs - term_a + term_b - term_c))
                    # literal summed variant, reported but not gated
                    term_b_sum = float((a_fv_u + a_fu_v) @ G @ (Tm @ z))
                    term_c_sum = float((pUV + pVU) @ f_other)
                    r_lit = max(r_lit, abs(lhs - term_a - term_b_sum + term_c_sum))
                    cond_g = max(cond_g, abs(term_a - term_b + term_c))
                    concl = max(concl, abs(float(br @ G @ z)))
            # membership-style conditions, evaluated as projection residuals
            nab_u_tv = nabla_at(fp, U, TImageField(V))
            vec = Tm @ (nab_u_tv - a_fv_u)
            cond_e = max(cond_e, _outside_span(ws, fp, slot, vec))
            bvec = b_apply(fp, h_of(fp, u, Tm @ v) + pUV)
            cond_f = max(cond_f, math.sqrt(max(float(bvec @ G @ bvec), 0.0)))
    note = "no complementary distribution fields" if trivial else None
    records = (
        _record("bracket_expansion", r_exp, tol.derivative, pts,
                note=(note or f"literal summed variant residual {r_lit:.3e}")),
        _conditional("membership_implies_integrability",
                     max(cond_e, cond_f, cond_g), concl, tol.derivative, pts,
                     note=f"membership residuals T={cond_e:.2e} B={cond_f:.2e} "
                          f"mixed={cond_g:.2e}"),
    )
    return CheckReport.from_records(suite, records)


def _outside_span(ws: _Workspace, fp: FramePoint, slot: str, vec: np.ndarray) -> float:
    dist = ws.distributions()[slot]
    V = np.column_stack([f.value(fp) for f in dist.fields])
    GV = V.T @ fp.G @ V
    coeff = np.linalg.solve(GV, V.T @ (fp.G @ vec))
    r = vec - V @ coeff
    return math.sqrt(max(float(r @ fp.G @ r), 0.0))


def _suite_foliation_D(ws: _Workspace) -> CheckReport:
    tol = ws.tol
    pts = len(ws.frames)
    dists = ws.distributions()
    if "D" not in dists:
        return CheckReport.skipped("foliation_D",
                                   ws.dist_note() or "no invariant distribution")
    dpairs = _pairs(ws.dist_combos("D", 2), 2)
    zfields = [f for _, f in _complement_fields(ws, "D1", "D2")]
    r_tan = r_nor = 0.0
    cond = concl = 0.0
    for fp in ws.frames:
        Tm = _t_matrix(fp)
        Fm = _f_matrix(fp)
        for X, Y in dpairs:
            x = X.value(fp)
            ty = Tm @ Y.value(fp)
            nab_x_ty = nabla_at(fp, X, TImageField(Y))
            hv = h_of(fp, x, ty)
            dby = dbar_at(fp, X, Y)
            for Z in zfields:
                z = Z.value(fp)
                lhs = float(dby @ (fp.J @ z))
                rhs = float(nab_x_ty @ fp.G @ (Tm @ z)) + float(hv @ (Fm @ z))
                r_tan = max(r_tan, abs(lhs - rhs))
                cond = max(cond, abs(rhs))
                concl = max(concl, abs(lhs))
            for W in ws.normal_pool:
                w = W.value(fp)
                lhs = float(dby @ w)
                rhs = -float((Fm @ nab_x_ty + c_apply(fp, hv)) @ w)
                r_nor = max(r_nor, abs(lhs - rhs))
                cond = max(cond, abs(rhs))
                concl = max(concl, abs(lhs))
    records = (
        _record("tangent_expansion", r_tan, tol.derivative, pts,
                note=None if zfields else "no slant distributions; trivially satisfied"),
        _record("normal_expansion", r_nor, tol.derivative, pts,
                note=None if ws.normal_pool else "no normal directions"),
        _conditional("condition_implies_geodesic_leaves", cond, concl,
                     tol.derivative, pts),
    )
    return CheckReport.from_records("foliation_D", records)


def _suite_foliation_slant(ws: _Workspace, slot: str) -> CheckReport:
    suite = f"foliation_{slot}"
    tol = ws.tol
    pts = len(ws.frames)
    parts = _slant_suite_parts(ws, slot)
    if parts is None:
        return CheckReport.skipped(suite, ws.dist_note() or f"no {slot} distribution")
    upairs, zp, zo, s2 = parts
    zfields = zp + zo
    r_tan = r_nor = 0.0
    cond = concl = 0.0
    for fp in ws.frames:
        Tm = _t_matrix(fp)
        Fm = _f_matrix(fp)
        G = fp.G
        for U, V in upairs:
            u, v = U.value(fp), V.value(fp)
            fv = Fm @ v
            FV = FImageField(V)
            FTV = FImageField(TImageField(V))
            pUV = perp_nabla_at(fp, U, FV)
            pUTV = perp_nabla_at(fp, U, FTV)
            a_ftv_u = shape_apply(fp, Fm @ (Tm @ v), u)
            a_fv_u = shape_apply(fp, fv, u)
            dbuv = dbar_at(fp, U, V)
            for zpf in zp or [None]:
                for zof in zo or [None]:
                    if zpf is None and zof is None:
                        continue
                    zp_v = zpf.value(fp) if zpf is not None else np.zeros(fp.m)
                    zo_v = zof.value(fp) if zof is not None else np.zeros(fp.m)
                    z = zp_v + zo_v
                    f_other = Fm @ zo_v
                    lhs = s2 * float(dbuv @ (fp.J @ z))
                    rhs = (float(a_ftv_u @ G @ z)
                           - float(a_fv_u @ G @ (Tm @ z))
                           + float(pUV @ f_other))
                    r_tan = max(r_tan, abs(lhs - rhs))
                    cond = max(cond, abs(rhs))
                    concl = max(concl, abs(float(dbuv @ (fp.J @ z))))
            for W in ws.normal_pool:
                w = W.value(fp)
                lhs = s2 * float(dbuv @ w)
                rhs = float((Fm @ a_fv_u - pUTV - c_apply(fp, pUV)) @ w)
                r_nor = max(r_nor, abs(lhs - rhs))
                cond = max(cond, abs(rhs))
                concl = max(concl, abs(float(dbuv @ w)))
    trivial_note = None if zfields else "no complementary distribution fields"
    records = (
        _record("tangent_expansion", r_tan, tol.derivative, pts, note=trivial_note),
        _record("normal_expansion", r_nor, tol.derivative, pts,
                note=None if ws.normal_pool else "no normal directions"),
        _conditional("condition_implies_geodesic_leaves", cond, concl,
                     tol.derivative, pts),
    )
    return CheckReport.from_records(suite, records)


def _suite_parallel_T(ws: _Workspace) -> CheckReport:
    tol = ws.tol
    pts = len(ws.frames)
    dists = ws.distributions()
    if "D" not in dists:
        return CheckReport.skipped("parallel_T",
                                   ws.dist_note() or "no invariant distribution")
    dcombos = ws.dist_combos("D", 2)
    dpairs = _pairs(dcombos, 2)
    r_red = 0.0
    sup_covT = 0.0
    geod = 0.0
    for fp in ws.frames:
        for Z1, Z2 in _pairs(ws.tangent_pool, 4):
            sup_covT = max(sup_covT, float(np.max(np.abs(cov_T_at(fp, Z1, Z2)))))
        for X, Y in dpairs:
            x, y = X.value(fp), Y.value(fp)
            r_red = max(r_red, float(np.max(np.abs(
                cov_T_at(fp, X, Y) - b_apply(fp, h_of(fp, x, y))))))
            geod = max(geod, _outside_span(ws, fp, "D", nabla_at(fp, X, Y)))
    records = (
        _record("invariant_pair_reduction", r_red, tol.derivative, pts),
        _conditional("parallel_implies_geodesic", sup_covT, geod, tol.derivative, pts),
        _conditional("geodesic_implies_parallel", geod, sup_covT, tol.derivative, pts),
    )
    return CheckReport.from_records("parallel_T", records)


def _suite_parallel_F(ws: _Workspace) -> CheckReport:
    tol = ws.tol
    pts = len(ws.frames)
    if not ws.normal_pool:
        return CheckReport.skipped("parallel_F", "no normal directions")
    pairs = _pairs(ws.tangent_pool, 4)
    r_exp = 0.0
    sup_covF = 0.0
    eq_resid = 0.0
    for fp in ws.frames:
        Tm = _t_matrix(fp)
        for Z1, Z2 in pairs:
            z1, z2 = Z1.value(fp), Z2.value(fp)
            covf = cov_F_at(fp, Z1, Z2)
            sup_covF = max(sup_covF, float(np.max(np.abs(covf))))
            for V in ws.normal_pool:
                w = V.value(fp)
                combo = (float(shape_apply(fp, c_apply(fp, w), z2) @ fp.G @ z1)
                         + float(shape_apply(fp, w, z1) @ fp.G @ (Tm @ z2)))
                r_exp = max(r_exp, abs(float(covf @ w) + combo))
                eq_resid = max(eq_resid, abs(combo))
    records = (
        _record("expansion", r_exp, tol.derivative, pts),
        _conditional("parallel_implies_shape_identity", sup_covF, eq_resid,
                     tol.derivative, pts),
        _conditional("shape_identity_implies_parallel", eq_resid, sup_covF,
                     tol.derivative, pts),
    )
    return CheckReport.from_records("parallel_F", records)


def _suite_parallel_FB(ws: _Workspace) -> CheckReport:
    tol = ws.tol
    pts = len(ws.frames)
    if not ws.normal_pool:
        return CheckReport.skipped("parallel_FB", "no normal directions")
    pairs = _pairs(ws.tangent_pool, 4)
    r = 0.0
    for fp in ws.frames:
        for Z1, Z2 in pairs:
            z2 = Z2.value(fp)
            for W in ws.normal_pool:
                w = W.value(fp)
                lhs = float(cov_F_at(fp, Z1, Z2) @ w)
                rhs = -float(cov_B_at(fp, Z1, W) @ fp.G @ z2)
                r = max(r, abs(lhs - rhs))
    records = (_record("duality", r, tol.derivative, pts),)
    return CheckReport.from_records("parallel_FB", records)


_SUITES = {
    "gauss_weingarten": _suite_gauss_weingarten,
    "pointwise": _suite_pointwise,
    "definition": _suite_definition,
    "lemma_3_5": _suite_lemma_3_5,
    "lemma_3_6": _suite_lemma_3_6,
    "lemma_5_1": _suite_lemma_5_1,
    "integrability_D": _suite_integrability_D,
    "integrability_D1": lambda ws: _suite_integrability_slant(ws, "D1"),
    "integrability_D2": lambda ws: _suite_integrability_slant(ws, "D2"),
    "foliation_D": _suite_foliation_D,
    "foliation_D1": lambda ws: _suite_foliation_slant(ws, "D1"),
    "foliation_D2": lambda ws: _suite_foliation_slant(ws, "D2"),
    "parallel_T": _suite_parallel_T,
    "parallel_F": _suite_parallel_F,
    "parallel_FB": _suite_parallel_FB,
}


def run_suite(spec: ImmersionSpec, suite_id: str, count: int = 16, seed: int = 0,
              tol: Tolerances | None = None) -> CheckReport:
    """Run one named suite over deterministic sample points."""
    if suite_id not in _SUITES:
        raise SuiteError(f"unknown suite id {suite_id!r}; "
                         f"known: {', '.join(SUITE_IDS)}")
    ws = _Workspace(spec, count, seed, tol or Tolerances())
    return _SUITES[suite_id](ws)


def run_all(spec: ImmersionSpec, count: int = 16, seed: int = 0,
            tol: Tolerances | None = None) -> list[CheckReport]:
    """Run every suite in fixed order over one shared workspace."""
    ws = _Workspace(spec, count, seed, tol or Tolerances())
    return [_SUITES[sid](ws) for sid in SUITE_IDS]
