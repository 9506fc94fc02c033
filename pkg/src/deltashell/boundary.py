"""Delta-shell boundary solver: single-layer operator and the coupled system.

The total field for a potential V plus a surface interaction of strength
alpha on Gamma satisfies, in discretized form, the single block system

    psi_i + sum_j G_ij V_j psi_j + sum_q SLvol_iq eta_q = psi0(c_i)   (cells)
    eta_q = alpha_q * [ psi0(x_q) - sum_j Tr_qj V_j psi_j
                                  - sum_p S_qp eta_p ]                (panels)

in the unknowns (psi on grid cells, eta on panels), where eta is the
surface density alpha * trace(psi) (equal to the jump of the normal
derivative of psi across Gamma).  All blocks use the outgoing kernel.

Quadrature:

* off-panel entries use the symmetric 3-point Gauss rule per flat triangle;
* panel pairs (or evaluation points) closer than a few panel diameters are
  re-integrated on a uniformly subdivided triangle (fixed depth per
  distance bucket, fully batched);
* the collocation self-entry splits the kernel as
  1/(4 pi r) + (e^{ikr} - 1)/(4 pi r): the first term is integrated in
  closed form over the flat triangle from its centroid, the second
  (bounded) term by the base rule.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from ._dense import ExceptionalFrequencyError, GuardedLU  # noqa: F401 (re-export)
from .geometry import SurfaceMesh, triangle_rule
from .kernels import IncidentField, eval_incident
from .volume import (
    PotentialSample,
    VolumeField,
    assemble_volume_operator,
    ball_self_term,
    volume_potential,
)

__all__ = [
    "DeltaSpec",
    "BoundaryDensity",
    "DeltaSolution",
    "DeltaSystem",
    "assemble_single_layer",
    "layer_potential",
    "layer_potential_gradient",
    "solve_delta_system",
    "eval_total_field",
    "eval_scattered_field",
    "eval_scattered_gradient",
    "check_jump_relation",
    "static_self_integrals",
    "density_to_csv_rows",
]

MAX_PANELS = 8192
_CHUNK = 2**22

# near-field buckets: centroid distance below ratio * panel diameter
# triggers uniform subdivision to the given depth (4**depth subtriangles)
_NEAR_BUCKETS = ((0.2, 6), (0.45, 5), (0.9, 4), (1.6, 3), (2.8, 2))
_SELF_TOL = 1e-12


# ---------------------------------------------------------------------------
# Data types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DeltaSpec:
    """Surface strength alpha sampled per panel (real, units 1/length)."""

    mesh: SurfaceMesh
    alpha: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=float)
        if a.shape == ():
            a = np.full(self.mesh.n_panels, float(a))
        if a.shape != (self.mesh.n_panels,):
            raise ValueError("alpha must provide one value per panel")
        if not np.all(np.isfinite(a)):
            raise ValueError("alpha has non-finite values")
        object.__setattr__(self, "alpha", a)

    def lp_norm(self, p: float = 4.0) -> float:
        """Discrete L^p(Gamma) norm of alpha (reported, not enforced)."""
        return float(np.sum(self.mesh.panel_area * np.abs(self.alpha) ** p) ** (1.0 / p))

    @property
    def is_zero(self) -> bool:
        return not np.any(self.alpha)


@dataclass(frozen=True)
class BoundaryDensity:
    """eta = alpha * trace(psi) per panel; the normal-derivative jump of psi."""

    mesh: SurfaceMesh
    eta: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.eta, dtype=complex)
        if e.shape != (self.mesh.n_panels,):
            raise ValueError("eta must provide one value per panel")
        if not np.all(np.isfinite(e)):
            raise ValueError("eta has non-finite values")
        object.__setattr__(self, "eta", e)


# ---------------------------------------------------------------------------
# Flat-triangle quadrature helpers
# ---------------------------------------------------------------------------

def static_self_integrals(mesh: SurfaceMesh) -> np.ndarray:
    """Closed-form int_panel dsigma(y) / (4 pi |c - y|) from each centroid c.

    The panel is split into three subtriangles at the centroid; for a
    subtriangle with apex c and opposite edge AB the radial integral reduces
    to d * (asinh(t_B/d) - asinh(t_A/d)) with d the apex-edge distance and
    t the signed coordinates of A, B along the edge from the foot point.
    """
    v0, v1, v2 = mesh.corners()
    c = mesh.panel_centroid
    total = np.zeros(mesh.n_panels)
    for a, b in ((v0, v1), (v1, v2), (v2, v0)):
        u = b - a
        length = np.linalg.norm(u, axis=1)
        u = u / length[:, None]
        t_a = np.einsum("ij,ij->i", a - c, u)
        t_b = t_a + length
        foot = a + (np.einsum("ij,ij->i", c - a, u))[:, None] * u
        d = np.linalg.norm(c - foot, axis=1)
        total += d * (np.arcsinh(t_b / d) - np.arcsinh(t_a / d))
    return total / (4.0 * np.pi)


def _subdivide(corners: np.ndarray, depth: int) -> np.ndarray:
    """Uniformly subdivide triangles (m, 3, 3) -> (m * 4**depth, 3, 3)."""
    tris = corners
    for _ in range(depth):
        a, b, c = tris[:, 0], tris[:, 1], tris[:, 2]
        ab, bc, ca = (a + b) / 2, (b + c) / 2, (c + a) / 2
        tris = np.concatenate(
            [
                np.stack([a, ab, ca], axis=1),
                np.stack([b, bc, ab], axis=1),
                np.stack([c, ca, bc], axis=1),
                np.stack([ab, bc, ca], axis=1),
            ],
            axis=0,
        )
    return tris


def _tri_quad(corners: np.ndarray, rule: str):
    """Quadrature points (m, g, 3) and areas (m,) of a corner array."""
    bary, w = triangle_rule(rule)
    a, b, c = corners[:, 0], corners[:, 1], corners[:, 2]
    pts = (
        bary[None, :, 0, None] * a[:, None, :]
        + bary[None, :, 1, None] * b[:, None, :]
        + bary[None, :, 2, None] * c[:, None, :]
    )
    areas = 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)
    return pts, areas, w


def _kernel(r: np.ndarray, k: float) -> np.ndarray:
    return np.exp(1j * k * r) / (4.0 * np.pi * r)


def _pair_integrals(points: np.ndarray, corners: np.ndarray, k: float, depth: int,
                    rule: str, grad: bool) -> np.ndarray:
    """Refined integral of the kernel (or its x-gradient) per (point, panel) pair.

    points (m, 3) pairs one-to-one with corners (m, 3, 3).
    """
    m = len(points)
    out = np.zeros((m, 3) if grad else m, dtype=complex)
    n_sub = 4**depth
    chunk = max(1, _CHUNK // (n_sub * 3))
    for start in range(0, m, chunk):
        stop = min(start + chunk, m)
        p = stop - start
        sub = _subdivide(corners[start:stop], depth)          # (nsub*p, 3, 3), p fastest
        pts, areas, w = _tri_quad(sub, rule)
        pts = pts.reshape(n_sub, p, -1, 3).transpose(1, 0, 2, 3)   # (p, nsub, g, 3)
        areas = areas.reshape(n_sub, p).T                          # (p, nsub)
        d = points[start:stop, None, None, :] - pts
        r = np.sqrt(np.einsum("...i,...i->...", d, d))
        if grad:
            g = np.exp(1j * k * r) * (1j * k * r - 1.0) / (4.0 * np.pi * r**3)
            out[start:stop] = np.einsum("psg,psgi,g,ps->pi", g, d, w, areas + 0j)
        else:
            kv = _kernel(r, k)
            out[start:stop] = np.einsum("psg,g,ps->p", kv, w, areas + 0j)
    return out


def _layer_matrix(points: np.ndarray, mesh: SurfaceMesh, k: float, rule: str = "gauss3") -> np.ndarray:
    """Matrix M[i, q] ~ int_{panel q} e^{ik|x_i - y|}/(4 pi |x_i - y|) dsigma(y).

    Base rule everywhere, near buckets re-integrated on subdivided panels,
    exact centroid hits (collocation points) via the analytic static split.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n, m = len(points), mesh.n_panels
    qpts, w = mesh.quadrature_points(rule)                    # (m, g, 3), (g,)
    areas = mesh.panel_area
    out = np.empty((n, m), dtype=complex)

    near_i: list[np.ndarray] = []
    near_q: list[np.ndarray] = []
    near_depth: list[np.ndarray] = []
    self_i: list[np.ndarray] = []
    self_q: list[np.ndarray] = []

    rows_per_chunk = max(1, _CHUNK // max(m * len(w), 1))
    for start in range(0, n, rows_per_chunk):
        stop = min(start + rows_per_chunk, n)
        x = points[start:stop]
        d = x[:, None, None, :] - qpts[None, :, :, :]
        r = np.sqrt(np.einsum("...i,...i->...", d, d))
        r = np.maximum(r, 1e-290)
        out[start:stop] = np.einsum("img,g->im", _kernel(r, k), w) * areas[None, :]

        dist = np.linalg.norm(x[:, None, :] - mesh.panel_centroid[None, :, :], axis=-1)
        ratio = dist / mesh.panel_diameter[None, :]
        on_centroid = dist < _SELF_TOL
        if np.any(on_centroid):
            ii, qq = np.nonzero(on_centroid)
            self_i.append(ii + start)
            self_q.append(qq)
        assigned = on_centroid.copy()
        for threshold, depth in _NEAR_BUCKETS:
            hit = (ratio < threshold) & ~assigned
            if np.any(hit):
                ii, qq = np.nonzero(hit)
                near_i.append(ii + start)
                near_q.append(qq)
                near_depth.append(np.full(len(ii), depth))
                assigned |= hit

    if near_i:
        ii = np.concatenate(near_i)
        qq = np.concatenate(near_q)
        dd = np.concatenate(near_depth)
        v0, v1, v2 = mesh.corners()
        corners = np.stack([v0, v1, v2], axis=1)
        for depth in np.unique(dd):
            sel = dd == depth
            out[ii[sel], qq[sel]] = _pair_integrals(
                points[ii[sel]], corners[qq[sel]], k, int(depth), rule, grad=False
            )

    if self_i:
        ii = np.concatenate(self_i)
        qq = np.concatenate(self_q)
        static = static_self_integrals(mesh)
        # bounded remainder (e^{ikr} - 1)/(4 pi r) by the base rule
        d = points[ii][:, None, :] - qpts[qq]                 # (p, g, 3)
        r = np.sqrt(np.einsum("...i,...i->...", d, d))
        rem = (np.exp(1j * k * r) - 1.0) / (4.0 * np.pi * r)
        out[ii, qq] = static[qq] + np.einsum("pg,g->p", rem, w) * areas[qq]
    return out


def _layer_gradient_rows(points: np.ndarray, mesh: SurfaceMesh, k: float, eta: np.ndarray,
                         rule: str = "gauss3") -> np.ndarray:
    """grad_x of the single layer with density eta, at off-surface points."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n, m = len(points), mesh.n_panels
    qpts, w = mesh.quadrature_points(rule)
    areas = mesh.panel_area
    out = np.zeros((n, 3), dtype=complex)

    coef = (eta * areas).astype(complex)
    rows_per_chunk = max(1, _CHUNK // max(m * len(w), 1))
    v0, v1, v2 = mesh.corners()
    corners = np.stack([v0, v1, v2], axis=1)

    for start in range(0, n, rows_per_chunk):
        stop = min(start + rows_per_chunk, n)
        x = points[start:stop]
        d = x[:, None, None, :] - qpts[None, :, :, :]
        r = np.sqrt(np.einsum("...i,...i->...", d, d))
        if np.any(r < _SELF_TOL):
            raise ValueError("layer gradient requested on the surface")
        g = np.exp(1j * k * r) * (1j * k * r - 1.0) / (4.0 * np.pi * r**3)
        base = np.einsum("imgk,img,g->imk", d, g, w)
        out[start:stop] = np.einsum("imk,m->ik", base, coef)

        dist = np.linalg.norm(x[:, None, :] - mesh.panel_centroid[None, :, :], axis=-1)
        ratio = dist / mesh.panel_diameter[None, :]
        assigned = np.zeros_like(ratio, dtype=bool)
        for threshold, depth in _NEAR_BUCKETS:
            hit = (ratio < threshold) & ~assigned
            if np.any(hit):
                ii, qq = np.nonzero(hit)
                refined = _pair_integrals(
                    x[ii], corners[qq], k, int(depth), rule, grad=True
                )
                # swap the base-rule pair contribution for the refined one
                coarse = np.einsum("pgk,pg,g->pk", d[ii, qq], g[ii, qq], w) * areas[qq, None]
                np.add.at(out, ii + start, (refined - coarse) * eta[qq, None])
                assigned |= hit
    return out


def assemble_single_layer(mesh: SurfaceMesh, k: float, rule: str = "gauss3",
                          max_panels: int = MAX_PANELS) -> np.ndarray:
    """Collocation single-layer matrix S[q, p] = int_{panel p} G_k(c_q, y) dsigma."""
    if mesh.n_panels > max_panels:
        raise ValueError(f"mesh has {mesh.n_panels} panels, cap is {max_panels}")
    return _layer_matrix(mesh.panel_centroid, mesh, k, rule=rule)


def layer_potential(points, mesh: SurfaceMesh, eta: np.ndarray, k: float,
                    rule: str = "gauss3") -> np.ndarray:
    """Single-layer field sum_q eta_q int_{panel q} G_k(x, y) dsigma(y)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    eta = np.asarray(eta, dtype=complex)
    out = np.empty(len(points), dtype=complex)
    chunk = max(16, _CHUNK // max(mesh.n_panels * 4, 1))
    for start in range(0, len(points), chunk):
        stop = min(start + chunk, len(points))
        out[start:stop] = _layer_matrix(points[start:stop], mesh, k, rule=rule) @ eta
    return out


def layer_potential_gradient(points, mesh: SurfaceMesh, eta: np.ndarray, k: float,
                             rule: str = "gauss3") -> np.ndarray:
    """Analytic gradient of the single-layer field (off-surface points)."""
    return _layer_gradient_rows(points, mesh, k, np.asarray(eta, dtype=complex), rule=rule)


# ---------------------------------------------------------------------------
# Coupled delta-shell system
# ---------------------------------------------------------------------------

@dataclass
class DeltaSolution:
    """Solution of the coupled system: surface density plus grid field."""

    density: BoundaryDensity
    incident: IncidentField
    k: float
    residual: float
    trace: np.ndarray            # trace of the total field at panel centroids
    potential: PotentialSample | None
    delta: DeltaSpec
    support: np.ndarray          # grid cells in the dense solve
    source_density: np.ndarray   # (V psi) on support cells
    _grid_values: np.ndarray | None = field(default=None, repr=False)
    _system: "DeltaSystem | None" = field(default=None, repr=False)

    @property
    def mesh(self) -> SurfaceMesh:
        return self.delta.mesh

    @property
    def volume_field(self) -> VolumeField | None:
        """Total field on the full grid (computed on first access)."""
        if self.potential is None:
            return None
        if self._grid_values is None:
            grid = self.potential.grid
            psi0 = np.asarray(eval_incident(self.incident, self.k, grid.cell_center), dtype=complex)
            vals = psi0 - volume_potential(grid.cell_center, grid, self.source_density,
                                           self.k, cells=self.support)
            if len(self.density.eta):
                vals -= layer_potential(grid.cell_center, self.mesh, self.density.eta, self.k)
            if self._system is not None and len(self.support):
                vals[self.support] = self._system_support_values
            self._grid_values = vals
        return VolumeField(grid=self.potential.grid, values=self._grid_values)

    @property
    def _system_support_values(self) -> np.ndarray:
        V = self.potential.values[self.support]
        safe = np.where(V == 0.0, 1.0, V)
        return np.where(V == 0.0, 0.0, self.source_density / safe)


class DeltaSystem:
    """Assembled and factorized coupled system, reusable across incident fields."""

    def __init__(
        self,
        V: PotentialSample | None,
        delta: DeltaSpec,
        k: float,
        rule: str = "gauss3",
        max_panels: int = MAX_PANELS,
    ):
        if k <= 0:
            raise ValueError("k must be positive")
        self.k = float(k)
        self.delta = delta
        self.potential = V
        self.mesh = delta.mesh
        self.rule = rule

        alpha = delta.alpha
        self.surface_active = not delta.is_zero
        self.support = V.support() if V is not None else np.zeros(0, dtype=int)
        ns, np_ = len(self.support), self.mesh.n_panels

        if V is not None and ns:
            self.G = assemble_volume_operator(V.grid, k, cells=self.support)
            self.Vs = V.values[self.support]
            self.centers = V.grid.cell_center[self.support]
        else:
            self.G = np.zeros((0, 0), dtype=complex)
            self.Vs = np.zeros(0)
            self.centers = np.zeros((0, 3))

        if self.surface_active:
            self.S = assemble_single_layer(self.mesh, k, rule=rule, max_panels=max_panels)
            if ns:
                self.SLvol = _layer_matrix(self.centers, self.mesh, k, rule=rule)
                self.Tr = _cell_matrix(self.mesh.panel_centroid, V.grid, k, self.support)
            else:
                self.SLvol = np.zeros((0, np_), dtype=complex)
                self.Tr = np.zeros((np_, 0), dtype=complex)

            A = np.empty((ns + np_, ns + np_), dtype=complex)
            A[:ns, :ns] = self.G * self.Vs[None, :]
            A[np.arange(ns), np.arange(ns)] += 1.0
            A[:ns, ns:] = self.SLvol
            A[ns:, :ns] = alpha[:, None] * (self.Tr * self.Vs[None, :])
            A[ns:, ns:] = alpha[:, None] * self.S
            A[ns + np.arange(np_), ns + np.arange(np_)] += 1.0
        else:
            # alpha == 0: the panel rows decouple (eta = 0); solve cells only
            self.S = None
            self.SLvol = np.zeros((ns, np_), dtype=complex)
            self.Tr = _cell_matrix(self.mesh.panel_centroid, V.grid, k, self.support) if ns else np.zeros((np_, 0), dtype=complex)
            A = self.G * self.Vs[None, :]
            A[np.arange(ns), np.arange(ns)] += 1.0

        self._A = A
        self._lu = GuardedLU(A, context="delta-shell system") if len(A) else None

    def solve(self, inc: IncidentField) -> DeltaSolution:
        ns, np_ = len(self.support), self.mesh.n_panels
        alpha = self.delta.alpha
        psi0_cells = np.asarray(eval_incident(inc, self.k, self.centers), dtype=complex) if ns else np.zeros(0, dtype=complex)
        psi0_panels = np.asarray(eval_incident(inc, self.k, self.mesh.panel_centroid), dtype=complex)

        if self.surface_active:
            rhs = np.concatenate([psi0_cells, alpha * psi0_panels])
            x = self._lu.solve(rhs)
            residual = float(np.linalg.norm(self._A @ x - rhs) / max(np.linalg.norm(rhs), 1e-300))
            psi_s, eta = x[:ns], x[ns:]
        else:
            if ns:
                x = self._lu.solve(psi0_cells)
                residual = float(np.linalg.norm(self._A @ x - psi0_cells) / max(np.linalg.norm(psi0_cells), 1e-300))
                psi_s = x
            else:
                psi_s = np.zeros(0, dtype=complex)
                residual = 0.0
            eta = np.zeros(np_, dtype=complex)

        source = self.Vs * psi_s
        trace = psi0_panels.copy()
        if ns:
            trace -= self.Tr @ source
        if self.surface_active:
            trace -= self.S @ eta

        sol = DeltaSolution(
            density=BoundaryDensity(mesh=self.mesh, eta=eta),
            incident=inc,
            k=self.k,
            residual=residual,
            trace=trace,
            potential=self.potential,
            delta=self.delta,
            support=self.support,
            source_density=source,
            _system=self,
        )
        return sol


def _cell_matrix(points: np.ndarray, grid, k: float, cells: np.ndarray) -> np.ndarray:
    """Kernel-times-volume block from grid cells to arbitrary points.

    Matches the assembled volume operator: midpoint entries with the
    equal-volume-ball value when a point falls in a cell's self region.
    """
    centers = grid.cell_center[cells]
    points = np.atleast_2d(points)
    d = points[:, None, :] - centers[None, :, :]
    r = np.sqrt(np.einsum("ijk,ijk->ij", d, d))
    near = r < 0.5 * float(np.min(grid.spacing))
    r_safe = np.where(near, 1.0, r)
    out = np.exp(1j * k * r_safe) * (grid.cell_volume / (4.0 * np.pi)) / r_safe
    out[near] = ball_self_term(k, grid.cell_volume)
    return out


def solve_delta_system(
    V: PotentialSample | None,
    delta: DeltaSpec,
    inc: IncidentField,
    k: float,
    rule: str = "gauss3",
) -> DeltaSolution:
    """One-shot assembly + solve; build a DeltaSystem directly to reuse the LU."""
    return DeltaSystem(V, delta, k, rule=rule).solve(inc)


def solve_delta_system_composition(
    V: PotentialSample | None,
    delta: DeltaSpec,
    inc: IncidentField,
    k: float,
    rule: str = "gauss3",
) -> DeltaSolution:
    """Operator-composition route (cross-validation path, small sizes only).

    Realizes psi^{V,alpha} = psi^V - SL^V (1 + alpha g0 SL^V)^{-1} alpha g0 psi^V
    with SL^V applied through the volume solver, instead of one block solve.
    """
    from .volume import solve_lippmann_schwinger

    mesh = delta.mesh
    alpha = delta.alpha
    np_ = mesh.n_panels
    if V is None or len(V.support()) == 0:
        # free background: SL^V = SL^0
        S = assemble_single_layer(mesh, k, rule=rule)
        psi0_panels = np.asarray(eval_incident(inc, k, mesh.panel_centroid), dtype=complex)
        A = alpha[:, None] * S
        A[np.arange(np_), np.arange(np_)] += 1.0
        lu = GuardedLU(A, context="surface system (composition route)")
        eta = lu.solve(alpha * psi0_panels)
        trace = psi0_panels - S @ eta
        residual = float(np.linalg.norm(A @ eta - alpha * psi0_panels) / max(np.linalg.norm(alpha * psi0_panels), 1e-300))
        return DeltaSolution(
            density=BoundaryDensity(mesh=mesh, eta=eta), incident=inc, k=k,
            residual=residual, trace=trace, potential=V, delta=delta,
            support=np.zeros(0, dtype=int), source_density=np.zeros(0, dtype=complex),
        )

    grid = V.grid
    support = V.support()
    Vs = V.values[support]
    centers = grid.cell_center[support]

    base = solve_lippmann_schwinger(V, inc, k)
    psi_v = base.field.values[support]
    S = assemble_single_layer(mesh, k, rule=rule)
    SLvol = _layer_matrix(centers, mesh, k, rule=rule)
    Tr = _cell_matrix(mesh.panel_centroid, grid, k, support)
    G = assemble_volume_operator(grid, k, cells=support)

    lhs = G * Vs[None, :]
    lhs[np.arange(len(support)), np.arange(len(support))] += 1.0
    lu_v = GuardedLU(lhs, context="volume block (composition route)")
    U = lu_v.solve(SLvol)                       # SL^V eta on the support grid
    g0_slv = S - Tr @ (Vs[:, None] * U)         # gamma0 SL^V as a panel operator

    trace_psi_v = np.asarray(eval_incident(inc, k, mesh.panel_centroid), dtype=complex) - Tr @ (Vs * psi_v)
    A = alpha[:, None] * g0_slv
    A[np.arange(np_), np.arange(np_)] += 1.0
    lu_s = GuardedLU(A, context="trace system (composition route)")
    eta = lu_s.solve(alpha * trace_psi_v)

    psi_total = psi_v - U @ eta
    source = Vs * psi_total
    trace = trace_psi_v - g0_slv @ eta
    residual = float(np.linalg.norm(A @ eta - alpha * trace_psi_v) / max(np.linalg.norm(alpha * trace_psi_v) + 1e-300, 1e-300))
    return DeltaSolution(
        density=BoundaryDensity(mesh=mesh, eta=eta), incident=inc, k=k,
        residual=residual, trace=trace, potential=V, delta=delta,
        support=support, source_density=source,
    )


# ---------------------------------------------------------------------------
# Field evaluation
# ---------------------------------------------------------------------------

def eval_scattered_field(sol: DeltaSolution, x) -> np.ndarray | complex:
    """Scattered part: -G (V psi) - SL eta evaluated at x."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = np.atleast_2d(x)
    vals = np.zeros(len(pts), dtype=complex)
    if len(sol.support):
        vals -= volume_potential(pts, sol.potential.grid, sol.source_density, sol.k, cells=sol.support)
    if np.any(sol.density.eta):
        vals -= layer_potential(pts, sol.mesh, sol.density.eta, sol.k)
    return vals[0] if single else vals


def eval_total_field(sol: DeltaSolution, x, near_warning: bool = True) -> np.ndarray | complex:
    """Total field psi0 + scattered at x; warns near the surface."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = np.atleast_2d(x)
    if near_warning and sol.mesh.n_panels:
        dist = np.min(
            np.linalg.norm(pts[:, None, :] - sol.mesh.panel_centroid[None, :, :], axis=-1)
            / sol.mesh.panel_diameter[None, :],
            axis=1,
        )
        if np.any(dist < 0.25):
            warnings.warn("evaluation point within a quarter panel diameter of Gamma; "
                          "near-field accuracy is reduced", stacklevel=2)
    psi0 = np.asarray(eval_incident(sol.incident, sol.k, pts), dtype=complex)
    vals = psi0 + eval_scattered_field(sol, pts)
    return vals[0] if single else vals


def eval_scattered_gradient(sol: DeltaSolution, x) -> np.ndarray:
    """Analytic gradient of the scattered field at off-surface points."""
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    out = np.zeros((len(pts), 3), dtype=complex)
    if len(sol.support):
        grid = sol.potential.grid
        centers = grid.cell_center[sol.support]
        d = pts[:, None, :] - centers[None, :, :]
        r = np.sqrt(np.einsum("ijk,ijk->ij", d, d))
        inside = r < 0.5 * float(np.min(grid.spacing))
        r_safe = np.where(inside, 1.0, r)
        g = np.exp(1j * sol.k * r_safe) * (1j * sol.k * r_safe - 1.0) / (4.0 * np.pi * r_safe**3) * grid.cell_volume
        g[inside] = 0.0  # a cell's own gradient contribution vanishes at its center
        out -= np.einsum("ijk,ij,j->ik", d, g, sol.source_density)
    if np.any(sol.density.eta):
        out -= layer_potential_gradient(pts, sol.mesh, sol.density.eta, sol.k)
    return out


def check_jump_relation(
    mesh: SurfaceMesh,
    k: float,
    xi: np.ndarray,
    delta_factor: float = 0.1,
    fd_factor: float = 0.5,
    rule: str = "gauss3",
) -> float:
    """Relative error in the normal-derivative jump [d_n SL xi] = -xi.

    Evaluates n.grad(SL xi) at c_q +/- delta n_q by central finite
    differences of the layer potential (offset delta and step are fractions
    of the local panel diameter) and returns the area-weighted relative L^2
    error of (jump + xi).
    """
    xi = np.asarray(xi, dtype=complex)
    if xi.shape == ():
        xi = np.full(mesh.n_panels, complex(xi))
    c = mesh.panel_centroid
    nrm = mesh.panel_normal
    delta = delta_factor * mesh.panel_diameter
    h = fd_factor * delta

    offsets = [delta + h, delta - h, -(delta - h), -(delta + h)]
    vals = [
        layer_potential(c + off[:, None] * nrm, mesh, xi, k, rule=rule)
        for off in offsets
    ]
    dn_out = (vals[0] - vals[1]) / (2.0 * h)
    dn_in = (vals[2] - vals[3]) / (2.0 * h)
    jump = dn_out - dn_in

    w = mesh.panel_area
    err = np.sqrt(np.sum(w * np.abs(jump + xi) ** 2) / np.sum(w * np.abs(xi) ** 2))
    return float(err)


def density_to_csv_rows(sol: DeltaSolution):
    """Yield (panel id, cx, cy, cz, Re eta, Im eta, alpha) rows."""
    for q, (c, e, a) in enumerate(zip(sol.mesh.panel_centroid, sol.density.eta, sol.delta.alpha)):
        yield q, c[0], c[1], c[2], e.real, e.imag, a
