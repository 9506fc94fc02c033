"""Free-space Helmholtz kernel, incident fields, and complex directions.

Conventions (fixed here and used everywhere):

* outgoing kernel        G_k(x, y) = exp(+ik|x-y|) / (4 pi |x-y|)
* plane wave             exp(+ik d.x), |d| = 1
* complex direction      rho = w zeta + i sqrt(w^2 + k^2) xi  with
                         zeta.xi = 0, so that rho.rho = -k^2 (unconjugated
                         dot product); w = 0 recovers the plane wave rho = ik xi
* radiation residual     |x| (x_hat.grad - ik) u_sc -> 0 selects outgoing fields

Exponential incident fields exp(rho.x) grow like exp(w |x|); evaluation
refuses |Re(rho).x| > 40 to avoid overflow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import SphereGrid, make_sphere_grid

__all__ = [
    "helmholtz_kernel",
    "helmholtz_kernel_gradient",
    "ComplexDirection",
    "make_sigma_k",
    "sigma_pair_for_xi",
    "PlaneWave",
    "Exponential",
    "Herglotz",
    "plane_wave",
    "herglotz_wave",
    "eval_incident",
    "eval_incident_grad",
    "OverflowGuardError",
]

_EXP_GUARD = 40.0


class OverflowGuardError(ValueError):
    """Exponential incident field requested outside its safe range."""


def helmholtz_kernel(x, y, k: float):
    """Outgoing kernel exp(ik r)/(4 pi r), r = |x - y|; broadcasts over points.

    Raises ValueError on coincident points.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r = np.linalg.norm(x - y, axis=-1)
    if np.any(r == 0.0):
        raise ValueError("helmholtz_kernel: coincident points")
    return np.exp(1j * k * r) / (4.0 * np.pi * r)


def helmholtz_kernel_gradient(x, y, k: float):
    """Gradient in x of the outgoing kernel: (x-y) e^{ikr}(ikr - 1)/(4 pi r^3)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d = x - y
    r = np.linalg.norm(d, axis=-1)
    if np.any(r == 0.0):
        raise ValueError("helmholtz_kernel_gradient: coincident points")
    scale = np.exp(1j * k * r) * (1j * k * r - 1.0) / (4.0 * np.pi * r**3)
    return d * scale[..., None]


# ---------------------------------------------------------------------------
# Sigma_k = {rho in C^3 : rho.rho = -k^2}
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ComplexDirection:
    """Element of Sigma_k in the (w, zeta, xi) parametrization."""

    rho: np.ndarray       # (3,) complex
    w: float
    zeta_hat: np.ndarray  # (3,) real unit
    xi_hat: np.ndarray    # (3,) real unit, orthogonal to zeta_hat
    k: float

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=complex)
        dot = rho @ rho
        if abs(dot + self.k**2) > 1e-10 * max(self.k**2, 1.0):
            raise ValueError(f"rho.rho = {dot} differs from -k^2 = {-self.k**2}")
        rebuilt = self.w * self.zeta_hat + 1j * np.sqrt(self.w**2 + self.k**2) * self.xi_hat
        if np.max(np.abs(rebuilt - rho)) > 1e-12 * max(1.0, self.k + self.w):
            raise ValueError("(w, zeta, xi) parametrization does not reproduce rho")

    @property
    def is_plane_wave(self) -> bool:
        return self.w == 0.0


def make_sigma_k(w: float, zeta_hat, xi_hat, k: float) -> ComplexDirection:
    """Build rho = w zeta + i sqrt(w^2 + k^2) xi in Sigma_k."""
    if k <= 0:
        raise ValueError("k must be positive")
    if w < 0:
        raise ValueError("w must be nonnegative")
    zeta_hat = np.asarray(zeta_hat, dtype=float)
    xi_hat = np.asarray(xi_hat, dtype=float)
    for name, v in (("zeta_hat", zeta_hat), ("xi_hat", xi_hat)):
        if abs(np.linalg.norm(v) - 1.0) > 1e-10:
            raise ValueError(f"{name} is not a unit vector")
    if abs(zeta_hat @ xi_hat) > 1e-10:
        raise ValueError("zeta_hat and xi_hat must be orthogonal")
    rho = w * zeta_hat + 1j * np.sqrt(w**2 + k**2) * xi_hat
    return ComplexDirection(rho=rho, w=float(w), zeta_hat=zeta_hat, xi_hat=xi_hat, k=float(k))


def _orthonormal_complement(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Two unit vectors completing u/|u| to an orthonormal frame."""
    u = u / np.linalg.norm(u)
    helper = np.array([1.0, 0.0, 0.0]) if abs(u[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    a = np.cross(u, helper)
    a /= np.linalg.norm(a)
    b = np.cross(u, a)
    return a, b


def sigma_pair_for_xi(xi, k: float, w: float) -> tuple[ComplexDirection, ComplexDirection]:
    """Pair (rho1, rho2) in Sigma_k with conj(rho1) + rho2 = -i xi.

    Construction: pick mu, nu completing xi to an orthogonal frame and set

        rho1 =  w mu + i (xi/2 + s nu),   rho2 = -w mu + i (-xi/2 + s nu),

    with s = sqrt(w^2 + k^2 - |xi|^2/4), which requires w^2 + k^2 >= |xi|^2/4.
    """
    xi = np.asarray(xi, dtype=float)
    if k <= 0:
        raise ValueError("k must be positive")
    if w < 0:
        raise ValueError("w must be nonnegative")
    xi_norm = np.linalg.norm(xi)
    s_sq = w**2 + k**2 - xi_norm**2 / 4.0
    if s_sq < 0:
        raise ValueError(
            f"insufficient w for this xi: need w^2 + k^2 >= |xi|^2/4 "
            f"({w**2 + k**2:.6g} < {xi_norm**2 / 4.0:.6g})"
        )
    s = np.sqrt(s_sq)
    if xi_norm > 0:
        mu, nu = _orthonormal_complement(xi)
    else:
        mu = np.array([1.0, 0.0, 0.0])
        nu = np.array([0.0, 1.0, 0.0])

    def _pack(re_part: np.ndarray, im_part: np.ndarray) -> ComplexDirection:
        w_eff = np.linalg.norm(re_part)
        if w_eff > 0:
            zeta = re_part / w_eff
        else:
            zeta, _ = _orthonormal_complement(im_part)
        return ComplexDirection(
            rho=re_part + 1j * im_part,
            w=float(w_eff),
            zeta_hat=zeta,
            xi_hat=im_part / np.linalg.norm(im_part),
            k=float(k),
        )

    rho1 = _pack(w * mu, xi / 2.0 + s * nu)
    rho2 = _pack(-w * mu, -xi / 2.0 + s * nu)
    return rho1, rho2


# ---------------------------------------------------------------------------
# Incident fields
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PlaneWave:
    """exp(+ik d.x) with a real unit direction d."""

    direction: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=float)
        if abs(np.linalg.norm(d) - 1.0) > 1e-10:
            raise ValueError("plane wave direction must be a unit vector")
        object.__setattr__(self, "direction", d)

    def values(self, k: float, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        return np.exp(1j * k * (points @ self.direction))

    def gradients(self, k: float, points: np.ndarray) -> np.ndarray:
        vals = self.values(k, points)
        return 1j * k * self.direction[None, :] * vals[:, None]


@dataclass(frozen=True)
class Exponential:
    """Generalized eigenfunction exp(rho.x), rho in Sigma_k."""

    rho_dir: ComplexDirection

    def values(self, k: float, points: np.ndarray) -> np.ndarray:
        self._check_k(k)
        points = np.atleast_2d(points)
        phase = points @ self.rho_dir.rho
        re_max = np.max(np.abs(phase.real)) if phase.size else 0.0
        if re_max > _EXP_GUARD:
            raise OverflowGuardError(
                f"|Re(rho).x| = {re_max:.3g} exceeds the overflow guard {_EXP_GUARD}"
            )
        return np.exp(phase)

    def gradients(self, k: float, points: np.ndarray) -> np.ndarray:
        vals = self.values(k, points)
        return self.rho_dir.rho[None, :] * vals[:, None]

    def _check_k(self, k: float) -> None:
        if abs(k - self.rho_dir.k) > 1e-12 * max(1.0, k):
            raise ValueError(f"incident field built for k={self.rho_dir.k}, asked for k={k}")


@dataclass(frozen=True)
class Herglotz:
    """Superposition int_{S^2} f(d) exp(ik d.x) dsigma(d) over a direction rule."""

    directions: np.ndarray   # (m, 3) unit vectors
    weights: np.ndarray      # (m,) quadrature weights on S^2
    density: np.ndarray      # (m,) complex samples of f

    def __post_init__(self):
        d = np.asarray(self.directions, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        f = np.asarray(self.density, dtype=complex)
        if not (len(d) == len(w) == len(f)):
            raise ValueError("directions, weights and density must have equal length")
        object.__setattr__(self, "directions", d)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "density", f)

    def values(self, k: float, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        phases = np.exp(1j * k * (points @ self.directions.T))   # (n, m)
        return phases @ (self.weights * self.density)

    def gradients(self, k: float, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        phases = np.exp(1j * k * (points @ self.directions.T))
        coef = (self.weights * self.density)[:, None] * (1j * k * self.directions)
        return phases @ coef


IncidentField = PlaneWave | Exponential | Herglotz


def plane_wave(direction) -> PlaneWave:
    return PlaneWave(direction=np.asarray(direction, dtype=float))


def herglotz_wave(density_fn, k: float, grid: SphereGrid | None = None, n_theta: int = 16, n_phi: int = 32) -> Herglotz:
    """Sample a density f on a unit-sphere rule (Gauss x uniform by default)."""
    if grid is None:
        grid = make_sphere_grid(1.0, n_theta, n_phi)
    if abs(grid.radius - 1.0) > 1e-12:
        raise ValueError("Herglotz rule must live on the unit sphere")
    f = np.asarray([density_fn(d) for d in grid.normals], dtype=complex)
    return Herglotz(directions=grid.normals, weights=grid.weights, density=f)


def eval_incident(f: IncidentField, k: float, x) -> np.ndarray | complex:
    """Incident field value(s) at x (a point or an (n, 3) array)."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    vals = f.values(k, np.atleast_2d(x))
    return vals[0] if single else vals


def eval_incident_grad(f: IncidentField, k: float, x) -> np.ndarray:
    """Analytic gradient of the incident field at x."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    grads = f.gradients(k, np.atleast_2d(x))
    return grads[0] if single else grads
