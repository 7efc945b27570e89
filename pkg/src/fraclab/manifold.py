"""Radial model manifolds g = dr^2 + psi(r)^2 g_sphere.

A model is a dimension, a warping function psi, and a radial grid on
[0, r_max] carrying the quadrature weights of the Riemannian measure
dmu = omega_{n-1} psi(r)^{n-1} dr.  The flat line (n = 1) is allowed as an
oracle geometry and is represented through its even extension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .errors import ConstructionError, DomainRangeError, ParameterError

WARPING_KINDS = ("flat", "log-blend", "hyperbolic", "user-sampled")
ANALYTIC_KINDS = ("flat", "log-blend", "hyperbolic")

# 8-point Gauss-Legendre nodes on [0, 1]
_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W


@dataclass(frozen=True)
class WarpingSpec:
    """Radial profile psi of a rotationally symmetric metric.

    ``c`` is the blend coefficient of the log-blend profile
    psi(r) = c r + (1 - c) log(1 + r).  A user-sampled profile is given by
    ``r_nodes`` / ``psi_values`` and interpolated with a not-a-knot cubic spline.
    """

    kind: str = "flat"
    c: float = 0.5
    r_nodes: tuple = ()
    psi_values: tuple = ()
    _spline: object = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in WARPING_KINDS:
            raise ParameterError(f"unknown warping kind {self.kind!r}")
        if self.kind == "log-blend" and not (0.0 < self.c <= 1.0):
            raise ParameterError(f"log-blend coefficient c must lie in (0, 1], got {self.c}")
        if self.kind == "user-sampled":
            r = np.asarray(self.r_nodes, dtype=float)
            v = np.asarray(self.psi_values, dtype=float)
            if r.ndim != 1 or r.shape != v.shape or r.size < 4:
                raise ParameterError("user-sampled warping needs >= 4 matching (r, psi) samples")
            if r[0] != 0.0 or np.any(np.diff(r) <= 0):
                raise ParameterError("user-sampled r-nodes must start at 0 and increase strictly")
            object.__setattr__(self, "_spline", CubicSpline(r, v))

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        kind = d.pop("kind", "flat")
        if kind == "user-sampled":
            return cls(kind=kind, r_nodes=tuple(d["r_nodes"]), psi_values=tuple(d["psi_values"]))
        return cls(kind=kind, **{k: v for k, v in d.items() if k == "c"})

    def to_dict(self):
        if self.kind == "log-blend":
            return {"kind": self.kind, "c": self.c}
        if self.kind == "user-sampled":
            return {"kind": self.kind, "r_nodes": list(self.r_nodes), "psi_values": list(self.psi_values)}
        return {"kind": self.kind}

    @property
    def analytic(self):
        return self.kind in ANALYTIC_KINDS

    @property
    def support(self):
        """Largest radius at which psi is defined."""
        return float(self.r_nodes[-1]) if self.kind == "user-sampled" else math.inf

    def psi(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "flat":
            return r.copy()
        if self.kind == "log-blend":
            return self.c * r + (1.0 - self.c) * np.log1p(r)
        if self.kind == "hyperbolic":
            return np.sinh(r)
        return self._spline(r)

    def dpsi(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "flat":
            return np.ones_like(r)
        if self.kind == "log-blend":
            return self.c + (1.0 - self.c) / (1.0 + r)
        if self.kind == "hyperbolic":
            return np.cosh(r)
        return self._spline(r, 1)

    def d2psi(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "flat":
            return np.zeros_like(r)
        if self.kind == "log-blend":
            return (self.c - 1.0) / (1.0 + r) ** 2
        if self.kind == "hyperbolic":
            return np.sinh(r)
        return self._spline(r, 2)


def sphere_area(n):
    """omega_{n-1}, the area of the unit sphere in R^n (2 for the line)."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def sinh_grid(r_max, nodes, core_spacing=None):
    """Nodes and cell faces of a uniform or sinh-stretched radial grid.

    With ``core_spacing`` below the uniform spacing the grid is
    r(s) = r_max sinh(k s) / sinh(k), s uniform on [0, 1], with k chosen so
    the first cell has width ~ ``core_spacing``.  Faces sit at the mapped
    half-integer points.
    """
    m = nodes - 1
    s = np.linspace(0.0, 1.0, nodes)
    s_face = (np.arange(m) + 0.5) / m
    if core_spacing is None or core_spacing >= r_max / m:
        return r_max * s, r_max * s_face, 0.0
    if core_spacing <= 0:
        raise ParameterError("core_spacing must be positive")
    k = brentq(lambda k: r_max * k / (m * math.sinh(k)) - core_spacing, 1e-9, 700.0)
    g = lambda x: r_max * np.sinh(k * x) / math.sinh(k)
    r = g(s)
    r[0], r[-1] = 0.0, r_max
    return r, g(s_face), k


@dataclass(frozen=True, eq=False)
class ManifoldModel:
    n: int
    warping: WarpingSpec
    r_max: float
    grid: np.ndarray
    faces: np.ndarray
    measure_weights: np.ndarray
    stretch: float = 0.0
    core_spacing: float | None = None

    @property
    def nodes(self):
        return self.grid.size

    @property
    def oracle_line(self):
        """True for the flat 1-D line used as an oracle geometry."""
        return self.n == 1

    @property
    def omega(self):
        return sphere_area(self.n)

    def density(self, r):
        """Radial density omega_{n-1} psi(r)^{n-1} of the measure."""
        r = np.asarray(r, dtype=float)
        if self.n == 1:
            return np.full_like(r, self.omega)
        return self.omega * np.abs(self.warping.psi(r)) ** (self.n - 1)

    def integrate(self, f):
        """Quadrature of a grid field against the measure."""
        return float(np.dot(self.measure_weights, f))

    def to_dict(self):
        return {
            "n": self.n,
            "warping": self.warping.to_dict(),
            "r_max": self.r_max,
            "nodes": self.nodes,
            "core_spacing": self.core_spacing,
        }


def _gl_pieces(density, a, b):
    """Gauss-Legendre integral of ``density`` over each piece [a_i, b_i]."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    x = a[..., None] + (b - a)[..., None] * _GL_X
    return (b - a) * (density(x) @ _GL_W)


def make_model(n, warping, r_max, nodes, core_spacing=None):
    """Build a model on a radial grid of ``nodes`` points over [0, r_max]."""
    if isinstance(warping, dict):
        warping = WarpingSpec.from_dict(warping)
    n = int(n)
    if n < 1:
        raise ParameterError(f"dimension must be >= 1, got {n}")
    if n == 1 and warping.kind != "flat":
        raise ParameterError("the n = 1 oracle line requires the flat warping")
    if not r_max > 0:
        raise ParameterError(f"r_max must be positive, got {r_max}")
    if nodes < 64:
        raise ParameterError(f"at least 64 nodes required, got {nodes}")
    if r_max > warping.support * (1 + 1e-12):
        raise ParameterError(f"r_max={r_max} exceeds the sampled warping range {warping.support}")

    r, faces, k = sinh_grid(float(r_max), int(nodes), core_spacing)
    psi = warping.psi(r)
    bad = np.flatnonzero(psi[1:] <= 0)
    if bad.size:
        i = int(bad[0]) + 1
        raise ConstructionError(f"warping is non-positive at node {i} (r={r[i]:.6g}, psi={psi[i]:.6g})")
    # psi(0) = 0 and psi'(0) = 1 by a second-order one-sided difference; the
    # step is capped so its O(h^2) error stays well below the tolerance
    if abs(psi[0]) > 1e-12 * max(1.0, abs(psi[1])):
        raise ConstructionError(f"warping must vanish at r=0, got psi(0)={psi[0]:.3g}")
    h = min(r[1], 1e-3)
    p1, p2 = warping.psi(np.array([h, 2 * h]))
    slope = (4 * p1 - p2) / (2 * h)
    if abs(slope - 1.0) > 1e-3:
        raise ConstructionError(f"warping slope at r=0 is {slope:.6g}, expected 1 within 1e-3")

    omega = sphere_area(n)
    if n == 1:
        density = lambda x: np.full_like(x, omega)
    else:
        density = lambda x: omega * np.abs(warping.psi(x)) ** (n - 1)
    left = _gl_pieces(density, r[:-1], faces)
    right = _gl_pieces(density, faces, r[1:])
    w = np.zeros(r.size)
    w[:-1] += left
    w[1:] += right
    return ManifoldModel(
        n=n, warping=warping, r_max=float(r_max), grid=r, faces=faces,
        measure_weights=w, stretch=k, core_spacing=core_spacing,
    )


def correction_term(m, r):
    """First-order coefficient beyond (n-1)/r: (n-1)(psi'/psi - 1/r).

    Returns 0 at r = 0 (limit of a warping tangent to the identity).
    """
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or np.any(r > m.r_max * (1 + 1e-12)):
        raise DomainRangeError("correction_term requires 0 <= r <= r_max")
    return _correction(m.warping, m.n, r)


def _correction(warping, n, r):
    if n == 1 or warping.kind == "flat":
        return np.zeros_like(r) if r.ndim else 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (n - 1) * (warping.dpsi(r) / warping.psi(r) - 1.0 / r)
    out = np.where(r > 0, out, 0.0)
    return out if out.ndim else float(out)


def volume_ball(m, r):
    """Volume of the geodesic ball B(p, r) about the base point."""
    if not 0 < r <= m.r_max * (1 + 1e-12):
        raise DomainRangeError(f"volume_ball needs 0 < r <= r_max={m.r_max}, got {r}")
    r = min(float(r), m.r_max)
    g = m.grid
    i = int(np.searchsorted(g, r, side="right")) - 1
    i = min(i, g.size - 2)
    full = float(np.sum(m.measure_weights[:i])) + _left_share(m, i)
    return full + float(_gl_pieces(m.density, np.array([g[i]]), np.array([r]))[0])


def _left_share(m, i):
    # measure of [0, r_i]: all dual cells below node i plus the lower half of cell i
    if i == 0:
        return 0.0
    return float(_gl_pieces(m.density, np.array([m.faces[i - 1]]), np.array([m.grid[i]]))[0])


def _volume_exact(m, r):
    """Ball volume from the closed-form warping, usable beyond r_max."""
    if r <= m.r_max:
        return volume_ball(m, r)
    extra, _ = quad(lambda s: float(m.density(s)), m.r_max, r, limit=200)
    return volume_ball(m, m.r_max) + extra


@dataclass
class AssumptionThresholds:
    c_max: float = 10.0
    v_lo: float = 0.01
    v_hi: float = 100.0
    decades: float = 3.0
    samples: int = 25
    tail_factor: float = 10.0


@dataclass
class AssumptionReport:
    sup_correction: float
    volume_ratio_range: list
    ricci_ok: bool
    passes: bool
    concavity_ok: bool = True
    failures: list = field(default_factory=list)
    radii: list = field(default_factory=list)

    def to_dict(self):
        return {
            "sup_correction": self.sup_correction,
            "volume_ratio_range": list(self.volume_ratio_range),
            "ricci_ok": self.ricci_ok,
            "passes": self.passes,
            "concavity_ok": self.concavity_ok,
            "failures": list(self.failures),
        }


def check_assumptions(m, thresholds=None):
    """Check the bounded-correction, polynomial-volume and curvature-sign conditions.

    The correction bound sup |r (d_r sqrt G)/sqrt G| is taken over the grid
    and, for closed-form warpings, over log-spaced radii up to
    ``tail_factor * r_max``.  Volume ratios V(r) / (omega r^n / n) are
    sampled over ``decades`` decades ending at r_max (extended the same way).
    """
    th = thresholds or AssumptionThresholds()
    wp, n = m.warping, m.n
    r = m.grid[1:]
    corr = np.abs(r * _correction(wp, n, r))
    radii_tail = np.array([])
    if wp.analytic:
        radii_tail = np.geomspace(m.r_max, th.tail_factor * m.r_max, 16)
        corr = np.concatenate([corr, np.abs(radii_tail * _correction(wp, n, radii_tail))])
    sup_corr = float(np.max(corr)) if np.all(np.isfinite(corr)) else math.inf

    top = th.tail_factor * m.r_max if wp.analytic else m.r_max
    lo = max(m.grid[1], m.r_max * 10.0 ** (-th.decades))
    radii = np.geomspace(lo, top, th.samples)
    unit = sphere_area(n) / n
    ratios = np.array([_volume_exact(m, float(s)) / (unit * s**n) for s in radii])
    vr = [float(ratios.min()), float(ratios.max())]

    ricci_ok = bool(np.all(wp.d2psi(m.grid) <= 1e-12))
    concavity_ok = True
    if ricci_ok:
        concavity_ok = bool(np.all(wp.dpsi(r) <= wp.psi(r) / r + 1e-8))

    failures = []
    if not (sup_corr <= th.c_max):
        failures.append("correction_bound")
    if not (th.v_lo <= vr[0] and vr[1] <= th.v_hi):
        failures.append("volume_growth")
    if not ricci_ok:
        failures.append("ricci_sign")
    if not concavity_ok:
        failures.append("warping_concavity")
    return AssumptionReport(
        sup_correction=sup_corr,
        volume_ratio_range=vr,
        ricci_ok=ricci_ok,
        passes=not failures,
        concavity_ok=concavity_ok,
        failures=failures,
        radii=radii.tolist(),
    )
