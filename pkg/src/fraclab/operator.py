"""Discrete radial Laplace-Beltrami operator and its functional calculus.

-Delta f = -(1/J)(J f')' with J = psi^{n-1} is discretized by a vertex-centred
finite-volume scheme: node i owns the dual cell between neighbouring faces
(its measure weight), and neighbouring nodes exchange the flux
omega J(face) (f_{i+1} - f_i) / (r_{i+1} - r_i).  The stiffness matrix S is
symmetric tridiagonal, the mass W is diagonal, and A = W^{-1} S is symmetric
in the measure inner product.  J vanishes at r = 0 for n >= 2, so no inner
boundary condition is imposed; the line (n = 1) is its even extension.

Functions of A (fractional powers, heat semigroup) go through the
eigendecomposition.  ``subordination_apply`` evaluates the fractional power
from resolvents alone and serves as an independent oracle for it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal, solveh_banded

from .errors import OperatorError, ParameterError
from .manifold import volume_ball

BCS = ("dirichlet-outer", "neumann-outer")
MAX_NODES = 4096


@dataclass(frozen=True)
class QuadratureScheme:
    """Truncated log-variable quadrature for the resolvent integral.

    ``s_min`` / ``s_max`` default to 1e-6 times the smallest positive
    eigenvalue and 1e6 times the largest.  Contributions outside
    [s_min, s_max] are added from the leading-order asymptotics of the
    integrand.
    """

    s_min: float | None = None
    s_max: float | None = None
    panels: int = 200
    rule: str = "gauss-legendre-log"
    points_per_panel: int = 4

    def __post_init__(self):
        if self.rule not in ("gauss-legendre-log", "trapezoid-log"):
            raise ParameterError(f"unknown quadrature rule {self.rule!r}")
        if self.panels < 16:
            raise ParameterError("quadrature needs at least 16 panels")
        if self.s_min is not None and not self.s_min > 0:
            raise ParameterError("s_min must be positive")
        if self.s_min is not None and self.s_max is not None and not self.s_max > self.s_min:
            raise ParameterError("s_max must exceed s_min")

    def nodes(self, s_min, s_max):
        """Quadrature nodes s_k and weights for ds (already including ds = s du)."""
        a, b = math.log(s_min), math.log(s_max)
        if self.rule == "trapezoid-log":
            u = np.linspace(a, b, self.panels + 1)
            wu = np.full(u.size, (b - a) / self.panels)
            wu[[0, -1]] *= 0.5
        else:
            x, w = np.polynomial.legendre.leggauss(self.points_per_panel)
            edges = np.linspace(a, b, self.panels + 1)
            half = 0.5 * np.diff(edges)
            mid = 0.5 * (edges[1:] + edges[:-1])
            u = (mid[:, None] + half[:, None] * x).ravel()
            wu = (half[:, None] * w).ravel()
        s = np.exp(u)
        return s, wu * s


@dataclass(frozen=True, eq=False)
class SpectralOperator:
    model: object
    bc: str
    dof: np.ndarray
    weights: np.ndarray
    diag: np.ndarray
    offdiag: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residual: float
    gram_error: float

    @property
    def matrix(self):
        """Dense A = W^{-1} S on the degrees of freedom."""
        s = np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)
        return s / self.weights[:, None]

    def stiffness_apply(self, x):
        y = self.diag[:, None] * x if x.ndim == 2 else self.diag * x
        if x.ndim == 2:
            y[:-1] += self.offdiag[:, None] * x[1:]
            y[1:] += self.offdiag[:, None] * x[:-1]
        else:
            y[:-1] += self.offdiag * x[1:]
            y[1:] += self.offdiag * x[:-1]
        return y

    def restrict(self, f):
        f = np.asarray(f)
        if f.shape[0] != self.model.nodes:
            raise ParameterError(f"field has {f.shape[0]} samples, grid has {self.model.nodes}")
        return f[self.dof]

    def prolong(self, x):
        out = np.zeros((self.model.nodes,) + x.shape[1:], dtype=x.dtype)
        out[self.dof] = x
        return out

    def coefficients(self, f):
        """Measure-orthonormal eigen-coefficients of a grid field."""
        x = self.restrict(f)
        wx = self.weights * x if x.ndim == 1 else self.weights[:, None] * x
        return self.eigenvectors.T @ wx

    def synthesize(self, c):
        return self.prolong(self.eigenvectors @ c)

    def matvec(self, f):
        x = self.restrict(f)
        return self.prolong(self.stiffness_apply(x) / (self.weights if x.ndim == 1 else self.weights[:, None]))

    def diagnostics(self):
        lam = self.eigenvalues
        return {
            "bc": self.bc,
            "dof": int(self.dof.size),
            "lambda_min": float(lam[0]),
            "lambda_max": float(lam[-1]),
            "lambda_min_positive": float(lam[lam > 1e-10 * lam[-1]][0]),
            "orthonormality_residual": self.gram_error,
            "eigen_residual": self.residual,
        }


def assemble(m, bc="dirichlet-outer"):
    """Finite-volume -Delta on model ``m`` with eager eigendecomposition."""
    if bc not in BCS:
        raise ParameterError(f"bc must be one of {BCS}, got {bc!r}")
    if m.nodes > MAX_NODES:
        raise ParameterError(f"dense eigendecomposition capped at {MAX_NODES} nodes, got {m.nodes}")
    r = m.grid
    flux = m.density(m.faces) / np.diff(r)
    d = np.zeros(r.size)
    d[:-1] += flux
    d[1:] += flux
    off = -flux
    ndof = r.size if bc == "neumann-outer" else r.size - 1
    dof = np.arange(ndof)
    d = d[:ndof]
    off = off[: ndof - 1]
    w = m.measure_weights[:ndof]

    sq = np.sqrt(w)
    bd = d / w
    be = off / (sq[:-1] * sq[1:])
    try:
        lam, q = eigh_tridiagonal(bd, be)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise OperatorError(f"eigensolver failed: {exc}") from exc
    if bc == "neumann-outer":
        # the constant mode is exact; round-off in lambda_0 would leak through lambda^{alpha/2}
        lam[np.abs(lam) <= 1e-10 * lam[-1]] = 0.0
    bq = bd[:, None] * q
    bq[:-1] += be[:, None] * q[1:]
    bq[1:] += be[:, None] * q[:-1]
    residual = float(np.max(np.abs(bq - q * lam)))
    gram = float(np.max(np.abs(q.T @ q - np.eye(ndof))))
    scale = max(1.0, float(np.max(np.abs(lam))))
    if not np.isfinite(residual) or residual > 1e-8 * scale:
        raise OperatorError("eigendecomposition residual too large", residual=residual)
    return SpectralOperator(
        model=m, bc=bc, dof=dof, weights=w, diag=d, offdiag=off,
        eigenvalues=lam, eigenvectors=q / sq[:, None], residual=residual, gram_error=gram,
    )


def _check_alpha(alpha, open_right=False):
    hi_ok = alpha < 2 if open_right else alpha <= 2
    if not (alpha > 0 and hi_ok):
        rng = "(0, 2)" if open_right else "(0, 2]"
        raise ParameterError(f"alpha must lie in {rng}, got {alpha}")


def spectral_multiplier(op, f, values):
    return op.synthesize(values[:, None] * op.coefficients(f) if np.ndim(f) == 2 else values * op.coefficients(f))


def apply_fractional(op, alpha, f):
    """(-Delta)^{alpha/2} f through the eigenbasis."""
    _check_alpha(alpha)
    lam = np.clip(op.eigenvalues, 0.0, None)
    return spectral_multiplier(op, f, lam ** (alpha / 2.0))


def heat_apply(op, tau, f):
    """e^{tau Delta} f."""
    if tau < 0:
        raise ParameterError(f"tau must be >= 0, got {tau}")
    return spectral_multiplier(op, f, np.exp(-tau * op.eigenvalues))


def subordination_apply(op, alpha, f, q=None):
    """(-Delta)^{alpha/2} f from the resolvent representation

        sin(alpha pi / 2) / pi * int_0^inf s^{alpha/2 - 1} (s + A)^{-1} A f ds,

    one banded symmetric solve (s W + S) y = S f per quadrature node.  Below
    s_min the resolvent factor is replaced by the projection off the kernel
    of A, above s_max by A / s.
    """
    _check_alpha(alpha, open_right=True)
    q = q or QuadratureScheme()
    lam = op.eigenvalues
    s_min = q.s_min if q.s_min is not None else 1e-6 * float(lam[lam > 1e-10 * lam[-1]][0])
    s_max = q.s_max if q.s_max is not None else 1e6 * float(lam[-1])
    if not s_max > s_min:
        raise ParameterError("s_max must exceed s_min")

    x = op.restrict(f)
    vec = x.ndim == 1
    x2 = x[:, None] if vec else x
    w = op.weights[:, None]
    rhs = op.stiffness_apply(x2)
    half = alpha / 2.0
    acc = np.zeros_like(rhs, dtype=np.result_type(rhs, float))
    ab = np.empty((2, x2.shape[0]))
    ab[0, 0] = 0.0
    ab[0, 1:] = op.offdiag
    neumann = op.bc == "neumann-outer"
    total = op.weights.sum()
    for s, ws in zip(*q.nodes(s_min, s_max)):
        ab[1] = op.diag + s * op.weights
        try:
            y = solveh_banded(ab, rhs, check_finite=False)
        except np.linalg.LinAlgError as exc:
            raise OperatorError(f"resolvent solve failed at s={s:.3g}") from exc
        if neumann:
            # the exact solution is W-orthogonal to constants; drop round-off there
            y -= (op.weights @ y) / total
        acc += (ws * s ** (half - 1.0)) * y
    if neumann:
        kernel_free = x2 - (op.weights @ x2) / total
    else:
        kernel_free = x2
    acc += (s_min**half / half) * kernel_free
    acc += (s_max ** (half - 1.0) / (1.0 - half)) * (rhs / w)
    out = math.sin(alpha * math.pi / 2.0) / math.pi * acc
    return op.prolong(out[:, 0] if vec else out)


@dataclass
class HeatKernelColumn:
    tau: float
    source_node: int
    values: np.ndarray
    mass: float
    boundary_mass: float
    min_value: float
    bound_C: float
    bound_c: float
    contaminated: bool

    def to_dict(self):
        return {k: v for k, v in self.__dict__.items() if k != "values"}


def heat_kernel_column(op, tau, source_node=0):
    """p_tau(x0, .) with x0 the grid node ``source_node``.

    For node 0 (the base point) this is the point-source heat kernel; for
    other nodes it is the kernel averaged over the sphere of that radius.
    Also fits a Gaussian bound p <= C / V(sqrt(tau)) exp(-c d^2 / tau):
    c is the largest candidate in (0, 1/2] keeping C within twice its c -> 0
    value.
    """
    if not tau > 0:
        raise ParameterError(f"tau must be positive, got {tau}")
    m = op.model
    if not 0 <= source_node < op.dof.size or source_node >= m.nodes - 1:
        raise ParameterError(f"source node {source_node} is not interior")
    decay = np.exp(-tau * op.eigenvalues)
    col = op.prolong(op.eigenvectors @ (decay * op.eigenvectors[source_node]))
    mass = m.integrate(col)
    outer = m.grid > 0.9 * m.r_max
    boundary_mass = float(np.dot(m.measure_weights[outer], np.abs(col[outer])))

    d2 = (m.grid - m.grid[source_node]) ** 2
    rad = min(math.sqrt(tau), m.r_max)
    vol = volume_ball(m, rad)
    cands = np.linspace(0.0, 0.5, 51)
    pos = np.clip(col, 0.0, None) * vol
    cs = np.array([np.max(pos * np.exp(c * d2 / tau)) for c in cands])
    ok = np.flatnonzero(cs <= 2.0 * cs[0])
    k = int(ok[-1])
    return HeatKernelColumn(
        tau=tau, source_node=source_node, values=col, mass=mass,
        boundary_mass=boundary_mass, min_value=float(col.min()),
        bound_C=float(cs[k]), bound_c=float(cands[k]),
        contaminated=bool(abs(1.0 - mass) > 0.01 or boundary_mass > 0.01),
    )
