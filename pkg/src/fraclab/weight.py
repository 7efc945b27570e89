"""The weight profile h(t, x) = t^{1+n/a} / (d(x,p)^2 + t^{2/a})^{(n+a)/2} and
the functional phi(t) = int h(t+N, x) Re u(t, x) dmu built on it.

h(t, p) = 1 for every t, and h is a rescaling of the profile (1 + rho^2)^{-(n+a)/2}
with rho = d / t^{1/a}; on flat space t |(-Delta)^{a/2} h| / h is therefore
t-independent, which is what ``verify_frac_bound`` certifies on a grid.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .errors import ModelMismatchError, ParameterError, ResolutionError
from .operator import apply_fractional


@dataclass(frozen=True)
class WeightParams:
    """alpha, dimension n, base point (grid index) and the time shift N.

    alpha = 2 is accepted for diagnostics only (``in_scope`` is False).
    ``model`` ties the weight to a grid for the quadrature-based quantities.
    """

    alpha: float
    n: int
    shift_N: float = 1.0
    base_index: int = 0
    model: object = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not 0 < self.alpha <= 2:
            raise ParameterError(f"alpha must lie in (0, 2), got {self.alpha}")
        if not self.shift_N > 0:
            raise ParameterError(f"shift N must be positive, got {self.shift_N}")
        if self.n < 1:
            raise ParameterError(f"dimension must be >= 1, got {self.n}")
        if self.base_index != 0:
            raise ParameterError("only the centre of symmetry (index 0) is supported as base point")
        if self.model is not None and self.model.n != self.n:
            raise ModelMismatchError(f"weight dimension {self.n} != model dimension {self.model.n}")

    @property
    def in_scope(self):
        return self.alpha < 2

    def core_radius(self, t):
        return t ** (1.0 / self.alpha)

    def with_shift(self, N):
        return WeightParams(self.alpha, self.n, N, self.base_index, self.model)


def _check_t(t):
    if np.any(np.asarray(t) <= 0):
        raise ParameterError(f"t must be positive, got {t}")


def eval_h(t, r, wp):
    _check_t(t)
    a, n = wp.alpha, wp.n
    r = np.asarray(r, dtype=float)
    # (t^{2/a})^{(n+a)/2} = t^{1+n/a}, so h = (1 + (r / t^{1/a})^2)^{-(n+a)/2}
    rho2 = (r / t ** (1.0 / a)) ** 2
    return (1.0 + rho2) ** (-(n + a) / 2.0)


def eval_dt_h(t, r, wp):
    """d/dt h = (1 + n/a) (h / t) r^2 / (r^2 + t^{2/a})."""
    _check_t(t)
    r = np.asarray(r, dtype=float)
    r2 = r * r
    return (1.0 + wp.n / wp.alpha) * eval_h(t, r, wp) / t * r2 / (r2 + t ** (2.0 / wp.alpha))


def minwedge_profile(t, r, wp):
    """[1 ^ (t^{1/a} / r)^2]^{(n+a)/2}, two-sided comparable to h."""
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore"):
        y = np.where(r > 0, (wp.core_radius(t) / np.where(r > 0, r, 1.0)) ** 2, np.inf)
    return np.minimum(1.0, y) ** ((wp.n + wp.alpha) / 2.0)


def _model_of(wp):
    if wp.model is None:
        raise ParameterError("WeightParams carries no model; attach one for grid quantities")
    return wp.model


def phi_of_state(state, wp):
    """phi(t) = int h(t + N, x) Re u(t, x) dmu by the grid quadrature."""
    m = _model_of(wp)
    if state.model is not m:
        raise ModelMismatchError("state and weight live on different models")
    T = state.t + wp.shift_N
    return m.integrate(eval_h(T, m.grid, wp) * np.real(state.u))


def h_l2_norm(wp, T, tail=False):
    """||h(T, .)||_{L^2}; with ``tail`` the part beyond r_max is added by
    adaptive quadrature of the closed-form warping."""
    _check_t(T)
    m = _model_of(wp)
    sq = m.integrate(eval_h(T, m.grid, wp) ** 2)
    if tail:
        sq += _tail_integral(m, lambda r: eval_h(T, r, wp) ** 2)
    return math.sqrt(sq)


def _tail_integral(m, f):
    """int_{r_max}^inf f(r) dmu for closed-form warpings; for sampled ones,
    bounded using psi(r) <= C r with C the grid maximum of psi/r."""
    if m.warping.analytic:
        dens = m.density
    else:
        c = float(np.max(m.warping.psi(m.grid[1:]) / m.grid[1:]))
        dens = lambda r: m.omega * (c * r) ** (m.n - 1)
    val, _ = quad(lambda r: float(f(r) * dens(r)), m.r_max, np.inf, limit=400)
    return val


@dataclass
class FracBoundReport:
    t_values: list
    sup_ratio: list
    spread: float
    ok: bool
    spread_tol: float
    alpha: float
    asserted: bool = True
    argmax_r: list = field(default_factory=list)
    gold_error: list | None = None
    profiles: dict = field(default_factory=dict, repr=False)

    def to_dict(self):
        d = {
            "t_values": list(self.t_values),
            "sup_ratio": list(self.sup_ratio),
            "spread": self.spread,
            "ok": self.ok,
            "spread_tol": self.spread_tol,
            "alpha": self.alpha,
            "asserted": self.asserted,
            "argmax_r": list(self.argmax_r),
        }
        if self.gold_error is not None:
            d["gold_error"] = list(self.gold_error)
        return d

    def write_ratios_csv(self, path):
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["t", "r", "ratio"])
            for t in self.t_values:
                r, ratio = self.profiles[t]
                for ri, qi in zip(r, ratio):
                    wr.writerow([repr(float(t)), repr(float(ri)), repr(float(qi))])


def interior_mask(m, fraction):
    return m.grid <= fraction * m.r_max


def verify_frac_bound(op, wp, t_values, spread_tol=3.0, interior=0.9, min_core_nodes=8):
    """Sup over the interior of t |(-Delta)^{a/2} h(t,.)| / h(t,.) for each t,
    and the spread max/min of those sups across t."""
    m = op.model
    if wp.n != m.n:
        raise ModelMismatchError(f"weight dimension {wp.n} != model dimension {m.n}")
    mask = interior_mask(m, interior)
    sups, where, profiles = [], [], {}
    for t in t_values:
        core = wp.core_radius(t)
        inside = int(np.count_nonzero(m.grid <= core))
        if inside < min_core_nodes:
            raise ResolutionError(f"t={t}: only {inside} nodes inside the core radius {core:.3g}")
        h = eval_h(t, m.grid, wp)
        ratio = t * np.abs(apply_fractional(op, wp.alpha, h)) / h
        k = int(np.argmax(ratio[mask]))
        sups.append(float(ratio[mask][k]))
        where.append(float(m.grid[mask][k]))
        profiles[t] = (m.grid[mask], ratio[mask])
    spread = max(sups) / min(sups)
    return FracBoundReport(
        t_values=list(t_values), sup_ratio=sups, spread=float(spread),
        ok=bool(spread <= spread_tol) if wp.in_scope else True,
        spread_tol=spread_tol, alpha=wp.alpha, asserted=wp.in_scope,
        argmax_r=where, profiles=profiles,
    )


def poisson_gold(t, r):
    """Exact (-Delta)^{1/2} h(t, .) on the line for alpha = 1: t (t^2 - r^2) / (r^2 + t^2)^2."""
    r = np.asarray(r, dtype=float)
    return t * (t * t - r * r) / (r * r + t * t) ** 2


def poisson_gold_plane(t, r):
    """Exact (-Delta)^{1/2} h(t, .) on the plane for alpha = 1: t^2 (2t^2 - r^2) / (r^2 + t^2)^{5/2}."""
    r = np.asarray(r, dtype=float)
    return t * t * (2 * t * t - r * r) / (r * r + t * t) ** 2.5


def gold_identity_error(op, wp, t, interior=0.5):
    """Max interior deviation of the computed (-Delta)^{1/2} h from the Poisson
    closed form, relative to max h = 1.  Only defined for flat n in {1, 2}, alpha = 1.
    """
    m = op.model
    if wp.alpha != 1 or m.warping.kind != "flat" or m.n not in (1, 2):
        raise ParameterError("gold identity needs flat n in {1, 2} and alpha = 1")
    gold = poisson_gold if m.n == 1 else poisson_gold_plane
    lh = apply_fractional(op, 1.0, eval_h(t, m.grid, wp))
    mask = interior_mask(m, interior)
    return float(np.max(np.abs(lh - gold(t, m.grid))[mask]))


REFERENCE_NORM_EXPONENT = -1.0


def h_norm_scaling(wp, T_values=None):
    """Log-log slope of ||h(T, .)||_{L2} (tail included) against T.

    On flat R^n the norm is c T^{n/(2a)}; the fitted slope is compared with
    that and with the decay exponent -1 (``REFERENCE_NORM_EXPONENT``), which
    the norm does not follow.
    """
    T = np.geomspace(1.0, 100.0, 9) if T_values is None else np.asarray(T_values, dtype=float)
    norms = np.array([h_l2_norm(wp, float(x), tail=True) for x in T])
    slope = float(np.polyfit(np.log(T), np.log(norms), 1)[0])
    predicted = wp.n / (2.0 * wp.alpha)
    return {
        "T_values": T.tolist(),
        "norms": norms.tolist(),
        "fitted_exponent": slope,
        "predicted_exponent": predicted,
        "reference_exponent": REFERENCE_NORM_EXPONENT,
        "matches_reference": bool(abs(slope - REFERENCE_NORM_EXPONENT) <= 0.05),
    }
