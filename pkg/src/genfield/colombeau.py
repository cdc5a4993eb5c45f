"""epsilon-nets of smooth functions on R, weighted seminorms and growth classes.

A net supplies, for each epsilon, the values of f_eps and its derivatives up
to order l on any set of sample points.  Seminorms

    mu_{q,l}(f) = sup_x (1 + |x|)^q max_{k <= l} |f^(k)(x)|

are evaluated on a lattice that is uniform over the window plus refined
patches around the net's features (peaks of width ~ eps).  Catalog nets come
with an analytic bound on the part of the sup outside the window; when that
bound does not exceed the window sup, the seminorm is marked certified.
Nets without a bound are checked by doubling the window.

Every verdict of :func:`classify` is evidence from finitely many epsilon
samples, never a proof of the asymptotic statement.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import hermite_e
from scipy import integrate

from . import _kernels

DerivFn = Callable[[np.ndarray, float, int], np.ndarray]
FeatureFn = Callable[[float], list]
TailFn = Callable[[int, int, float, float], float]

S_TYPE = "S"
TAU_TYPE = "tau"


@dataclass(frozen=True)
class EpsSchedule:
    start: float = 0.1
    ratio: float = 0.5
    count: int = 6

    def __post_init__(self):
        if not 0 < self.start <= 1:
            raise ValueError("schedule start must lie in (0, 1]")
        if not 0 < self.ratio < 1:
            raise ValueError("schedule ratio must lie in (0, 1)")
        if self.count < 2:
            raise ValueError("schedule needs at least two samples")

    @property
    def samples(self) -> np.ndarray:
        return self.start * self.ratio ** np.arange(self.count)

    def refined(self) -> "EpsSchedule":
        return EpsSchedule(self.start, self.ratio / 2, self.count)


@dataclass(frozen=True)
class ColombeauNet:
    name: str
    kind: str
    derivs: DerivFn = field(repr=False)
    features: FeatureFn = field(repr=False)
    window: float = 12.0
    l_max: int = 6
    tail: TailFn | None = field(default=None, repr=False)
    finite_difference: bool = False

    def __post_init__(self):
        if self.kind not in (S_TYPE, TAU_TYPE):
            raise ValueError(f"net kind must be {S_TYPE!r} or {TAU_TYPE!r}")

    def sample(self, eps: float, x) -> np.ndarray:
        return self.derivs(np.asarray(x, dtype=float), eps, 0)[0]

    def lattice(self, eps: float, window: float | None = None, n_coarse: int = 4001,
                n_fine: int = 2401) -> np.ndarray:
        W = self.window if window is None else window
        pts = [np.linspace(-W, W, n_coarse)]
        for c, s in self.features(eps):
            patch = c + s * np.linspace(-12.0, 12.0, n_fine)
            pts.append(patch[np.abs(patch) <= W])
            pts.append(np.array([c]))
        return np.unique(np.concatenate(pts))

    def __add__(self, other: "ColombeauNet") -> "ColombeauNet":
        return _combine(self, other, "+")

    def __mul__(self, other: "ColombeauNet") -> "ColombeauNet":
        return _combine(self, other, "*")


def _combine(f: ColombeauNet, g: ColombeauNet, op: str) -> ColombeauNet:
    kind = TAU_TYPE if TAU_TYPE in (f.kind, g.kind) else S_TYPE

    if op == "+":
        def derivs(x, eps, l):
            return f.derivs(x, eps, l) + g.derivs(x, eps, l)
    else:
        def derivs(x, eps, l):
            a = f.derivs(x, eps, l)
            b = g.derivs(x, eps, l)
            out = np.zeros_like(a)
            for k in range(l + 1):
                for j in range(k + 1):
                    out[k] += math.comb(k, j) * a[j] * b[k - j]
            return out

    tail = None
    if f.tail is not None and g.tail is not None:
        if op == "+":
            def tail(q, l, eps, R):
                return f.tail(q, l, eps, R) + g.tail(q, l, eps, R)
        else:
            def tail(q, l, eps, R):
                # Leibniz with sup bounds that are monotone in the order
                return 2.0**l * f.tail(q, l, eps, R) * g.tail(0, l, eps, R)

    return ColombeauNet(
        name=f"({f.name}{op}{g.name})",
        kind=kind,
        derivs=derivs,
        features=lambda eps: f.features(eps) + g.features(eps),
        window=max(f.window, g.window),
        l_max=min(f.l_max, g.l_max),
        tail=tail,
    )


# ---------------------------------------------------------------------------
# building blocks
# ---------------------------------------------------------------------------

_SQRT2PI = math.sqrt(2.0 * math.pi)


def _hermite_abs_sum(k: int) -> float:
    c = hermite_e.herme2poly([0] * k + [1])
    return float(np.sum(np.abs(c)))


def gaussian_net(name: str, center: float = 0.0, scale: Callable[[float], float] = lambda e: 1.0,
                 amplitude: Callable[[float], float] = lambda e: 1.0, kind: str = S_TYPE,
                 window: float = 12.0) -> ColombeauNet:
    """f_eps(x) = amplitude(eps) * phi((x - center) / scale(eps)), phi the N(0,1) density."""

    def derivs(x, eps, l):
        s = scale(eps)
        A = amplitude(eps)
        u = (x - center) / s
        base = A * np.exp(-0.5 * u * u) / _SQRT2PI
        out = np.empty((l + 1, x.size))
        for k in range(l + 1):
            out[k] = (-1) ** k * s ** (-k) * hermite_e.hermeval(u, [0] * k + [1]) * base
        return out

    def tail(q, l, eps, R):
        s = scale(eps)
        A = amplitude(eps)
        U = (R - abs(center)) / s
        bound = 0.0
        for k in range(l + 1):
            if U < max(1.0, math.sqrt(max(k + max(q, 0), 0))):
                return math.inf
            weight = (1.0 + abs(center) + s * U) ** q if q > 0 else 1.0
            val = A * s ** (-k) * _hermite_abs_sum(k) * U**k * weight * math.exp(-0.5 * U * U) / _SQRT2PI
            bound = max(bound, val)
        return bound

    return ColombeauNet(name, kind, derivs, lambda eps: [(center, scale(eps))], window=window, tail=tail)


def _bump_log_derivs(u: np.ndarray, n: int) -> list:
    """g^(j)(u), j = 0..n, for g(u) = -1/(1 - u^2) on |u| < 1."""
    out = []
    for j in range(n + 1):
        f = math.factorial(j)
        out.append(-0.5 * (f / (1.0 - u) ** (j + 1) + (-1) ** j * f / (1.0 + u) ** (j + 1)))
    return out


def bump(u, l: int = 0) -> np.ndarray:
    """exp(-1/(1-u^2)) on |u| < 1 and its derivatives up to order l."""
    u = np.asarray(u, dtype=float)
    out = np.zeros((l + 1, u.size))
    inside = np.abs(u) < 1.0
    ui = u[inside]
    if ui.size:
        g = _bump_log_derivs(ui, l)
        h = [np.exp(g[0])]
        for k in range(1, l + 1):
            acc = np.zeros_like(ui)
            for j in range(k):
                acc += math.comb(k - 1, j) * g[j + 1] * h[k - 1 - j]
            h.append(acc)
        for k in range(l + 1):
            out[k, inside] = h[k]
    return out


BUMP_MASS = integrate.quad(lambda u: math.exp(-1.0 / (1.0 - u * u)), -1.0, 1.0,
                           epsabs=0.0, epsrel=1e-12, limit=200)[0]


def bump_net(name: str, center: float = 0.0, scale: Callable[[float], float] = lambda e: 1.0,
             amplitude: Callable[[float], float] = lambda e: 1.0, kind: str = S_TYPE,
             window: float = 12.0) -> ColombeauNet:
    """f_eps(x) = amplitude(eps) * bump((x - center) / scale(eps))."""

    def derivs(x, eps, l):
        s = scale(eps)
        b = bump((x - center) / s, l)
        for k in range(l + 1):
            b[k] *= amplitude(eps) * s ** (-k)
        return b

    def tail(q, l, eps, R):
        return 0.0 if R >= abs(center) + scale(eps) else math.inf

    return ColombeauNet(name, kind, derivs, lambda eps: [(center, scale(eps))], window=window, tail=tail)


def polynomial_net(name: str, coeffs: Sequence[float], eps_shift: float = 0.0,
                   kind: str = TAU_TYPE, window: float = 12.0) -> ColombeauNet:
    """f_eps(x) = sum_j c_j x^j + eps_shift * eps; degree is what drives the tempered class."""
    poly = np.polynomial.Polynomial(coeffs)
    deg = poly.degree()

    def derivs(x, eps, l):
        out = np.empty((l + 1, x.size))
        p = poly + eps_shift * eps
        for k in range(l + 1):
            out[k] = p(x)
            p = p.deriv()
        return out

    def tail(q, l, eps, R):
        # (1+|x|)^q |p^(k)(x)| <= C (1+|x|)^(q + deg - k); bounded tail only if q + deg <= 0
        if q + deg > 0:
            return math.inf
        C = float(np.sum(np.abs(poly.coef))) + abs(eps_shift * eps)
        return C * (1.0 + R) ** (q + deg) * math.factorial(deg)

    return ColombeauNet(name, kind, derivs, lambda eps: [], window=window, tail=tail)


def from_function(name: str, fn: Callable[[np.ndarray, float], np.ndarray], kind: str = S_TYPE,
                  features: FeatureFn = lambda eps: [], window: float = 12.0, step: float = 1e-3,
                  l_max: int = 3) -> ColombeauNet:
    """Net known only through its values; derivatives by central differences.

    The k-th derivative uses the centred binomial stencil with spacing h equal
    to ``step`` times the narrowest feature width, which is O(h^2) accurate.
    """

    def derivs(x, eps, l):
        widths = [s for _, s in features(eps)]
        h = step * min(widths + [1.0])
        out = np.empty((l + 1, x.size))
        out[0] = fn(x, eps)
        for k in range(1, l + 1):
            acc = np.zeros(x.size)
            for j in range(k + 1):
                acc += (-1) ** j * math.comb(k, j) * fn(x + (k / 2 - j) * h, eps)
            out[k] = acc / h**k
        return out

    return ColombeauNet(name, kind, derivs, features, window=window, l_max=l_max,
                        tail=None, finite_difference=True)


def exp_square_net(name: str = "exp_square", window: float = 6.0) -> ColombeauNet:
    """f_eps(x) = exp(x^2): smooth but not of slow growth."""

    def derivs(x, eps, l):
        out = np.empty((l + 1, x.size))
        p = np.polynomial.Polynomial([1.0])
        e = np.exp(x * x)
        for k in range(l + 1):
            out[k] = p(x) * e
            p = p.deriv() + np.polynomial.Polynomial([0.0, 2.0]) * p
        return out

    return ColombeauNet(name, TAU_TYPE, derivs, lambda eps: [], window=window, tail=None)


def delta_net(p: float = 0.0, rho: str = "gaussian", kind: str = S_TYPE) -> ColombeauNet:
    """Mollified Dirac delta at p: eps^-1 rho((x - p) / eps) with unit integral."""
    if rho == "gaussian":
        return gaussian_net(f"delta_{rho}@{p:g}", p, lambda e: e, lambda e: 1.0 / e, kind)
    if rho == "bump":
        return bump_net(f"delta_{rho}@{p:g}", p, lambda e: e, lambda e: 1.0 / (e * BUMP_MASS), kind)
    raise ValueError(f"unknown mollifier {rho!r}; use 'gaussian' or 'bump'")


def mollified_delta(p: float, rho: str, eps: float, x) -> np.ndarray:
    return delta_net(p, rho).sample(eps, x)


def delta_action(p: float, rho: str, eps: float, g: Callable[[float], float]) -> float:
    """integral of delta_eps(x) g(x) dx by adaptive quadrature."""
    net = delta_net(p, rho)
    half = 12.0 * eps if rho == "gaussian" else eps
    val, _ = integrate.quad(lambda x: float(net.sample(eps, [x])[0]) * g(x), p - half, p + half,
                            epsabs=1e-15, epsrel=1e-13, limit=200)
    return val


CATALOG: dict[str, Callable[[], ColombeauNet]] = {
    "gaussian": lambda: gaussian_net("gaussian"),
    "wide_gaussian": lambda: gaussian_net("wide_gaussian", scale=lambda e: 2.0, amplitude=lambda e: 0.5),
    "bump": lambda: bump_net("bump"),
    "delta_gaussian": lambda: delta_net(0.0, "gaussian"),
    "delta_bump": lambda: delta_net(0.0, "bump"),
    "sqrt_delta_gaussian": lambda: gaussian_net("sqrt_delta_gaussian", scale=lambda e: math.sqrt(e),
                                                amplitude=lambda e: 1.0 / math.sqrt(e)),
    "negligible_gaussian": lambda: gaussian_net("negligible_gaussian", amplitude=lambda e: math.exp(-1.0 / e)),
    "negligible_bump": lambda: bump_net("negligible_bump", amplitude=lambda e: math.exp(-1.0 / e)),
    "tempered_quadratic": lambda: polynomial_net("tempered_quadratic", [0.0, 0.0, 1.0], eps_shift=1.0),
    "tempered_delta": lambda: delta_net(0.0, "gaussian", kind=TAU_TYPE),
    "exp_square": exp_square_net,
}

# verdicts the catalog is expected to produce (used by the CLI suite)
CATALOG_EXPECTED = {
    "gaussian": "moderate",
    "wide_gaussian": "moderate",
    "bump": "moderate",
    "delta_gaussian": "moderate",
    "delta_bump": "moderate",
    "sqrt_delta_gaussian": "moderate",
    "negligible_gaussian": "negligible",
    "negligible_bump": "negligible",
    "tempered_quadratic": "moderate",
    "tempered_delta": "moderate",
    "exp_square": "unclassified",
}

MODERATE_POOL = ("gaussian", "wide_gaussian", "bump", "delta_gaussian", "delta_bump",
                 "sqrt_delta_gaussian")
NEGLIGIBLE_POOL = ("negligible_gaussian", "negligible_bump")


def catalog_net(key: str) -> ColombeauNet:
    try:
        return CATALOG[key]()
    except KeyError:
        raise KeyError(f"unknown catalog net {key!r}; known: {sorted(CATALOG)}") from None


# ---------------------------------------------------------------------------
# seminorms and growth
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Seminorm:
    value: float
    certified: bool
    tail_bound: float


def seminorm_detail(net: ColombeauNet, q: int, l: int, eps: float,
                    window: float | None = None) -> Seminorm:
    if l > net.l_max:
        raise ValueError(f"derivative order {l} exceeds the net's l_max={net.l_max}")
    W = net.window if window is None else window
    x = net.lattice(eps, W)
    with np.errstate(over="ignore", invalid="ignore"):
        d = net.derivs(x, eps, l)
        val = _kernels.weighted_sup(x, d, q, l)
    tail = net.tail(q, l, eps, W) if net.tail is not None else math.inf
    return Seminorm(val, bool(np.isfinite(val) and tail <= val), tail)


def seminorm(net: ColombeauNet, q: int, l: int, eps: float) -> float:
    return seminorm_detail(net, q, l, eps).value


@dataclass(frozen=True)
class GrowthFit:
    slope: float
    intercept: float
    residual: float
    zero: bool = False


def fit_growth(eps: Sequence[float], values: Sequence[float]) -> GrowthFit:
    """Least-squares slope of log(values) against log(1/eps)."""
    eps = np.asarray(eps, dtype=float)
    values = np.asarray(values, dtype=float)
    if np.any(values <= 0):
        return GrowthFit(-math.inf, math.nan, math.nan, zero=True)
    X = np.log(1.0 / eps)
    Y = np.log(values)
    A = np.vstack([X, np.ones_like(X)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, Y, rcond=None)
    res = float(np.sqrt(np.mean((A @ [slope, intercept] - Y) ** 2)))
    return GrowthFit(float(slope), float(intercept), res)


def growth_exponent(net: ColombeauNet, q: int, l: int, schedule: EpsSchedule) -> GrowthFit:
    if schedule.count < 4:
        raise ValueError("growth fits need at least four schedule points")
    eps = schedule.samples
    return fit_growth(eps, [seminorm(net, q, l, e) for e in eps])


@dataclass(frozen=True)
class ClassifyConfig:
    p_max: int = 6
    l_max: int = 3
    q_s: tuple = (0, 1, 2)
    q_tau: tuple = (1, 2, 4)
    growth_cap: float = 20.0
    slope_tol: float = 0.1
    window_exponent: float = 0.25
    refinement_check: bool = False


@dataclass(frozen=True)
class EntryReport:
    q: int
    l: int
    values: tuple
    rates: tuple
    slope: float
    status: str  # negligible | moderate | unbounded
    certified: bool


@dataclass(frozen=True)
class Classification:
    verdict: str  # moderate | negligible | unclassified
    order: int | None
    orders: dict
    entries: tuple
    certified: bool
    notes: tuple = ()

    @property
    def label(self) -> str:
        if self.verdict == "moderate":
            return f"Moderate(n={self.order}) evidence"
        return f"{self.verdict.capitalize()} evidence"

    def __str__(self):
        return self.label


def _window_bounded(net: ColombeauNet, q: int, l: int, eps: float, cfg: ClassifyConfig) -> bool:
    W = net.window
    vals = [seminorm_detail(net, q, l, eps, W * 2**k).value for k in range(3)]
    if not all(np.isfinite(vals)):
        return False
    if vals[-2] <= 0:
        return True
    return math.log(vals[-1] / vals[-2], 2) < cfg.window_exponent


def _entry(net: ColombeauNet, q: int, l: int, schedule: EpsSchedule, cfg: ClassifyConfig) -> EntryReport:
    eps = schedule.samples
    details = [seminorm_detail(net, q, l, e) for e in eps]
    vals = np.array([d.value for d in details])
    certified = all(d.certified for d in details)
    if not np.all(np.isfinite(vals)):
        return EntryReport(q, l, tuple(vals), (), math.nan, "unbounded", certified)
    if not certified and not _window_bounded(net, q, l, float(eps[-1]), cfg):
        return EntryReport(q, l, tuple(vals), (), math.nan, "unbounded", False)
    rates = []
    for k in range(len(eps) - 1):
        if vals[k + 1] == 0:
            rates.append(-math.inf)
        elif vals[k] == 0:
            rates.append(math.inf)
        else:
            rates.append(math.log(vals[k + 1] / vals[k]) / math.log(eps[k] / eps[k + 1]))
    fit = fit_growth(eps, vals)
    tail_rates = rates[len(rates) // 2:]
    if all(r <= -cfg.p_max for r in tail_rates):
        status = "negligible"
    elif max(tail_rates) <= cfg.growth_cap:
        status = "moderate"
    else:
        status = "unbounded"
    return EntryReport(q, l, tuple(float(v) for v in vals), tuple(rates), fit.slope, status, certified)


def classify(net: ColombeauNet, schedule: EpsSchedule, config: ClassifyConfig | None = None) -> Classification:
    cfg = config or ClassifyConfig()
    l_top = min(cfg.l_max, net.l_max)
    entries = []
    notes = []
    orders: dict[int, int] = {}

    def order_of(e: EntryReport) -> int:
        if e.status == "negligible":
            return 0
        return max(0, math.ceil(e.slope - cfg.slope_tol))

    if net.kind == S_TYPE:
        for l in range(l_top + 1):
            row = [_entry(net, q, l, schedule, cfg) for q in cfg.q_s]
            entries += row
            if all(e.status in ("moderate", "negligible") for e in row):
                orders[l] = max(order_of(e) for e in row)
        statuses = {e.status for e in entries}
        if "unbounded" in statuses:
            verdict, order = "unclassified", None
            notes.append("some seminorm is unbounded or grows faster than any power")
        elif statuses == {"negligible"}:
            verdict, order = "negligible", None
        else:
            verdict, order = "moderate", max(orders.values())
    else:
        per_l = {}
        for l in range(l_top + 1):
            row = [_entry(net, -q, l, schedule, cfg) for q in cfg.q_tau]
            entries += row
            good = [e for e in row if e.status in ("moderate", "negligible")]
            if not good:
                per_l[l] = "unbounded"
                continue
            per_l[l] = "negligible" if any(e.status == "negligible" for e in good) else "moderate"
            orders[l] = min(order_of(e) for e in good)
        if "unbounded" in per_l.values():
            verdict, order = "unclassified", None
            notes.append("no weight (1+|x|)^-q in the configured range tames every derivative order")
        elif set(per_l.values()) == {"negligible"}:
            verdict, order = "negligible", None
        else:
            verdict, order = "moderate", max(orders.values())
    certified = all(e.certified for e in entries)
    if not certified:
        notes.append("sup taken over finite windows without an analytic tail bound")
    if cfg.refinement_check and verdict != "unclassified":
        again = classify(net, schedule.refined(), replace(cfg, refinement_check=False))
        if again.verdict != verdict:
            notes.append(f"verdict changed to {again.verdict} under schedule refinement")
            verdict, order = "unclassified", None
    return Classification(verdict, order, orders, tuple(entries), certified, tuple(notes))
