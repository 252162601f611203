"""
Problems module for the benchmark harness.
Contains the catalog of test objectives (a Moré-Garbow-Hillstrom subset in
least-squares form), the synthetic instances with known constants and the
saddle instance used for second-order runs.
"""
import logging
import re
from dataclasses import dataclass, replace
from typing import Callable, List, Optional, Tuple

import numpy as np

from cubic_newton.errors import UnknownProblem
from cubic_newton.models import CompositeDescriptor, CompositeKind, ProblemInstance
from cubic_newton.oracle import xi_measure

# Setup logging
logger = logging.getLogger(__name__)

__all__ = [
    "CatalogEntry", "catalog", "catalog_names", "get_entry", "with_composite",
    "synthetic_known_constants", "saddle_problem", "derivative_error", "xi_measure",
]

ResidualMap = Callable[[np.ndarray], np.ndarray]
WeightedHessian = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class LeastSquares:
    """f(x) = sum_i r_i(x)^2 from residuals, Jacobian and sum_i w_i hess r_i."""
    residuals: ResidualMap
    jacobian: ResidualMap
    weighted_hessian: WeightedHessian

    def value(self, x: np.ndarray) -> float:
        r = self.residuals(x)
        return float(r @ r)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return 2.0 * self.jacobian(x).T @ self.residuals(x)

    def hessian(self, x: np.ndarray) -> np.ndarray:
        J = self.jacobian(x)
        H = 2.0 * (J.T @ J + self.weighted_hessian(x, self.residuals(x)))
        return 0.5 * (H + H.T)

    def instance(self, dim: int, name: str) -> ProblemInstance:
        return ProblemInstance(dim=dim, smooth_value=self.value, smooth_gradient=self.gradient,
                               smooth_hessian=self.hessian, lower_bound_hint=0.0, name=name)


@dataclass(frozen=True, eq=False)
class CatalogEntry:
    """A named objective with its standard starting point."""
    name: str
    dim: int
    builder: Callable[[], ProblemInstance]
    standard_start: np.ndarray
    f_at_known_min: Optional[float] = None
    known_L_on_box: Optional[float] = None
    box: Optional[Tuple[np.ndarray, np.ndarray]] = None

    def build(self) -> ProblemInstance:
        return self.builder()

    @property
    def start(self) -> np.ndarray:
        return self.standard_start.copy()


def _rosenbrock() -> LeastSquares:
    def residuals(x):
        return np.array([10.0 * (x[1] - x[0] ** 2), 1.0 - x[0]])

    def jacobian(x):
        return np.array([[-20.0 * x[0], 10.0], [-1.0, 0.0]])

    def weighted_hessian(x, w):
        return np.array([[-20.0 * w[0], 0.0], [0.0, 0.0]])

    return LeastSquares(residuals, jacobian, weighted_hessian)


def _freudenstein_roth() -> LeastSquares:
    def residuals(x):
        x1, x2 = x
        return np.array([-13.0 + x1 + ((5.0 - x2) * x2 - 2.0) * x2,
                         -29.0 + x1 + ((x2 + 1.0) * x2 - 14.0) * x2])

    def jacobian(x):
        x2 = x[1]
        return np.array([[1.0, 10.0 * x2 - 3.0 * x2 ** 2 - 2.0],
                         [1.0, 3.0 * x2 ** 2 + 2.0 * x2 - 14.0]])

    def weighted_hessian(x, w):
        x2 = x[1]
        return np.array([[0.0, 0.0], [0.0, w[0] * (10.0 - 6.0 * x2) + w[1] * (6.0 * x2 + 2.0)]])

    return LeastSquares(residuals, jacobian, weighted_hessian)


def _powell_badly_scaled() -> LeastSquares:
    def residuals(x):
        x1, x2 = x
        return np.array([1e4 * x1 * x2 - 1.0, np.exp(-x1) + np.exp(-x2) - 1.0001])

    def jacobian(x):
        x1, x2 = x
        return np.array([[1e4 * x2, 1e4 * x1], [-np.exp(-x1), -np.exp(-x2)]])

    def weighted_hessian(x, w):
        x1, x2 = x
        return np.array([[w[1] * np.exp(-x1), 1e4 * w[0]],
                         [1e4 * w[0], w[1] * np.exp(-x2)]])

    return LeastSquares(residuals, jacobian, weighted_hessian)


def _brown_badly_scaled() -> LeastSquares:
    def residuals(x):
        x1, x2 = x
        return np.array([x1 - 1e6, x2 - 2e-6, x1 * x2 - 2.0])

    def jacobian(x):
        x1, x2 = x
        return np.array([[1.0, 0.0], [0.0, 1.0], [x2, x1]])

    def weighted_hessian(x, w):
        return np.array([[0.0, w[2]], [w[2], 0.0]])

    return LeastSquares(residuals, jacobian, weighted_hessian)


_BEALE_Y = np.array([1.5, 2.25, 2.625])
_BEALE_I = np.array([1.0, 2.0, 3.0])


def _beale() -> LeastSquares:
    def residuals(x):
        x1, x2 = x
        return _BEALE_Y - x1 * (1.0 - x2 ** _BEALE_I)

    def jacobian(x):
        x1, x2 = x
        return np.column_stack([-(1.0 - x2 ** _BEALE_I), x1 * _BEALE_I * x2 ** (_BEALE_I - 1.0)])

    def weighted_hessian(x, w):
        x1, x2 = x
        cross = float(np.sum(w * _BEALE_I * x2 ** (_BEALE_I - 1.0)))
        # i (i - 1) x2^(i - 2), written out to stay finite at x2 = 0
        second = np.array([0.0, 2.0, 6.0 * x2])
        return np.array([[0.0, cross], [cross, x1 * float(w @ second)]])

    return LeastSquares(residuals, jacobian, weighted_hessian)


_TWO_PI = 2.0 * np.pi


def _helical_theta(x1: float, x2: float) -> float:
    if x1 > 0:
        return np.arctan(x2 / x1) / _TWO_PI
    if x1 < 0:
        return np.arctan(x2 / x1) / _TWO_PI + 0.5
    return 0.25 if x2 >= 0 else -0.25


def _helical_valley() -> LeastSquares:
    def residuals(x):
        x1, x2, x3 = x
        theta = _helical_theta(x1, x2)
        return np.array([10.0 * (x3 - 10.0 * theta), 10.0 * (np.hypot(x1, x2) - 1.0), x3])

    def jacobian(x):
        x1, x2, _ = x
        rho = x1 ** 2 + x2 ** 2
        norm = np.sqrt(rho)
        return np.array([[100.0 * x2 / (_TWO_PI * rho), -100.0 * x1 / (_TWO_PI * rho), 10.0],
                         [10.0 * x1 / norm, 10.0 * x2 / norm, 0.0],
                         [0.0, 0.0, 1.0]])

    def weighted_hessian(x, w):
        x1, x2, _ = x
        rho = x1 ** 2 + x2 ** 2
        c = 1.0 / _TWO_PI
        t11 = 2.0 * c * x1 * x2 / rho ** 2
        t12 = -c * (x1 ** 2 - x2 ** 2) / rho ** 2
        radial = 10.0 / rho ** 1.5
        H = np.zeros((3, 3))
        H[:2, :2] = (-100.0 * w[0] * np.array([[t11, t12], [t12, -t11]])
                     + w[1] * radial * np.array([[x2 ** 2, -x1 * x2], [-x1 * x2, x1 ** 2]]))
        return H

    return LeastSquares(residuals, jacobian, weighted_hessian)


def _powell_singular() -> LeastSquares:
    a = np.array([0.0, 1.0, -2.0, 0.0])
    b = np.array([1.0, 0.0, 0.0, -1.0])
    root5, root10 = np.sqrt(5.0), np.sqrt(10.0)

    def residuals(x):
        return np.array([x[0] + 10.0 * x[1], root5 * (x[2] - x[3]),
                         (x[1] - 2.0 * x[2]) ** 2, root10 * (x[0] - x[3]) ** 2])

    def jacobian(x):
        return np.array([[1.0, 10.0, 0.0, 0.0],
                         [0.0, 0.0, root5, -root5],
                         2.0 * (x[1] - 2.0 * x[2]) * a,
                         2.0 * root10 * (x[0] - x[3]) * b])

    def weighted_hessian(x, w):
        return 2.0 * w[2] * np.outer(a, a) + 2.0 * root10 * w[3] * np.outer(b, b)

    return LeastSquares(residuals, jacobian, weighted_hessian)


def _wood() -> LeastSquares:
    root90, root10 = np.sqrt(90.0), np.sqrt(10.0)

    def residuals(x):
        x1, x2, x3, x4 = x
        return np.array([10.0 * (x2 - x1 ** 2), 1.0 - x1, root90 * (x4 - x3 ** 2), 1.0 - x3,
                         root10 * (x2 + x4 - 2.0), (x2 - x4) / root10])

    def jacobian(x):
        x1, _, x3, _ = x
        return np.array([[-20.0 * x1, 10.0, 0.0, 0.0],
                         [-1.0, 0.0, 0.0, 0.0],
                         [0.0, 0.0, -2.0 * root90 * x3, root90],
                         [0.0, 0.0, -1.0, 0.0],
                         [0.0, root10, 0.0, root10],
                         [0.0, 1.0 / root10, 0.0, -1.0 / root10]])

    def weighted_hessian(x, w):
        return np.diag([-20.0 * w[0], 0.0, -2.0 * root90 * w[2], 0.0])

    return LeastSquares(residuals, jacobian, weighted_hessian)


_BIGGS_T = 0.1 * np.arange(1, 14)
_BIGGS_Y = np.exp(-_BIGGS_T) - 5.0 * np.exp(-10.0 * _BIGGS_T) + 3.0 * np.exp(-4.0 * _BIGGS_T)


def _biggs_exp6() -> LeastSquares:
    t = _BIGGS_T

    def residuals(x):
        return (x[2] * np.exp(-t * x[0]) - x[3] * np.exp(-t * x[1])
                + x[5] * np.exp(-t * x[4]) - _BIGGS_Y)

    def jacobian(x):
        e1, e2, e5 = np.exp(-t * x[0]), np.exp(-t * x[1]), np.exp(-t * x[4])
        return np.column_stack([-t * x[2] * e1, t * x[3] * e2, e1, -e2, -t * x[5] * e5, e5])

    def weighted_hessian(x, w):
        e1, e2, e5 = np.exp(-t * x[0]), np.exp(-t * x[1]), np.exp(-t * x[4])
        H = np.zeros((6, 6))
        H[0, 0] = np.sum(w * t ** 2 * x[2] * e1)
        H[0, 2] = H[2, 0] = -np.sum(w * t * e1)
        H[1, 1] = -np.sum(w * t ** 2 * x[3] * e2)
        H[1, 3] = H[3, 1] = np.sum(w * t * e2)
        H[4, 4] = np.sum(w * t ** 2 * x[5] * e5)
        H[4, 5] = H[5, 4] = -np.sum(w * t * e5)
        return H

    return LeastSquares(residuals, jacobian, weighted_hessian)


def _extended_rosenbrock(n: int) -> LeastSquares:
    odd = np.arange(0, n, 2)

    def residuals(x):
        r = np.empty(n)
        r[0::2] = 10.0 * (x[odd + 1] - x[odd] ** 2)
        r[1::2] = 1.0 - x[odd]
        return r

    def jacobian(x):
        J = np.zeros((n, n))
        J[odd, odd] = -20.0 * x[odd]
        J[odd, odd + 1] = 10.0
        J[odd + 1, odd] = -1.0
        return J

    def weighted_hessian(x, w):
        d = np.zeros(n)
        d[odd] = -20.0 * w[0::2]
        return np.diag(d)

    return LeastSquares(residuals, jacobian, weighted_hessian)


def _broyden_tridiagonal(n: int) -> LeastSquares:
    def residuals(x):
        padded = np.concatenate([[0.0], x, [0.0]])
        return (3.0 - 2.0 * x) * x - padded[:-2] - 2.0 * padded[2:] + 1.0

    def jacobian(x):
        return (np.diag(3.0 - 4.0 * x) - np.eye(n, k=-1) - 2.0 * np.eye(n, k=1))

    def weighted_hessian(x, w):
        return np.diag(-4.0 * w)

    return LeastSquares(residuals, jacobian, weighted_hessian)


def _trigonometric(n: int) -> LeastSquares:
    i = np.arange(1, n + 1, dtype=float)

    def residuals(x):
        return n - np.sum(np.cos(x)) + i * (1.0 - np.cos(x)) - np.sin(x)

    def jacobian(x):
        return np.tile(np.sin(x), (n, 1)) + np.diag(i * np.sin(x) - np.cos(x))

    def weighted_hessian(x, w):
        return np.diag(np.sum(w) * np.cos(x) + w * (i * np.cos(x) + np.sin(x)))

    return LeastSquares(residuals, jacobian, weighted_hessian)


def _entry(name: str, dim: int, ls: Callable[[], LeastSquares], start, f_min: Optional[float]) -> CatalogEntry:
    return CatalogEntry(name=name, dim=dim, builder=lambda: ls().instance(dim, name),
                        standard_start=np.asarray(start, dtype=float), f_at_known_min=f_min)


def catalog() -> List[CatalogEntry]:
    """The benchmark catalog in fixed order."""
    return [
        _entry("rosenbrock", 2, _rosenbrock, [-1.2, 1.0], 0.0),
        _entry("freudenstein_roth", 2, _freudenstein_roth, [0.5, -2.0], 0.0),
        _entry("powell_badly_scaled", 2, _powell_badly_scaled, [0.0, 1.0], 0.0),
        _entry("brown_badly_scaled", 2, _brown_badly_scaled, [1.0, 1.0], 0.0),
        _entry("beale", 2, _beale, [1.0, 1.0], 0.0),
        _entry("helical_valley", 3, _helical_valley, [-1.0, 0.0, 0.0], 0.0),
        _entry("powell_singular", 4, _powell_singular, [3.0, -1.0, 0.0, 1.0], 0.0),
        _entry("wood", 4, _wood, [-3.0, -1.0, -3.0, -1.0], 0.0),
        _entry("biggs_exp6", 6, _biggs_exp6, [1.0, 2.0, 1.0, 1.0, 1.0, 1.0], 0.0),
        _entry("extended_rosenbrock", 10, lambda: _extended_rosenbrock(10), [-1.2, 1.0] * 5, 0.0),
        _entry("broyden_tridiagonal", 20, lambda: _broyden_tridiagonal(20), [-1.0] * 20, 0.0),
        _entry("trigonometric", 10, lambda: _trigonometric(10), [0.1] * 10, 0.0),
    ]


def catalog_names() -> List[str]:
    return [entry.name for entry in catalog()]


_SYNTHETIC_NAME = re.compile(r"^synthetic(\d+)?$")


def get_entry(name: str, seed: int = 0) -> CatalogEntry:
    """Look up a problem by name (case-insensitive).

    Besides the catalog, ``saddle`` and ``synthetic`` / ``synthetic<n>`` (a
    synthetic instance of dimension n, default 10, drawn from ``seed``) resolve.
    """
    key = name.strip().lower()
    for entry in catalog():
        if entry.name == key:
            return entry
    if key == "saddle":
        return saddle_problem()
    match = _SYNTHETIC_NAME.match(key)
    if match:
        return synthetic_known_constants(seed, int(match.group(1) or 10))
    raise UnknownProblem(f"unknown problem '{name}'")


def with_composite(entry: CatalogEntry, composite: CompositeDescriptor) -> CatalogEntry:
    """Wrap a catalog entry with a box or l1 term; the start is clipped into a box."""
    suffix = "box" if composite.kind is CompositeKind.BOX else composite.kind.value
    name = f"{entry.name}+{suffix}"
    start = entry.standard_start
    box = entry.box
    if composite.kind is CompositeKind.BOX:
        start = composite.prox(start, 1.0)
        box = (np.broadcast_to(composite.lower, start.shape).copy(),
               np.broadcast_to(composite.upper, start.shape).copy())

    def builder() -> ProblemInstance:
        return replace(entry.build(), composite=composite, name=name)

    return CatalogEntry(name=name, dim=entry.dim, builder=builder, standard_start=start,
                        known_L_on_box=entry.known_L_on_box, box=box)


def synthetic_known_constants(seed: int, n: int, beta: float = 1.0, mu: float = 1.0,
                              indefinite: bool = False, delta: float = 1.0) -> CatalogEntry:
    """f(x) = x'Qx/2 + (beta/6) sum_i c_i [(x_i^2 + delta^2)^{3/2} - delta^3].

    The third derivative of the smooth cubic surrogate is bounded by 6, so the
    Hessian is globally Lipschitz with L = beta * max c_i. Q has spectrum in
    [mu, 4 mu]; with ``indefinite`` its smallest eigenvalue is -mu instead.
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if beta < 0 or mu <= 0 or delta <= 0:
        raise ValueError("need beta >= 0, mu > 0 and delta > 0")
    rng = np.random.default_rng(seed)
    V, _ = np.linalg.qr(rng.standard_normal((n, n)))
    eigs = rng.uniform(mu, 4.0 * mu, n)
    eigs[0] = -mu if indefinite else mu
    Q = V @ np.diag(eigs) @ V.T
    Q = 0.5 * (Q + Q.T)
    c = rng.uniform(0.5, 1.0, n)
    start = rng.standard_normal(n)
    L = beta * float(np.max(c))
    d2 = delta * delta

    def value(x):
        return 0.5 * float(x @ Q @ x) + beta / 6.0 * float(np.sum(c * ((x * x + d2) ** 1.5 - delta ** 3)))

    def gradient(x):
        return Q @ x + 0.5 * beta * c * x * np.sqrt(x * x + d2)

    def hessian(x):
        root = np.sqrt(x * x + d2)
        return Q + np.diag(0.5 * beta * c * (2.0 * x * x + d2) / root)

    name = f"synthetic_s{seed}_n{n}"
    known_mu = None if indefinite else float(np.min(eigs))

    def builder() -> ProblemInstance:
        return ProblemInstance(dim=n, smooth_value=value, smooth_gradient=gradient,
                               smooth_hessian=hessian, known_L=L, known_mu=known_mu,
                               lower_bound_hint=None if indefinite else 0.0, name=name)

    return CatalogEntry(name=name, dim=n, builder=builder, standard_start=start,
                        f_at_known_min=None if indefinite else 0.0, known_L_on_box=L)


def saddle_problem() -> CatalogEntry:
    """f = (x1^2 - x2^2)/2 + x2^4/4 on the box [-2, 2]^2, started on the saddle's ridge."""
    lower, upper = np.full(2, -2.0), np.full(2, 2.0)
    composite = CompositeDescriptor.box(lower, upper)

    def value(x):
        return 0.5 * (x[0] ** 2 - x[1] ** 2) + 0.25 * x[1] ** 4

    def gradient(x):
        return np.array([x[0], -x[1] + x[1] ** 3])

    def hessian(x):
        return np.diag([1.0, -1.0 + 3.0 * x[1] ** 2])

    def builder() -> ProblemInstance:
        return ProblemInstance(dim=2, smooth_value=value, smooth_gradient=gradient,
                               smooth_hessian=hessian, composite=composite, known_L=12.0,
                               lower_bound_hint=-0.25, name="saddle")

    return CatalogEntry(name="saddle", dim=2, builder=builder, standard_start=np.array([1.0, 0.0]),
                        f_at_known_min=-0.25, known_L_on_box=12.0, box=(lower, upper))


def derivative_error(entry: CatalogEntry, points: int = 10, seed: int = 0, h: float = 1e-4) -> float:
    """Largest relative gap between the analytic gradient and central differences of f.

    Points are drawn around the standard start (inside the box when there is one).
    """
    p = entry.build()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(points):
        x = entry.standard_start + 0.5 * rng.standard_normal(entry.dim)
        if entry.box is not None:
            x = np.clip(x, entry.box[0] + h, entry.box[1] - h)
        analytic = p.smooth_gradient(x)
        numeric = np.empty(entry.dim)
        for i in range(entry.dim):
            step = h * max(1.0, abs(x[i]))
            e = np.zeros(entry.dim)
            e[i] = step
            numeric[i] = (p.smooth_value(x + e) - p.smooth_value(x - e)) / (2.0 * step)
        scale = max(1.0, float(np.linalg.norm(analytic)))
        worst = max(worst, float(np.linalg.norm(analytic - numeric)) / scale)
    return worst
