"""Plant nonlinearities f(x1, x2): built-in families, Jacobians, sample-scale
class membership, and reconstruction of the potentials U and S.

Membership over all of R^n x R^n cannot be decided by sampling. Everything
here is checked on a user-given box; the built-in families carry their class
membership analytically.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.stats import qmc

from .config import get_settings
from .errors import (
    DimensionError,
    NotAHessianFieldError,
    NotConservativeError,
    PlantConstructionError,
    PlantEvaluationError,
)
from .matnum import eig_extremes, spectral_norm, sym_part
from .models import ClassBounds, MembershipReport, PlantClass, PlantKind, PlantSpec

logger = logging.getLogger(__name__)

Vector = NDArray[np.float64]
Matrix = NDArray[np.float64]
FieldFn = Callable[[Vector, Vector], Vector]
JacobianFn = Callable[[Vector, Vector], Matrix]
ScalarFn = Callable[[Vector], float]
MatrixField = Callable[[Vector], Matrix]

EPS = np.finfo(float).eps
FIRST_STEP = EPS ** (1.0 / 3.0)
SECOND_STEP = EPS**0.25
SEGMENT_CHECKS = (0.0, 0.25, 0.5, 0.75, 1.0)
FIELD_TOL = 1e-6
REFINE_RTOL = 1e-10


@dataclass(frozen=True)
class Plant:
    """Plant nonlinearity with optional analytic derivatives and potentials"""

    n: int
    f: FieldFn
    kind: PlantKind
    claim: PlantClass = PlantClass.UNCHECKED
    jac_x1: Optional[JacobianFn] = None
    jac_x2: Optional[JacobianFn] = None
    potential_u: Optional[ScalarFn] = None
    potential_s: Optional[ScalarFn] = None
    potential_s_grad: Optional[Callable[[Vector], Vector]] = None
    bounds: Optional[ClassBounds] = None

    def __call__(self, x1: ArrayLike, x2: ArrayLike) -> Vector:
        a = _vector(x1, self.n, "x1")
        b = _vector(x2, self.n, "x2")
        value = np.asarray(self.f(a, b), dtype=float)
        if value.shape != (self.n,) or not np.all(np.isfinite(value)):
            raise PlantEvaluationError(
                f"f evaluated to {value!r}",
                point={"x1": a.tolist(), "x2": b.tolist()},
            )
        return value

    def zero(self) -> Vector:
        return np.zeros(self.n)


def _vector(x: ArrayLike, n: int, name: str) -> Vector:
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.shape != (n,):
        raise DimensionError(f"{name} must have shape ({n},), got {arr.shape}")
    return arr


def _matrix(value: Optional[ArrayLike], n: int, name: str) -> Matrix:
    """Scalar -> value * I, None -> 0, otherwise an n x n matrix"""
    if value is None:
        return np.zeros((n, n))
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        return float(arr) * np.eye(n)
    if arr.shape != (n, n):
        raise DimensionError(f"{name} must be {n}x{n}, got shape {arr.shape}")
    return arr


def _is_symmetric(M: Matrix) -> bool:
    return bool(np.max(np.abs(M - M.T), initial=0.0) <= 1e-12 * (1.0 + np.abs(M).max()))


def _require_bounds(bounds: Optional[ClassBounds], claim: PlantClass) -> ClassBounds:
    if bounds is None:
        raise PlantConstructionError(
            f"claim {claim.value} needs class bounds", bound="bounds"
        )
    return bounds


def _check_linear_claim(
    A: Matrix, B: Matrix, bounds: ClassBounds, claim: PlantClass
) -> None:
    if not _is_symmetric(A):
        raise PlantConstructionError(
            "df/dx1 at x2=0 is not symmetric, f(., 0) is not conservative",
            bound="conservative",
        )
    lam_max = eig_extremes(sym_part(A))[1]
    if lam_max > bounds.L1:
        raise PlantConstructionError(
            f"lambda_max(A_sym) = {lam_max:.6g} exceeds L1 = {bounds.L1:.6g}",
            bound="L1",
        )
    norm_b = spectral_norm(B)
    if norm_b > bounds.L2:
        raise PlantConstructionError(
            f"||B|| = {norm_b:.6g} exceeds L2 = {bounds.L2:.6g}", bound="L2"
        )
    if claim is PlantClass.G and not _is_symmetric(B):
        raise PlantConstructionError(
            "df/dx2 is not symmetric, no Hessian potential S exists",
            bound="hessian",
        )


def _quadratic(M: Matrix, c: Optional[Vector] = None) -> ScalarFn:
    if c is None:
        return lambda x: 0.5 * float(x @ M @ x)
    return lambda x: 0.5 * float(x @ M @ x) + float(c @ x)


def make_builtin(
    kind: PlantKind,
    n: int,
    *,
    bounds: Optional[ClassBounds] = None,
    claim: Optional[PlantClass] = None,
    A: Optional[ArrayLike] = None,
    B: Optional[ArrayLike] = None,
    c: Optional[ArrayLike] = None,
    a: Optional[float] = None,
    potential_u: Optional[ScalarFn] = None,
    potential_s: Optional[ScalarFn] = None,
    grad_u: Optional[Callable[[Vector], Vector]] = None,
    hess_s: Optional[MatrixField] = None,
) -> Plant:
    """
    Construct a built-in plant.

    Args:
        kind: linear (A x1 + B x2 + c), worst_case (L1 x1 + L2 x2 + c),
            sinusoidal (a sin(x1) + B x2) or gradient (grad U + hess S x2)
        n: State dimension
        bounds: Class bounds the plant claims; required by worst_case
        claim: Claimed class; checked against bounds for linear / sinusoidal

    Returns:
        Immutable plant
    """
    if n < 1:
        raise DimensionError(f"n must be >= 1, got {n}")
    offset = np.zeros(n) if c is None else _vector(c, n, "c")

    if kind is PlantKind.WORST_CASE:
        wc = _require_bounds(bounds, PlantClass.G)
        A_mat = wc.L1 * np.eye(n)
        B_mat = wc.L2 * np.eye(n)
        return Plant(
            n=n,
            f=lambda x1, x2: wc.L1 * x1 + wc.L2 * x2 + offset,
            kind=kind,
            claim=PlantClass.G if claim is None else claim,
            jac_x1=lambda x1, x2: A_mat.copy(),
            jac_x2=lambda x1, x2: B_mat.copy(),
            potential_u=_quadratic(A_mat, offset),
            potential_s=_quadratic(B_mat),
            potential_s_grad=lambda x: B_mat @ x,
            bounds=wc,
        )

    claim = PlantClass.UNCHECKED if claim is None else claim

    if kind is PlantKind.LINEAR:
        A_mat = _matrix(A, n, "A")
        B_mat = _matrix(B, n, "B")
        if claim is not PlantClass.UNCHECKED:
            _check_linear_claim(A_mat, B_mat, _require_bounds(bounds, claim), claim)
        b_sym = _is_symmetric(B_mat)
        return Plant(
            n=n,
            f=lambda x1, x2: A_mat @ x1 + B_mat @ x2 + offset,
            kind=kind,
            claim=claim,
            jac_x1=lambda x1, x2: A_mat.copy(),
            jac_x2=lambda x1, x2: B_mat.copy(),
            potential_u=_quadratic(A_mat, offset) if _is_symmetric(A_mat) else None,
            potential_s=_quadratic(B_mat) if b_sym else None,
            potential_s_grad=(lambda x: B_mat @ x) if b_sym else None,
            bounds=bounds,
        )

    if kind is PlantKind.SINUSOIDAL:
        if a is None:
            raise PlantConstructionError(
                "sinusoidal plant needs amplitude a", bound="a"
            )
        amp = float(a)
        B_mat = _matrix(B, n, "B")
        if claim is not PlantClass.UNCHECKED:
            cb = _require_bounds(bounds, claim)
            if abs(amp) > cb.L1:
                raise PlantConstructionError(
                    f"|a| = {abs(amp):.6g} exceeds L1 = {cb.L1:.6g}", bound="L1"
                )
            _check_linear_claim(np.zeros((n, n)), B_mat, cb, claim)
        b_sym = _is_symmetric(B_mat)
        return Plant(
            n=n,
            f=lambda x1, x2: amp * np.sin(x1) + B_mat @ x2,
            kind=kind,
            claim=claim,
            jac_x1=lambda x1, x2: np.diag(amp * np.cos(x1)),
            jac_x2=lambda x1, x2: B_mat.copy(),
            potential_u=lambda x: -amp * float(np.sum(np.cos(x))),
            potential_s=_quadratic(B_mat) if b_sym else None,
            potential_s_grad=(lambda x: B_mat @ x) if b_sym else None,
            bounds=bounds,
        )

    if kind is PlantKind.GRADIENT:
        if potential_u is None:
            raise PlantConstructionError("gradient plant needs U", bound="U")
        u_fn = potential_u
        gu = grad_u or (lambda x: _fd_gradient(u_fn, x))
        if potential_s is None and hess_s is None:
            hs: MatrixField = lambda x: np.zeros((n, n))  # noqa: E731
            s_fn: Optional[ScalarFn] = lambda x: 0.0  # noqa: E731
        else:
            s_fn = potential_s
            hs = hess_s or (lambda x: _fd_hessian(s_fn, x))
        s_grad = (lambda x: _fd_gradient(s_fn, x)) if s_fn is not None else None
        def hess_u(x: Vector) -> Matrix:
            if grad_u is None:
                return _fd_hessian(u_fn, x)
            return _fd_jacobian(lambda v: np.asarray(grad_u(v)), x, FIRST_STEP)

        def jac_x1(x1: Vector, x2: Vector) -> Matrix:
            # hs may itself be differenced, so its slope takes the larger step
            coupling = _fd_jacobian(lambda v: hs(v) @ x2, x1, SECOND_STEP)
            return hess_u(x1) + coupling

        return Plant(
            n=n,
            f=lambda x1, x2: np.asarray(gu(x1), dtype=float) + hs(x1) @ x2,
            kind=kind,
            claim=claim,
            jac_x1=jac_x1,
            jac_x2=lambda x1, x2: np.asarray(hs(x1), dtype=float),
            potential_u=u_fn,
            potential_s=s_fn,
            potential_s_grad=s_grad,
            bounds=bounds,
        )

    raise PlantConstructionError(f"unknown plant kind {kind!r}", bound="kind")


def plant_from_spec(spec: PlantSpec) -> Plant:
    """Build a plant from a specification file"""
    p = spec.params
    return make_builtin(
        spec.kind,
        spec.n,
        bounds=spec.bounds,
        claim=None if spec.kind is PlantKind.WORST_CASE else spec.claim,
        A=p.A,
        B=p.B,
        c=p.c,
        a=p.a,
    )


# Finite differences


def _steps(x: Vector, base: float) -> Vector:
    return base * (1.0 + np.abs(x))


def _fd_gradient(fn: ScalarFn, x: Vector) -> Vector:
    x = np.asarray(x, dtype=float)
    h = _steps(x, FIRST_STEP)
    grad = np.empty_like(x)
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h[j]
        grad[j] = (fn(x + e) - fn(x - e)) / (2.0 * h[j])
    return grad


def _fd_hessian(fn: ScalarFn, x: Vector) -> Matrix:
    x = np.asarray(x, dtype=float)
    n = x.size
    h = _steps(x, SECOND_STEP)
    H = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            ei = np.zeros(n)
            ej = np.zeros(n)
            ei[i] = h[i]
            ej[j] = h[j]
            H[i, j] = H[j, i] = (
                fn(x + ei + ej) - fn(x + ei - ej) - fn(x - ei + ej) + fn(x - ei - ej)
            ) / (4.0 * h[i] * h[j])
    return H


def _fd_jacobian(fn: Callable[[Vector], Vector], x: Vector, base: float) -> Matrix:
    h = _steps(x, base)
    cols = []
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h[j]
        cols.append((fn(x + e) - fn(x - e)) / (2.0 * h[j]))
    return np.column_stack(cols)


def jacobians(p: Plant, x1: ArrayLike, x2: ArrayLike) -> tuple[Matrix, Matrix]:
    """(df/dx1, df/dx2), analytic when available, else central differences"""
    a = _vector(x1, p.n, "x1")
    b = _vector(x2, p.n, "x2")
    if p.jac_x1 is not None:
        J1 = np.asarray(p.jac_x1(a, b), dtype=float)
    else:
        J1 = _fd_jacobian(lambda v: p(v, b), a, FIRST_STEP)
    if p.jac_x2 is not None:
        J2 = np.asarray(p.jac_x2(a, b), dtype=float)
    else:
        J2 = _fd_jacobian(lambda v: p(a, v), b, FIRST_STEP)
    if not (np.all(np.isfinite(J1)) and np.all(np.isfinite(J2))):
        raise PlantEvaluationError(
            "non-finite Jacobian", point={"x1": a.tolist(), "x2": b.tolist()}
        )
    return J1, J2


def velocity_field(p: Plant) -> MatrixField:
    """x1 -> df/dx2(x1, 0), the field that must be a Hessian for class G"""
    zero = p.zero()
    return lambda x1: jacobians(p, x1, zero)[1]


def symmetry_residual(M: Matrix) -> float:
    return float(np.max(np.abs(M - M.T), initial=0.0))


def integrability_residual(A_field: MatrixField, x: ArrayLike) -> float:
    """max |dA_ij/dx_k - dA_ik/dx_j| by central differences of A_field"""
    x = np.asarray(x, dtype=float)
    n = x.size
    h = _steps(x, SECOND_STEP)
    T = np.empty((n, n, n))
    for k in range(n):
        e = np.zeros(n)
        e[k] = h[k]
        T[k] = (np.asarray(A_field(x + e)) - np.asarray(A_field(x - e))) / (2.0 * h[k])
    # T[k, i, j] = dA_ij / dx_k; the condition swaps j and k
    return float(np.max(np.abs(T - T.transpose(2, 1, 0))))


def _hessian_field_residual(p: Plant, A_field: MatrixField, x1: Vector) -> float:
    """
    Mixed-partials residual of the velocity field at x1.

    A plant that declares S is held to A = hess S instead, which implies the
    mixed-partials condition and needs one level of differencing less.
    """
    if p.potential_s is None:
        return integrability_residual(A_field, x1)
    return float(np.max(np.abs(A_field(x1) - _fd_hessian(p.potential_s, x1))))


def _affine_residual(
    p: Plant, x1: Vector, x2: Vector, rng: np.random.Generator
) -> float:
    if p.jac_x2 is not None:
        J2 = np.asarray(p.jac_x2(x1, x2))
        J20 = np.asarray(p.jac_x2(x1, p.zero()))
        return float(np.max(np.abs(J2 - J20)))
    d = rng.standard_normal(p.n)
    d /= np.linalg.norm(d)
    h = SECOND_STEP * (1.0 + np.linalg.norm(x2))
    second = (p(x1, x2 + h * d) - 2.0 * p(x1, x2) + p(x1, x2 - h * d)) / (h * h)
    return float(np.linalg.norm(second))


def check_membership(
    p: Plant,
    bounds: ClassBounds,
    domain: tuple[ArrayLike, ArrayLike],
    samples: int = 256,
    seed: int = 0,
    tol: Optional[float] = None,
    hessian_tol: Optional[float] = None,
) -> MembershipReport:
    """
    Evaluate the F and G class conditions on Halton points in a box.

    Args:
        p: Plant under test
        bounds: Bounds (L1, L2) to test against
        domain: (lower, upper) of the box in (x1, x2), scalars or 2n-vectors
        samples: Number of sample points
        seed: Seed of the scrambled Halton sequence and random directions

    Returns:
        Report of residuals; never raises on a failed condition
    """
    if samples < 1:
        raise DimensionError(f"samples must be >= 1, got {samples}")
    settings = get_settings()
    tol = settings.MEMBERSHIP_TOL if tol is None else tol
    hessian_tol = settings.HESSIAN_TOL if hessian_tol is None else hessian_tol

    n = p.n
    lower = np.broadcast_to(np.asarray(domain[0], dtype=float), (2 * n,))
    upper = np.broadcast_to(np.asarray(domain[1], dtype=float), (2 * n,))
    points = qmc.scale(
        qmc.Halton(d=2 * n, scramble=True, seed=seed).random(samples), lower, upper
    )
    rng = np.random.default_rng(seed)
    A_field = velocity_field(p)

    max_sym_eig = -np.inf
    max_x2_norm = 0.0
    sym_res = affine_res = vel_sym_res = integ_res = 0.0
    for point in points:
        x1, x2 = point[:n], point[n:]
        J1, J2 = jacobians(p, x1, x2)
        max_sym_eig = max(max_sym_eig, eig_extremes(sym_part(J1))[1])
        max_x2_norm = max(max_x2_norm, spectral_norm(J2))

        J1_0, J2_0 = jacobians(p, x1, p.zero())
        sym_res = max(sym_res, symmetry_residual(J1_0))
        vel_sym_res = max(vel_sym_res, symmetry_residual(J2_0))
        affine_res = max(affine_res, _affine_residual(p, x1, x2, rng))
        integ_res = max(integ_res, _hessian_field_residual(p, A_field, x1))

    report = MembershipReport(
        samples=samples,
        max_sym_eig=float(max_sym_eig),
        sym_bound_excess=max(0.0, float(max_sym_eig) - bounds.L1),
        max_x2_norm=max_x2_norm,
        norm_bound_excess=max(0.0, max_x2_norm - bounds.L2),
        symmetry_residual=sym_res,
        affine_residual=affine_res,
        velocity_symmetry_residual=vel_sym_res,
        integrability_residual=integ_res,
        sym_bound_ok=max_sym_eig <= bounds.L1 + tol * (1.0 + abs(bounds.L1)),
        norm_bound_ok=max_x2_norm <= bounds.L2 + tol * (1.0 + bounds.L2),
        conservative_ok=sym_res <= tol,
        affine_ok=affine_res <= hessian_tol,
        integrable_ok=max(vel_sym_res, integ_res) <= hessian_tol,
    )
    logger.info(
        "Membership check (%d samples): F=%s G=%s",
        samples,
        report.member_f,
        report.member_g,
    )
    return report


# Potential reconstruction


@lru_cache
def _gauss_legendre(order: int) -> tuple[Vector, Vector]:
    """Nodes and weights on [0, 1]"""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    return (nodes + 1.0) / 2.0, weights / 2.0


def integrate_unit(fn: Callable[[float], ArrayLike], order: int) -> NDArray:
    """Gauss-Legendre quadrature of fn over [0, 1]"""
    nodes, weights = _gauss_legendre(order)
    return sum(w * np.asarray(fn(t), dtype=float) for t, w in zip(nodes, weights))


def _refined_integral(fn: Callable[[float], float], order: int) -> float:
    whole = float(integrate_unit(fn, order))
    halves = float(
        integrate_unit(lambda t: fn(t / 2.0), order) / 2.0
        + integrate_unit(lambda t: fn(0.5 + t / 2.0), order) / 2.0
    )
    if abs(whole - halves) > REFINE_RTOL * (1.0 + abs(halves)):
        logger.debug("Quadrature refinement moved %.3e -> %.3e", whole, halves)
    return halves


def potential_from_field(
    p: Plant,
    base: ArrayLike,
    x: ArrayLike,
    quad_order: Optional[int] = None,
    check: bool = True,
) -> float:
    """U(x) with grad U = f(., 0) and U(base) = 0, by a straight line integral"""
    order = quad_order or get_settings().QUAD_ORDER
    b = _vector(base, p.n, "base")
    d = _vector(x, p.n, "x") - b
    zero = p.zero()

    if check:
        for t in SEGMENT_CHECKS:
            J1 = jacobians(p, b + t * d, zero)[0]
            residual = symmetry_residual(J1)
            if residual > FIELD_TOL * (1.0 + np.abs(J1).max()):
                raise NotConservativeError(
                    f"df/dx1 symmetry residual {residual:.3e} at t={t} on the segment"
                )

    return _refined_integral(lambda t: float(p(b + t * d, zero) @ d), order)


def _check_hessian_field(A_field: MatrixField, points: list[Vector]) -> None:
    for point in points:
        A = np.asarray(A_field(point), dtype=float)
        sym = symmetry_residual(A)
        integ = integrability_residual(A_field, point)
        if max(sym, integ) > FIELD_TOL * (1.0 + np.abs(A).max()):
            raise NotAHessianFieldError(
                f"symmetry residual {sym:.3e}, integrability residual {integ:.3e} "
                f"at {point.tolist()}"
            )


def hessian_potential_gradient(
    A_field: MatrixField,
    base: ArrayLike,
    x: ArrayLike,
    quad_order: Optional[int] = None,
) -> Vector:
    """G(x) = int_0^1 A(base + t (x - base)) (x - base) dt, so G(base) = 0"""
    order = quad_order or get_settings().QUAD_ORDER
    b = np.asarray(base, dtype=float)
    d = np.asarray(x, dtype=float) - b
    return integrate_unit(lambda t: np.asarray(A_field(b + t * d)) @ d, order)


def hessian_potential_from_field(
    A_field: MatrixField,
    base: ArrayLike,
    x: ArrayLike,
    quad_order: Optional[int] = None,
    check: bool = True,
) -> float:
    """S(x) with hess S = A, S(base) = 0 and grad S(base) = 0"""
    order = quad_order or get_settings().QUAD_ORDER
    b = np.asarray(base, dtype=float)
    d = np.asarray(x, dtype=float) - b
    if check:
        _check_hessian_field(A_field, [b + t * d for t in SEGMENT_CHECKS])
    return float(
        integrate_unit(
            lambda t: hessian_potential_gradient(A_field, b, b + t * d, order) @ d,
            order,
        )
    )
