"""Lyapunov certificates for the PID closed loop.

In transformed coordinates (x, y, z) the closed loop reads

    dx/dt = y,  dy/dt = z,  dz/dt = g(y, z) - k0 x - k1 y - k2 z,
    g(y, z) = f(y*, 0) - f(y* - y, -z) = B(y) y + A(y, z) z,

and V = [x; y; z]^T P [x; y; z] + H(y) (+ H_psi(y) in Proposition1 mode) with
P = 1/2 [[mu k0, k0, 0], [k0, phi0 + mu psi, mu], [0, mu, 1]] (x) I_n.

phi0, psi0, psi1 are infima/suprema over all states and cannot be computed
exactly. Certificates use the class bounds instead (phi0 = k1 - L1,
psi0 = k2 - L2, psi1 = k2 + L2), which is what the region inequalities
guarantee. Sampled estimates are available as a diagnostic only.
"""

import logging
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .config import get_settings
from .errors import (
    CertificateInapplicableError,
    CertificateInvalidError,
    DomainError,
    QuadratureError,
    RegionError,
)
from .matnum import (
    SymMatrix,
    definiteness_margin,
    eig_extremes,
    is_positive_definite,
    kron3_with_identity,
    sym_part,
)
from .models import (
    CertificateMode,
    CertificateReport,
    ClassBounds,
    EmpiricalConstants,
    InequalityMargin,
    PlantClass,
    ScaledGains,
)
from .plants import (
    Plant,
    hessian_potential_from_field,
    hessian_potential_gradient,
    integrate_unit,
    jacobians,
    potential_from_field,
    velocity_field,
)
from .regions import in_omega1, in_omega2
from .simulator import TransformedState, Trajectory, trajectory_state

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Certificate:
    """Constants, P matrix and the data the evaluators need"""

    mode: CertificateMode
    phi0: float
    psi0: float
    psi1: float
    psi: float
    mu: float
    P: SymMatrix
    gains: ScaledGains
    bounds: ClassBounds
    ystar: NDArray[np.float64]
    plant: Plant

    @property
    def n(self) -> int:
        return self.plant.n

    def core(self, psi: Optional[float] = None) -> NDArray[np.float64]:
        """3x3 core C of P = C/2 (x) I; psi defaults to the certificate's psi"""
        mu, k0 = self.mu, self.gains.k0
        mid = self.phi0 + mu * (self.psi if psi is None else psi)
        return np.array([[mu * k0, k0, 0.0], [k0, mid, mu], [0.0, mu, 1.0]])

    @property
    def P_tilde(self) -> SymMatrix:
        """Lower-bound matrix with psi replaced by psi0"""
        return kron3_with_identity(0.5 * self.core(self.psi0), self.n)


class Decomposition(NamedTuple):
    """g(y, z) = B y + A z with the quadrature residual"""

    B: NDArray[np.float64]
    A: NDArray[np.float64]
    residual: float


class VdotSeries(NamedTuple):
    """Central-difference dV/dt at interior trajectory samples"""

    times: NDArray[np.float64]
    values: NDArray[np.float64]
    V: NDArray[np.float64]
    max_value: float


def build_certificate(
    s: ScaledGains,
    b: ClassBounds,
    p: Plant,
    ystar: ArrayLike,
    mode: CertificateMode = CertificateMode.THEOREM1,
) -> Certificate:
    """
    Build the class-bound certificate for scaled gains.

    Args:
        s: Scaled gains (k1, k0, k2) for the actual input gain
        b: Class bounds
        p: Plant; Proposition1 mode requires a plant claiming class G
        ystar: Setpoint
        mode: Theorem1 (needs Omega1) or Proposition1 (needs Omega2)

    Returns:
        Certificate; its inequalities are checked by check_P
    """
    y_ref = np.asarray(ystar, dtype=float)
    if y_ref.shape != (p.n,):
        raise DomainError(f"setpoint must have shape ({p.n},), got {y_ref.shape}")

    verdict = in_omega1(s, b) if mode is CertificateMode.THEOREM1 else in_omega2(s, b)
    if not verdict.in_region:
        failed = verdict.failed_inequality or ""
        raise RegionError(
            f"gains outside {verdict.region}: {failed} fails",
            inequality=failed,
            margin=min(verdict.margins),
        )
    if mode is CertificateMode.PROPOSITION1 and p.claim is not PlantClass.G:
        raise CertificateInapplicableError(
            f"Proposition1 certificate needs a class G plant, got {p.claim.value}"
        )

    phi0 = s.k1 - b.L1
    psi0 = s.k2 - b.L2
    psi1 = s.k2 + b.L2
    psi = (psi0 + psi1) / 2.0
    if mode is CertificateMode.THEOREM1:
        mu = (phi0 * psi0 + s.k0) / (2.0 * (phi0 + b.L2**2))
    else:
        mu = (phi0 * psi0 + s.k0) / (2.0 * phi0)

    core = np.array(
        [[mu * s.k0, s.k0, 0.0], [s.k0, phi0 + mu * psi, mu], [0.0, mu, 1.0]]
    )
    cert = Certificate(
        mode=mode,
        phi0=phi0,
        psi0=psi0,
        psi1=psi1,
        psi=psi,
        mu=mu,
        P=kron3_with_identity(0.5 * core, p.n),
        gains=s,
        bounds=b,
        ystar=y_ref,
        plant=p,
    )
    logger.debug("Built %s certificate: mu=%.6g", mode.value, mu)
    return cert


def certificate_inequalities(cert: Certificate) -> list[InequalityMargin]:
    """Every inequality the certificate rests on, with signed margins"""
    mu, k0 = cert.mu, cert.gains.k0
    phi0, psi0, L2 = cert.phi0, cert.psi0, cert.bounds.L2
    if cert.mode is CertificateMode.THEOREM1:
        return [
            InequalityMargin(name="B1: psi0 > mu", lhs=psi0, rhs=mu),
            InequalityMargin(
                name="B2: (mu phi0 - k0)(psi0 - mu) > mu^2 L2^2",
                lhs=(mu * phi0 - k0) * (psi0 - mu),
                rhs=mu**2 * L2**2,
            ),
            InequalityMargin(name="B3: mu phi0 > k0", lhs=mu * phi0, rhs=k0),
            InequalityMargin(
                name="P positive definite", lhs=definiteness_margin(cert.P), rhs=0.0
            ),
        ]
    return [
        InequalityMargin(name="mu phi0 - k0 > 0", lhs=mu * phi0 - k0, rhs=0.0),
        InequalityMargin(name="psi0 - mu > 0", lhs=psi0 - mu, rhs=0.0),
        InequalityMargin(
            name="P_tilde positive definite",
            lhs=definiteness_margin(cert.P_tilde),
            rhs=0.0,
        ),
    ]


def check_P(cert: Certificate) -> list[InequalityMargin]:
    """Verify the certificate inequalities; raise on the first failure"""
    checks = certificate_inequalities(cert)
    for check in checks:
        holds = check.holds
        if check.name == "P positive definite":
            holds = is_positive_definite(cert.P)
        elif check.name == "P_tilde positive definite":
            holds = is_positive_definite(cert.P_tilde)
        if not holds:
            raise CertificateInvalidError(
                f"certificate inequality failed: {check.name} "
                f"(margin {check.margin:.6g})",
                inequality=check.name,
                margin=check.margin,
            )
    return checks


def _decompose(
    p: Plant, ystar: NDArray, y: NDArray, z: NDArray, order: int
) -> tuple[NDArray, NDArray]:
    zero = p.zero()
    B = integrate_unit(lambda t: jacobians(p, ystar - t * y, zero)[0], order)
    A = integrate_unit(lambda t: jacobians(p, ystar - y, -t * z)[1], order)
    return B, A


def decompose_g(
    p: Plant,
    ystar: ArrayLike,
    y: ArrayLike,
    z: ArrayLike,
    quad_order: Optional[int] = None,
) -> Decomposition:
    """
    B(y) = int_0^1 dg/dy(t y, 0) dt and A(y, z) = int_0^1 dg/dz(y, t z) dt.

    The order-q result is compared against order 2q; a relative disagreement
    above QUAD_RTOL raises QuadratureError.
    """
    settings = get_settings()
    order = quad_order or settings.QUAD_ORDER
    y_ref = np.asarray(ystar, dtype=float)
    yv = np.asarray(y, dtype=float)
    zv = np.asarray(z, dtype=float)

    B, A = _decompose(p, y_ref, yv, zv, order)
    B2, A2 = _decompose(p, y_ref, yv, zv, 2 * order)
    scale = 1.0 + max(np.abs(B2).max(), np.abs(A2).max())
    drift = max(np.abs(B - B2).max(), np.abs(A - A2).max())
    if drift > settings.QUAD_RTOL * scale:
        raise QuadratureError(
            f"order {order} vs {2 * order} quadrature disagree by {drift:.3e}"
        )

    g = p(y_ref, p.zero()) - p(y_ref - yv, -zv)
    residual = float(np.linalg.norm(g - B @ yv - A @ zv))
    return Decomposition(B=B, A=A, residual=residual)


def eval_H(cert: Certificate, y: ArrayLike) -> float:
    """H(y) = (k1 - phi0)/2 |y|^2 - U(y* - y) + U(y*) - grad U(y*)^T y"""
    p = cert.plant
    yv = np.asarray(y, dtype=float)
    ys = cert.ystar
    if p.potential_u is not None:
        dU = p.potential_u(ys - yv) - p.potential_u(ys)
    else:
        dU = potential_from_field(p, ys, ys - yv)
    quad = 0.5 * (cert.gains.k1 - cert.phi0) * float(yv @ yv)
    return quad - dU - float(p(ys, p.zero()) @ yv)


def eval_Hpsi(cert: Certificate, y: ArrayLike) -> float:
    """H_psi(y) = mu((k2 - psi)/2 |y|^2 + S(y* - y) - S(y*) + grad S(y* - y)^T y)"""
    if cert.mode is not CertificateMode.PROPOSITION1:
        raise CertificateInapplicableError("H_psi belongs to Proposition1 certificates")
    p = cert.plant
    yv = np.asarray(y, dtype=float)
    ys = cert.ystar

    if p.potential_s is not None and p.potential_s_grad is not None:
        dS = p.potential_s(ys - yv) - p.potential_s(ys)
        grad = np.asarray(p.potential_s_grad(ys - yv), dtype=float)
    elif p.claim is PlantClass.G:
        field = velocity_field(p)
        dS = hessian_potential_from_field(field, ys, ys - yv)
        grad = hessian_potential_gradient(field, ys, ys - yv)
    else:
        raise CertificateInapplicableError("plant has no Hessian potential S")

    quad = 0.5 * (cert.gains.k2 - cert.psi) * float(yv @ yv)
    return cert.mu * (quad + dS + float(grad @ yv))


def eval_V(cert: Certificate, t: TransformedState) -> float:
    """V at one transformed state"""
    w = np.concatenate([t.x, t.y, t.z])
    value = cert.P.quadratic_form(w) + eval_H(cert, t.y)
    if cert.mode is CertificateMode.PROPOSITION1:
        value += eval_Hpsi(cert, t.y)
    return value


def q_matrix(cert: Certificate, y: ArrayLike, z: ArrayLike) -> SymMatrix:
    """Q(y, z) with dV/dt = -[y; z]^T Q [y; z]"""
    n = cert.n
    s, mu, eye = cert.gains, cert.mu, np.eye(n)
    dec = decompose_g(cert.plant, cert.ystar, y, z)
    Q11 = (s.k0 - mu * s.k1) * eye + mu * dec.B
    Q22 = sym_part(dec.A).entries + (mu - s.k2) * eye
    if cert.mode is CertificateMode.THEOREM1:
        Q12 = -0.5 * (mu * (cert.psi - s.k2) * eye + mu * dec.A)
    else:
        # H_psi cancels the cross term up to the antisymmetric part of A
        Q12 = -0.5 * mu * (dec.A - dec.A.T)
    return sym_part(np.block([[-Q11, Q12], [Q12.T, -Q22]]))


def q_min_eig(cert: Certificate, y: ArrayLike, z: ArrayLike) -> float:
    """lambda_min(Q(y, z)); positive means V strictly decreases there"""
    return eig_extremes(q_matrix(cert, y, z))[0]


def _closed_loop_matrix(cert: Certificate, y: ArrayLike, z: ArrayLike) -> NDArray:
    """M(x, y, z) with d[x; y; z]/dt = M [x; y; z]"""
    n = cert.n
    s, eye, zero = cert.gains, np.eye(n), np.zeros((n, n))
    dec = decompose_g(cert.plant, cert.ystar, y, z)
    return np.block(
        [
            [zero, eye, zero],
            [zero, zero, eye],
            [-s.k0 * eye, -s.k1 * eye + dec.B, -s.k2 * eye + dec.A],
        ]
    )


def _sample_states(
    n: int, samples: int, seed: int, radius: float
) -> NDArray[np.float64]:
    rng = np.random.default_rng(seed)
    return rng.uniform(-radius, radius, size=(samples, 2 * n))


def sampled_q_min(cert: Certificate, samples: int, seed: int, radius: float) -> float:
    """Sampled minimum of lambda_min(Q); an estimate of alpha*, not a proof"""
    n = cert.n
    values = [
        q_min_eig(cert, yz[:n], yz[n:])
        for yz in _sample_states(n, samples, seed, radius)
    ]
    return float(min(values))


def estimate_constants(
    cert: Certificate, samples: int, seed: int, radius: float
) -> EmpiricalConstants:
    """Sampled phi0, psi0, psi1 over a box of (y, z); diagnostic only"""
    n, s = cert.n, cert.gains
    phi0 = psi0 = np.inf
    psi1 = -np.inf
    for yz in _sample_states(n, samples, seed, radius):
        dec = decompose_g(cert.plant, cert.ystar, yz[:n], yz[n:])
        phi0 = min(phi0, eig_extremes(sym_part(s.k1 * np.eye(n) - dec.B))[0])
        lo, hi = eig_extremes(sym_part(s.k2 * np.eye(n) - dec.A))
        psi0 = min(psi0, lo)
        psi1 = max(psi1, hi)
    return EmpiricalConstants(
        samples=samples, phi0_hat=phi0, psi0_hat=psi0, psi1_hat=psi1
    )


def eval_V_series(cert: Certificate, traj: Trajectory) -> NDArray[np.float64]:
    """V at every trajectory sample"""
    ts = trajectory_state(cert.plant, cert.gains, traj)
    return np.array(
        [
            eval_V(cert, TransformedState(x=ts.x[i], y=ts.y[i], z=ts.z[i]))
            for i in range(traj.times.size)
        ]
    )


def vdot_along(cert: Certificate, traj: Trajectory) -> VdotSeries:
    """Central-difference dV/dt along a simulated trajectory"""
    if traj.times.size < 3:
        raise DomainError("need at least 3 samples for central differences")
    V = eval_V_series(cert, traj)
    t = traj.times
    values = (V[2:] - V[:-2]) / (t[2:] - t[:-2])
    return VdotSeries(times=t[1:-1], values=values, V=V, max_value=float(values.max()))


def certificate_report(
    cert: Certificate,
    samples: int = 0,
    seed: int = 0,
    radius: Optional[float] = None,
    traj: Optional[Trajectory] = None,
) -> CertificateReport:
    """
    Assemble the certificate report.

    Args:
        cert: Certificate
        samples: Random (y, z) states for the sampled min of lambda_min(Q); 0 skips
        seed: Sampling seed
        radius: Half-width of the sampling box
        traj: Optional simulated trajectory for the sampled max of dV/dt

    Returns:
        Report with all inequality margins
    """
    radius = get_settings().SAMPLE_RADIUS if radius is None else radius
    inequalities = certificate_inequalities(cert)
    q_min = sampled_q_min(cert, samples, seed, radius) if samples else None
    vdot_max = vdot_along(cert, traj).max_value if traj is not None else None
    p_tilde = (
        definiteness_margin(cert.P_tilde)
        if cert.mode is CertificateMode.PROPOSITION1
        else None
    )
    return CertificateReport(
        mode=cert.mode,
        gains=cert.gains,
        bounds=cert.bounds,
        phi0=cert.phi0,
        psi0=cert.psi0,
        psi1=cert.psi1,
        psi=cert.psi,
        mu=cert.mu,
        inequalities=inequalities,
        p_min_eig=definiteness_margin(cert.P),
        p_tilde_min_eig=p_tilde,
        q_min_eig_sampled=q_min,
        vdot_max_sampled=vdot_max,
        valid=all(i.holds for i in inequalities),
    )
