"""Pydantic models for gains, bounds, verdicts, reports and run configuration"""

from enum import Enum
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class PlantClass(str, Enum):
    """Class membership a plant claims"""

    F = "F"
    G = "G"
    UNCHECKED = "unchecked"


class PlantKind(str, Enum):
    """Built-in plant families"""

    LINEAR = "linear"
    WORST_CASE = "worst_case"
    SINUSOIDAL = "sinusoidal"
    GRADIENT = "gradient"


class CertificateMode(str, Enum):
    """Which Lyapunov construction a certificate follows"""

    THEOREM1 = "theorem1"
    PROPOSITION1 = "proposition1"


class Verdict(str, Enum):
    """Convergence verdict of a simulated trajectory"""

    CONVERGED = "converged"
    DIVERGED = "diverged"
    UNDECIDED = "undecided"


class ClassBounds(BaseModel):
    """Jacobian bounds (L1 anti-stiffness, L2 anti-damping)"""

    model_config = ConfigDict(frozen=True)

    L1: float
    L2: float = Field(..., ge=0.0)


class GainTriple(BaseModel):
    """Raw PID gains plus the known lower bound of the input gain"""

    model_config = ConfigDict(frozen=True)

    kp: float
    ki: float
    kd: float
    b_lower: float = Field(..., gt=0.0)


class ScaledGains(BaseModel):
    """(k1, k0, k2) = (b kp, b ki, b kd) for one specific b"""

    model_config = ConfigDict(frozen=True)

    k1: float
    k0: float
    k2: float


class RegionVerdict(BaseModel):
    """Membership verdict with one signed margin per defining inequality"""

    model_config = ConfigDict(frozen=True)

    region: Literal["omega1", "omega2"]
    in_region: bool
    margin_p: float
    margin_d: float
    margin_i: float
    product_gap: float

    @property
    def margins(self) -> tuple[float, float, float, float]:
        return (self.margin_p, self.margin_d, self.margin_i, self.product_gap)

    @property
    def failed_inequality(self) -> Optional[str]:
        """Name of the first inequality that does not hold strictly"""
        names = ("k1 > L1", "k2 > L2", "k0 > 0", "product gap > 0")
        for name, margin in zip(names, self.margins):
            if not margin > 0:
                return name
        return None


class RegionCheckReport(BaseModel):
    """Both region verdicts for one gain triple"""

    gains: GainTriple
    bounds: ClassBounds
    scaled: ScaledGains
    target: Literal["omega1", "omega2"]
    omega1: RegionVerdict
    omega2: RegionVerdict


class RayReport(BaseModel):
    """zeta(alpha) sampled along a ray of scaled gains"""

    alphas: list[float]
    zetas: list[float]
    min_forward_difference: float
    min_scaled_difference: float
    passed: bool


class SliceCell(BaseModel):
    """One cell of a two-axis region slice"""

    model_config = ConfigDict(frozen=True)

    x: float
    y: float
    in_omega1: bool
    in_omega2: bool
    gap1: float
    gap2: float


class RegionSlice(BaseModel):
    """Row-major grid of slice cells over two free gain axes"""

    axes: tuple[str, str]
    fixed: str
    fixed_value: float
    cells: list[SliceCell]


class MembershipReport(BaseModel):
    """Sample-scale residuals of the F / G class conditions"""

    samples: int
    max_sym_eig: float
    sym_bound_excess: float = Field(..., ge=0.0)
    max_x2_norm: float = Field(..., ge=0.0)
    norm_bound_excess: float = Field(..., ge=0.0)
    symmetry_residual: float = Field(..., ge=0.0)
    affine_residual: float = Field(..., ge=0.0)
    velocity_symmetry_residual: float = Field(..., ge=0.0)
    integrability_residual: float = Field(..., ge=0.0)
    sym_bound_ok: bool
    norm_bound_ok: bool
    conservative_ok: bool
    affine_ok: bool
    integrable_ok: bool

    @property
    def member_f(self) -> bool:
        return self.sym_bound_ok and self.norm_bound_ok and self.conservative_ok

    @property
    def member_g(self) -> bool:
        return self.member_f and self.affine_ok and self.integrable_ok


class InequalityMargin(BaseModel):
    """lhs > rhs with its signed margin"""

    name: str
    lhs: float
    rhs: float

    @property
    def margin(self) -> float:
        return self.lhs - self.rhs

    @property
    def holds(self) -> bool:
        return self.lhs > self.rhs


class EmpiricalConstants(BaseModel):
    """Sampled estimates of phi0, psi0, psi1; diagnostic, never a certificate"""

    samples: int
    phi0_hat: float
    psi0_hat: float
    psi1_hat: float
    diagnostic_only: bool = True


class CertificateReport(BaseModel):
    """Structured certificate report"""

    mode: CertificateMode
    gains: ScaledGains
    bounds: ClassBounds
    phi0: float
    psi0: float
    psi1: float
    psi: float
    mu: float
    inequalities: list[InequalityMargin]
    p_min_eig: float
    p_tilde_min_eig: Optional[float] = None
    q_min_eig_sampled: Optional[float] = None
    vdot_max_sampled: Optional[float] = None
    empirical: Optional[EmpiricalConstants] = None
    valid: bool


class SimConfig(BaseModel):
    """Integrator and verdict settings"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    integrator: Literal["rk45", "rk4"] = "rk45"
    step: float = Field(1e-2, gt=0.0)
    atol: float = Field(1e-9, gt=0.0)
    rtol: float = Field(1e-7, gt=0.0)
    # None: sized from the gains and class bounds
    horizon: Optional[float] = Field(None, gt=0.0)
    sample_dt: float = Field(0.05, gt=0.0)
    divergence_threshold: float = Field(1e6, gt=0.0)
    convergence_tol: float = Field(1e-6, gt=0.0)
    dwell: float = Field(5.0, gt=0.0)


class SimulationSummary(BaseModel):
    """Outcome of one simulate run"""

    verdict: Verdict
    decision_time: Optional[float] = None
    final_error: float
    final_time: float
    samples: int
    trajectory_path: str
    certificate_mode: Optional[CertificateMode] = None
    vdot_max: Optional[float] = None


class CubicPoly(BaseModel):
    """s^3 + a2 s^2 + a1 s + a0"""

    model_config = ConfigDict(frozen=True)

    a2: float
    a1: float
    a0: float

    @property
    def coefficients(self) -> tuple[float, float, float, float]:
        return (1.0, self.a2, self.a1, self.a0)


class CounterexampleEvidence(BaseModel):
    """Why the worst-case plant defeats the gains"""

    coefficients: tuple[float, float, float, float]
    failed_inequality: str
    inequality_margin: float
    roots: list[tuple[float, float]]
    max_real_part: float
    verdict: Verdict
    final_error: float
    offset: float
    trajectory_path: Optional[str] = None


class CounterexampleReport(BaseModel):
    """Counterexample report"""

    gains: GainTriple
    bounds: ClassBounds
    b: float
    setpoint: list[float]
    evidence: CounterexampleEvidence


class PlantParams(BaseModel):
    """Matrix parameters of a plant specification, row-major"""

    model_config = ConfigDict(extra="forbid")

    A: Optional[list[list[float]]] = None
    B: Optional[list[list[float]]] = None
    c: Optional[list[float]] = None
    a: Optional[float] = None


class PlantSpec(BaseModel):
    """Plant specification file contents"""

    model_config = ConfigDict(extra="forbid")

    kind: PlantKind
    n: int = Field(..., ge=1)
    params: PlantParams = PlantParams()
    bounds: Optional[ClassBounds] = None
    claim: PlantClass = PlantClass.UNCHECKED

    @field_validator("kind")
    @classmethod
    def _file_kinds(cls, kind: PlantKind) -> PlantKind:
        if kind is PlantKind.GRADIENT:
            raise ValueError("gradient plants need code evaluators, not a file")
        return kind


class SweepRow(BaseModel):
    """One row of the convergence map"""

    plant: int
    kp: float
    ki: float
    kd: float
    trial: int
    in_omega1: bool
    in_omega2: bool
    status: Literal["completed", "failed"]
    verdict: Optional[Verdict] = None
    final_error: Optional[float] = None
    error_message: Optional[str] = None


# Run configuration blocks


class GridSpec(BaseModel):
    """Two-axis region slice specification"""

    model_config = ConfigDict(extra="forbid")

    fixed: Literal["kp", "ki", "kd"]
    value: float
    x_range: tuple[float, float]
    y_range: tuple[float, float]
    resolution: tuple[int, int] = (101, 101)
    b_lower: float = Field(1.0, gt=0.0)


class CertifySpec(BaseModel):
    """certify command options"""

    model_config = ConfigDict(extra="forbid")

    mode: CertificateMode = CertificateMode.THEOREM1
    samples: Optional[int] = Field(None, ge=1)
    radius: Optional[float] = Field(None, gt=0.0)
    simulate: bool = True
    # sampled phi0, psi0, psi1 next to the class-bound constants
    empirical: bool = False


class MembershipSpec(BaseModel):
    """class check options: the box is [lower, upper]^(2n)"""

    model_config = ConfigDict(extra="forbid")

    lower: float = -5.0
    upper: float = 5.0
    samples: int = Field(256, ge=1)

    @model_validator(mode="after")
    def _box(self) -> "MembershipSpec":
        if not self.lower < self.upper:
            raise ValueError("lower must be below upper")
        return self


class SweepSpec(BaseModel):
    """sweep command options: gains grid x plants x random initial states"""

    model_config = ConfigDict(extra="forbid")

    plants: list[PlantSpec] = Field(..., min_length=1)
    kp: list[float] = Field(..., min_length=1)
    ki: list[float] = Field(..., min_length=1)
    kd: list[float] = Field(..., min_length=1)
    initial_states: int = Field(1, ge=1)
    state_radius: float = Field(1.0, gt=0.0)
    b_lower: float = Field(1.0, gt=0.0)


class GapSpec(BaseModel):
    """gap command options: plants simulated from seeded initial states"""

    model_config = ConfigDict(extra="forbid")

    plants: list[PlantSpec] = Field(..., min_length=1)
    initial_states: int = Field(3, ge=1)
    state_radius: float = Field(1.0, gt=0.0)


class GapRun(BaseModel):
    """One simulated plant for gains between the two regions"""

    plant: int
    trial: int
    verdict: Verdict
    final_error: float


class GapReport(BaseModel):
    """Runs for gains in Omega2 but outside Omega1; no conclusion is drawn"""

    gains: GainTriple
    bounds: ClassBounds
    runs: list[GapRun]


class RunConfig(BaseModel):
    """Versioned run configuration file"""

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    schema_version: Literal[1] = Field(..., alias="schema")
    bounds: Optional[ClassBounds] = None
    gains: Optional[GainTriple] = None
    b_actual: Optional[float] = Field(None, gt=0.0)
    plant: Optional[PlantSpec] = None
    plant_file: Optional[str] = None
    setpoint: Optional[list[float]] = None
    x0: Optional[list[float]] = None
    v0: Optional[list[float]] = None
    sim: SimConfig = SimConfig()
    grid: Optional[GridSpec] = None
    certify: CertifySpec = CertifySpec()
    membership: MembershipSpec = MembershipSpec()
    sweep: Optional[SweepSpec] = None
    gap: Optional[GapSpec] = None
    region: Literal["omega1", "omega2"] = "omega1"
    seed: Optional[int] = Field(None, ge=0)
