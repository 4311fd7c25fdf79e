"""Machine-level interpretation: operating regimes, figures of merit, sweeps.

The steady-state sign structure is fully determined by the common factor V and
the field difference B2 - B1. Regimes follow the sign triple
(sgn W, sgn Q1, sgn Q2); which triple means what depends on which bath is
colder. With the cold bath carrying coherence a refrigerator can survive into
the classically forbidden region n1 < n2 (coefficient of performance above the
Carnot value); with a hot coherent bath an engine can run at B2 < B1 with
efficiency above Carnot. Both happen at nonzero output power.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError
from .lindblad import steady_state_analytic
from .model import MachineParams, get_param, thermal_occupation, with_param
from .thermo import ThermoReport, thermo_report

DEFAULT_REGIME_RTOL = 1e-9


class Regime(enum.Enum):
    ENGINE = "engine"
    REFRIGERATOR = "refrigerator"
    ACCELERATOR = "accelerator"
    HYBRID_REFRIGERATOR = "hybrid_refrigerator"
    CARNOT_POINT = "carnot_point"


@dataclass(frozen=True)
class RegimeLabel:
    base: Regime
    beyond_carnot: bool = False

    def __str__(self):
        return self.base.value + ("'" if self.beyond_carnot else "")


# sign triples (sgn W, sgn Q1, sgn Q2); +1 into the system / -1 out of it
_TABLE_COLD_BATH_1 = {
    (-1, -1, +1): Regime.ENGINE,
    (-1, +1, -1): Regime.HYBRID_REFRIGERATOR,
    (+1, -1, +1): Regime.ACCELERATOR,
    (+1, +1, -1): Regime.REFRIGERATOR,
}
_TABLE_HOT_BATH_1 = {
    (-1, +1, -1): Regime.ENGINE,
    (+1, +1, -1): Regime.ACCELERATOR,
    (+1, -1, +1): Regime.REFRIGERATOR,
}


def _current_tolerance(params: MachineParams, rel_tol: float) -> float:
    scale = params.gamma * max(params.B, params.bath1.B, params.bath2.B)
    return rel_tol * scale


def _cold_hot(params: MachineParams):
    """(cold bath, hot bath) by temperature; bath 1 is treated as cold on a tie."""
    if params.bath1.T <= params.bath2.T:
        return params.bath1, params.bath2
    return params.bath2, params.bath1


def otto_efficiency(params: MachineParams) -> float:
    """Field-ratio engine efficiency 1 - min(B1,B2)/max(B1,B2)."""
    b1, b2 = params.bath1.B, params.bath2.B
    return 1.0 - min(b1, b2) / max(b1, b2)


def otto_cop(params: MachineParams) -> float:
    """Field-ratio refrigerator performance B_cold/(B_other - B_cold).

    Negative in the hybrid regime (work flows out while cooling); infinite at
    B1 = B2 where refrigeration crosses into the hybrid regime.
    """
    cold, hot = _cold_hot(params)
    if hot.B == cold.B:
        raise ValueError("coefficient of performance diverges at B1 = B2")
    return cold.B / (hot.B - cold.B)


def classify(report: ThermoReport, params: MachineParams, rel_tol: float = DEFAULT_REGIME_RTOL) -> RegimeLabel:
    """Operating regime from the signs of (W, Q1, Q2).

    Currents below rel_tol * gamma * max(B, B1, B2) count as zero; if all three
    vanish, or the sign triple matches no table row, the point is classified as
    an (effective) Carnot point.
    """
    tol = _current_tolerance(params, rel_tol)
    w, q1, q2 = report.w, report.q1, report.q2
    if max(abs(w), abs(q1), abs(q2)) < tol:
        return RegimeLabel(Regime.CARNOT_POINT)
    signs = tuple(int(math.copysign(1.0, x)) if abs(x) >= tol else 0 for x in (w, q1, q2))
    table = _TABLE_COLD_BATH_1 if params.bath1.T <= params.bath2.T else _TABLE_HOT_BATH_1
    base = table.get(signs)
    if base is None:
        return RegimeLabel(Regime.CARNOT_POINT)
    t_cold = min(params.bath1.T, params.bath2.T)
    t_hot = max(params.bath1.T, params.bath2.T)
    beyond = False
    # exact Otto-vs-Carnot ties (n1 = n2 boundary) must not flip on roundoff
    margin = 1.0 + 1e-12
    if base is Regime.ENGINE:
        eta_c = 1.0 - t_cold / t_hot
        beyond = otto_efficiency(params) > eta_c * margin
    elif base is Regime.REFRIGERATOR:
        cop_c = t_cold / (t_hot - t_cold) if t_hot > t_cold else math.inf
        beyond = otto_cop(params) > cop_c * margin
    return RegimeLabel(base, beyond_carnot=beyond)


def reference_bounds(params: MachineParams) -> tuple[float, float, float]:
    """(eta_Carnot, COP_Carnot, eta_CurzonAhlborn) of the two bath temperatures."""
    t_cold = min(params.bath1.T, params.bath2.T)
    t_hot = max(params.bath1.T, params.bath2.T)
    if t_cold == t_hot:
        raise ValueError("Carnot COP diverges at T1 = T2")
    eta_c = 1.0 - t_cold / t_hot
    cop_c = t_cold / (t_hot - t_cold)
    eta_ca = 1.0 - math.sqrt(t_cold / t_hot)
    return eta_c, cop_c, eta_ca


def epsilon_star(params: MachineParams) -> float | None:
    """Coherence amplitude where the common factor V vanishes (effective Carnot point).

        eps1* = sqrt(n2-n1) sqrt(B^2 + (1+n1+n2)^2 gamma^2) / sqrt((1+2n1)(1+n1+n2) gamma)

    Zero at n1 = n2; None for n2 < n1, where V never crosses zero.
    """
    n1 = thermal_occupation(params.bath1)
    n2 = thermal_occupation(params.bath2)
    if n2 < n1:
        return None
    big_n = 1.0 + n1 + n2
    return math.sqrt(n2 - n1) * math.sqrt(params.B**2 + big_n**2 * params.gamma**2) / math.sqrt(
        (1.0 + 2.0 * n1) * big_n * params.gamma
    )


def efficiency(params: MachineParams) -> float:
    """Engine efficiency -W/Q_in at the steady state; equals the field ratio form.

    Raises when the machine is not operating as an engine.
    """
    label = classify(thermo_report(params, steady_state_analytic(params).rho), params)
    if label.base is not Regime.ENGINE:
        raise ValueError(f"efficiency undefined: machine operates as {label.base.value}, not as an engine")
    return otto_efficiency(params)


def cop(params: MachineParams) -> float:
    """Cooling performance Q_extracted/W at the steady state (field ratio form).

    Valid in the refrigerator and hybrid-refrigerator regimes; negative for the
    hybrid (cooling while producing work).
    """
    label = classify(thermo_report(params, steady_state_analytic(params).rho), params)
    if label.base not in (Regime.REFRIGERATOR, Regime.HYBRID_REFRIGERATOR):
        raise ValueError(f"COP undefined: machine operates as {label.base.value}, not as a refrigerator")
    return otto_cop(params)


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AxisSpec:
    """One swept parameter: dotted key and an inclusive linear grid."""

    key: str
    start: float
    stop: float
    steps: int

    def __post_init__(self):
        if self.steps < 2:
            raise ValueError(f"axis {self.key!r} needs at least 2 steps, got {self.steps}")

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.steps)


@dataclass(frozen=True)
class SweepRecord:
    """One grid point: swept values, currents, regime, figures of merit.

    For the hybrid refrigerator two candidate metrics are reported side by
    side: cooling per work output |Q1|/|W| and the raw work output -W.
    """

    axis1_value: float
    axis2_value: float
    report: ThermoReport
    label: RegimeLabel
    efficiency: float | None
    cop: float | None
    hybrid_cooling_per_work: float | None
    hybrid_work_output: float | None


@dataclass
class DiagramResult:
    axis1: AxisSpec
    axis2: AxisSpec
    records: list[SweepRecord]
    boundaries: dict[str, np.ndarray] = field(default_factory=dict)


def _figures_of_merit(params: MachineParams, report: ThermoReport, label: RegimeLabel):
    eta = cop_val = h_cpw = h_w = None
    if label.base is Regime.ENGINE:
        eta = otto_efficiency(params)
    elif label.base is Regime.REFRIGERATOR:
        cop_val = otto_cop(params)
    elif label.base is Regime.HYBRID_REFRIGERATOR:
        cop_val = otto_cop(params)
        cold, _ = _cold_hot(params)
        q_cold = report.q1 if cold is params.bath1 else report.q2
        h_cpw = abs(q_cold) / abs(report.w) if report.w != 0 else math.inf
        h_w = -report.w
    return eta, cop_val, h_cpw, h_w


def sweep_diagram(params: MachineParams, axis1: AxisSpec, axis2: AxisSpec) -> DiagramResult:
    """Classify the steady state over a 2D parameter grid.

    Records are emitted in row-major order (axis1 outer, axis2 inner). When
    axis1 sweeps an ancilla field and axis2 sweeps bath1.epsilon, the three
    analytic boundary curves are attached: the B1 = B2 line, the n1 = n2 line
    and the locus eps1*(field) where V changes sign.
    """
    records = []
    for v1 in axis1.values():
        p1 = with_param(params, axis1.key, v1)
        for v2 in axis2.values():
            p = with_param(p1, axis2.key, v2)
            report = thermo_report(p, steady_state_analytic(p).rho)
            label = classify(report, p)
            eta, cop_val, h_cpw, h_w = _figures_of_merit(p, report, label)
            records.append(SweepRecord(
                axis1_value=float(v1), axis2_value=float(v2), report=report, label=label,
                efficiency=eta, cop=cop_val,
                hybrid_cooling_per_work=h_cpw, hybrid_work_output=h_w,
            ))
    return DiagramResult(axis1=axis1, axis2=axis2, records=records,
                         boundaries=_boundary_series(params, axis1, axis2))


def _boundary_series(params: MachineParams, axis1: AxisSpec, axis2: AxisSpec) -> dict[str, np.ndarray]:
    if axis1.key not in ("bath1.B", "bath2.B") or axis2.key != "bath1.epsilon":
        return {}
    other_key = "bath2.B" if axis1.key == "bath1.B" else "bath1.B"
    other_field = get_param(params, other_key)
    swept_bath, other_bath = ("bath1", "bath2") if axis1.key == "bath1.B" else ("bath2", "bath1")
    t_swept = get_param(params, f"{swept_bath}.T")
    t_other = get_param(params, f"{other_bath}.T")

    out: dict[str, np.ndarray] = {}

    def vertical(x):
        if axis1.start <= x <= axis1.stop:
            return np.array([[x, axis2.start], [x, axis2.stop]])
        return np.empty((0, 2))

    out["b_equal"] = vertical(other_field)
    # n_swept = n_other  <=>  B_swept / T_swept = B_other / T_other
    out["n_equal"] = vertical(other_field * t_swept / t_other)

    xs = np.linspace(axis1.start, axis1.stop, 201)
    pts = []
    for x in xs:
        eps = epsilon_star(with_param(params, axis1.key, x))
        if eps is not None:
            pts.append((x, eps))
    out["epsilon_star"] = np.array(pts) if pts else np.empty((0, 2))
    return out


# ---------------------------------------------------------------------------
# power-efficiency curves and coherence-limited maximum efficiency
# ---------------------------------------------------------------------------

@dataclass
class CurveResult:
    """Engine samples of one field sweep plus the located maximum-power point."""

    samples: list[tuple[float, float, float]]  # (field value, efficiency, W)
    skipped: int                               # grid points outside the engine regime
    field_at_max_power: float | None
    max_power_output: float | None
    eta_at_max_power: float | None


def power_efficiency_curve(params: MachineParams, axis: AxisSpec) -> CurveResult:
    """(efficiency, power) along a field sweep, keeping engine points only.

    The maximum of the power output -W over the engine region is refined by
    golden-section search between the neighbours of the best grid point.
    """
    values = axis.values()
    samples = []
    engine_mask = []
    outputs = []
    for v in values:
        p = with_param(params, axis.key, v)
        report = thermo_report(p, steady_state_analytic(p).rho)
        label = classify(report, p)
        is_engine = label.base is Regime.ENGINE
        engine_mask.append(is_engine)
        outputs.append(-report.w)
        if is_engine:
            samples.append((float(v), otto_efficiency(p), report.w))
    skipped = int(len(values) - len(samples))
    if not samples:
        return CurveResult(samples=[], skipped=skipped, field_at_max_power=None,
                           max_power_output=None, eta_at_max_power=None)

    def output(v: float) -> float:
        p = with_param(params, axis.key, v)
        return -thermo_report(p, steady_state_analytic(p).rho).w

    engine_idx = [i for i, ok in enumerate(engine_mask) if ok]
    best = max(engine_idx, key=lambda i: outputs[i])
    lo = values[max(best - 1, 0)]
    hi = values[min(best + 1, len(values) - 1)]
    v_star = _golden_max(output, float(lo), float(hi))
    p_star = with_param(params, axis.key, v_star)
    return CurveResult(
        samples=samples,
        skipped=skipped,
        field_at_max_power=v_star,
        max_power_output=output(v_star),
        eta_at_max_power=otto_efficiency(p_star),
    )


def _golden_max(f, lo: float, hi: float, tol: float = 1e-12) -> float:
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def max_efficiency(params: MachineParams, epsilon1: float) -> tuple[float, float]:
    """Largest engine efficiency reachable at fixed hot-bath coherence amplitude.

    Valid for a hot coherent bath (T1 > T2). The engine window closes at the
    field B2* where V changes sign, i.e. where eps1*(B2) = epsilon1; B2* is
    found by bisection and the efficiency bound is the field ratio there.
    Returns (eta_max, b2_root).
    """
    if params.bath1.T <= params.bath2.T:
        raise ValueError("max_efficiency assumes coherence in the hot bath (T1 > T2)")
    if not epsilon1 > 0:
        raise ValueError(f"epsilon1 must be > 0, got {epsilon1}")
    p0 = with_param(params, "bath1.epsilon", epsilon1)

    def gap(b2: float) -> float:
        eps = epsilon_star(with_param(p0, "bath2.B", b2))
        return (eps if eps is not None else 0.0) - epsilon1

    # eps1* falls from +inf at B2 -> 0 to zero at n1 = n2
    hi = params.bath1.B * params.bath2.T / params.bath1.T * (1.0 - 1e-12)
    lo = 1e-6 * hi
    g_lo, g_hi = gap(lo), gap(hi)
    if not (g_lo > 0.0 > g_hi):
        raise NumericalError(
            f"no V-zero crossing for epsilon1 = {epsilon1:g}: "
            f"scanned B2 in [{lo:.6g}, {hi:.6g}] with gap signs ({g_lo:+.3g}, {g_hi:+.3g})"
        )
    a, b = lo, hi
    for _ in range(200):
        mid = 0.5 * (a + b)
        if gap(mid) > 0.0:
            a = mid
        else:
            b = mid
        if b - a < 1e-15:
            break
    b2_root = 0.5 * (a + b)
    eta_max = 1.0 - min(params.bath1.B, b2_root) / max(params.bath1.B, b2_root)
    return eta_max, b2_root
