"""Theorem-level calculators: integrability thresholds and growth schedules.

Three ingredients decide whether a coupling's quantitative data can force
hyperbolicity across the coupling:

  - the critical exponent 108 * delta * entropy + 2;
  - the vanishing condition: n^2 r(n) Vol(r(n)) / phi(n/r(n)) -> 0;
  - the schedule conditions r(n)/18 >= 4(delta+1)log2(n) + 3 psi^-1(3Ln)
    (with a psi-integral bound L) and r(n)/18 >= 6(delta+1)log(n) (the
    bounded-cocycle variant).

Numeric evaluation runs in certified rational interval arithmetic so that
verdicts near boundaries come out "inconclusive" rather than wrong, and the
closed families (phi power/exp_power, r = c log n or n^e, growth with a
declared entropy) additionally get an analytic verdict.  Ratios span
hundreds of orders of magnitude, so sampled values are reported as natural
logarithms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import PreconditionError
from .groups import EntropyValue, GrowthTable
from .integrability import IntegrabilityFunction
from .rational import FracInterval, format_fraction, ln_bounds

LOG2_LN = FracInterval(*ln_bounds(Fraction(2)))


# ---------------------------------------------------------------------------
# schedules


@dataclass(frozen=True)
class Schedule:
    """Non-decreasing unbounded schedule r(n): c*log(n) or n^e."""

    family: str  # "log" | "pow"
    coefficient: Fraction = Fraction(1)
    exponent: Fraction = Fraction(1, 2)

    def __post_init__(self):
        if self.family == "log":
            if self.coefficient <= 0:
                raise PreconditionError("log schedule needs a positive coefficient")
        elif self.family == "pow":
            if not (0 < self.exponent <= 1):
                raise PreconditionError("power schedule needs exponent in (0, 1]")
        else:
            raise PreconditionError(f"unknown schedule family {self.family!r}")

    def value(self, n: int) -> FracInterval:
        if n < 2:
            raise PreconditionError("schedules are evaluated at n >= 2")
        x = FracInterval(Fraction(n))
        if self.family == "log":
            return x.ln() * self.coefficient
        return x.pow_rational(self.exponent)

    def describe(self) -> str:
        if self.family == "log":
            return f"{format_fraction(self.coefficient)}*log(n)"
        return f"n^({format_fraction(self.exponent)})"


def corollary_schedules(kind: str, **params) -> Schedule:
    """The schedules the two threshold corollaries use.

    kind "lp":  r(n) = 108 * delta * log(n), for delta > 0.
    kind "exp": r(n) = n^(eta/(1+eta)), requiring p > eta > q > 0.
    """
    if kind == "lp":
        delta = Fraction(params["delta"])
        if delta <= 0:
            raise PreconditionError("lp schedule requires delta > 0")
        return Schedule("log", coefficient=108 * delta)
    if kind == "exp":
        eta = Fraction(params["eta"])
        p = Fraction(params["p"]) if "p" in params else None
        q = Fraction(params["q"]) if "q" in params else None
        if eta <= 0:
            raise PreconditionError("exp schedule requires eta > 0")
        if p is not None and not (p > eta):
            raise PreconditionError("exp schedule requires p > eta")
        if q is not None and not (eta > q > 0):
            raise PreconditionError("exp schedule requires eta > q > 0")
        return Schedule("pow", exponent=eta / (1 + eta))
    raise PreconditionError(f"unknown schedule kind {kind!r}")


# ---------------------------------------------------------------------------
# threshold


@dataclass(frozen=True)
class ThresholdReport:
    delta: Fraction
    entropy: Fraction
    p_threshold: Fraction
    provenance: dict

    def to_json_dict(self) -> dict:
        return {
            "delta": format_fraction(self.delta),
            "entropy": format_fraction(self.entropy),
            "p_threshold": format_fraction(self.p_threshold),
            "provenance": self.provenance,
        }


def threshold_p(delta: Fraction, entropy: Fraction, provenance: dict | None = None) -> ThresholdReport:
    """The critical integrability exponent 108*delta*entropy + 2."""
    delta = Fraction(delta)
    entropy = Fraction(entropy)
    if delta < 0 or entropy < 0:
        raise PreconditionError("delta and entropy must be >= 0")
    return ThresholdReport(
        delta=delta,
        entropy=entropy,
        p_threshold=108 * delta * entropy + 2,
        provenance=provenance or {},
    )


# ---------------------------------------------------------------------------
# conditions


@dataclass(frozen=True)
class RigidityConditions:
    delta: Fraction
    L: Fraction
    phi: IntegrabilityFunction
    psi: IntegrabilityFunction
    r: Schedule
    n_min: int = 2
    n_max: int = 10**6

    def __post_init__(self):
        if self.delta < 0:
            raise PreconditionError("delta must be >= 0")
        if self.L < 1:
            raise PreconditionError("L must be >= 1")
        if self.n_min < 2 or self.n_max < self.n_min:
            raise PreconditionError("need 2 <= n_min <= n_max")


def _sample_grid(n_min: int, n_max: int, points: int = 40) -> list[int]:
    """Geometric grid including both endpoints and decades."""
    out = {n_min, n_max}
    for k in range(1, 19):
        if n_min <= 10**k <= n_max:
            out.add(10**k)
    if n_max > n_min:
        ratio = (n_max / n_min) ** (1.0 / max(points - 1, 1))
        x = float(n_min)
        for _ in range(points):
            out.add(min(n_max, max(n_min, round(x))))
            x *= ratio
    return sorted(out)


@dataclass(frozen=True)
class ConditionReport:
    condition: str  # "(5)" | "(6)" | "(7)"
    name: str
    verdict: str  # "tends_to_zero" | "fails" | "holds_eventually" | "inconclusive"
    analytic: bool
    n0: int | None
    samples: list
    notes: dict

    def to_json_dict(self) -> dict:
        return {
            "condition": self.condition,
            "name": self.name,
            "verdict": self.verdict,
            "analytic": self.analytic,
            "N0": self.n0,
            "samples": self.samples,
            **self.notes,
        }


def _ln_phi(phi: IntegrabilityFunction, x: FracInterval) -> FracInterval:
    """ln(phi(x)) as a certified interval, for x > 0."""
    xs = x * phi.scale
    if phi.family == "power":
        return xs.ln() * phi.param
    if phi.family == "exp_power":
        return xs.pow_rational(phi.param)
    if phi.family == "poly_plus":
        return xs.ln() * (1 + 1 / phi.param)
    raise PreconditionError("table functions have no interval logarithm")


def _analytic_condition_5(
    phi: IntegrabilityFunction, r: Schedule, growth_class
) -> tuple[str, dict] | None:
    """Closed-family limit verdicts for the vanishing ratio."""
    kind, info = growth_class
    if phi.family == "power":
        p = phi.param
        if r.family == "log":
            if kind in ("polynomial", "bounded"):
                ent_lo = ent_hi = Fraction(0)
            elif isinstance(info, EntropyValue):
                ent_lo, ent_hi = info.lower(), info.upper()
            else:
                return None
            crit_lo = 2 + r.coefficient * ent_lo
            crit_hi = 2 + r.coefficient * ent_hi
            if p > crit_hi:
                return "tends_to_zero", {"critical_exponent": str(float(crit_hi))}
            if p <= crit_lo:
                return "fails", {"critical_exponent": str(float(crit_lo))}
            return "inconclusive", {"reason": "p within rounding of the critical exponent"}
        # r = n^e
        if kind == "exponential":
            return "fails", {"reason": "exponential growth beats any power of n"}
        degree = info if kind == "polynomial" else 0
        e = r.exponent
        lhs = phi.param * (1 - e)
        rhs = 2 + e + e * degree
        if lhs > rhs:
            return "tends_to_zero", {}
        return "fails", {}
    if phi.family == "exp_power":
        p = phi.param
        if r.family == "log":
            return "tends_to_zero", {"reason": "stretched-exponential denominator"}
        e = r.exponent
        if kind in ("polynomial", "bounded"):
            return "tends_to_zero", {}
        lhs = p * (1 - e)
        if lhs > e:
            return "tends_to_zero", {}
        if lhs < e:
            return "fails", {}
        return "inconclusive", {"reason": "exponent tie; coefficient comparison omitted"}
    return None


def check_condition_5(rc: RigidityConditions, growth: GrowthTable) -> ConditionReport:
    """The vanishing condition: n^2 r(n) Vol(r(n)) / phi(n/r(n)) -> 0.

    Sampled log-ratios are certified intervals; N0 is the first sampled n
    from which the ratio strictly decreases through n_max.  Vol at the
    non-integer r(n) is taken at the (conservative) ceiling.
    """
    grid = _sample_grid(rc.n_min, rc.n_max)
    r_top = rc.r.value(rc.n_max)
    radius_top = math.ceil(r_top.hi)
    if not growth.covers(radius_top):
        raise PreconditionError(
            f"growth table covers radius {growth.radius}, "
            f"but the schedule needs radius {radius_top} at n={rc.n_max}"
        )
    log_ratios: list[FracInterval] = []
    samples = []
    schedule_exceeds_n = []
    for n in grid:
        rn = rc.r.value(n)
        radius = math.ceil(rn.hi)
        if rn.lo > n:
            schedule_exceeds_n.append(n)
        vol = growth.volume(radius)
        ln_num = (
            FracInterval(Fraction(n)).ln() * 2
            + rn.ln()
            + FracInterval(*ln_bounds(Fraction(vol)))
        )
        ln_den = _ln_phi(rc.phi, FracInterval(Fraction(n)) / rn)
        lr = ln_num - ln_den
        log_ratios.append(lr)
        samples.append({"n": n, "log_ratio": lr.midpoint_float()})
    n0 = None
    for i in range(len(grid) - 1):
        if all(
            log_ratios[j + 1].definitely_less(log_ratios[j])
            for j in range(i, len(grid) - 1)
        ):
            n0 = grid[i]
            break
    analytic = _analytic_condition_5(rc.phi, rc.r, _growth_class_of(growth))
    if analytic is not None:
        verdict, notes = analytic
        is_analytic = True
    else:
        is_analytic = False
        notes = {"reason": "no closed-form family; empirical tail only"}
        if n0 is not None and log_ratios[-1].definitely_less(log_ratios[0]):
            verdict = "inconclusive"
            notes["empirical"] = "decreasing tail observed"
        else:
            verdict = "inconclusive"
    if schedule_exceeds_n:
        notes = dict(notes)
        notes["r_exceeds_n_at"] = schedule_exceeds_n[:5]
    return ConditionReport(
        condition="(5)",
        name="vanishing_ratio",
        verdict=verdict,
        analytic=is_analytic,
        n0=n0,
        samples=samples,
        notes={"phi": rc.phi.describe(), "r": rc.r.describe(), **notes},
    )


def _growth_class_of(growth: GrowthTable):
    if growth.closed_form is not None:
        return growth.closed_form.growth_class()
    return ("table", None)


def _psi_inverse_interval(psi: IntegrabilityFunction, y: Fraction) -> FracInterval:
    """psi^-1(y) as an interval (closed forms; generalized inverse for tables)."""
    if y <= 0:
        return FracInterval(0)
    yi = FracInterval(y)
    if psi.family == "power":
        t = yi.pow_rational(1 / psi.param)
    elif psi.family == "poly_plus":
        t = yi.pow_rational(psi.param / (1 + psi.param))
    elif psi.family == "exp_power":
        ly = yi.ln()
        if ly.hi <= 0:
            return FracInterval(0)
        hi_t = FracInterval(ly.hi).pow_rational(1 / psi.param).hi
        lo_t = (
            FracInterval(ly.lo).pow_rational(1 / psi.param).lo
            if ly.lo > 0
            else Fraction(0)
        )
        t = FracInterval(lo_t, hi_t)
    else:
        for t0, v0 in psi.table:
            if v0 >= y:
                return FracInterval(t0 / psi.scale)
        raise PreconditionError("y exceeds the table range of psi")
    return t / psi.scale


def _analytic_condition_6(rc: RigidityConditions) -> tuple[str, dict] | None:
    psi, r = rc.psi, rc.r
    if r.family == "pow":
        if psi.family in ("power", "poly_plus"):
            inv_exp = (
                1 / psi.param if psi.family == "power" else psi.param / (1 + psi.param)
            )
            if r.exponent > inv_exp:
                return "holds_eventually", {
                    "r_exponent": format_fraction(r.exponent),
                    "psi_inverse_exponent": format_fraction(inv_exp),
                }
            return "fails", {
                "r_exponent": format_fraction(r.exponent),
                "psi_inverse_exponent": format_fraction(inv_exp),
            }
        if psi.family == "exp_power":
            return "holds_eventually", {"reason": "psi inverse grows logarithmically"}
    if r.family == "log" and psi.family in ("power", "poly_plus"):
        return "fails", {"reason": "polynomial psi inverse beats a log schedule"}
    return None


def check_condition_6_7(rc: RigidityConditions, mode: str) -> ConditionReport:
    """Schedule conditions.

    mode "thm41": r(n)/18 >= 4(delta+1) log2(n) + 3 psi^-1(3 L n)   -- "(6)"
    mode "thm42": r(n)/18 >= 6(delta+1) log(n)                      -- "(7)"

    Reports the smallest sampled n from which the inequality holds through
    n_max, plus an analytic verdict for the closed families.
    """
    if mode not in ("thm41", "thm42"):
        raise PreconditionError("mode must be 'thm41' or 'thm42'")
    grid = _sample_grid(rc.n_min, rc.n_max)
    holds_flags = []
    samples = []
    for n in grid:
        lhs = rc.r.value(n) / 18
        ln_n = FracInterval(Fraction(n)).ln()
        if mode == "thm41":
            rhs = (ln_n / LOG2_LN) * (4 * (rc.delta + 1)) + _psi_inverse_interval(
                rc.psi, 3 * rc.L * n
            ) * 3
        else:
            rhs = ln_n * (6 * (rc.delta + 1))
        if lhs.definitely_at_least(rhs):
            flag = True
        elif lhs.definitely_less(rhs):
            flag = False
        else:
            flag = None
        holds_flags.append(flag)
        samples.append(
            {"n": n, "lhs": lhs.midpoint_float(), "rhs": rhs.midpoint_float(), "holds": flag}
        )
    n0 = None
    for i in range(len(grid)):
        if all(holds_flags[j] is True for j in range(i, len(grid))):
            n0 = grid[i]
            break
    if mode == "thm41":
        analytic = _analytic_condition_6(rc)
    else:
        if rc.r.family == "pow":
            analytic = ("holds_eventually", {"reason": "power schedule beats log"})
        else:
            lhs_coeff = rc.r.coefficient / 18
            rhs_coeff = 6 * (rc.delta + 1)
            analytic = (
                ("holds_eventually", {}) if lhs_coeff >= rhs_coeff else ("fails", {})
            )
    if analytic is not None:
        verdict, notes = analytic
        is_analytic = True
    else:
        is_analytic = False
        notes = {}
        if n0 is not None:
            verdict = "holds_eventually"
            notes["empirical"] = f"holds on sampled n >= {n0}"
        elif holds_flags and holds_flags[-1] is False:
            verdict = "fails"
            notes["empirical"] = "fails at n_max"
        else:
            verdict = "inconclusive"
    return ConditionReport(
        condition="(6)" if mode == "thm41" else "(7)",
        name="schedule_vs_inverse" if mode == "thm41" else "schedule_vs_log",
        verdict=verdict,
        analytic=is_analytic,
        n0=n0,
        samples=samples,
        notes={
            "r": rc.r.describe(),
            "psi": rc.psi.describe(),
            "delta": format_fraction(rc.delta),
            "L": format_fraction(rc.L),
            **notes,
        },
    )
