"""Named, reusable checks bundling the package invariants into reports.

Every check is deterministic for a given seed.  Two comparison modes exist:
"<=" for ordinary pass conditions and ">=" for demonstrations, where the
point is that a quantity must be large (the shared-multiplier obstruction,
the misprinted relations).  A passing ">=" check is counted as an
expected failure in the suite summary, since it certifies a negative claim.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from . import exprparse
from .core import (TYPE2, PdmSystem, State, build_system, parameter_set,
                   total_energy)
from .eom import (ReferenceSystem, el1_acceleration, el1_residual,
                  el2_acceleration, reference_potential_gradient)
from .errors import ExprError, PdmError, UnknownCheck
from .exact import (AMENDED_FORM, ExactSolutionSpec, build_exact_system,
                    exact_energy, exact_solution, exact_trajectory,
                    frequency_relation, kinematics, ml2_reduction_check,
                    oscillation_period, solution_fn)
from .integrate import (ADAPTIVE45, FIXED_RK4, IntegratorOptions,
                        estimate_period, integrate, sample_dense)
from .transform import (el2_mapped_residual, el2_obstruction, elg_residual,
                        f_scale, potential_match_residual, q_map,
                        reference_map, tau_values)

DEFAULT_SEED = 20260810


@dataclass(frozen=True)
class CheckReport:
    name: str
    passed: bool
    metric: float
    threshold: float
    comparison: str           # "<=" (pass when small) or ">=" (demonstration)
    details: str = ""

    @property
    def is_demonstration(self) -> bool:
        return self.comparison == ">="


@dataclass(frozen=True)
class SuiteSummary:
    passed: int
    expected_fail: int
    failed: int

    @property
    def ok(self) -> bool:
        return self.failed == 0


def _report(name: str, metric: float, threshold: float,
            comparison: str = "<=", details: str = "") -> CheckReport:
    if comparison == "<=":
        passed = bool(metric <= threshold)
    else:
        passed = bool(metric >= threshold)
    return CheckReport(name, passed, float(metric), float(threshold),
                       comparison, details)


def _rng(seed: int, name: str) -> np.random.Generator:
    return np.random.default_rng([seed, zlib.crc32(name.encode())])


# --- standard benchmark cases ---------------------------------------------------


@dataclass(frozen=True)
class Case:
    """One named (system, closed form) pair used across checks."""

    name: str
    family: str
    params: dict
    amplitude: tuple[float, ...]
    variant: str = "published"
    sample_box: tuple[float, float] = (0.1, 2.0)   # x-range for identity sampling

    def spec(self) -> ExactSolutionSpec:
        return ExactSolutionSpec(self.family, parameter_set(self.params, len(self.amplitude)),
                                 self.amplitude, variant=self.variant)

    def system(self) -> PdmSystem:
        return build_system(self.family, len(self.amplitude), self.params)


CASES: dict[str, Case] = {c.name: c for c in [
    Case("ml1+", "ml1", {"omega": [1.0], "lambda": 1.0, "sign": "+"}, (1.0,),
         sample_box=(-2.5, 2.5)),
    Case("ml1-", "ml1", {"omega": [1.0], "lambda": 1.0, "sign": "-"}, (0.5,),
         sample_box=(-0.9, 0.9)),
    Case("ml1-0.5+", "ml1", {"omega": [1.0], "lambda": 0.5, "sign": "+"}, (1.0,),
         sample_box=(-2.5, 2.5)),
    Case("ml1-0.5-", "ml1", {"omega": [1.0], "lambda": 0.5, "sign": "-"}, (0.5,),
         sample_box=(-1.3, 1.3)),
    Case("powerlaw-1", "powerlaw", {"omega": [1.0], "alpha": 1.0, "upsilon": 1.0},
         (1.0,), sample_box=(0.05, 2.0)),
    Case("powerlaw-2", "powerlaw", {"omega": [1.0], "alpha": 1.0, "upsilon": 2.0},
         (1.0,), sample_box=(0.05, 2.0)),
    Case("morse", "morse", {"omega": [1.0], "zeta": [1.0]}, (0.5,),
         sample_box=(-1.5, 1.5)),
    Case("sw1+", "sw1", {"omega": [1.0], "lambda": 0.5, "sign": "+", "kappa": [1.0]},
         (1.0,), sample_box=(0.2, 2.0)),
    Case("sw1-", "sw1", {"omega": [1.3], "lambda": 0.5, "sign": "-", "kappa": [0.5]},
         (0.8,), sample_box=(0.2, 1.3)),
    Case("sw2-eta-neg1", "sw2", {"omega": [1.0], "kappa": [1.0], "beta": 1.0,
                                 "eta_exp": -1.0}, (1.2,), sample_box=(0.3, 2.5)),
    Case("sw2-amended-eta2", "sw2", {"omega": [1.0], "kappa": [1.0], "beta": 1.0,
                                     "eta_exp": 2.0}, (1.1,),
         variant=AMENDED_FORM, sample_box=(0.3, 2.0)),
    Case("sw2-published-eta2", "sw2", {"omega": [1.0], "kappa": [1.0], "beta": 1.0,
                                   "eta_exp": 2.0}, (1.1,), sample_box=(0.3, 2.0)),
    Case("ml2-reduction", "ml2", {"omega": [1.0], "lambda": 0.25, "sign": "-",
                                  "eta_const": [2.0]}, (1.0,),
         sample_box=(-1.8, 1.8)),
    Case("harmonic", "harmonic", {"omega": [1.0]}, (1.0,), sample_box=(-2.0, 2.0)),
    Case("isotonic", "isotonic", {"omega": [1.0], "kappa": [1.0]}, (1.3,),
         sample_box=(0.3, 2.0)),
]}

#: the six mapped families of the invariance claim
INVARIANCE_CASES = ("ml1+", "powerlaw-1", "ml2-reduction", "morse",
                    "sw1+", "sw2-eta-neg1")


def standard_case(name: str) -> Case:
    if name not in CASES:
        raise UnknownCheck(f"no benchmark case named {name!r}")
    return CASES[name]


def el1_rhs(system: PdmSystem):
    def rhs(t: float, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        return el1_acceleration(system, State(t, x, v))
    return rhs


def el2_rhs(system: PdmSystem):
    def rhs(t: float, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        return el2_acceleration(system, State(t, x, v))
    return rhs


def _adaptive(t_end: float, rel_tol: float = 1e-10, abs_tol: float | None = None,
              **kw) -> IntegratorOptions:
    return IntegratorOptions(t_end=t_end, scheme=ADAPTIVE45, rel_tol=rel_tol,
                             abs_tol=abs_tol if abs_tol is not None else rel_tol * 1e-2,
                             h_init=1e-3, **kw)


def _integrate_case(case: Case, periods: float, rel_tol: float,
                    t0: float = 0.0) -> tuple:
    system = case.system()
    spec = case.spec()
    T = float(np.max(oscillation_period(spec)))
    x0, v0, _ = kinematics(spec, t0)
    opts = _adaptive(t0 + periods * T, rel_tol=rel_tol)
    traj = integrate(el1_rhs(system), State(t0, x0, v0), opts)
    return system, spec, T, traj


# --- check implementations -------------------------------------------------------


def _check_profile_derivatives(seed: int, rel_tol=None) -> CheckReport:
    from .profiles import (CustomProfile, Exponential, IsotonicPowerLaw,
                           MathewsLakshmanan, PowerLaw)
    rng = _rng(seed, "profiles")
    profiles = [
        (MathewsLakshmanan(1.0, "+"), (-3.0, 3.0)),
        (MathewsLakshmanan(1.0, "-"), (-0.9, 0.9)),
        (PowerLaw(1.3, 1.5), (0.3, 3.0)),
        (PowerLaw(1.0, 2.0), (0.3, 3.0)),
        (Exponential(0.8), (-1.5, 1.5)),
        (IsotonicPowerLaw(1.1, -1.0), (0.3, 3.0)),
        (IsotonicPowerLaw(1.0, 2.0), (0.3, 3.0)),
        (CustomProfile.from_text("1/(1+x^2)+exp(-x^2)"), (-2.0, 2.0)),
    ]
    worst = 0.0
    for profile, (lo, hi) in profiles:
        xs = rng.uniform(lo, hi, 10_000 // len(profiles))
        dom = profile.domain
        for x in xs:
            # keep the 5-point stencil well inside the region where the
            # profile is smooth: steep poles need h tied to the distance
            # from the boundary, not to |x|
            edge = min(abs(x - dom.lo), abs(dom.hi - x))
            h = 0.005 * min(max(1.0, abs(x)), edge)
            vals = [profile.eval(float(x + k * h))[0] for k in (-2, -1, 0, 1, 2)]
            d1_fd = (vals[0] - 8 * vals[1] + 8 * vals[3] - vals[4]) / (12 * h)
            d2_fd = (-vals[0] + 16 * vals[1] - 30 * vals[2] + 16 * vals[3] - vals[4]) / (12 * h * h)
            m, d1, d2 = profile.eval(float(x))
            # relative to the profile's own scale: the derivatives cross zero
            # inside every domain, where a bare relative error is ill-posed
            scale1 = max(abs(d1), abs(d1_fd), abs(m), 1e-8)
            scale2 = max(abs(d2), abs(d2_fd), abs(m), 1e-8)
            worst = max(worst, abs(d1 - d1_fd) / scale1, abs(d2 - d2_fd) / scale2)
    return _report("profiles-derivatives", worst, 1e-6,
                   details="analytic m', m'' vs 4th-order central differences")


def _check_ml_identity(seed: int, rel_tol=None) -> CheckReport:
    from .profiles import MathewsLakshmanan
    rng = _rng(seed, "ml-identity")
    worst = 0.0
    for sign, box in (("+", (-3.0, 3.0)), ("-", (-0.95, 0.95))):
        lam = 1.0
        profile = MathewsLakshmanan(lam, sign)
        s = 1.0 if sign == "+" else -1.0
        for x in rng.uniform(*box, 2000):
            m, m1, _ = profile.eval(float(x))
            closed = -s * lam * x / (1.0 + s * lam * x * x)
            worst = max(worst, abs(m1 / (2.0 * m) - closed))
    return _report("ml-profile-identity", worst, 1e-12,
                   details="m'/(2m) equals the closed rational form")


def _random_expression(rng: np.random.Generator, depth: int) -> str:
    if depth == 0 or rng.random() < 0.3:
        return rng.choice(["x", "x", f"{rng.uniform(0.2, 3.0):.3f}"])
    kind = rng.choice(["bin", "fn", "neg", "pow"])
    if kind == "bin":
        op = rng.choice(["+", "-", "*", "/"])
        a = _random_expression(rng, depth - 1)
        b = _random_expression(rng, depth - 1)
        if op == "/":
            b = f"(1.25+({b})^2)"  # keep denominators away from zero
        return f"({a}){op}({b})"
    if kind == "fn":
        fn = rng.choice(["sin", "cos", "exp", "ln", "sqrt"])
        a = _random_expression(rng, depth - 1)
        if fn in ("ln", "sqrt"):
            a = f"(0.5+({a})^2)"
        if fn == "exp":
            a = f"sin({a})"       # bounded argument keeps values tame
        return f"{fn}({a})"
    if kind == "neg":
        return f"-({_random_expression(rng, depth - 1)})"
    exponent = rng.choice(["2", "3", "0.5", "1.5"])
    base = _random_expression(rng, depth - 1)
    return f"(0.5+({base})^2)^{exponent}"


def _fd_stencil(expr, x: float, h: float, order: int) -> float:
    vals = [exprparse.eval_dual(expr, x + k * h)[0] for k in (-2, -1, 0, 1, 2)]
    if any(not math.isfinite(v) for v in vals) or max(map(abs, vals)) > 1e3:
        raise ValueError("stencil leaves the tame range")
    if order == 1:
        return (vals[0] - 8 * vals[1] + 8 * vals[3] - vals[4]) / (12 * h)
    return (-vals[0] + 16 * vals[1] - 30 * vals[2] + 16 * vals[3] - vals[4]) / (12 * h * h)


def _check_parser_ad(seed: int, rel_tol=None, order: int = 1) -> CheckReport:
    rng = _rng(seed, f"parser-ad-{order}")
    threshold = 1e-6 if order == 1 else 1e-4
    worst = 0.0
    produced = 0
    while produced < 1000:
        text = _random_expression(rng, 3)
        expr = exprparse.parse_expression(text, ["x"])
        x = float(rng.uniform(-1.5, 1.5))
        try:
            val, d1, d2 = exprparse.eval_dual(expr, x)
        except ExprError:
            continue
        h = 1e-3 * max(1.0, abs(x))
        try:
            fd_h = _fd_stencil(expr, x, h, order)
            fd_h2 = _fd_stencil(expr, x, 0.5 * h, order)
        except (ExprError, ValueError):
            continue
        d = d1 if order == 1 else d2
        scale = max(abs(val), 1.0)
        # a safe evaluation point is one where the stencil itself has
        # converged (step-halving agreement); elsewhere the difference
        # quotient says nothing about the derivative
        if abs(fd_h - fd_h2) > 0.02 * threshold * max(abs(fd_h2), scale):
            continue
        produced += 1
        err = abs(d - fd_h2) / max(abs(d), abs(fd_h2), scale)
        worst = max(worst, err)
    return _report(f"parser-ad-d{order}", worst, threshold,
                   details="1000 generated expressions vs converged central differences")


def _check_parser_roundtrip(seed: int, rel_tol=None) -> CheckReport:
    rng = _rng(seed, "parser-roundtrip")
    bad = 0
    for _ in range(500):
        text = _random_expression(rng, 3)
        expr = exprparse.parse_expression(text, ["x"])
        again = exprparse.parse_expression(exprparse.to_source(expr), ["x"])
        if again != expr:
            bad += 1
    return _report("parser-roundtrip", float(bad), 0.0,
                   details="pretty-print then re-parse yields an equal tree")


def _check_parser_total(seed: int, rel_tol=None) -> CheckReport:
    malformed = ["2*sin(x", "1+", "((x)", "x@2", "2**x", "sin()", "foo(x)",
                 "exp(2*z)", "1..2", ")x(", "", "x^", "3e", "x x"]
    bad = 0
    for text in malformed:
        try:
            exprparse.parse_expression(text, ["x"])
            bad += 1                      # parsed something malformed
        except ExprError as err:
            if getattr(err, "position", None) is None and not hasattr(err, "name"):
                bad += 1
        except Exception:
            bad += 1                      # crashed instead of reporting
    return _report("parser-total", float(bad), 0.0,
                   details="malformed inputs all yield positioned errors")


# printed per-family equations of motion (oracle forms, typos corrected)
def _printed_eom(case: Case):
    p = parameter_set(case.params, len(case.amplitude))
    fam = case.family
    if fam == "ml1":
        s = 1.0 if p.sign == "+" else -1.0
        return lambda x, v: (s * p.lam * x * v * v - p.omega[0] ** 2 * x) / (1 + s * p.lam * x * x)
    if fam == "powerlaw":
        return lambda x, v: -(p.upsilon / x) * v * v - (1 + p.upsilon) * p.omega[0] ** 2 * x
    if fam == "ml2":
        s = 1.0 if p.sign == "+" else -1.0
        e2 = p.eta_const[0] ** 2
        return lambda x, v: (s * p.lam * x * v * v
                             + s * p.lam * e2 * p.omega[0] ** 2 * x) / (1 + s * p.lam * x * x)
    if fam == "morse":
        z = p.zeta[0]
        return lambda x, v: -z * v * v - p.omega[0] ** 2 * z * (1 - math.exp(-z * x))
    if fam == "sw1":
        s = 1.0 if p.sign == "+" else -1.0
        return lambda x, v: (s * p.lam * x * v * v / (1 + s * p.lam * x * x)
                             - p.omega[0] ** 2 * x / (1 + s * p.lam * x * x)
                             + p.kappa[0] * (1 + s * p.lam * x * x) / x ** 3)
    if fam == "sw2":
        e, b = p.eta_exp, p.beta
        return lambda x, v: (-((e - 1) / x) * v * v - e * p.omega[0] ** 2 * x
                             + e * p.kappa[0] / (b ** 4 * x ** (4 * e - 1)))
    raise UnknownCheck(f"no printed form for {fam}")


def _check_printed_eom(seed: int, case_name: str, rel_tol=None) -> CheckReport:
    case = standard_case(case_name)
    system = case.system()
    printed = _printed_eom(case)
    rng = _rng(seed, f"printed-{case_name}")
    lo, hi = case.sample_box
    worst = 0.0
    for _ in range(1000):
        x = float(rng.uniform(lo, hi))
        v = float(rng.uniform(-2.0, 2.0))
        generic = el1_acceleration(system, State.of(0.0, [x], [v]))[0]
        ref = printed(x, v)
        worst = max(worst, abs(generic - ref) / max(abs(ref), 1.0))
    return _report(f"printed-eom:{case_name}", worst, 1e-12,
                   details="generic form vs hand-coded printed equation "
                           "(relative, floored at unit scale)")


def _check_el2_collapse(seed: int, rel_tol=None) -> CheckReport:
    sys1 = build_system("custom", 1, mass_exprs=["1+x^2"],
                        potential_exprs=["0.5*x^2"])
    sys2 = build_system("custom", 1, mass_exprs=["1+x1^2"],
                        potential_exprs=["0.5*x^2"], kind=TYPE2)
    rng = _rng(seed, "el2-collapse")
    worst = 0.0
    for _ in range(1000):
        st = State.of(0.0, [rng.uniform(-2, 2)], [rng.uniform(-2, 2)])
        worst = max(worst, abs(el1_acceleration(sys1, st)[0]
                               - el2_acceleration(sys2, st)[0]))
    return _report("el2-collapse-n1", worst, 1e-12,
                   details="shared-multiplier form equals per-coordinate form at n=1")


def _check_g_identity(seed: int, case_name: str, rel_tol=None) -> CheckReport:
    case = standard_case(case_name)
    system = case.system()
    nmap, _ = reference_map(system)
    rng = _rng(seed, f"g-{case_name}")
    lo, hi = case.sample_box
    worst = 0.0
    for x in rng.uniform(lo, hi, 10_000):
        m, _, _ = system.profiles[0].eval(float(x))
        _, dq = q_map(nmap, 0, float(x))
        f = f_scale(nmap, 0, float(x))
        g = dq * dq
        target = m * f * f
        worst = max(worst, abs(g - target) / max(abs(target), 1e-30))
    return _report(f"g-identity:{case_name}", worst, 1e-10,
                   details="(dq/dx)^2 = m f^2 at 10^4 sampled points")


def _check_potential_match(seed: int, case_name: str, rel_tol=None) -> CheckReport:
    case = standard_case(case_name)
    system = case.system()
    nmap, ref = reference_map(system)
    rng = _rng(seed, f"vmatch-{case_name}")
    lo, hi = case.sample_box
    worst = 0.0
    for x in rng.uniform(lo, hi, 10_000):
        worst = max(worst, potential_match_residual(nmap, system, ref, [float(x)]))
    return _report(f"potential-match:{case_name}", worst, 1e-12,
                   details="|V(x) - V_ref(q(x))| at 10^4 sampled points")


def _residual_times(case: Case, spec: ExactSolutionSpec, periods: float,
                    samples: int = 600) -> np.ndarray:
    T = float(np.max(oscillation_period(spec)))
    ts = np.linspace(0.0, periods * T, samples)
    if case.family == "powerlaw":
        Om = float(frequency_relation("powerlaw", spec.params, spec.amplitude)[0])
        keep = np.cos(Om * ts) > 0.05     # stay on the branch where the form is real
        ts = ts[keep]
    return ts


def _closed_form_residual(case: Case, periods: float = 3.0) -> float:
    spec = case.spec()
    if case.family in ("harmonic", "isotonic"):
        # reference dynamics residual: d(qtilde)/dtau + dV/dq
        ref = ReferenceSystem(1, "harmonic" if case.family == "harmonic" else "isotonic",
                              spec.params.omega,
                              spec.params.kappa if case.family == "isotonic" else None)
        T = float(np.max(oscillation_period(spec)))
        worst = 0.0
        for t in np.linspace(0.0, periods * T, 600):
            q, _, a = kinematics(spec, float(t))
            r = a + reference_potential_gradient(ref, q)
            worst = max(worst, float(np.max(np.abs(r))))
        return worst
    system = build_exact_system(spec)
    fn = solution_fn(spec)
    worst = 0.0
    for t in _residual_times(case, spec, periods):
        r = el1_residual(system, fn, float(t))
        worst = max(worst, float(np.max(np.abs(r))))
    return worst


def _check_exact_residual(seed: int, case_name: str, rel_tol=None) -> CheckReport:
    worst = _closed_form_residual(standard_case(case_name))
    return _report(f"exact-residual:{case_name}", worst, 1e-8,
                   details="analytic closed form against the equations of motion, 3 periods")


def _check_sw2_published_fails(seed: int, rel_tol=None) -> CheckReport:
    worst = _closed_form_residual(standard_case("sw2-published-eta2"))
    return _report("exact-residual:sw2-published-eta2", worst, 1e-1, comparison=">=",
                   details="published kappa normalization is not a solution for eta=2")


def _check_residual_detects_perturbation(seed: int, rel_tol=None) -> CheckReport:
    case = standard_case("ml1+")
    spec = case.spec()
    system = case.system()
    # scale the amplitude but keep the original frequency: the result is no
    # longer a solution of anything in the family
    Om = float(frequency_relation("ml1", spec.params, spec.amplitude)[0])
    A = 1.1 * spec.amplitude[0]

    def detuned(t: float):
        th = Om * t
        return (np.array([A * math.cos(th)]),
                np.array([-A * Om * math.sin(th)]),
                np.array([-A * Om * Om * math.cos(th)]))

    T = float(np.max(oscillation_period(spec)))
    worst = 0.0
    for t in np.linspace(0.0, T, 200):
        worst = max(worst, float(np.max(np.abs(el1_residual(system, detuned, float(t))))))
    return _report("residual-detects-perturbation", worst, 1e-2, comparison=">=",
                   details="10% amplitude perturbation must light up the residual")


def _check_track_exact(seed: int, case_name: str, rel_tol=None) -> CheckReport:
    tol = rel_tol if rel_tol else 1e-10
    case = standard_case(case_name)
    if case.family == "powerlaw":
        return _track_powerlaw(case, tol)
    system, spec, T, traj = _integrate_case(case, 10.0, tol)
    worst = 0.0
    for k in range(len(traj.t)):
        x_exact, _, _ = kinematics(spec, float(traj.t[k]))
        worst = max(worst, float(np.max(np.abs(traj.x[k] - x_exact))))
    details = f"10 periods, {traj.accepted} steps, termination {traj.termination.kind}"
    if traj.termination.kind != "completed":
        worst = math.inf
    return _report(f"track-exact:{case_name}", worst, 1e-6, details=details)


def _track_powerlaw(case: Case, tol: float) -> CheckReport:
    """Track the closed form arc by arc across 10 nominal periods.

    Every orbit of this family reaches the mass zero at the origin in finite
    time with diverging velocity, so one continuous 10-period integration
    cannot exist; each inter-bounce arc is integrated from its own exact
    initial conditions instead.
    """
    system = case.system()
    p = parameter_set(case.params, 1)
    Om = float(frequency_relation("powerlaw", p, case.amplitude)[0])
    T = 2.0 * math.pi / Om
    delta = 0.2                      # entry margin into the arc, radians
    compare_margin = 0.05            # skip the layer where the velocity diverges
    worst = 0.0
    covered = 0.0
    for arc in range(20):            # 20 half-period arcs = 10 periods
        spec = ExactSolutionSpec(case.family, p, case.amplitude,
                                 phase=(-arc * math.pi,))
        t0 = (arc * math.pi - math.pi / 2 + delta) / Om
        t_arc_end = (arc * math.pi + math.pi / 2) / Om
        x0, v0, _ = kinematics(spec, t0)
        opts = _adaptive(t_arc_end, rel_tol=tol)
        traj = integrate(el1_rhs(system), State(t0, x0, v0), opts)
        for k in range(len(traj.t)):
            if abs(math.cos(Om * traj.t[k] - arc * math.pi)) < compare_margin:
                continue             # position error is unbounded where xdot diverges
            try:
                x_exact, _, _ = kinematics(spec, float(traj.t[k]))
            except PdmError:
                continue
            worst = max(worst, float(np.max(np.abs(traj.x[k] - x_exact))))
        covered += (traj.t[-1] - t0) / T
    details = (f"20 re-anchored arcs covering {covered:.2f} of 10 periods; "
               "every orbit hits the origin with diverging velocity, so no "
               "single continuous window exists")
    return _report(f"track-exact:{case.name}", worst, 1e-6, details=details)


def _check_energy_drift(seed: int, case_name: str, rel_tol=None) -> CheckReport:
    tol = rel_tol if rel_tol else 1e-12
    case = standard_case(case_name)
    if case.family == "powerlaw":
        return _energy_drift_powerlaw(case, tol)
    system, spec, T, traj = _integrate_case(case, 100.0, tol)
    e0 = exact_energy(spec)
    worst = 0.0
    for k in range(0, len(traj.t), 7):
        e = total_energy(system, traj.state(k)).total
        worst = max(worst, abs(e - e0) / abs(e0))
    details = f"100 periods, {traj.accepted} steps, E0={e0:.6g}"
    if traj.termination.kind != "completed":
        worst = math.inf
    return _report(f"energy-drift:{case_name}", worst, 1e-8, details=details)


def _energy_drift_powerlaw(case: Case, tol: float) -> CheckReport:
    system = case.system()
    spec = case.spec()
    T = float(np.max(oscillation_period(spec)))
    x0, v0, _ = kinematics(spec, 0.0)
    traj = integrate(el1_rhs(system), State(0.0, x0, v0), _adaptive(0.24 * T, rel_tol=tol))
    e0 = exact_energy(spec)
    worst = 0.0
    for k in range(len(traj.t)):
        e = total_energy(system, traj.state(k)).total
        worst = max(worst, abs(e - e0) / abs(e0))
    return _report(f"energy-drift:{case.name}", worst, 1e-8,
                   details="maximal smooth arc before the origin encounter "
                           f"({traj.accepted} steps)")


def _check_energy_formula(seed: int, case_name: str, rel_tol=None) -> CheckReport:
    case = standard_case(case_name)
    spec = case.spec()
    if case.family in ("harmonic", "isotonic"):
        system = build_system(case.family, 1, case.params)
    else:
        system = case.system()
    e_formula = exact_energy(spec)
    worst = 0.0
    for t in _residual_times(case, spec, 1.0, samples=60):
        e = total_energy(system, exact_solution(spec, float(t))).total
        worst = max(worst, abs(e - e_formula) / max(abs(e_formula), 1e-30))
    return _report(f"energy-formula:{case_name}", worst, 1e-12,
                   details="closed-form energy equals the energy along the solution")


def _check_frequency_ml1(seed: int, rel_tol=None, printed: bool = False) -> CheckReport:
    params = parameter_set({"omega": [1.0], "lambda": 1.0, "sign": "+"}, 1)
    A = 0.7
    spec = ExactSolutionSpec("ml1", params, (A,))
    system = build_system("ml1", 1, params)
    x0, v0, _ = kinematics(spec, 0.0)
    T = float(oscillation_period(spec)[0])
    traj = integrate(el1_rhs(system), State(0.0, x0, v0),
                     _adaptive(8.0 * T, rel_tol=rel_tol or 1e-10))
    measured = estimate_period(traj, 0)
    form = "printed" if printed else "validated"
    Om = float(frequency_relation("ml1", params, [A], form=form)[0])
    err = abs(measured - 2.0 * math.pi / Om) / (2.0 * math.pi / Om)
    if printed:
        return _report("frequency:ml1-printed-form", err, 1e-2, comparison=">=",
                       details=f"published relation misses the measured period at A={A} "
                               "(the spurious amplitude factor cancels only at A=1)")
    return _report("frequency:ml1", err, 1e-6,
                   details=f"measured period {measured:.9f} vs validated relation")


def _check_frequency_powerlaw(seed: int, rel_tol=None) -> CheckReport:
    # closed-form period of the cube-root branch solution, measured on samples;
    # the period is read off the monotone image q = alpha x^(1+upsilon), which
    # shares every crossing with x but is smooth there
    params = parameter_set({"omega": [1.0], "alpha": 1.0, "upsilon": 2.0}, 1)
    Om = 3.0          # (1 + upsilon) omega
    A = 1.0
    from .core import Termination, Trajectory
    ts = np.linspace(0.0, 10.0 * 2.0 * math.pi / Om, 6000)
    c = np.cos(Om * ts)
    x = A * np.sign(c) * np.abs(c) ** (1.0 / 3.0)   # odd continuation through the origin
    q = params.alpha * A ** 3 * c
    qd = -params.alpha * A ** 3 * Om * np.sin(Om * ts)
    qdd = -Om * Om * q
    traj = Trajectory(ts, np.column_stack([x, q]),
                      np.column_stack([np.gradient(x, ts), qd]),
                      np.column_stack([np.zeros_like(x), qdd]),
                      len(ts), 0, 0.0, Termination("completed"))
    measured = estimate_period(traj, 1)
    err = abs(measured - 2.0 * math.pi / Om) / (2.0 * math.pi / Om)
    return _report("frequency:powerlaw", err, 1e-6,
                   details="closed-form samples; period measured on the smooth "
                           "monotone image of the position signal")


def _check_frequency_powerlaw_dynamic(seed: int, rel_tol=None) -> CheckReport:
    """Quarter-period timing of the integrated dynamics against (1+upsilon) omega."""
    case = standard_case("powerlaw-1")
    system = case.system()
    spec = case.spec()
    Om_expected = float(frequency_relation("powerlaw", spec.params, spec.amplitude)[0])
    x0, v0, _ = kinematics(spec, 0.0)
    t_end = 0.6 * math.pi / Om_expected
    traj = integrate(el1_rhs(system), State(0.0, x0, v0),
                     _adaptive(t_end, rel_tol=rel_tol or 1e-10, h_min=1e-13))
    # q = alpha x^(1+upsilon) stays an exact cosine in t; the integration stops
    # a vanishing distance before its zero, so a secant step lands on it
    p = spec.params
    q = p.alpha * traj.x[:, 0] ** (1.0 + p.upsilon)
    t_star = float(traj.t[-1] - q[-1] * (traj.t[-1] - traj.t[-2]) / (q[-1] - q[-2]))
    Om_measured = math.pi / (2.0 * t_star)
    err = abs(Om_measured - Om_expected) / Om_expected
    return _report("frequency:powerlaw-dynamic", err, 1e-6,
                   details=f"origin reached at t={t_star:.9f}; frequency from quarter period")


def _check_invariance(seed: int, case_name: str, rel_tol=None) -> CheckReport:
    tol = rel_tol if rel_tol else 1e-10
    case = standard_case(case_name)
    system = case.system()
    nmap, ref = reference_map(system)
    spec = case.spec()
    T = float(np.max(oscillation_period(spec)))
    x0, v0, _ = kinematics(spec, 0.0)
    t_end = 0.24 * T if case.family == "powerlaw" else 3.0 * T
    traj = integrate(el1_rhs(system), State(0.0, x0, v0), _adaptive(t_end, rel_tol=tol))
    worst = 0.0
    for k in range(len(traj.t)):
        r = elg_residual(nmap, system, ref, traj.state(k))
        worst = max(worst, float(np.max(np.abs(r))))
    return _report(f"invariance:{case_name}", worst, 1e-6,
                   details="mapped trajectory satisfies the reference equations "
                           f"({len(traj.t)} states)")


def _el2_demo_system(n: int) -> PdmSystem:
    if n == 1:
        return build_system("custom", 1, mass_exprs=["1+x1^2"], kind=TYPE2)
    return build_system("custom", 2, mass_exprs=["1+x1^2+x2^2"], kind=TYPE2)


def _el2_demo_residual(n: int, rel_tol: float) -> float:
    system = _el2_demo_system(n)
    if n == 1:
        x0, v0 = [0.4], [0.7]
    else:
        x0, v0 = [0.4, -0.3], [0.7, 0.5]
    traj = integrate(el2_rhs(system), State.of(0.0, x0, v0),
                     _adaptive(10.0, rel_tol=rel_tol))
    worst = 0.0
    for k in range(len(traj.t)):
        r = el2_mapped_residual(system, traj.state(k))
        worst = max(worst, float(np.max(np.abs(r))))
    return worst


def _check_noninvariance_n2(seed: int, rel_tol=None) -> CheckReport:
    worst = _el2_demo_residual(2, rel_tol or 1e-10)
    return _report("noninvariance:el2-n2", worst, 1e-2, comparison=">=",
                   details="shared multiplier in two dimensions leaves an "
                           "order-one mapped residual")


def _check_invariance_el2_n1(seed: int, rel_tol=None) -> CheckReport:
    worst = _el2_demo_residual(1, rel_tol or 1e-10)
    return _report("invariance:el2-n1", worst, 1e-8,
                   details="the same construction collapses cleanly at n=1")


def _check_el2_obstruction_value(seed: int, rel_tol=None) -> CheckReport:
    system = _el2_demo_system(2)
    st = State.of(0.0, [1.0, 0.0], [0.0, 1.0])
    metric = abs(el2_obstruction(system, st) - 0.5)
    return _report("el2-obstruction-value", metric, 1e-12,
                   details="closed-form value of the obstruction term at a probe state")


def _check_ml2_reduction(seed: int, rel_tol=None) -> CheckReport:
    params = {"omega": [1.0], "lambda": 0.25, "sign": "-", "eta_const": [2.0]}
    assert ml2_reduction_check(parameter_set(params, 1))
    sys_ml2 = build_system("ml2", 1, params)
    sys_ml1 = build_system("ml1", 1, {"omega": [1.0], "lambda": 0.25, "sign": "-"})
    spec = ExactSolutionSpec("ml1", parameter_set(
        {"omega": [1.0], "lambda": 0.25, "sign": "-"}, 1), (1.0,))
    T = float(oscillation_period(spec)[0])
    x0, v0, _ = kinematics(spec, 0.0)
    opts = IntegratorOptions(t_end=5.0 * T, scheme=FIXED_RK4, h=2e-3)
    tr_a = integrate(el1_rhs(sys_ml2), State(0.0, x0, v0), opts)
    tr_b = integrate(el1_rhs(sys_ml1), State(0.0, x0, v0), opts)
    worst = float(np.max(np.abs(tr_a.x - tr_b.x)))
    return _report("ml2-reduction", worst, 1e-9,
                   details="constant-map trajectories coincide with oscillator-map "
                           "trajectories when lam = 1/eta^2 on the '-' branch")


def _check_rk4_order(seed: int, rel_tol=None) -> CheckReport:
    system = build_system("harmonic", 1, {"omega": [1.0]})
    rhs = el1_rhs(system)
    T = 2.0 * math.pi
    errs = []
    for h in (0.05, 0.025):
        opts = IntegratorOptions(t_end=10.0 * T, scheme=FIXED_RK4, h=h)
        traj = integrate(rhs, State.of(0.0, [1.0], [0.0]), opts)
        # max over the window: at full-period endpoints the dominant phase
        # error is first-order invisible and the measured order comes out 5
        errs.append(float(np.max(np.abs(traj.x[:, 0] - np.cos(traj.t)))))
    ratio = errs[0] / errs[1]
    metric = max(0.0, 12.0 - ratio, ratio - 20.0)
    return _report("rk4-order", metric, 0.0,
                   details=f"error ratio {ratio:.2f} for h -> h/2 over 10 periods "
                           "(4th order predicts 16)")


def _check_adaptive_vs_fixed(seed: int, rel_tol=None) -> CheckReport:
    tol = rel_tol if rel_tol else 1e-10
    case = standard_case("morse")
    system = case.system()
    spec = case.spec()
    T = float(oscillation_period(spec)[0])
    x0, v0, _ = kinematics(spec, 0.0)
    tr_a = integrate(el1_rhs(system), State(0.0, x0, v0),
                     _adaptive(10.0 * T, rel_tol=tol))
    tr_f = integrate(el1_rhs(system), State(0.0, x0, v0),
                     IntegratorOptions(t_end=10.0 * T, scheme=FIXED_RK4, h=1e-3))
    xs, _ = sample_dense(tr_f, tr_a.t)
    worst = float(np.max(np.abs(xs - tr_a.x)))
    return _report("adaptive-vs-fixed", worst, 10.0 * tol,
                   details="two schemes agree over 10 periods of the "
                           "bounded-exponential family")


def _check_substitution_identity(seed: int, rel_tol=None) -> CheckReport:
    rng = _rng(seed, "substitution")
    worst = 0.0
    for sign in (1.0, -1.0):
        lam = 1.0
        xs = rng.uniform(-0.9, 0.9, 5000) if sign < 0 else rng.uniform(-3, 3, 5000)
        for x in xs:
            q2 = x * x / (1.0 + sign * lam * x * x)
            back = q2 / (1.0 - sign * lam * q2)
            worst = max(worst, abs(back - x * x) / max(x * x, 1e-30))
    return _report("substitution-identity", worst, 1e-12,
                   details="q^2 = x^2/(1 +- lam x^2) inverts to x^2 = q^2/(1 -+ lam q^2)")


def _check_tau_closed_form(seed: int, rel_tol=None) -> CheckReport:
    case = standard_case("ml1+")
    spec = case.spec()
    system = case.system()
    nmap, _ = reference_map(system)
    T = float(oscillation_period(spec)[0])           # 2 pi sqrt(2)
    traj = exact_trajectory(spec, 0.0, T, 4001)
    tau = tau_values(nmap, traj, 0)
    metric = abs(tau[-1] - 2.0 * math.pi)
    return _report("tau-closed-form:ml1", metric, 1e-8,
                   details="one position period advances the rescaled clock by 2 pi")


def _reference_closed_form(case: Case, spec: ExactSolutionSpec, phase: float = 0.0):
    """Reference-frame closed form q_ref(tau) matched to the mapped solution."""
    p = spec.params
    w = p.omega[0]
    A = spec.amplitude[0]
    if case.family == "ml1":
        s = 1.0 if p.sign == "+" else -1.0
        B = A / math.sqrt(1.0 + s * p.lam * A * A)
        return lambda tau: B * np.cos(w * np.asarray(tau) + phase)
    if case.family == "morse":
        return lambda tau: A * np.cos(w * np.asarray(tau) + phase)
    if case.family == "powerlaw":
        Q = p.alpha * A ** (1.0 + p.upsilon)
        return lambda tau: Q * np.cos(w * np.asarray(tau) + phase)
    if case.family == "ml2":
        s = 1.0 if p.sign == "+" else -1.0
        B = p.eta_const[0] / math.sqrt(1.0 + s * p.lam * A * A)
        return lambda tau: B * np.cos(w * np.asarray(tau))
    if case.family in ("sw1", "sw2"):
        k = p.kappa[0]
        if case.family == "sw1":
            s = 1.0 if p.sign == "+" else -1.0
            cq2 = A * A / (1.0 + s * p.lam * A * A)
        else:
            cq2 = A * A
        def q_ref(tau):
            th = w * np.asarray(tau)
            return np.sqrt((w * w * cq2 * cq2 * np.sin(th) ** 2
                            + k * np.cos(th) ** 2) / (w * w * cq2))
        return q_ref
    raise UnknownCheck(case.family)


def _check_mapped_exactness(seed: int, case_name: str, rel_tol=None) -> CheckReport:
    case = standard_case(case_name)
    spec = case.spec()
    system = case.system()
    nmap, _ = reference_map(system)
    T = float(np.max(oscillation_period(spec)))
    phase = 0.0
    if case.family == "powerlaw":
        Om = float(frequency_relation("powerlaw", spec.params, spec.amplitude)[0])
        t0, t1 = -0.45 * math.pi / Om, 0.45 * math.pi / Om
        phase = Om * t0       # the arc does not start at the turning point
    else:
        t0, t1 = 0.0, 3.0 * T
    traj = exact_trajectory(spec, t0, t1, 4001)
    tau = tau_values(nmap, traj, 0, require_positive=False)
    q_num = np.array([q_map(nmap, 0, float(x))[0] for x in traj.x[:, 0]])
    q_ref = _reference_closed_form(case, spec, phase)(tau)
    worst = float(np.max(np.abs(q_num - q_ref)))
    return _report(f"mapped-exactness:{case_name}", worst, 1e-8,
                   details="mapped closed form reproduces the reference solution "
                           "pointwise in the rescaled time")


# --- registry -------------------------------------------------------------------


def _build_registry() -> dict[str, Callable]:
    reg: dict[str, Callable] = {
        "profiles-derivatives": _check_profile_derivatives,
        "ml-profile-identity": _check_ml_identity,
        "parser-ad-d1": lambda s, rel_tol=None: _check_parser_ad(s, rel_tol, order=1),
        "parser-ad-d2": lambda s, rel_tol=None: _check_parser_ad(s, rel_tol, order=2),
        "parser-roundtrip": _check_parser_roundtrip,
        "parser-total": _check_parser_total,
        "el2-collapse-n1": _check_el2_collapse,
        "exact-residual:sw2-published-eta2": _check_sw2_published_fails,
        "residual-detects-perturbation": _check_residual_detects_perturbation,
        "frequency:ml1": lambda s, rel_tol=None: _check_frequency_ml1(s, rel_tol),
        "frequency:ml1-printed-form":
            lambda s, rel_tol=None: _check_frequency_ml1(s, rel_tol, printed=True),
        "frequency:powerlaw": _check_frequency_powerlaw,
        "frequency:powerlaw-dynamic": _check_frequency_powerlaw_dynamic,
        "noninvariance:el2-n2": _check_noninvariance_n2,
        "invariance:el2-n1": _check_invariance_el2_n1,
        "el2-obstruction-value": _check_el2_obstruction_value,
        "ml2-reduction": _check_ml2_reduction,
        "rk4-order": _check_rk4_order,
        "adaptive-vs-fixed": _check_adaptive_vs_fixed,
        "substitution-identity": _check_substitution_identity,
        "tau-closed-form:ml1": _check_tau_closed_form,
    }

    def add_case(template: str, fn: Callable, names: Iterable[str]) -> None:
        for name in names:
            reg[template.format(name)] = (
                lambda s, rel_tol=None, _n=name, _f=fn: _f(s, _n, rel_tol=rel_tol))

    eom_cases = ("ml1+", "ml1-", "powerlaw-1", "ml2-reduction", "morse",
                 "sw1+", "sw2-amended-eta2")
    add_case("printed-eom:{}", _check_printed_eom, eom_cases)

    map_cases = ("ml1+", "ml1-", "powerlaw-1", "powerlaw-2", "ml2-reduction",
                 "morse", "sw1+", "sw1-", "sw2-eta-neg1", "sw2-amended-eta2")
    add_case("g-identity:{}", _check_g_identity, map_cases)
    add_case("potential-match:{}", _check_potential_match, map_cases)

    residual_cases = ("harmonic", "isotonic", "ml1+", "ml1-", "powerlaw-1",
                      "powerlaw-2", "morse", "sw1+", "sw1-", "sw2-eta-neg1",
                      "sw2-amended-eta2")
    add_case("exact-residual:{}", _check_exact_residual, residual_cases)

    track_cases = ("ml1+", "ml1-", "ml1-0.5+", "ml1-0.5-", "powerlaw-1",
                   "powerlaw-2", "morse", "sw1+", "sw2-eta-neg1")
    add_case("track-exact:{}", _check_track_exact, track_cases)

    drift_cases = ("ml1+", "ml1-", "powerlaw-1", "morse", "sw1+",
                   "sw2-eta-neg1", "ml2-reduction")
    add_case("energy-drift:{}", _check_energy_drift, drift_cases)

    energy_cases = ("harmonic", "isotonic", "ml1+", "ml1-", "powerlaw-1",
                    "powerlaw-2", "morse", "sw1+", "sw1-", "sw2-eta-neg1",
                    "sw2-amended-eta2")
    add_case("energy-formula:{}", _check_energy_formula, energy_cases)

    add_case("invariance:{}", _check_invariance,
             INVARIANCE_CASES + ("sw2-amended-eta2",))

    mapped_cases = ("ml1+", "powerlaw-1", "ml2-reduction", "morse", "sw1+",
                    "sw2-eta-neg1", "sw2-amended-eta2")
    add_case("mapped-exactness:{}", _check_mapped_exactness, mapped_cases)
    return reg


_REGISTRY = _build_registry()


def check_names() -> list[str]:
    return sorted(_REGISTRY)


def run_check(name: str, seed: int = DEFAULT_SEED,
              rel_tol: float | None = None) -> CheckReport:
    """Run one named check; UnknownCheck if the name is not registered."""
    if name not in _REGISTRY:
        raise UnknownCheck(f"no check named {name!r}")
    return _REGISTRY[name](seed, rel_tol=rel_tol)


def run_suite(selection: Sequence[str] | None = None, seed: int = DEFAULT_SEED,
              rel_tol: float | None = None) -> tuple[list[CheckReport], SuiteSummary]:
    """Run a selection of checks (all by default) and summarize.

    ``selection`` entries may be exact names or prefixes; ``rel_tol``
    overrides the integrator tolerance of every integration-backed check
    (the documented way to demonstrate threshold sensitivity).
    """
    if selection is None:
        names = check_names()
    else:
        names = []
        for want in selection:
            hits = [n for n in check_names() if n == want or n.startswith(want)]
            if not hits:
                raise UnknownCheck(f"no check named {want!r}")
            names.extend(hits)
        names = sorted(dict.fromkeys(names))
    reports = [run_check(n, seed=seed, rel_tol=rel_tol) for n in names]
    passed = sum(1 for r in reports if r.passed and not r.is_demonstration)
    expected = sum(1 for r in reports if r.passed and r.is_demonstration)
    failed = sum(1 for r in reports if not r.passed)
    return reports, SuiteSummary(passed, expected, failed)
