"""Nonlocal point transformation onto constant-mass reference oscillators.

Per coordinate the bundle is (q_i(x_i), f_i(x_i), tau_i) with

    dq_i/dx_i = f_i sqrt(m_i),   dtau_i/dt = f_i,   qtilde_i = xdot_i sqrt(m_i),

so (dq/dx)^2 = m f^2 always holds.  dq/dx is returned signed: the isotonic
power-law family with a negative exponent has a decreasing coordinate map,
and the squared identity is the invariant, not the sign.

The same machinery powers the negative result: for a shared mass multiplier
in two or more dimensions the mapped velocity acquires a term with no
counterpart in the reference equations, and el2_obstruction measures it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (TYPE2, ParameterSet, PdmSystem, State, Trajectory,
                   potential_energy)
from .eom import (ReferenceSystem, el1_acceleration, el2_acceleration,
                  reference_potential, reference_potential_gradient)
from .errors import InvalidParameter, NonPositiveScale, UnsupportedFamily
from .integrate import sample_dense

OSCILLATOR_MAP = "oscillator"
CONSTANT_MAP = "constant"
MORSE_MAP = "morse"
ISOTONIC_MAP = "isotonic"

_MAP_KIND = {"ml1": OSCILLATOR_MAP, "powerlaw": OSCILLATOR_MAP,
             "ml2": CONSTANT_MAP, "morse": MORSE_MAP,
             "sw1": ISOTONIC_MAP, "sw2": ISOTONIC_MAP}


@dataclass(frozen=True)
class NonlocalMap:
    kind: str
    profiles: tuple
    params: ParameterSet

    def __post_init__(self):
        if self.kind not in (OSCILLATOR_MAP, CONSTANT_MAP, MORSE_MAP, ISOTONIC_MAP):
            raise InvalidParameter("kind", f"unknown map kind {self.kind!r}")


@dataclass
class MappedTrajectory:
    """Per-coordinate reference-frame image of a trajectory."""

    t: np.ndarray          # (N,)
    tau: np.ndarray        # (N, n) rescaled times, one clock per coordinate
    q: np.ndarray          # (N, n)
    qtilde: np.ndarray     # (N, n)


def reference_map(system: PdmSystem) -> tuple[NonlocalMap, ReferenceSystem]:
    """The transformation bundle and reference oscillator for a catalog family."""
    family = system.potential.family
    kind = _MAP_KIND.get(family)
    if kind is None:
        raise UnsupportedFamily(f"no reference map catalogued for {family!r}")
    p = system.potential.params
    if family in ("sw1", "sw2"):
        ref = ReferenceSystem(system.n, "isotonic", p.omega, p.kappa)
    else:
        ref = ReferenceSystem(system.n, "harmonic", p.omega)
    return NonlocalMap(kind, system.profiles, p), ref


def f_scale(nmap: NonlocalMap, i: int, x: float) -> float:
    """Time-rescaling factor f_i at x."""
    m, m1, _ = nmap.profiles[i].eval(x)
    half = m1 / (2.0 * m)
    if nmap.kind in (OSCILLATOR_MAP, ISOTONIC_MAP):
        return 1.0 + half * x
    if nmap.kind == CONSTANT_MAP:
        return nmap.params.eta_const[i] * half
    # bounded-exponential map; reduces to the constant zeta for m = exp(2 zeta x)
    z = nmap.params.zeta[i]
    return half + (z - half) * math.exp(-z * x)


def q_map(nmap: NonlocalMap, i: int, x: float) -> tuple[float, float]:
    """(q_i, dq_i/dx_i) at x; the derivative is f_i sqrt(m_i), sign included."""
    m, m1, _ = nmap.profiles[i].eval(x)
    root = math.sqrt(m)
    if nmap.kind in (OSCILLATOR_MAP, ISOTONIC_MAP):
        q = x * root
    elif nmap.kind == CONSTANT_MAP:
        q = nmap.params.eta_const[i] * root
    else:
        z = nmap.params.zeta[i]
        q = root * (1.0 - math.exp(-z * x))
    return q, f_scale(nmap, i, x) * root


def inverse_q(nmap: NonlocalMap, i: int, q: float,
              bracket: tuple[float, float]) -> float:
    """x with q_i(x) = q inside a bracket where the map is monotone.

    Safeguarded bisection with Newton acceleration through dq/dx.
    """
    lo, hi = bracket
    q_lo = q_map(nmap, i, lo)[0] - q
    q_hi = q_map(nmap, i, hi)[0] - q
    if q_lo == 0.0:
        return lo
    if q_hi == 0.0:
        return hi
    if (q_lo > 0.0) == (q_hi > 0.0):
        raise InvalidParameter("bracket", "does not bracket the target value")
    x = 0.5 * (lo + hi)
    for _ in range(100):
        qi, dq = q_map(nmap, i, x)
        r = qi - q
        if abs(r) < 1e-14 * max(1.0, abs(q)):
            return x
        if (r > 0.0) == (q_hi > 0.0):
            hi = x
        else:
            lo = x
        step = r / dq if dq != 0.0 else math.inf
        x_newton = x - step
        x = x_newton if lo < x_newton < hi else 0.5 * (lo + hi)
    return x


def tau_values(nmap: NonlocalMap, traj: Trajectory, i: int,
               require_positive: bool = True) -> np.ndarray:
    """Cumulative rescaled time tau_i(t) along a trajectory, tau_i(t0) = 0.

    Composite Simpson quadrature of f_i over each accepted interval, with the
    midpoint taken from the dense output.
    """
    t = traj.t
    mids = 0.5 * (t[:-1] + t[1:])
    x_mid, _ = sample_dense(traj, mids)
    f_nodes = np.array([f_scale(nmap, i, float(xk)) for xk in traj.x[:, i]])
    f_mid = np.array([f_scale(nmap, i, float(xk)) for xk in x_mid[:, i]])
    if require_positive and (np.any(f_nodes <= 0.0) or np.any(f_mid <= 0.0)):
        raise NonPositiveScale(
            f"f_{i + 1} <= 0 along the trajectory; tau_{i + 1} is not increasing")
    h = np.diff(t)
    dtau = (h / 6.0) * (f_nodes[:-1] + 4.0 * f_mid + f_nodes[1:])
    return np.concatenate([[0.0], np.cumsum(dtau)])


def tau_accumulate(nmap: NonlocalMap, traj: Trajectory, i: int) -> np.ndarray:
    """Strictly increasing tau_i(t); raises NonPositiveScale if f_i <= 0 anywhere."""
    return tau_values(nmap, traj, i, require_positive=True)


def map_to_reference(nmap: NonlocalMap, traj: Trajectory) -> MappedTrajectory:
    """Image (tau_i, q_i, qtilde_i) of a trajectory, one clock per coordinate."""
    n = traj.x.shape[1]
    tau = np.column_stack([tau_accumulate(nmap, traj, i) for i in range(n)])
    q = np.empty_like(traj.x)
    qt = np.empty_like(traj.v)
    for k in range(len(traj.t)):
        for i in range(n):
            m, _, _ = nmap.profiles[i].eval(float(traj.x[k, i]))
            q[k, i] = q_map(nmap, i, float(traj.x[k, i]))[0]
            qt[k, i] = traj.v[k, i] * math.sqrt(m)
    return MappedTrajectory(traj.t.copy(), tau, q, qt)


def potential_match_residual(nmap: NonlocalMap, system: PdmSystem,
                             ref: ReferenceSystem, x: Sequence[float]) -> float:
    """|V_system(x) - V_ref(q(x))|; zero when the map matches the potentials."""
    xv = np.asarray(x, dtype=float)
    q = np.array([q_map(nmap, i, float(xv[i]))[0] for i in range(system.n)])
    return abs(potential_energy(system, xv) - reference_potential(ref, q))


def elg_residual(nmap: NonlocalMap, system: PdmSystem, ref: ReferenceSystem,
                 state: State) -> np.ndarray:
    """Reference-equation residual of the mapped image of one type1 state.

    d(qtilde)/dtau is evaluated analytically through the chain rule,
    d(qtilde)/dtau = (d(qtilde)/dt) / f with the acceleration taken from the
    equations of motion at the state.
    """
    acc = el1_acceleration(system, state)
    grad_ref = _mapped_reference_gradient(nmap, ref, state.x)
    out = np.empty(system.n)
    for i in range(system.n):
        m, m1, _ = system.profiles[i].eval(float(state.x[i]))
        dqt_dt = math.sqrt(m) * (acc[i] + (m1 / (2.0 * m)) * float(state.v[i]) ** 2)
        f = f_scale(nmap, i, float(state.x[i]))
        if f == 0.0:
            # removable 0/0 exactly at the turning point of the constant map
            out[i] = 0.0 if dqt_dt == 0.0 else math.inf
            continue
        out[i] = dqt_dt / f + grad_ref[i]
    return out


def _mapped_reference_gradient(nmap: NonlocalMap, ref: ReferenceSystem,
                               x: np.ndarray) -> np.ndarray:
    q = np.array([q_map(nmap, i, float(x[i]))[0] for i in range(len(x))])
    return reference_potential_gradient(ref, q)


def el2_obstruction(system: PdmSystem, state: State) -> float:
    """Magnitude of the shared-multiplier term absent from the reference form.

    The coupled equations of motion carry (1/2)(grad_i m / m) sum_j xd_j^2;
    nothing in the mapped reference equations can absorb it once n >= 2.
    """
    if system.kind != TYPE2:
        raise InvalidParameter("kind", "el2_obstruction needs a type2 system")
    m, gradm = system.coupled_profile.value_and_gradient(state.x)
    v2 = float(np.dot(state.v, state.v))
    vec = 0.5 * (np.asarray(gradm) / m) * v2
    return float(np.linalg.norm(vec))


def el2_mapped_residual(system: PdmSystem, state: State) -> np.ndarray:
    """Free-reference residual of the mapped image of one type2 state.

    Uses the same construction as the per-coordinate map: qtilde_i =
    xdot_i sqrt(m), f_i = 1 + (grad_i m) x_i / (2m), and a force-free
    reference.  At n = 1 this vanishes identically; at n >= 2 the
    obstruction term survives.
    """
    if system.kind != TYPE2:
        raise InvalidParameter("kind", "el2_mapped_residual needs a type2 system")
    m, gradm = system.coupled_profile.value_and_gradient(state.x)
    acc = el2_acceleration(system, state)
    mdot = float(np.dot(np.asarray(gradm), state.v))
    out = np.empty(system.n)
    for i in range(system.n):
        dqt_dt = math.sqrt(m) * (acc[i] + (mdot / (2.0 * m)) * float(state.v[i]))
        f = 1.0 + (gradm[i] / (2.0 * m)) * float(state.x[i])
        out[i] = dqt_dt / f
    return out
