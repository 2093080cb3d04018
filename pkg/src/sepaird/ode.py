"""Deterministic SEPAIRD reference model.

Compartments: Susceptible, Exposed (latent), Pre-symptomatic, permanently
Asymptomatic, symptomatic Infected, Recovered, Dead.  Transmission comes
from P, A and (unless isolated) I; uniform social distancing scales the
force of infection by ``1 - delta``.  The two policies may be combined,
composing multiplicatively.

The living population ``N = S+E+P+A+I+R`` (excluding D) normalizes the
force of infection and the effective reproduction number.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import SimParams

COMPARTMENTS = ("S", "E", "P", "A", "I", "R", "D")


class OdeError(ValueError):
    """Degenerate parameters or a diverged integration."""


@dataclass(frozen=True)
class OdeParams:
    """Rates of the compartmental model.

    beta:  infectious contacts per day
    alpha: 1 / latent days
    mu:    1 / pre-symptomatic days
    gamma: 1 / symptomatic days
    nu:    symptomatic share, in (0, 1)
    lam:   survival probability of a symptomatic course, in (0, 1)
    delta: social-distancing fraction, in [0, 1]
    isolate: symptomatic cases removed from transmission
    """

    beta: float
    alpha: float
    mu: float
    gamma: float
    nu: float
    lam: float
    delta: float = 0.0
    isolate: bool = False


@dataclass(frozen=True)
class OdeState:
    """Population masses of the seven compartments."""

    S: float
    E: float
    P: float
    A: float
    I: float
    R: float
    D: float

    def as_array(self) -> np.ndarray:
        return np.array([self.S, self.E, self.P, self.A, self.I, self.R, self.D])

    @staticmethod
    def from_array(y) -> "OdeState":
        return OdeState(*(float(v) for v in y))

    @property
    def living(self) -> float:
        return self.S + self.E + self.P + self.A + self.I + self.R

    @property
    def total(self) -> float:
        return self.living + self.D


def abm_to_ode(p: SimParams) -> OdeParams:
    """Map agent-level parameters to compartmental rates.

    Uses ``beta = daily_contacts * infectiousness`` and converts the
    wild-type course day marks into phase rates.
    """
    if p.latent_end0 <= 0.0 or p.incubation_end0 <= p.latent_end0 or p.duration0 <= p.incubation_end0:
        raise OdeError("zero-length phase: course day marks must be strictly ordered")
    return OdeParams(
        beta=p.daily_contacts * min(p.infectiousness0, 1.0),
        alpha=1.0 / p.latent_end0,
        mu=1.0 / (p.incubation_end0 - p.latent_end0),
        gamma=1.0 / (p.duration0 - p.incubation_end0),
        nu=p.symptomatic_chance0,
        lam=1.0 - p.fatality0,
        delta=p.social_distancing,
        isolate=p.isolate_symptomatic,
    )


def seeded_state(n_agents: float, n_infected: float, compartment: str = "P") -> OdeState:
    """Disease-free population with ``n_infected`` seeded into one compartment."""
    if compartment not in COMPARTMENTS or compartment in ("S", "D"):
        raise OdeError(f"cannot seed infections into compartment {compartment!r}")
    values = dict.fromkeys(COMPARTMENTS, 0.0)
    values["S"] = float(n_agents - n_infected)
    values[compartment] = float(n_infected)
    return OdeState(**values)


def _deriv(y: np.ndarray, p: OdeParams) -> np.ndarray:
    S, E, P, A, I, R, D = y
    living = S + E + P + A + I + R
    if living <= 0.0:
        raise OdeError("population extinct")
    infectious = P + A if p.isolate else I + P + A
    force = S * p.beta * (1.0 - p.delta) * infectious / living
    dS = -force
    dE = force - E * p.alpha
    dP = E * p.alpha - P * p.mu
    dA = P * p.mu * (1.0 - p.nu) - A * p.gamma
    dI = P * p.mu * p.nu - I * p.gamma
    dR = A * p.gamma + I * p.lam * p.gamma
    dD = I * (1.0 - p.lam) * p.gamma
    return np.array([dS, dE, dP, dA, dI, dR, dD])


def derivative(s: OdeState, p: OdeParams) -> OdeState:
    """Time derivative of the seven compartments; components sum to zero."""
    return OdeState.from_array(_deriv(s.as_array(), p))


@dataclass
class Trajectory:
    """Fixed-step solution: ``states[i]`` is the state at ``times[i]``."""

    times: np.ndarray
    states: np.ndarray
    clip_count: int = 0

    def state_at(self, t: float) -> OdeState:
        """State at the grid point nearest ``t``."""
        idx = int(np.argmin(np.abs(self.times - t)))
        return OdeState.from_array(self.states[idx])

    @property
    def final_state(self) -> OdeState:
        return OdeState.from_array(self.states[-1])

    def __iter__(self):
        for t, y in zip(self.times, self.states):
            yield float(t), OdeState.from_array(y)


def integrate(s0: OdeState, p: OdeParams, horizon: float, dt: float = 0.05) -> Trajectory:
    """Classical fixed-step RK4 over ``[0, horizon]``.

    Total mass is checked to 1e-9 relative at every step; float-noise
    negatives above -1e-12 are clipped to zero and counted.
    """
    if dt <= 0.0:
        raise OdeError("dt must be > 0")
    if horizon < dt:
        raise OdeError("horizon must be >= dt")
    n_steps = int(round(horizon / dt))
    times = np.arange(n_steps + 1) * dt
    states = np.zeros((n_steps + 1, 7))
    y = s0.as_array().astype(np.float64)
    states[0] = y
    mass0 = float(y.sum())
    clip_count = 0
    for i in range(n_steps):
        k1 = _deriv(y, p)
        k2 = _deriv(y + 0.5 * dt * k1, p)
        k3 = _deriv(y + 0.5 * dt * k2, p)
        k4 = _deriv(y + dt * k3, p)
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise OdeError("integration diverged")
        low = float(y.min())
        if low < 0.0:
            if low < -1e-12:
                raise OdeError(f"integration diverged: compartment reached {low}")
            clip_count += int(np.count_nonzero(y < 0.0))
            y = np.maximum(y, 0.0)
        if abs(float(y.sum()) - mass0) > 1e-9 * max(mass0, 1.0):
            raise OdeError("integration diverged: mass not conserved")
        states[i + 1] = y
    return Trajectory(times=times, states=states, clip_count=clip_count)


def _r0_formula(beta, gamma, mu, nu, delta, isolate) -> float:
    symptomatic_term = beta * (1.0 - nu) / gamma if isolate else beta / gamma
    return (beta / mu + symptomatic_term) * (1.0 - delta)


def basic_reproduction(p: OdeParams) -> float:
    """Secondary infections of one case in a fully susceptible population."""
    return _r0_formula(p.beta, p.gamma, p.mu, p.nu, p.delta, p.isolate)


def effective_reproduction(s: OdeState, p: OdeParams) -> float:
    """Reproduction number scaled by the current susceptible share."""
    living = s.living
    if living <= 0.0:
        raise OdeError("population extinct")
    return basic_reproduction(p) * s.S / living


SENSITIVITY_QUANTITIES = ("beta", "gamma", "mu", "nu", "S", "N")


@dataclass(frozen=True)
class FitnessSensitivities:
    """Partial derivatives of the effective reproduction number.

    ``signs`` maps each quantity to -1, 0 or +1.  Higher values mark
    directions in which a variant gains evolutionary fitness.
    """

    derivatives: dict
    signs: dict


def fitness_sensitivities(s: OdeState, p: OdeParams) -> FitnessSensitivities:
    """Central finite-difference gradient of R_t over (beta, gamma, mu, nu, S, N).

    S and N are treated as independent arguments of the R_t formula, so
    the S derivative holds the living population fixed.  Without isolation
    the nu derivative is exactly zero (nu does not enter the formula).
    """
    living = s.living
    if living <= 0.0:
        raise OdeError("population extinct")

    def rt(beta, gamma, mu, nu, S, N):
        return _r0_formula(beta, gamma, mu, nu, p.delta, p.isolate) * S / N

    base = {"beta": p.beta, "gamma": p.gamma, "mu": p.mu, "nu": p.nu, "S": s.S, "N": living}
    derivatives = {}
    signs = {}
    for name in SENSITIVITY_QUANTITIES:
        x = base[name]
        h = 1e-6 * abs(x) if x != 0.0 else 1e-6
        hi = dict(base)
        lo = dict(base)
        hi[name] = x + h
        lo[name] = x - h
        d = (rt(**hi) - rt(**lo)) / (2.0 * h)
        derivatives[name] = d
        signs[name] = 0 if d == 0.0 else (1 if d > 0.0 else -1)
    return FitnessSensitivities(derivatives=derivatives, signs=signs)
