"""Agent-based evolutionary epidemic engine.

Discrete daily steps over a homogeneously mixing population held in
flat numpy arrays.  Each step runs a contact phase (infectious carriers
meet random living agents, infections may mutate and drift) followed by
a progression phase (counters advance, symptoms appear, courses resolve
into death or recovery with recursive cross-immunity).

Agent state is stored column-wise; ``Agent`` is a read-only snapshot
assembled on demand.  A ``World`` is confined to a single execution
context for its whole run; parallelism lives one level up, across
independent replications.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .params import SimParams, validate_params
from .rng import RngStream
from .variants import Registry, VariantProps, spawn_variant, wild_type_props

_NO_INFECTION = -1
_UNDETERMINED = -1


@dataclass(frozen=True)
class CourseThresholds:
    """Integer day marks of one individual disease course.

    ``latent_end`` opens the infectious window, ``symptom_day`` may turn
    the course symptomatic, ``end_day`` resolves it.  Draws are truncated
    at 0, so any ordering between the three can occur.
    """

    latent_end: int
    symptom_day: int
    end_day: int


@dataclass(frozen=True)
class Infection:
    variant: int
    counter: int
    course: CourseThresholds
    symptomatic: Optional[bool]
    isolated: bool


@dataclass(frozen=True)
class Agent:
    """Read-only snapshot of one agent."""

    id: int
    alive: bool
    infection: Optional[Infection]
    immune_clusters: frozenset

    @property
    def status(self) -> str:
        """Susceptible, Infected, or Recovered (meaningful while alive)."""
        if self.infection is not None:
            return "Infected"
        return "Recovered" if self.immune_clusters else "Susceptible"


def _round_half_up(x: np.ndarray) -> np.ndarray:
    # nearest integer, halves away from zero; inputs are already >= 0
    return np.floor(x + 0.5)


def draw_course(v: VariantProps, sigma_ii: float, rng: RngStream) -> CourseThresholds:
    """Draw individual day marks around the variant's course means.

    Each mark is Gaussian with standard deviation ``mean * sigma_ii``,
    truncated below at 0 and rounded to the nearest integer (half away
    from zero).
    """
    means = np.array([v.latent_end, v.incubation_end, v.duration])
    raw = rng.normal(means, means * sigma_ii)
    l, b, d = _round_half_up(np.maximum(raw, 0.0)).astype(np.int64)
    return CourseThresholds(latent_end=int(l), symptom_day=int(b), end_day=int(d))


class World:
    """Full simulation state: agents, variant registry, counters, rng."""

    def __init__(self, p: SimParams, log_events: bool = False):
        validate_params(p)
        self.params = p
        self.rng = RngStream(p.seed)
        self.registry = Registry(wild_type_props(p))
        self.step_index = 0
        n = p.n_agents
        self.alive = np.ones(n, dtype=bool)
        self.variant_of = np.full(n, _NO_INFECTION, dtype=np.int64)
        self.counter = np.zeros(n, dtype=np.int64)
        self.latent_end = np.zeros(n, dtype=np.int64)
        self.symptom_day = np.zeros(n, dtype=np.int64)
        self.end_day = np.zeros(n, dtype=np.int64)
        self.symptomatic = np.full(n, _UNDETERMINED, dtype=np.int8)
        self.isolated = np.zeros(n, dtype=bool)
        self.ever_infected = np.zeros(n, dtype=bool)
        self.immune = np.zeros((n, 8), dtype=bool)
        self.active_count = np.zeros(8, dtype=np.int64)
        self.n_living = n
        self.cum_infections = 0
        self.cum_deaths = 0
        self.last_active_variants: tuple = (0,)
        self.events = [] if log_events else None
        for agent in range(p.n_initial_infected):
            self._infect(agent, 0)
        active = self.active_variants()
        if active.size:
            self.last_active_variants = tuple(int(x) for x in active)

    # -- derived views ------------------------------------------------

    @property
    def infected_index(self) -> np.ndarray:
        """Ids of agents with an active infection, ascending."""
        return np.where(self.variant_of >= 0)[0]

    @property
    def n_infected(self) -> int:
        return int(self.active_count[: self.registry.n_variants].sum())

    @property
    def cum_mutations(self) -> int:
        return self.registry.n_mutations

    @property
    def cum_drifts(self) -> int:
        return self.registry.n_drifts

    def active_variants(self) -> np.ndarray:
        """Variant ids with at least one active infection, ascending."""
        counts = self.active_count[: self.registry.n_variants]
        return np.where(counts > 0)[0]

    def agent(self, agent_id: int) -> Agent:
        if not 0 <= agent_id < self.params.n_agents:
            raise KeyError(f"unknown agent id {agent_id}")
        infection = None
        if self.variant_of[agent_id] >= 0:
            flag = self.symptomatic[agent_id]
            infection = Infection(
                variant=int(self.variant_of[agent_id]),
                counter=int(self.counter[agent_id]),
                course=CourseThresholds(
                    latent_end=int(self.latent_end[agent_id]),
                    symptom_day=int(self.symptom_day[agent_id]),
                    end_day=int(self.end_day[agent_id]),
                ),
                symptomatic=None if flag == _UNDETERMINED else bool(flag),
                isolated=bool(self.isolated[agent_id]),
            )
        row = self.immune[agent_id, : self.registry.n_clusters]
        return Agent(
            id=agent_id,
            alive=bool(self.alive[agent_id]),
            infection=infection,
            immune_clusters=frozenset(int(c) for c in np.where(row)[0]),
        )

    # -- capacity management -------------------------------------------

    def _ensure_cluster_columns(self):
        need = self.registry.n_clusters
        if need <= self.immune.shape[1]:
            return
        grown = np.zeros((self.params.n_agents, 2 * self.immune.shape[1]), dtype=bool)
        grown[:, : self.immune.shape[1]] = self.immune
        self.immune = grown

    def _ensure_variant_slots(self):
        need = self.registry.n_variants
        if need <= self.active_count.size:
            return
        grown = np.zeros(2 * self.active_count.size, dtype=np.int64)
        grown[: self.active_count.size] = self.active_count
        self.active_count = grown

    def _log(self, event: str, agent: int, variant: int, cluster: int):
        if self.events is not None:
            self.events.append((self.step_index, event, agent, variant, cluster))

    # -- infection -----------------------------------------------------

    def _infect(self, agent: int, variant: int):
        props = VariantProps.from_array(self.registry.props_matrix[variant])
        course = draw_course(props, self.params.course_sd_frac, self.rng)
        self.variant_of[agent] = variant
        self.counter[agent] = 0
        self.latent_end[agent] = course.latent_end
        self.symptom_day[agent] = course.symptom_day
        self.end_day[agent] = course.end_day
        self.symptomatic[agent] = _UNDETERMINED
        self.isolated[agent] = False
        self.ever_infected[agent] = True
        self.active_count[variant] += 1
        self.cum_infections += 1
        self._log("infection", agent, variant, int(self.registry.variant_cluster[variant]))

    def try_infect(self, source_variant: int, target: int):
        """Infect ``target`` from a carrier of ``source_variant``.

        With probability ``mutation_prob`` the transmitted virus is a
        fresh mutant child of the source variant; a fraction
        ``drift_prob`` of mutations also opens a new antigenic cluster.
        On drift, every agent immune to the parent cluster independently
        gains immunity to the new cluster with probability
        ``cross_immunity``.
        """
        assert self.alive[target] and self.variant_of[target] < 0
        p = self.params
        variant = source_variant
        new_cluster = -1
        if self.rng.bernoulli(p.mutation_prob):
            drift = self.rng.bernoulli(p.drift_prob)
            rec = spawn_variant(
                self.registry,
                source_variant,
                drift,
                self.step_index,
                p.mutation_mean,
                p.mutation_sd,
                self.rng,
            )
            self._ensure_variant_slots()
            variant = rec.id
            self._log("mutation", target, variant, rec.cluster)
            if drift:
                self._ensure_cluster_columns()
                new_cluster = rec.cluster
                self._log("drift", target, variant, rec.cluster)
        self._infect(target, variant)
        if new_cluster >= 0:
            parent_cluster = self.registry.cluster_parent(new_cluster)
            holders = np.where(self.immune[:, parent_cluster])[0]
            if holders.size:
                rolls = self.rng.uniform(size=holders.size)
                self.immune[holders[rolls < p.cross_immunity], new_cluster] = True

    # -- phases ----------------------------------------------------------

    def contact_phase(self):
        """Carriers meet random living agents and transmit.

        Carriers are agents whose counter lies in the infectious window
        ``latent_end <= counter < end_day`` and who are not isolated,
        listed once at phase start in ascending id order.  Each samples
        ``daily_contacts`` living agents uniformly with replacement,
        excluding itself; a contact is infected when it has no active
        infection, is not immune to the carrier's cluster, and a
        transmission roll beats ``infectiousness * (1 - distancing)``.
        An agent infected earlier in the phase blocks later attempts.
        """
        infected = self.variant_of >= 0
        window = (self.latent_end <= self.counter) & (self.counter < self.end_day)
        carriers = np.where(infected & window & ~self.isolated)[0]
        if carriers.size == 0 or self.n_living <= 1:
            return
        living = np.where(self.alive)[0]
        eta = self.params.daily_contacts
        positions = np.searchsorted(living, carriers)
        idx = self.rng.integers(0, living.size - 1, size=(carriers.size, eta))
        idx += idx >= positions[:, None]
        targets = living[idx]
        rolls = self.rng.uniform(size=(carriers.size, eta))
        source = self.variant_of[carriers]
        infectiousness = np.minimum(self.registry.props_matrix[source, 0], 1.0)
        transmit = infectiousness * (1.0 - self.params.social_distancing)
        clusters = self.registry.variant_cluster[source]
        open_target = self.variant_of[targets] < 0
        susceptible = ~self.immune[targets, clusters[:, None]]
        hits = open_target & susceptible & (rolls < transmit[:, None])
        for row, col in zip(*np.nonzero(hits)):
            target = int(targets[row, col])
            if self.variant_of[target] >= 0:
                continue
            self.try_infect(int(source[row]), target)

    def progression_phase(self):
        """Advance every active infection by one day and fire due events.

        Counters increment first.  Courses at or past their symptom day
        (when it precedes the end day) draw the symptomatic flag once;
        symptomatic agents are isolated under the isolation policy.
        Courses at or past their end day resolve: death with probability
        ``fatality``, cut by ``1 - cross_protection`` for agents holding
        any immunity, otherwise recovery with immunity propagation.
        """
        infected = np.where(self.variant_of >= 0)[0]
        if infected.size == 0:
            return
        self.counter[infected] += 1
        count = self.counter[infected]
        symptoms_due = infected[
            (self.symptomatic[infected] == _UNDETERMINED)
            & (count >= self.symptom_day[infected])
            & (self.symptom_day[infected] < self.end_day[infected])
        ]
        if symptoms_due.size:
            chance = np.minimum(
                self.registry.props_matrix[self.variant_of[symptoms_due], 4], 1.0
            )
            flags = self.rng.uniform(size=symptoms_due.size) < chance
            self.symptomatic[symptoms_due] = flags.astype(np.int8)
            if self.params.isolate_symptomatic:
                self.isolated[symptoms_due[flags]] = True
        ending = infected[self.counter[infected] >= self.end_day[infected]]
        if ending.size == 0:
            return
        fatality = np.minimum(self.registry.props_matrix[self.variant_of[ending], 5], 1.0)
        protected = self.immune[ending, : self.registry.n_clusters].any(axis=1)
        fatality = np.where(protected, fatality * (1.0 - self.params.cross_protection), fatality)
        dies = self.rng.uniform(size=ending.size) < fatality
        for agent, died in zip(ending, dies):
            agent = int(agent)
            variant = int(self.variant_of[agent])
            self.active_count[variant] -= 1
            self.variant_of[agent] = _NO_INFECTION
            self.isolated[agent] = False
            if died:
                self.alive[agent] = False
                self.n_living -= 1
                self.cum_deaths += 1
                self._log("death", agent, variant, int(self.registry.variant_cluster[variant]))
            else:
                cluster = int(self.registry.variant_cluster[variant])
                self.grant_immunity(agent, cluster)
                self._log("recovery", agent, variant, cluster)

    def grant_immunity(self, agent: int, cluster: int):
        """Add ``cluster`` to the agent's immune set and propagate.

        Breadth-first over the antigenic tree: each neighbor (parent
        first, then children) of a newly acquired cluster that is not
        yet in the set is gained with independent probability
        ``cross_immunity``; a failed draw prunes that branch.
        """
        psi = self.params.cross_immunity
        self.immune[agent, cluster] = True
        queue = deque([cluster])
        while queue:
            current = queue.popleft()
            for neighbor in self.registry.cluster_neighbors(current):
                if self.immune[agent, neighbor]:
                    continue
                if self.rng.bernoulli(psi):
                    self.immune[agent, neighbor] = True
                    queue.append(neighbor)

    # -- driver ----------------------------------------------------------

    def step(self):
        """Run one day: contacts, then progression, then bookkeeping."""
        self.step_index += 1
        self.contact_phase()
        self.progression_phase()
        active = self.active_variants()
        if active.size:
            self.last_active_variants = tuple(int(x) for x in active)

    def state_bytes(self) -> bytes:
        """Canonical byte serialization of the full mutable state."""
        reg = self.registry
        n_cl = reg.n_clusters
        head = np.array(
            [self.step_index, self.n_living, self.cum_infections, self.cum_deaths],
            dtype=np.int64,
        )
        parts = [
            head.tobytes(),
            self.alive.tobytes(),
            self.variant_of.tobytes(),
            self.counter.tobytes(),
            self.latent_end.tobytes(),
            self.symptom_day.tobytes(),
            self.end_day.tobytes(),
            self.symptomatic.tobytes(),
            self.isolated.tobytes(),
            self.ever_infected.tobytes(),
            np.ascontiguousarray(self.immune[:, :n_cl]).tobytes(),
            reg.props_matrix.tobytes(),
            reg.variant_cluster.tobytes(),
            reg.variant_depth.tobytes(),
            np.array(sorted(self.last_active_variants), dtype=np.int64).tobytes(),
            # root encodes as -1: None is not castable to int64
            np.array(
                [p if (p := reg.cluster_parent(c)) is not None else -1 for c in range(n_cl)],
                dtype=np.int64,
            ).tobytes(),
        ]
        return b"".join(parts)


def init_world(p: SimParams, log_events: bool = False) -> World:
    """Build the initial population with wild-type seed infections.

    Agents ``0 .. n_initial_infected-1`` start infected (counter 0,
    individually drawn courses); everyone is alive with empty immunity.
    """
    return World(p, log_events=log_events)


def run(w: World, callback=None) -> World:
    """Advance ``w`` to its parameter horizon, calling back after each step."""
    while w.step_index < w.params.horizon:
        w.step()
        if callback is not None:
            callback(w)
    return w
