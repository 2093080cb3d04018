"""Tree distances and variant-level fitness metrics.

Every function here is read-only over a Registry (or a World snapshot)
and safe for concurrent use.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .variants import Registry, VariantProps

# column indices into Registry.props_matrix
_I, _L, _B, _D, _V, _F = range(6)


def variant_r0(v: VariantProps, eta: int) -> float:
    """Expected secondary infections: contacts x infectiousness x window.

    The infectious window runs from the latent end to the course end;
    infectiousness acts as a probability, so it is clamped at 1 and the
    window is floored at 0.
    """
    return eta * min(v.infectiousness, 1.0) * max(v.duration - v.latent_end, 0.0)


def variant_r0_adapted(v: VariantProps, eta: int) -> float:
    """Reproduction number when symptomatic cases are isolated.

    Symptomatic courses (probability ``v_m``) only transmit until symptom
    onset; asymptomatic ones keep the full window.  Windows are floored
    at 0 and probabilities clamped at 1.  Symptom onset at or past the
    course end removes nothing, so the cutoff is capped at the full
    window; the subtraction form keeps adapted == r0 bitwise in that
    case and when ``v_m`` = 0.
    """
    i = min(v.infectiousness, 1.0)
    sympt = min(v.symptomatic_chance, 1.0)
    full = max(v.duration - v.latent_end, 0.0)
    cut = max(min(v.incubation_end, v.duration) - v.latent_end, 0.0)
    return eta * i * (full - sympt * (full - cut))


def _r0_arrays(props: np.ndarray, eta: int):
    """Vectorized (r0, r0_adapted, ratio) for a (n, 6) property block."""
    i = np.minimum(props[:, _I], 1.0)
    sympt = np.minimum(props[:, _V], 1.0)
    full = np.maximum(props[:, _D] - props[:, _L], 0.0)
    cut = np.maximum(np.minimum(props[:, _B], props[:, _D]) - props[:, _L], 0.0)
    r0 = eta * i * full
    adapted = eta * i * (full - sympt * (full - cut))
    ratio = np.where(r0 > 0.0, adapted / np.where(r0 > 0.0, r0, 1.0), 1.0)
    return r0, adapted, ratio


def phylogenetic_distance(registry: Registry, variant: int) -> int:
    """Mutation count separating a variant from the wild type."""
    return registry.variant(variant).depth


def antigenic_distance(registry: Registry, a: int, b: int) -> int:
    """Path length between two clusters in the antigenic tree.

    Walks the deeper node up to the depth of the shallower, then both up
    in lockstep to the lowest common ancestor.
    """
    da = registry.cluster(a).depth
    db = registry.cluster(b).depth
    dist = 0
    while da > db:
        a = registry.cluster_parent(a)
        da -= 1
        dist += 1
    while db > da:
        b = registry.cluster_parent(b)
        db -= 1
        dist += 1
    while a != b:
        a = registry.cluster_parent(a)
        b = registry.cluster_parent(b)
        dist += 2
    return dist


@dataclass(frozen=True)
class VariantStats:
    """Fitness metrics of a single variant."""

    variant_id: int
    r0: float
    r0_adapted: float
    adapted_ratio: float
    phylo_depth: int
    cluster_depth: int
    props: VariantProps


def variant_stats(registry: Registry, variant: int, eta: int) -> VariantStats:
    rec = registry.variant(variant)
    r0 = variant_r0(rec.props, eta)
    adapted = variant_r0_adapted(rec.props, eta)
    return VariantStats(
        variant_id=rec.id,
        r0=r0,
        r0_adapted=adapted,
        adapted_ratio=adapted / r0 if r0 > 0.0 else 1.0,
        phylo_depth=rec.depth,
        cluster_depth=registry.cluster(rec.cluster).depth,
        props=rec.props,
    )


@dataclass(frozen=True)
class ActiveVariantSummary:
    """Unweighted means over the active (or last surviving) variant set."""

    n_variants: int
    extinct: bool
    mean_r0: float
    mean_adapted_ratio: float
    mean_phylo_depth: float
    max_antigenic_distance: int
    mean_infectiousness: float
    mean_latent_end: float
    mean_incubation_end: float
    mean_duration: float
    mean_symptomatic_chance: float
    mean_fatality: float


def summarize_variants(
    registry: Registry, ids: np.ndarray, eta: int, extinct: bool
) -> ActiveVariantSummary:
    """Means over an explicit variant id set; ids must be non-empty."""
    ids = np.asarray(ids, dtype=np.int64)
    props = registry.props_matrix[ids]
    r0, _, ratio = _r0_arrays(props, eta)
    means = props.mean(axis=0)
    return ActiveVariantSummary(
        n_variants=int(ids.size),
        extinct=extinct,
        mean_r0=float(r0.mean()),
        mean_adapted_ratio=float(ratio.mean()),
        mean_phylo_depth=float(registry.variant_depth[ids].mean()),
        max_antigenic_distance=int(registry.max_cluster_depth()),
        mean_infectiousness=float(means[_I]),
        mean_latent_end=float(means[_L]),
        mean_incubation_end=float(means[_B]),
        mean_duration=float(means[_D]),
        mean_symptomatic_chance=float(means[_V]),
        mean_fatality=float(means[_F]),
    )


def active_variant_stats(w) -> ActiveVariantSummary:
    """Summary over variants with a live infection right now.

    After extinction the snapshot of the last non-empty active set is
    used instead, so the summary always describes the epidemic's final
    surviving strains.
    """
    ids = w.active_variants()
    extinct = ids.size == 0
    if extinct:
        ids = np.asarray(w.last_active_variants, dtype=np.int64)
    return summarize_variants(w.registry, ids, w.params.daily_contacts, extinct)
