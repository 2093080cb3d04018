"""Variant and antigenic-cluster registries plus the mutation kernel.

A variant is a vector of six disease properties and a position in the
phylogenetic tree; each variant also belongs to an antigenic cluster.
Mutations scale every property by an independent multiplicative Gaussian
shock floored at -0.99, so properties stay strictly positive.  A fraction
of mutations carries an antigenic drift, which opens a new cluster as a
child of the parent variant's cluster.

Properties are stored raw (they may exceed 1 after upward mutations); any
property used as a probability is clamped to 1 at its point of use.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import SimParams
from .rng import RngStream

# Column layout of the property vector; fixed order used everywhere.
PROP_NAMES = (
    "infectiousness",
    "latent_end",
    "incubation_end",
    "duration",
    "symptomatic_chance",
    "fatality",
)
N_PROPS = len(PROP_NAMES)

# Multiplicative shocks are floored here so properties never reach zero.
SHOCK_FLOOR = -0.99


@dataclass(frozen=True)
class VariantProps:
    """The six evolving disease properties of one variant (raw values)."""

    infectiousness: float
    latent_end: float
    incubation_end: float
    duration: float
    symptomatic_chance: float
    fatality: float

    def as_array(self) -> np.ndarray:
        return np.array(
            [
                self.infectiousness,
                self.latent_end,
                self.incubation_end,
                self.duration,
                self.symptomatic_chance,
                self.fatality,
            ],
            dtype=np.float64,
        )

    @staticmethod
    def from_array(vec) -> "VariantProps":
        return VariantProps(*(float(x) for x in vec))


def wild_type_props(p: SimParams) -> VariantProps:
    """Wild-type property vector from the run parameters."""
    return VariantProps(
        infectiousness=p.infectiousness0,
        latent_end=p.latent_end0,
        incubation_end=p.incubation_end0,
        duration=p.duration0,
        symptomatic_chance=p.symptomatic_chance0,
        fatality=p.fatality0,
    )


@dataclass(frozen=True)
class VariantRecord:
    """One node of the phylogenetic tree."""

    id: int
    parent: int | None
    cluster: int
    props: VariantProps
    depth: int
    born_step: int


@dataclass(frozen=True)
class ClusterRecord:
    """One node of the antigenic-cluster tree."""

    id: int
    parent: int | None
    depth: int
    children: tuple


def mutate_props(
    parent: VariantProps, theta: float, sigma_i: float, rng: RngStream
) -> VariantProps:
    """Apply one multiplicative mutation to every property.

    Each property k becomes ``parent_k * (1 + omega_k)`` with omega_k an
    independent Gaussian(theta, sigma_i) draw floored at -0.99.
    """
    omega = np.maximum(rng.normal(theta, sigma_i, size=N_PROPS), SHOCK_FLOOR)
    return VariantProps.from_array(parent.as_array() * (1.0 + omega))


class Registry:
    """Append-only registries of variants and antigenic clusters.

    Variant and cluster identifiers are dense integers in creation order;
    id 0 is the wild type / root cluster.  Property vectors live in a
    growable float matrix so the simulation hot path can index them in bulk.
    """

    def __init__(self, wild_props: VariantProps):
        cap = 64
        self._props = np.zeros((cap, N_PROPS), dtype=np.float64)
        self._parent = np.full(cap, -1, dtype=np.int64)
        self._cluster = np.zeros(cap, dtype=np.int64)
        self._depth = np.zeros(cap, dtype=np.int64)
        self._born = np.zeros(cap, dtype=np.int64)
        self.n_variants = 0

        self._cl_parent = [None]
        self._cl_depth = [0]
        self._cl_children: list[list[int]] = [[]]
        self.n_clusters = 1

        self._append_variant(wild_props.as_array(), parent=-1, cluster=0, depth=0, step=0)

    # -- variants ---------------------------------------------------------

    def _append_variant(self, vec, parent, cluster, depth, step) -> int:
        if self.n_variants == self._props.shape[0]:
            grow = self.n_variants * 2
            for name in ("_props", "_parent", "_cluster", "_depth", "_born"):
                old = getattr(self, name)
                shape = (grow,) + old.shape[1:]
                new = np.zeros(shape, dtype=old.dtype)
                new[: self.n_variants] = old
                setattr(self, name, new)
        vid = self.n_variants
        self._props[vid] = vec
        self._parent[vid] = parent
        self._cluster[vid] = cluster
        self._depth[vid] = depth
        self._born[vid] = step
        self.n_variants += 1
        return vid

    def variant(self, vid: int) -> VariantRecord:
        if not 0 <= vid < self.n_variants:
            raise KeyError(f"unknown variant id {vid}")
        parent = int(self._parent[vid])
        return VariantRecord(
            id=vid,
            parent=None if parent < 0 else parent,
            cluster=int(self._cluster[vid]),
            props=VariantProps.from_array(self._props[vid]),
            depth=int(self._depth[vid]),
            born_step=int(self._born[vid]),
        )

    @property
    def props_matrix(self) -> np.ndarray:
        """View of all property vectors, shape (n_variants, 6)."""
        return self._props[: self.n_variants]

    @property
    def variant_cluster(self) -> np.ndarray:
        return self._cluster[: self.n_variants]

    @property
    def variant_depth(self) -> np.ndarray:
        return self._depth[: self.n_variants]

    # -- clusters ---------------------------------------------------------

    def add_cluster(self, parent: int) -> int:
        cid = self.n_clusters
        self._cl_parent.append(parent)
        self._cl_depth.append(self._cl_depth[parent] + 1)
        self._cl_children.append([])
        self._cl_children[parent].append(cid)
        self.n_clusters += 1
        return cid

    def cluster(self, cid: int) -> ClusterRecord:
        if not 0 <= cid < self.n_clusters:
            raise KeyError(f"unknown cluster id {cid}")
        return ClusterRecord(
            id=cid,
            parent=self._cl_parent[cid],
            depth=self._cl_depth[cid],
            children=tuple(self._cl_children[cid]),
        )

    def cluster_parent(self, cid: int) -> int | None:
        return self._cl_parent[cid]

    def cluster_depth(self, cid: int) -> int:
        return self._cl_depth[cid]

    def cluster_children(self, cid: int) -> list:
        return self._cl_children[cid]

    def cluster_neighbors(self, cid: int):
        """Tree neighbors of a cluster: parent first, then children in order."""
        parent = self._cl_parent[cid]
        if parent is not None:
            yield parent
        yield from self._cl_children[cid]

    def max_cluster_depth(self) -> int:
        """Deepest antigenic cluster ever created (never decreases)."""
        return max(self._cl_depth)

    @property
    def n_mutations(self) -> int:
        return self.n_variants - 1

    @property
    def n_drifts(self) -> int:
        return self.n_clusters - 1


def spawn_variant(
    registry: Registry,
    parent_id: int,
    drift: bool,
    step: int,
    theta: float,
    sigma_i: float,
    rng: RngStream,
) -> VariantRecord:
    """Create one mutated child of ``parent_id``, optionally with a drift.

    The child's cluster is the parent's unless ``drift``, in which case a
    fresh cluster is opened as a child of the parent's cluster.
    """
    parent_props = VariantProps.from_array(registry._props[parent_id])
    vec = mutate_props(parent_props, theta, sigma_i, rng).as_array()
    parent_cluster = int(registry._cluster[parent_id])
    cluster = registry.add_cluster(parent_cluster) if drift else parent_cluster
    vid = registry._append_variant(
        vec,
        parent=parent_id,
        cluster=cluster,
        depth=int(registry._depth[parent_id]) + 1,
        step=step,
    )
    return registry.variant(vid)
