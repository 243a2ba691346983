"""
Merging

Borůvka-style clean-up of the splitter output:

- node_merging folds every finalized set with at most s1 vertices into the
  set across its cheapest boundary edge;
- component_merging links every Reeb component with at most s2 nodes to
  the rest of the net through an extra edge.

Sets (or components) that have no boundary edge at all are flagged as
unmergeable and skipped; unmergeable components are dropped from the net.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.cluster.hierarchy import DisjointSet

from reebnet.graph import Graph, VertexSet, connected_components
from reebnet.lens import MergeDistance
from reebnet.reeb import ReebNet
from reebnet.splitter import FinalSets
from utils.helpers import parallel_map
from utils.logger import get_logger
from utils.exceptions import InvalidParameterError

logger = get_logger(__name__)


@dataclass(frozen=True)
class MergeDecision:
    """One merge: source set/component id -> target id across edge (u, v)"""

    source: int
    target: int
    u: int
    v: int
    distance: float
    round: int

    def to_dict(self):
        return {
            "source": self.source,
            "target": self.target,
            "edge": [self.u, self.v],
            "distance": self.distance,
            "round": self.round,
        }


@dataclass
class MergeTrace:
    """Merge decisions grouped by round; ids are local to their round"""

    rounds: List[List[MergeDecision]] = field(default_factory=list)
    flagged: List[int] = field(default_factory=list)

    @property
    def num_rounds(self) -> int:
        return len(self.rounds)

    @property
    def decisions(self) -> List[MergeDecision]:
        return [d for r in self.rounds for d in r]

    def to_dict(self):
        return {
            "rounds": [[d.to_dict() for d in r] for r in self.rounds],
            "flagged": list(self.flagged),
        }


def boundary_edges(g: Graph, members: VertexSet) -> Tuple[np.ndarray, np.ndarray]:
    """All g-edges (u, v) with u in members and v outside"""
    starts = g.indptr[members]
    counts = g.indptr[members + 1] - starts
    if counts.sum() == 0:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty
    u = np.repeat(members, counts)
    offsets = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
    v = g.indices[np.repeat(starts, counts) + offsets]
    outside = ~np.isin(v, members, assume_unique=False)
    return u[outside], v[outside]


def cheapest_edge(g: Graph, members: VertexSet, dist: MergeDistance) -> Optional[Tuple[int, int, float]]:
    """
    Minimum-distance boundary edge of members

    Ties go to the smaller u, then the smaller v. None if there is no
    boundary edge.
    """
    u, v = boundary_edges(g, members)
    if u.size == 0:
        return None
    d = np.asarray(dist(u, v), dtype=np.float64)
    best = np.lexsort((v, u, d))[0]
    return int(u[best]), int(v[best]), float(d[best])


def smallest_owner(sets: List[VertexSet], n: int) -> np.ndarray:
    """
    Per vertex, the index of the smallest set containing it

    Ties go to the smaller set index; -1 for vertices in no set.
    """
    owner = np.full(n, -1, dtype=np.int64)
    if not sets:
        return owner
    sizes = np.array([s.size for s in sets], dtype=np.int64)
    ids = np.repeat(np.arange(len(sets), dtype=np.int64), sizes)
    verts = np.concatenate(sets)
    order = np.lexsort((ids, sizes[ids], verts))
    verts, ids = verts[order], ids[order]
    first = np.ones(verts.size, dtype=bool)
    first[1:] = verts[1:] != verts[:-1]
    owner[verts[first]] = ids[first]
    return owner


def node_merging(
    f_sets: FinalSets,
    g: Graph,
    s1: int,
    dist: MergeDistance,
    workers: int = 1
) -> Tuple[FinalSets, MergeTrace]:
    """
    Merge finalized sets with at most s1 vertices into their neighbors

    Each round every small set picks its cheapest boundary edge (u, v); the
    target is the smallest set containing v. The chosen (source, target)
    pairs form a graph H over set ids and each connected component of H is
    unioned into one set, placed at its smallest id. Rounds repeat until no
    small mergeable set remains. A component of H may chain many small sets
    into one set much larger than s1.

    Args:
        f_sets: Splitter output
        g: Graph
        s1: Size threshold
        dist: Merge distance over vertex pairs
        workers: Threads for the per-set edge search

    Returns:
        Tuple of (merged FinalSets with unmergeable set ids, MergeTrace)
    """
    if s1 < 1:
        raise InvalidParameterError("min_node (s1) must be at least 1", {"s1": s1})

    sets = list(f_sets.sets)
    paths = list(f_sets.paths)
    generations = list(f_sets.generations)
    forced = set(f_sets.forced)
    flagged = set(f_sets.unmergeable)
    trace = MergeTrace()

    while True:
        small = [i for i, s in enumerate(sets) if s.size <= s1 and i not in flagged]
        if not small:
            break

        choices = parallel_map(lambda i: cheapest_edge(g, sets[i], dist), small, workers)
        owner = smallest_owner(sets, g.n)
        round_no = trace.num_rounds

        decisions = []
        for i, choice in zip(small, choices):
            if choice is None:
                flagged.add(i)
                logger.warning(
                    "Finalized set has no boundary edges, marking unmergeable",
                    extra={"set": i, "size": int(sets[i].size)}
                )
                continue
            u, v, d = choice
            decisions.append(MergeDecision(source=i, target=int(owner[v]), u=u, v=v, distance=d, round=round_no))

        if not decisions:
            break
        trace.rounds.append(decisions)

        h = Graph.from_pairs(
            len(sets),
            np.array([d.source for d in decisions]),
            np.array([d.target for d in decisions]),
        )
        labeling = connected_components(h)
        groups = labeling.groups()

        # groups are ordered by smallest id, so survivors keep relative order
        sets = [np.unique(np.concatenate([sets[i] for i in grp])) if grp.size > 1 else sets[grp[0]] for grp in groups]
        paths = [paths[grp[0]] for grp in groups]
        generations = [generations[grp[0]] for grp in groups]
        new_id = labeling.label
        forced = {int(new_id[i]) for i in forced if groups[new_id[i]].size == 1}
        flagged = {int(new_id[i]) for i in flagged if groups[new_id[i]].size == 1}

        logger.debug(
            "Node merging round finished",
            extra={"round": round_no, "merges": len(decisions), "sets": len(sets)}
        )

    result = FinalSets(
        sets=sets,
        paths=paths,
        generations=generations,
        n=f_sets.n,
        num_generations=f_sets.num_generations,
        forced=sorted(forced),
        unmergeable=sorted(flagged),
    )
    trace.flagged = list(result.unmergeable)

    logger.info(
        "Node merging finished",
        extra={
            "rounds": trace.num_rounds,
            "merges": len(trace.decisions),
            "sets": len(result),
            "unmergeable": len(result.unmergeable),
        }
    )
    return result, trace


def component_merging(
    f_sets: FinalSets,
    g: Graph,
    reeb: ReebNet,
    s2: int,
    dist: MergeDistance,
    workers: int = 1
) -> Tuple[ReebNet, np.ndarray, MergeTrace]:
    """
    Connect Reeb components with at most s2 nodes through extra edges

    Each round every small component picks the cheapest g-edge (u, v)
    leaving the union of its members. The extra Reeb edge joins the
    smallest-id node of the component holding u to the smallest node
    holding v. Choices are applied in component order and a choice whose
    endpoints were already joined earlier in the round is skipped.
    Components with no leaving edge are flagged; after the last round they
    are removed, their vertices recorded as excluded, and surviving nodes
    renumbered in their original order.

    Returns:
        Tuple of (final ReebNet, extra edge array, MergeTrace)
    """
    if s2 < 1:
        raise InvalidParameterError("min_component (s2) must be at least 1", {"s2": s2})

    nodes = reeb.nodes
    owner = smallest_owner(nodes, g.n)
    extra_edges: List[Tuple[int, int]] = []
    bridges: List[Tuple[int, int]] = []
    flagged_members: List[VertexSet] = []
    trace = MergeTrace()

    while True:
        current = ReebNet(
            nodes=nodes,
            overlap_edges=reeb.overlap_edges,
            extra_edges=extra_edges,
            extra_bridges=bridges,
            n=reeb.n,
        )
        labeling = current.components()
        groups = labeling.groups()
        flagged_keys = {m.tobytes() for m in flagged_members}

        small = []
        for c, grp in enumerate(groups):
            if grp.size > s2:
                continue
            union = np.unique(np.concatenate([nodes[i] for i in grp]))
            if union.tobytes() not in flagged_keys:
                small.append((c, grp, union))
        if not small:
            break

        choices = parallel_map(lambda item: cheapest_edge(g, item[2], dist), small, workers)
        round_no = trace.num_rounds
        joined = DisjointSet(range(labeling.count))
        decisions = []

        for (c, grp, union), choice in zip(small, choices):
            if choice is None:
                flagged_members.append(union)
                trace.flagged.append(int(c))
                logger.warning(
                    "Reeb component has no leaving edges, marking unmergeable",
                    extra={"component": int(c), "nodes": int(grp.size), "vertices": int(union.size)}
                )
                continue
            u, v, d = choice
            source = int(next(i for i in grp if np.isin(u, nodes[i])))
            target = int(owner[v])
            if joined.connected(c, int(labeling.label[target])):
                continue
            joined.merge(c, int(labeling.label[target]))
            extra_edges.append((min(source, target), max(source, target)))
            bridges.append((u, v) if source < target else (v, u))
            decisions.append(MergeDecision(source=source, target=target, u=u, v=v, distance=d, round=round_no))

        if not decisions:
            break
        trace.rounds.append(decisions)
        logger.debug(
            "Component merging round finished",
            extra={"round": round_no, "extra_edges": len(decisions), "components": labeling.count}
        )

    excluded = np.unique(np.concatenate(flagged_members)) if flagged_members else np.zeros(0, dtype=np.int64)
    final = _drop_nodes(reeb, nodes, extra_edges, bridges, excluded)

    logger.info(
        "Component merging finished",
        extra={
            "rounds": trace.num_rounds,
            "extra_edges": int(final.extra_edges.shape[0]),
            "excluded_components": len(flagged_members),
            "excluded_vertices": int(final.excluded.size),
            "nodes": final.num_nodes,
        }
    )
    return final, final.extra_edges, trace


def _drop_nodes(
    reeb: ReebNet,
    nodes: List[VertexSet],
    extra_edges: List[Tuple[int, int]],
    bridges: List[Tuple[int, int]],
    excluded: VertexSet
) -> ReebNet:
    """Remove nodes lying in excluded vertices and renumber the rest"""
    keep = np.array([not np.isin(s, excluded).any() for s in nodes], dtype=bool)
    new_id = np.full(len(nodes), -1, dtype=np.int64)
    new_id[keep] = np.arange(int(keep.sum()))

    def surviving(pairs: np.ndarray) -> np.ndarray:
        if pairs.shape[0] == 0:
            return np.zeros(0, dtype=bool)
        return keep[pairs[:, 0]] & keep[pairs[:, 1]]

    extra = np.asarray(extra_edges, dtype=np.int64).reshape(-1, 2)
    bridge_arr = np.asarray(bridges, dtype=np.int64).reshape(-1, 2)
    order = np.lexsort((extra[:, 1], extra[:, 0])) if extra.shape[0] else np.zeros(0, dtype=np.int64)
    extra, bridge_arr = extra[order], bridge_arr[order]
    kept_extra = surviving(extra)

    return ReebNet(
        nodes=[s for s, k in zip(nodes, keep) if k],
        overlap_edges=new_id[reeb.overlap_edges[surviving(reeb.overlap_edges)]],
        extra_edges=new_id[extra[kept_extra]],
        extra_bridges=bridge_arr[kept_extra],
        excluded=excluded,
        n=reeb.n,
        paths=[p for p, k in zip(reeb.paths, keep) if k],
    )
