import time
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Union
import numpy as np
from ..config import logger
from ..models import (
    ClusterDirective,
    ClusterSet,
    LabelDirective,
    MergeDirective,
    MoveDirective,
    PhraseVector,
    SkillCluster,
    SplitDirective,
)
from .corpus import parse_cell, read_table
from .errors import ClusterEditError, ClusteringError

# Linkages closer than this count as tied; ties go to the smallest (cluster_id, cluster_id).
TIE_TOLERANCE = 1e-12

##############################################################################################
###                                  Average-linkage Clustering                            ###
##############################################################################################

def cosine_distances(matrix: np.ndarray) -> np.ndarray:
    """Pairwise 1 - cos(u, v). Rows with zero norm sit at distance 1 from everything."""
    matrix = np.asarray(matrix, dtype=np.float64)
    norms = np.linalg.norm(matrix, axis=1)
    zero = norms == 0
    unit = np.divide(matrix, norms[:, None], out=np.zeros_like(matrix), where=~zero[:, None])
    distances = np.clip(1.0 - unit @ unit.T, 0.0, 2.0)
    distances[zero, :] = 1.0
    distances[:, zero] = 1.0
    np.fill_diagonal(distances, 0.0)
    return distances


def _medoid(members: Sequence[int], distances: np.ndarray, phrases: Sequence[str]) -> str:
    if len(members) == 1:
        return phrases[members[0]]
    block = distances[np.ix_(members, members)]
    mean_distance = block.sum(axis=1) / (len(members) - 1)
    best = min(range(len(members)), key=lambda k: (round(mean_distance[k], 12), len(phrases[members[k]]), phrases[members[k]]))
    return phrases[members[best]]


def agglomerate(vectors: Sequence[PhraseVector], target_clusters: int) -> ClusterSet:
    """Average-linkage agglomerative clustering under cosine distance.

    Starts from singletons and merges the closest pair until `target_clusters`
    remain. A merged cluster keeps the smaller of the two ids, and ties pick the
    pair with the smallest (id, id), so the result is deterministic. Final cluster
    ids are renumbered 0..k-1 by their first member's input position.

    Raises:
        ClusteringError when target_clusters is not in [1, len(vectors)]
    """
    n = len(vectors)
    if target_clusters < 1 or target_clusters > n:
        raise ClusteringError(f"Cannot form {target_clusters} clusters from {n} vectors")
    started = time.time()
    phrases = [vector.phrase for vector in vectors]
    distances = cosine_distances(np.vstack([vector.vector for vector in vectors])) if n else np.zeros((0, 0))

    # sums[i, j] = total pairwise distance between clusters i and j
    sums = distances.copy()
    sizes = np.ones(n)
    active = np.ones(n, dtype=bool)
    members: Dict[int, List[int]] = {i: [i] for i in range(n)}
    heights = []
    for _ in range(n - target_clusters):
        with np.errstate(divide="ignore", invalid="ignore"):
            linkage = sums / np.outer(sizes, sizes)
        linkage[~active, :] = np.inf
        linkage[:, ~active] = np.inf
        linkage[np.tril_indices(n)] = np.inf
        best = linkage.min()
        candidates = np.argwhere(linkage <= best + TIE_TOLERANCE)
        i, j = (int(v) for v in min(map(tuple, candidates)))
        heights.append(float(linkage[i, j]))
        sums[i, :] += sums[j, :]
        sums[:, i] += sums[:, j]
        sizes[i] += sizes[j]
        active[j] = False
        members[i] = sorted(members[i] + members.pop(j))

    clusters = []
    for cluster_id, keep in enumerate(sorted(members)):
        indices = members[keep]
        clusters.append(SkillCluster(
            cluster_id=cluster_id,
            members=tuple(phrases[k] for k in indices),
            label=_medoid(indices, distances, phrases),
        ))
    logger.info(f"Agglomerated {n} phrases into {len(clusters)} clusters in {time.time() - started:.2f}s")
    return ClusterSet(clusters=clusters, linkage_heights=heights)


def build_cluster_set(vectors: Sequence[PhraseVector], uncovered: Iterable[str], target_clusters: int) -> ClusterSet:
    """Cluster the embedded phrases and append phrases without a vector as singletons."""
    if vectors:
        target = min(target_clusters, len(vectors))
        if target < target_clusters:
            logger.warning(f"Only {len(vectors)} phrases have vectors; clustering to {target} instead of {target_clusters}")
        cluster_set = agglomerate(vectors, target)
    else:
        cluster_set = ClusterSet(clusters=[])
    next_id = len(cluster_set.clusters)
    for offset, phrase in enumerate(uncovered):
        cluster_set.clusters.append(SkillCluster(cluster_id=next_id + offset, members=(phrase,), label=phrase))
    return cluster_set

##############################################################################################
###                                      Manual Refinement                                 ###
##############################################################################################

def _parse_id(index: int, text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ClusterEditError(index, f"'{text}' is not a cluster id")


def parse_cluster_edits(text: str) -> List[ClusterDirective]:
    """Parse the cluster edit script.

    Grammar, one directive per line, '#' comments:
        split <id>: <phrase>; <phrase> | <phrase>; ...
        merge <id> <id> [<id> ...]
        move <phrase> -> <id>
        label <id> <name>
    """
    directives: List[ClusterDirective] = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        index = len(directives) + 1
        verb, _, rest = line.partition(" ")
        rest = rest.strip()
        if verb == "split":
            head, colon, body = rest.partition(":")
            if not colon:
                raise ClusterEditError(index, "expected 'split <id>: <phrases> | <phrases>'")
            parts = tuple(
                tuple(phrase.strip() for phrase in part.split(";") if phrase.strip())
                for part in body.split("|")
            )
            directives.append(SplitDirective(cluster_id=_parse_id(index, head.strip()), parts=parts))
        elif verb == "merge":
            directives.append(MergeDirective(cluster_ids=tuple(_parse_id(index, token) for token in rest.split())))
        elif verb == "move":
            phrase, arrow, target = rest.rpartition("->")
            if not arrow or not phrase.strip():
                raise ClusterEditError(index, "expected 'move <phrase> -> <id>'")
            directives.append(MoveDirective(phrase=phrase.strip(), target=_parse_id(index, target.strip())))
        elif verb == "label":
            head, _, name = rest.partition(" ")
            if not name.strip():
                raise ClusterEditError(index, "expected 'label <id> <name>'")
            directives.append(LabelDirective(cluster_id=_parse_id(index, head), name=name.strip()))
        else:
            raise ClusterEditError(index, f"unknown directive '{verb}'")
    return directives


def _check_partition(index: int, clusters: Dict[int, List[str]], universe: List[str]) -> None:
    flat = [phrase for members in clusters.values() for phrase in members]
    if any(not members for members in clusters.values()):
        raise ClusterEditError(index, "left an empty cluster")
    if len(flat) != len(set(flat)) or sorted(flat) != universe:
        raise ClusterEditError(index, "clusters no longer partition the phrase set")


def apply_cluster_edits(cluster_set: ClusterSet, script: Union[str, Sequence[ClusterDirective]]) -> ClusterSet:
    """Replay split/merge/move/label directives in order.

    The partition property is checked after every directive. Split parts after the
    first get fresh ids; a merge keeps the smallest id.

    Raises:
        ClusterEditError naming the directive index on dangling references or a
        broken partition
    """
    directives = parse_cluster_edits(script) if isinstance(script, str) else list(script)
    clusters: Dict[int, List[str]] = {cluster.cluster_id: list(cluster.members) for cluster in cluster_set.clusters}
    labels: Dict[int, str] = {cluster.cluster_id: cluster.label for cluster in cluster_set.clusters}
    universe = sorted(phrase for members in clusters.values() for phrase in members)
    before = len(clusters)

    def require(index: int, cluster_id: int) -> None:
        if cluster_id not in clusters:
            raise ClusterEditError(index, f"cluster {cluster_id} does not exist")

    for index, directive in enumerate(directives, start=1):
        if isinstance(directive, SplitDirective):
            require(index, directive.cluster_id)
            parts = [list(part) for part in directive.parts]
            if len(parts) < 2 or any(not part for part in parts):
                raise ClusterEditError(index, "a split needs at least two non-empty parts")
            listed = [phrase for part in parts for phrase in part]
            if sorted(listed) != sorted(clusters[directive.cluster_id]):
                raise ClusterEditError(index, f"split parts do not cover cluster {directive.cluster_id} exactly")
            old_label = labels[directive.cluster_id]
            clusters[directive.cluster_id] = parts[0]
            if old_label not in parts[0]:
                labels[directive.cluster_id] = parts[0][0]
            next_id = max(clusters) + 1
            for part in parts[1:]:
                clusters[next_id] = part
                labels[next_id] = old_label if old_label in part else part[0]
                next_id += 1
        elif isinstance(directive, MergeDirective):
            ids = list(dict.fromkeys(directive.cluster_ids))
            if len(ids) < 2:
                raise ClusterEditError(index, "a merge needs at least two distinct clusters")
            for cluster_id in ids:
                require(index, cluster_id)
            keep = min(ids)
            merged = [phrase for cluster_id in ids for phrase in clusters[cluster_id]]
            for cluster_id in ids:
                if cluster_id != keep:
                    del clusters[cluster_id]
                    del labels[cluster_id]
            clusters[keep] = merged
        elif isinstance(directive, MoveDirective):
            require(index, directive.target)
            source = next((cid for cid, members in clusters.items() if directive.phrase in members), None)
            if source is None:
                raise ClusterEditError(index, f"phrase '{directive.phrase}' is not in any cluster")
            if source != directive.target:
                clusters[source].remove(directive.phrase)
                clusters[directive.target].append(directive.phrase)
                if not clusters[source]:
                    del clusters[source]
                    del labels[source]
                elif labels[source] == directive.phrase:
                    labels[source] = clusters[source][0]
        elif isinstance(directive, LabelDirective):
            require(index, directive.cluster_id)
            labels[directive.cluster_id] = directive.name
        _check_partition(index, clusters, universe)

    edited = ClusterSet(
        clusters=[SkillCluster(cluster_id=cid, members=tuple(clusters[cid]), label=labels[cid]) for cid in sorted(clusters)],
        linkage_heights=list(cluster_set.linkage_heights),
    )
    logger.info(f"Applied {len(directives)} cluster edits: {before} clusters before, {len(edited)} after")
    return edited

##############################################################################################
###                                        Cluster File                                    ###
##############################################################################################

def write_clusters(cluster_set: ClusterSet, path: Union[str, Path], header: Optional[str] = None) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        if header:
            f.write(header)
        f.write("cluster_id\tlabel\tphrase\n")
        for cluster in cluster_set.clusters:
            for phrase in cluster.members:
                f.write(f"{cluster.cluster_id}\t{cluster.label}\t{phrase}\n")


def read_clusters(path: Union[str, Path]) -> ClusterSet:
    frame = read_table(path, ("cluster_id", "label", "phrase"), sep="\t", comment="#")
    members: Dict[int, List[str]] = {}
    labels: Dict[int, str] = {}
    for row_number, row in enumerate(frame.to_dict("records"), start=1):
        cluster_id = parse_cell(path, row_number, "cluster_id", row["cluster_id"], int)
        members.setdefault(cluster_id, []).append(row["phrase"])
        labels.setdefault(cluster_id, row["label"])
    return ClusterSet(clusters=[
        SkillCluster(cluster_id=cid, members=tuple(members[cid]), label=labels[cid]) for cid in sorted(members)
    ])
