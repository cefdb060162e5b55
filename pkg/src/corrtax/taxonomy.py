"""
Minimum spanning trees, the subdominant ultrametric and single-linkage
hierarchies built on a distance matrix.

Two routes lead to the same ultrametric: the largest edge on the tree path
between two assets, and the height of the single-linkage merge that first
joins them. Both are implemented here independently.

Ties are broken by asset name everywhere, so results do not depend on the
column order of the input.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from corrtax.corrnet import DistanceMatrix, canonical_pair
from corrtax.errors import TreeError

__all__ = [
    "Edge",
    "SpanningTree",
    "Merge",
    "Dendrogram",
    "UltrametricMatrix",
    "UnionFind",
    "minimum_spanning_tree",
    "subdominant_ultrametric",
    "single_linkage",
    "cophenetic",
    "is_ultrametric",
    "export_dot",
    "export_newick",
    "parse_newick",
    "tree_to_json",
]


class Edge(NamedTuple):
    i: int
    j: int
    weight: float


@dataclass(frozen=True)
class SpanningTree:
    """
    Spanning tree over ``assets``; edge endpoints index into ``assets`` with ``i < j``.

    Edges are kept sorted by weight, ties by canonical name pair.
    """

    assets: tuple[str, ...]
    edges: tuple[Edge, ...]

    def __post_init__(self):
        n = len(self.assets)
        if len(self.edges) != n - 1:
            raise TreeError(f"a spanning tree over {n} assets needs {n - 1} edges, got {len(self.edges)}")
        uf = UnionFind(n)
        for e in self.edges:
            if not 0 <= e.i < e.j < n:
                raise TreeError(f"edge endpoints must satisfy 0 <= i < j < {n}, got ({e.i}, {e.j})")
            if not uf.union(e.i, e.j):
                raise TreeError(f"edge ({self.assets[e.i]}, {self.assets[e.j]}) closes a cycle")

    @property
    def total_weight(self) -> float:
        return float(sum(e.weight for e in self.edges))

    def edge_set(self) -> frozenset[tuple[str, str]]:
        """Edges as canonical name pairs, weights dropped."""
        return frozenset(canonical_pair(self.assets[e.i], self.assets[e.j]) for e in self.edges)

    def adjacency(self) -> list[list[tuple[int, float]]]:
        adj: list[list[tuple[int, float]]] = [[] for _ in self.assets]
        for e in self.edges:
            adj[e.i].append((e.j, e.weight))
            adj[e.j].append((e.i, e.weight))
        return adj


class Merge(NamedTuple):
    left: int
    right: int
    height: float


@dataclass(frozen=True)
class Dendrogram:
    """
    Agglomerative merge sequence.

    Cluster ids follow the usual linkage convention: leaves are ``0..N-1``
    and the k-th merge creates cluster ``N + k``.
    """

    leaves: tuple[str, ...]
    merges: tuple[Merge, ...]

    def __post_init__(self):
        n = len(self.leaves)
        if len(self.merges) != n - 1:
            raise TreeError(f"a dendrogram over {n} leaves needs {n - 1} merges, got {len(self.merges)}")
        used = set()
        for k, m in enumerate(self.merges):
            for c in (m.left, m.right):
                if not 0 <= c < n + k or c in used:
                    raise TreeError(f"merge {k} refers to unavailable cluster {c}")
                used.add(c)
            if k and m.height < self.merges[k - 1].height:
                raise TreeError("merge heights must be non-decreasing")

    def members(self) -> list[list[int]]:
        """Leaf indices of every cluster id, leaves first."""
        out = [[i] for i in range(len(self.leaves))]
        for m in self.merges:
            out.append(out[m.left] + out[m.right])
        return out


@dataclass(frozen=True, eq=False)
class UltrametricMatrix:
    assets: tuple[str, ...]
    du: np.ndarray

    def __post_init__(self):
        du = np.array(self.du, dtype=float, copy=True)
        du.flags.writeable = False
        object.__setattr__(self, "assets", tuple(self.assets))
        object.__setattr__(self, "du", du)


class UnionFind:
    """Disjoint sets over ``0..n-1`` with path halving and union by size."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, a: int) -> int:
        parent = self.parent
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb] or (self.size[ra] == self.size[rb] and rb < ra):
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True


def _edge_key(weight: float, a: str, b: str) -> tuple[float, str, str]:
    return (weight,) + canonical_pair(a, b)


def minimum_spanning_tree(dist: DistanceMatrix) -> SpanningTree:
    """
    Kruskal's algorithm over the complete graph of ``dist``.

    Candidate edges are sorted by (weight, canonical name pair), which fixes
    the tree when weights tie.
    """
    n = dist.n_assets
    if n < 2:
        raise TreeError(f"need at least 2 assets for a spanning tree, got {n}")
    names = dist.assets
    d = dist.d
    iu, ju = np.triu_indices(n, k=1)
    candidates = sorted(
        (_edge_key(float(d[i, j]), names[i], names[j]), int(i), int(j)) for i, j in zip(iu, ju)
    )
    uf = UnionFind(n)
    edges = []
    for key, i, j in candidates:
        if uf.union(i, j):
            edges.append(Edge(i, j, key[0]))
            if len(edges) == n - 1:
                break
    return SpanningTree(names, tuple(edges))


def subdominant_ultrametric(tree: SpanningTree) -> UltrametricMatrix:
    """Largest edge weight on the tree path between every pair of assets."""
    n = len(tree.assets)
    adj = tree.adjacency()
    du = np.zeros((n, n))
    for src in range(n):
        # DFS from src carrying the running path maximum
        stack = [(src, -1, 0.0)]
        while stack:
            node, parent, top = stack.pop()
            du[src, node] = top
            for nxt, w in adj[node]:
                if nxt != parent:
                    stack.append((nxt, node, max(top, w)))
    return UltrametricMatrix(tree.assets, du)


def single_linkage(dist: DistanceMatrix) -> Dendrogram:
    """
    Agglomerative single-linkage clustering.

    At each step the two clusters at minimum inter-cluster distance merge at
    that distance. Among tied candidates the pair with the smallest labels
    wins, a cluster's label being its lexicographically smallest member. The
    lower-labelled cluster becomes the left child.
    """
    n = dist.n_assets
    if n < 2:
        raise TreeError(f"need at least 2 assets for a dendrogram, got {n}")
    names = dist.assets
    link = np.array(dist.d, dtype=float)
    np.fill_diagonal(link, np.inf)
    active = list(range(n))  # positions into link
    ids = list(range(n))     # cluster id held at each position
    labels = list(names)
    merges = []
    for k in range(n - 1):
        best = None
        for a_pos in range(len(active)):
            for b_pos in range(a_pos + 1, len(active)):
                ra, rb = active[a_pos], active[b_pos]
                key = (link[ra, rb],) + canonical_pair(labels[ra], labels[rb])
                if best is None or key < best[0]:
                    best = (key, ra, rb)
        (height, _, _), ra, rb = best
        if labels[rb] < labels[ra]:
            ra, rb = rb, ra
        merges.append(Merge(ids[ra], ids[rb], float(height)))
        # keep the merged cluster in ra's slot
        merged = np.minimum(link[ra], link[rb])
        link[ra, :] = merged
        link[:, ra] = merged
        link[ra, ra] = np.inf
        ids[ra] = n + k
        labels[ra] = min(labels[ra], labels[rb])
        active.remove(rb)
    return Dendrogram(names, tuple(merges))


def cophenetic(dendro: Dendrogram) -> UltrametricMatrix:
    """Height of the lowest merge joining each pair of leaves."""
    n = len(dendro.leaves)
    members = dendro.members()
    du = np.zeros((n, n))
    for m in dendro.merges:
        left, right = members[m.left], members[m.right]
        du[np.ix_(left, right)] = m.height
        du[np.ix_(right, left)] = m.height
    return UltrametricMatrix(dendro.leaves, du)


def is_ultrametric(du: np.ndarray, tol: float = 0.0) -> bool:
    """Check ``du[i, j] <= max(du[i, k], du[k, j])`` for every triple."""
    du = np.asarray(du, dtype=float)
    # tightest bound on du[i, j] over all intermediate k
    bound = np.min(np.maximum(du[:, :, None], du[None, :, :]), axis=1)
    return bool(np.all(du <= bound + tol))


def _dot_quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(tree: SpanningTree, name: str = "mst") -> str:
    """Graphviz text for the tree: nodes sorted by name, edges in tree order."""
    lines = [f"graph {name} {{"]
    for asset in sorted(tree.assets):
        lines.append(f"  {_dot_quote(asset)};")
    for e in tree.edges:
        a, b = canonical_pair(tree.assets[e.i], tree.assets[e.j])
        lines.append(f'  {_dot_quote(a)} -- {_dot_quote(b)} [label="{e.weight:.4f}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def tree_to_json(tree: SpanningTree) -> str:
    edges = []
    for e in tree.edges:
        a, b = canonical_pair(tree.assets[e.i], tree.assets[e.j])
        edges.append([a, b, e.weight])
    return json.dumps({"assets": list(tree.assets), "edges": edges})


_NEWICK_UNSAFE = re.compile(r"[\s(),:;\[\]']")


def _newick_name(text: str) -> str:
    if _NEWICK_UNSAFE.search(text):
        return "'" + text.replace("'", "''") + "'"
    return text


def _length(value: float) -> str:
    return f"{value:.12g}"


def export_newick(dendro: Dendrogram) -> str:
    """
    Newick text in which every internal node sits at its merge height.

    Branch length is parent height minus child height (leaves at height 0),
    so the root-to-leaf depth is the same for every leaf. Children are
    written in merge order, the lower-labelled cluster first.
    """
    n = len(dendro.leaves)
    heights = [0.0] * n + [m.height for m in dendro.merges]
    children = {n + k: (m.left, m.right) for k, m in enumerate(dendro.merges)}

    def render(node: int, parent_height: float) -> str:
        length = _length(parent_height - heights[node])
        if node < n:
            return f"{_newick_name(dendro.leaves[node])}:{length}"
        left, right = children[node]
        inner = f"({render(left, heights[node])},{render(right, heights[node])})"
        return f"{inner}:{length}"

    root = 2 * n - 2
    left, right = children[root]
    return f"({render(left, heights[root])},{render(right, heights[root])});"


def _tokenize_newick(text: str):
    pos = 0
    while pos < len(text):
        ch = text[pos]
        if ch.isspace():
            pos += 1
        elif ch in "(),:;":
            yield ch
            pos += 1
        elif ch == "'":
            end = pos + 1
            buf = []
            while True:
                if end >= len(text):
                    raise TreeError("unterminated quoted label in Newick text")
                if text[end] == "'":
                    if end + 1 < len(text) and text[end + 1] == "'":
                        buf.append("'")
                        end += 2
                        continue
                    break
                buf.append(text[end])
                end += 1
            yield ("label", "".join(buf))
            pos = end + 1
        else:
            end = pos
            while end < len(text) and text[end] not in "(),:;" and not text[end].isspace():
                end += 1
            yield ("label", text[pos:end])
            pos = end


def parse_newick(text: str) -> UltrametricMatrix:
    """
    Read Newick text and return the leaf-to-leaf ultrametric it encodes.

    The distance between leaves ``i`` and ``j`` is the height of their lowest
    common ancestor, i.e. the branch length from ``i`` up to that ancestor.
    Leaves are returned sorted by name.
    """
    tokens = list(_tokenize_newick(text))
    pos = 0
    # node: (name or None, children, length)
    def parse_node():
        nonlocal pos
        children = []
        name = None
        if tokens[pos] == "(":
            pos += 1
            children.append(parse_node())
            while tokens[pos] == ",":
                pos += 1
                children.append(parse_node())
            if tokens[pos] != ")":
                raise TreeError("malformed Newick text: expected ')'")
            pos += 1
        if pos < len(tokens) and isinstance(tokens[pos], tuple):
            name = tokens[pos][1]
            pos += 1
        length = 0.0
        if pos < len(tokens) and tokens[pos] == ":":
            pos += 1
            length = float(tokens[pos][1])
            pos += 1
        return name, children, length

    try:
        root = parse_node()
        if tokens[pos] != ";":
            raise TreeError("Newick text must end with ';'")
    except (IndexError, TypeError, ValueError):
        raise TreeError("malformed Newick text") from None

    depth_of_leaf = {}
    ancestors = {}

    def walk(node, depth, path):
        name, children, length = node
        here = depth + length
        if not children:
            depth_of_leaf[name] = here
            ancestors[name] = path
            return
        path = path + [(id(node), here)]
        for child in children:
            walk(child, here, path)

    walk(root, -root[2], [])
    leaves = sorted(depth_of_leaf)
    n = len(leaves)
    du = np.zeros((n, n))
    for a in range(n):
        for b in range(a + 1, n):
            pa, pb = ancestors[leaves[a]], ancestors[leaves[b]]
            lca_depth = 0.0
            for (ia, da), (ib, _) in zip(pa, pb):
                if ia != ib:
                    break
                lca_depth = da
            du[a, b] = du[b, a] = depth_of_leaf[leaves[a]] - lca_depth
    return UltrametricMatrix(tuple(leaves), du)
