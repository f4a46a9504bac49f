"""HRG rule induction from clique trees, canonical rule signatures and grammars.

A clique-tree node ``eta`` with parent ``eta'`` and children ``eta_1..eta_m``
yields the rule ``A -> R`` where ``|A| = |V_eta' & V_eta|``; ``R`` copies the
bag and its assigned edges, marks the shared vertices external and adds one
nonterminal hyperedge per child over ``V_eta & V_eta_i``. The root rewrites
the start symbol (rank 0); leaves give terminal rules.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .cliquetree import CliqueTree, clique_tree
from .graph import Edge, Hypergraph


class GrammarError(ValueError):
    pass


@dataclass(frozen=True)
class Production:
    """One HRG rule with a ranked LHS nonterminal.

    RHS vertices are ``0..n_vertices-1``; vertex ``i < lhs_rank`` is the
    external vertex numbered ``i + 1``, the rest are internal. Nonterminal
    edges are ordered vertex tuples whose length is their rank.
    """

    lhs_rank: int
    n_vertices: int
    terminal_edges: tuple[tuple[int, int], ...]
    nonterminal_edges: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        if not 0 <= self.lhs_rank <= self.n_vertices:
            raise GrammarError(f"bad rank {self.lhs_rank} for {self.n_vertices} vertices")
        for e in self.terminal_edges:
            if len(e) != 2 or e[0] == e[1]:
                raise GrammarError(f"bad terminal edge {e}")
        for e in self.terminal_edges + self.nonterminal_edges:
            if any(not 0 <= v < self.n_vertices for v in e) or len(set(e)) != len(e):
                raise GrammarError(f"edge {e} out of range")

    @property
    def n_internal(self) -> int:
        return self.n_vertices - self.lhs_rank

    @property
    def is_terminal(self) -> bool:
        return not self.nonterminal_edges

    @property
    def child_ranks(self) -> tuple[int, ...]:
        return tuple(len(e) for e in self.nonterminal_edges)

    def rhs(self) -> Hypergraph:
        edges = [Edge(e) for e in self.terminal_edges]
        edges += [Edge(e, nonterminal=True, link=i) for i, e in enumerate(self.nonterminal_edges)]
        return Hypergraph(tuple(range(self.n_vertices)), tuple(edges))

    def to_record(self) -> dict:
        return {
            "lhs_rank": self.lhs_rank,
            "external_count": self.lhs_rank,
            "vertices": list(range(self.n_vertices)),
            "terminal_edges": [list(e) for e in self.terminal_edges],
            "nonterminal_edges": [{"endpoints": list(e), "rank": len(e)}
                                  for e in self.nonterminal_edges],
        }

    @classmethod
    def from_record(cls, rec: dict) -> "Production":
        if rec["external_count"] != rec["lhs_rank"]:
            raise GrammarError("external_count must equal lhs_rank")
        nts = []
        for e in rec["nonterminal_edges"]:
            if len(e["endpoints"]) != e["rank"]:
                raise GrammarError(f"nonterminal edge {e} has the wrong number of endpoints")
            nts.append(tuple(e["endpoints"]))
        return cls(rec["lhs_rank"], len(rec["vertices"]),
                   tuple(tuple(e) for e in rec["terminal_edges"]), tuple(nts))


# --- canonical forms ---------------------------------------------------------

def _encode(p: Production, perm: Sequence[int]):
    terms = tuple(sorted(tuple(sorted((perm[a], perm[b]))) for a, b in p.terminal_edges))
    nts = tuple(sorted(tuple(perm[v] for v in e) for e in p.nonterminal_edges))
    return terms, nts


class _Canonizer:
    """Individualization-refinement search for the least edge encoding over
    all relabelings of internal vertices (externals stay pinned)."""

    def __init__(self, p: Production):
        self.p = p
        self.r = p.lhs_rank
        self.internal = list(range(p.lhs_rank, p.n_vertices))
        self.tadj: list[list[int]] = [[] for _ in range(p.n_vertices)]
        for a, b in p.terminal_edges:
            self.tadj[a].append(b)
            self.tadj[b].append(a)
        self.ntinc: list[list[tuple[int, int]]] = [[] for _ in range(p.n_vertices)]
        for k, e in enumerate(p.nonterminal_edges):
            for pos, v in enumerate(e):
                self.ntinc[v].append((k, pos))
        self.twin_rep = self._twins()

    def _swap_preserves(self, u: int, v: int) -> bool:
        def sw(x):
            return v if x == u else u if x == v else x

        terms = {frozenset(e) for e in self.p.terminal_edges}
        if {frozenset(map(sw, e)) for e in self.p.terminal_edges} != terms:
            return False
        nts = Counter(self.p.nonterminal_edges)
        return Counter(tuple(map(sw, e)) for e in self.p.nonterminal_edges) == nts

    def _twins(self) -> dict[int, int]:
        rep: dict[int, int] = {}
        groups: dict[tuple, list[int]] = {}
        for v in self.internal:
            nt_shape = tuple(sorted(tuple(-1 if x == v else x for x in self.p.nonterminal_edges[k])
                                    for k, _ in self.ntinc[v]))
            closed = frozenset(self.tadj[v]) | {v}
            groups.setdefault(("true", closed, nt_shape), []).append(v)
        leftovers = []
        for members in groups.values():
            head = members[0]
            rep[head] = head
            for v in members[1:]:
                if self._swap_preserves(head, v):
                    rep[v] = head
                else:
                    leftovers.append(v)
        # false twins: same open neighbourhood
        open_groups: dict[tuple, list[int]] = {}
        for v in self.internal:
            if rep.get(v, v) != v:
                continue
            nt_shape = tuple(sorted(tuple(-1 if x == v else x for x in self.p.nonterminal_edges[k])
                                    for k, _ in self.ntinc[v]))
            open_groups.setdefault((frozenset(self.tadj[v]), nt_shape), []).append(v)
        for members in open_groups.values():
            head = members[0]
            for v in members[1:]:
                if rep.get(v, v) == v and self._swap_preserves(head, v):
                    rep[v] = rep.get(head, head)
        for v in self.internal:
            rep.setdefault(v, v)
        return rep

    def _refine(self, color: dict[int, int]) -> dict[int, int]:
        nts = self.p.nonterminal_edges
        while True:
            ecol = [tuple(color[x] for x in e) for e in nts]
            sigs = {}
            for v in self.internal:
                sigs[v] = (color[v],
                           tuple(sorted(color[u] for u in self.tadj[v])),
                           tuple(sorted((pos, ecol[k]) for k, pos in self.ntinc[v])))
            ranks = {s: self.r + i for i, s in enumerate(sorted(set(sigs.values())))}
            new = {v: ranks[sigs[v]] for v in self.internal}
            for i in range(self.r):
                new[i] = i
            if len(set(new.values())) == len(set(color.values())):
                return new
            color = new

    def run(self):
        if not self.internal:
            ident = list(range(self.p.n_vertices))
            return _encode(self.p, ident), ident
        color = {i: i for i in range(self.r)}
        color.update({v: self.r for v in self.internal})
        best = [None, None]
        self._search(self._refine(color), best)
        return best[0], best[1]

    def _search(self, color: dict[int, int], best: list) -> None:
        cells: dict[int, list[int]] = {}
        for v in self.internal:
            cells.setdefault(color[v], []).append(v)
        target = next((cells[c] for c in sorted(cells) if len(cells[c]) > 1), None)
        if target is None:
            perm = [0] * self.p.n_vertices
            for v, c in color.items():
                perm[v] = c
            enc = _encode(self.p, perm)
            if best[0] is None or enc < best[0]:
                best[0], best[1] = enc, perm
            return
        tried = set()
        c = color[target[0]]
        for v in target:
            if self.twin_rep[v] in tried:
                continue
            tried.add(self.twin_rep[v])
            # individualized vertex sorts before the rest of its cell
            child = {u: (cu, 1 if cu == c and u != v else 0) for u, cu in color.items()}
            self._search(self._refine(_rerank(child, self.r)), best)


def _rerank(color: dict, r: int) -> dict[int, int]:
    vals = sorted({c for v, c in color.items() if v >= r})
    ranks = {c: r + i for i, c in enumerate(vals)}
    return {v: (v if v < r else ranks[c]) for v, c in color.items()}


def canonicalize(p: Production) -> tuple[Production, list[int]]:
    """Canonical relabeling of ``p``; returns it with the vertex map old -> new."""
    (terms, nts), perm = _Canonizer(p).run()
    return Production(p.lhs_rank, p.n_vertices, terms, nts), perm


def _signature_text(p: Production) -> str:
    terms = ",".join(f"{a}-{b}" for a, b in p.terminal_edges)
    nts = ",".join(":".join(map(str, e)) for e in p.nonterminal_edges)
    return f"{p.lhs_rank}|{p.n_vertices}|{terms}|{nts}"


def canonical_signature(p: Production) -> bytes:
    """Equal for two rules iff their RHSs are isomorphic with externals fixed."""
    return _signature_text(canonicalize(p)[0]).encode()


# --- grammars -----------------------------------------------------------------

@dataclass
class Grammar:
    """Rule families keyed by canonical signature, with occurrence counts.

    Rules with ``lhs_rank == 0`` rewrite the start symbol ``S``.
    """

    rules: dict[str, Production] = field(default_factory=dict)
    counts: Counter = field(default_factory=Counter)

    def add(self, p: Production, count: int = 1, signature: str | None = None) -> str:
        if count < 1:
            raise GrammarError("rule counts must be positive")
        if signature is None:
            p = canonicalize(p)[0]
            signature = _signature_text(p)
        self.rules.setdefault(signature, p)
        self.counts[signature] += count
        return signature

    def __len__(self):
        return len(self.rules)

    def __contains__(self, signature):
        return signature in self.rules

    @property
    def total_occurrences(self) -> int:
        return sum(self.counts.values())

    @property
    def max_rank(self) -> int:
        return max((p.lhs_rank for p in self.rules.values()), default=0)

    def start_rules(self) -> list[str]:
        return [s for s, p in self.rules.items() if p.lhs_rank == 0]

    def by_rank(self) -> dict[int, list[str]]:
        out: dict[int, list[str]] = {}
        for s in sorted(self.rules):
            out.setdefault(self.rules[s].lhs_rank, []).append(s)
        return out

    def occurrences_per_rank(self) -> dict[int, int]:
        out: Counter = Counter()
        for s, c in self.counts.items():
            out[self.rules[s].lhs_rank] += c
        return dict(out)

    def copy(self) -> "Grammar":
        return Grammar(dict(self.rules), Counter(self.counts))

    def __eq__(self, other):
        return (isinstance(other, Grammar) and self.rules == other.rules
                and +self.counts == +other.counts)

    def summary(self) -> dict:
        return {"distinct_rules": len(self), "total_occurrences": self.total_occurrences,
                "start_rules": len(self.start_rules()), "max_rank": self.max_rank}

    def to_json(self) -> str:
        records = []
        for s in sorted(self.rules):
            rec = self.rules[s].to_record()
            rec["count"] = self.counts[s]
            rec["signature"] = s
            records.append(rec)
        return json.dumps({"rules": records}, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "Grammar":
        g = cls()
        for rec in json.loads(text)["rules"]:
            g.add(Production.from_record(rec), rec["count"])
        return g


@dataclass(frozen=True)
class TraceEntry:
    """One rule application: the clique-tree node, its rule signature, and for
    each nonterminal edge of the canonical rule the trace index filling it."""

    node: int
    signature: str
    child_slots: tuple[int, ...]


@dataclass
class DerivationTrace:
    entries: list[TraceEntry] = field(default_factory=list)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def to_json(self) -> str:
        return json.dumps({"entries": [{"node": e.node, "rule": e.signature,
                                        "children": list(e.child_slots)}
                                       for e in self.entries]})

    @classmethod
    def from_json(cls, text: str) -> "DerivationTrace":
        return cls([TraceEntry(r["node"], r["rule"], tuple(r["children"]))
                    for r in json.loads(text)["entries"]])


def extract_rule(t: CliqueTree, node: int) -> Production:
    """Rule for one clique-tree node, in local labeling.

    Externals (shared with the parent bag) come first in ascending vertex
    order, then internals ascending; nonterminal edges follow the children in
    index order, each listing the shared vertices in ascending order.
    """
    bag = t.bags[node]
    p = t.parent[node]
    shared = sorted(set(bag) & set(t.bags[p])) if p >= 0 else []
    if p >= 0 and not shared:
        raise GrammarError(f"node {node} shares no vertex with its parent {p}")
    local = {v: i for i, v in enumerate(shared)}
    for v in bag:
        if v not in local:
            local[v] = len(local)
    terms = tuple((local[a], local[b]) for a, b in t.assigned_edges[node])
    nts = []
    for c in t.children[node]:
        common = sorted(set(bag) & set(t.bags[c]))
        if not common:
            raise GrammarError(f"child {c} shares no vertex with node {node}")
        nts.append(tuple(local[v] for v in common))
    return Production(len(shared), len(bag), terms, tuple(nts))


def _slot_order(local: Production, perm: Sequence[int], canon: Production) -> list[int]:
    """For each canonical nonterminal edge, the index of the local one it came from."""
    free: dict[tuple, list[int]] = {}
    for i, e in enumerate(local.nonterminal_edges):
        free.setdefault(tuple(perm[v] for v in e), []).append(i)
    return [free[e].pop(0) for e in canon.nonterminal_edges]


def grammar_from_tree(t: CliqueTree) -> tuple[Grammar, DerivationTrace]:
    grammar = Grammar()
    order = t.preorder()
    where = {node: i for i, node in enumerate(order)}
    entries = []
    for node in order:
        local = extract_rule(t, node)
        canon, perm = canonicalize(local)
        sig = grammar.add(canon, signature=_signature_text(canon))
        slots = _slot_order(local, perm, canon)
        kids = t.children[node]
        entries.append(TraceEntry(node, sig, tuple(where[kids[i]] for i in slots)))
    return grammar, DerivationTrace(entries)


def extract_grammar(g: Hypergraph, tree: CliqueTree | None = None) -> tuple[Grammar, DerivationTrace]:
    """Induce a grammar top-down (DFS preorder) from ``g``'s clique tree."""
    if tree is None:
        if not g.is_connected():
            raise GrammarError("grammar extraction needs a connected graph")
        tree = clique_tree(g)
    return grammar_from_tree(tree)


def merge_grammars(grammars: Iterable[Grammar]) -> Grammar:
    """Union of rule families with counts summed per signature."""
    out = Grammar()
    for gr in grammars:
        for s, p in gr.rules.items():
            out.add(p, gr.counts[s], signature=s)
    return out
