"""Graph generation from an HRG: exact replay, free sampling and size-conditioned sampling."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .grammar import DerivationTrace, Grammar, GrammarError, Production
from .graph import Hypergraph


class DerivationError(RuntimeError):
    pass


class StepLimitExceeded(DerivationError):
    pass


class NoDerivationError(DerivationError):
    """No derivation produces the requested size."""

    def __init__(self, n_target: int, below: int | None, above: int | None):
        self.n_target, self.below, self.above = n_target, below, above
        near = ", ".join(str(x) for x in (below, above) if x is not None) or "none found"
        super().__init__(f"no derivation yields {n_target} vertices; nearest feasible sizes: {near}")


@dataclass
class DerivationState:
    """Working hypergraph of a derivation.

    Live nonterminals are kept by link id with a FIFO queue of pending links;
    ``budget`` optionally holds the vertex budget assigned to each live link.
    """

    n_vertices: int = 0
    terminal_edges: list = field(default_factory=list)
    live: dict = field(default_factory=dict)
    queue: deque = field(default_factory=deque)
    budget: dict = field(default_factory=dict)
    next_link: int = 0
    steps: int = 0

    @classmethod
    def start(cls) -> "DerivationState":
        state = cls()
        state.live[0] = ()
        state.queue.append(0)
        state.next_link = 1
        return state

    @property
    def done(self) -> bool:
        return not self.live

    def parallel_edges(self) -> int:
        return len(self.terminal_edges) - len({frozenset(e) for e in self.terminal_edges})

    def to_hypergraph(self, simple: bool = True) -> Hypergraph:
        """Terminal graph of a finished derivation.

        Parallel edges are collapsed when ``simple``; otherwise their presence
        is an error.
        """
        if self.live:
            raise DerivationError(f"{len(self.live)} nonterminals are still live")
        if not simple and self.parallel_edges():
            raise DerivationError(f"derivation produced {self.parallel_edges()} parallel edges")
        return Hypergraph.from_edges(self.terminal_edges, vertices=range(self.n_vertices))


def apply_rule(state: DerivationState, link: int, p: Production) -> list[int]:
    """Rewrite live nonterminal ``link`` with ``p``; returns the new links in RHS order."""
    attach = state.live.get(link)
    if attach is None:
        raise DerivationError(f"no live nonterminal with link {link}")
    if len(attach) != p.lhs_rank:
        raise DerivationError(f"rank mismatch: nonterminal has rank {len(attach)}, "
                              f"rule expects {p.lhs_rank}")
    del state.live[link]
    vmap = list(attach) + list(range(state.n_vertices, state.n_vertices + p.n_internal))
    state.n_vertices += p.n_internal
    state.terminal_edges.extend((vmap[a], vmap[b]) for a, b in p.terminal_edges)
    new = []
    for e in p.nonterminal_edges:
        lk = state.next_link
        state.next_link += 1
        state.live[lk] = tuple(vmap[v] for v in e)
        state.queue.append(lk)
        new.append(lk)
    state.steps += 1
    return new


def exact_generate(grammar: Grammar, trace: DerivationTrace, simple: bool = True) -> Hypergraph:
    """Replay a derivation trace; the result is isomorphic to the source graph."""
    state = DerivationState.start()
    link_of = {0: 0}
    for i, entry in enumerate(trace):
        p = grammar.rules.get(entry.signature)
        if p is None:
            raise DerivationError(f"trace entry {i}: rule {entry.signature!r} not in grammar")
        if i not in link_of:
            raise DerivationError(f"trace entry {i} is not reachable from earlier entries")
        new = apply_rule(state, link_of.pop(i), p)
        if len(new) != len(entry.child_slots):
            raise DerivationError(f"trace entry {i}: rule has {len(new)} nonterminals, "
                                  f"trace lists {len(entry.child_slots)} children")
        for lk, child in zip(new, entry.child_slots):
            link_of[child] = lk
    return state.to_hypergraph(simple)


class _RuleTable:
    """Rules grouped by LHS rank with count-proportional probabilities."""

    def __init__(self, grammar: Grammar):
        if not grammar.start_rules():
            raise GrammarError("grammar has no start rule")
        self.by_rank = {}
        for rank, sigs in grammar.by_rank().items():
            counts = np.array([grammar.counts[s] for s in sigs], dtype=float)
            self.by_rank[rank] = (sigs, [grammar.rules[s] for s in sigs], counts / counts.sum())

    def choose(self, rank: int, rng: np.random.Generator) -> tuple[str, Production]:
        try:
            sigs, prods, probs = self.by_rank[rank]
        except KeyError:
            raise DerivationError(f"no rule rewrites a rank-{rank} nonterminal") from None
        i = int(rng.choice(len(sigs), p=probs)) if len(sigs) > 1 else 0
        return sigs[i], prods[i]


def _default_cap(grammar: Grammar) -> int:
    total = sum(p.n_internal * grammar.counts[s] for s, p in grammar.rules.items())
    starts = sum(grammar.counts[s] for s in grammar.start_rules())
    return 50 * max(1, total // max(starts, 1))


def stochastic_generate(grammar: Grammar, seed=None, max_steps: int | None = None,
                        simple: bool = True, log: list | None = None) -> Hypergraph:
    """Rewrite nonterminals in FIFO order, each with a rule drawn proportional to
    its count among rules of matching rank, until none remain."""
    rng = np.random.default_rng(seed)
    table = _RuleTable(grammar)
    cap = max_steps or _default_cap(grammar)
    state = DerivationState.start()
    while state.queue:
        if state.steps >= cap:
            raise StepLimitExceeded(f"derivation exceeded {cap} rule applications")
        link = state.queue.popleft()
        sig, p = table.choose(len(state.live[link]), rng)
        apply_rule(state, link, p)
        if log is not None:
            log.append(sig)
    return state.to_hypergraph(simple)


class SizeTable:
    """Weighted derivation counts by nonterminal rank and vertex budget.

    ``W[r][n]`` sums, over derivations from a rank-``r`` nonterminal that
    create exactly ``n`` new vertices, the product of the counts of the rules
    used. Log-weights are always kept; exact integers too when ``exact``.
    """

    def __init__(self, grammar: Grammar, n_max: int, exact: bool | None = None):
        if n_max < 1:
            raise ValueError("n_max must be >= 1")
        for s, p in grammar.rules.items():
            if p.n_internal < 1:
                raise GrammarError(f"rule {s} adds no vertices; size table needs every rule "
                                   "to create at least one")
        self.grammar = grammar
        self.n_max = n_max
        self.exact = n_max <= 300 if exact is None else exact
        self.ranks = sorted({p.lhs_rank for p in grammar.rules.values()}
                            | {r for p in grammar.rules.values() for r in p.child_ranks})
        neg = np.full(n_max + 1, -np.inf)
        self.log_w = {r: neg.copy() for r in self.ranks}
        self.counts = {r: [0] * (n_max + 1) for r in self.ranks} if self.exact else None
        self.rules = []
        for s in sorted(grammar.rules):
            p = grammar.rules[s]
            k = len(p.child_ranks)
            logs = [neg.copy() for _ in range(k + 1)]
            logs[k][0] = 0.0
            ints = [[0] * (n_max + 1) for _ in range(k + 1)] if self.exact else None
            if ints is not None:
                ints[k][0] = 1
            self.rules.append((s, p, grammar.counts[s], logs, ints))
        self._fill()

    def _fill(self):
        for n in range(1, self.n_max + 1):
            m = n - 1
            for _, p, _, logs, ints in self.rules:
                ranks = p.child_ranks
                for j in range(len(ranks) - 1, -1, -1):
                    if m < 1:
                        continue
                    lw = self.log_w[ranks[j]]
                    logs[j][m] = logsumexp(lw[1:m + 1] + logs[j + 1][m - 1::-1])
                    if ints is not None:
                        cw = self.counts[ranks[j]]
                        nxt = ints[j + 1]
                        ints[j][m] = sum(cw[a] * nxt[m - a] for a in range(1, m + 1) if cw[a])
            acc: dict[int, list] = {}
            for _, p, count, logs, ints in self.rules:
                rest = n - p.n_internal
                if rest < 0 or logs[0][rest] == -np.inf:
                    continue
                acc.setdefault(p.lhs_rank, []).append(np.log(count) + logs[0][rest])
                if ints is not None:
                    self.counts[p.lhs_rank][n] += count * ints[0][rest]
            for r, terms in acc.items():
                self.log_w[r][n] = logsumexp(terms)

    def weight(self, rank: int, n: int):
        if self.exact:
            return self.counts[rank][n]
        return float(np.exp(self.log_w[rank][n]))

    def feasible(self, n: int, rank: int = 0) -> bool:
        return 0 <= n <= self.n_max and self.log_w[rank][n] > -np.inf

    def feasible_sizes(self, rank: int = 0) -> list[int]:
        return [n for n in range(self.n_max + 1) if self.feasible(n, rank)]

    def choose_rule(self, rank: int, n: int, rng: np.random.Generator):
        cands, weights = [], []
        for entry in self.rules:
            _, p, count, logs, _ = entry
            rest = n - p.n_internal
            if p.lhs_rank == rank and rest >= 0 and logs[0][rest] > -np.inf:
                cands.append(entry)
                weights.append(np.log(count) + logs[0][rest])
        if not cands:
            raise NoDerivationError(n, None, None)
        return cands[_sample_log(weights, rng)]

    def split_budget(self, entry, n: int, rng: np.random.Generator) -> list[int]:
        """Draw child budgets for rule ``entry`` given ``n`` remaining vertices."""
        _, p, _, logs, _ = entry
        m = n - p.n_internal
        out = []
        for j, r in enumerate(p.child_ranks):
            a = np.arange(1, m + 1)
            w = self.log_w[r][1:m + 1] + logs[j + 1][m - a]
            pick = int(a[_sample_log(w, rng)])
            out.append(pick)
            m -= pick
        return out


def _sample_log(logw, rng: np.random.Generator) -> int:
    logw = np.asarray(logw, dtype=float)
    probs = np.exp(logw - logw.max())
    return int(rng.choice(len(probs), p=probs / probs.sum()))


def build_size_table(grammar: Grammar, n_max: int, exact: bool | None = None) -> SizeTable:
    return SizeTable(grammar, n_max, exact)


def _nearest_feasible(grammar: Grammar, n_target: int) -> tuple[int | None, int | None]:
    probe = SizeTable(grammar, 2 * n_target + 20, exact=False)
    sizes = probe.feasible_sizes()
    below = max((n for n in sizes if n < n_target), default=None)
    above = min((n for n in sizes if n > n_target), default=None)
    return below, above


def expected_sizes(grammar: Grammar, cap: float = 1e9) -> dict[int, float]:
    """Expected number of vertices a rank-r nonterminal expands into under
    count-proportional rule choice (capped when the expansion is unbounded)."""
    ranks = sorted({p.lhs_rank for p in grammar.rules.values()}
                   | {r for p in grammar.rules.values() for r in p.child_ranks})
    idx = {r: i for i, r in enumerate(ranks)}
    M = np.zeros((len(ranks), len(ranks)))
    b = np.zeros(len(ranks))
    for r, sigs in grammar.by_rank().items():
        total = sum(grammar.counts[s] for s in sigs)
        for s in sigs:
            p, pi = grammar.rules[s], grammar.counts[s] / total
            b[idx[r]] += pi * p.n_internal
            for c in p.child_ranks:
                M[idx[r], idx[c]] += pi
    if len(ranks) and np.max(np.abs(np.linalg.eigvals(M))) < 1 - 1e-9:
        E = np.linalg.solve(np.eye(len(ranks)) - M, b)
    else:
        E = np.zeros(len(ranks))
        for _ in range(1000):
            E = np.minimum(b + M @ E, cap)
    return {r: float(E[idx[r]]) for r in ranks}


def size_constrained_generate(grammar: Grammar, n_target: int, mode: str = "exact", seed=None,
                              table: SizeTable | None = None, simple: bool = True,
                              log: list | None = None, tolerance: float = 0.05,
                              max_tries: int = 200) -> Hypergraph:
    """Sample a graph with a prescribed vertex count.

    ``mode="exact"`` draws derivations in proportion to their rule-count
    weight, conditioned on exactly ``n_target`` vertices. ``mode="approx"``
    steers rule choice by expected expansion size and accepts any result within
    ``tolerance`` of the target.
    """
    rng = np.random.default_rng(seed)
    if mode == "exact":
        if table is None or table.n_max < n_target:
            table = SizeTable(grammar, n_target)
        if not table.feasible(n_target):
            raise NoDerivationError(n_target, *_nearest_feasible(grammar, n_target))
        return _conditioned(table, n_target, rng, simple, log)
    if mode in ("approx", "approximate"):
        return _steered(grammar, n_target, rng, simple, log, tolerance, max_tries)
    raise ValueError(f"unknown mode {mode!r}")


def _conditioned(table: SizeTable, n_target: int, rng, simple: bool, log) -> Hypergraph:
    state = DerivationState.start()
    state.budget[0] = n_target
    while state.queue:
        link = state.queue.popleft()
        budget = state.budget.pop(link)
        entry = table.choose_rule(len(state.live[link]), budget, rng)
        split = table.split_budget(entry, budget, rng)
        new = apply_rule(state, link, entry[1])
        state.budget.update(zip(new, split))
        if log is not None:
            log.append(entry[0])
    return state.to_hypergraph(simple)


def minimal_sizes(grammar: Grammar) -> dict[int, float]:
    """Fewest vertices a rank-r nonterminal can expand into (inf if it cannot finish)."""
    ranks = {p.lhs_rank for p in grammar.rules.values()}
    ranks |= {r for p in grammar.rules.values() for r in p.child_ranks}
    best = {r: math.inf for r in ranks}
    changed = True
    while changed:
        changed = False
        for p in grammar.rules.values():
            size = p.n_internal + sum(best[c] for c in p.child_ranks)
            if size < best[p.lhs_rank]:
                best[p.lhs_rank] = size
                changed = True
    return best


def maximal_sizes(grammar: Grammar) -> dict[int, float]:
    """Most vertices a rank-r nonterminal can expand into (inf when recursive)."""
    least = minimal_sizes(grammar)
    ranks = list(least)
    best = {r: (0.0 if least[r] < math.inf else -math.inf) for r in ranks}
    for _ in range(len(ranks) + 1):
        for p in grammar.rules.values():
            if any(least[c] == math.inf for c in p.child_ranks):
                continue
            size = p.n_internal + sum(best[c] for c in p.child_ranks)
            best[p.lhs_rank] = max(best[p.lhs_rank], size)
    # anything still growing after |ranks| rounds lies on a cycle
    final = dict(best)
    for p in grammar.rules.values():
        if any(least[c] == math.inf for c in p.child_ranks):
            continue
        if p.n_internal + sum(best[c] for c in p.child_ranks) > best[p.lhs_rank]:
            final[p.lhs_rank] = math.inf
    changed = True
    while changed:
        changed = False
        for p in grammar.rules.values():
            if any(least[c] == math.inf for c in p.child_ranks):
                continue
            if any(final[c] == math.inf for c in p.child_ranks) and final[p.lhs_rank] < math.inf:
                final[p.lhs_rank] = math.inf
                changed = True
    return final


def _steered(grammar: Grammar, n_target: int, rng, simple: bool, log, tolerance: float,
             max_tries: int) -> Hypergraph:
    # Each choice is restricted to rules that can still finish inside the band.
    # While the expected final size is outside the band only rules moving it
    # toward the target are kept; inside, counts are damped by a kernel on the
    # distance between expected final size and target.
    table = _RuleTable(grammar)
    expect = expected_sizes(grammar)
    least = minimal_sizes(grammar)
    most = maximal_sizes(grammar)
    cap = 50 * n_target
    lo, hi = n_target * (1 - tolerance), n_target * (1 + tolerance)
    width = max(1.0, tolerance * n_target)
    if least.get(0, math.inf) > hi:
        raise NoDerivationError(n_target, None, int(least.get(0, 0)) or None)
    for _ in range(max_tries):
        state = DerivationState.start()
        pending_exp = expect.get(0, 0.0)
        pending_min = least.get(0, 0.0)
        # finite part of the pending maximum, plus how many pending ranks are unbounded
        pending_max, unbounded = 0.0, 0
        if most.get(0, 0.0) == math.inf:
            unbounded = 1
        else:
            pending_max = most.get(0, 0.0)
        trial_log = []
        while state.queue and state.steps < cap:
            link = state.queue.popleft()
            rank = len(state.live[link])
            pending_exp -= expect.get(rank, 0.0)
            pending_min -= least.get(rank, 0.0)
            if most.get(rank, 0.0) == math.inf:
                unbounded -= 1
            else:
                pending_max -= most.get(rank, 0.0)
            sigs, prods, probs = table.by_rank[rank]
            base = state.n_vertices
            lower = np.array([base + p.n_internal + sum(least[c] for c in p.child_ranks)
                              for p in prods]) + pending_min
            projected = np.array([base + p.n_internal + sum(expect.get(c, 0.0) for c in p.child_ranks)
                                  for p in prods]) + pending_exp
            upper = np.array([base + p.n_internal + sum(most[c] for c in p.child_ranks)
                              for p in prods]) + (math.inf if unbounded else pending_max)
            w = np.where((lower <= hi) & (upper >= lo), probs, 0.0)
            if w.sum() <= 0:
                w = np.where(lower == lower.min(), probs, 0.0)
            current = base + pending_exp + expect.get(rank, 0.0)
            if current < lo or current > hi:
                toward = (projected >= current) if current < lo else (projected <= current)
                if (w * toward).sum() > 0:
                    w = w * toward
            else:
                d = np.abs(projected - n_target)
                w = w * np.exp(-(d - d.min()) / width)
            i = int(rng.choice(len(w), p=w / w.sum()))
            apply_rule(state, link, prods[i])
            pending_exp += sum(expect.get(c, 0.0) for c in prods[i].child_ranks)
            pending_min += sum(least[c] for c in prods[i].child_ranks)
            for c in prods[i].child_ranks:
                if most[c] == math.inf:
                    unbounded += 1
                else:
                    pending_max += most[c]
            trial_log.append(sigs[i])
        if state.done and lo <= state.n_vertices <= hi:
            if log is not None:
                log.extend(trial_log)
            return state.to_hypergraph(simple)
    raise DerivationError(f"no derivation within {tolerance:.0%} of {n_target} vertices "
                          f"after {max_tries} attempts")
