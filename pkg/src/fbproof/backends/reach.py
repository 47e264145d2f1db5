"""Explicit-state oracles: bounded reachability and the sound-prophecy test.

A state is a full one-state interpretation (immutable and mutable symbols)
over fixed carriers. For every combination of carrier sizes 1..bound the
reachable states are explored breadth-first. Successors come from one of
two routes: "sat" enumerates post-states of each grounded transition with
blocking clauses; "explicit" walks every candidate post-state and evaluates
the transition directly. The second is only usable on tiny vocabularies and
exists as an independent cross-check.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional, Sequence

from ..logic import ConstDecl, Formula, FuncDecl, RelDecl, Var, Vocabulary, free_vars
from .enum import interpretations, used_sorts
from .evaluate import evaluate
from .ground import Grounder
from .model import Bounds, FiniteModel, Trace, full_model

DEFAULT_MAX_STATES = 200_000


@dataclass(frozen=True)
class SafeUpToBound:
    bounds: Bounds
    explored: int
    safe = True
    kind = "safe-up-to-bound"

    def describe(self) -> str:
        return f"safe up to bound ({self.explored} states explored)"


@dataclass(frozen=True)
class ErrorTrace:
    trace: Trace
    explored: int
    safe = False
    kind = "error-trace"

    def describe(self) -> str:
        return f"error trace of length {len(self.trace)}:\n" + self.trace.describe()


@dataclass(frozen=True)
class BudgetExceeded:
    explored: int
    safe = None
    kind = "budget-exceeded"

    def describe(self) -> str:
        return f"state budget exceeded after {self.explored} states"


ReachResult = SafeUpToBound | ErrorTrace | BudgetExceeded


class _Budget(Exception):
    pass


# ---------------------------------------------------------------------------
# state encoding


class StateSpace:
    """Propositional encoding of states for one carrier-size combination.

    Every relation point and every one-hot bit of every constant/function
    point is a solver variable, created eagerly so a state is a complete
    assignment. States are tuples of booleans over `current`."""

    def __init__(self, problem, sizes: dict[str, int]):
        self.problem = problem
        self.vocab: Vocabulary = problem.vocab
        self.sizes = sizes
        self.g = Grounder(self.vocab, sizes)
        self.current: list[int] = []
        self.primed: list[int] = []
        self.mutable_slots: list[int] = []
        self._layout: list[tuple[str, str, tuple, int, int]] = []
        for decl in self.vocab.decls():
            for pt in self._points(decl):
                start = len(self.current)
                vs = self._vars(decl, False, pt)
                self.current.extend(vs)
                self._layout.append((decl.name, _kind(decl), pt, start, len(vs)))
                if decl.mutable:
                    self.mutable_slots.extend(range(start, start + len(vs)))
                    self.primed.extend(self._vars(decl, True, pt))
        for a in problem.axioms:
            self.g.assert_formula(a)
        self.init_lit = self.g.formula(problem.init)
        self.trans_lits = [(n, self.g.formula(t)) for n, t in problem.transitions]
        self._init_cache: Optional[list] = None
        self._succ_cache: dict = {}

    def _points(self, decl) -> Iterator[tuple]:
        if isinstance(decl, ConstDecl):
            yield ()
            return
        yield from itertools.product(*(range(self.sizes[s]) for s in decl.arg_sorts))

    def _vars(self, decl, primed: bool, pt: tuple) -> list[int]:
        if isinstance(decl, RelDecl):
            return [self.g.rel_var(decl.name, primed, pt)]
        return list(self.g.value_vars(decl.name, primed, pt))

    def assumptions(self, state: tuple[bool, ...]) -> list[int]:
        return [v if b else -v for v, b in zip(self.current, state)]

    def read(self, vars_: Sequence[int]) -> tuple[bool, ...]:
        m = self.g.solver.model()
        return tuple(bool(m[v]) for v in vars_)

    def model(self, state: tuple[bool, ...]) -> FiniteModel:
        values: dict = {}
        for name, kind, pt, start, width in self._layout:
            bits = state[start : start + width]
            if kind == "rel":
                cur = values.setdefault((name, False), set())
                if bits[0]:
                    cur.add(pt)
            elif kind == "const":
                values[(name, False)] = bits.index(True)
            else:
                values.setdefault((name, False), {})[pt] = bits.index(True)
        for k, v in values.items():
            if isinstance(v, set):
                values[k] = frozenset(v)
        return full_model(self.vocab, self.sizes, values, False)

    def encode(self, model: FiniteModel) -> tuple[bool, ...]:
        out: list[bool] = []
        for name, kind, pt, start, width in self._layout:
            val = model.values[(name, False)]
            if kind == "rel":
                out.append(pt in val)
            else:
                idx = val if kind == "const" else val[pt]
                out.extend(i == idx for i in range(width))
        return tuple(out)

    # -- SAT route ---------------------------------------------------------

    # Blocking clauses are permanent, so each query runs once and is cached.

    def initial_states(self) -> list[tuple[bool, ...]]:
        if self._init_cache is None:
            self._init_cache = list(self._initial_states())
        return self._init_cache

    def successors(self, state: tuple[bool, ...]) -> list[tuple[str, tuple[bool, ...]]]:
        out = self._succ_cache.get(state)
        if out is None:
            out = self._succ_cache[state] = list(self._successors(state))
        return out

    def _initial_states(self) -> Iterator[tuple[bool, ...]]:
        if self.init_lit is False:
            return
        solver = self.g.solver
        act = self.g.solver.new_var()
        if self.init_lit is not True:
            solver.add_clause([-act, self.init_lit])
        while solver.solve([act]):
            s = self.read(self.current)
            yield s
            solver.add_clause([-act] + [-lit for lit in self.assumptions(s)])

    def _successors(self, state: tuple[bool, ...]) -> Iterator[tuple[str, tuple[bool, ...]]]:
        pre = self.assumptions(state)
        solver = self.g.solver
        for name, lit in self.trans_lits:
            if lit is False:
                continue
            assume = pre + ([] if lit is True else [lit])
            while solver.solve(assume):
                post_bits = self.read(self.primed)
                yield name, self._merge(state, post_bits)
                post = [v if b else -v for v, b in zip(self.primed, post_bits)]
                # (not pre or not post) only rules out this exact pair
                solver.add_clause([-x for x in pre] + [-x for x in post])

    def _merge(self, state: tuple[bool, ...], post_bits: tuple[bool, ...]) -> tuple[bool, ...]:
        out = list(state)
        for slot, b in zip(self.mutable_slots, post_bits):
            out[slot] = b
        return tuple(out)


def _kind(decl) -> str:
    if isinstance(decl, RelDecl):
        return "rel"
    if isinstance(decl, ConstDecl):
        return "const"
    return "func"


class ExplicitSpace:
    """Same interface as StateSpace, computed by brute-force evaluation."""

    def __init__(self, problem, sizes: dict[str, int]):
        self.problem = problem
        self.vocab = problem.vocab
        self.sizes = sizes
        self.keys_all = [(d.name, False) for d in self.vocab.decls()]
        self.keys_mut = [(d.name, False) for d in self.vocab.decls() if d.mutable]

    def model(self, state: FiniteModel) -> FiniteModel:
        return state

    def initial_states(self) -> Iterator[FiniteModel]:
        for values in interpretations(self.vocab, self.sizes, self.keys_all):
            m = full_model(self.vocab, self.sizes, values, False)
            if all(evaluate(a, m) for a in self.problem.axioms) and evaluate(self.problem.init, m):
                yield m

    def successors(self, state: FiniteModel) -> Iterator[tuple[str, FiniteModel]]:
        posts = list(interpretations(self.vocab, self.sizes, self.keys_mut))
        for name, t in self.problem.transitions:
            for values in posts:
                two = dict(state.values)
                two.update({(n, True): v for (n, _), v in values.items()})
                m2 = FiniteModel(self.vocab, state.sizes, two)
                if evaluate(t, m2):
                    nxt = dict(state.values)
                    nxt.update(values)
                    yield name, _Frozen(self.vocab, state.sizes, nxt)


class _Frozen(FiniteModel):
    """Hashable state model for the explicit route."""

    def _key(self):
        return tuple(sorted((k, _hashable(v)) for k, v in self.values.items()))

    def __hash__(self):
        return hash(self._key())

    def __eq__(self, other):
        return isinstance(other, FiniteModel) and self._key() == _Frozen._key(other)


def _hashable(v):
    if isinstance(v, dict):
        return tuple(sorted(v.items()))
    if isinstance(v, frozenset):
        return tuple(sorted(v))
    return v


def _space(problem, sizes, strategy: str):
    if strategy == "sat":
        return StateSpace(problem, sizes)
    if strategy == "explicit":
        return ExplicitSpace(problem, sizes)
    raise ValueError(f"unknown strategy {strategy!r}")


def _start(space, strategy):
    for s in space.initial_states():
        yield s if strategy == "sat" else _Frozen(s.vocab, s.sizes, s.values)


def problem_sorts(problem) -> list[str]:
    comps = [problem.init, problem.bad, *problem.axioms, *(t for _, t in problem.transitions)]
    found = set(used_sorts(problem.vocab, comps))
    for d in problem.vocab.decls():
        if isinstance(d, ConstDecl):
            found.add(d.sort)
        else:
            found.update(d.arg_sorts)
            if isinstance(d, FuncDecl):
                found.add(d.result)
    return [s for s in problem.vocab.sorts if s in found]


def size_combinations(problem, bounds: Bounds) -> Iterator[dict[str, int]]:
    for combo in bounds.combinations(problem_sorts(problem)):
        yield {s: combo.get(s, 1) for s in problem.vocab.sorts}


# ---------------------------------------------------------------------------
# bounded reachability


def bounded_reach(
    problem, bounds: Bounds = Bounds(), max_states: int = DEFAULT_MAX_STATES, strategy: str = "sat"
) -> ReachResult:
    """Breadth-first search for a shortest error trace over every carrier
    size combination within `bounds`."""
    best: Optional[Trace] = None
    explored = 0
    for sizes in size_combinations(problem, bounds):
        space = _space(problem, sizes, strategy)
        limit = None if best is None else len(best) - 1
        try:
            trace, n = _bfs(space, problem.bad, max_states - explored, limit, strategy)
        except _Budget as e:
            return BudgetExceeded(explored + e.args[0])
        explored += n
        if trace is not None and (best is None or len(trace) < len(best)):
            best = trace
            if len(best) == 0:
                break
    if best is not None:
        return ErrorTrace(best, explored)
    return SafeUpToBound(bounds, explored)


def _bfs(space, bad: Formula, budget: int, depth_limit: Optional[int], strategy: str):
    parent: dict = {}
    frontier: deque = deque()
    for s in _start(space, strategy):
        if s in parent:
            continue
        parent[s] = None
        if len(parent) > budget:
            raise _Budget(len(parent))
        if evaluate(bad, space.model(s)):
            return _build(space, parent, s), len(parent)
        frontier.append((s, 0))
    while frontier:
        s, depth = frontier.popleft()
        if depth_limit is not None and depth >= depth_limit:
            continue
        for name, nxt in space.successors(s):
            if nxt in parent:
                continue
            parent[nxt] = (s, name)
            if len(parent) > budget:
                raise _Budget(len(parent))
            if evaluate(bad, space.model(nxt)):
                return _build(space, parent, nxt), len(parent)
            frontier.append((nxt, depth + 1))
    return None, len(parent)


def _build(space, parent, end) -> Trace:
    states, steps = [end], []
    cur = end
    while parent[cur] is not None:
        prev, name = parent[cur]
        steps.append(name)
        states.append(prev)
        cur = prev
    states.reverse()
    steps.reverse()
    return Trace([space.model(s) for s in states], steps)


def reachable_states(problem, sizes: dict[str, int], strategy: str = "sat", max_states: int = DEFAULT_MAX_STATES):
    """All reachable states for one carrier-size combination, as models."""
    space = _space(problem, sizes, strategy)
    seen = set()
    frontier = deque(_start(space, strategy))
    seen.update(frontier)
    while frontier:
        s = frontier.popleft()
        for _, nxt in space.successors(s):
            if nxt not in seen:
                seen.add(nxt)
                if len(seen) > max_states:
                    raise RuntimeError("state budget exceeded")
                frontier.append(nxt)
    return [space.model(s) for s in seen]


def shortest_trace_by_deepening(
    problem, bounds: Bounds = Bounds(), max_depth: int = 12, strategy: str = "explicit"
) -> Optional[int]:
    """Length of a shortest error trace found by iterative-deepening DFS
    (no visited set across depths), or None if none exists up to max_depth.
    Independent recomputation used to check BFS minimality."""
    for depth in range(max_depth + 1):
        for sizes in size_combinations(problem, bounds):
            space = _space(problem, sizes, strategy)
            starts = list(_start(space, strategy))
            succ_cache: dict = {}

            def succ(s):
                if s not in succ_cache:
                    succ_cache[s] = [n for _, n in space.successors(s)]
                return succ_cache[s]

            def dfs(s, remaining: int) -> bool:
                if remaining == 0:
                    return evaluate(problem.bad, space.model(s))
                return any(dfs(n, remaining - 1) for n in succ(s))

            if any(dfs(s, depth) for s in starts):
                return depth
    return None


# ---------------------------------------------------------------------------
# sound prophecy


@dataclass(frozen=True)
class ProphecyVerdict:
    sound: Optional[bool]
    explored: int
    counter_trace: Optional[Trace] = None


def sound_prophecy_oracle(
    problem,
    phi: Formula,
    params: Sequence[Var],
    bounds: Bounds = Bounds(),
    max_states: int = DEFAULT_MAX_STATES,
    strategy: str = "sat",
) -> ProphecyVerdict:
    """Is phi(params) a sound prophecy? True iff every error trace within
    bounds admits one tuple of elements satisfying phi in all its states.

    Explores pairs (state, S) where S is the set of tuples on which phi has
    held in every state so far; a bad state reached with S empty is an error
    trace that no witness can follow."""
    params = tuple(params)
    extra = {v.name for v in free_vars(phi)} - {p.name for p in params}
    if extra:
        raise ValueError(f"prophecy formula has free variables {sorted(extra)} beyond its parameters")
    explored = 0
    for sizes in size_combinations(problem, bounds):
        space = _space(problem, sizes, strategy)
        tuples = list(itertools.product(*(range(sizes[p.sort]) for p in params)))
        names = [p.name for p in params]

        def holds(model) -> frozenset:
            return frozenset(t for t in tuples if evaluate(phi, model, dict(zip(names, t))))

        parent: dict = {}
        frontier: deque = deque()

        def visit(node, prev):
            nonlocal explored
            if node in parent:
                return None
            parent[node] = prev
            explored += 1
            if explored > max_states:
                raise _Budget(explored)
            st, alive = node
            if not alive and evaluate(problem.bad, space.model(st)):
                return node
            frontier.append(node)
            return None

        try:
            for s in _start(space, strategy):
                hit = visit((s, holds(space.model(s))), None)
                if hit is not None:
                    return ProphecyVerdict(False, explored, _prophecy_trace(space, parent, hit))
            while frontier:
                node = frontier.popleft()
                st, alive = node
                for name, nxt in space.successors(st):
                    hit = visit((nxt, alive & holds(space.model(nxt))), (node, name))
                    if hit is not None:
                        return ProphecyVerdict(False, explored, _prophecy_trace(space, parent, hit))
        except _Budget:
            return ProphecyVerdict(None, explored)
    return ProphecyVerdict(True, explored)


def _prophecy_trace(space, parent, end) -> Trace:
    states, steps = [end[0]], []
    cur = end
    while parent[cur] is not None:
        prev, name = parent[cur]
        steps.append(name)
        states.append(prev[0])
        cur = prev
    states.reverse()
    steps.reverse()
    return Trace([space.model(s) for s in states], steps)
