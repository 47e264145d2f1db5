"""Finite models, bounds, verdicts, and traces, with their JSON shape."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Iterator, Mapping, Optional, Sequence

from ..logic import ConstDecl, FuncDecl, RelDecl, Vocabulary

DEFAULT_BOUND = 2


@dataclass(frozen=True)
class Bounds:
    """Per-sort domain sizes; sorts without an entry use `default`."""

    sizes: tuple[tuple[str, int], ...] = ()
    default: int = DEFAULT_BOUND

    @staticmethod
    def of(mapping: Mapping[str, int] | None = None, default: int = DEFAULT_BOUND) -> "Bounds":
        items = tuple(sorted((mapping or {}).items()))
        for s, n in items:
            if n < 1:
                raise ValueError(f"bound for sort {s} must be positive")
        return Bounds(items, default)

    def size(self, sort: str) -> int:
        return dict(self.sizes).get(sort, self.default)

    def for_sorts(self, sorts: Sequence[str]) -> dict[str, int]:
        return {s: self.size(s) for s in sorts}

    def combinations(self, sorts: Sequence[str]) -> Iterator[dict[str, int]]:
        """Every assignment of sizes 1..bound to the given sorts, smallest
        total first."""
        sorts = list(sorts)
        ranges = [range(1, self.size(s) + 1) for s in sorts]
        combos = sorted(itertools.product(*ranges), key=lambda c: (sum(c), c))
        for combo in combos:
            yield dict(zip(sorts, combo))

    def to_json(self) -> dict:
        return {"default": self.default, "sizes": dict(self.sizes)}


def element_name(sort: str, i: int) -> str:
    return f"{sort}{i}"


@dataclass
class FiniteModel:
    """Interpretation over carriers {0..n-1} per sort.

    `values` maps (symbol, primed) to an int (constant), a dict from argument
    tuples to ints (function), or a frozenset of argument tuples (relation)."""

    vocab: Vocabulary
    sizes: dict[str, int]
    values: dict[tuple[str, bool], Any] = field(default_factory=dict)

    def carrier(self, sort: str) -> range:
        return range(self.sizes[sort])

    def get(self, name: str, primed: bool = False) -> Any:
        return self.values[(name, primed)]

    def state(self, primed: bool = False) -> "FiniteModel":
        """One-state projection: immutable symbols plus the chosen copy of
        the mutable ones, re-keyed as unprimed."""
        out = {}
        for (name, p), val in self.values.items():
            if not self.vocab.is_mutable(name):
                if not p:
                    out[(name, False)] = val
            elif p == primed:
                out[(name, False)] = val
        return FiniteModel(self.vocab, dict(self.sizes), out)

    def table_json(self, name: str, primed: bool) -> Any:
        decl = self.vocab.get(name)
        val = self.values[(name, primed)]
        if isinstance(decl, ConstDecl):
            return element_name(decl.sort, val)
        if isinstance(decl, FuncDecl):
            return [
                [element_name(s, a) for s, a in zip(decl.arg_sorts, args)] + [element_name(decl.result, r)]
                for args, r in sorted(val.items())
            ]
        assert isinstance(decl, RelDecl)
        if not decl.arg_sorts:
            return () in val
        return [[element_name(s, a) for s, a in zip(decl.arg_sorts, args)] for args in sorted(val)]

    def to_json(self, names: Optional[Sequence[tuple[str, bool]]] = None) -> dict:
        keys = names if names is not None else sorted(self.values)
        return {
            "sorts": {s: [element_name(s, i) for i in range(n)] for s, n in sorted(self.sizes.items())},
            "symbols": {(n + "'" if p else n): self.table_json(n, p) for n, p in keys},
        }

    def describe(self) -> str:
        lines = []
        for s, n in sorted(self.sizes.items()):
            lines.append(f"  sort {s} = {{{', '.join(element_name(s, i) for i in range(n))}}}")
        for (name, p), _ in sorted(self.values.items()):
            lines.append(f"  {name}{chr(39) if p else ''} = {self.table_json(name, p)}")
        return "\n".join(lines)


def full_model(vocab: Vocabulary, sizes: Mapping[str, int], values: Mapping, two_state: bool) -> FiniteModel:
    """Complete a partial interpretation with defaults (element 0, empty
    relations) so every declared symbol, and the primed copy of every
    mutable one when `two_state`, is interpreted."""
    sizes = {s: sizes.get(s, 1) for s in vocab.sorts}
    out = dict(values)
    for decl in vocab.decls():
        copies = [False, True] if (two_state and decl.mutable) else [False]
        for p in copies:
            key = (decl.name, p)
            if key in out:
                continue
            if isinstance(decl, ConstDecl):
                out[key] = 0
            elif isinstance(decl, FuncDecl):
                out[key] = {
                    args: 0 for args in itertools.product(*(range(sizes[s]) for s in decl.arg_sorts))
                }
            else:
                out[key] = frozenset()
    return FiniteModel(vocab, sizes, out)


# ---------------------------------------------------------------------------
# verdicts


@dataclass(frozen=True)
class Valid:
    accepted = True
    kind = "valid"

    def describe(self) -> str:
        return "valid"


@dataclass(frozen=True)
class ValidUpToBound:
    bounds: Bounds
    accepted = True
    kind = "valid-up-to-bound"

    def describe(self) -> str:
        return f"valid up to bound {dict(self.bounds.sizes) or self.bounds.default}"


@dataclass(frozen=True)
class Counterexample:
    model: Optional[FiniteModel]
    accepted = False
    kind = "counterexample"

    def describe(self) -> str:
        return "counterexample" if self.model is None else "counterexample:\n" + self.model.describe()


@dataclass(frozen=True)
class Unknown:
    reason: str
    examined: Optional[int] = None
    accepted = False
    kind = "unknown"

    def describe(self) -> str:
        extra = f" after {self.examined} models" if self.examined is not None else ""
        return f"unknown ({self.reason}){extra}"


@dataclass(frozen=True)
class SolverFailure:
    reason: str
    accepted = False
    kind = "failure"

    def describe(self) -> str:
        return f"solver failure: {self.reason}"


Verdict = Valid | ValidUpToBound | Counterexample | Unknown | SolverFailure


def verdict_json(v: Verdict) -> dict:
    out: dict[str, Any] = {"kind": v.kind}
    if isinstance(v, ValidUpToBound):
        out["bounds"] = v.bounds.to_json()
    elif isinstance(v, Counterexample) and v.model is not None:
        out["model"] = v.model.to_json()
    elif isinstance(v, (Unknown, SolverFailure)):
        out["reason"] = v.reason
        if isinstance(v, Unknown) and v.examined is not None:
            out["examined"] = v.examined
    return out


# ---------------------------------------------------------------------------
# traces


@dataclass
class Trace:
    """States are one-state models sharing carriers and immutable symbols;
    `steps[i]` names the transition from states[i] to states[i+1]."""

    states: list[FiniteModel]
    steps: list[str]

    def __len__(self) -> int:
        return len(self.steps)

    def to_json(self) -> dict:
        if not self.states:
            return {"sorts": {}, "immutable": {}, "states": []}
        first = self.states[0]
        vocab = first.vocab
        imm = [(d.name, False) for d in vocab.decls() if not d.mutable]
        mut = [(d.name, False) for d in vocab.decls() if d.mutable]
        base = first.to_json(imm)
        states = []
        for i, s in enumerate(self.states):
            states.append(
                {"transition": self.steps[i - 1] if i else None, "symbols": s.to_json(mut)["symbols"]}
            )
        return {"sorts": base["sorts"], "immutable": base["symbols"], "states": states}

    def describe(self) -> str:
        out = []
        for i, s in enumerate(self.states):
            head = "initial state" if i == 0 else f"after {self.steps[i - 1]}"
            out.append(f"state {i} ({head}):")
            out.append(s.describe())
        return "\n".join(out)
