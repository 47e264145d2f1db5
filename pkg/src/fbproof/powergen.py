"""Generated families separating the proof systems.

fbi(n): n nullary relations, phi = p1 & (!p2 | (p3 & (!p4 | ...))), problem
(phi, false, !phi). Proved by one step per proposition, forward for odd
indices and backward for even ones.

fbpi(n): one unary relation p1 and binary r2..rn over sort elem,
phi = exists x1. p1(x1) & forall x2. !r2(x1, x2) | exists x3. r3(x2, x3) & ...
Problem (phi, false, !phi). Any safe invariant is equivalent to phi and so
needs quantifier depth n. The shipped proof introduces the outer witness
with one forward prophecy step whose formula is the whole matrix.
"""
from __future__ import annotations

from .syntax import SpecFile, parse

FAMILIES = ("fbpi", "fbi")


def _fbi_formula(n: int) -> str:
    def go(k: int) -> str:
        if k == n:
            return f"p{k}" if k % 2 else f"!p{k}"
        inner = go(k + 1)
        return f"p{k} & ({inner})" if k % 2 else f"!p{k} | ({inner})"

    return go(1)


def _fbpi_matrix(n: int) -> str:
    """Body of phi below the outer exists x1, as a function of x1."""

    def go(k: int) -> str:
        # quantifier block for x_k, k >= 2
        atom = f"r{k}(x{k - 1}, x{k})"
        if k % 2 == 0:
            head = f"forall x{k}:elem. !{atom}"
            return head if k == n else f"{head} | ({go(k + 1)})"
        head = f"exists x{k}:elem. {atom}"
        return head if k == n else f"{head} & ({go(k + 1)})"

    return "p1(x1)" if n == 1 else f"p1(x1) & ({go(2)})"


def fbi_source(n: int) -> str:
    if n < 1:
        raise ValueError("n must be at least 1")
    phi = _fbi_formula(n)
    lines = [f"# Boolean family, n = {n}", ""]
    lines += [f"mutable relation p{k}" for k in range(1, n + 1)]
    lines += ["", f"init {phi}", "transition stutter { false }", f"safety {phi}", "", "proof {"]
    for k in range(1, n + 1):
        lines.append(f"  {'F' if k % 2 else 'B'} p{k}")
    lines.append(f"  QED {'fwd' if n % 2 else 'bwd'}")
    lines.append("}")
    return "\n".join(lines) + "\n"


def fbpi_source(n: int) -> str:
    if n < 1:
        raise ValueError("n must be at least 1")
    matrix = _fbpi_matrix(n)
    phi = f"exists x1:elem. {matrix}"
    lines = [f"# Alternating quantifier nesting family, n = {n}", "", "sort elem", "", "mutable relation p1(elem)"]
    lines += [f"mutable relation r{k}(elem, elem)" for k in range(2, n + 1)]
    lines += ["", f"init {phi}", "transition stutter { false }", f"safety {phi}", "", "proof {"]
    lines.append(f"  FP x1:elem as w1 : {matrix}")
    lines.append("  QED fwd")
    lines.append("}")
    return "\n".join(lines) + "\n"


def generate(n: int, family: str = "fbpi") -> SpecFile:
    return parse(source(n, family))


def source(n: int, family: str = "fbpi") -> str:
    if family == "fbpi":
        return fbpi_source(n)
    if family == "fbi":
        return fbi_source(n)
    raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")
