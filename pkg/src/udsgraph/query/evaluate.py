"""Backtracking evaluation of parsed queries over a TripleView.

A group's triple patterns are joined in textual order, then its unions in
order, each branch continuing under the bindings made so far. A filter
is checked as soon as all of its variables are bound. One still waiting
once every pattern has been matched is checked then, with comparisons on
unbound variables false (so ``?x > 0 || ?y > 0`` can hold with ?x unbound).
"""

from __future__ import annotations

from typing import Iterator

from .parser import BoolOp, Comparison, Group, Iri, Literal, Query, TriplePattern, Var
from .triples import Resource, Term, TripleView, term_key

Binding = dict[str, Term]


class QueryTypeError(TypeError):
    pass


def _candidates(node, binding: Binding) -> list[Term] | None:
    """Terms a pattern position can take, or None when it is a free variable."""
    if isinstance(node, Var):
        if node.name in binding:
            return [binding[node.name]]
        return None
    if isinstance(node, Iri):
        return [Resource(node.value), node.value]
    return [node.value]


def _textual(t) -> bool:
    return isinstance(t, (Resource, str))


def _value(node, binding: Binding):
    if isinstance(node, Var):
        return binding.get(node.name)
    if isinstance(node, Iri):
        return Resource(node.value)
    return node.value


def _compare(op: str, a, b, expr: Comparison) -> bool:
    if _textual(a) and _textual(b):
        a, b = str(a), str(b)
    elif _textual(a) or _textual(b):
        names = [f"?{n.name}" for n in (expr.left, expr.right) if isinstance(n, Var)]
        raise QueryTypeError(
            f"cannot compare {a!r} with {b!r} in filter on {', '.join(names) or 'constants'}"
        )
    if op == "=":
        return a == b
    if op == "!=":
        return a != b
    if op == "<":
        return a < b
    if op == ">":
        return a > b
    if op == "<=":
        return a <= b
    return a >= b


def filter_holds(expr, binding: Binding) -> bool:
    """Truth of a filter under a binding; unbound variables make a comparison false."""
    if isinstance(expr, BoolOp):
        results = (filter_holds(e, binding) for e in expr.operands)
        return all(results) if expr.op == "&&" else any(results)
    a, b = _value(expr.left, binding), _value(expr.right, binding)
    if a is None or b is None:
        return False
    return _compare(expr.op, a, b, expr)


def _match(view: TripleView, pattern: TriplePattern, binding: Binding) -> Iterator[Binding]:
    s, p, o = (_candidates(n, binding) for n in (pattern.subject, pattern.predicate, pattern.object))
    nodes = (pattern.subject, pattern.predicate, pattern.object)
    for cs in s or [None]:
        for cp in p or [None]:
            for co in o or [None]:
                for t in view.match(cs, cp, co):
                    new = dict(binding)
                    ok = True
                    for node, value in zip(nodes, t):
                        if isinstance(node, Var):
                            prev = new.get(node.name)
                            if prev is None:
                                new[node.name] = value
                            elif not (type(prev) is type(value) and prev == value):
                                ok = False
                                break
                    if ok:
                        yield new


def _goals(group: Group) -> tuple:
    return tuple(group.patterns) + tuple(("union", b) for b in group.unions)


def _solve(view: TripleView, goals: tuple, binding: Binding, pending: tuple) -> Iterator[Binding]:
    waiting = []
    for f in pending:
        if f.variables() <= binding.keys():
            if not filter_holds(f, binding):
                return
        else:
            waiting.append(f)
    pending = tuple(waiting)
    if not goals:
        if all(filter_holds(f, binding) for f in pending):
            yield binding
        return
    goal, rest = goals[0], goals[1:]
    if isinstance(goal, TriplePattern):
        for new in _match(view, goal, binding):
            yield from _solve(view, rest, new, pending)
        return
    for branch in goal[1]:
        yield from _solve(view, _goals(branch) + rest, binding, pending + tuple(branch.filters))


def solutions(q: Query, view: TripleView) -> Iterator[Binding]:
    """Full bindings (all variables), in join order."""
    return _solve(view, _goals(q.where), {}, tuple(q.where.filters))


def evaluate(q: Query, view: TripleView, distinct: bool = False) -> list[dict[str, Term | None]]:
    """Rows of the selected variables, sorted; duplicates kept unless ``distinct``."""
    rows = [tuple(b.get(v) for v in q.variables) for b in solutions(q, view)]
    rows.sort(key=lambda r: tuple(term_key(t) for t in r))
    if distinct:
        deduped = []
        for r in rows:
            if not deduped or deduped[-1] != r:
                deduped.append(r)
        rows = deduped
    return [dict(zip(q.variables, r)) for r in rows]


def format_term(t: Term | None) -> str:
    if t is None:
        return ""
    if isinstance(t, float):
        return repr(t)
    return str(t).replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n")


def to_tsv(q: Query, rows: list[dict]) -> str:
    lines = ["\t".join(f"?{v}" for v in q.variables)]
    lines += ["\t".join(format_term(r[v]) for v in q.variables) for r in rows]
    return "\n".join(lines) + "\n"
