"""Plain-text instance, plan and escape files.

Instance files come in two forms::

    grid R C            graph V E
    <R map rows>        <E lines "u v">
    agents n            agents n
    <n lines "sr sc gr gc">   <n lines "s g">
    [mode M]            [mode M]

Map rows use ``.`` for free and ``#`` for blocked cells. Escape files share
the headers but replace the agent section with ``evaders m`` followed by
``m`` cell lines (``r c`` or ``v``), then optionally ``exits k`` and ``k``
more cell lines.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .graph import GOAL_REPLACEMENT, MODES, UNLABELED, Graph, Instance, Plan, grid_graph, validate_instance


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class _Lines:
    """Cursor over non-blank lines, tokenised with 1-based columns."""

    def __init__(self, text: str):
        self.rows: List[Tuple[int, str]] = [
            (i + 1, raw.rstrip()) for i, raw in enumerate(text.splitlines()) if raw.strip()
        ]
        self.pos = 0

    def done(self) -> bool:
        return self.pos >= len(self.rows)

    def last_line(self) -> int:
        return self.rows[-1][0] + 1 if self.rows else 1

    def raw(self, what: str) -> Tuple[int, str]:
        if self.done():
            raise ParseError(f"unexpected end of file, expected {what}", self.last_line())
        row = self.rows[self.pos]
        self.pos += 1
        return row

    def peek_word(self) -> Optional[str]:
        if self.done():
            return None
        parts = self.rows[self.pos][1].split()
        return parts[0] if parts else None

    def tokens(self, what: str) -> Tuple[int, List[Tuple[str, int]]]:
        lineno, text = self.raw(what)
        out = []
        col = 0
        for word in text.split():
            col = text.index(word, col)
            out.append((word, col + 1))
            col += len(word)
        return lineno, out


def _ints(lineno: int, toks, count: int, what: str, keyword: Optional[str] = None) -> List[int]:
    if keyword is not None:
        if not toks or toks[0][0] != keyword:
            col = toks[0][1] if toks else 1
            raise ParseError(f"expected '{keyword}'", lineno, col)
        toks = toks[1:]
    if len(toks) != count:
        col = toks[count][1] if len(toks) > count else (toks[-1][1] if toks else 1)
        raise ParseError(f"expected {count} integers for {what}, found {len(toks)}", lineno, col)
    values = []
    for word, col in toks:
        try:
            values.append(int(word))
        except ValueError:
            raise ParseError(f"not an integer: {word!r}", lineno, col) from None
    return values


@dataclass(frozen=True)
class _Header:
    graph: Graph
    grid: bool


def _parse_graph(lines: _Lines) -> _Header:
    lineno, toks = lines.tokens("header")
    kind = toks[0][0] if toks else ""
    if kind == "grid":
        R, C = _ints(lineno, toks[1:], 2, "grid size")
        if R < 1 or C < 1:
            raise ParseError("grid size must be positive", lineno, toks[1][1])
        blocked = []
        for r in range(R):
            row_no, row = lines.raw(f"map row {r}")
            if len(row) != C:
                raise ParseError(f"map row has {len(row)} cells, expected {C}", row_no, min(len(row), C) + 1)
            for c, ch in enumerate(row):
                if ch == "#":
                    blocked.append((r, c))
                elif ch != ".":
                    raise ParseError(f"bad map character {ch!r}", row_no, c + 1)
        return _Header(grid_graph(R, C, blocked), True)
    if kind == "graph":
        V, E = _ints(lineno, toks[1:], 2, "graph size")
        if V < 1 or E < 0:
            raise ParseError("vertex count must be positive", lineno, toks[1][1])
        edges = []
        seen = set()
        for _ in range(E):
            eno, etoks = lines.tokens("edge")
            u, v = _ints(eno, etoks, 2, "edge")
            for x, (_, col) in zip((u, v), etoks):
                if not 0 <= x < V:
                    raise ParseError(f"vertex {x} out of range 0..{V - 1}", eno, col)
            if u == v:
                raise ParseError("self-loop", eno, etoks[0][1])
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ParseError(f"duplicate edge {u} {v}", eno, etoks[0][1])
            seen.add(key)
            edges.append((u, v))
        return _Header(Graph(V, tuple(edges)), False)
    raise ParseError("expected 'grid R C' or 'graph V E'", lineno, toks[0][1] if toks else 1)


def _cell(header: _Header, lineno: int, toks, what: str) -> int:
    """Read one vertex (``v``) or grid cell (``r c``) from ``toks``."""
    g = header.graph
    if header.grid:
        r, c = _ints(lineno, toks, 2, what)
        R, C = g.shape
        if not (0 <= r < R and 0 <= c < C):
            raise ParseError(f"{what} ({r}, {c}) is off the map", lineno, toks[0][1])
        try:
            return g.vertex_of((r, c))
        except KeyError:
            raise ParseError(f"{what} ({r}, {c}) is a blocked cell", lineno, toks[0][1]) from None
    (v,) = _ints(lineno, toks, 1, what)
    if not 0 <= v < g.vertex_count:
        raise ParseError(f"{what} vertex {v} out of range", lineno, toks[0][1])
    return v


def parse_instance(text: str) -> Instance:
    lines = _Lines(text)
    header = _parse_graph(lines)
    lineno, toks = lines.tokens("'agents n'")
    (n,) = _ints(lineno, toks, 1, "agent count", keyword="agents")
    if n < 1:
        raise ParseError("need at least one agent", lineno, toks[0][1])
    width = 2 if header.grid else 1
    starts, goals, where = [], [], []
    for _ in range(n):
        ano, atoks = lines.tokens("agent line")
        if len(atoks) != 2 * width:
            col = atoks[-1][1] if atoks else 1
            raise ParseError(f"expected {2 * width} integers per agent, found {len(atoks)}", ano, col)
        starts.append(_cell(header, ano, atoks[:width], "start"))
        goals.append(_cell(header, ano, atoks[width:], "goal"))
        where.append((ano, atoks))
    mode = UNLABELED
    if not lines.done():
        mno, mtoks = lines.tokens("mode")
        if len(mtoks) != 2 or mtoks[0][0] != "mode" or mtoks[1][0] not in MODES:
            raise ParseError(f"expected 'mode {'|'.join(MODES)}'", mno, mtoks[0][1])
        mode = mtoks[1][0]
    if not lines.done():
        lineno, _ = lines.raw("end")
        raise ParseError("trailing content", lineno)

    seen: Dict[int, int] = {}
    for i, s in enumerate(starts):
        if s in seen:
            ano, atoks = where[i]
            raise ParseError(f"duplicate start (also agent {seen[s]})", ano, atoks[0][1])
        seen[s] = i
    if mode != GOAL_REPLACEMENT:
        gseen: Dict[int, int] = {}
        for i, g in enumerate(goals):
            if g in gseen:
                ano, atoks = where[i]
                raise ParseError(f"duplicate goal (also agent {gseen[g]})", ano, atoks[width][1])
            gseen[g] = i
    for i, g in enumerate(goals):
        if g in seen:
            ano, atoks = where[i]
            raise ParseError(f"goal is the start of agent {seen[g]}", ano, atoks[width][1])

    inst = Instance(header.graph, tuple(starts), tuple(goals), mode)
    problems = validate_instance(inst)
    if problems:
        raise ParseError(problems[0], lines.last_line() - 1)
    return inst


def _cell_text(g: Graph, v: int, sep: str = " ") -> str:
    if g.coords is not None:
        r, c = g.coords[v]
        return f"{r}{sep}{c}"
    return str(v)


def _graph_lines(g: Graph) -> List[str]:
    if g.coords is not None and g.shape is not None:
        R, C = g.shape
        free = set(g.coords)
        rows = ["".join("." if (r, c) in free else "#" for c in range(C)) for r in range(R)]
        return [f"grid {R} {C}"] + rows
    return [f"graph {g.vertex_count} {g.edge_count}"] + [f"{u} {v}" for u, v in g.edges]


def format_instance(inst: Instance) -> str:
    g = inst.graph
    out = _graph_lines(g) + [f"agents {inst.n}"]
    out += [f"{_cell_text(g, s)} {_cell_text(g, t)}" for s, t in zip(inst.starts, inst.goals)]
    if inst.mode != UNLABELED:
        out.append(f"mode {inst.mode}")
    return "\n".join(out) + "\n"


def plan_footer(plan: Plan) -> str:
    return f"makespan {plan.makespan} total_distance {plan.total_distance} total_arrival {plan.total_arrival}"


def format_plan(g: Graph, plan: Plan) -> str:
    """Plan file text; rows are ordered by start vertex."""
    rows = sorted(plan.paths, key=lambda p: p[0])
    out = [f"plan {plan.n} {plan.horizon}"]
    out += [" ".join(_cell_text(g, v, ",") for v in p) for p in rows]
    out.append(plan_footer(plan))
    return "\n".join(out) + "\n"


def parse_plan(text: str, g: Graph) -> Tuple[Plan, Optional[Dict[str, int]]]:
    """Read a plan file; returns the plan and the footer values, if any."""
    lines = _Lines(text)
    lineno, toks = lines.tokens("'plan n T'")
    n, T = _ints(lineno, toks, 2, "plan size", keyword="plan")
    if n < 1 or T < 0:
        raise ParseError("plan size must be positive", lineno, toks[1][1])
    paths = []
    for _ in range(n):
        pno, ptoks = lines.tokens("path row")
        if len(ptoks) != T + 1:
            col = ptoks[-1][1] if ptoks else 1
            raise ParseError(f"expected {T + 1} positions, found {len(ptoks)}", pno, col)
        path = []
        for word, col in ptoks:
            path.append(_plan_vertex(g, word, pno, col))
        paths.append(tuple(path))
    footer = None
    if not lines.done():
        fno, ftoks = lines.tokens("footer")
        words = [w for w, _ in ftoks]
        keys = ["makespan", "total_distance", "total_arrival"]
        if len(words) != 6 or words[0::2] != keys:
            raise ParseError("expected 'makespan M total_distance D total_arrival S'", fno, ftoks[0][1])
        values = _ints(fno, ftoks[1::2], 3, "footer")
        footer = dict(zip(keys, values))
    if not lines.done():
        lineno, _ = lines.raw("end")
        raise ParseError("trailing content", lineno)
    return Plan(tuple(paths)), footer


def _plan_vertex(g: Graph, word: str, lineno: int, col: int) -> int:
    if "," in word:
        if g.coords is None:
            raise ParseError(f"cell {word!r} given for a graph without coordinates", lineno, col)
        try:
            r, c = (int(x) for x in word.split(","))
            return g.vertex_of((r, c))
        except (ValueError, KeyError):
            raise ParseError(f"not a free cell: {word!r}", lineno, col) from None
    try:
        v = int(word)
    except ValueError:
        raise ParseError(f"not a vertex: {word!r}", lineno, col) from None
    if not 0 <= v < g.vertex_count:
        raise ParseError(f"vertex {v} out of range", lineno, col)
    return v


@dataclass(frozen=True)
class EscapeSpec:
    graph: Graph
    evaders: Tuple[int, ...]
    exits: Optional[Tuple[int, ...]] = None


def _cell_list(lines: _Lines, header: _Header, keyword: str) -> Tuple[int, ...]:
    lineno, toks = lines.tokens(f"'{keyword} m'")
    (m,) = _ints(lineno, toks, 1, f"{keyword} count", keyword=keyword)
    if m < 0:
        raise ParseError("count must be non-negative", lineno, toks[1][1])
    cells = []
    for _ in range(m):
        cno, ctoks = lines.tokens(f"{keyword} line")
        v = _cell(header, cno, ctoks, keyword.rstrip("s"))
        if v in cells:
            raise ParseError(f"duplicate {keyword.rstrip('s')}", cno, ctoks[0][1])
        cells.append(v)
    return tuple(cells)


def parse_escape(text: str) -> EscapeSpec:
    lines = _Lines(text)
    header = _parse_graph(lines)
    evaders = _cell_list(lines, header, "evaders")
    exits = None
    if lines.peek_word() == "exits":
        exits = _cell_list(lines, header, "exits")
    if not lines.done():
        lineno, _ = lines.raw("end")
        raise ParseError("trailing content", lineno)
    return EscapeSpec(header.graph, evaders, exits)


def format_escape(spec: EscapeSpec) -> str:
    g = spec.graph
    out = _graph_lines(g) + [f"evaders {len(spec.evaders)}"]
    out += [_cell_text(g, v) for v in spec.evaders]
    if spec.exits is not None:
        out += [f"exits {len(spec.exits)}"] + [_cell_text(g, v) for v in spec.exits]
    return "\n".join(out) + "\n"


def format_paths(g: Graph, paths: Sequence[Sequence[int]]) -> str:
    return "\n".join(" ".join(_cell_text(g, v, ",") for v in p) for p in paths)
