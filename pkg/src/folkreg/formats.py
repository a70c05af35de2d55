"""Plain-text artifact formats. Rationals are written as ``num/den``.

Graph:      ``graph <n> <m>`` then m lines ``<u> <v>`` (u < v)
Host:       ``partite <p> <r> <s1> .. <sp>`` then lines ``<u> <v> <c>``
Partition:  ``partition p=.. k=.. style=exc|near epsilon=a/b q=a/b`` then
            ``part <s> class <i>: <ids>``; class 0 is the exceptional class
Pair:       ``pair <s> <i> <t> <j> color=<c> d=a/b verdict=R|I|P [witnessX=<hex> witnessY=<hex>]``
Reduced:    ``reduced p=.. k=.. colors=.. edges=..`` then
            ``edge <s> <i> <t> <j> d=a/b[,a/b..]``
Embedding:  ``map <u> -> <v> cluster <c>`` lines, or on failure
            ``fail step=<i> candidates=0 targets=<csv>``
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .graph import DenseGraph, GraphError, PartiteHost, VertexSet, frac_str
from .partition import Partition
from .regularity import PairStats, Verdict
from .turan import ReducedGraph


class ParseError(ValueError):
    def __init__(self, source: str, line: int, msg: str):
        super().__init__(f"{source}:{line}: {msg}")
        self.source, self.line = source, line


def _lines(text: str) -> list[str]:
    return text.split("\n")[:-1] if text.endswith("\n") else text.split("\n")


def _ints(tokens, source, lineno) -> list[int]:
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise ParseError(source, lineno, f"expected integers, got {' '.join(tokens)!r}") from None


def _kv(tokens: Iterable[str]) -> dict[str, str]:
    out = {}
    for tok in tokens:
        if "=" in tok:
            k, v = tok.split("=", 1)
            out[k] = v
    return out


# -- graphs -----------------------------------------------------------------


def format_graph(g: DenseGraph) -> str:
    edges = g.edges()
    return "".join([f"graph {g.n} {len(edges)}\n"] + [f"{u} {v}\n" for u, v in edges])


def parse_graph(text: str, source: str = "<graph>", start: int = 0) -> DenseGraph:
    lines = _lines(text)
    if start >= len(lines):
        raise ParseError(source, start + 1, "missing graph header")
    head = lines[start].split()
    if len(head) != 3 or head[0] != "graph":
        raise ParseError(source, start + 1, "expected 'graph <n> <m>'")
    n, m = _ints(head[1:], source, start + 1)
    edges = []
    for x in range(m):
        ln = start + 2 + x
        if ln - 1 >= len(lines):
            raise ParseError(source, ln, f"expected {m} edge lines, file ended")
        tok = lines[ln - 1].split()
        if len(tok) != 2:
            raise ParseError(source, ln, "expected '<u> <v>'")
        u, v = _ints(tok, source, ln)
        if not 0 <= u < v < n:
            raise ParseError(source, ln, f"edge ({u}, {v}) violates 0 <= u < v < {n}")
        edges.append((u, v))
    try:
        return DenseGraph(n, edges)
    except GraphError as exc:
        raise ParseError(source, start + 1, str(exc)) from None


# -- hosts ------------------------------------------------------------------


def format_host(host: PartiteHost) -> str:
    r = host.r if host.colors is not None else 1
    out = [f"partite {host.p} {r} " + " ".join(map(str, host.part_sizes)) + "\n"]
    for u, v in host.graph.edges():
        c = int(host.colors[u, v]) if host.colors is not None else 0
        out.append(f"{u} {v} {c}\n")
    return "".join(out)


def parse_host(text: str, source: str = "<host>") -> PartiteHost:
    lines = _lines(text)
    if not lines:
        raise ParseError(source, 1, "empty host file")
    head = lines[0].split()
    if len(head) < 3 or head[0] != "partite":
        raise ParseError(source, 1, "expected 'partite <p> <r> <s1> ... <sp>'")
    vals = _ints(head[1:], source, 1)
    p, r, sizes = vals[0], vals[1], vals[2:]
    if len(sizes) != p:
        raise ParseError(source, 1, f"header lists {len(sizes)} part sizes for p={p}")
    n = sum(sizes)
    adj = np.zeros((n, n), dtype=bool)
    colors = np.full((n, n), -1, dtype=np.int8)
    for ln, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        tok = line.split()
        if len(tok) != 3:
            raise ParseError(source, ln, "expected '<u> <v> <c>'")
        u, v, c = _ints(tok, source, ln)
        if not 0 <= u < v < n:
            raise ParseError(source, ln, f"edge ({u}, {v}) violates 0 <= u < v < {n}")
        if not 0 <= c < r:
            raise ParseError(source, ln, f"colour {c} outside 0..{r - 1}")
        if adj[u, v]:
            raise ParseError(source, ln, f"repeated edge ({u}, {v})")
        adj[u, v] = adj[v, u] = True
        colors[u, v] = colors[v, u] = c
    try:
        return PartiteHost(sizes, DenseGraph(n, adjacency=adj), colors, r)
    except GraphError as exc:
        raise ParseError(source, 1, str(exc)) from None


# -- partitions -------------------------------------------------------------


def format_partition(P: Partition, epsilon: Fraction, q: Fraction) -> str:
    out = [f"partition p={P.p} k={P.k} style={P.style} epsilon={frac_str(epsilon)} q={frac_str(q)}\n"]
    for s in range(P.p):
        first = 0 if P.style == "exc" else 1
        for i in range(first, P.k + 1):
            ids = " ".join(map(str, P.cls(s, i).indices.tolist()))
            out.append(f"part {s} class {i}: {ids}\n".replace(": \n", ":\n"))
    return "".join(out)


_PART_LINE = re.compile(r"^part (\d+) class (\d+):(.*)$")


def parse_partition(text: str, source: str = "<partition>", start: int = 0) -> tuple[Partition, dict]:
    """Returns the partition and the header fields (epsilon, q as Fractions)."""
    lines = _lines(text)
    if start >= len(lines) or not lines[start].startswith("partition "):
        raise ParseError(source, start + 1, "expected 'partition p=.. k=.. style=..' header")
    head = _kv(lines[start].split()[1:])
    try:
        p, k, style = int(head["p"]), int(head["k"]), head["style"]
        meta = {"epsilon": Fraction(head["epsilon"]), "q": Fraction(head["q"])}
    except (KeyError, ValueError) as exc:
        raise ParseError(source, start + 1, f"bad partition header: {exc}") from None
    if style not in ("exc", "near"):
        raise ParseError(source, start + 1, f"unknown style {style!r}")
    per_part = k + (1 if style == "exc" else 0)
    classes = [[None] * k for _ in range(p)]
    exc = [VertexSet() for _ in range(p)]
    for x in range(p * per_part):
        ln = start + 2 + x
        if ln - 1 >= len(lines):
            raise ParseError(source, ln, "partition ended early")
        mt = _PART_LINE.match(lines[ln - 1])
        if not mt:
            raise ParseError(source, ln, "expected 'part <s> class <i>: <ids>'")
        s, i = int(mt.group(1)), int(mt.group(2))
        ids = _ints(mt.group(3).split(), source, ln)
        if not (0 <= s < p and 0 <= i <= k) or (i == 0 and style != "exc"):
            raise ParseError(source, ln, f"class ({s}, {i}) out of range")
        if i == 0:
            exc[s] = VertexSet(ids)
        else:
            classes[s][i - 1] = VertexSet(ids)
    try:
        P = Partition(tuple(tuple(c) for c in classes), tuple(exc) if style == "exc" else None, style)
    except GraphError as exc_:
        raise ParseError(source, start + 1, str(exc_)) from None
    return P, meta


# -- pair lines -------------------------------------------------------------


def format_pair(key: tuple, st: PairStats) -> str:
    s, i, t, j, c = key
    c = 0 if c is None else c
    line = f"pair {s} {i} {t} {j} color={c} d={frac_str(st.density)} verdict={st.verdict.value}"
    if st.witness is not None:
        line += f" witnessX={st.witness[0].hex()} witnessY={st.witness[1].hex()}"
    return line


def parse_pair(line: str, source: str = "<pair>", lineno: int = 1) -> tuple[tuple, PairStats]:
    tok = line.split()
    if len(tok) < 8 or tok[0] != "pair":
        raise ParseError(source, lineno, "expected a 'pair ...' line")
    s, i, t, j = _ints(tok[1:5], source, lineno)
    kv = _kv(tok[5:])
    try:
        verdict = Verdict(kv["verdict"])
        d = Fraction(kv["d"])
        c = int(kv["color"])
        witness = None
        if "witnessX" in kv:
            witness = (VertexSet.from_mask(int(kv["witnessX"], 16)), VertexSet.from_mask(int(kv["witnessY"], 16)))
    except (KeyError, ValueError) as exc:
        raise ParseError(source, lineno, f"bad pair line: {exc}") from None
    return (s, i, t, j, c), PairStats(d, verdict, witness)


# -- reduced graphs ---------------------------------------------------------


def format_reduced(F: ReducedGraph, ncolors: int) -> str:
    out = [f"reduced p={F.p} k={F.k} colors={ncolors} edges={F.edge_count}\n"]
    for (u, v) in F.edges():
        ds = ",".join(frac_str(d) for d in F.label(u, v)["densities"])
        out.append(f"edge {u[0]} {u[1]} {v[0]} {v[1]} d={ds}\n")
    return "".join(out)


def parse_reduced(text: str, source: str = "<reduced>", start: int = 0) -> ReducedGraph:
    lines = _lines(text)
    if start >= len(lines) or not lines[start].startswith("reduced "):
        raise ParseError(source, start + 1, "expected 'reduced p=.. k=..' header")
    head = _kv(lines[start].split()[1:])
    try:
        F = ReducedGraph(int(head["p"]), int(head["k"]))
        m = int(head["edges"])
    except (KeyError, ValueError) as exc:
        raise ParseError(source, start + 1, f"bad reduced header: {exc}") from None
    for x in range(m):
        ln = start + 2 + x
        if ln - 1 >= len(lines):
            raise ParseError(source, ln, "reduced graph ended early")
        tok = lines[ln - 1].split()
        if len(tok) != 6 or tok[0] != "edge" or not tok[5].startswith("d="):
            raise ParseError(source, ln, "expected 'edge <s> <i> <t> <j> d=..'")
        s, i, t, j = _ints(tok[1:5], source, ln)
        raw = tok[5][2:]
        try:
            ds = [Fraction(x) for x in raw.split(",")] if raw else []
            F.add_edge((s, i), (t, j), ds, True)
        except ValueError as exc:
            raise ParseError(source, ln, str(exc)) from None
    return F


# -- embeddings -------------------------------------------------------------


def format_embedding(images, phi) -> str:
    return "".join(f"map {u} -> {v} cluster {phi[u]}\n" for u, v in enumerate(images))


def format_failure(trace) -> str:
    return f"fail step={trace.step} candidates=0 targets={','.join(map(str, trace.target_sizes))}\n"


_MAP_LINE = re.compile(r"^map (\d+) -> (\d+) cluster (\d+)$")


def parse_embedding(text: str, source: str = "<embedding>") -> tuple[list[int], list[int]]:
    """(images, cluster ids) from every ``map`` line, in target-vertex order."""
    found = {}
    for ln, line in enumerate(_lines(text), start=1):
        if not line.startswith("map "):
            continue
        mt = _MAP_LINE.match(line.strip())
        if not mt:
            raise ParseError(source, ln, "expected 'map <u> -> <v> cluster <c>'")
        u, v, c = (int(g) for g in mt.groups())
        if u in found:
            raise ParseError(source, ln, f"vertex {u} mapped twice")
        found[u] = (v, c)
    if sorted(found) != list(range(len(found))):
        raise ParseError(source, 1, "map lines do not cover 0..n-1")
    return [found[u][0] for u in range(len(found))], [found[u][1] for u in range(len(found))]


# -- pipeline reports -------------------------------------------------------


def format_report(rep, timings: bool = True) -> str:
    cfg = rep.config
    out = [
        f"folkman p={cfg.p} r={cfg.r} delta={cfg.delta} part_size={cfg.part_size} "
        f"epsilon={frac_str(cfg.epsilon)} m={cfg.m} mode={cfg.mode} seed={cfg.seed}\n",
        "target\n",
        format_graph(rep.target),
    ]
    for stage in rep.stages:
        ms = stage.ms if timings else 0
        status = "ok" if stage.ok else "fail"
        out.append(f"stage {stage.name} status={status} ms={ms}\n")
        if stage.message:
            out.append(f"note {stage.message}\n")
        out.append(_stage_payload(rep, stage))
    status = "ok" if rep.verified else "fail"
    color = rep.color if rep.color is not None else -1
    out.append(f"result status={status} color={color} verified={'true' if rep.verified else 'false'}\n")
    return "".join(out)


def _stage_payload(rep, stage) -> str:
    name = stage.name
    if name == "partition" and rep.partition is not None:
        rf = rep.refinement
        qh = ",".join(frac_str(q) for q in rf.q_history)
        head = (
            f"refinement rounds={rf.rounds} regular={'true' if rf.regular else 'false'} final_k={rf.final_k} "
            f"irregular={','.join(map(str, rf.irregular_pair_count))} q_history={qh}\n"
        )
        return head + format_partition(rep.partition, rep.config.epsilon, rf.q_history[-1])
    if name == "absorb" and rep.absorbed is not None:
        return format_partition(rep.absorbed, rep.config.epsilon, rep.absorbed_q)
    if name == "reduce" and rep.reduced is not None:
        return format_reduced(rep.reduced, rep.config.r)
    if name == "clique" and stage.ok and rep.clique is not None:
        return "clique " + " ".join(f"{s}:{i}" for s, i in rep.clique) + "\n"
    if name == "ramsey" and stage.ok and rep.mono_nodes is not None:
        return f"mono color={rep.color} nodes=" + ",".join(f"{s}:{i}" for s, i in rep.mono_nodes) + "\n"
    if name == "coloring" and rep.target_graph is not None:
        return "phi " + " ".join(map(str, rep.target_graph.phi)) + "\n"
    if name == "embed":
        lines = []
        if rep.clusters is not None:
            for c, cl in enumerate(rep.clusters):
                lines.append(f"cluster {c}: " + " ".join(map(str, cl.indices.tolist())) + "\n")
        if stage.ok and rep.embedding is not None:
            lines.append(format_embedding(rep.embedding.images, rep.target_graph.phi))
        elif rep.failure is not None:
            lines.append(format_failure(rep.failure))
        return "".join(lines)
    return ""


@dataclass
class ParsedReport:
    target: DenseGraph
    color: Optional[int]
    clusters: list[VertexSet]
    images: Optional[list[int]]
    cluster_ids: Optional[list[int]]
    status: str


def parse_report(text: str, source: str = "<report>") -> ParsedReport:
    """Pull out what ``verify`` needs: target, colour, clusters, map lines."""
    lines = _lines(text)
    if not lines or not lines[0].startswith("folkman "):
        raise ParseError(source, 1, "not a folkman report")
    try:
        gi = lines.index("target") + 1
    except ValueError:
        raise ParseError(source, 1, "report has no target graph") from None
    target = parse_graph(text, source, gi)
    color, status = None, "fail"
    clusters: dict[int, VertexSet] = {}
    for ln, line in enumerate(lines, start=1):
        if line.startswith("cluster "):
            head, _, ids = line.partition(":")
            clusters[int(head.split()[1])] = VertexSet(_ints(ids.split(), source, ln))
        elif line.startswith("result "):
            kv = _kv(line.split()[1:])
            status = kv.get("status", "fail")
            c = int(kv.get("color", "-1"))
            color = c if c >= 0 else None
    images = ids = None
    if any(line.startswith("map ") for line in lines):
        images, ids = parse_embedding(text, source)
    return ParsedReport(target, color, [clusters[c] for c in sorted(clusters)], images, ids, status)


def read_text(path) -> str:
    return Path(path).read_text()


def write_text(path, text: str) -> None:
    Path(path).write_text(text)
