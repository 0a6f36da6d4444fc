"""Opened diagrams of generalized eights.

A diagram is a multi-curve beta (the components) with r bars.  Bar j runs
from its origin ``o_j`` to its terminus ``t_j``; each endpoint sits on one
side (``L`` or ``R``) of a component, and each component lists its endpoints
in cyclic order along its orientation.

Labels are pairs ``(j, s)`` with ``s`` in {+1, -1}.  ``(j, +1)`` labels the
terminus of bar j and ``(j, -1)`` its origin.  Travelling along the loop, one
crosses a bar and lands on the endpoint with the corresponding label, then
follows beta to the next endpoint.  There the next bar is entered forwards
(from an origin) or backwards (from a terminus).  This defines the
permutation ``sigma`` of the 2r labels.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

Label = Tuple[int, int]

ORIGIN, TERMINUS = "origin", "terminus"
LEFT, RIGHT = "L", "R"


class DiagramError(ValueError):
    """Invalid or inconsistent diagram data."""


def label_str(q: Label) -> str:
    return f"{q[0]}{'+' if q[1] > 0 else '-'}"


def parse_label(s) -> Label:
    if isinstance(s, (list, tuple)) and len(s) == 2:
        j, sg = s
        sg = {"+": 1, "-": -1, 1: 1, -1: -1}.get(sg)
        if sg is None:
            raise DiagramError(f"bad label {s!r}")
        return int(j), sg
    s = str(s).strip()
    if len(s) < 2 or s[-1] not in "+-" or not s[:-1].isdigit():
        raise DiagramError(f"bad label {s!r}; expected e.g. '3+'")
    return int(s[:-1]), (1 if s[-1] == "+" else -1)


def all_labels(r: int) -> List[Label]:
    """Canonical order (1,+), (1,-), (2,+), ..."""
    return [(j, s) for j in range(1, r + 1) for s in (1, -1)]


@dataclass(frozen=True)
class Endpoint:
    bar: int
    role: str
    side: str

    @property
    def label(self) -> Label:
        return (self.bar, 1 if self.role == TERMINUS else -1)

    @property
    def start_label(self) -> Label:
        # leaving through this endpoint: forwards from an origin, backwards from a terminus
        return (self.bar, 1 if self.role == ORIGIN else -1)


@dataclass(frozen=True)
class Component:
    id: str
    attachments: Tuple[Endpoint, ...]


@dataclass(frozen=True)
class FillingSignature:
    g: int
    n: int

    def __iter__(self):
        return iter((self.g, self.n))


@dataclass(frozen=True)
class Diagram:
    r: int
    components: Tuple[Component, ...]
    sigma: Optional[Dict[Label, Label]] = None
    signs: Optional[Dict[Label, int]] = None
    name: str = ""
    _validated: bool = field(default=False, compare=False, repr=False)

    @property
    def component_ids(self) -> List[str]:
        return [c.id for c in self.components]

    def component(self, cid: str) -> Component:
        for c in self.components:
            if c.id == cid:
                return c
        raise DiagramError(f"unknown component id {cid!r}")

    def endpoints(self):
        """Yield ``(component_id, position, Endpoint)``."""
        for c in self.components:
            for i, e in enumerate(c.attachments):
                yield c.id, i, e

    def cycles(self) -> List[List[Label]]:
        """Cycles of sigma, each starting from its smallest label in canonical order."""
        order = {q: i for i, q in enumerate(all_labels(self.r))}
        seen, out = set(), []
        for q in all_labels(self.r):
            if q in seen:
                continue
            cyc = [q]
            seen.add(q)
            nxt = self.sigma[q]
            while nxt != q:
                cyc.append(nxt)
                seen.add(nxt)
                nxt = self.sigma[nxt]
            out.append(cyc)
        out.sort(key=lambda c: order[c[0]])
        return out

    @property
    def num_loops(self) -> int:
        return len(self.cycles())


def derive_sigma(components) -> Dict[Label, Label]:
    """sigma(label(e)) = start label of the endpoint following e along beta."""
    sigma = {}
    for c in components:
        k = len(c.attachments)
        for i, e in enumerate(c.attachments):
            sigma[e.label] = c.attachments[(i + 1) % k].start_label
    return sigma


def validate(d: Diagram) -> Diagram:
    """Check all structural invariants; return a validated copy with sigma and signs filled in."""
    if d.r < 0:
        raise DiagramError("r must be non-negative")
    if not d.components:
        raise DiagramError("diagram has no components")
    ids = [c.id for c in d.components]
    if len(set(ids)) != len(ids):
        raise DiagramError("duplicate component id")
    if d.r == 0:
        if len(d.components) != 1 or d.components[0].attachments:
            raise DiagramError("r = 0 requires a single component without attachments")
        return Diagram(0, d.components, {}, {}, d.name, True)

    seen: Dict[Label, str] = {}
    for c in d.components:
        if not c.attachments:
            raise DiagramError(f"component {c.id!r} has no attachments")
        for e in c.attachments:
            if e.role not in (ORIGIN, TERMINUS):
                raise DiagramError(f"bar {e.bar}: bad role {e.role!r}")
            if e.side not in (LEFT, RIGHT):
                raise DiagramError(f"bar {e.bar}: bad side {e.side!r}")
            if not 1 <= e.bar <= d.r:
                raise DiagramError(f"bar index {e.bar} outside 1..{d.r}")
            if e.label in seen:
                raise DiagramError(f"bar {e.bar}: {e.role} appears twice")
            seen[e.label] = c.id
    for q in all_labels(d.r):
        if q not in seen:
            role = TERMINUS if q[1] > 0 else ORIGIN
            raise DiagramError(f"bar {q[0]}: missing {role} endpoint")

    if not _connected(d.components, seen):
        raise DiagramError("diagram is disconnected: bars do not join all components")

    sigma = derive_sigma(d.components)
    if d.sigma is not None:
        for q in all_labels(d.r):
            if d.sigma.get(q) != sigma[q]:
                raise DiagramError(f"broken cycle at label {label_str(q)}: sigma gives "
                                   f"{label_str(d.sigma[q]) if q in d.sigma else 'nothing'}, "
                                   f"attachments give {label_str(sigma[q])}")
        if len(d.sigma) != 2 * d.r:
            raise DiagramError("sigma has labels outside the bar set")
    signs = {q: q[1] for q in all_labels(d.r)}
    if d.signs is not None:
        for j in range(1, d.r + 1):
            got = sorted(d.signs.get((j, s), 0) for s in (1, -1))
            if got != [-1, 1]:
                raise DiagramError(f"sign imbalance on bar {j}")
        for q, s in d.signs.items():
            if s != q[1]:
                raise DiagramError(f"sign of label {label_str(q)} disagrees with its endpoint role")
    out = Diagram(d.r, d.components, sigma, signs, d.name, True)
    filling_signature(out)
    return out


def _connected(components, owner: Dict[Label, str]) -> bool:
    parent = {c.id: c.id for c in components}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for (j, s), cid in owner.items():
        if s > 0:
            parent[find(cid)] = find(owner[(j, -1)])
    return len({find(c.id) for c in components}) == 1


def _require(d: Diagram):
    if not d._validated:
        raise DiagramError("diagram must be validated first")


def relabel(d: Diagram, q0: Label = (1, 1)) -> List[Tuple[int, int]]:
    """Bars and signs ``(j_k, eps_k)`` along the loop through ``q0``, starting at ``q0``."""
    _require(d)
    q0 = parse_label(q0) if not isinstance(q0, tuple) else q0
    if q0 not in d.sigma:
        raise DiagramError(f"unknown label {q0}")
    seq = [q0]
    q = d.sigma[q0]
    while q != q0:
        seq.append(q)
        q = d.sigma[q]
    return [(j, d.signs[(j, s)]) for j, s in seq]


def loop_labels(d: Diagram, q0: Label = (1, 1)) -> List[Label]:
    return [(j, s) for j, s in relabel(d, q0)]


def boundary_cycles(d: Diagram) -> Tuple[List[List[Tuple[str, int]]], int]:
    """Boundary components of the ribbon surface built from beta and the bars.

    Each component is an annulus with a right and a left boundary circle;
    the right one runs along beta, the left one against it.  Returns the
    cycles through band attachments (as (component, position) lists) and the
    number of side circles carrying no bands.
    """
    where = {}
    for cid, i, e in d.endpoints():
        where[e.label] = (cid, i, e)
    comp = {c.id: c for c in d.components}

    def next_on_side(cid, i, side):
        atts = comp[cid].attachments
        k = len(atts)
        step = 1 if side == RIGHT else -1
        for t in range(1, k + 1):
            jdx = (i + step * t) % k
            if atts[jdx].side == side:
                return jdx
        raise AssertionError("unreachable")

    def phi(cid, i):
        e = comp[cid].attachments[i]
        nj = next_on_side(cid, i, e.side)
        nxt = comp[cid].attachments[nj]
        pc, pi_, _ = where[(nxt.bar, -nxt.label[1])]
        return pc, pi_

    seen, cycles = set(), []
    for cid, i, _ in d.endpoints():
        if (cid, i) in seen:
            continue
        cyc, cur = [], (cid, i)
        while cur not in seen:
            seen.add(cur)
            cyc.append(cur)
            cur = phi(*cur)
        cycles.append(cyc)
    empty = 0
    for c in d.components:
        for side in (LEFT, RIGHT):
            if not any(e.side == side for e in c.attachments):
                empty += 1
    return cycles, empty


def filling_signature(d: Diagram) -> FillingSignature:
    """Signature (g_S, n_S) of the filled surface; 2 g_S - 2 + n_S = r."""
    cycles, empty = boundary_cycles(d)
    n = len(cycles) + empty
    twice_g = d.r + 2 - n
    if twice_g < 0 or twice_g % 2:
        raise DiagramError(f"inconsistent orientation data: {n} boundary components with r = {d.r}")
    return FillingSignature(twice_g // 2, n)


def theta_support(d: Diagram, cid: str) -> List[Label]:
    """Labels of endpoints on component ``cid``; y_cid is the sum of their thetas."""
    _require(d)
    return [e.label for e in d.component(cid).attachments]


# -- serialization ----------------------------------------------------------

def from_dict(doc: dict, check: bool = True) -> Diagram:
    try:
        r = int(doc["r"])
        comps = []
        for c in doc["components"]:
            atts = tuple(Endpoint(int(a["bar"]), str(a["role"]), str(a["side"]))
                         for a in c["attachments"])
            comps.append(Component(str(c["id"]), atts))
    except (KeyError, TypeError, ValueError) as exc:
        raise DiagramError(f"malformed diagram document: {exc}") from None
    sigma = None
    if doc.get("sigma") is not None:
        sigma = {}
        for cyc in doc["sigma"]:
            labels = [parse_label(s) for s in cyc]
            for a, b in zip(labels, labels[1:] + labels[:1]):
                if a in sigma:
                    raise DiagramError(f"label {label_str(a)} repeated in sigma")
                sigma[a] = b
    signs = None
    if doc.get("signs") is not None:
        signs = {parse_label(k): (1 if v in ("+", 1) else -1) for k, v in doc["signs"].items()}
    d = Diagram(r, tuple(comps), sigma, signs, str(doc.get("name", "")))
    return validate(d) if check else d


def to_dict(d: Diagram) -> dict:
    out = {"name": d.name, "r": d.r, "components": [
        {"id": c.id, "attachments": [{"bar": e.bar, "role": e.role, "side": e.side}
                                     for e in c.attachments]}
        for c in d.components]}
    if d.sigma is not None:
        out["sigma"] = [[label_str(q) for q in cyc] for cyc in d.cycles()]
    if d.signs is not None:
        out["signs"] = {label_str(q): "+" if d.signs[q] > 0 else "-" for q in all_labels(d.r)}
    return out


def loads(text: str) -> Diagram:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DiagramError(f"parse error at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return from_dict(doc)


def dumps(d: Diagram) -> str:
    return json.dumps(to_dict(d), indent=1) + "\n"


def read(path) -> Diagram:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def build(r: int, layout: Dict[str, List[str]], name: str = "") -> Diagram:
    """Shorthand constructor: ``layout`` maps component ids to tokens like
    ``'o1R'`` (origin of bar 1 on the right side) or ``'t2L'``."""
    comps = []
    for cid, toks in layout.items():
        atts = []
        for tok in toks:
            role = {"o": ORIGIN, "t": TERMINUS}[tok[0]]
            atts.append(Endpoint(int(tok[1:-1]), role, tok[-1]))
        comps.append(Component(cid, tuple(atts)))
    return validate(Diagram(r, tuple(comps), name=name))


# Reference diagrams.  Origins sit on the right of beta, termini on the left.
FIGURE_EIGHT = {"A": ["o1R"], "B": ["t1L"]}
ONCE_HOLED_TORUS = {"A": ["o1R", "t1L"]}
THREE_BAR = {"A": ["o1R"], "B": ["o2R"], "C": ["o3R"], "D": ["t1L", "t2L", "t3L"]}
CHAIN2 = {"A": ["o1R"], "B": ["t1L", "o2R"], "C": ["t2L"]}
CHAIN4 = {"A": ["o1R"], "B": ["t1L", "o2R"], "C": ["t2L", "o3R"], "D": ["t3L", "o4R"], "E": ["t4L"]}
SIMPLE_LOOP = {"A": []}

CATALOG = {
    "figure-eight": (1, FIGURE_EIGHT),
    "once-holed-torus": (1, ONCE_HOLED_TORUS),
    "chain-2": (2, CHAIN2),
    "three-bar": (3, THREE_BAR),
    "chain-4": (4, CHAIN4),
    "simple-loop": (0, SIMPLE_LOOP),
}


def catalog(name: str) -> Diagram:
    if name not in CATALOG:
        raise DiagramError(f"unknown diagram {name!r}; known: {', '.join(CATALOG)}")
    r, layout = CATALOG[name]
    return build(r, layout, name)
