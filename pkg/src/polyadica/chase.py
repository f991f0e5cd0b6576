"""Forward-chaining saturation with disjunctive branching.

A branch repairs one violated axiom instance at a time, oldest first. A
disjunctive head forks the branch, one child per disjunct; existential heads
add fresh elements; equations merge elements (union-find, relation tables
rewritten); a false head kills the branch. The finished tree doubles as a
Kripke model: disjunction and existentials may be forced through a covering
family of children, implication and universal quantification range over
descendants. Budget-truncated subtrees make forcing three-valued.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass

from .errors import ConsistencyError, InvalidInputError
from .structures import (
    FinStructure,
    PointedStructure,
    check_theory,
    evaluate,
    satisfies,
    structure_to_json,
)
from .theories import (
    And,
    Atom,
    Equal,
    Exists,
    Falsity,
    Forall,
    Formula,
    Implies,
    Or,
    Sequent,
    Theory,
    Truth,
    check_formula,
    free_vars,
    substitute,
)

OPEN = "open"
EXPANDED = "expanded"
SATURATED = "saturated"
INCONSISTENT = "inconsistent"
BUDGET = "budget-exhausted"

FORCED = "forced"
NOT_FORCED = "not-forced"
UNKNOWN = "unknown"


@dataclass(frozen=True)
class ChaseBudget:
    max_nodes: int = 500
    max_carrier: int = 16
    max_depth: int = 64

    def __post_init__(self):
        for field in ("max_nodes", "max_carrier", "max_depth"):
            if getattr(self, field) <= 0:
                raise InvalidInputError(f"{field} must be positive")


@dataclass(frozen=True)
class Obligation:
    """A violated axiom instance: axiom index plus context values."""
    axiom_index: int
    values: tuple[int, ...]


@dataclass(frozen=True)
class Disjunct:
    exist_vars: tuple[str, ...]
    atoms: tuple[Atom, ...]
    equations: tuple[tuple[str, str], ...]


def _rename_apart(f: Formula, taken: set[str]) -> Formula:
    if isinstance(f, Exists):
        v = f.var
        if v in taken:
            k = 2
            while f"{v}_{k}" in taken:
                k += 1
            v = f"{v}_{k}"
        taken.add(v)
        body = f.body if v == f.var else substitute(f.body, {f.var: v})
        return Exists(v, _rename_apart(body, taken))
    if isinstance(f, (And, Or)):
        return type(f)(_rename_apart(f.left, taken), _rename_apart(f.right, taken))
    return f


def _dnf(f: Formula):
    if isinstance(f, Truth):
        return [((), (), ())]
    if isinstance(f, Falsity):
        return []
    if isinstance(f, Atom):
        return [((), (f,), ())]
    if isinstance(f, Equal):
        return [((), (), ((f.left, f.right),))]
    if isinstance(f, Or):
        return _dnf(f.left) + _dnf(f.right)
    if isinstance(f, And):
        return [(lv + rv, la + ra, le + re)
                for lv, la, le in _dnf(f.left)
                for rv, ra, re in _dnf(f.right)]
    if isinstance(f, Exists):
        return [((f.var,) + v, a, e) for v, a, e in _dnf(f.body)]
    raise InvalidInputError("query connectives cannot appear in axiom heads")


def compile_rhs(rhs: Formula, context: tuple[str, ...]) -> tuple[Disjunct, ...]:
    """Disjunctive existential normal form; binders standardized apart first.
    An empty result means the head is unsatisfiable (false)."""
    g = _rename_apart(rhs, set(context) | set(free_vars(rhs)))
    return tuple(Disjunct(v, a, e) for v, a, e in _dnf(g))


class ChaseNode:
    __slots__ = ("index", "structure", "pending", "parent", "fired",
                 "disjunct_index", "elem_map", "depth", "status", "children")

    def __init__(self, structure, pending, parent=None, fired=None,
                 disjunct_index=None, elem_map=None, depth=0):
        self.index = -1
        self.structure = structure
        self.pending = tuple(pending)
        self.parent = parent
        self.fired = fired
        self.disjunct_index = disjunct_index
        self.elem_map = elem_map
        self.depth = depth
        self.status = OPEN
        self.children: list[ChaseNode] = []

    def __repr__(self) -> str:
        return (f"ChaseNode(index={self.index}, depth={self.depth}, "
                f"status={self.status!r}, carrier={self.structure.carrier})")


class ChaseTree:
    __slots__ = ("theory", "root", "nodes", "budget")

    def __init__(self, theory, root, nodes, budget):
        self.theory = theory
        self.root = root
        self.nodes = nodes
        self.budget = budget

    def leaves(self) -> list[ChaseNode]:
        return [n for n in self.nodes if not n.children]

    def saturated_leaves(self) -> list[ChaseNode]:
        return [n for n in self.nodes if n.status == SATURATED]


def _violations(t: Theory, s: FinStructure) -> list[Obligation]:
    out = []
    for i, ax in enumerate(t.axioms):
        for values in itertools.product(s.carrier, repeat=len(ax.context)):
            env = dict(zip(ax.context, values))
            if satisfies(s, ax.lhs, env) and not satisfies(s, ax.rhs, env):
                out.append(Obligation(i, values))
    return out


def _fire(node: ChaseNode, theory: Theory, ob: Obligation, di: int,
          d: Disjunct, env: dict[str, int], rest: list[Obligation]) -> ChaseNode:
    s = node.structure
    carrier = list(s.carrier)
    next_id = max(carrier) + 1 if carrier else 0
    env2 = dict(env)
    for v in d.exist_vars:
        env2[v] = next_id
        carrier.append(next_id)
        next_id += 1
    relations = {sym: set(s.relations[sym]) for sym in s.signature.symbols}
    for atom in d.atoms:
        relations[atom.symbol].add(tuple(env2[a] for a in atom.args))

    # union-find with least-id representatives
    uf = {e: e for e in carrier}

    def find(x):
        while uf[x] != x:
            uf[x] = uf[uf[x]]
            x = uf[x]
        return x

    for left, right in d.equations:
        a, b = find(env2[left]), find(env2[right])
        if a != b:
            uf[max(a, b)] = min(a, b)
    rep = {e: find(e) for e in carrier}

    new_relations = {sym: {tuple(rep[x] for x in tup) for tup in table}
                     for sym, table in relations.items()}
    child_structure = FinStructure(s.signature, sorted(set(rep.values())),
                                   new_relations)
    elem_map = {e: rep[e] for e in s.carrier}

    pending: list[Obligation] = []
    seen = set()
    for o in rest:
        o2 = Obligation(o.axiom_index, tuple(rep[v] for v in o.values))
        if o2 not in seen:
            seen.add(o2)
            pending.append(o2)
    for o in _violations(theory, child_structure):
        if o not in seen:
            seen.add(o)
            pending.append(o)
    return ChaseNode(child_structure, pending, parent=node, fired=ob,
                     disjunct_index=di, elem_map=elem_map, depth=node.depth + 1)


def chase_step(t: Theory, node: ChaseNode) -> list[ChaseNode]:
    """Fire the oldest still-violated obligation. Returns the children; an
    empty list means the node became a saturated or inconsistent leaf."""
    if node.children or node.status not in (OPEN,):
        raise InvalidInputError("node already expanded or closed")
    queue = deque(node.pending)
    while queue:
        ob = queue.popleft()
        ax = t.axioms[ob.axiom_index]
        env = dict(zip(ax.context, ob.values))
        if not satisfies(node.structure, ax.lhs, env) \
                or satisfies(node.structure, ax.rhs, env):
            continue  # stale: repaired by an earlier firing
        rest = list(queue)
        children = [_fire(node, t, ob, di, d, env, rest)
                    for di, d in enumerate(compile_rhs(ax.rhs, ax.context))]
        if not children:
            node.status = INCONSISTENT
            return []
        node.children.extend(children)
        node.status = EXPANDED
        return children
    node.status = SATURATED
    return []


def run_chase(t: Theory, start: FinStructure,
              budget: ChaseBudget = ChaseBudget()) -> ChaseTree:
    """Breadth-first saturation; FIFO obligations keep every branch fair."""
    if start.signature != t.signature:
        raise InvalidInputError("start structure is over the wrong signature")
    root = ChaseNode(start, _violations(t, start))
    root.index = 0
    nodes = [root]
    queue = deque([root])
    while queue:
        node = queue.popleft()
        if node.status != OPEN:
            continue
        if not node.pending:
            node.status = SATURATED
            continue
        if (len(nodes) >= budget.max_nodes
                or node.structure.n > budget.max_carrier
                or node.depth >= budget.max_depth):
            node.status = BUDGET
            continue
        for child in chase_step(t, node):
            child.index = len(nodes)
            nodes.append(child)
            queue.append(child)
    return ChaseTree(t, root, nodes, budget)


def tree_to_json(tree: ChaseTree) -> dict:
    nodes = []
    for n in tree.nodes:
        fired = None
        if n.fired is not None:
            ax = tree.theory.axioms[n.fired.axiom_index]
            fired = {"axiom": ax.name,
                     "assignment": dict(zip(ax.context, n.fired.values)),
                     "disjunct": n.disjunct_index}
        nodes.append({
            "id": n.index,
            "parent": None if n.parent is None else n.parent.index,
            "status": n.status,
            "depth": n.depth,
            "structure": structure_to_json(n.structure),
            "fired": fired,
            "children": [c.index for c in n.children],
        })
    b = tree.budget
    return {"budget": {"max_nodes": b.max_nodes, "max_carrier": b.max_carrier,
                       "max_depth": b.max_depth},
            "nodes": nodes}


# --- refutation --------------------------------------------------------------

@dataclass
class RefutationResult:
    verdict: str  # refuted | countermodel | unknown
    countermodel: PointedStructure | None
    tree: ChaseTree


def _transport(node: ChaseNode, e: int) -> int:
    chain = []
    cur = node
    while cur.parent is not None:
        chain.append(cur)
        cur = cur.parent
    for n in reversed(chain):
        e = n.elem_map[e]
    return e


def refute(t: Theory, s: Sequent, budget: ChaseBudget = ChaseBudget()) -> RefutationResult:
    """Chase the theory plus the sequent's premise on fresh constants plus a
    denial of its conclusion. Every branch dying refutes the denial, so the
    sequent is entailed; a saturated leaf is a verified countermodel; anything
    else is an honest unknown."""
    ctx = s.context
    start_name = "Start"
    k = 1
    while start_name in t.signature.arities:
        k += 1
        start_name = f"Start_{k}"
    sig2 = t.signature.extend(start_name, len(ctx))
    marker = Atom(start_name, ctx)
    extended = Theory(t.name + "+goal", sig2, t.axioms + (
        Sequent("_assume", ctx, marker, s.lhs),
        Sequent("_deny", ctx, And(marker, s.rhs), Falsity()),
    ))
    start = FinStructure(sig2, range(len(ctx)),
                         {start_name: {tuple(range(len(ctx)))}})
    tree = run_chase(extended, start, budget)

    for leaf in tree.nodes:
        if leaf.status != SATURATED:
            continue
        stripped = FinStructure(
            t.signature, leaf.structure.carrier,
            {sym: leaf.structure.relations[sym] for sym in t.signature.symbols})
        point = {v: _transport(leaf, i) for i, v in enumerate(ctx)}
        pointed = PointedStructure(stripped, point)
        if not evaluate(s.lhs, pointed) or evaluate(s.rhs, pointed) \
                or check_theory(t, stripped):
            raise ConsistencyError(
                "saturated leaf failed countermodel verification")
        return RefutationResult("countermodel", pointed, tree)
    if all(n.status in (INCONSISTENT, EXPANDED) for n in tree.nodes):
        return RefutationResult("refuted", None, tree)
    return RefutationResult("unknown", None, tree)


# --- Kripke forcing over the finished tree -----------------------------------

def _never_forced(f: Formula) -> bool:
    """Syntactic certificate that no consistent node can ever force f."""
    if isinstance(f, Falsity):
        return True
    if isinstance(f, And):
        return _never_forced(f.left) or _never_forced(f.right)
    if isinstance(f, Or):
        return _never_forced(f.left) and _never_forced(f.right)
    if isinstance(f, Exists):
        return _never_forced(f.body)
    return False


def _never_unforced(f: Formula) -> bool:
    """Syntactic certificate that every node forces f."""
    if isinstance(f, Truth):
        return True
    if isinstance(f, Equal):
        return f.left == f.right
    if isinstance(f, And):
        return _never_unforced(f.left) and _never_unforced(f.right)
    if isinstance(f, Or):
        return _never_unforced(f.left) or _never_unforced(f.right)
    if isinstance(f, Implies):
        return _never_forced(f.left) or _never_unforced(f.right)
    if isinstance(f, Forall):
        return _never_unforced(f.body)
    return False


def _or3_local(a: str, b: str) -> str:
    if FORCED in (a, b):
        return FORCED
    if a == NOT_FORCED and b == NOT_FORCED:
        return NOT_FORCED
    return UNKNOWN


class _Forcing:
    def __init__(self, tree: ChaseTree):
        self.tree = tree
        self.memo: dict = {}

    def force(self, node: ChaseNode, f: Formula, pt: dict[str, int]) -> str:
        key = (node.index, f, tuple(sorted(pt.items())))
        hit = self.memo.get(key)
        if hit is None:
            hit = self._force(node, f, pt)
            self.memo[key] = hit
        return hit

    def _force(self, node: ChaseNode, f: Formula, pt: dict) -> str:
        if node.status == INCONSISTENT:
            return FORCED
        if isinstance(f, Truth):
            return FORCED
        if isinstance(f, Falsity):
            return NOT_FORCED
        if isinstance(f, Atom):
            args = tuple(pt[v] for v in f.args)
            return FORCED if args in node.structure.relations[f.symbol] \
                else NOT_FORCED
        if isinstance(f, Equal):
            return FORCED if pt[f.left] == pt[f.right] else NOT_FORCED
        if isinstance(f, And):
            a = self.force(node, f.left, pt)
            b = self.force(node, f.right, pt)
            if a == FORCED and b == FORCED:
                return FORCED
            if NOT_FORCED in (a, b):
                return NOT_FORCED
            return UNKNOWN
        if isinstance(f, Or):
            local = _or3_local(self.force(node, f.left, pt),
                               self.force(node, f.right, pt))
            return self._covered(node, f, pt, local)
        if isinstance(f, Exists):
            results = [self.force(node, f.body, {**pt, f.var: e})
                       for e in node.structure.carrier]
            if FORCED in results:
                local = FORCED
            elif UNKNOWN in results:
                local = UNKNOWN
            else:
                local = NOT_FORCED
            return self._covered(node, f, pt, local)
        if isinstance(f, Implies):
            return self._implies(node, f, pt)
        if isinstance(f, Forall):
            return self._forall(node, f, pt)
        raise InvalidInputError(f"cannot force {type(f).__name__}")

    def _covered(self, node: ChaseNode, f: Formula, pt: dict, local: str) -> str:
        """Disjunctions and existentials may be settled by a covering family:
        forced once every child forces them."""
        if local == FORCED:
            return FORCED
        if node.children:
            results = [self.force(c, f, self._push(c, pt))
                       for c in node.children]
            if all(r == FORCED for r in results):
                return FORCED
            if local == UNKNOWN or UNKNOWN in results:
                return UNKNOWN
            return NOT_FORCED
        if node.status == SATURATED:
            return local
        return UNKNOWN  # truncated leaf: a completion could still cover it

    def _push(self, child: ChaseNode, pt: dict) -> dict:
        return {v: child.elem_map[e] for v, e in pt.items()}

    def _descendants(self, node: ChaseNode, pt: dict):
        yield node, pt
        for c in node.children:
            yield from self._descendants(c, self._push(c, pt))

    def _implies(self, node: ChaseNode, f: Formula, pt: dict) -> str:
        undecided = False
        for d, pt_d in self._descendants(node, pt):
            if d.status == INCONSISTENT:
                continue
            a = self.force(d, f.left, pt_d)
            b = self.force(d, f.right, pt_d)
            if a == FORCED and b == NOT_FORCED:
                return NOT_FORCED
            if not (a == NOT_FORCED or b == FORCED):
                undecided = True
            if d.status in (BUDGET, OPEN) and b != FORCED \
                    and not _never_forced(f.left):
                undecided = True
        return UNKNOWN if undecided else FORCED

    def _forall(self, node: ChaseNode, f: Formula, pt: dict) -> str:
        undecided = False
        for d, pt_d in self._descendants(node, pt):
            if d.status == INCONSISTENT:
                continue
            for e in d.structure.carrier:
                r = self.force(d, f.body, {**pt_d, f.var: e})
                if r == NOT_FORCED:
                    return NOT_FORCED
                if r == UNKNOWN:
                    undecided = True
            if d.status in (BUDGET, OPEN) and not _never_unforced(f.body):
                undecided = True
        return UNKNOWN if undecided else FORCED


def eval_kripke(tree: ChaseTree, node: ChaseNode, f: Formula,
                point: dict[str, int]) -> str:
    """Three-valued forcing at a node: forced and not-forced are claims about
    every completion of the tree; unknown blames a truncated subtree."""
    elems = set(node.structure.carrier)
    for v, e in point.items():
        if e not in elems:
            raise InvalidInputError(f"point sends {v!r} outside the carrier")
    check_formula(f, tree.theory.signature, set(point), extended=True)
    return _Forcing(tree).force(node, f, dict(point))
