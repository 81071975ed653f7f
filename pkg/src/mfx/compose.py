"""Transducer decompositions and compositions.

The binary-tree side of the theory lives entirely inside the ordinary
rule representation here: a binary tree, first-child/next-sibling
encoded, *is* a forest, so a "macro/top-down tree transducer" is just a
transducer whose right-hand sides are tree shaped (:func:`mfx.mft.is_tree_rhs`).

* :func:`decompose_eval` replaces concatenation in right-hand sides by the
  reserved binary symbol ``@`` (making them tree shaped);
  :func:`recompose_eval` removes ``@`` again.
* :func:`eval_mtt` is the concatenation interpreter as a two-state
  transducer with one accumulating right-context parameter; it has rules
  only for ``@``, the default case and the empty forest.
* :func:`ft_to_mtt` rewrites a parameter-free transducer into tree shape
  by threading a continuation parameter ("the rest of my output").
* The composition constructions pair states of the second transducer with
  the rules of the first: ``(q,p)`` enters a walker that runs the second
  transducer over the first one's right-hand side node by node, using stay
  moves, so composed rules stay small (no exponential blow-up).  Alphabet
  completion first specialises the first transducer's default rules for
  every symbol the second one distinguishes (plus a text-guard copy when
  the second has text rules), so a default rule never hides a label the
  walker would need to know.

Sizes are tracked in a :class:`CompositionReport` so the
O(|Σ| |M1| |M2|) bounds can be checked empirically.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .forest import CONCAT, NodeKind
from .mft import (Call, DEFAULT, EPS, Guard, Mft, Node, Param, Rhs, Rule,
                  TEXT, is_tree_rhs, size, validate)


# ---------------------------------------------------------------------------
# eval decomposition
# ---------------------------------------------------------------------------


def _decompose_item(it) -> object:
    if isinstance(it, Node):
        return Node(it.label, it.kind, decompose_rhs(it.children))
    if isinstance(it, Call):
        return Call(it.state, it.var, tuple(decompose_rhs(a) for a in it.args))
    return it


def decompose_rhs(rhs: Rhs) -> Rhs:
    """Tree-shape an rhs by spending one ``@`` per concatenation."""
    if len(rhs) <= 1:
        return tuple(_decompose_item(it) for it in rhs)
    head = _decompose_item(rhs[0])
    return (Node(CONCAT, NodeKind.ELEMENT, (head,)),) + decompose_rhs(rhs[1:])


def decompose_eval(m: Mft) -> Mft:
    """An equivalent-up-to-eval transducer with tree-shaped right-hand
    sides: running it and then interpreting ``@`` as concatenation gives
    the original's output."""
    rules = {k: Rule(r.state, r.guard, decompose_rhs(r.rhs))
             for k, r in m.rules.items()}
    return Mft(m.states, m.sigma, m.initial, rules)


def recompose_rhs(rhs: Rhs) -> Rhs:
    out: List = []
    for it in rhs:
        if isinstance(it, Node):
            kids = recompose_rhs(it.children)
            if it.label == CONCAT:
                out.extend(kids)
            else:
                out.append(Node(it.label, it.kind, kids))
        elif isinstance(it, Call):
            out.append(Call(it.state, it.var,
                            tuple(recompose_rhs(a) for a in it.args)))
        else:
            out.append(it)
    return tuple(out)


def recompose_eval(m: Mft) -> Mft:
    """Remove all ``@`` output symbols, interpreting them as concatenation."""
    rules = {k: Rule(r.state, r.guard, recompose_rhs(r.rhs))
             for k, r in m.rules.items()}
    return Mft(m.states, m.sigma - {CONCAT}, m.initial, rules)


def eval_mtt() -> Mft:
    """The concatenation interpreter: one rank-2 state carrying the right
    context, with only an ``@`` rule, a default rule and an eps rule."""
    e0, e = "e0", "e"
    y1 = (Param(1),)
    rules = {}
    rules[(e0, DEFAULT)] = Rule(e0, DEFAULT, (Call(e, 0, ((),)),))
    rules[(e0, EPS)] = Rule(e0, EPS, (Call(e, 0, ((),)),))
    rules[(e, Guard.sym(CONCAT))] = Rule(
        e, Guard.sym(CONCAT),
        (Call(e, 1, ((Call(e, 2, (y1,)),),)),))
    rules[(e, DEFAULT)] = Rule(
        e, DEFAULT,
        (Node(None, NodeKind.ELEMENT, (Call(e, 1, ((),)),)), Call(e, 2, (y1,))))
    rules[(e, EPS)] = Rule(e, EPS, y1)
    return Mft({e0: 1, e: 2}, frozenset({CONCAT}), e0, rules)


def ft_to_mtt(m: Mft) -> Mft:
    """Tree-shape a parameter-free transducer by threading a continuation
    parameter; behaviourally the identity."""
    if any(r != 1 for r in m.states.values()):
        raise ValueError("ft_to_mtt needs a parameter-free transducer")
    init = "t0"
    while init in m.states:
        init += "_"
    states = {q: 2 for q in m.states}
    states[init] = 1

    def enc(rhs: Rhs, kappa: Rhs) -> Rhs:
        if not rhs:
            return kappa
        head, rest = rhs[0], rhs[1:]
        if isinstance(head, Node):
            return (Node(head.label, head.kind, enc(head.children, ())),) \
                + enc(rest, kappa)
        if isinstance(head, Call):
            if rest:
                return (Call(head.state, head.var, (enc(rest, kappa),)),)
            return (Call(head.state, head.var, (kappa,)),)
        raise ValueError("parameter in a parameter-free transducer")

    rules = {k: Rule(r.state, r.guard, enc(r.rhs, (Param(1),)))
             for k, r in m.rules.items()}
    rules[(init, DEFAULT)] = Rule(init, DEFAULT, (Call(m.initial, 0, ((),)),))
    rules[(init, EPS)] = Rule(init, EPS, (Call(m.initial, 0, ((),)),))
    return Mft(states, m.sigma, init, rules)


# ---------------------------------------------------------------------------
# Binary view of tree-shaped right-hand sides
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _BV:
    """A node of an rhs seen as a binary tree.  kind: node | eps | call |
    param.  For ``node``: label (None = %t), nodekind, children views at
    addresses u.1/u.2.  For ``call``: argument views at u.2, u.3, ..."""

    kind: str
    addr: Tuple[int, ...]
    label: Optional[str] = None
    nodekind: Optional[NodeKind] = None
    left: Optional["_BV"] = None
    right: Optional["_BV"] = None
    state: Optional[str] = None
    var: int = 0
    args: Tuple["_BV", ...] = ()
    index: int = 0


def bview(rhs: Rhs, addr: Tuple[int, ...] = ()) -> _BV:
    if not rhs:
        return _BV("eps", addr)
    head, rest = rhs[0], rhs[1:]
    if isinstance(head, Node):
        return _BV("node", addr, label=head.label, nodekind=head.kind,
                   left=bview(head.children, addr + (1,)),
                   right=bview(rest, addr + (2,)))
    if len(rhs) != 1:
        raise ValueError("rhs is not tree shaped")
    if isinstance(head, Call):
        args = tuple(bview(a, addr + (j + 2,))
                     for j, a in enumerate(head.args))
        return _BV("call", addr, state=head.state, var=head.var, args=args)
    return _BV("param", addr, index=head.index)


def bview_nodes(bv: _BV) -> List[_BV]:
    out = [bv]
    if bv.kind == "node":
        out.extend(bview_nodes(bv.left))
        out.extend(bview_nodes(bv.right))
    elif bv.kind == "call":
        for a in bv.args:
            out.extend(bview_nodes(a))
    return out


# ---------------------------------------------------------------------------
# Alphabet completion
# ---------------------------------------------------------------------------


def _instantiate_copy(rhs: Rhs, label: str) -> Rhs:
    """Replace dynamic-label outputs by a static element label."""
    out: List = []
    for it in rhs:
        if isinstance(it, Node):
            lab = label if it.label is None else it.label
            kind = NodeKind.ELEMENT if it.label is None else it.kind
            out.append(Node(lab, kind, _instantiate_copy(it.children, label)))
        elif isinstance(it, Call):
            out.append(Call(it.state, it.var,
                            tuple(_instantiate_copy(a, label) for a in it.args)))
        else:
            out.append(it)
    return tuple(out)


def complete_alphabet(m1: Mft, m2: Mft) -> Mft:
    """Add to m1, per state, a symbol rule (instantiated from its default
    rule) for every symbol m2 distinguishes, and a text rule if m2 has
    any; afterwards m1's default rules only fire where m2's do.  The
    reserved ``@`` never occurs in first-transducer inputs and is skipped."""
    labels = sorted({g.label for (q, g) in m2.rules
                     if g.kind == "sym" and g.label != CONCAT})
    need_text = any(g.kind == "text" for (q, g) in m2.rules)
    m1 = m1.copy()
    for q in list(m1.states):
        dflt = m1.rules[(q, DEFAULT)]
        for a in labels:
            if (q, Guard.sym(a)) not in m1.rules:
                m1.rules[(q, Guard.sym(a))] = Rule(
                    q, Guard.sym(a), _instantiate_copy(dflt.rhs, a))
        if need_text and (q, TEXT) not in m1.rules:
            m1.rules[(q, TEXT)] = Rule(q, TEXT, dflt.rhs)
    m1.sigma = frozenset(m1.sigma | set(labels))
    return m1


def _rule_for_static(m2: Mft, p: str, label: str, kind: NodeKind) -> Rhs:
    """m2's applicable rhs at a static output node, with dynamic copies
    instantiated."""
    r = m2.rules.get((p, Guard.sym(label)))
    if r is not None:
        return r.rhs
    if kind is NodeKind.TEXT:
        r = m2.rules.get((p, TEXT))
        if r is not None:
            return r.rhs
    rhs = m2.rules[(p, DEFAULT)].rhs
    out: List = []
    for it in rhs:
        if isinstance(it, Node) and it.label is None:
            out.append(Node(label, kind, _instantiate_static(it.children,
                                                             label, kind)))
        elif isinstance(it, Node):
            out.append(Node(it.label, it.kind,
                            _instantiate_static(it.children, label, kind)))
        elif isinstance(it, Call):
            out.append(Call(it.state, it.var,
                            tuple(_instantiate_static(a, label, kind)
                                  for a in it.args)))
        else:
            out.append(it)
    return tuple(out)


def _instantiate_static(rhs: Rhs, label: str, kind: NodeKind) -> Rhs:
    out: List = []
    for it in rhs:
        if isinstance(it, Node):
            lab, k = (label, kind) if it.label is None else (it.label, it.kind)
            out.append(Node(lab, k, _instantiate_static(it.children, label, kind)))
        elif isinstance(it, Call):
            out.append(Call(it.state, it.var,
                            tuple(_instantiate_static(a, label, kind)
                                  for a in it.args)))
        else:
            out.append(it)
    return tuple(out)


def _rule_for_dynamic(m2: Mft, p: str, guard: Guard) -> Rhs:
    """m2's applicable rhs at a dynamic-label output node under the given
    first-transducer guard (text nodes take m2's text rule if any)."""
    if guard.kind == "text":
        r = m2.rules.get((p, TEXT))
        if r is not None:
            return r.rhs
    return m2.rules[(p, DEFAULT)].rhs


# ---------------------------------------------------------------------------
# Composition constructions
# ---------------------------------------------------------------------------


@dataclass
class CompositionReport:
    mode: str
    sigma: int
    size1: int
    size2: int
    size_out: int
    rules_out: int
    seconds: float

    def bound_ratio(self) -> float:
        return self.size_out / max(1, self.sigma * self.size1 * self.size2)


def _require_tree(m: Mft, who: str):
    if not all(is_tree_rhs(r.rhs) for r in m.rules.values()):
        raise ValueError("%s must have tree-shaped right-hand sides" % who)


def _require_rank1(m: Mft, who: str):
    if any(r != 1 for r in m.states.values()):
        raise ValueError("%s must be parameter-free" % who)


def _rule_order(m: Mft):
    def key(kv):
        (q, g), _ = kv
        return (q, {"sym": 0, "text": 1, "default": 2, "eps": 3}[g.kind],
                g.label or "")
    return sorted(m.rules.items(), key=key)


class _Product:
    """Shared bookkeeping for the pairing constructions."""

    def __init__(self, m1: Mft, m2: Mft):
        self.m1 = m1
        self.m2 = m2
        self.states: Dict[str, int] = {}
        self.rules: Dict[Tuple[str, Guard], Rule] = {}
        self.entry_names: Dict[Tuple[str, str], str] = {}
        self.walker_names: Dict[Tuple, str] = {}
        self.counter = 0

    def fresh(self, prefix: str, rank: int) -> str:
        name = "%s%d" % (prefix, self.counter)
        self.counter += 1
        self.states[name] = rank
        return name

    def add(self, state: str, guard: Guard, rhs: Rhs):
        self.rules[(state, guard)] = Rule(state, guard, rhs)

    def pad(self, state: str, live: Guard):
        if live.kind != "default" and (state, DEFAULT) not in self.rules:
            self.add(state, DEFAULT, ())
        if live.kind != "eps" and (state, EPS) not in self.rules:
            self.add(state, EPS, ())

    def finish(self, initial: str, sigma) -> Mft:
        m = Mft(self.states, sigma, initial, self.rules)
        problems = validate(m)
        if problems:
            raise AssertionError("composition produced an invalid "
                                 "transducer: " + "; ".join(problems))
        return m


def compose_tt_tt(m1: Mft, m2: Mft) -> Mft:
    """One transducer running both: first m1, then m2 over m1's output,
    realised by walking m1's right-hand sides with m2's states via stay
    moves.  Both operands must be parameter-free and tree shaped."""
    _require_rank1(m1, "first operand")
    _require_tree(m1, "first operand")
    _require_rank1(m2, "second operand")
    _require_tree(m2, "second operand")
    m1c = complete_alphabet(m1, m2)
    prod = _Product(m1c, m2)
    p_list = sorted(m2.states)

    def entry(q: str, p: str) -> str:
        key = (q, p)
        if key not in prod.entry_names:
            prod.entry_names[key] = prod.fresh("c", 1)
        return prod.entry_names[key]

    def walker(rkey, addr, p) -> str:
        key = (rkey, addr, p)
        if key not in prod.walker_names:
            prod.walker_names[key] = prod.fresh("w", 1)
        return prod.walker_names[key]

    def subst(rhs: Rhs, rkey, u) -> Rhs:
        out: List = []
        for it in rhs:
            if isinstance(it, Node):
                out.append(Node(it.label, it.kind, subst(it.children, rkey, u)))
            elif isinstance(it, Call):
                addr = u if it.var == 0 else u + (it.var,)
                out.append(Call(walker(rkey, addr, it.state), 0))
            else:
                raise AssertionError("parameter in a TT rule")
        return tuple(out)

    for (rkey, rule) in _rule_order(m1c):
        g = rule.guard
        view = bview(rule.rhs)
        for bv in bview_nodes(view):
            for p in p_list:
                w = walker(rkey, bv.addr, p)
                if bv.kind == "call":
                    rhs: Rhs = (Call(entry(bv.state, p), bv.var),)
                elif bv.kind == "eps":
                    rhs = subst(m2.rules[(p, EPS)].rhs, rkey, bv.addr)
                elif bv.label is None:
                    rhs = subst(_rule_for_dynamic(m2, p, g), rkey, bv.addr)
                else:
                    rhs = subst(_rule_for_static(m2, p, bv.label, bv.nodekind),
                                rkey, bv.addr)
                prod.add(w, g, rhs)
                prod.pad(w, g)
    for q in sorted(m1c.states):
        for p in p_list:
            e = entry(q, p)
            for (rkey, rule) in _rule_order(m1c):
                if rule.state != q:
                    continue
                prod.add(e, rule.guard,
                         (Call(walker(rkey, (), p), 0),))
    return prod.finish(entry(m1c.initial, m2.initial),
                       m1c.sigma | m2.sigma)


def compose_mtt_tt(m1: Mft, m2: Mft) -> Mft:
    """First a transducer with parameters (tree shaped), then a
    parameter-free one.  The walkers carry n translated copies of each of
    m1's parameters (n = number of m2 states): parameter j seen while
    walking in m2-state number i resolves to copy (j-1)n + i."""
    _require_tree(m1, "first operand")
    _require_rank1(m2, "second operand")
    _require_tree(m2, "second operand")
    m1c = complete_alphabet(m1, m2)
    prod = _Product(m1c, m2)
    p_list = sorted(m2.states)
    n = len(p_list)
    p_index = {p: i + 1 for i, p in enumerate(p_list)}

    def mn(q: str) -> int:
        return (m1c.states[q] - 1) * n

    def passthrough(count: int) -> Tuple[Rhs, ...]:
        return tuple((Param(i),) for i in range(1, count + 1))

    def entry(q: str, p: str) -> str:
        key = (q, p)
        if key not in prod.entry_names:
            prod.entry_names[key] = prod.fresh("c", 1 + mn(q))
        return prod.entry_names[key]

    def walker(rkey, addr, p) -> str:
        key = (rkey, addr, p)
        if key not in prod.walker_names:
            prod.walker_names[key] = prod.fresh("w", 1 + mn(rkey[0]))
        return prod.walker_names[key]

    def subst(rhs: Rhs, rkey, u, count) -> Rhs:
        # rhs comes from m2 (parameter-free): rewire its moves to walkers
        out: List = []
        for it in rhs:
            if isinstance(it, Node):
                out.append(Node(it.label, it.kind,
                                subst(it.children, rkey, u, count)))
            elif isinstance(it, Call):
                addr = u if it.var == 0 else u + (it.var,)
                out.append(Call(walker(rkey, addr, it.state), 0,
                                passthrough(count)))
            else:
                raise AssertionError("parameter in a TT rule")
        return tuple(out)

    for (rkey, rule) in _rule_order(m1c):
        g = rule.guard
        q = rule.state
        count = mn(q)
        view = bview(rule.rhs)
        for bv in bview_nodes(view):
            for p in p_list:
                w = walker(rkey, bv.addr, p)
                if bv.kind == "param":
                    rhs: Rhs = (Param((bv.index - 1) * n + p_index[p]),)
                elif bv.kind == "call":
                    args = tuple(
                        (Call(walker(rkey, bv.args[j].addr, pp), 0,
                              passthrough(count)),)
                        for j in range(len(bv.args))
                        for pp in p_list)
                    rhs = (Call(entry(bv.state, p), bv.var, args),)
                elif bv.kind == "eps":
                    rhs = subst(m2.rules[(p, EPS)].rhs, rkey, bv.addr, count)
                elif bv.label is None:
                    rhs = subst(_rule_for_dynamic(m2, p, g), rkey, bv.addr,
                                count)
                else:
                    rhs = subst(_rule_for_static(m2, p, bv.label, bv.nodekind),
                                rkey, bv.addr, count)
                prod.add(w, g, rhs)
                prod.pad(w, g)
    for q in sorted(m1c.states):
        for p in p_list:
            e = entry(q, p)
            for (rkey, rule) in _rule_order(m1c):
                if rule.state != q:
                    continue
                prod.add(e, rule.guard,
                         (Call(walker(rkey, (), p), 0, passthrough(mn(q))),))
    return prod.finish(entry(m1c.initial, m2.initial),
                       m1c.sigma | m2.sigma)


def compose_tt_mtt(m1: Mft, m2: Mft) -> Mft:
    """First a parameter-free tree-shaped transducer, then one with
    parameters.  Walkers carry the current m2 state's own parameters."""
    _require_rank1(m1, "first operand")
    _require_tree(m1, "first operand")
    _require_tree(m2, "second operand")
    m1c = complete_alphabet(m1, m2)
    prod = _Product(m1c, m2)
    p_list = sorted(m2.states)

    def entry(q: str, p: str) -> str:
        key = (q, p)
        if key not in prod.entry_names:
            prod.entry_names[key] = prod.fresh("c", m2.states[p])
        return prod.entry_names[key]

    def walker(rkey, addr, p) -> str:
        key = (rkey, addr, p)
        if key not in prod.walker_names:
            prod.walker_names[key] = prod.fresh("w", m2.states[p])
        return prod.walker_names[key]

    def subst(rhs: Rhs, rkey, u) -> Rhs:
        out: List = []
        for it in rhs:
            if isinstance(it, Node):
                out.append(Node(it.label, it.kind, subst(it.children, rkey, u)))
            elif isinstance(it, Call):
                addr = u if it.var == 0 else u + (it.var,)
                out.append(Call(walker(rkey, addr, it.state), 0,
                                tuple(subst(a, rkey, u) for a in it.args)))
            else:
                out.append(it)  # a parameter of the current m2 state
        return tuple(out)

    for (rkey, rule) in _rule_order(m1c):
        g = rule.guard
        view = bview(rule.rhs)
        for bv in bview_nodes(view):
            for p in p_list:
                w = walker(rkey, bv.addr, p)
                k = m2.states[p] - 1
                ys = tuple((Param(i),) for i in range(1, k + 1))
                if bv.kind == "call":
                    rhs: Rhs = (Call(entry(bv.state, p), bv.var, ys),)
                elif bv.kind == "eps":
                    rhs = subst(m2.rules[(p, EPS)].rhs, rkey, bv.addr)
                elif bv.label is None:
                    rhs = subst(_rule_for_dynamic(m2, p, g), rkey, bv.addr)
                else:
                    rhs = subst(_rule_for_static(m2, p, bv.label, bv.nodekind),
                                rkey, bv.addr)
                prod.add(w, g, rhs)
                prod.pad(w, g)
    for q in sorted(m1c.states):
        for p in p_list:
            e = entry(q, p)
            k = m2.states[p] - 1
            ys = tuple((Param(i),) for i in range(1, k + 1))
            for (rkey, rule) in _rule_order(m1c):
                if rule.state != q:
                    continue
                prod.add(e, rule.guard, (Call(walker(rkey, (), p), 0, ys),))
    return prod.finish(entry(m1c.initial, m2.initial),
                       m1c.sigma | m2.sigma)


# ---------------------------------------------------------------------------
# Derived compositions
# ---------------------------------------------------------------------------


def compose_mtt_ft(m1: Mft, m2: Mft) -> Mft:
    """Parameters first, parameter-free second: decompose the second into
    tree shape plus concatenation, pair, then re-interpret concatenation."""
    m2tt = decompose_eval(m2)
    return recompose_eval(compose_mtt_tt(m1, m2tt))


def compose_tt_ft(m1: Mft, m2: Mft) -> Mft:
    m2tt = decompose_eval(m2)
    return recompose_eval(compose_tt_tt(m1, m2tt))


def compose_ft_tt(m1: Mft, m2: Mft) -> Mft:
    """Parameter-free first, tree-shaped second.  The first operand is
    decomposed and fused with the concatenation interpreter (which has no
    symbol rules, so no alphabet completion happens there), then paired
    with the second operand."""
    t1 = decompose_eval(m1)
    m1e = compose_tt_mtt(t1, eval_mtt())
    return compose_mtt_tt(m1e, m2)


_MODES = {
    "tt-tt": (compose_tt_tt, ("TT", "TT")),
    "mtt-tt": (compose_mtt_tt, ("MTT", "TT")),
    "tt-mtt": (compose_tt_mtt, ("TT", "MTT")),
    "mtt-ft": (compose_mtt_ft, ("MTT", "FT")),
    "tt-ft": (compose_tt_ft, ("TT", "FT")),
    "ft-tt": (compose_ft_tt, ("FT", "TT")),
}


def compose(m1: Mft, m2: Mft, mode: str) -> Tuple[Mft, CompositionReport]:
    """Run one of the composition constructions and report sizes.  The
    result computes ``m2(m1(input))``."""
    if mode not in _MODES:
        raise ValueError("unknown mode %r (one of %s)"
                         % (mode, ", ".join(sorted(_MODES))))
    fn, _ = _MODES[mode]
    t0 = time.perf_counter()
    out = fn(m1, m2)
    dt = time.perf_counter() - t0
    report = CompositionReport(
        mode=mode,
        sigma=len(m1.sigma | m2.sigma),
        size1=size(m1),
        size2=size(m2),
        size_out=size(out),   # the full product, before pruning
        rules_out=len(out.rules),
        seconds=dt,
    )
    # the constructions build every state pair; unreachable pairs carry no
    # behaviour and are dropped from the returned transducer
    from .optimize import remove_unreachable
    return remove_unreachable(out), report
