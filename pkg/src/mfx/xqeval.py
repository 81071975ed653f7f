"""Direct MinXQuery interpreter: the reference semantics.

Evaluates a scoped query over a document forest by structural recursion,
using the naive path oracle for selection.  This is the independent
yardstick the compiled transducers are tested against; it shares nothing
with the compilation pipeline except the node-test semantics defined in
:mod:`mfx.paths`.

For-variables bind the matched node together with its following siblings
(so following-sibling steps from the variable work); let-variables bind
the value forest.  Used as an output variable, a for-variable contributes
a copy of just the matched node, ``$input`` the whole document.
"""

from __future__ import annotations

from typing import Dict, List, Union

from .forest import Forest, Tree
from .paths import NodeCtx, select_ctx, virtual_ctx
from .xquery import Element, For, Let, Path, PathExpr, Sequence, StringLit
from .forest import NodeKind

Value = Union[NodeCtx, Forest]


def eval_query(ast, doc: Forest) -> Forest:
    env: Dict[str, Value] = {"input": virtual_ctx(doc)}
    return _eval(ast, env)


def _output_value(v: Value) -> Forest:
    if isinstance(v, NodeCtx):
        return v.doc if v.tree is None else (v.tree,)
    return v


def _eval(q, env) -> Forest:
    if isinstance(q, Element):
        kids: List[Tree] = []
        for c in q.children:
            kids.extend(_eval(c, env))
        return (Tree(q.name, NodeKind.ELEMENT, tuple(kids)),)
    if isinstance(q, StringLit):
        return (Tree(q.value, NodeKind.TEXT, ()),)
    if isinstance(q, Sequence):
        out: List[Tree] = []
        for c in q.items:
            out.extend(_eval(c, env))
        return tuple(out)
    if isinstance(q, For):
        anchor = env[q.path.start]
        if not isinstance(anchor, NodeCtx):
            raise ValueError("path starts at a let variable $%s" % q.path.start)
        out = []
        for match in select_ctx(q.path.steps, anchor):
            inner = dict(env)
            inner[q.var] = match
            out.extend(_eval(q.body, inner))
        return tuple(out)
    if isinstance(q, Let):
        inner = dict(env)
        inner[q.var] = _eval(q.bound, env)
        return _eval(q.body, inner)
    if isinstance(q, PathExpr):
        v = env[q.path.start]
        if not q.path.steps:
            return _output_value(v)
        if not isinstance(v, NodeCtx):
            raise ValueError("path starts at a let variable $%s" % q.path.start)
        out = []
        for match in select_ctx(q.path.steps, v):
            out.append(match.tree)
        return tuple(out)
    raise TypeError(q)
