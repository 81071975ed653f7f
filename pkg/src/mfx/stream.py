"""Single-pass transducer execution over an XML event stream.

The engine evaluates the transducer demand-driven, left to right along
the output, over an input buffer that materialises lazily:

* The input is a chain of cells per sibling level (``_Cell``), filled by
  a push builder as events arrive.  A cursor is simply a cell reference;
  reading it either yields the node (its label and kind are known as soon
  as its start event arrived), the end of the level, or "not yet".
* Work sits on an explicit task stack, so input depth and output size
  never touch the Python recursion limit, and the engine can stop
  mid-expression when it needs unread input: the blocking task is pushed
  back and retried after the next event.
* Call arguments become suspensions, forced only if their parameter is
  actually used (call by need) and memoised so shared arguments are
  evaluated at most once.
* Output events flush as soon as they are determined; emission never
  backtracks.  A tail call (last item of a rule body) reuses the stack
  slot, so scanning a million siblings needs constant stack.

Memory behaviour falls out of reference counting: a retained input
subtree is exactly one whose cell is still reachable from a live
suspension or environment, so an optimized transducer that drops its
whole-document parameter scans in bounded memory, while the unoptimized
one keeps the document alive through that parameter.  ``StreamStats``
tracks the peak number of live buffered nodes (via weak references) and
of live suspensions, which is what the benchmark harness reports.
"""

from __future__ import annotations

import time
import weakref
from dataclasses import dataclass
from typing import List, Optional, Tuple

from .forest import Forest, NodeKind, Tree
from .mft import Call, Guard, Mft, Node, Param, Rhs, size
from .xmlio import (END, EOF, Eof, End, EventSink, StartAttribute,
                    StartElement, Text, XmlEvent)


class EngineError(RuntimeError):
    pass


@dataclass
class StreamStats:
    events_in: int = 0
    events_out: int = 0
    peak_nodes: int = 0
    peak_suspensions: int = 0
    seconds: float = 0.0

    def lines(self) -> str:
        return ("events_in=%d\nevents_out=%d\npeak_nodes=%d\n"
                "peak_suspensions=%d\nms=%.1f"
                % (self.events_in, self.events_out, self.peak_nodes,
                   self.peak_suspensions, self.seconds * 1000.0))


# ---------------------------------------------------------------------------
# Input buffer
# ---------------------------------------------------------------------------


class _Cell:
    """One position in a sibling chain: empty (frontier), filled with a
    node, or closed (end of the level)."""

    __slots__ = ("tree", "next", "closed")

    def __init__(self):
        self.tree: Optional[_INode] = None
        self.next: Optional[_Cell] = None
        self.closed = False


_CLOSED = _Cell()
_CLOSED.closed = True


class _INode:
    """A buffered input node; children is the head cell of its child chain."""

    __slots__ = ("label", "kind", "children", "__weakref__")

    def __init__(self, label: str, kind: NodeKind, children: _Cell):
        self.label = label
        self.kind = kind
        self.children = children


class _Buffer:
    """Builds the cell structure from events and counts live nodes."""

    def __init__(self, stats: StreamStats):
        self.stats = stats
        self._alive = 0
        # the root cell is handed to the engine's initial task; holding it
        # here would pin the whole document
        root = _Cell()
        self._tails: List[_Cell] = [root]
        self._root: Optional[_Cell] = root
        self.done = False

    def take_root(self) -> _Cell:
        root, self._root = self._root, None
        return root

    def _dec(self):
        self._alive -= 1

    def _new_node(self, label: str, kind: NodeKind, children: _Cell) -> _INode:
        node = _INode(label, kind, children)
        self._alive += 1
        weakref.finalize(node, self._dec)
        return node

    def note_peak(self):
        if self._alive > self.stats.peak_nodes:
            self.stats.peak_nodes = self._alive

    def feed(self, ev: XmlEvent):
        if isinstance(ev, (StartElement, StartAttribute)):
            kind = (NodeKind.ELEMENT if isinstance(ev, StartElement)
                    else NodeKind.ATTRIBUTE)
            kids = _Cell()
            tail = self._tails[-1]
            tail.tree = self._new_node(ev.name, kind, kids)
            tail.next = _Cell()
            self._tails[-1] = tail.next
            self._tails.append(kids)
        elif isinstance(ev, Text):
            tail = self._tails[-1]
            tail.tree = self._new_node(ev.content, NodeKind.TEXT, _CLOSED)
            tail.next = _Cell()
            self._tails[-1] = tail.next
        elif isinstance(ev, End):
            self._tails.pop().closed = True
        elif isinstance(ev, Eof):
            if len(self._tails) != 1:
                raise EngineError("input ended with %d open elements"
                                  % (len(self._tails) - 1))
            self._tails.pop().closed = True
            self.done = True


# ---------------------------------------------------------------------------
# Suspensions
# ---------------------------------------------------------------------------


class _Susp:
    """A pending right-hand-side expression closed over an environment.
    Forced at most once; the result forest is cached."""

    __slots__ = ("rhs", "env", "cache", "__weakref__")

    def __init__(self, rhs: Rhs, env: "_Env", engine: "Engine"):
        self.rhs = rhs
        self.env = env
        self.cache: Optional[Forest] = None
        engine._live_susps += 1
        weakref.finalize(self, engine._dec_susp)


class _Env:
    __slots__ = ("c0", "c1", "c2", "params", "label", "kind", "stay")

    def __init__(self, c0, c1, c2, params, label, kind, stay):
        self.c0 = c0
        self.c1 = c1
        self.c2 = c2
        self.params = params
        self.label = label
        self.kind = kind
        self.stay = stay


# ---------------------------------------------------------------------------
# The engine
# ---------------------------------------------------------------------------

# Task tags.  APPLY selects and enters a rule (the only task that can
# block on unread input); NODE emits an output node's start and schedules
# its children; FORCE/MEMO realise call-by-need parameters; CLOSE/ENDTAG
# finish an output node in a list target or on the sink.
#
# Rule bodies are resolved against their environment at scheduling time:
# a pending call holds just its input cell (never the whole environment),
# so a task waiting behind a long subtree does not pin that subtree.
_APPLY, _NODE, _ENDTAG, _CLOSE, _FORCE, _MEMO, _EMITF = range(7)

#: target value for "emit to the output stream"
_SINK = None


class Engine:
    def __init__(self, m: Mft, stay_budget: Optional[int] = None):
        self.m = m
        self.stay_budget = stay_budget or max(100, 10 * size(m))
        self.stats = StreamStats()
        self.buffer = _Buffer(self.stats)
        self._live_susps = 0
        self._emitted: List[XmlEvent] = []
        self._text_run: Optional[List[str]] = None
        self.stack: List[tuple] = [
            (_APPLY, m.initial, self.buffer.take_root(), (), _SINK, 0)]
        self.finished = False

    def _dec_susp(self):
        self._live_susps -= 1

    # -- output ---------------------------------------------------------------

    def _flush_text(self):
        if self._text_run is not None:
            content = "".join(self._text_run)
            self._text_run = None
            if content:
                self._emitted.append(Text(content))
                self.stats.events_out += 1

    def _out(self, ev: XmlEvent):
        # coalesce adjacent text
        if isinstance(ev, Text):
            if self._text_run is None:
                self._text_run = [ev.content]
            else:
                self._text_run.append(ev.content)
            return
        self._flush_text()
        self._emitted.append(ev)
        self.stats.events_out += 1

    # -- stepping ---------------------------------------------------------------

    def step(self, ev: XmlEvent) -> List[XmlEvent]:
        """Feed one input event; return the output events it unlocked."""
        if isinstance(ev, Eof) and self.buffer.done:
            return []
        self.stats.events_in += 1
        self.buffer.feed(ev)
        self.buffer.note_peak()
        self._drive()
        self.buffer.note_peak()
        if self._live_susps > self.stats.peak_suspensions:
            self.stats.peak_suspensions = self._live_susps
        if self.buffer.done and not self.stack:
            self._flush_text()
            if not self.finished:
                self.finished = True
                self._emitted.append(EOF)
        out = self._emitted
        self._emitted = []
        return out

    def _peek(self, cell: _Cell):
        """(node, next) or "eps" or None (= need more input)."""
        if cell.tree is not None:
            return cell
        if cell.closed:
            return "eps"
        return None

    def _drive(self):
        stack = self.stack
        m = self.m
        while stack:
            task = stack.pop()
            tag = task[0]
            if tag == _APPLY:
                _, state, cell, params, target, stay = task
                got = self._peek(cell)
                if got is None:
                    stack.append(task)
                    return  # blocked on unread input
                if got == "eps":
                    rule = m.rules[(state, _G_EPS)]
                    env = _Env(cell, None, None, params, None, None, stay)
                else:
                    node = cell.tree
                    rule = m.rules.get((state, Guard.sym(node.label)))
                    if rule is None and node.kind is NodeKind.TEXT:
                        rule = m.rules.get((state, _G_TEXT))
                    if rule is None:
                        rule = m.rules[(state, _G_DEFAULT)]
                    env = _Env(cell, node.children, cell.next, params,
                               node.label, node.kind, stay)
                self._push_seq(rule.rhs, env, target)
            elif tag == _NODE:
                _, label, kind, children, env, target = task
                if target is _SINK:
                    self._out(StartElement(label) if kind is NodeKind.ELEMENT
                              else StartAttribute(label))
                    stack.append((_ENDTAG,))
                    self._push_seq(children, env, _SINK)
                else:
                    kids: List[Tree] = []
                    stack.append((_CLOSE, label, kind, kids, target))
                    self._push_seq(children, env, kids)
            elif tag == _ENDTAG:
                self._out(END)
            elif tag == _CLOSE:
                _, label, kind, kids, target = task
                target.append(Tree(label, kind, tuple(kids)))
            elif tag == _FORCE:
                _, susp, target = task
                if susp.cache is not None:
                    self._emit_forest(susp.cache, target)
                else:
                    acc: List[Tree] = []
                    stack.append((_MEMO, susp, acc, target))
                    self._push_seq(susp.rhs, susp.env, acc)
            elif tag == _MEMO:
                _, susp, acc, target = task
                susp.cache = tuple(acc)
                susp.rhs = ()
                susp.env = None  # release pinned input
                self._emit_forest(susp.cache, target)
            elif tag == _EMITF:
                _, forest, target = task
                self._emit_forest(forest, target)
            else:
                raise AssertionError(tag)

    def _push_seq(self, rhs: Rhs, env: _Env, target):
        """Schedule a rule body.  Every item is resolved against the
        environment now; only output nodes with child expressions keep a
        reference to it (their children may move from the current node)."""
        tasks: List[tuple] = []
        for it in rhs:
            if isinstance(it, Param):
                v = env.params[it.index - 1]
                if isinstance(v, _Susp):
                    tasks.append((_FORCE, v, target))
                elif v:
                    tasks.append((_EMITF, v, target))
            elif isinstance(it, Node):
                label, kind = it.label, it.kind
                if label is None:
                    if env.label is None:
                        raise EngineError("dynamic label with no current node")
                    label, kind = env.label, env.kind
                if kind is NodeKind.TEXT:
                    # text output nodes are leaves; their child expressions
                    # are empty by construction
                    tasks.append((_EMITF, (Tree(label, NodeKind.TEXT, ()),),
                                  target))
                elif not it.children:
                    tasks.append((_EMITF, (Tree(label, kind, ()),), target))
                else:
                    tasks.append((_NODE, label, kind, it.children, env, target))
            else:  # Call
                cell = (env.c0, env.c1, env.c2)[it.var]
                stay = env.stay + 1 if it.var == 0 else 0
                if stay > self.stay_budget:
                    raise EngineError(
                        "stay-move budget exceeded in state %s (%d consecutive"
                        " non-consuming steps)" % (it.state, self.stay_budget))
                params = tuple(self._param_value(arg, env) for arg in it.args)
                tasks.append((_APPLY, it.state, cell, params, target, stay))
        self.stack.extend(reversed(tasks))

    def _param_value(self, arg: Rhs, env: _Env):
        if not arg:
            return ()
        if len(arg) == 1 and isinstance(arg[0], Param):
            # pass-through: share the caller's value (and its memo)
            return env.params[arg[0].index - 1]
        return _Susp(arg, env, self)

    def _emit_forest(self, forest: Forest, target):
        if target is _SINK:
            for t in forest:
                self._emit_tree(t)
        else:
            target.extend(forest)

    def _emit_tree(self, t: Tree):
        if t.kind is NodeKind.TEXT:
            self._out(Text(t.label))
            return
        self._out(StartElement(t.label) if t.kind is NodeKind.ELEMENT
                  else StartAttribute(t.label))
        for c in t.children:
            self._emit_tree(c)
        self._out(END)


_G_EPS = Guard("eps")
_G_TEXT = Guard("text")
_G_DEFAULT = Guard("default")


# ---------------------------------------------------------------------------
# Drivers
# ---------------------------------------------------------------------------


def stream_run(m: Mft, src, sink: EventSink,
               stay_budget: Optional[int] = None) -> StreamStats:
    """Run the transducer over an event source, pushing output events to
    the sink as they are determined.  Returns the run's statistics."""
    t0 = time.perf_counter()
    eng = Engine(m, stay_budget)
    saw_eof = False
    for ev in src:
        for out in eng.step(ev):
            sink(out)
        if isinstance(ev, Eof):
            saw_eof = True
            break
    if not saw_eof:
        for out in eng.step(EOF):
            sink(out)
    if eng.stack:
        raise EngineError("engine blocked at end of input")
    eng.stats.seconds = time.perf_counter() - t0
    return eng.stats


def measure(m: Mft, src, stay_budget: Optional[int] = None) -> StreamStats:
    """Like :func:`stream_run` with the output discarded."""
    return stream_run(m, src, lambda ev: None, stay_budget)


def stream_bytes(m: Mft, xml: bytes,
                 stay_budget: Optional[int] = None) -> Tuple[bytes, StreamStats]:
    """Convenience: XML bytes in, serialised output bytes and stats out."""
    import io

    from .xmlio import read_events, sink_to
    out = io.BytesIO()
    stats = stream_run(m, read_events(xml), sink_to(out), stay_budget)
    return out.getvalue(), stats
