"""Pure-Python kernel for the lazy program-tree machinery.

The hot paths live here: tree unfolding, the governed pipeline, the
safety walk, fuel-bounded bisimulation, and trace execution. The
compiled module ``govtree._native`` mirrors this file one for one;
``govtree._backend`` selects whichever is available. Everything above
this layer must not care which kernel is active.

Tree protocol
-------------
A tree is one of four concrete classes:

* ``Ret(value)``    -- finished computation
* ``Tau(child)``    -- one silent step; ``child is node`` is the
                       divergent self-loop (``SPIN``)
* ``Vis(event, k)`` -- visible event; ``k`` maps an answer to the next tree
* ``Defer(thunk)``  -- lazy suspension, transparent to observation

``Defer`` is not a node in the fuel-accounting sense: ``unroll``
resolves suspensions without consuming fuel. Events are duck-typed;
the kernel reads only ``event.is_gov``, ``event.answer_kind`` and (for
governance checks) ``event.stage_index``.

Coinduction at desk scale
-------------------------
The safety walk keeps a per-run table of already-visited ``(node,
flag)`` pairs. Revisiting a node under the same flag closes that
branch: for a greatest fixed point, meeting your own hypothesis again
is exactly the coinductive step, so cycles through shared structure
(``SPIN``, memoized interpretations) are handled without burning the
whole fuel budget. The bisimulation check memoizes visited node
*pairs* the same way, but stripping silent steps always costs fuel, so
divergent inputs exhaust there rather than pass — which is the
contract.
"""

from __future__ import annotations

KERNEL_NAME = "pure"


class Tree:
    __slots__ = ()


class Ret(Tree):
    __slots__ = ("value",)

    def __init__(self, value):
        self.value = value

    def __repr__(self):
        return f"Ret({self.value!r})"


class Tau(Tree):
    __slots__ = ("child",)

    def __init__(self, child):
        self.child = child

    def __repr__(self):
        return "Tau(<spin>)" if self.child is self else "Tau(...)"


class Vis(Tree):
    __slots__ = ("event", "k")

    def __init__(self, event, k):
        self.event = event
        self.k = k

    def __repr__(self):
        return f"Vis({self.event!r})"


class GateVis(Vis):
    """Pipeline governance node; remembers the directive under
    governance so trace walkers can consult a policy without widening
    the event type."""

    __slots__ = ("directive",)

    def __init__(self, event, k, directive):
        Vis.__init__(self, event, k)
        self.directive = directive


class Defer(Tree):
    __slots__ = ("thunk", "cached")

    def __init__(self, thunk):
        self.thunk = thunk
        self.cached = None


def unroll(t):
    """Resolve suspensions until a concrete node is exposed.

    Costs no fuel; forcing is cached so repeated observation of a
    shared subtree does the work once.
    """
    while type(t) is Defer:
        c = t.cached
        if c is None:
            c = t.thunk()
            t.cached = c
            t.thunk = None
        t = c
    return t


# The one blessed cyclic tree: an infinite chain of silent steps.
SPIN = Tau(None)
SPIN.child = SPIN


class _BindK:
    """Bound continuation. Results are cached per inner result object
    so continuations that ignore their answer keep producing the same
    node — sharing that the safety walk and bisimulation memos rely
    on."""

    __slots__ = ("inner", "outer", "cache")

    def __init__(self, inner, outer):
        self.inner = inner
        self.outer = outer
        self.cache = None

    def __call__(self, x):
        y = self.inner(x)
        cache = self.cache
        if cache is None:
            cache = self.cache = {}
        hit = cache.get(id(y))
        if hit is not None and hit[0] is y:
            return hit[1]
        r = bind(y, self.outer)
        cache[id(y)] = (y, r)
        return r


class _BindThunk:
    __slots__ = ("t", "k")

    def __init__(self, t, k):
        self.t = t
        self.k = k

    def __call__(self):
        return _bind_step(self.t, self.k)


def bind(t, k):
    """Graft ``k`` onto every Ret leaf of ``t``, lazily.

    Never forces ``t`` beyond the node currently being observed.
    """
    if t is SPIN:
        return SPIN
    return Defer(_BindThunk(t, k))


def _bind_step(t, k):
    n = unroll(t)
    tn = type(n)
    if tn is Ret:
        return k(n.value)
    if tn is Tau:
        if n.child is n:
            return SPIN
        return Tau(bind(n.child, k))
    if tn is GateVis:
        return GateVis(n.event, _BindK(n.k, k), n.directive)
    return Vis(n.event, _BindK(n.k, k))


def trigger(event):
    """One-event tree that returns the event's answer."""
    return Vis(event, Ret)


class ConstK:
    """Continuation that ignores its answer. Both probes of a node
    carrying one land on the same object, which the safety walk and the
    interpreter memo rely on for sharing."""

    __slots__ = ("nxt",)

    def __init__(self, nxt):
        self.nxt = nxt

    def __call__(self, _):
        return self.nxt


# ---------------------------------------------------------------------------
# Governed interpretation
# ---------------------------------------------------------------------------
#
# interp(t) replaces every directive node by its pipeline:
#
#   gate(pre 0..3) -> lifted handler tree -> gate(post 0..2) -> rest
#
# A pre-gate answered False is SPIN (denial diverges; no effects). The
# rest-continuation is Tau(interp(k(answer))), memoized per program
# subtree so shared program structure stays shared after interpretation.


class _GovCtx:
    __slots__ = ("handler", "pre", "post", "memo")

    def __init__(self, handler, pre, post):
        self.handler = handler
        self.pre = pre
        self.post = post
        self.memo = {}


class _GateK:
    __slots__ = ("nxt",)

    def __init__(self, nxt):
        self.nxt = nxt

    def __call__(self, ok):
        return self.nxt if ok else SPIN


class _InterpThunk:
    __slots__ = ("t", "ctx")

    def __init__(self, t, ctx):
        self.t = t
        self.ctx = ctx

    def __call__(self):
        return _interp_step(self.t, self.ctx)


class _LiftThunk:
    __slots__ = ("io_t", "directive", "ctx", "rest")

    def __init__(self, io_t, directive, ctx, rest):
        self.io_t = io_t
        self.directive = directive
        self.ctx = ctx
        self.rest = rest

    def __call__(self):
        io_t = self.io_t
        if io_t is None:
            io_t = self.ctx.handler(self.directive)
        return _lift_step(io_t, self.directive, self.ctx, self.rest)


class _IoLiftK:
    __slots__ = ("io_k", "directive", "ctx", "rest")

    def __init__(self, io_k, directive, ctx, rest):
        self.io_k = io_k
        self.directive = directive
        self.ctx = ctx
        self.rest = rest

    def __call__(self, x):
        return Defer(_LiftThunk(self.io_k(x), self.directive, self.ctx, self.rest))


class _RestK:
    """Continuation after a directive's pipeline: one silent step, then
    the interpretation of the program's own continuation."""

    __slots__ = ("k", "ctx")

    def __init__(self, k, ctx):
        self.k = k
        self.ctx = ctx

    def __call__(self, r):
        return Tau(_interp(self.k(r), self.ctx))


def _interp(t, ctx):
    memo = ctx.memo
    key = id(t)
    hit = memo.get(key)
    if hit is not None:
        return hit[1]
    if t is SPIN:
        return SPIN
    d = Defer(_InterpThunk(t, ctx))
    memo[key] = (t, d)
    return d


def _pipeline(directive, ctx, rest):
    live = Defer(_LiftThunk(None, directive, ctx, rest))
    g = live
    pre = ctx.pre
    for i in range(len(pre) - 1, -1, -1):
        g = GateVis(pre[i], _GateK(g), directive)
    return g


def _lift_step(io_t, directive, ctx, rest):
    n = unroll(io_t)
    tn = type(n)
    if tn is Ret:
        g = rest(n.value)
        post = ctx.post
        for i in range(len(post) - 1, -1, -1):
            g = GateVis(post[i], ConstK(g), directive)
        return g
    if tn is Tau:
        if n.child is n:
            return SPIN
        return Tau(Defer(_LiftThunk(n.child, directive, ctx, rest)))
    return Vis(n.event, _IoLiftK(n.k, directive, ctx, rest))


def _interp_step(t, ctx):
    n = unroll(t)
    tn = type(n)
    if tn is Ret:
        return n
    if tn is Tau:
        if n.child is n:
            return SPIN
        return Tau(_interp(n.child, ctx))
    return _pipeline(n.event, ctx, _RestK(n.k, ctx))


def interp_governed_tree(t, handler, pre_events, post_events):
    """Fold the governed handler over a directive program; lazy."""
    ctx = _GovCtx(handler, tuple(pre_events), tuple(post_events))
    return _interp(t, ctx)


def pipeline_tree(directive, handler, pre_events, post_events):
    """The standalone governed tree for one directive, ending in
    Ret(result)."""
    ctx = _GovCtx(handler, tuple(pre_events), tuple(post_events))
    return _pipeline(directive, ctx, Ret)


# ---------------------------------------------------------------------------
# Safety walk
# ---------------------------------------------------------------------------

SAFE = "safe"
UNSAFE = "unsafe"
EXHAUSTED = "exhausted"


def gov_safe_check(flag, t, fuel, probes):
    """Fuel-bounded walk of the permission-flag safety relation.

    Returns ``(verdict, nodes_visited, offending_event_or_None)``.
    Ret is always fine; Tau recurses under the same flag; a governance
    check recurses under flag True for both boolean answers; an I/O
    node under flag False is the violation. Fuel is a global budget
    shared across branches.
    """
    stack = [(t, True if flag else False)]
    seen = {}
    visited = 0
    while stack:
        t, fl = stack.pop()
        while type(t) is Defer:
            c = t.cached
            if c is None:
                c = t.thunk()
                t.cached = c
                t.thunk = None
            t = c
        if fuel <= 0:
            return (EXHAUSTED, visited, None)
        fuel -= 1
        visited += 1
        tn = type(t)
        if tn is Ret:
            continue
        key = (id(t), fl)
        if key in seen:
            continue
        seen[key] = t
        if tn is Tau:
            stack.append((t.child, fl))
            continue
        ev = t.event
        k = t.k
        if ev.is_gov:
            a = k(False)
            b = k(True)
            stack.append((b, True))
            if a is not b:
                stack.append((a, True))
        else:
            if not fl:
                return (UNSAFE, visited, ev)
            prev = None
            for x in probes[ev.answer_kind]:
                c = k(x)
                if c is not prev:
                    stack.append((c, True))
                    prev = c
    return (SAFE, visited, None)


# ---------------------------------------------------------------------------
# Fuel-bounded weak bisimulation
# ---------------------------------------------------------------------------

EQUAL = "equal"
DISTINCT = "distinct"


def eutt_fuel(t1, t2, fuel, probes):
    """Compare two trees up to finite silent prefixes.

    Distinct is definitive; Equal means no difference was found within
    fuel. Every Tau stripped and every node-pair comparison costs one
    unit, so divergent inputs exhaust rather than loop. A pair of
    nodes already compared once is not re-explored (continuations are
    deterministic, so an identical object pair denotes an identical
    sub-relation); revisiting costs one unit.
    """
    stack = [(t1, t2)]
    seen = {}
    while stack:
        a, b = stack.pop()
        key = (id(a), id(b))
        if key in seen:
            if fuel <= 0:
                return EXHAUSTED
            fuel -= 1
            continue
        seen[key] = (a, b)
        while True:
            while type(a) is Defer:
                c = a.cached
                if c is None:
                    c = a.thunk()
                    a.cached = c
                    a.thunk = None
                a = c
            if type(a) is not Tau:
                break
            if fuel <= 0:
                return EXHAUSTED
            fuel -= 1
            a = a.child
        while True:
            while type(b) is Defer:
                c = b.cached
                if c is None:
                    c = b.thunk()
                    b.cached = c
                    b.thunk = None
                b = c
            if type(b) is not Tau:
                break
            if fuel <= 0:
                return EXHAUSTED
            fuel -= 1
            b = b.child
        if fuel <= 0:
            return EXHAUSTED
        fuel -= 1
        if a is b:
            continue
        stripped = (id(a), id(b))
        if stripped != key:
            if stripped in seen:
                continue
            seen[stripped] = (a, b)
        a_ret = type(a) is Ret
        b_ret = type(b) is Ret
        if a_ret and b_ret:
            if a.value != b.value:
                return DISTINCT
            continue
        if a_ret or b_ret:
            return DISTINCT
        if a.event != b.event:
            return DISTINCT
        ka = a.k
        kb = b.k
        for x in probes[a.event.answer_kind]:
            stack.append((ka(x), kb(x)))
    return EQUAL


# ---------------------------------------------------------------------------
# Trace execution
# ---------------------------------------------------------------------------
#
# Walkers produce one concrete run of a tree: an environment answers
# each event. The raw trace is a flat stride-3 list — kind, payload,
# payload — holding only pre-existing objects, so recording allocates
# nothing per event; EventTrace expands it. Kinds: "gov" ev idx,
# "io" ev idx, and the fused walker's run-length markers "pre" idx n /
# "post" idx n. Status strings: "done", "denied", "exhausted",
# "diverged".


def run_governed_trace(t, env, fuel, trace_out):
    """Execute a governed tree under a stage/IO answerer.

    Returns ``(status, value, stage_event, directive_index, fuel_spent)``.
    A pre-gate whose answer leads to SPIN reports a denial instead of
    burning the remaining budget on silence.
    """
    dir_idx = -1
    spent = 0
    append = trace_out.append
    while True:
        while type(t) is Defer:
            c = t.cached
            if c is None:
                c = t.thunk()
                t.cached = c
                t.thunk = None
            t = c
        if fuel <= 0:
            return ("exhausted", None, None, dir_idx, spent)
        fuel -= 1
        spent += 1
        tn = type(t)
        if tn is Ret:
            return ("done", t.value, None, dir_idx, spent)
        if tn is Tau:
            if t.child is t:
                return ("diverged", None, None, dir_idx, spent)
            t = t.child
            continue
        ev = t.event
        if ev.is_gov:
            if ev.stage_index == 0:
                dir_idx += 1
            directive = t.directive if tn is GateVis else None
            ans = env.answer_stage(ev, directive)
            append("gov")
            append(ev)
            append(dir_idx)
            nxt = t.k(ans)
            if nxt is SPIN and not ans:
                return ("denied", None, ev, dir_idx, spent)
            t = nxt
        else:
            ans = env.answer_io(ev)
            append("io")
            append(ev)
            append(dir_idx)
            t = t.k(ans)


def run_direct_trace(t, handler, env, fuel, trace_out):
    """Execute a directive program straight through its handler, no
    governance. Same trace/result conventions as the governed walker;
    only I/O events are recorded."""
    dir_idx = -1
    spent = 0
    append = trace_out.append
    while True:
        while type(t) is Defer:
            c = t.cached
            if c is None:
                c = t.thunk()
                t.cached = c
                t.thunk = None
            t = c
        if fuel <= 0:
            return ("exhausted", None, None, dir_idx, spent)
        fuel -= 1
        spent += 1
        tn = type(t)
        if tn is Ret:
            return ("done", t.value, None, dir_idx, spent)
        if tn is Tau:
            if t.child is t:
                return ("diverged", None, None, dir_idx, spent)
            t = t.child
            continue
        dir_idx += 1
        io_t = handler(t.event)
        k = t.k
        while True:
            while type(io_t) is Defer:
                c = io_t.cached
                if c is None:
                    c = io_t.thunk()
                    io_t.cached = c
                    io_t.thunk = None
                io_t = c
            if fuel <= 0:
                return ("exhausted", None, None, dir_idx, spent)
            fuel -= 1
            spent += 1
            itn = type(io_t)
            if itn is Ret:
                t = k(io_t.value)
                break
            if itn is Tau:
                if io_t.child is io_t:
                    return ("diverged", None, None, dir_idx, spent)
                io_t = io_t.child
                continue
            ev = io_t.event
            ans = env.answer_io(ev)
            append("io")
            append(ev)
            append(dir_idx)
            io_t = io_t.k(ans)


def run_governed_fused(t, handler, pre_events, post_events, env, fuel, trace_out):
    """Execute the governed interpretation of a directive program
    without materializing pipeline nodes.

    Observationally identical to ``run_governed_trace`` over
    ``interp_governed_tree(t, ...)`` — same trace, same status, same
    fuel accounting — which the parity tests pin down. The tree form
    stays the semantic object; this is its execution engine.

    When the environment provides ``gate_answers``, pipeline stage
    events are recorded run-length encoded: ``("pre", idx, n)`` /
    ``("post", idx, n)`` markers that expand to the same per-event
    entries (see EventTrace). ``gate_answers_by_type`` additionally
    permits caching answers per directive constructor.
    """
    dir_idx = -1
    spent = 0
    append = trace_out.append
    gate_answers = getattr(env, "gate_answers", None)
    by_type = gate_answers is not None and getattr(
        env, "gate_answers_by_type", False
    )
    cache = {}
    npre = len(pre_events)
    npost = len(post_events)
    while True:
        while type(t) is Defer:
            c = t.cached
            if c is None:
                c = t.thunk()
                t.cached = c
                t.thunk = None
            t = c
        if fuel <= 0:
            return ("exhausted", None, None, dir_idx, spent)
        tn = type(t)
        if tn is Ret:
            return ("done", t.value, None, dir_idx, spent + 1)
        if tn is Tau:
            fuel -= 1
            spent += 1
            if t.child is t:
                return ("diverged", None, None, dir_idx, spent)
            t = t.child
            continue
        d = t.event
        dir_idx += 1
        if gate_answers is None:
            answers = None
            for i in range(npre):
                if fuel <= 0:
                    return ("exhausted", None, None, dir_idx, spent)
                fuel -= 1
                spent += 1
                ge = pre_events[i]
                ans = env.answer_stage(ge, d)
                append("gov")
                append(ge)
                append(dir_idx)
                if not ans:
                    return ("denied", None, ge, dir_idx, spent)
        else:
            if by_type:
                answers = cache.get(type(d))
                if answers is None:
                    answers = gate_answers(d)
                    cache[type(d)] = answers
            else:
                answers = gate_answers(d)
            if fuel >= npre and answers[0] and answers[1] and answers[2] and answers[3]:
                fuel -= npre
                spent += npre
                append("pre")
                append(dir_idx)
                append(npre)
            else:
                asked = 0
                denied_gate = None
                for i in range(npre):
                    if fuel <= 0:
                        if asked:
                            append("pre")
                            append(dir_idx)
                            append(asked)
                        return ("exhausted", None, None, dir_idx, spent)
                    fuel -= 1
                    spent += 1
                    asked += 1
                    if not answers[i]:
                        denied_gate = pre_events[i]
                        break
                append("pre")
                append(dir_idx)
                append(asked)
                if denied_gate is not None:
                    return ("denied", None, denied_gate, dir_idx, spent)
        io_t = handler(d)
        while True:
            while type(io_t) is Defer:
                c = io_t.cached
                if c is None:
                    c = io_t.thunk()
                    io_t.cached = c
                    io_t.thunk = None
                io_t = c
            itn = type(io_t)
            if itn is Ret:
                r = io_t.value
                break  # absorbed by the lift; costs no fuel
            if fuel <= 0:
                return ("exhausted", None, None, dir_idx, spent)
            fuel -= 1
            spent += 1
            if itn is Tau:
                if io_t.child is io_t:
                    return ("diverged", None, None, dir_idx, spent)
                io_t = io_t.child
                continue
            ev = io_t.event
            ans = env.answer_io(ev)
            append("io")
            append(ev)
            append(dir_idx)
            io_t = io_t.k(ans)
        if answers is not None and fuel >= npost:
            fuel -= npost
            spent += npost
            append("post")
            append(dir_idx)
            append(npost)
        else:
            asked = 0
            for i in range(npost):
                if fuel <= 0:
                    if answers is not None and asked:
                        append("post")
                        append(dir_idx)
                        append(asked)
                    return ("exhausted", None, None, dir_idx, spent)
                fuel -= 1
                spent += 1
                asked += 1
                ge = post_events[i]
                if answers is None:
                    env.answer_stage(ge, d)  # consumed; post stages cannot deny
                    append("gov")
                    append(ge)
                    append(dir_idx)
            if answers is not None and asked:
                append("post")
                append(dir_idx)
                append(asked)
        if fuel <= 0:
            return ("exhausted", None, None, dir_idx, spent)
        fuel -= 1
        spent += 1  # the silent step back into the program's continuation
        t = t.k(r)
