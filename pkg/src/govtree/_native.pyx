# cython: language_level=3, boundscheck=False, wraparound=False, binding=False
"""Compiled kernel: a one-for-one mirror of ``govtree._pure``.

Same classes, same algorithms, same fuel accounting — the backend
parity tests hold the two implementations to identical observable
behavior. The wins here are C-level node allocation, inlined
suspension forcing, and direct dispatch on the kernel's own
continuation classes instead of Python calls.
"""

import cython

KERNEL_NAME = "native"


cdef class Tree:
    pass


@cython.final
cdef class Ret(Tree):
    cdef public object value

    def __init__(self, value):
        self.value = value

    def __repr__(self):
        return f"Ret({self.value!r})"


@cython.final
cdef class Tau(Tree):
    cdef public object child

    def __init__(self, child):
        self.child = child

    def __repr__(self):
        return "Tau(<spin>)" if self.child is self else "Tau(...)"


cdef class Vis(Tree):
    cdef public object event
    cdef public object k

    def __init__(self, event, k):
        self.event = event
        self.k = k

    def __repr__(self):
        return f"Vis({self.event!r})"


@cython.final
cdef class GateVis(Vis):
    """Pipeline governance node; remembers the directive under
    governance so trace walkers can consult a policy without widening
    the event type."""

    cdef public object directive

    def __init__(self, event, k, directive):
        Vis.__init__(self, event, k)
        self.directive = directive


@cython.final
cdef class Defer(Tree):
    cdef public object thunk
    cdef public object cached

    def __init__(self, thunk):
        self.thunk = thunk
        self.cached = None


# The one blessed cyclic tree: an infinite chain of silent steps.
SPIN = Tau(None)
SPIN.child = SPIN


cdef class _BindK:
    # bound continuation; results cached per inner result object so
    # answer-insensitive continuations keep producing the same node
    cdef object inner
    cdef object outer
    cdef dict cache

    def __init__(self, inner, outer):
        self.inner = inner
        self.outer = outer
        self.cache = None

    def __call__(self, x):
        cdef object y = _call_k(self.inner, x)
        cdef dict cache = self.cache
        if cache is None:
            cache = self.cache = {}
        hit = cache.get(id(y))
        if hit is not None and (<tuple>hit)[0] is y:
            return (<tuple>hit)[1]
        r = bind(y, self.outer)
        cache[id(y)] = (y, r)
        return r


cdef class _BindThunk:
    cdef object t
    cdef object k

    def __init__(self, t, k):
        self.t = t
        self.k = k

    def __call__(self):
        return _bind_step(self.t, self.k)


@cython.final
cdef class ConstK:
    """Continuation that ignores its answer; both probes land on the
    same object."""

    cdef public object nxt

    def __init__(self, nxt):
        self.nxt = nxt

    def __call__(self, _):
        return self.nxt


@cython.final
cdef class _GateK:
    cdef public object nxt

    def __init__(self, nxt):
        self.nxt = nxt

    def __call__(self, ok):
        return self.nxt if ok else SPIN


cdef inline object _call_k(object k, object x):
    # continuation call with direct dispatch on kernel classes
    cdef type tk = type(k)
    if tk is ConstK:
        return (<ConstK>k).nxt
    if tk is _GateK:
        return (<_GateK>k).nxt if x else SPIN
    return k(x)


cdef inline object _unroll(object t):
    cdef Defer d
    cdef object c, thunk
    cdef type tt
    while type(t) is Defer:
        d = <Defer>t
        c = d.cached
        if c is None:
            thunk = d.thunk
            tt = type(thunk)
            if tt is _InterpThunk:
                c = _interp_step((<_InterpThunk>thunk).t, (<_InterpThunk>thunk).ctx)
            elif tt is _LiftThunk:
                c = _force_lift(<_LiftThunk>thunk)
            else:
                c = thunk()
            d.cached = c
            d.thunk = None
        t = c
    return t


def unroll(t):
    """Resolve suspensions until a concrete node is exposed; free of
    fuel cost, cached."""
    return _unroll(t)


def bind(t, k):
    """Graft ``k`` onto every Ret leaf of ``t``, lazily."""
    if t is SPIN:
        return SPIN
    return Defer(_BindThunk(t, k))


def _bind_step(t, k):
    cdef object n = _unroll(t)
    cdef type tn = type(n)
    if tn is Ret:
        return _call_k(k, (<Ret>n).value)
    if tn is Tau:
        if (<Tau>n).child is n:
            return SPIN
        return Tau(bind((<Tau>n).child, k))
    if tn is GateVis:
        return GateVis((<GateVis>n).event, _BindK((<GateVis>n).k, k),
                       (<GateVis>n).directive)
    return Vis((<Vis>n).event, _BindK((<Vis>n).k, k))


def trigger(event):
    """One-event tree that returns the event's answer."""
    return Vis(event, Ret)


# ---------------------------------------------------------------------------
# Governed interpretation
# ---------------------------------------------------------------------------


@cython.final
cdef class _GovCtx:
    cdef object handler
    cdef tuple pre
    cdef tuple post
    cdef dict memo

    def __init__(self, handler, pre, post):
        self.handler = handler
        self.pre = pre
        self.post = post
        self.memo = {}


@cython.final
cdef class _InterpThunk:
    cdef object t
    cdef _GovCtx ctx

    def __init__(self, t, ctx):
        self.t = t
        self.ctx = ctx

    def __call__(self):
        return _interp_step(self.t, self.ctx)


@cython.final
cdef class _LiftThunk:
    cdef object io_t
    cdef object directive
    cdef _GovCtx ctx
    cdef object rest

    def __init__(self, io_t, directive, ctx, rest):
        self.io_t = io_t
        self.directive = directive
        self.ctx = ctx
        self.rest = rest

    def __call__(self):
        return _force_lift(self)


cdef object _force_lift(_LiftThunk self):
    cdef object io_t = self.io_t
    if io_t is None:
        io_t = self.ctx.handler(self.directive)
    return _lift_step(io_t, self.directive, self.ctx, self.rest)


@cython.final
cdef class _IoLiftK:
    cdef object io_k
    cdef object directive
    cdef _GovCtx ctx
    cdef object rest

    def __init__(self, io_k, directive, ctx, rest):
        self.io_k = io_k
        self.directive = directive
        self.ctx = ctx
        self.rest = rest

    def __call__(self, x):
        return Defer(
            _LiftThunk(_call_k(self.io_k, x), self.directive, self.ctx, self.rest)
        )


@cython.final
cdef class _RestK:
    # continuation after a directive's pipeline: one silent step, then
    # the interpretation of the program's own continuation
    cdef object k
    cdef _GovCtx ctx

    def __init__(self, k, ctx):
        self.k = k
        self.ctx = ctx

    def __call__(self, r):
        return Tau(_interp(_call_k(self.k, r), self.ctx))


cdef object _interp(object t, _GovCtx ctx):
    cdef dict memo = ctx.memo
    cdef object key = id(t)
    cdef object hit = memo.get(key)
    if hit is not None:
        return (<tuple>hit)[1]
    if t is SPIN:
        return SPIN
    d = Defer(_InterpThunk(t, ctx))
    memo[key] = (t, d)
    return d


cdef object _pipeline(object directive, _GovCtx ctx, object rest):
    cdef object g = Defer(_LiftThunk(None, directive, ctx, rest))
    cdef tuple pre = ctx.pre
    cdef Py_ssize_t i
    for i in range(len(pre) - 1, -1, -1):
        g = GateVis(pre[i], _GateK(g), directive)
    return g


cdef object _lift_step(object io_t, object directive, _GovCtx ctx, object rest):
    cdef object n = _unroll(io_t)
    cdef type tn = type(n)
    cdef object g
    cdef tuple post
    cdef Py_ssize_t i
    if tn is Ret:
        if type(rest) is _RestK:
            g = (<_RestK>rest)((<Ret>n).value)
        else:
            g = rest((<Ret>n).value)
        post = ctx.post
        for i in range(len(post) - 1, -1, -1):
            g = GateVis(post[i], ConstK(g), directive)
        return g
    if tn is Tau:
        if (<Tau>n).child is n:
            return SPIN
        return Tau(Defer(_LiftThunk((<Tau>n).child, directive, ctx, rest)))
    return Vis((<Vis>n).event, _IoLiftK((<Vis>n).k, directive, ctx, rest))


cdef object _interp_step(object t, _GovCtx ctx):
    cdef object n = _unroll(t)
    cdef type tn = type(n)
    if tn is Ret:
        return n
    if tn is Tau:
        if (<Tau>n).child is n:
            return SPIN
        return Tau(_interp((<Tau>n).child, ctx))
    return _pipeline((<Vis>n).event, ctx, _RestK((<Vis>n).k, ctx))


def interp_governed_tree(t, handler, pre_events, post_events):
    """Fold the governed handler over a directive program; lazy."""
    ctx = _GovCtx(handler, tuple(pre_events), tuple(post_events))
    return _interp(t, ctx)


def pipeline_tree(directive, handler, pre_events, post_events):
    """Standalone governed tree for one directive, ending in
    Ret(result)."""
    ctx = _GovCtx(handler, tuple(pre_events), tuple(post_events))
    return _pipeline(directive, ctx, Ret)


# ---------------------------------------------------------------------------
# Safety walk
# ---------------------------------------------------------------------------

SAFE = "safe"
UNSAFE = "unsafe"
EXHAUSTED = "exhausted"


def gov_safe_check(flag, t, fuel_in, probes):
    """Fuel-bounded walk of the permission-flag safety relation; see
    the pure kernel for the contract."""
    cdef long long fuel = fuel_in
    cdef long long visited = 0
    cdef list stack = [(t, True if flag else False)]
    cdef dict seen = {}
    cdef object node, fl, ev, k, a, b, c, prev, key
    cdef tuple probe, top
    cdef type tn
    cdef Py_ssize_t i
    while stack:
        top = <tuple>stack.pop()
        node = _unroll(top[0])
        fl = top[1]
        if fuel <= 0:
            return (EXHAUSTED, visited, None)
        fuel -= 1
        visited += 1
        tn = type(node)
        if tn is Ret:
            continue
        key = (id(node) << 1) | (1 if fl is True else 0)
        if key in seen:
            continue
        seen[key] = node
        if tn is Tau:
            stack.append(((<Tau>node).child, fl))
            continue
        ev = (<Vis>node).event
        k = (<Vis>node).k
        if ev.is_gov:
            a = _call_k(k, False)
            b = _call_k(k, True)
            stack.append((b, True))
            if a is not b:
                stack.append((a, True))
        else:
            if fl is not True:
                return (UNSAFE, visited, ev)
            probe = <tuple>probes[ev.answer_kind]
            prev = None
            for i in range(len(probe)):
                c = _call_k(k, probe[i])
                if c is not prev:
                    stack.append((c, True))
                    prev = c
    return (SAFE, visited, None)


# ---------------------------------------------------------------------------
# Fuel-bounded weak bisimulation
# ---------------------------------------------------------------------------

EQUAL = "equal"
DISTINCT = "distinct"


def eutt_fuel(t1, t2, fuel_in, probes):
    """Compare two trees up to finite silent prefixes; see the pure
    kernel for the contract, including pair memoization."""
    cdef long long fuel = fuel_in
    cdef list stack = [(t1, t2)]
    cdef dict seen = {}
    cdef object a, b, ka, kb, x, key, stripped
    cdef tuple probe, top
    cdef bint a_ret, b_ret
    cdef Py_ssize_t i
    while stack:
        top = <tuple>stack.pop()
        a = top[0]
        b = top[1]
        key = (id(a), id(b))
        if key in seen:
            if fuel <= 0:
                return EXHAUSTED
            fuel -= 1
            continue
        seen[key] = top
        while True:
            a = _unroll(a)
            if type(a) is not Tau:
                break
            if fuel <= 0:
                return EXHAUSTED
            fuel -= 1
            a = (<Tau>a).child
        while True:
            b = _unroll(b)
            if type(b) is not Tau:
                break
            if fuel <= 0:
                return EXHAUSTED
            fuel -= 1
            b = (<Tau>b).child
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
            if (<Ret>a).value != (<Ret>b).value:
                return DISTINCT
            continue
        if a_ret or b_ret:
            return DISTINCT
        if (<Vis>a).event != (<Vis>b).event:
            return DISTINCT
        ka = (<Vis>a).k
        kb = (<Vis>b).k
        probe = <tuple>probes[(<Vis>a).event.answer_kind]
        for i in range(len(probe)):
            x = probe[i]
            stack.append((_call_k(ka, x), _call_k(kb, x)))
    return EQUAL


# ---------------------------------------------------------------------------
# Trace execution
# ---------------------------------------------------------------------------


def run_governed_trace(t, env, fuel_in, trace_out):
    """Execute a governed tree under a stage/IO answerer; see the pure
    kernel for the contract."""
    cdef long long fuel = fuel_in
    cdef long long spent = 0
    cdef long dir_idx = -1
    cdef list out = <list>trace_out
    cdef object ev, ans, nxt, directive, idx_obj
    cdef type tn
    while True:
        t = _unroll(t)
        if fuel <= 0:
            return ("exhausted", None, None, dir_idx, spent)
        fuel -= 1
        spent += 1
        tn = type(t)
        if tn is Ret:
            return ("done", (<Ret>t).value, None, dir_idx, spent)
        if tn is Tau:
            if (<Tau>t).child is t:
                return ("diverged", None, None, dir_idx, spent)
            t = (<Tau>t).child
            continue
        ev = (<Vis>t).event
        if ev.is_gov:
            if ev.stage_index == 0:
                dir_idx += 1
            directive = (<GateVis>t).directive if tn is GateVis else None
            ans = env.answer_stage(ev, directive)
            idx_obj = dir_idx
            out.append("gov")
            out.append(ev)
            out.append(idx_obj)
            nxt = _call_k((<Vis>t).k, ans)
            if nxt is SPIN and not ans:
                return ("denied", None, ev, dir_idx, spent)
            t = nxt
        else:
            ans = env.answer_io(ev)
            idx_obj = dir_idx
            out.append("io")
            out.append(ev)
            out.append(idx_obj)
            t = _call_k((<Vis>t).k, ans)


def run_direct_trace(t, handler, env, fuel_in, trace_out):
    """Execute a directive program straight through its handler; see
    the pure kernel for the contract."""
    cdef long long fuel = fuel_in
    cdef long long spent = 0
    cdef long dir_idx = -1
    cdef list out = <list>trace_out
    cdef object io_t, k, ev, ans, idx_obj
    cdef type tn, itn
    while True:
        t = _unroll(t)
        if fuel <= 0:
            return ("exhausted", None, None, dir_idx, spent)
        fuel -= 1
        spent += 1
        tn = type(t)
        if tn is Ret:
            return ("done", (<Ret>t).value, None, dir_idx, spent)
        if tn is Tau:
            if (<Tau>t).child is t:
                return ("diverged", None, None, dir_idx, spent)
            t = (<Tau>t).child
            continue
        dir_idx += 1
        idx_obj = dir_idx
        io_t = handler((<Vis>t).event)
        k = (<Vis>t).k
        while True:
            io_t = _unroll(io_t)
            if fuel <= 0:
                return ("exhausted", None, None, dir_idx, spent)
            fuel -= 1
            spent += 1
            itn = type(io_t)
            if itn is Ret:
                t = _call_k(k, (<Ret>io_t).value)
                break
            if itn is Tau:
                if (<Tau>io_t).child is io_t:
                    return ("diverged", None, None, dir_idx, spent)
                io_t = (<Tau>io_t).child
                continue
            ev = (<Vis>io_t).event
            ans = env.answer_io(ev)
            out.append("io")
            out.append(ev)
            out.append(idx_obj)
            io_t = _call_k((<Vis>io_t).k, ans)


def run_governed_fused(t, handler, pre_events, post_events, env, fuel_in,
                       trace_out):
    """Execute the governed interpretation of a directive program
    without materializing pipeline nodes; see the pure kernel for the
    contract, including the run-length trace encoding."""
    cdef long long fuel = fuel_in
    cdef long long spent = 0
    cdef long dir_idx = -1
    cdef list out = <list>trace_out
    cdef tuple pre = tuple(pre_events)
    cdef tuple post = tuple(post_events)
    cdef Py_ssize_t npre = len(pre)
    cdef Py_ssize_t npost = len(post)
    cdef object gate_answers = getattr(env, "gate_answers", None)
    cdef bint by_type = gate_answers is not None and bool(
        getattr(env, "gate_answers_by_type", False)
    )
    cdef dict cache = {}
    cdef object d, io_t, r, ev, ge, ans, denied_gate, idx_obj
    cdef object npre_obj = npre
    cdef object npost_obj = npost
    cdef tuple answers
    cdef type tn, itn
    cdef Py_ssize_t i, asked
    while True:
        t = _unroll(t)
        if fuel <= 0:
            return ("exhausted", None, None, dir_idx, spent)
        tn = type(t)
        if tn is Ret:
            return ("done", (<Ret>t).value, None, dir_idx, spent + 1)
        if tn is Tau:
            fuel -= 1
            spent += 1
            if (<Tau>t).child is t:
                return ("diverged", None, None, dir_idx, spent)
            t = (<Tau>t).child
            continue
        d = (<Vis>t).event
        dir_idx += 1
        idx_obj = dir_idx
        if gate_answers is None:
            answers = None
            for i in range(npre):
                if fuel <= 0:
                    return ("exhausted", None, None, dir_idx, spent)
                fuel -= 1
                spent += 1
                ge = pre[i]
                ans = env.answer_stage(ge, d)
                out.append("gov")
                out.append(ge)
                out.append(idx_obj)
                if not ans:
                    return ("denied", None, ge, dir_idx, spent)
        else:
            if by_type:
                answers = <tuple>cache.get(type(d))
                if answers is None:
                    answers = <tuple>gate_answers(d)
                    cache[type(d)] = answers
            else:
                answers = <tuple>gate_answers(d)
            if (fuel >= npre and answers[0] is True and answers[1] is True
                    and answers[2] is True and answers[3] is True):
                fuel -= npre
                spent += npre
                out.append("pre")
                out.append(idx_obj)
                out.append(npre_obj)
            else:
                asked = 0
                denied_gate = None
                for i in range(npre):
                    if fuel <= 0:
                        if asked:
                            out.append("pre")
                            out.append(idx_obj)
                            out.append(asked)
                        return ("exhausted", None, None, dir_idx, spent)
                    fuel -= 1
                    spent += 1
                    asked += 1
                    if not answers[i]:
                        denied_gate = pre[i]
                        break
                out.append("pre")
                out.append(idx_obj)
                out.append(asked)
                if denied_gate is not None:
                    return ("denied", None, denied_gate, dir_idx, spent)
        io_t = handler(d)
        while True:
            io_t = _unroll(io_t)
            itn = type(io_t)
            if itn is Ret:
                r = (<Ret>io_t).value
                break  # absorbed by the lift; costs no fuel
            if fuel <= 0:
                return ("exhausted", None, None, dir_idx, spent)
            fuel -= 1
            spent += 1
            if itn is Tau:
                if (<Tau>io_t).child is io_t:
                    return ("diverged", None, None, dir_idx, spent)
                io_t = (<Tau>io_t).child
                continue
            ev = (<Vis>io_t).event
            ans = env.answer_io(ev)
            out.append("io")
            out.append(ev)
            out.append(idx_obj)
            io_t = _call_k((<Vis>io_t).k, ans)
        if answers is not None and fuel >= npost:
            fuel -= npost
            spent += npost
            out.append("post")
            out.append(idx_obj)
            out.append(npost_obj)
        else:
            asked = 0
            for i in range(npost):
                if fuel <= 0:
                    if answers is not None and asked:
                        out.append("post")
                        out.append(idx_obj)
                        out.append(asked)
                    return ("exhausted", None, None, dir_idx, spent)
                fuel -= 1
                spent += 1
                asked += 1
                ge = post[i]
                if answers is None:
                    env.answer_stage(ge, d)  # consumed; post stages cannot deny
                    out.append("gov")
                    out.append(ge)
                    out.append(idx_obj)
            if answers is not None and asked:
                out.append("post")
                out.append(idx_obj)
                out.append(asked)
        if fuel <= 0:
            return ("exhausted", None, None, dir_idx, spent)
        fuel -= 1
        spent += 1  # the silent step back into the program's continuation
        t = _call_k((<Vis>t).k, r)
