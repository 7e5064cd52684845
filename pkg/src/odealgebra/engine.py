"""Schema interpreter for length-ODE function algebras.

A :class:`Program` maps names to :class:`FunctionDef` objects.  A definition
is a basic function, a composition, a finite characteristic table, or a
schema instance (a :class:`SchemaKind` together with an initial-value
function ``g`` and step functions).  Evaluation is exact over Python
integers.

For every derivation along the binary length the value of ``f`` only
changes when ``len(x)`` does, i.e. between ``2**u - 1`` and ``2**u``, so
the interpreter samples the step functions at ``alpha(u) = 2**u - 1`` for
``u = 0 .. len(x) - 1`` instead of walking every integer below ``x``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping, Sequence, Union

from . import expr as E
from .errors import (
    ArityError,
    DomainError,
    NotLinear,
    SchemaViolation,
    UnknownFunction,
)

# -- basic functions ----------------------------------------------------------


def length(x: int) -> int:
    """Binary length, ``len(0) == 0``."""
    if x < 0:
        raise DomainError(f"len of negative value {x}")
    return x.bit_length()


def alpha(u: int) -> int:
    """Largest integer of binary length ``u`` (``2**u - 1``)."""
    return (1 << u) - 1


def smash(x: int, y: int) -> int:
    if x < 0 or y < 0:
        raise DomainError(f"smash of negative value ({x}, {y})")
    return (x << y.bit_length()) + y


def bit(i: int, x: int) -> int:
    if i < 0 or x < 0:
        raise DomainError(f"BIT({i}, {x}) outside the naturals")
    return (x >> i) & 1


def _sg(x: int) -> int:
    return 1 if x > 0 else 0


def _len(x: int) -> int:
    if x < 0:
        raise DomainError(f"len of negative value {x}")
    return x.bit_length()


#: Basic functions with a fixed arity; usable by name without a definition.
FIXED_BASICS: dict[str, tuple[int, Callable[..., int]]] = {
    "sg": (1, _sg),
    "len": (1, _len),
    "add": (2, lambda a, b: a + b),
    "sub": (2, lambda a, b: a - b),
    "div2": (1, lambda a: a // 2),
    "smash": (2, smash),
    "bit": (2, bit),
}

#: Basic functions whose arity is fixed by the definition that introduces them.
VARIADIC_BASICS = ("zero", "one", "proj")


def eval_basic(symbol: str, args: Sequence[int], index: int | None = None) -> int:
    """Evaluate a basic function on concrete arguments."""
    if symbol == "zero":
        return 0
    if symbol == "one":
        return 1
    if symbol == "proj":
        if index is None or not 1 <= index <= len(args):
            raise ArityError(f"projection index {index} with {len(args)} arguments")
        return args[index - 1]
    try:
        arity, fn = FIXED_BASICS[symbol]
    except KeyError:
        raise UnknownFunction(symbol) from None
    if len(args) != arity:
        raise ArityError(f"{symbol} expects {arity} arguments, got {len(args)}")
    return fn(*args)


# -- schema kinds -------------------------------------------------------------

Range = tuple  # (lo, hi) where hi may be None for "unbounded above"
NAT: Range = (0, None)
BOOL: Range = (0, 1)


def _within(v: int, r: Range) -> bool:
    lo, hi = r
    return v >= lo and (hi is None or v <= hi)


def _fmt_range(r: Range) -> str:
    lo, hi = r
    return f"[{lo}, {'inf' if hi is None else hi}]"


def _k_times_top(n: int, c: int) -> E.SgExpr:
    # n * sg(f - c) * k
    return E.Mul(E.Mul(E.Const(n), E.Sg(E.Sub(E.F, E.Const(c)))), E.HCall(0))


class SchemaKind:
    """Common interface of all schema kinds."""

    tag: str = ""
    #: number of step functions, or None for "any number"
    n_steps: int | None = 1
    #: step functions take ``p + step_extra`` arguments when ``g`` takes ``p``
    step_extra: int = 1
    along_length: bool = True
    strict: bool = True

    def g_range(self) -> Range | None:
        return NAT

    def step_range(self, i: int) -> Range | None:
        return BOOL

    def expression(self) -> E.SgExpr | None:
        """Derivative as an sg-polynomial over ``f``, the ``h`` slots and the parameters."""
        return None

    def options(self) -> list:
        return []


@dataclass(frozen=True)
class LengthODE1(SchemaKind):
    tag = "l-ode1"

    def expression(self):
        return E.Add(E.F, E.HCall(0))


@dataclass(frozen=True)
class Length2ODE(SchemaKind):
    tag = "l-2ode"

    def g_range(self):
        return BOOL

    def expression(self):
        return E.Sub(E.HCall(0), E.Mul(E.Const(2), E.Mul(E.HCall(0), E.F)))


@dataclass(frozen=True)
class LengthNODE(SchemaKind):
    """Counting modulo ``n``.

    The literal derivative is ``-n * k * floor(f / (n-1)) + k``; on the
    schema's range ``{0..n-1}`` the floor only tests ``f == n-1``, which is
    what :meth:`expression` spells out with ``sg(f - (n-2))``.
    """

    n: int
    tag = "l-node"

    def g_range(self):
        return (0, self.n - 1)

    def expression(self):
        return E.Sub(E.HCall(0), _k_times_top(self.n, self.n - 2))

    def options(self):
        return [":n", self.n]


@dataclass(frozen=True)
class LengthNODEStar(SchemaKind):
    """Derivative ``-n * floor((f + k) / n) + k``; same sg form as :class:`LengthNODE` on range."""

    n: int
    tag = "l-node*"

    def g_range(self):
        return (0, self.n - 1)

    def expression(self):
        return E.Sub(E.HCall(0), _k_times_top(self.n, self.n - 2))

    def options(self):
        return [":n", self.n]


@dataclass(frozen=True)
class NonStrictNODE(SchemaKind):
    n: int
    c: int
    tag = "l-node-ns"
    strict = False

    def g_range(self):
        return (0, self.n - 1)

    def expression(self):
        return E.Sub(E.HCall(0), _k_times_top(self.n, self.c))

    def options(self):
        return [":n", self.n, ":c", self.c]


@dataclass(frozen=True)
class Length0ODE(SchemaKind):
    tag = "l-0ode"

    def g_range(self):
        return BOOL

    def expression(self):
        return E.HCall(0)


@dataclass(frozen=True)
class LengthODE2Up(SchemaKind):
    """Shift by ``len(bound(y))`` bits per length step, then add ``k``.

    ``bound`` names a function of the parameters only; the multiplier
    ``2**len(bound) - 1`` is exposed to the expression as slot ``h1``.
    """

    bound: str
    tag = "l-ode2up"

    def step_range(self, i):
        return NAT

    def expression(self):
        return E.Add(E.Mul(E.HCall(1), E.F), E.HCall(0))

    def options(self):
        return [":bound", self.bound]


@dataclass(frozen=True)
class LengthPODE(SchemaKind):
    A: E.SgExpr
    B: E.SgExpr
    tag = "l-pode"
    n_steps = None

    def step_range(self, i):
        return None

    def expression(self):
        return E.Add(E.Mul(self.A, E.F), self.B)

    def options(self):
        return [":A", E.to_form(self.A), ":B", E.to_form(self.B)]


@dataclass(frozen=True)
class LengthB0ODE(SchemaKind):
    K: E.SgExpr
    tag = "l-b0ode"
    n_steps = None
    strict = False

    def step_range(self, i):
        return None

    def expression(self):
        return E.Sub(self.K, E.F)

    def options(self):
        return [":K", E.to_form(self.K)]


@dataclass(frozen=True)
class LengthBODE(SchemaKind):
    B: E.SgExpr
    cs: tuple[int, ...] = ()
    tag = "l-bode"
    n_steps = None
    strict = False

    def step_range(self, i):
        return None

    def expression(self):
        return E.Sub(self.B, E.F)

    def options(self):
        return [":B", E.to_form(self.B), ":cs", list(self.cs)]


@dataclass(frozen=True)
class LambdaODE(SchemaKind):
    """Derivation along an arbitrary function ``lam(x, y...)``.

    ``expr`` is the derivative; it may mention ``f``, the ``h`` slots and the
    parameters.  With ``lam == "len"`` this is a plain length-ODE.
    """

    lam: str
    expr: E.SgExpr
    tag = "lambda-ode"
    n_steps = None
    along_length = False
    strict = False

    def g_range(self):
        return None

    def step_range(self, i):
        return None

    def expression(self):
        return self.expr

    def options(self):
        return [":lambda", self.lam, ":P", E.to_form(self.expr)]


@dataclass(frozen=True)
class CRN(SchemaKind):
    """Concatenation recursion on notation: ``f(2x+i) = 2 f(x) + h_i(x)``."""

    tag = "crn"
    n_steps = 2
    along_length = False


@dataclass(frozen=True)
class KBRN(SchemaKind):
    """k-bounded recursion on notation: ``f(2x+i) = h_i(x, y, f(x))`` with values in ``[0, k]``."""

    k: int = 1
    tag = "kbrn"
    n_steps = 2
    step_extra = 2
    along_length = False

    def g_range(self):
        return (0, self.k)

    def step_range(self, i):
        return (0, self.k)

    def options(self):
        return [":kmax", self.k]


KIND_TAGS = {
    cls.tag: cls
    for cls in (
        LengthODE1, Length2ODE, LengthNODE, LengthNODEStar, NonStrictNODE,
        Length0ODE, LengthODE2Up, LengthPODE, LengthB0ODE, LengthBODE,
        LambdaODE, CRN, KBRN,
    )
}

# -- definitions and programs -------------------------------------------------


@dataclass(frozen=True)
class Basic:
    symbol: str
    index: int | None = None


@dataclass(frozen=True)
class Compose:
    outer: str
    inners: tuple[str, ...]


@dataclass(frozen=True)
class Schema:
    kind: SchemaKind
    g: str
    steps: tuple[str, ...]


@dataclass(frozen=True)
class Table:
    """0/1 characteristic function given by the rows where it is 1.

    ``None`` in a row position matches any argument.
    """

    rows: tuple[tuple[int | None, ...], ...]


Body = Union[Basic, Compose, Schema, Table]


@dataclass(frozen=True)
class FunctionDef:
    name: str
    params: tuple[str, ...]
    body: Body
    range: Range | None = None  # declared output range, checked at run time

    @property
    def arity(self) -> int:
        return len(self.params)

    def refs(self) -> list[str]:
        b = self.body
        if isinstance(b, Compose):
            return [b.outer, *b.inners]
        if isinstance(b, Schema):
            out = [b.g, *b.steps]
            if isinstance(b.kind, LengthODE2Up):
                out.append(b.kind.bound)
            if isinstance(b.kind, LambdaODE):
                out.append(b.kind.lam)
            return out
        return []


def default_params(arity: int) -> tuple[str, ...]:
    if arity == 0:
        return ()
    return ("x",) + tuple(f"y{i}" for i in range(1, arity))


@dataclass
class Program:
    defs: dict[str, FunctionDef] = field(default_factory=dict)
    entry: str | None = None

    def __post_init__(self):
        self._evaluator = None

    def __contains__(self, name: str) -> bool:
        return name in self.defs or name in FIXED_BASICS

    def arity_of(self, name: str) -> int:
        if name in self.defs:
            return self.defs[name].arity
        if name in FIXED_BASICS:
            return FIXED_BASICS[name][0]
        raise UnknownFunction(name)

    def extended(self, defs: Iterable[FunctionDef], entry: str | None = None) -> "Program":
        merged = dict(self.defs)
        for d in defs:
            old = merged.get(d.name)
            if old is not None and old != d:
                raise ValueError(f"conflicting definitions for {d.name!r}")
            merged[d.name] = d
        return Program(merged, entry if entry is not None else self.entry)

    def evaluator(self) -> "Evaluator":
        if self._evaluator is None:
            self._evaluator = Evaluator(self)
        return self._evaluator

    def __call__(self, *args: int) -> int:
        if self.entry is None:
            raise UnknownFunction("program has no entry point")
        return eval_program(self, self.entry, args)


# small constructors used throughout the package


def basic(name: str, arity: int, symbol: str, index: int | None = None) -> FunctionDef:
    return FunctionDef(name, default_params(arity), Basic(symbol, index))


def compose(name: str, arity: int, outer: str, *inners: str, params=None, range=None) -> FunctionDef:
    return FunctionDef(name, tuple(params) if params else default_params(arity), Compose(outer, tuple(inners)), range)


def schema(name: str, arity: int, kind: SchemaKind, g: str, *steps: str, params=None, range=None) -> FunctionDef:
    return FunctionDef(name, tuple(params) if params else default_params(arity), Schema(kind, g, tuple(steps)), range)


# -- traces -------------------------------------------------------------------


@dataclass(frozen=True)
class TracePoint:
    u: int
    at: int  # sample point where the step function was consulted (0 for u = -1)
    value: int  # value of f once this step has been applied


@dataclass(frozen=True)
class Trace:
    points: tuple[TracePoint, ...]

    @property
    def final(self) -> int:
        return self.points[-1].value

    @property
    def values(self) -> list[int]:
        return [p.value for p in self.points]

    def __len__(self):
        return len(self.points)


# -- evaluation ---------------------------------------------------------------

Observer = Callable[[str, tuple, Trace], None]


class Evaluator:
    """Compiles the definitions of a program into Python closures.

    ``memo`` caches every non-basic definition by argument tuple for the
    duration of one top-level call (``"call"``) or for the evaluator's
    lifetime (``"persistent"``).  ``observer`` receives the trace of every
    schema run.
    """

    def __init__(self, program: Program, *, memo: str | None = None, observer: Observer | None = None):
        if memo not in (None, "call", "persistent"):
            raise ValueError(f"bad memo mode {memo!r}")
        self.program = program
        self.memo = memo
        self.observer = observer
        self._fns: dict[str, Callable[..., int]] = {}
        self._cache: dict = {}

    def __call__(self, name: str, *args: int) -> int:
        arity = self.program.arity_of(name)
        if len(args) != arity:
            raise ArityError(f"{name} expects {arity} arguments, got {len(args)}")
        if self.memo == "call":
            self._cache.clear()
        return self.fn(name)(*args)

    def fn(self, name: str) -> Callable[..., int]:
        f = self._fns.get(name)
        if f is None:
            self._compile_dependencies(name)
            f = self._compile(name)
            self._fns[name] = f
        return f

    def _compile_dependencies(self, name: str) -> None:
        # post-order walk so deep reference chains do not exhaust the Python stack
        order: list[str] = []
        seen = set(self._fns)
        stack = [(name, False)]
        while stack:
            n, expanded = stack.pop()
            if expanded:
                order.append(n)
                continue
            if n in seen or n not in self.program.defs:
                continue
            seen.add(n)
            stack.append((n, True))
            stack.extend((r, False) for r in self.program.defs[n].refs() if r not in seen)
        for n in order[:-1] if order and order[-1] == name else order:
            if n not in self._fns:
                self._fns[n] = self._compile(n)

    # compilation ---------------------------------------------------------

    def _compile(self, name: str) -> Callable[..., int]:
        d = self.program.defs.get(name)
        if d is None:
            if name in FIXED_BASICS:
                return FIXED_BASICS[name][1]
            raise UnknownFunction(name)
        # placeholder so that self-references fail loudly instead of recursing
        self._fns[name] = _cyclic(name)
        body = d.body
        if isinstance(body, Basic):
            f = _compile_basic(body)
        elif isinstance(body, Compose):
            f = self._compile_compose(body)
        elif isinstance(body, Table):
            f = _compile_table(body)
        elif isinstance(body, Schema):
            f = self._compile_schema(d)
        else:
            raise TypeError(f"unknown body {body!r}")
        if d.range is not None:
            f = _range_checked(name, f, d.range)
        if self.memo is not None and not isinstance(body, Basic):
            f = _memoized(name, f, self._cache)
        return f

    def _compile_compose(self, body: Compose):
        outer = self.fn(body.outer)
        inners = [self.fn(i) for i in body.inners]
        if len(inners) == 0:
            return lambda *a: outer()
        if len(inners) == 1:
            (i0,) = inners
            return lambda *a: outer(i0(*a))
        if len(inners) == 2:
            i0, i1 = inners
            return lambda *a: outer(i0(*a), i1(*a))
        if len(inners) == 3:
            i0, i1, i2 = inners
            return lambda *a: outer(i0(*a), i1(*a), i2(*a))
        return lambda *a: outer(*[i(*a) for i in inners])

    def _compile_schema(self, d: FunctionDef):
        runner = self.schema_runner(d)
        name, observer = d.name, self.observer
        if observer is None:
            return lambda *args: runner(args, None)

        def observed(*args):
            points: list[TracePoint] = []
            value = runner(args, points)
            observer(name, args, Trace(tuple(points)))
            return value

        return observed

    def schema_runner(self, d: FunctionDef) -> Callable[[tuple, list | None], int]:
        """Runner ``(args, points) -> value``; ``points`` collects the trace when not None."""
        body: Schema = d.body
        kind = body.kind
        g = self.fn(body.g)
        steps = [self.fn(s) for s in body.steps]
        if isinstance(kind, (CRN, KBRN)):
            return _notation_runner(d, kind, g, steps)
        if isinstance(kind, LambdaODE) and kind.lam != "len":
            return _lambda_runner(d, kind, g, steps, self.fn(kind.lam))
        step = _stepper(d, kind, steps, self)
        return _length_runner(d, kind, g, step)


def _cyclic(name):
    def fail(*a):
        raise UnknownFunction(f"{name} is defined in terms of itself")

    return fail


def _compile_basic(body: Basic):
    if body.symbol == "zero":
        return lambda *a: 0
    if body.symbol == "one":
        return lambda *a: 1
    if body.symbol == "proj":
        i = body.index - 1
        return lambda *a: a[i]
    try:
        return FIXED_BASICS[body.symbol][1]
    except KeyError:
        raise UnknownFunction(body.symbol) from None


def _compile_table(body: Table):
    groups: dict[tuple[int, ...], set] = {}
    for row in body.rows:
        idx = tuple(i for i, v in enumerate(row) if v is not None)
        groups.setdefault(idx, set()).add(tuple(row[i] for i in idx))
    items = list(groups.items())

    def table(*a):
        for idx, keys in items:
            if tuple(a[i] for i in idx) in keys:
                return 1
        return 0

    return table


def _range_checked(name, f, r):
    def checked(*a):
        v = f(*a)
        if not _within(v, r):
            raise SchemaViolation(f"{name} out of declared range {_fmt_range(r)}: {v}")
        return v

    return checked


def _memoized(name, f, cache):
    def cached(*a):
        key = (name, a)
        try:
            return cache[key]
        except KeyError:
            v = cache[key] = f(*a)
            return v

    return cached


def _check(d: FunctionDef, what: str, v: int, r: Range | None):
    if r is not None and not _within(v, r):
        raise SchemaViolation(f"{d.name}: {what} out of range {_fmt_range(r)}: {v}")


def _stepper(d: FunctionDef, kind: SchemaKind, steps, ev: Evaluator):
    """Return ``step(f, z, ys) -> f_next`` for a length-derivation kind."""
    name = d.name

    def bad(what, v, r):
        raise SchemaViolation(f"{name}: {what} out of range {_fmt_range(r)}: {v}")

    if isinstance(kind, (LengthODE1, Length2ODE, LengthNODE, LengthNODEStar, NonStrictNODE, Length0ODE)):
        (k,) = steps

        def kval(z, ys):
            v = k(z, *ys)
            if v != 0 and v != 1:
                bad("k", v, BOOL)
            return v

        if isinstance(kind, LengthODE1):
            return lambda f, z, ys: 2 * f + kval(z, ys)
        if isinstance(kind, Length2ODE):
            def step2(f, z, ys):
                kv = kval(z, ys)
                return f + kv - 2 * kv * f
            return step2
        if isinstance(kind, LengthNODE):
            top = kind.n - 1

            def stepn(f, z, ys):
                # floor(f / (n-1)) on the range {0..n-1} is the test f == n-1
                if kval(z, ys):
                    return 0 if f == top else f + 1
                return f
            return stepn
        if isinstance(kind, LengthNODEStar):
            n = kind.n

            def stepstar(f, z, ys):
                kv = kval(z, ys)
                return f - n * ((f + kv) // n) + kv
            return stepstar
        if isinstance(kind, NonStrictNODE):
            n, c = kind.n, kind.c

            def stepns(f, z, ys):
                kv = kval(z, ys)
                return f + kv - n * (1 if f - c > 0 else 0) * kv
            return stepns
        return lambda f, z, ys: f + kval(z, ys)

    if isinstance(kind, LengthODE2Up):
        (k,) = steps
        bound = ev.fn(kind.bound)

        def stepup(f, z, ys):
            kv = k(z, *ys)
            hb = bound(*ys)
            if kv < 0:
                bad("k", kv, NAT)
            if hb < max(1, kv):
                raise SchemaViolation(f"{name}: bound {hb} below max(1, k={kv})")
            return (f << hb.bit_length()) + kv
        return stepup

    params = d.params
    env_of = lambda z, ys: dict(zip(params, (z, *ys)))

    if isinstance(kind, LengthPODE):
        A, B = kind.A, kind.B

        def stepp(f, z, ys):
            hv = [h(z, *ys) for h in steps]
            env = env_of(z, ys)
            a = E.eval_expr(A, env, f, hv)
            b = E.eval_expr(B, env, f, hv)
            if a < 1:
                bad("A", a, (1, None))
            if b < 1:
                bad("B", b, (1, None))
            return f + a * f + b
        return stepp

    if isinstance(kind, LengthB0ODE):
        K = kind.K

        def stepb0(f, z, ys):
            kv = E.eval_expr(K, env_of(z, ys), f, [h(z, *ys) for h in steps])
            if kv != 0 and kv != 1:
                bad("K", kv, BOOL)
            return kv
        return stepb0

    if isinstance(kind, LengthBODE):
        B = kind.B

        def stepb(f, z, ys):
            bv = E.eval_expr(B, env_of(z, ys), f, [h(z, *ys) for h in steps])
            if bv < 0:
                bad("B", bv, NAT)
            return bv
        return stepb

    if isinstance(kind, LambdaODE):
        P = kind.expr
        return lambda f, z, ys: f + E.eval_expr(P, env_of(z, ys), f, [h(z, *ys) for h in steps])

    raise TypeError(f"{kind!r} is not a length-derivation kind")


def _length_runner(d: FunctionDef, kind: SchemaKind, g, step):
    g_range = kind.g_range()
    name = d.name

    def run(args, points):
        x, ys = args[0], args[1:]
        if x < 0:
            raise DomainError(f"{name}: negative recursion argument {x}")
        f = g(*ys)
        if g_range is not None and not _within(f, g_range):
            raise SchemaViolation(f"{name}: g out of range {_fmt_range(g_range)}: {f}")
        if points is None:
            for u in range(x.bit_length()):
                f = step(f, (1 << u) - 1, ys)
            return f
        points.append(TracePoint(-1, 0, f))
        for u in range(x.bit_length()):
            z = (1 << u) - 1
            f = step(f, z, ys)
            points.append(TracePoint(u, z, f))
        return f

    return run


def _notation_runner(d: FunctionDef, kind: SchemaKind, g, steps):
    name = d.name
    crn = isinstance(kind, CRN)
    g_range = kind.g_range()
    h_range = kind.step_range(0)

    def run(args, points):
        x, ys = args[0], args[1:]
        if x < 0:
            raise DomainError(f"{name}: negative recursion argument {x}")
        f = g(*ys)
        if not _within(f, g_range):
            raise SchemaViolation(f"{name}: g out of range {_fmt_range(g_range)}: {f}")
        if points is not None:
            points.append(TracePoint(-1, 0, f))
        prefix = 0
        for u in range(x.bit_length() - 1, -1, -1):
            b = (x >> u) & 1
            if crn:
                hv = steps[b](prefix, *ys)
                if hv != 0 and hv != 1:
                    raise SchemaViolation(f"{name}: h{b} out of range [0, 1]: {hv}")
                f = 2 * f + hv
            else:
                f = steps[b](prefix, *ys, f)
                if not _within(f, h_range):
                    raise SchemaViolation(f"{name}: h{b} out of range {_fmt_range(h_range)}: {f}")
            if points is not None:
                points.append(TracePoint(len(points) - 1, prefix, f))
            prefix = 2 * prefix + b
        return f

    return run


def _lambda_runner(d: FunctionDef, kind: LambdaODE, g, steps, lam):
    P, params = kind.expr, d.params

    def run(args, points):
        x, ys = args[0], args[1:]
        if x < 0:
            raise DomainError(f"{d.name}: negative recursion argument {x}")
        f = g(*ys)
        if points is not None:
            points.append(TracePoint(-1, 0, f))
        prev = lam(0, *ys)
        for t in range(x):
            nxt = lam(t + 1, *ys)
            delta = nxt - prev
            if delta:
                env = dict(zip(params, (t, *ys)))
                f += delta * E.eval_expr(P, env, f, [h(t, *ys) for h in steps])
                if points is not None:
                    points.append(TracePoint(len(points) - 1, t, f))
            prev = nxt
        return f

    return run


# -- public evaluation entry points --------------------------------------------


def eval_program(p: Program, name: str, args: Sequence[int]) -> int:
    return p.evaluator()(name, *args)


def _schema_def(p: Program, name: str) -> FunctionDef:
    d = p.defs.get(name)
    if d is None:
        raise UnknownFunction(name)
    if not isinstance(d.body, Schema):
        raise TypeError(f"{name} is not a schema instance")
    return d


def run_recurrence(p: Program, name: str, args: Sequence[int]) -> Trace:
    """Unroll the schema instance ``name`` on ``args`` and return its trace."""
    d = _schema_def(p, name)
    if len(args) != d.arity:
        raise ArityError(f"{name} expects {d.arity} arguments, got {len(args)}")
    points: list[TracePoint] = []
    p.evaluator().schema_runner(d)(tuple(args), points)
    return Trace(tuple(points))


def linear_parts(d: FunctionDef) -> tuple[E.SgExpr, E.SgExpr]:
    """``(A, B)`` with derivative ``A*f + B`` for a linear length-ODE instance."""
    kind = d.body.kind
    P = kind.expression()
    if P is None or not (kind.along_length or (isinstance(kind, LambdaODE) and kind.lam == "len")):
        raise NotLinear(f"{d.name}: {kind.tag} has no length-ODE closed form")
    if E.classify(P, {E.FCALL}) is E.Classification.HIGHER:
        raise NotLinear(f"{d.name}: derivative has degree > 1 in f")
    parts = E.split_linear(P)
    if parts is None:
        raise NotLinear(f"{d.name}: derivative is not of the form A*f + B")
    return parts


def closed_form(p: Program, name: str, args: Sequence[int]) -> int:
    """Evaluate a linear length-ODE by its product-sum solution.

    ``f(x) = sum_{u=-1}^{L-1} prod_{t=u+1}^{L-1} (1 + A_t) * B_u`` with
    ``L = len(x)``, ``B_{-1} = g(y)`` and ``A_t, B_t`` evaluated at
    ``alpha(t)``.  When ``A`` or ``B`` consult ``f`` (under sg), the value
    ``f(alpha(t))`` is itself obtained from the same formula on the shorter
    prefix, never by stepping the recurrence.
    """
    d = _schema_def(p, name)
    A, B = linear_parts(d)
    ev = p.evaluator()
    body: Schema = d.body
    kind = body.kind
    x, ys = args[0], tuple(args[1:])
    if x < 0:
        raise DomainError(f"{name}: negative recursion argument {x}")
    g = ev.fn(body.g)
    steps = [ev.fn(s) for s in body.steps]
    bound = ev.fn(kind.bound) if isinstance(kind, LengthODE2Up) else None

    def slots(z):
        hv = [h(z, *ys) for h in steps]
        if bound is not None:
            hv.append((1 << bound(*ys).bit_length()) - 1)
        return hv

    L = length(x)
    coeff_a: list[int] = []
    coeff_b: list[int] = [g(*ys)]  # B_{-1}

    def solution(upto: int) -> int:
        # value after `upto` length steps, from the coefficients gathered so far
        total = 0
        for u in range(-1, upto):
            prod = 1
            for t in range(u + 1, upto):
                prod *= 1 + coeff_a[t]
            total += prod * coeff_b[u + 1]
        return total

    for t in range(L):
        z = alpha(t)
        env = dict(zip(d.params, (z, *ys)))
        hv = slots(z)
        f_t = solution(t)
        coeff_a.append(E.eval_expr(A, env, f_t, hv))
        coeff_b.append(E.eval_expr(B, env, f_t, hv))
    return solution(L)


# -- static validation ----------------------------------------------------------


@dataclass(frozen=True)
class Diagnostic:
    where: str
    code: str
    message: str
    dynamic: bool = False

    def __str__(self):
        return f"{self.where}: {self.message}"


def _subset(inner: Range, outer: Range) -> bool:
    lo_ok = inner[0] >= outer[0]
    if outer[1] is None:
        return lo_ok
    return lo_ok and inner[1] is not None and inner[1] <= outer[1]


def infer_range(p: Program, name: str, _seen=None) -> Range | None:
    """Conservative static range of ``name`` (None when unknown)."""
    seen = _seen if _seen is not None else set()
    if name in seen:
        return None
    seen = seen | {name}
    if name in ("sg", "bit"):
        return BOOL
    if name == "len":
        return NAT
    if name in FIXED_BASICS:
        return None
    d = p.defs.get(name)
    if d is None:
        return None
    if d.range is not None:
        return d.range
    b = d.body
    if isinstance(b, Basic):
        return {"zero": (0, 0), "one": (1, 1)}.get(b.symbol)
    if isinstance(b, Table):
        return BOOL
    if isinstance(b, Compose):
        if b.outer == "div2" or b.outer == "add":
            parts = [infer_range(p, i, seen) for i in b.inners]
            if any(r is None for r in parts):
                return None
            if b.outer == "div2":
                lo, hi = parts[0]
                return (lo // 2, None if hi is None else hi // 2)
            lo = parts[0][0] + parts[1][0]
            hi = None if parts[0][1] is None or parts[1][1] is None else parts[0][1] + parts[1][1]
            return (lo, hi)
        return infer_range(p, b.outer, seen)
    if isinstance(b, Schema):
        k = b.kind
        if isinstance(k, (Length2ODE,)):
            return BOOL
        if isinstance(k, (LengthNODE, LengthNODEStar)):
            return (0, k.n - 1)
        if isinstance(k, NonStrictNODE) and k.c == k.n - 2:
            return (0, k.n - 1)
        if isinstance(k, KBRN):
            return (0, k.k)
        if isinstance(k, (LengthODE1, Length0ODE, LengthODE2Up, CRN, LengthBODE)):
            return NAT
        if isinstance(k, LengthB0ODE):
            g = infer_range(p, b.g, seen)
            return BOOL if g is not None and _subset(g, BOOL) else NAT
    return None


def _step_arities(d: FunctionDef) -> tuple[int, int]:
    kind = d.body.kind
    p = d.arity - 1
    return p, p + kind.step_extra


def validate(p: Program) -> list[Diagnostic]:
    """Static checks; an empty list means the program is well formed.

    Range conditions on arbitrary user functions cannot be decided here.
    They are reported only when a declared or inferred range contradicts the
    schema; otherwise they are left to the run-time checks of the evaluator.
    """
    out: list[Diagnostic] = []

    def diag(where, code, msg):
        out.append(Diagnostic(where, code, msg))

    if p.entry is not None and p.entry not in p:
        diag("<program>", "unknown-entry", f"entry {p.entry!r} is not defined")

    for name, d in p.defs.items():
        if name != d.name:
            diag(name, "name", f"definition stored under {name!r} is named {d.name!r}")
        if name in FIXED_BASICS:
            diag(name, "shadow", f"{name} shadows a basic function")
        if len(set(d.params)) != len(d.params):
            diag(name, "params", "duplicate parameter names")
        for prm in d.params:
            if E.is_reserved(prm):
                diag(name, "params", f"parameter {prm!r} is a reserved atom")
        for r in d.refs():
            if r not in p:
                diag(name, "unknown-ref", f"reference to undefined function {r!r}")
        _check_body(p, d, diag)

    for cyc in _cycles(p):
        diag(cyc[0], "cycle", "cyclic definition: " + " -> ".join(cyc))
    return out


def _arity_ok(p: Program, ref: str, want: int) -> bool:
    return ref not in p or p.arity_of(ref) == want


def _check_body(p: Program, d: FunctionDef, diag):
    name, b = d.name, d.body
    if isinstance(b, Basic):
        if b.symbol == "proj":
            if b.index is None or not 1 <= b.index <= d.arity:
                diag(name, "arity", f"projection index {b.index} out of 1..{d.arity}")
        elif b.symbol in FIXED_BASICS:
            if FIXED_BASICS[b.symbol][0] != d.arity:
                diag(name, "arity", f"{b.symbol} has arity {FIXED_BASICS[b.symbol][0]}, not {d.arity}")
        elif b.symbol not in VARIADIC_BASICS:
            diag(name, "unknown-basic", f"unknown basic symbol {b.symbol!r}")
        return
    if isinstance(b, Table):
        for row in b.rows:
            if len(row) != d.arity:
                diag(name, "arity", f"table row {row} does not have {d.arity} entries")
        return
    if isinstance(b, Compose):
        if b.outer in p and p.arity_of(b.outer) != len(b.inners):
            diag(name, "arity", f"{b.outer} takes {p.arity_of(b.outer)} arguments, given {len(b.inners)}")
        for i in b.inners:
            if not _arity_ok(p, i, d.arity):
                diag(name, "arity", f"inner function {i} must take {d.arity} arguments")
        return
    kind = b.kind
    if d.arity < 1:
        diag(name, "arity", "a schema instance needs at least the recursion argument")
        return
    gp, sp = _step_arities(d)
    if not _arity_ok(p, b.g, gp):
        diag(name, "arity", f"g={b.g} must take {gp} arguments")
    for s in b.steps:
        if not _arity_ok(p, s, sp):
            diag(name, "arity", f"step function {s} must take {sp} arguments")
    if kind.n_steps is not None and len(b.steps) != kind.n_steps:
        diag(name, "steps", f"{kind.tag} takes {kind.n_steps} step functions, given {len(b.steps)}")
    if isinstance(kind, (LengthNODE, LengthNODEStar, NonStrictNODE)) and kind.n < 2:
        diag(name, "modulus", f"modulus n={kind.n} must be at least 2")
    if isinstance(kind, NonStrictNODE) and kind.c != kind.n - 2:
        diag(name, "constant", f"c={kind.c} must equal n-2={kind.n - 2}")
    if isinstance(kind, KBRN) and kind.k < 0:
        diag(name, "bound", f"k={kind.k} must be non-negative")
    if isinstance(kind, LengthODE2Up) and not _arity_ok(p, kind.bound, gp):
        diag(name, "arity", f"bound {kind.bound} must take {gp} arguments")
    if isinstance(kind, LambdaODE) and kind.lam != "len" and not _arity_ok(p, kind.lam, d.arity):
        diag(name, "arity", f"lambda {kind.lam} must take {d.arity} arguments")

    _check_expressions(d, kind, diag)

    # static range conditions
    g_req = kind.g_range()
    if g_req is not None:
        g_has = infer_range(p, b.g)
        if g_has is not None and not _subset(g_has, g_req):
            diag(name, "g-range", f"g out of range: {b.g} ranges over {_fmt_range(g_has)}, "
                                  f"{kind.tag} requires {_fmt_range(g_req)}")
    for i, s in enumerate(b.steps):
        s_req = kind.step_range(i)
        if s_req is None:
            continue
        s_has = infer_range(p, s)
        if s_has is not None and not _subset(s_has, s_req):
            label = "k" if kind.n_steps == 1 else f"h{i}"
            diag(name, f"{label}-range", f"{label} out of range: {s} ranges over {_fmt_range(s_has)}, "
                                         f"{kind.tag} requires {_fmt_range(s_req)}")


def _check_expressions(d: FunctionDef, kind: SchemaKind, diag):
    name = d.name
    nsteps = len(d.body.steps)
    user: list[tuple[str, E.SgExpr]] = []
    if isinstance(kind, LengthPODE):
        user = [("A", kind.A), ("B", kind.B)]
    elif isinstance(kind, LengthB0ODE):
        user = [("K", kind.K)]
    elif isinstance(kind, LengthBODE):
        user = [("B", kind.B)]
    elif isinstance(kind, LambdaODE):
        user = [("P", kind.expr)]
    for label, e in user:
        stray = E.free_vars(e) - set(d.params)
        if stray:
            diag(name, "unbound", f"{label} mentions unbound variables {sorted(stray)}")
        bad = {i for i in E.h_slots(e) if i >= nsteps}
        if bad:
            diag(name, "h-slot", f"{label} uses slots {sorted(bad)} but only {nsteps} step functions are given")

    if isinstance(kind, LengthPODE):
        for label, e in user:
            if E.contains_f(e):
                diag(name, "strict", f"{label} mentions f; l-pode is strict")
    if isinstance(kind, LengthB0ODE):
        if not E.is_limited(kind.K):
            diag(name, "limited", "K must be a limited expression (no mul)")
        if E.f_outside_sg(kind.K):
            diag(name, "f-shape", "f occurs in K outside the scope of sg")
    if isinstance(kind, LengthBODE):
        cs, ok = E.f_sg_shapes(kind.B)
        if not ok:
            diag(name, "f-shape", "f occurs in B other than as sg(f - c)")
        undeclared = sorted(set(cs) - set(kind.cs))
        if undeclared:
            diag(name, "f-shape", f"constants {undeclared} in sg(f - c) are not declared in :cs")
    P = kind.expression()
    if P is not None and kind.along_length:
        if E.classify(P, {E.FCALL}) is E.Classification.HIGHER:
            diag(name, "linear", "derivative is not essentially linear in f")


def _cycles(p: Program) -> list[list[str]]:
    WHITE, GREY, BLACK = 0, 1, 2
    color = {n: WHITE for n in p.defs}
    found: list[list[str]] = []

    def visit(n, path):
        color[n] = GREY
        for r in p.defs[n].refs():
            if r not in p.defs:
                continue
            if color[r] == GREY:
                found.append(path[path.index(r):] + [r])
            elif color[r] == WHITE:
                visit(r, path + [r])
        color[n] = BLACK

    for n in p.defs:
        if color[n] == WHITE:
            visit(n, [n])
    return found


def check(p: Program) -> None:
    """Raise :class:`SchemaViolation` listing every diagnostic, if any."""
    diags = validate(p)
    if diags:
        raise SchemaViolation("; ".join(str(d) for d in diags))
