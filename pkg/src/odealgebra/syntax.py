"""Program text format, version 1.

A program file starts with the header line ``program-format 1`` followed by
S-expression forms::

    (def NAME (PARAM ...) BODY [:range (LO HI)])
    (entry NAME)

    BODY := (basic SYMBOL [INDEX])
          | (compose OUTER INNER ...)
          | (table ROW ...)              ; ROW := (V ...), V an integer or _
          | (schema KIND :g G KEY VALUE ...)

Schema keys: ``:k`` (single step function), ``:h`` (list of step
functions), ``:h0``/``:h1`` (notation recursions), ``:n``, ``:c``,
``:kmax``, ``:bound``, ``:lambda``, and the expressions ``:A``, ``:B``,
``:K``, ``:P``, ``:cs`` (list of constants).  ``HI`` may be ``inf``.
"""

from __future__ import annotations

from . import engine as G
from . import expr as E
from . import sexpr
from .errors import ParseError

HEADER = "program-format 1"


def _kw(items: list) -> dict:
    if len(items) % 2:
        raise ParseError(f"odd number of keyword items: {sexpr.dumps(items)}")
    out = {}
    for key, value in zip(items[::2], items[1::2]):
        if not isinstance(key, str) or not key.startswith(":"):
            raise ParseError(f"expected a :keyword, found {key!r}")
        out[key] = value
    return out


def _need(opts: dict, key: str, kind: str):
    if key not in opts:
        raise ParseError(f"{kind} needs {key}")
    return opts[key]


def _name(v, what: str) -> str:
    if not isinstance(v, str):
        raise ParseError(f"{what} must be a name, found {sexpr.dumps(v)}")
    return v


def _int(v, what: str) -> int:
    if not isinstance(v, int):
        raise ParseError(f"{what} must be an integer, found {sexpr.dumps(v)}")
    return v


def _schema(items: list) -> G.Schema:
    if not items:
        raise ParseError("schema needs a kind")
    tag = items[0]
    opts = _kw(items[1:])
    g = _name(_need(opts, ":g", tag), ":g")
    steps: tuple[str, ...]
    if ":k" in opts:
        steps = (_name(opts[":k"], ":k"),)
    elif ":h" in opts:
        hs = opts[":h"]
        steps = tuple(_name(h, ":h") for h in (hs if isinstance(hs, list) else [hs]))
    elif ":h0" in opts or ":h1" in opts:
        steps = (_name(_need(opts, ":h0", tag), ":h0"), _name(_need(opts, ":h1", tag), ":h1"))
    else:
        steps = ()
    ex = lambda key: E.from_form(_need(opts, key, tag))
    if tag == "l-ode1":
        kind = G.LengthODE1()
    elif tag == "l-2ode":
        kind = G.Length2ODE()
    elif tag == "l-node":
        kind = G.LengthNODE(_int(_need(opts, ":n", tag), ":n"))
    elif tag == "l-node*":
        kind = G.LengthNODEStar(_int(_need(opts, ":n", tag), ":n"))
    elif tag == "l-node-ns":
        kind = G.NonStrictNODE(_int(_need(opts, ":n", tag), ":n"), _int(_need(opts, ":c", tag), ":c"))
    elif tag == "l-0ode":
        kind = G.Length0ODE()
    elif tag == "l-ode2up":
        kind = G.LengthODE2Up(_name(_need(opts, ":bound", tag), ":bound"))
    elif tag == "l-pode":
        kind = G.LengthPODE(ex(":A"), ex(":B"))
    elif tag == "l-b0ode":
        kind = G.LengthB0ODE(ex(":K"))
    elif tag == "l-bode":
        cs = opts.get(":cs", [])
        kind = G.LengthBODE(ex(":B"), tuple(_int(c, ":cs") for c in cs))
    elif tag == "lambda-ode":
        kind = G.LambdaODE(_name(_need(opts, ":lambda", tag), ":lambda"), ex(":P"))
    elif tag == "crn":
        kind = G.CRN()
    elif tag == "kbrn":
        kind = G.KBRN(_int(_need(opts, ":kmax", tag), ":kmax"))
    else:
        raise ParseError(f"unknown schema kind {tag!r}")
    return G.Schema(kind, g, steps)


def _body(form) -> G.Body:
    if not isinstance(form, list) or not form:
        raise ParseError(f"bad definition body: {sexpr.dumps(form)}")
    head, rest = form[0], form[1:]
    if head == "basic":
        if not rest:
            raise ParseError("basic needs a symbol")
        index = _int(rest[1], "projection index") if len(rest) > 1 else None
        return G.Basic(_name(rest[0], "basic symbol"), index)
    if head == "compose":
        if not rest:
            raise ParseError("compose needs an outer function")
        return G.Compose(_name(rest[0], "outer"), tuple(_name(r, "inner") for r in rest[1:]))
    if head == "table":
        rows = []
        for row in rest:
            if not isinstance(row, list):
                raise ParseError(f"table row must be a list: {sexpr.dumps(row)}")
            rows.append(tuple(None if v == "_" else _int(v, "table entry") for v in row))
        return G.Table(tuple(rows))
    if head == "schema":
        return _schema(rest)
    raise ParseError(f"unknown body form {head!r}")


def _range(form):
    if not isinstance(form, list) or len(form) != 2:
        raise ParseError(f":range must be (lo hi), found {sexpr.dumps(form)}")
    lo, hi = form
    return (_int(lo, "range low"), None if hi == "inf" else _int(hi, "range high"))


def parse_program(text: str) -> G.Program:
    lines = text.lstrip().splitlines()
    if not lines or lines[0].strip() != HEADER:
        raise ParseError(f"missing header line {HEADER!r}")
    defs: dict[str, G.FunctionDef] = {}
    entry = None
    for form in sexpr.read_all("\n".join(lines[1:])):
        if not isinstance(form, list) or not form:
            raise ParseError(f"unexpected top-level form {sexpr.dumps(form)}")
        if form[0] == "entry":
            if len(form) != 2:
                raise ParseError("entry takes one name")
            entry = _name(form[1], "entry")
            continue
        if form[0] != "def" or len(form) not in (4, 6):
            raise ParseError(f"expected (def name (params) body): {sexpr.dumps(form)}")
        name = _name(form[1], "definition name")
        if name in defs:
            raise ParseError(f"duplicate definition {name!r}")
        params = form[2]
        if not isinstance(params, list) or not all(isinstance(p, str) for p in params):
            raise ParseError(f"{name}: parameters must be a list of names")
        rng = None
        if len(form) == 6:
            if form[4] != ":range":
                raise ParseError(f"{name}: unexpected option {form[4]!r}")
            rng = _range(form[5])
        defs[name] = G.FunctionDef(name, tuple(params), _body(form[3]), rng)
    return G.Program(defs, entry)


def _body_form(b: G.Body) -> list:
    if isinstance(b, G.Basic):
        return ["basic", b.symbol] + ([b.index] if b.index is not None else [])
    if isinstance(b, G.Compose):
        return ["compose", b.outer, *b.inners]
    if isinstance(b, G.Table):
        return ["table", *[["_" if v is None else v for v in row] for row in b.rows]]
    kind = b.kind
    out = ["schema", kind.tag, ":g", b.g]
    if isinstance(kind, (G.CRN, G.KBRN)):
        out += [":h0", b.steps[0], ":h1", b.steps[1]]
    elif kind.n_steps == 1:
        out += [":k", b.steps[0]]
    elif b.steps:
        out += [":h", list(b.steps)]
    return out + kind.options()


def format_program(p: G.Program) -> str:
    lines = [HEADER]
    for d in p.defs.values():
        form = ["def", d.name, list(d.params), _body_form(d.body)]
        if d.range is not None:
            lo, hi = d.range
            form += [":range", [lo, "inf" if hi is None else hi]]
        lines.append(sexpr.dumps(form))
    if p.entry is not None:
        lines.append(sexpr.dumps(["entry", p.entry]))
    return "\n".join(lines) + "\n"
