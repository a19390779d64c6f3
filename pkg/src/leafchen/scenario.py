"""Declarative scenario files: charts, forms, connections, checks.

One scenario per file.  The format is line based; `#` starts a comment,
blank lines separate nothing.  Statements:

    scenario <id>
    seed <int>
    chart dim=<n> codim=<q>
    form <name> degree=<p> = <coeff> d(i,j) + <coeff> d(k) + ...
    connection <name> degrees=(d0,d1,...)
      component <i> = [[e,e],[e,e]] d(i,j) + ...
    morphism <name> source=<connection> target=<connection>
      component <i> = [[...]] d(...) + ...
    simplex <name> dim=<k> = affine (x,y) (x,y) ...
    simplex <name> dim=<k> = map <expr>, <expr>, ...
    check <type> key=value ...

Coefficients use the expression grammar of the chart layer (rationals,
coordinates x1..xn, + - * ^, sin, cos, exp).  Simplex `map` components
are expressions in t1..tk.  Check lines name their inputs; every name
must be defined earlier in the file.  Parse failures carry the line
number and the offending key or expression.
"""

from __future__ import annotations

import re
from fractions import Fraction

from . import expressions as ex
from .bundles import GradedVectorSpace, HomValuedForm, ZConnection, \
    cone_connection
from .charts import FoliatedChart, LeafForm
from .expressions import ExprSyntaxError
from .simplex import SmoothSimplexMap, affine_simplex

# check type -> entity-reference keys it accepts, see runner for semantics
CHECK_TYPES = {
    "theta": ("form", "simplex"),
    "derham": ("form", "simplex"),
    "ainfty": ("word", "simplex"),
    "degree0": ("word", "simplex"),
    "reparam": ("word", "simplex"),
    "normalization": ("word", "base"),
    "poincare": ("form", "simplex"),
    "holonomy_oracle": ("connection", "edge"),
    "envelope": ("connection", "edge"),
    "mc": ("connection", "simplex"),
    "mc_search": ("connection",),
    "concat": ("connection",),
    "cone_rh1": ("morphism", "simplex"),
}

_FORM_KEYS = ("form",)
_WORD_KEYS = ("word",)
_SIMPLEX_KEYS = ("simplex", "base", "edge")
_CONN_KEYS = ("connection",)
_MORPHISM_KEYS = ("morphism",)
_FLOAT_KEYS = ("tol", "scale", "step")
_INT_KEYS = ("order", "depth", "pmax", "count", "kmax", "k", "m")
_STR_KEYS = ("name", "variant", "warp", "expect")


class ScenarioError(ValueError):
    """Parse or validation failure, annotated with a line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = "line %d: %s" % (line, message)
        super().__init__(message)
        self.line = line


class Check:
    """One requested verification: a type, resolved inputs, tolerances."""

    def __init__(self, name, kind, args, tol, quadrature, line):
        self.name = name
        self.kind = kind
        self.args = args
        self.tol = tol
        self.quadrature = quadrature
        self.line = line


class Scenario:
    def __init__(self, ident, seed, chart, forms, connections, morphisms,
                 simplices, checks):
        self.ident = ident
        self.seed = seed
        self.chart = chart
        self.forms = forms
        self.connections = connections
        self.morphisms = morphisms
        self.simplices = simplices
        self.checks = checks


class Morphism:
    """Named morphism of connections, kept with its endpoints."""

    def __init__(self, e_terms, source, target):
        self.e_terms = e_terms
        self.source = source
        self.target = target


def _split_top(s, sep):
    """Split on a separator character at bracket depth zero."""
    parts = []
    depth = 0
    cur = []
    for ch in s:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        if ch == sep and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return parts


def _split_terms(s):
    """Split a sum into (sign, term) pairs at depth-zero + and -."""
    out = []
    depth = 0
    sign = 1
    cur = []
    prev = ""
    for ch in s:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        if depth == 0 and ch in "+-" and prev not in "*^(":
            if "".join(cur).strip():
                out.append((sign, "".join(cur)))
                sign = 1
            if ch == "-":
                sign = -sign
            cur = []
        else:
            cur.append(ch)
        if not ch.isspace():
            prev = ch
    if "".join(cur).strip():
        out.append((sign, "".join(cur)))
    return out


_D_CALL = re.compile(r"(?<![A-Za-z0-9_])d\s*\(([^)]*)\)\s*$")


def _split_differential(term, line):
    """Separate `coeff d(i,j)` into the coefficient source and indices."""
    m = _D_CALL.search(term)
    if m is None:
        return term, ()
    body = m.group(1).strip()
    try:
        idx = tuple(int(p.strip()) for p in body.split(",") if p.strip())
    except ValueError:
        raise ScenarioError("bad differential indices d(%s)" % body, line)
    if not idx:
        raise ScenarioError("empty differential d()", line)
    return term[:m.start()], idx


def _parse_coeff(src, chart, line):
    src = src.strip()
    if not src:
        return ex.ONE
    try:
        return ex.parse_expr(src, names=chart.coord_names)
    except ExprSyntaxError as err:
        raise ScenarioError("in %r: %s" % (src, err), line)


def _parse_form(src, chart, degree, line):
    terms = {}
    for sign, term in _split_terms(src):
        coeff_src, idx = _split_differential(term.strip(), line)
        if len(idx) != degree:
            raise ScenarioError(
                "degree mismatch: term %r has %d differential(s), form "
                "declares degree %d" % (term.strip(), len(idx), degree), line)
        coeff = _parse_coeff(coeff_src, chart, line)
        if sign < 0:
            coeff = ex.neg(coeff)
        terms[idx] = ex.add(terms[idx], coeff) if idx in terms else coeff
    try:
        return LeafForm(chart, degree, terms)
    except ValueError as err:
        raise ScenarioError(str(err), line)


def _parse_matrix(src, chart, line):
    src = src.strip()
    if not (src.startswith("[") and src.endswith("]")):
        raise ScenarioError("matrix must look like [[..],[..]]: %r" % src,
                            line)
    rows = []
    for row_src in _split_top(src[1:-1], ","):
        row_src = row_src.strip()
        if not (row_src.startswith("[") and row_src.endswith("]")):
            raise ScenarioError("matrix row must be bracketed: %r" % row_src,
                                line)
        row = [_parse_coeff(e, chart, line)
               for e in _split_top(row_src[1:-1], ",")]
        rows.append(row)
    width = {len(r) for r in rows}
    if len(width) != 1:
        raise ScenarioError("ragged matrix rows", line)
    return rows


def _scale_matrix(mat, sign):
    if sign >= 0:
        return mat
    return [[ex.neg(e) for e in row] for row in mat]


def _parse_matrix_form(src, chart, r, line):
    """Sum of `[[..]] d(i,j)` terms -> dict[idx -> r x r expr matrix]."""
    terms = {}
    for sign, term in _split_terms(src):
        mat_src, idx = _split_differential(term.strip(), line)
        mat = _scale_matrix(_parse_matrix(mat_src, chart, line), sign)
        if len(mat) != r or any(len(row) != r for row in mat):
            raise ScenarioError(
                "matrix is %dx%d, connection space has dimension %d"
                % (len(mat), len(mat[0]) if mat else 0, r), line)
        if idx in terms:
            cur = terms[idx]
            terms[idx] = [[ex.add(cur[i][j], mat[i][j]) for j in range(r)]
                          for i in range(r)]
        else:
            terms[idx] = mat
    return terms


_KV = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)=(.*)$")


def _keyvals(tokens, line):
    out = {}
    for tok in tokens:
        m = _KV.match(tok)
        if m is None:
            raise ScenarioError("expected key=value, got %r" % tok, line)
        out[m.group(1)] = m.group(2)
    return out


def _logical_lines(text):
    """(line_no, statement, [(line_no, component line), ...]) triples.

    A statement owns the indented `component` lines that follow it.
    """
    rows = []
    for no, raw in enumerate(text.splitlines(), start=1):
        code = raw.split("#", 1)[0].rstrip()
        if not code.strip():
            continue
        indented = code[0].isspace()
        rows.append((no, code.strip(), indented))
    out = []
    for no, code, indented in rows:
        if indented:
            if not out:
                raise ScenarioError("indented line with no statement", no)
            out[-1][2].append((no, code))
        else:
            out.append((no, code, []))
    return out


def _require(cond, message, line):
    if not cond:
        raise ScenarioError(message, line)


def _component_blocks(children, chart, r, header_line):
    comps = {}
    for no, code in children:
        tokens = code.split(None, 1)
        _require(len(tokens) == 2 and tokens[0] == "component",
                 "expected `component <i> = ...`", no)
        head, _, rhs = tokens[1].partition("=")
        try:
            i = int(head.strip())
        except ValueError:
            raise ScenarioError("bad component index %r" % head.strip(), no)
        _require(i >= 0, "component index must be nonnegative", no)
        _require(i not in comps, "duplicate component %d" % i, no)
        _require(rhs.strip() != "", "component %d has no value" % i, no)
        comps[i] = (no, _parse_matrix_form(rhs, chart, r, no))
    _require(bool(comps), "no component lines", header_line)
    return comps


def parse_scenario(path):
    """Read and fully validate one scenario file."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()

    ident = None
    seed = 0
    chart = None
    forms = {}
    connections = {}
    morphisms = {}
    simplices = {}
    checks = []
    used_names = set()

    def lookup(table, kind, name, line):
        if name not in table:
            raise ScenarioError(
                "dangling name reference: %s %r is not defined" % (kind, name),
                line)
        return table[name]

    def fresh(name, line):
        _require(name not in used_names,
                 "name %r already defined" % name, line)
        used_names.add(name)

    for no, code, children in _logical_lines(text):
        tokens = code.split()
        head = tokens[0]
        if head == "scenario":
            _require(len(tokens) == 2, "expected `scenario <id>`", no)
            ident = tokens[1]
            continue
        if head == "seed":
            _require(len(tokens) == 2, "expected `seed <int>`", no)
            try:
                seed = int(tokens[1])
            except ValueError:
                raise ScenarioError("bad seed %r" % tokens[1], no)
            continue
        if head == "chart":
            kv = _keyvals(tokens[1:], no)
            _require(set(kv) == {"dim", "codim"},
                     "chart needs dim=<n> codim=<q>", no)
            try:
                chart = FoliatedChart(int(kv["dim"]), int(kv["codim"]))
            except ValueError as err:
                raise ScenarioError(str(err), no)
            continue

        _require(chart is not None,
                 "%r before the chart statement" % head, no)

        if head == "form":
            stmt, _, rhs = code.partition("=")
            tokens = stmt.split()
            _require(len(tokens) == 3 and rhs.strip() != "",
                     "expected `form <name> degree=<p> = ...`", no)
            name = tokens[1]
            kv = _keyvals(tokens[2:3], no)
            _require(set(kv) == {"degree"}, "form needs degree=<p>", no)
            fresh(name, no)
            forms[name] = _parse_form(rhs, chart, int(kv["degree"]), no)
        elif head == "connection":
            kv = _keyvals(tokens[2:], no)
            _require(len(tokens) >= 3 and set(kv) == {"degrees"},
                     "expected `connection <name> degrees=(..)`", no)
            name = tokens[1]
            fresh(name, no)
            degs = kv["degrees"].strip()
            _require(degs.startswith("(") and degs.endswith(")"),
                     "degrees must be a tuple like (0,1)", no)
            try:
                space = GradedVectorSpace(tuple(
                    int(p) for p in degs[1:-1].split(",") if p.strip()))
            except ValueError as err:
                raise ScenarioError(str(err), no)
            r = space.total_dim
            comps = _component_blocks(children, chart, r, no)
            terms = {}
            for i, (cno, mat_terms) in comps.items():
                try:
                    terms[i] = HomValuedForm(chart, space, i, 1 - i,
                                             mat_terms)
                except ValueError as err:
                    raise ScenarioError(str(err), cno)
            try:
                connections[name] = ZConnection(chart, space, terms)
            except ValueError as err:
                raise ScenarioError(str(err), no)
        elif head == "morphism":
            kv = _keyvals(tokens[2:], no)
            _require(len(tokens) >= 3 and set(kv) == {"source", "target"},
                     "expected `morphism <name> source=<c> target=<c>`", no)
            name = tokens[1]
            fresh(name, no)
            c0 = lookup(connections, "connection", kv["source"], no)
            c1 = lookup(connections, "connection", kv["target"], no)
            e_terms = {}
            for cno, codeline in children:
                tokens2 = codeline.split(None, 1)
                _require(len(tokens2) == 2 and tokens2[0] == "component",
                         "expected `component <i> = ...`", cno)
                headp, _, rhs = tokens2[1].partition("=")
                try:
                    i = int(headp.strip())
                except ValueError:
                    raise ScenarioError("bad component index %r"
                                        % headp.strip(), cno)
                _require(i not in e_terms, "duplicate component %d" % i, cno)
                terms = {}
                for sign, term in _split_terms(rhs):
                    mat_src, idx = _split_differential(term.strip(), cno)
                    _require(len(idx) == i,
                             "degree mismatch: component %d term %r"
                             % (i, term.strip()), cno)
                    mat = _scale_matrix(_parse_matrix(mat_src, chart, cno),
                                        sign)
                    rows, cols = len(mat), len(mat[0])
                    _require(
                        rows == c1.space.total_dim
                        and cols == c0.space.total_dim,
                        "morphism block is %dx%d, needs %dx%d"
                        % (rows, cols, c1.space.total_dim,
                           c0.space.total_dim), cno)
                    terms[idx] = mat
                e_terms[i] = terms
            _require(bool(e_terms), "no component lines", no)
            try:
                cone_connection(e_terms, c0, c1)
            except ValueError as err:
                raise ScenarioError("morphism does not fit its cone: %s"
                                    % err, no)
            morphisms[name] = Morphism(e_terms, c0, c1)
        elif head == "simplex":
            stmt, _, rhs = code.partition("=")
            tokens = stmt.split()
            _require(len(tokens) == 3 and rhs.strip() != "",
                     "expected `simplex <name> dim=<k> = ...`", no)
            name = tokens[1]
            kv = _keyvals(tokens[2:3], no)
            _require(set(kv) == {"dim"}, "simplex needs dim=<k>", no)
            fresh(name, no)
            k = int(kv["dim"])
            rhs = rhs.strip()
            if rhs.startswith("affine"):
                body = rhs[len("affine"):].strip()
                verts = []
                for part in _split_top(body.replace(") (", "),("), ","):
                    part = part.strip()
                    if not part:
                        continue
                    _require(part.startswith("(") and part.endswith(")"),
                             "vertex must be a tuple like (0,1/2)", no)
                    try:
                        verts.append([float(Fraction(p.strip()))
                                      for p in part[1:-1].split(",")])
                    except (ValueError, ZeroDivisionError):
                        raise ScenarioError("bad vertex %r" % part, no)
                _require(len(verts) == k + 1,
                         "degree mismatch: dim=%d needs %d vertices, got %d"
                         % (k, k + 1, len(verts)), no)
                _require(all(len(v) == chart.dim for v in verts),
                         "vertex length must equal chart dimension %d"
                         % chart.dim, no)
                simplices[name] = affine_simplex(chart, verts)
            elif rhs.startswith("map"):
                body = rhs[len("map"):].strip()
                comp_srcs = _split_top(body, ",")
                names = ["t%d" % (i + 1) for i in range(k)]
                comps = []
                for src in comp_srcs:
                    try:
                        comps.append(ex.parse_expr(src.strip(), names=names))
                    except ExprSyntaxError as err:
                        raise ScenarioError("in %r: %s" % (src.strip(), err),
                                            no)
                try:
                    simplices[name] = SmoothSimplexMap(chart, k, comps)
                except ValueError as err:
                    raise ScenarioError(str(err), no)
            else:
                raise ScenarioError(
                    "simplex body must start with `affine` or `map`", no)
        elif head == "check":
            _require(len(tokens) >= 2, "expected `check <type> ...`", no)
            kind = tokens[1]
            _require(kind in CHECK_TYPES,
                     "unknown check type %r" % kind, no)
            kv = _keyvals(tokens[2:], no)
            args = {}
            for key, value in kv.items():
                if key in _FORM_KEYS:
                    args[key] = lookup(forms, "form", value, no)
                elif key in _WORD_KEYS:
                    args[key] = tuple(
                        lookup(forms, "form", p.strip(), no)
                        for p in value.split(","))
                elif key in _SIMPLEX_KEYS:
                    args[key] = lookup(simplices, "simplex", value, no)
                elif key in _CONN_KEYS:
                    args[key] = lookup(connections, "connection", value, no)
                elif key in _MORPHISM_KEYS:
                    args[key] = lookup(morphisms, "morphism", value, no)
                elif key in _FLOAT_KEYS:
                    try:
                        args[key] = float(value)
                    except ValueError:
                        raise ScenarioError("bad number %s=%r" % (key, value),
                                            no)
                elif key in _INT_KEYS:
                    try:
                        args[key] = int(value)
                    except ValueError:
                        raise ScenarioError("bad integer %s=%r" % (key, value),
                                            no)
                elif key in _STR_KEYS:
                    args[key] = value
                else:
                    raise ScenarioError("unknown check key %r" % key, no)
            for key in CHECK_TYPES[kind]:
                _require(key in args,
                         "check %s needs %s=<name>" % (kind, key), no)
            name = args.pop("name", None)
            if name is None:
                name = "%s_%d" % (kind, len(checks) + 1)
            _require(name not in {c.name for c in checks},
                     "duplicate check name %r" % name, no)
            tol = args.pop("tol", 1e-6)
            quadrature = {}
            if "order" in args:
                quadrature["order"] = args.pop("order")
            if "depth" in args:
                quadrature["depth"] = args.pop("depth")
            checks.append(Check(name, kind, args, tol, quadrature, no))
        else:
            raise ScenarioError("unknown statement %r" % head, no)

    _require(ident is not None, "missing `scenario <id>` statement", 1)
    _require(chart is not None, "missing `chart` statement", 1)
    return Scenario(ident, seed, chart, forms, connections, morphisms,
                    simplices, checks)
