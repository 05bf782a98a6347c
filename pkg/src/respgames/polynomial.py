"""Sparse multivariate polynomials with float coefficients."""

from __future__ import annotations

import re
from collections.abc import Iterable, Mapping, Sequence

PRUNE = 1e-13


class Polynomial:
    """Immutable polynomial over an ordered tuple of variable names.

    ``terms`` maps exponent vectors (aligned with ``variables``) to
    coefficients.  Coefficients with magnitude below ``PRUNE`` are dropped.
    """

    __slots__ = ("variables", "terms")

    def __init__(self, variables: Sequence[str] = (), terms: Mapping | None = None):
        variables = tuple(variables)
        if len(set(variables)) != len(variables):
            raise ValueError("duplicate variable names")
        clean = {}
        for exp, c in (terms or {}).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != len(variables) or min(exp, default=0) < 0:
                raise ValueError(f"bad exponent vector {exp}")
            c = float(c)
            if abs(c) >= PRUNE:
                clean[exp] = clean.get(exp, 0.0) + c
        clean = {e: c for e, c in sorted(clean.items(), reverse=True) if abs(c) >= PRUNE}
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("Polynomial is immutable")

    # constructors
    @classmethod
    def constant(cls, c: float, variables: Sequence[str] = ()) -> Polynomial:
        return cls(variables, {(0,) * len(tuple(variables)): c})

    @classmethod
    def var(cls, name: str, variables: Sequence[str] | None = None) -> Polynomial:
        variables = tuple(variables) if variables is not None else (name,)
        exp = tuple(1 if v == name else 0 for v in variables)
        if sum(exp) != 1:
            raise ValueError(f"{name!r} not among the variables")
        return cls(variables, {exp: 1.0})

    # alignment
    def extend(self, variables: Sequence[str]) -> Polynomial:
        variables = tuple(variables)
        if variables == self.variables:
            return self
        missing = [v for v in self.variables if v not in variables]
        if missing:
            pos = {v: i for i, v in enumerate(self.variables)}
            for v in missing:
                i = pos[v]
                if any(e[i] for e in self.terms):
                    raise ValueError(f"variable {v!r} occurs in the polynomial")
        pos = {v: i for i, v in enumerate(self.variables)}
        terms = {}
        for exp, c in self.terms.items():
            terms[tuple(exp[pos[v]] if v in pos else 0 for v in variables)] = c
        return Polynomial(variables, terms)

    def _align(self, other) -> tuple[Polynomial, Polynomial]:
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(float(other), self.variables)
        if other.variables == self.variables:
            return self, other
        merged = self.variables + tuple(v for v in other.variables if v not in self.variables)
        return self.extend(merged), other.extend(merged)

    # arithmetic
    def __add__(self, other) -> Polynomial:
        a, b = self._align(other)
        terms = dict(a.terms)
        for e, c in b.terms.items():
            terms[e] = terms.get(e, 0.0) + c
        return Polynomial(a.variables, terms)

    __radd__ = __add__

    def __neg__(self) -> Polynomial:
        return Polynomial(self.variables, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> Polynomial:
        a, b = self._align(other)
        return a + (-b)

    def __rsub__(self, other) -> Polynomial:
        return (-self) + other

    def __mul__(self, other) -> Polynomial:
        a, b = self._align(other)
        terms: dict = {}
        for e1, c1 in a.terms.items():
            for e2, c2 in b.terms.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                terms[e] = terms.get(e, 0.0) + c1 * c2
        return Polynomial(a.variables, terms)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> Polynomial:
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponent must be a non-negative integer")
        out = Polynomial.constant(1.0, self.variables)
        for _ in range(n):
            out = out * self
        return out

    def scale(self, c: float) -> Polynomial:
        return Polynomial(self.variables, {e: c * v for e, v in self.terms.items()})

    # queries
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self.terms)

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def occurring(self) -> tuple[str, ...]:
        return tuple(v for i, v in enumerate(self.variables) if any(e[i] for e in self.terms))

    def __call__(self, point: Mapping[str, float] | Sequence[float]) -> float:
        return self.eval(point)

    def eval(self, point: Mapping[str, float] | Sequence[float]) -> float:
        if isinstance(point, Mapping):
            try:
                xs = [point[v] if any(e[i] for e in self.terms) else 0.0
                      for i, v in enumerate(self.variables)]
            except KeyError as exc:
                raise KeyError(f"no value for variable {exc.args[0]!r}") from None
        else:
            xs = list(point)
            if len(xs) != len(self.variables):
                raise ValueError("point has the wrong dimension")
        total = 0.0
        for exp, c in self.terms.items():
            term = c
            for x, k in zip(xs, exp):
                if k:
                    term *= x ** k
            total += term
        return total

    def partial_derivative(self, name: str) -> Polynomial:
        if name not in self.variables:
            return Polynomial(self.variables)
        i = self.variables.index(name)
        terms = {}
        for exp, c in self.terms.items():
            if exp[i]:
                e = list(exp)
                e[i] -= 1
                terms[tuple(e)] = c * exp[i]
        return Polynomial(self.variables, terms)

    def substitute(self, values: Mapping[str, float]) -> Polynomial:
        """Fix some variables to numbers; they remain (unused) in ``variables``."""
        idx = [(i, float(values[v])) for i, v in enumerate(self.variables) if v in values]
        terms: dict = {}
        for exp, c in self.terms.items():
            e = list(exp)
            for i, x in idx:
                if e[i]:
                    c *= x ** e[i]
                    e[i] = 0
            terms[tuple(e)] = terms.get(tuple(e), 0.0) + c
        return Polynomial(self.variables, terms)

    def compose(self, values: Mapping[str, Polynomial]) -> Polynomial:
        """Replace variables by polynomials."""
        out = Polynomial()
        for exp, c in self.terms.items():
            term = Polynomial.constant(c)
            for v, k in zip(self.variables, exp):
                if k:
                    base = values.get(v, Polynomial.var(v))
                    term = term * base ** k
            out = out + term
        return out

    # comparison / display
    def almost_equal(self, other, tol: float = 1e-9) -> bool:
        diff = self - other
        return all(abs(c) <= tol for c in diff.terms.values())

    def __eq__(self, other) -> bool:
        if not isinstance(other, (Polynomial, int, float)):
            return NotImplemented
        a, b = self._align(other)
        return a.terms == b.terms

    def __hash__(self):
        return hash(frozenset(self.extend(tuple(sorted(self.variables))).terms.items()))

    def __repr__(self) -> str:
        return f"Polynomial({format_polynomial(self)!r})"

    def __str__(self) -> str:
        return format_polynomial(self)


def _coef(c: float) -> str:
    return repr(float(c)).removesuffix(".0") if float(c).is_integer() else repr(float(c))


def format_polynomial(p: Polynomial) -> str:
    if not p.terms:
        return "0"
    parts = []
    for exp, c in sorted(p.terms.items(), key=lambda kv: (sum(kv[0]), [-e for e in kv[0]])):
        factors = [v if k == 1 else f"{v}^{k}" for v, k in zip(p.variables, exp) if k]
        mag = abs(c)
        if factors:
            body = "*".join(factors) if mag == 1.0 else "*".join([_coef(mag)] + factors)
        else:
            body = _coef(mag)
        sign = "-" if c < 0 else "+"
        parts.append((sign, body))
    head_sign, head = parts[0]
    text = ("-" if head_sign == "-" else "") + head
    for sign, body in parts[1:]:
        text += f" {sign} {body}"
    return text


_TOKEN = re.compile(r"\s*(?:(\d+\.\d*(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?|\d+(?:[eE][-+]?\d+)?)"
                    r"|([A-Za-z_][A-Za-z0-9_]*)|(\*\*|[-+*^()/]))")


def parse_polynomial(text: str, variables: Iterable[str] | None = None) -> Polynomial:
    """Parse ``+ - * / ^ **`` expressions with numeric divisors only."""
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"unexpected character at {pos}: {text[pos:pos + 10]!r}")
        num, name, op = m.groups()
        tokens.append(("num", float(num)) if num else ("name", name) if name else ("op", op))
        pos = m.end()
    tokens.append(("end", None))
    i = 0

    def peek():
        return tokens[i]

    def take():
        nonlocal i
        tok = tokens[i]
        i += 1
        return tok

    def expr():
        out = term()
        while peek() in (("op", "+"), ("op", "-")):
            op = take()[1]
            rhs = term()
            out = out + rhs if op == "+" else out - rhs
        return out

    def term():
        out = unary()
        while peek() in (("op", "*"), ("op", "/")):
            op = take()[1]
            rhs = unary()
            if op == "*":
                out = out * rhs
            else:
                if not rhs.is_constant():
                    raise ValueError("division by a non-constant")
                d = rhs.eval([0.0] * len(rhs.variables))
                if d == 0:
                    raise ValueError("division by zero")
                out = out.scale(1.0 / d)
        return out

    def unary():
        if peek() == ("op", "-"):
            take()
            return -unary()
        if peek() == ("op", "+"):
            take()
            return unary()
        return power()

    def power():
        base = atom()
        if peek() in (("op", "^"), ("op", "**")):
            take()
            kind, val = take()
            if kind != "num" or not float(val).is_integer() or val < 0:
                raise ValueError("exponent must be a non-negative integer")
            return base ** int(val)
        return base

    def atom():
        kind, val = take()
        if kind == "num":
            return Polynomial.constant(val)
        if kind == "name":
            return Polynomial.var(val)
        if (kind, val) == ("op", "("):
            out = expr()
            if take() != ("op", ")"):
                raise ValueError("missing ')'")
            return out
        raise ValueError(f"unexpected token {val!r}")

    result = expr()
    if peek()[0] != "end":
        raise ValueError(f"unexpected trailing token {peek()[1]!r}")
    if variables is not None:
        result = result.extend(tuple(variables))
    return result


def add(p: Polynomial, q: Polynomial) -> Polynomial:
    return p + q


def mul(p: Polynomial, q: Polynomial) -> Polynomial:
    return p * q


def evaluate(p: Polynomial, point) -> float:
    return p.eval(point)


def partial_derivative(p: Polynomial, name: str) -> Polynomial:
    return p.partial_derivative(name)
