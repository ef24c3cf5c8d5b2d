"""Small expression language for problem files.

Smooth inputs (the quadratic/objective part and the constraint-map
components) are described by closed-form expressions over variables
x[0..n-1].  Node kinds: constants, variables, +, -, *, /, pow (constant
exponent), sin, cos, sqrt, abs, min, max, and a two-branch piecewise
split on a threshold.

Evaluation is total on the declared domain (division by zero and square
roots of negatives raise EvalDomainError) and vectorizes over a batch
axis: `x` may be a single point of shape (n,) or a stack of shape (N, n).

Differentiation is exact forward-mode accumulation.  abs/min/max/
piecewise differentiate one-sidedly away from their kinks and raise
KinkError when evaluated exactly at one (a tie, a zero argument, a
threshold hit) -- callers that need derivatives at kinks are asking the
wrong object.
"""

from __future__ import annotations

import numpy as np


class EvalDomainError(ValueError):
    """Expression evaluated outside its domain."""


class KinkError(ValueError):
    """Derivative requested exactly at a nonsmooth point."""


class Expr:
    """Base expression node with operator sugar."""

    def eval(self, x: np.ndarray) -> np.ndarray | float:
        raise NotImplementedError

    def eval_grad(self, x: np.ndarray) -> tuple[float, np.ndarray]:
        """Value and gradient at a single point x of shape (n,)."""
        val, dual = self._fwd(np.asarray(x, dtype=float))
        return float(val), np.asarray(dual, dtype=float)

    def _fwd(self, x: np.ndarray) -> tuple[float, np.ndarray]:
        raise NotImplementedError

    def to_obj(self):
        raise NotImplementedError

    # -- operator sugar (used by the catalog generators) ---------------

    @staticmethod
    def _coerce(other) -> "Expr":
        if isinstance(other, Expr):
            return other
        if isinstance(other, (int, float)):
            return Const(float(other))
        raise TypeError(f"cannot treat {other!r} as an expression")

    def __add__(self, other):
        return Add(self, Expr._coerce(other))

    def __radd__(self, other):
        return Add(Expr._coerce(other), self)

    def __sub__(self, other):
        return Sub(self, Expr._coerce(other))

    def __rsub__(self, other):
        return Sub(Expr._coerce(other), self)

    def __mul__(self, other):
        return Mul(self, Expr._coerce(other))

    def __rmul__(self, other):
        return Mul(Expr._coerce(other), self)

    def __truediv__(self, other):
        return Div(self, Expr._coerce(other))

    def __rtruediv__(self, other):
        return Div(Expr._coerce(other), self)

    def __pow__(self, p):
        return Pow(self, float(p))

    def __neg__(self):
        return Mul(Const(-1.0), self)


class Const(Expr):
    def __init__(self, value: float):
        self.value = float(value)

    def eval(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 2:
            return np.full(x.shape[0], self.value)
        return self.value

    def _fwd(self, x):
        return self.value, np.zeros(x.shape[-1])

    def to_obj(self):
        return self.value

    def __repr__(self):
        return f"{self.value:g}"


class Var(Expr):
    def __init__(self, index: int):
        if index < 0:
            raise ValueError("variable index must be nonnegative")
        self.index = int(index)

    def eval(self, x):
        x = np.asarray(x, dtype=float)
        return x[..., self.index]

    def _fwd(self, x):
        dual = np.zeros(x.shape[-1])
        dual[self.index] = 1.0
        return float(x[self.index]), dual

    def to_obj(self):
        return ["x", self.index]

    def __repr__(self):
        return f"x[{self.index}]"


class _Binary(Expr):
    tag = "?"

    def __init__(self, left: Expr, right: Expr):
        self.left = left
        self.right = right

    def to_obj(self):
        return [self.tag, self.left.to_obj(), self.right.to_obj()]

    def __repr__(self):
        return f"({self.left!r} {self.tag} {self.right!r})"


class Add(_Binary):
    tag = "+"

    def eval(self, x):
        return self.left.eval(x) + self.right.eval(x)

    def _fwd(self, x):
        a, da = self.left._fwd(x)
        b, db = self.right._fwd(x)
        return a + b, da + db


class Sub(_Binary):
    tag = "-"

    def eval(self, x):
        return self.left.eval(x) - self.right.eval(x)

    def _fwd(self, x):
        a, da = self.left._fwd(x)
        b, db = self.right._fwd(x)
        return a - b, da - db


class Mul(_Binary):
    tag = "*"

    def eval(self, x):
        return self.left.eval(x) * self.right.eval(x)

    def _fwd(self, x):
        a, da = self.left._fwd(x)
        b, db = self.right._fwd(x)
        return a * b, a * db + b * da


class Div(_Binary):
    tag = "/"

    def eval(self, x):
        num = self.left.eval(x)
        den = self.right.eval(x)
        if np.any(np.asarray(den) == 0.0):
            raise EvalDomainError("division by zero")
        return num / den

    def _fwd(self, x):
        a, da = self.left._fwd(x)
        b, db = self.right._fwd(x)
        if b == 0.0:
            raise EvalDomainError("division by zero")
        return a / b, (da * b - a * db) / (b * b)


class Pow(Expr):
    """base ** p with a constant real exponent."""

    def __init__(self, base: Expr, p: float):
        self.base = base
        self.p = float(p)

    def _check_domain(self, b):
        if self.p != round(self.p) and np.any(np.asarray(b) < 0.0):
            raise EvalDomainError("fractional power of a negative base")
        if self.p < 0 and np.any(np.asarray(b) == 0.0):
            raise EvalDomainError("negative power of zero")

    def eval(self, x):
        b = self.base.eval(x)
        self._check_domain(b)
        return np.power(b, self.p)

    def _fwd(self, x):
        b, db = self.base._fwd(x)
        self._check_domain(b)
        if b == 0.0 and self.p < 1.0:
            raise KinkError("power rule undefined at a zero base with exponent < 1")
        return b ** self.p, self.p * b ** (self.p - 1.0) * db

    def to_obj(self):
        return ["pow", self.base.to_obj(), self.p]

    def __repr__(self):
        return f"({self.base!r})**{self.p:g}"


class _Unary(Expr):
    tag = "?"

    def __init__(self, arg: Expr):
        self.arg = arg

    def to_obj(self):
        return [self.tag, self.arg.to_obj()]

    def __repr__(self):
        return f"{self.tag}({self.arg!r})"


class Sin(_Unary):
    tag = "sin"

    def eval(self, x):
        return np.sin(self.arg.eval(x))

    def _fwd(self, x):
        a, da = self.arg._fwd(x)
        return np.sin(a), np.cos(a) * da


class Cos(_Unary):
    tag = "cos"

    def eval(self, x):
        return np.cos(self.arg.eval(x))

    def _fwd(self, x):
        a, da = self.arg._fwd(x)
        return np.cos(a), -np.sin(a) * da


class Sqrt(_Unary):
    tag = "sqrt"

    def eval(self, x):
        a = self.arg.eval(x)
        if np.any(np.asarray(a) < 0.0):
            raise EvalDomainError("sqrt of a negative value")
        return np.sqrt(a)

    def _fwd(self, x):
        a, da = self.arg._fwd(x)
        if a < 0.0:
            raise EvalDomainError("sqrt of a negative value")
        if a == 0.0:
            raise KinkError("sqrt is not differentiable at zero")
        s = np.sqrt(a)
        return s, da / (2.0 * s)


class Abs(_Unary):
    tag = "abs"

    def eval(self, x):
        return np.abs(self.arg.eval(x))

    def _fwd(self, x):
        a, da = self.arg._fwd(x)
        if a == 0.0:
            raise KinkError("abs is not differentiable at zero")
        return abs(a), np.sign(a) * da


class Min(_Binary):
    tag = "min"

    def eval(self, x):
        return np.minimum(self.left.eval(x), self.right.eval(x))

    def _fwd(self, x):
        a, da = self.left._fwd(x)
        b, db = self.right._fwd(x)
        if a == b:
            raise KinkError("min is not differentiable at a tie")
        return (a, da) if a < b else (b, db)


class Max(_Binary):
    tag = "max"

    def eval(self, x):
        return np.maximum(self.left.eval(x), self.right.eval(x))

    def _fwd(self, x):
        a, da = self.left._fwd(x)
        b, db = self.right._fwd(x)
        if a == b:
            raise KinkError("max is not differentiable at a tie")
        return (a, da) if a > b else (b, db)


class Piecewise(Expr):
    """`below` where arg < threshold, else `above`.

    Evaluation at the threshold takes the `above` branch; derivatives
    exactly at the threshold raise KinkError.
    """

    def __init__(self, arg: Expr, threshold: float, below: Expr, above: Expr):
        self.arg = arg
        self.threshold = float(threshold)
        self.below = below
        self.above = above

    def eval(self, x):
        a = np.asarray(self.arg.eval(x))
        lo = self.below.eval(x)
        hi = self.above.eval(x)
        return np.where(a < self.threshold, lo, hi)

    def _fwd(self, x):
        a, _ = self.arg._fwd(x)
        if a == self.threshold:
            raise KinkError("piecewise split evaluated exactly at its threshold")
        branch = self.below if a < self.threshold else self.above
        return branch._fwd(x)

    def to_obj(self):
        return [
            "piecewise",
            self.arg.to_obj(),
            self.threshold,
            self.below.to_obj(),
            self.above.to_obj(),
        ]

    def __repr__(self):
        return f"piecewise({self.arg!r} < {self.threshold:g} ? {self.below!r} : {self.above!r})"


_BINARY = {"+": Add, "-": Sub, "*": Mul, "/": Div, "min": Min, "max": Max}
_UNARY = {"sin": Sin, "cos": Cos, "sqrt": Sqrt, "abs": Abs, "neg": None}


def from_obj(obj, n_vars: int | None = None, path: str = "expr") -> Expr:
    """Parse the JSON form of an expression; see to_obj for the encoding."""
    if isinstance(obj, bool):
        raise EvalDomainError(f"{path}: booleans are not expressions")
    if isinstance(obj, (int, float)):
        return Const(float(obj))
    if not isinstance(obj, list) or not obj:
        raise EvalDomainError(f"{path}: expected a number or a [tag, ...] list")
    tag = obj[0]
    if tag == "x":
        if len(obj) != 2 or not isinstance(obj[1], int) or isinstance(obj[1], bool):
            raise EvalDomainError(f"{path}: variable node must be ['x', index]")
        if n_vars is not None and not (0 <= obj[1] < n_vars):
            raise EvalDomainError(f"{path}: variable index {obj[1]} out of range for n={n_vars}")
        return Var(obj[1])
    if tag == "neg":
        if len(obj) != 2:
            raise EvalDomainError(f"{path}: neg takes one argument")
        return -from_obj(obj[1], n_vars, f"{path}[1]")
    if tag == "pow":
        if len(obj) != 3 or not isinstance(obj[2], (int, float)) or isinstance(obj[2], bool):
            raise EvalDomainError(f"{path}: pow node must be ['pow', base, exponent]")
        return Pow(from_obj(obj[1], n_vars, f"{path}[1]"), float(obj[2]))
    if tag == "piecewise":
        if len(obj) != 5 or not isinstance(obj[2], (int, float)) or isinstance(obj[2], bool):
            raise EvalDomainError(
                f"{path}: piecewise node must be ['piecewise', arg, threshold, below, above]"
            )
        return Piecewise(
            from_obj(obj[1], n_vars, f"{path}[1]"),
            float(obj[2]),
            from_obj(obj[3], n_vars, f"{path}[3]"),
            from_obj(obj[4], n_vars, f"{path}[4]"),
        )
    if tag in _BINARY:
        if len(obj) != 3:
            raise EvalDomainError(f"{path}: '{tag}' takes two arguments")
        return _BINARY[tag](
            from_obj(obj[1], n_vars, f"{path}[1]"),
            from_obj(obj[2], n_vars, f"{path}[2]"),
        )
    if tag in _UNARY and tag != "neg":
        if len(obj) != 2:
            raise EvalDomainError(f"{path}: '{tag}' takes one argument")
        return _UNARY[tag](from_obj(obj[1], n_vars, f"{path}[1]"))
    raise EvalDomainError(f"{path}: unknown expression tag {tag!r}")
