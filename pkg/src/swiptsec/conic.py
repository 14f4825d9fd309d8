"""Small conic modelling layer: linear, rotated second-order and PSD cones.

A :class:`ConicProgram` owns a flat vector of real decision variables.
Expressions are affine in that vector and are stored densely, which is
adequate for the problem sizes here (a few hundred variables at most).
Complex Hermitian variables are parameterized by their ``n**2`` real
degrees of freedom; PSD constraints on them are imposed on the real
embedding ``[[Re, -Im], [Im, Re]]``.

The program compiles to the standard form

    minimize    c @ x
    subject to  b - A @ x in K,   K = Zero x Nonneg x SOC... x PSD...

which is exactly what Clarabel and SCS consume. PSD blocks are vectorized
as the upper triangle, column by column, with off-diagonal entries scaled
by sqrt(2).
"""

from __future__ import annotations

import io
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import numpy as np
import scipy.sparse as sp

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-8
SQRT2 = np.sqrt(2.0)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
NUMERICAL_FAILURE = "numerical_failure"
STATUSES = (OPTIMAL, INFEASIBLE, UNBOUNDED, NUMERICAL_FAILURE)


# --------------------------------------------------------------------------
# expressions
# --------------------------------------------------------------------------


def _pad(coef: np.ndarray, n: int) -> np.ndarray:
    if coef.shape[-1] == n:
        return coef
    out = np.zeros(coef.shape[:-1] + (n,), dtype=coef.dtype)
    out[..., : coef.shape[-1]] = coef
    return out


class Affine:
    """Real affine expression ``coef @ x + const`` of arbitrary shape.

    ``coef`` has shape ``shape + (ncols,)``; ``ncols`` may be smaller than
    the owning program's variable count (missing columns are zero).
    """

    __array_priority__ = 100

    def __init__(self, coef, const=None):
        self.coef = np.asarray(coef, dtype=float)
        shape = self.coef.shape[:-1]
        self.const = np.zeros(shape) if const is None else np.broadcast_to(np.asarray(const, dtype=float), shape).copy()

    @classmethod
    def constant(cls, value) -> "Affine":
        value = np.asarray(value, dtype=float)
        return cls(np.zeros(value.shape + (0,)), value)

    @property
    def shape(self) -> tuple:
        return self.const.shape

    @property
    def ncols(self) -> int:
        return self.coef.shape[-1]

    def _binary(self, other, sign: float) -> "Affine":
        other = as_affine(other)
        n = max(self.ncols, other.ncols)
        coef = _pad(self.coef, n) + sign * _pad(other.coef, n)
        return Affine(coef, self.const + sign * other.const)

    def __add__(self, other):
        return self._binary(other, 1.0)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, -1.0)

    def __rsub__(self, other):
        return as_affine(other)._binary(self, -1.0)

    def __neg__(self):
        return Affine(-self.coef, -self.const)

    def __mul__(self, scalar):
        s = float(scalar)
        return Affine(s * self.coef, s * self.const)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / float(scalar))

    def __getitem__(self, idx):
        if not isinstance(idx, tuple):
            idx = (idx,)
        return Affine(self.coef[idx + (Ellipsis,)] if len(idx) < self.coef.ndim else self.coef[idx], self.const[idx])

    def reshape(self, *shape) -> "Affine":
        const = self.const.reshape(shape)
        return Affine(self.coef.reshape(const.shape + (self.ncols,)), const)

    def flatten(self) -> "Affine":
        return self.reshape(-1)

    def sum(self) -> "Affine":
        flat = self.flatten()
        return Affine(flat.coef.sum(axis=0), flat.const.sum())

    def times(self, matrix: np.ndarray) -> "Affine":
        """Scalar expression times a constant real array."""
        if self.shape != ():
            raise ValueError("times() needs a scalar expression")
        matrix = np.asarray(matrix, dtype=float)
        return Affine(matrix[..., None] * self.coef, matrix * self.const)

    def value(self, x: np.ndarray) -> np.ndarray:
        return self.coef @ x[: self.ncols] + self.const

    @staticmethod
    def stack(items) -> "Affine":
        items = [as_affine(i).flatten() for i in items]
        n = max(i.ncols for i in items)
        return Affine(np.concatenate([_pad(i.coef, n) for i in items]), np.concatenate([i.const for i in items]))

    def __repr__(self):
        return f"Affine(shape={self.shape}, ncols={self.ncols})"


def as_affine(x) -> Affine:
    if isinstance(x, Affine):
        return x
    if isinstance(x, HermAffine):
        raise TypeError("use HermAffine.embed() to obtain a real expression")
    return Affine.constant(x)


class HermAffine:
    """Complex Hermitian affine matrix expression, ``sum_p x_p E_p + C``."""

    def __init__(self, coef, const=None):
        self.coef = np.asarray(coef, dtype=complex)
        d = self.coef.shape[0]
        self.const = np.zeros((d, d), dtype=complex) if const is None else np.asarray(const, dtype=complex)

    @property
    def dim(self) -> int:
        return self.const.shape[0]

    @property
    def ncols(self) -> int:
        return self.coef.shape[-1]

    @classmethod
    def constant(cls, m) -> "HermAffine":
        m = np.asarray(m, dtype=complex)
        return cls(np.zeros(m.shape + (0,), dtype=complex), m)

    @classmethod
    def scaled(cls, scalar, m) -> "HermAffine":
        """``scalar * m`` for a scalar real expression and a constant matrix."""
        scalar = as_affine(scalar)
        m = np.asarray(m, dtype=complex)
        return cls(m[..., None] * scalar.coef.astype(complex), m * scalar.const)

    def __add__(self, other):
        if not isinstance(other, HermAffine):
            other = HermAffine.constant(other)
        n = max(self.ncols, other.ncols)
        return HermAffine(_pad(self.coef, n) + _pad(other.coef, n), self.const + other.const)

    __radd__ = __add__

    def __neg__(self):
        return HermAffine(-self.coef, -self.const)

    def __sub__(self, other):
        return self + (-other if isinstance(other, HermAffine) else -np.asarray(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, scalar):
        s = float(scalar)
        return HermAffine(s * self.coef, s * self.const)

    __rmul__ = __mul__

    def congruence(self, a: np.ndarray) -> "HermAffine":
        """``A^H X A``."""
        a = np.asarray(a, dtype=complex)
        ah = a.conj().T
        coef = np.einsum("ai,ijp,jb->abp", ah, self.coef, a)
        return HermAffine(coef, ah @ self.const @ a)

    def quad(self, h: np.ndarray) -> Affine:
        """``h^H X h`` as a real scalar expression."""
        h = np.asarray(h, dtype=complex)
        coef = np.einsum("i,ijp,j->p", h.conj(), self.coef, h)
        return Affine(coef.real, float(np.real(np.vdot(h, self.const @ h))))

    def trace(self) -> Affine:
        return Affine(np.real(np.einsum("iip->p", self.coef)), float(np.real(np.trace(self.const))))

    def embed(self) -> Affine:
        """Real 2d x 2d embedding of the expression."""
        re, im = self.coef.real, self.coef.imag
        coef = np.concatenate([np.concatenate([re, -im], axis=1), np.concatenate([im, re], axis=1)], axis=0)
        c = self.const
        const = np.block([[c.real, -c.imag], [c.imag, c.real]])
        return Affine(coef, const)

    def value(self, x: np.ndarray) -> np.ndarray:
        return self.coef @ x[: self.ncols] + self.const


# --------------------------------------------------------------------------
# program
# --------------------------------------------------------------------------

ZERO, NONNEG, SOC, PSD = "zero", "nonneg", "soc", "psd"


@dataclass
class Constraint:
    """``expr`` belongs to the cone ``kind``.

    For ``soc`` the first entry of ``expr`` bounds the norm of the rest; for
    ``psd`` ``expr`` is a square symmetric matrix expression.
    """

    kind: str
    expr: Affine
    name: str = ""

    @property
    def dim(self) -> int:
        if self.kind == PSD:
            return self.expr.shape[0]
        return int(np.prod(self.expr.shape))


@dataclass
class VariableInfo:
    name: str
    kind: str  # scalar | vector | symmetric | hermitian
    start: int
    size: int
    dim: int = 0


def _sym_basis(n: int) -> np.ndarray:
    idx = [(i, j) for j in range(n) for i in range(j + 1)]
    basis = np.zeros((n, n, len(idx)))
    for p, (i, j) in enumerate(idx):
        basis[i, j, p] = basis[j, i, p] = 1.0
    return basis


def _herm_basis(n: int) -> np.ndarray:
    """Basis of n x n Hermitian matrices: real diag, real off-diag, imag off-diag."""
    basis = []
    for i in range(n):
        e = np.zeros((n, n), dtype=complex)
        e[i, i] = 1.0
        basis.append(e)
    for j in range(n):
        for i in range(j):
            e = np.zeros((n, n), dtype=complex)
            e[i, j] = e[j, i] = 1.0
            basis.append(e)
    for j in range(n):
        for i in range(j):
            e = np.zeros((n, n), dtype=complex)
            e[i, j] = 1j
            e[j, i] = -1j
            basis.append(e)
    return np.stack(basis, axis=-1)


class ConicProgram:
    """Container for variables, a linear objective and conic constraints."""

    def __init__(self, name: str = "program"):
        self.name = name
        self.n = 0
        self.variables: dict[str, VariableInfo] = {}
        self.constraints: list[Constraint] = []
        self.objective: Affine = Affine.constant(0.0)
        self.sense = "min"

    # -- variables --------------------------------------------------------

    def _declare(self, name, kind, size, dim=0) -> VariableInfo:
        if name in self.variables:
            raise ValueError(f"variable {name!r} already declared")
        info = VariableInfo(name, kind, self.n, size, dim)
        self.variables[name] = info
        self.n += size
        return info

    def _columns(self, info: VariableInfo) -> np.ndarray:
        coef = np.zeros((info.size, self.n))
        coef[np.arange(info.size), info.start + np.arange(info.size)] = 1.0
        return coef

    def scalar(self, name: str) -> Affine:
        info = self._declare(name, "scalar", 1)
        return Affine(self._columns(info)[0])

    def vector(self, name: str, size: int) -> Affine:
        info = self._declare(name, "vector", size)
        return Affine(self._columns(info))

    def symmetric(self, name: str, n: int) -> Affine:
        basis = _sym_basis(n)
        info = self._declare(name, "symmetric", basis.shape[-1], n)
        coef = np.zeros((n, n, self.n))
        coef[..., info.start:info.start + info.size] = basis
        return Affine(coef)

    def hermitian(self, name: str, n: int) -> HermAffine:
        basis = _herm_basis(n)
        info = self._declare(name, "hermitian", basis.shape[-1], n)
        coef = np.zeros((n, n, self.n), dtype=complex)
        coef[..., info.start:info.start + info.size] = basis
        return HermAffine(coef)

    # -- constraints ------------------------------------------------------

    def _add(self, kind, expr: Affine, name: str) -> Constraint:
        if expr.ncols > self.n:
            raise ValueError("expression references undeclared variables")
        con = Constraint(kind, expr, name)
        self.constraints.append(con)
        return con

    def add_eq(self, lhs, rhs=0.0, name: str = "") -> Constraint:
        """``lhs == rhs`` (elementwise)."""
        return self._add(ZERO, (as_affine(lhs) - rhs).flatten(), name)

    def add_ge(self, lhs, rhs=0.0, name: str = "") -> Constraint:
        """``lhs >= rhs`` (elementwise)."""
        return self._add(NONNEG, (as_affine(lhs) - rhs).flatten(), name)

    def add_le(self, lhs, rhs=0.0, name: str = "") -> Constraint:
        return self.add_ge(as_affine(rhs) - lhs, 0.0, name)

    def add_soc(self, head, tail, name: str = "") -> Constraint:
        """``||tail|| <= head``."""
        head = as_affine(head)
        if head.shape != ():
            raise ValueError("SOC head must be scalar")
        return self._add(SOC, Affine.stack([head, as_affine(tail)]), name)

    def add_rotated_soc(self, u, v, w, name: str = "", balance: float = 1.0) -> Constraint:
        """``u * v >= ||w||**2`` with ``u, v >= 0``, encoded as
        ``||[2 w; u - v]|| <= u + v``.

        ``balance`` rewrites the pair as ``(u / balance, v * balance)``, which
        leaves the set unchanged but keeps both cone coordinates of similar
        size when ``u`` is expected to be much larger than ``v``.
        """
        u, v, w = as_affine(u), as_affine(v), as_affine(w)
        if u.shape != () or v.shape != ():
            raise ValueError("rotated SOC needs scalar u and v")
        if not balance > 0:
            raise ValueError("balance must be positive")
        u, v = u / balance, v * balance
        return self._add(SOC, Affine.stack([u + v, 2.0 * w, u - v]), name)

    def add_psd_block(self, m, name: str = "") -> Constraint:
        """``M >= 0`` for a real symmetric or complex Hermitian expression."""
        if isinstance(m, HermAffine):
            m = m.embed()
        m = as_affine(m)
        if len(m.shape) != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"PSD block must be square, got shape {m.shape}")
        return self._add(PSD, m, name)

    # -- objective --------------------------------------------------------

    def maximize(self, expr) -> None:
        self.objective, self.sense = as_affine(expr), "max"

    def minimize(self, expr) -> None:
        self.objective, self.sense = as_affine(expr), "min"

    # -- evaluation -------------------------------------------------------

    def values(self, x: np.ndarray) -> dict[str, np.ndarray | float]:
        out = {}
        for name, info in self.variables.items():
            seg = x[info.start:info.start + info.size]
            if info.kind == "scalar":
                out[name] = float(seg[0])
            elif info.kind == "vector":
                out[name] = seg.copy()
            elif info.kind == "symmetric":
                out[name] = _sym_basis(info.dim) @ seg
            else:
                out[name] = _herm_basis(info.dim) @ seg
        return out

    def residuals(self, x: np.ndarray) -> dict[str, float]:
        """Scaled violation of every constraint at ``x``, computed directly
        from the expressions (independent of any backend).

        Each violation is divided by ``1 + max(|x|_inf, |const|_inf)`` of
        the constraint, mirroring how interior-point solvers measure
        feasibility.
        """
        xs = 1.0 + float(np.max(np.abs(x), initial=0.0))
        out = {}
        for i, con in enumerate(self.constraints):
            val = con.expr.value(x)
            if con.kind == ZERO:
                viol = float(np.max(np.abs(val), initial=0.0))
            elif con.kind == NONNEG:
                viol = float(max(0.0, -np.min(val, initial=0.0)))
            elif con.kind == SOC:
                viol = float(max(0.0, np.linalg.norm(val[1:]) - val[0]))
            else:
                viol = float(max(0.0, -np.linalg.eigvalsh(0.5 * (val + val.T))[0]))
            scale = max(xs, 1.0 + float(np.max(np.abs(con.expr.const), initial=0.0)))
            out[con.name or f"c{i}"] = viol / scale
        return out

    def to_standard_form(self) -> "StandardForm":
        return StandardForm.from_program(self)

    def solve(self, backend: "Backend | str | None" = None, tol: float = DEFAULT_TOL) -> "SolverOutcome":
        sf = self.to_standard_form()
        backend = get_backend(backend)
        raw = backend.solve(sf, tol)
        return self._outcome(sf, raw, tol)

    def _outcome(self, sf: "StandardForm", raw: "RawResult", tol: float) -> "SolverOutcome":
        status = raw.status
        values, res, obj = {}, {}, None
        if raw.x is not None and np.all(np.isfinite(raw.x)):
            values = self.values(raw.x)
            res = self.residuals(raw.x)
        if status == OPTIMAL:
            worst = max(res.values(), default=0.0)
            if worst > RECHECK_FACTOR * tol:
                log.warning("%s: backend reported optimal but residual %.2e exceeds %.2e", self.name, worst,
                            RECHECK_FACTOR * tol)
                status = NUMERICAL_FAILURE
            else:
                obj = float(self.objective.value(raw.x))
        return SolverOutcome(status, obj, values, res, raw.x, raw.info)


# Violations are normalized by the largest entry of x, while IPM tolerances
# are normalized by vector norms; allow for the difference.
RECHECK_FACTOR = 100.0


# --------------------------------------------------------------------------
# standard form
# --------------------------------------------------------------------------


def svec_index(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Row/col indices and scale of the upper-triangle, column-major svec."""
    rows, cols = [], []
    for j in range(n):
        for i in range(j + 1):
            rows.append(i)
            cols.append(j)
    rows, cols = np.array(rows), np.array(cols)
    scale = np.where(rows == cols, 1.0, SQRT2)
    return rows, cols, scale


def svec(m: np.ndarray) -> np.ndarray:
    r, c, s = svec_index(m.shape[0])
    return m[r, c] * s


def smat(v: np.ndarray, n: int) -> np.ndarray:
    r, c, s = svec_index(n)
    m = np.zeros((n, n))
    m[r, c] = v / s
    m[c, r] = v / s
    return m


@dataclass
class StandardForm:
    """``min c @ x + offset  s.t.  b - A x in K``.

    ``cones`` is a list of ``(kind, dim)`` in row order; zero and nonneg
    cones appear first, followed by SOCs and then PSD blocks (``dim`` is
    the matrix side length). ``sense`` records whether the original
    objective was maximized (then the original value is ``-(c @ x + offset)``).
    """

    c: np.ndarray
    A: sp.csc_matrix
    b: np.ndarray
    cones: list[tuple[str, int]]
    offset: float = 0.0
    sense: str = "min"

    @classmethod
    def from_program(cls, prog: ConicProgram) -> "StandardForm":
        n = prog.n
        order = {ZERO: 0, NONNEG: 1, SOC: 2, PSD: 3}
        blocks = sorted(prog.constraints, key=lambda con: order[con.kind])
        a_rows, b_rows, cones = [], [], []
        for kind in (ZERO, NONNEG):
            group = [con for con in blocks if con.kind == kind]
            if group:
                e = Affine.stack([con.expr for con in group])
                a_rows.append(-_pad(e.coef, n))
                b_rows.append(e.const)
                cones.append((kind, e.shape[0]))
        for con in blocks:
            if con.kind == SOC:
                e = con.expr
                a_rows.append(-_pad(e.coef, n))
                b_rows.append(e.const)
                cones.append((SOC, e.shape[0]))
            elif con.kind == PSD:
                d = con.expr.shape[0]
                r, cidx, s = svec_index(d)
                sym_coef = 0.5 * (con.expr.coef + np.swapaxes(con.expr.coef, 0, 1))
                sym_const = 0.5 * (con.expr.const + con.expr.const.T)
                a_rows.append(-_pad(sym_coef[r, cidx] * s[:, None], n))
                b_rows.append(sym_const[r, cidx] * s)
                cones.append((PSD, d))
        A = sp.csc_matrix(np.vstack(a_rows)) if a_rows else sp.csc_matrix((0, n))
        b = np.concatenate(b_rows) if b_rows else np.zeros(0)
        obj = prog.objective
        sign = -1.0 if prog.sense == "max" else 1.0
        c = sign * _pad(obj.coef, n) if obj.ncols else np.zeros(n)
        return cls(np.asarray(c, dtype=float), A, b, cones, sign * float(obj.const), prog.sense)

    @property
    def n(self) -> int:
        return self.A.shape[1]

    def original_objective(self, x: np.ndarray) -> float:
        v = float(self.c @ x + self.offset)
        return -v if self.sense == "max" else v

    # -- text dump ----------------------------------------------------------
    #
    # Format (whitespace separated, one record per line):
    #   conicprog 1
    #   sense <min|max> n <n> m <m> offset <float>
    #   cones <k>            followed by k lines "<kind> <dim>"
    #   c <nnz>              followed by nnz lines "<j> <value>"
    #   b <nnz>              followed by nnz lines "<i> <value>"
    #   A <nnz>              followed by nnz lines "<i> <j> <value>"
    # Indices are 0-based; values use repr() so they round-trip exactly.

    def dumps(self) -> str:
        buf = io.StringIO()
        m, n = self.A.shape
        buf.write("conicprog 1\n")
        buf.write(f"sense {self.sense} n {n} m {m} offset {self.offset!r}\n")
        buf.write(f"cones {len(self.cones)}\n")
        for kind, dim in self.cones:
            buf.write(f"{kind} {dim}\n")
        nz = np.flatnonzero(self.c)
        buf.write(f"c {nz.size}\n")
        for j in nz:
            buf.write(f"{j} {float(self.c[j])!r}\n")
        nz = np.flatnonzero(self.b)
        buf.write(f"b {nz.size}\n")
        for i in nz:
            buf.write(f"{i} {float(self.b[i])!r}\n")
        coo = self.A.tocoo()
        buf.write(f"A {coo.nnz}\n")
        for i, j, v in zip(coo.row, coo.col, coo.data):
            buf.write(f"{i} {j} {float(v)!r}\n")
        return buf.getvalue()

    def dump(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def loads(cls, text: str) -> "StandardForm":
        lines = iter(text.splitlines())
        if next(lines).split() != ["conicprog", "1"]:
            raise ValueError("not a conicprog v1 dump")
        head = next(lines).split()
        sense, n, m, offset = head[1], int(head[3]), int(head[5]), float(head[7])
        k = int(next(lines).split()[1])
        cones = []
        for _ in range(k):
            kind, dim = next(lines).split()
            cones.append((kind, int(dim)))
        c = np.zeros(n)
        for _ in range(int(next(lines).split()[1])):
            j, v = next(lines).split()
            c[int(j)] = float(v)
        b = np.zeros(m)
        for _ in range(int(next(lines).split()[1])):
            i, v = next(lines).split()
            b[int(i)] = float(v)
        nnz = int(next(lines).split()[1])
        ii, jj, vv = np.zeros(nnz, int), np.zeros(nnz, int), np.zeros(nnz)
        for p in range(nnz):
            i, j, v = next(lines).split()
            ii[p], jj[p], vv[p] = int(i), int(j), float(v)
        A = sp.csc_matrix((vv, (ii, jj)), shape=(m, n))
        return cls(c, A, b, cones, offset, sense)

    @classmethod
    def load(cls, path: str | Path) -> "StandardForm":
        return cls.loads(Path(path).read_text())


# --------------------------------------------------------------------------
# backends
# --------------------------------------------------------------------------


@dataclass
class RawResult:
    status: str
    x: np.ndarray | None
    info: dict = field(default_factory=dict)


@dataclass
class SolverOutcome:
    status: str
    objective_value: float | None
    variable_values: dict
    residuals: dict
    x: np.ndarray | None = None
    info: dict = field(default_factory=dict)

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values(), default=0.0)


class Backend(Protocol):
    name: str

    def solve(self, sf: StandardForm, tol: float) -> RawResult: ...


class ClarabelBackend:
    """Interior-point solver (default)."""

    name = "clarabel"

    _STATUS = {
        "Solved": OPTIMAL,
        "AlmostSolved": OPTIMAL,
        "PrimalInfeasible": INFEASIBLE,
        "AlmostPrimalInfeasible": INFEASIBLE,
        "DualInfeasible": UNBOUNDED,
        "AlmostDualInfeasible": UNBOUNDED,
    }

    def __init__(self, max_iter: int = 200, **settings):
        self.max_iter = max_iter
        self.settings = settings

    def solve(self, sf: StandardForm, tol: float) -> RawResult:
        import clarabel

        cones = []
        for kind, dim in sf.cones:
            if kind == ZERO:
                cones.append(clarabel.ZeroConeT(dim))
            elif kind == NONNEG:
                cones.append(clarabel.NonnegativeConeT(dim))
            elif kind == SOC:
                cones.append(clarabel.SecondOrderConeT(dim))
            else:
                cones.append(clarabel.PSDTriangleConeT(dim))
        st = clarabel.DefaultSettings()
        st.verbose = False
        st.max_iter = self.max_iter
        st.tol_gap_abs = st.tol_gap_rel = st.tol_feas = tol
        st.tol_infeas_abs = st.tol_infeas_rel = tol
        for k, v in self.settings.items():
            setattr(st, k, v)
        n = sf.n
        P = sp.csc_matrix((n, n))
        try:
            sol = clarabel.DefaultSolver(P, sf.c, sp.csc_matrix(sf.A), sf.b, cones, st).solve()
        except Exception as exc:  # backend breakdown, e.g. factorization failure
            return RawResult(NUMERICAL_FAILURE, None, {"error": repr(exc)})
        raw_status = str(sol.status).split(".")[-1]
        status = self._STATUS.get(raw_status, NUMERICAL_FAILURE)
        info = {"backend": self.name, "raw_status": raw_status, "iterations": int(sol.iterations),
                "solve_time": float(sol.solve_time)}
        x = np.asarray(sol.x, dtype=float) if status == OPTIMAL else None
        return RawResult(status, x, info)


class ScsBackend:
    """First-order splitting solver, mainly for cross-checks."""

    name = "scs"

    def __init__(self, max_iters: int = 100_000, **settings):
        self.max_iters = max_iters
        self.settings = settings

    def solve(self, sf: StandardForm, tol: float) -> RawResult:
        import scs

        # SCS wants lower-triangle column-major, i.e. our upper-triangle
        # row-major ordering inside every PSD block.
        perm = np.arange(sf.A.shape[0])
        counts = {"z": 0, "l": 0, "q": [], "s": []}
        row = 0
        for kind, dim in sf.cones:
            if kind == ZERO:
                counts["z"] += dim
                row += dim
            elif kind == NONNEG:
                counts["l"] += dim
                row += dim
            elif kind == SOC:
                counts["q"].append(dim)
                row += dim
            else:
                r, c, _ = svec_index(dim)
                pos = {(i, j): p for p, (i, j) in enumerate(zip(r, c))}
                lower_colmajor = [(j, i) for i in range(dim) for j in range(i, dim)]
                # entry (row j, col i) of the lower triangle equals (i, j) of the upper
                order = [pos[(i, j)] for (j, i) in lower_colmajor]
                perm[row:row + len(order)] = row + np.array(order)
                counts["s"].append(dim)
                row += len(order)
        A = sp.csc_matrix(sf.A[perm])
        b = sf.b[perm]
        cone = {k: v for k, v in counts.items() if v}
        data = {"A": A, "b": b, "c": sf.c}
        try:
            solver = scs.SCS(data, cone, verbose=False, eps_abs=tol, eps_rel=tol, max_iters=self.max_iters,
                             **self.settings)
            sol = solver.solve()
        except Exception as exc:
            return RawResult(NUMERICAL_FAILURE, None, {"error": repr(exc)})
        raw = sol["info"]["status"]
        if raw in ("solved", "solved_inaccurate"):
            status = OPTIMAL
        elif raw.startswith("infeasible"):
            status = INFEASIBLE
        elif raw.startswith("unbounded"):
            status = UNBOUNDED
        else:
            status = NUMERICAL_FAILURE
        x = np.asarray(sol["x"], dtype=float) if status == OPTIMAL else None
        return RawResult(status, x, {"backend": self.name, "raw_status": raw, "iterations": sol["info"]["iter"]})


_BACKENDS = {"clarabel": ClarabelBackend, "scs": ScsBackend}


def get_backend(backend=None) -> Backend:
    if backend is None:
        return ClarabelBackend()
    if isinstance(backend, str):
        try:
            return _BACKENDS[backend.lower()]()
        except KeyError:
            raise ValueError(f"unknown backend {backend!r}; choose from {sorted(_BACKENDS)}") from None
    return backend


def solve_standard_form(sf: StandardForm, backend=None, tol: float = DEFAULT_TOL) -> RawResult:
    return get_backend(backend).solve(sf, tol)
