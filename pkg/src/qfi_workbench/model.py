"""Parametrized Hamiltonians H(g) = sum_j c_j(g) A_j.

Model files are YAML (JSON is accepted, being a YAML subset)::

    label: spin direction
    dim: 2
    terms:
      - coeff: "cos(g)"
        matrix: [[0, 0], [1, 0], [1, 0], [0, 0]]   # row-major (re, im) pairs
      - coeff: "sin(g)"
        matrix: [[1, 0], [0, 0], [0, 0], [-1, 0]]

``matrix`` may also be nested by rows: ``[[[re, im], ...], ...]``. Coefficient
strings follow the grammar in :mod:`qfi_workbench.expr`.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np
import yaml

from . import expr as ex
from .errors import HermiticityError, ModelError, ModelSyntaxError
from .operators import (
    HERMITIAN_RTOL,
    PAULIS,
    SIGMA_X,
    SIGMA_Z,
    check_hermitian,
    random_hermitian,
)

DIRECTION_ATOL = 1e-8
MAX_TENSOR_DIM = 64


@dataclass(frozen=True)
class Term:
    coeff: ex.Expr
    matrix: np.ndarray


@dataclass(frozen=True)
class ModelSpec:
    dim: int
    terms: tuple
    label: str = ""
    # Optional (nx, ny, nz) coefficient triple whose unit norm is checked at
    # every evaluation point (spin direction models).
    direction: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        for term in self.terms:
            if term.matrix.shape != (self.dim, self.dim):
                raise ModelError(
                    f"term matrix has shape {term.matrix.shape}, model dimension is {self.dim}"
                )

    def coefficients(self, g) -> np.ndarray:
        return np.array([float(t.coeff.evaluate(g)) for t in self.terms])


def make_model(terms, label="", direction=None) -> ModelSpec:
    """Build a ModelSpec from ``(coeff, matrix)`` pairs, validating every matrix."""
    built = []
    dim = None
    for i, (coeff, matrix) in enumerate(terms):
        m = check_hermitian(matrix, name=f"term {i} matrix").copy()
        m.setflags(write=False)
        if dim is None:
            dim = m.shape[0]
        elif m.shape[0] != dim:
            raise ModelError(f"term {i} has dimension {m.shape[0]}, expected {dim}")
        built.append(Term(ex.as_expr(coeff), m))
    if not built:
        raise ModelError("a model needs at least one term")
    if direction is not None:
        direction = tuple(ex.as_expr(c) for c in direction)
    return ModelSpec(dim, tuple(built), label, direction)


def evaluate(spec: ModelSpec, g: float) -> np.ndarray:
    """H(g) as a dense Hermitian matrix."""
    if not np.isfinite(g):
        raise ValueError("g must be finite")
    if spec.direction is not None:
        n = np.array([float(c.evaluate(g)) for c in spec.direction])
        if abs(np.linalg.norm(n) - 1.0) > DIRECTION_ATOL:
            raise ModelError(f"direction vector has norm {np.linalg.norm(n):.12g} at g={g!r}")
    h = np.zeros((spec.dim, spec.dim), dtype=complex)
    for term in spec.terms:
        c = float(term.coeff.evaluate(g))
        if not np.isfinite(c):
            raise ModelError(f"coefficient {term.coeff} is not finite at g={g!r}")
        h += c * term.matrix
    return h


def differentiate(spec: ModelSpec) -> ModelSpec:
    """Term-wise symbolic derivative dH/dg."""
    terms = tuple(Term(t.coeff.derivative(), t.matrix) for t in spec.terms)
    return ModelSpec(spec.dim, terms, f"d/dg {spec.label}".strip())


# --- model files -----------------------------------------------------------


def _matrix_from_pairs(raw, dim, where):
    try:
        a = np.asarray(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ModelError(f"{where}: matrix entries must be numeric (re, im) pairs") from exc
    if a.shape == (dim * dim, 2):
        a = a.reshape(dim, dim, 2)
    if a.shape != (dim, dim, 2):
        raise ModelError(
            f"{where}: expected {dim * dim} (re, im) pairs for dim={dim}, got array of shape {a.shape}"
        )
    return a[..., 0] + 1j * a[..., 1]


def _coeff_marks(root):
    """Map term index -> (start mark, quote offset) of its ``coeff`` scalar."""
    marks = {}
    if not isinstance(root, yaml.MappingNode):
        return marks
    for key, value in root.value:
        if key.value == "terms" and isinstance(value, yaml.SequenceNode):
            for i, item in enumerate(value.value):
                if not isinstance(item, yaml.MappingNode):
                    continue
                for k, v in item.value:
                    if k.value == "coeff" and isinstance(v, yaml.ScalarNode):
                        marks[i] = (v.start_mark, 1 if v.style in ("'", '"') else 0)
    return marks


def parse_model(source: str) -> ModelSpec:
    """Parse model-file text. Syntax errors report 1-based line and column."""
    try:
        root = yaml.compose(source)
        data = yaml.safe_load(source)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        problem = getattr(exc, "problem", None) or str(exc)
        if mark is not None:
            raise ModelSyntaxError(f"malformed model file: {problem}", mark.line + 1, mark.column + 1) from exc
        raise ModelSyntaxError(f"malformed model file: {problem}") from exc
    if not isinstance(data, dict):
        raise ModelError("model file must be a mapping with keys dim, terms, label")
    unknown = set(data) - {"dim", "terms", "label"}
    if unknown:
        raise ModelError(f"unknown model-file keys: {sorted(unknown)}")
    dim = data.get("dim")
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise ModelError(f"dim must be a positive integer, got {dim!r}")
    raw_terms = data.get("terms")
    if not isinstance(raw_terms, list) or not raw_terms:
        raise ModelError("terms must be a non-empty list")
    marks = _coeff_marks(root)
    terms = []
    for i, item in enumerate(raw_terms):
        if not isinstance(item, dict) or "coeff" not in item or "matrix" not in item:
            raise ModelError(f"term {i} must have 'coeff' and 'matrix'")
        try:
            coeff = ex.parse_expr(item["coeff"])
        except ModelSyntaxError as exc:
            if i in marks and exc.position is not None:
                mark, quote = marks[i]
                raise ModelSyntaxError(
                    f"term {i} coefficient: {exc.args[0].rsplit(' (', 1)[0]}",
                    mark.line + 1, mark.column + 1 + quote + exc.position, exc.position,
                ) from None
            raise
        matrix = _matrix_from_pairs(item["matrix"], dim, f"term {i}")
        try:
            check_hermitian(matrix, HERMITIAN_RTOL, name=f"term {i} matrix")
        except HermiticityError as exc:
            raise HermiticityError(str(exc)) from None
        terms.append((coeff, matrix))
    label = data.get("label", "")
    return make_model(terms, str(label))


def load_model(path) -> ModelSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read())


def to_source(spec: ModelSpec) -> str:
    """Serialize to model-file text (JSON layout, accepted by :func:`parse_model`)."""
    terms = []
    for t in spec.terms:
        pairs = [[float(z.real), float(z.imag)] for z in t.matrix.reshape(-1)]
        terms.append({"coeff": str(t.coeff), "matrix": pairs})
    return json.dumps({"label": spec.label, "dim": spec.dim, "terms": terms}, indent=1)


# --- builtin models --------------------------------------------------------


def spin_direction(B: float = 1.0) -> ModelSpec:
    """H = B (cos g sigma_x + sin g sigma_z)."""
    b = ex.Const(float(B))
    return make_model(
        [(ex.mul(b, ex.Cos(ex.Var())), SIGMA_X), (ex.mul(b, ex.Sin(ex.Var())), SIGMA_Z)],
        label=f"spin_direction(B={B!r})",
        direction=(ex.Cos(ex.Var()), ex.ZERO, ex.Sin(ex.Var())),
    )


def spin_direction_general(nx, ny, nz, B: float = 1.0) -> ModelSpec:
    """H = B n(g).sigma for a unit direction given by three coefficient expressions."""
    n = tuple(ex.as_expr(c) for c in (nx, ny, nz))
    b = ex.Const(float(B))
    terms = [(ex.mul(b, c), p) for c, p in zip(n, PAULIS) if not c.is_const(0.0)]
    return make_model(
        terms,
        label=f"spin_direction_general(n=({n[0]}, {n[1]}, {n[2]}), B={B!r})",
        direction=n,
    )


def spin_amplitude(B="g", n=(0.0, 0.0, 1.0)) -> ModelSpec:
    """H = B(g) n.sigma with a fixed unit direction ``n``."""
    n = np.asarray(n, dtype=float)
    if n.shape != (3,) or abs(np.linalg.norm(n) - 1.0) > DIRECTION_ATOL:
        raise ModelError(f"direction must be a unit 3-vector, got {n.tolist()}")
    coeff = ex.as_expr(B)
    matrix = sum(c * p for c, p in zip(n, PAULIS))
    return make_model([(coeff, matrix)], label=f"spin_amplitude(B={coeff}, n={n.tolist()})")


BUILTINS = {
    "spin_direction": spin_direction,
    "spin_direction_general": spin_direction_general,
    "spin_amplitude": spin_amplitude,
}


def _split_args(text):
    parts, depth, cur = [], 0, ""
    for ch in text:
        if ch == "," and depth == 0:
            parts.append(cur)
            cur = ""
            continue
        depth += ch == "("
        depth -= ch == ")"
        cur += ch
    if cur.strip():
        parts.append(cur)
    return parts


def builtin_model(text: str) -> ModelSpec:
    """Build a builtin from ``name`` or ``name:key=value,...``.

    Keys: ``B`` (number, or expression for spin_amplitude); ``nx``, ``ny``,
    ``nz`` (expressions for spin_direction_general, numbers for spin_amplitude).
    """
    name, _, argtext = text.partition(":")
    name = name.strip()
    if name not in BUILTINS:
        raise ModelError(f"unknown builtin model {name!r}; choose from {sorted(BUILTINS)}")
    args = {}
    for part in _split_args(argtext):
        key, sep, value = part.partition("=")
        if not sep:
            raise ModelError(f"builtin argument {part!r} must look like key=value")
        args[key.strip()] = value.strip()
    allowed = {"spin_direction": {"B"}, "spin_direction_general": {"B", "nx", "ny", "nz"},
               "spin_amplitude": {"B", "nx", "ny", "nz"}}[name]
    if set(args) - allowed:
        raise ModelError(f"unknown arguments for {name}: {sorted(set(args) - allowed)}")
    try:
        if name == "spin_direction":
            return spin_direction(float(args.get("B", 1.0)))
        if name == "spin_direction_general":
            n = [args.get(k, d) for k, d in (("nx", "cos(g)"), ("ny", "0"), ("nz", "sin(g)"))]
            return spin_direction_general(*n, B=float(args.get("B", 1.0)))
        n = [float(args.get(k, d)) for k, d in (("nx", 0.0), ("ny", 0.0), ("nz", 1.0))]
        return spin_amplitude(args.get("B", "g"), n)
    except ModelError:
        raise
    except ValueError as exc:
        raise ModelError(f"bad arguments for {name}: {exc}") from exc


def resolve_model(source: str) -> ModelSpec:
    """Interpret a ``--model`` value: builtin spec string or model-file path."""
    if source.partition(":")[0].strip() in BUILTINS:
        return builtin_model(source)
    if os.path.exists(source):
        return load_model(source)
    raise FileNotFoundError(f"model file not found: {source}")


# --- tensor powers and random models ---------------------------------------


def tensor_power(spec: ModelSpec, N: int) -> ModelSpec:
    """Noninteracting N-copy model: sum_i I x ... x H x ... x I."""
    if N < 1:
        raise ValueError("N must be >= 1")
    total_dim = spec.dim ** N
    if total_dim > MAX_TENSOR_DIM:
        raise ModelError(f"d^N = {spec.dim}^{N} = {total_dim} exceeds the cap of {MAX_TENSOR_DIM}")
    eye = np.eye(spec.dim)
    terms = []
    for term in spec.terms:
        total = np.zeros((total_dim, total_dim), dtype=complex)
        for i in range(N):
            op = np.ones((1, 1))
            for j in range(N):
                op = np.kron(op, term.matrix if j == i else eye)
            total += op
        terms.append((term.coeff, total))
    return make_model(terms, label=f"{spec.label} x{N}", direction=spec.direction)


RANDOM_COEFFS = ("g", "cos(g)", "sin(g)", "g^2", "sin(2*g)", "0.5*g^3 - g", "g*cos(g)", "1 + 0.3*sin(g)^2")


def random_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))[None, :]


def random_model(rng: np.random.Generator, d: int, n_terms: int | None = None) -> ModelSpec:
    """A generic model: a constant term plus g-dependent random Hermitian terms."""
    if n_terms is None:
        n_terms = int(rng.integers(1, 4))
    terms = []
    for j in range(n_terms):
        if j == 0 and n_terms > 1:
            coeff = "1"
        else:
            coeff = RANDOM_COEFFS[int(rng.integers(len(RANDOM_COEFFS)))]
        terms.append((coeff, random_hermitian(rng, d)))
    return make_model(terms, label=f"random(d={d}, terms={n_terms})")


def random_rotation_model(rng: np.random.Generator, d: int) -> ModelSpec:
    """cos(g) W(sx x K)W^+ + sin(g) W(sz x K)W^+ for even d: spectrum independent of g."""
    if d % 2:
        raise ValueError("rotation models need even dimension")
    k = np.diag(np.sort(rng.uniform(0.3, 1.5, size=d // 2)))
    w = random_unitary(rng, d)
    ax = w @ np.kron(SIGMA_X, k) @ w.conj().T
    az = w @ np.kron(SIGMA_Z, k) @ w.conj().T
    return make_model(
        [("cos(g)", (ax + ax.conj().T) / 2), ("sin(g)", (az + az.conj().T) / 2)],
        label=f"random_rotation(d={d})",
    )
