"""Exact arithmetic over Z_{p^{j+1}} x Z_p^(d-1) and its endomorphism ring.

Vectors carry one wide coordinate reduced mod p^{j+1} followed by d-1
coordinates reduced mod p, where d = p^j - 1.  Endomorphisms of that group
are d x d integer matrices reduced row-wise by the same moduli.  Such a
matrix is well defined only when every row-0 entry in columns >= 1 is
divisible by p^j: those columns receive order-p generators, so their
images must land in the p^j-torsion of the wide factor.  The same
divisibility makes every product independent of which integer lift of a
mod-p residue is used, which is what justifies multiplying canonical
residues directly.

All arithmetic uses Python's arbitrary-precision integers; values are
immutable after construction and safe to share between workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

DEFAULT_MAX_DIMENSION = 512


class ParameterError(ValueError):
    """Parameters outside the supported range."""


class MatrixInvariantError(ValueError):
    """An integer grid that is not a well defined endomorphism."""


def _is_prime(m: int) -> bool:
    if m < 2:
        return False
    d = 2
    while d * d <= m:
        if m % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class GroupParams:
    """The defining pair (p, j) together with the sizes derived from it.

    p must be an odd prime and j a positive integer.  Derived fields:
    n = p^j (the power whose root-counting the construction targets),
    dim = p^j - 1 (number of vector coordinates), top_modulus = p^{j+1},
    b_order = p^j, group_order = p^{p^j + 2j - 1}.
    """

    p: int
    j: int
    max_dim: int = field(default=DEFAULT_MAX_DIMENSION, repr=False, compare=False)
    n: int = field(init=False, compare=False, repr=False)
    dim: int = field(init=False, compare=False, repr=False)
    top_modulus: int = field(init=False, compare=False, repr=False)
    b_order: int = field(init=False, compare=False, repr=False)
    group_order: int = field(init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        if self.p < 3 or not _is_prime(self.p):
            raise ParameterError(f"p must be an odd prime >= 3, got {self.p}")
        if self.j < 1:
            raise ParameterError(f"j must be a positive integer, got {self.j}")
        n = self.p ** self.j
        if n - 1 > self.max_dim:
            raise ParameterError(
                f"dimension p^j - 1 = {n - 1} exceeds the size guard {self.max_dim}"
            )
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "dim", n - 1)
        object.__setattr__(self, "top_modulus", n * self.p)
        object.__setattr__(self, "b_order", n)
        object.__setattr__(self, "group_order", self.p ** (n + 2 * self.j - 1))

    def row_modulus(self, r: int) -> int:
        return self.top_modulus if r == 0 else self.p

    def describe(self) -> str:
        return f"S({self.p},{self.j})"


def _require_same_params(a, b) -> None:
    if a.params != b.params:
        raise ParameterError(f"mixed parameters: {a.params} vs {b.params}")


@dataclass(frozen=True)
class MixedVector:
    """An element of the abelian group, stored as canonical residues."""

    params: GroupParams
    coords: tuple[int, ...]

    def __post_init__(self) -> None:
        pr = self.params
        if len(self.coords) != pr.dim:
            raise ParameterError(
                f"expected {pr.dim} coordinates, got {len(self.coords)}"
            )
        p, top = pr.p, pr.top_modulus
        c = self.coords
        object.__setattr__(
            self, "coords", (c[0] % top,) + tuple(x % p for x in c[1:])
        )

    def is_zero(self) -> bool:
        return not any(self.coords)

    def __add__(self, other: "MixedVector") -> "MixedVector":
        return vec_combine(self, other)

    def __neg__(self) -> "MixedVector":
        return vec_scale(-1, self)


def zero_vector(params: GroupParams) -> MixedVector:
    return MixedVector(params, (0,) * params.dim)


def basis_vector(params: GroupParams, i: int) -> MixedVector:
    """Standard basis vector e_{i+1}; i is a 0-based coordinate index."""
    if not 0 <= i < params.dim:
        raise ParameterError(f"basis index {i} out of range 0..{params.dim - 1}")
    coords = [0] * params.dim
    coords[i] = 1
    return MixedVector(params, tuple(coords))


def vec_combine(v: MixedVector, w: MixedVector) -> MixedVector:
    """Componentwise sum, the abelian group operation."""
    _require_same_params(v, w)
    return MixedVector(v.params, tuple(a + b for a, b in zip(v.coords, w.coords)))


def vec_scale(c: int, v: MixedVector) -> MixedVector:
    """Scalar multiple: each coordinate times c, reduced by its modulus."""
    return MixedVector(v.params, tuple(c * x for x in v.coords))


@dataclass(frozen=True)
class EndoMatrix:
    """A dim x dim integer matrix with per-row moduli.

    Row 0 is reduced mod p^{j+1}, the others mod p.  Construction reduces
    the entries and enforces the well-definedness invariant: row-0 entries
    in columns >= 1 must be divisible by p^j.
    """

    params: GroupParams
    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        pr = self.params
        d = pr.dim
        if len(self.rows) != d or any(len(r) != d for r in self.rows):
            raise ParameterError(f"expected a {d}x{d} grid")
        p, top = pr.p, pr.top_modulus
        reduced = (tuple(x % top for x in self.rows[0]),) + tuple(
            tuple(x % p for x in row) for row in self.rows[1:]
        )
        object.__setattr__(self, "rows", reduced)
        pj = pr.n
        for c in range(1, d):
            if reduced[0][c] % pj:
                raise MatrixInvariantError(
                    f"row 0 column {c} entry {reduced[0][c]} is not divisible "
                    f"by p^j = {pj}; the grid is not a well defined endomorphism"
                )

    def entry(self, r: int, c: int) -> int:
        return self.rows[r][c]

    def __mul__(self, other: "EndoMatrix") -> "EndoMatrix":
        return mat_mul(self, other)

    def __add__(self, other: "EndoMatrix") -> "EndoMatrix":
        return mat_add(self, other)


def identity_matrix(params: GroupParams) -> EndoMatrix:
    d = params.dim
    return EndoMatrix(
        params, tuple(tuple(1 if r == c else 0 for c in range(d)) for r in range(d))
    )


def zero_matrix(params: GroupParams) -> EndoMatrix:
    d = params.dim
    return EndoMatrix(params, ((0,) * d,) * d)


def mat_apply(M: EndoMatrix, v: MixedVector) -> MixedVector:
    """Apply M to v on the left.

    The row-0 sum mixes mod-p residues into a mod-p^{j+1} result; this is
    lift-independent because the corresponding matrix entries are
    divisible by p^j.
    """
    _require_same_params(M, v)
    c = v.coords
    return MixedVector(
        M.params, tuple(sum(a * b for a, b in zip(row, c)) for row in M.rows)
    )


def mat_mul(M: EndoMatrix, N: EndoMatrix) -> EndoMatrix:
    """Matrix product with per-row reduction; preserves the invariant."""
    _require_same_params(M, N)
    cols = tuple(zip(*N.rows))
    return EndoMatrix(
        M.params,
        tuple(
            tuple(sum(a * b for a, b in zip(row, col)) for col in cols)
            for row in M.rows
        ),
    )


def mat_add(M: EndoMatrix, N: EndoMatrix) -> EndoMatrix:
    _require_same_params(M, N)
    return EndoMatrix(
        M.params,
        tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(M.rows, N.rows)),
    )


def mat_scale(c: int, M: EndoMatrix) -> EndoMatrix:
    return EndoMatrix(M.params, tuple(tuple(c * x for x in row) for row in M.rows))


def mat_pow(M: EndoMatrix, e: int) -> EndoMatrix:
    """M^e by square-and-multiply; M^0 is the identity."""
    if e < 0:
        raise ParameterError(f"negative exponent {e}")
    result = identity_matrix(M.params)
    base = M
    while e:
        if e & 1:
            result = mat_mul(result, base)
        e >>= 1
        if e:
            base = mat_mul(base, base)
    return result
