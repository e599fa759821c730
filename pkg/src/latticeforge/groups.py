"""Finite group construction from declarative specs.

A group is a validated Cayley table over element indices ``0..order-1``
with element ``0`` always the identity.  Each constructor fixes a
deterministic element labeling, so building the same spec twice yields an
identical table:

* ``Cyclic(n)``: element ``k`` is the k-th power of a fixed generator.
* ``DirectProduct``: mixed-radix index with the first factor most
  significant, ``index(a, b) = a * |B| + b``.
* ``Dihedral(n)``: rotations ``0..n-1`` first, then reflections.
* ``Dicyclic(m)``: powers of the order-2m generator first, then the
  twisted coset.  ``Dicyclic(2)`` is the quaternion group.
* ``Symmetric`` / ``Alternating`` / ``PermGroup``: permutations sorted
  lexicographically (the identity is lexicographically least).
* ``SemidirectZqZpa``: pairs ``(i, j)`` with ``i`` in the normal cyclic
  part, indexed ``i * p**a + j``.

Products of permutations apply the right factor first: ``(s*t)(k) = s[t[k]]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import InvalidSpec, OrderCapExceeded, ValidationFailed

DEFAULT_ORDER_CAP = 512

#: Orders up to this size get the full O(n^3) associativity check at build
#: time; larger constructor-built tables are trusted (explicit Cayley table
#: input is always fully checked).
FULL_ASSOCIATIVITY_LIMIT = 256


# --------------------------------------------------------------------------
# group specs


@dataclass(frozen=True)
class Cyclic:
    n: int


@dataclass(frozen=True)
class DirectProduct:
    factors: tuple

    def __init__(self, factors: Iterable) -> None:
        object.__setattr__(self, "factors", tuple(factors))


@dataclass(frozen=True)
class Dihedral:
    """Symmetries of the regular n-gon, order 2n, requires n >= 3."""

    n: int


@dataclass(frozen=True)
class Dicyclic:
    """Dicyclic group of order 4m, m >= 2.  m = 2 gives the quaternions."""

    m: int


@dataclass(frozen=True)
class Symmetric:
    n: int


@dataclass(frozen=True)
class Alternating:
    n: int


@dataclass(frozen=True)
class SemidirectZqZpa:
    """Semidirect product of Z_q by Z_{p^a}.

    The generator of the Z_{p^a} factor acts on Z_q by multiplication with
    ``action``, which must be a residue mod q of multiplicative order p**s
    for some s >= 1 (so q = 1 mod p is forced).
    """

    q: int
    p: int
    a: int
    action: int


@dataclass(frozen=True)
class PermGroup:
    """Group generated by explicit permutations of ``range(degree)``."""

    degree: int
    generators: tuple

    def __init__(self, degree: int, generators: Iterable[Sequence[int]]) -> None:
        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "generators", tuple(tuple(g) for g in generators))


@dataclass(frozen=True)
class CayleyTable:
    table: tuple

    def __init__(self, table: Iterable[Sequence[int]]) -> None:
        object.__setattr__(self, "table", tuple(tuple(row) for row in table))


GroupSpec = Union[
    Cyclic,
    DirectProduct,
    Dihedral,
    Dicyclic,
    Symmetric,
    Alternating,
    SemidirectZqZpa,
    PermGroup,
    CayleyTable,
]

_SPEC_KINDS = {
    Cyclic: "cyclic",
    DirectProduct: "direct_product",
    Dihedral: "dihedral",
    Dicyclic: "dicyclic",
    Symmetric: "symmetric",
    Alternating: "alternating",
    SemidirectZqZpa: "semidirect_zq_zpa",
    PermGroup: "perm_group",
    CayleyTable: "cayley_table",
}


def spec_to_json(spec: GroupSpec) -> dict:
    """Serialize a spec to its stable JSON form (see README for the schema)."""
    if isinstance(spec, Cyclic):
        return {"kind": "cyclic", "n": spec.n}
    if isinstance(spec, DirectProduct):
        return {"kind": "direct_product", "factors": [spec_to_json(f) for f in spec.factors]}
    if isinstance(spec, Dihedral):
        return {"kind": "dihedral", "n": spec.n}
    if isinstance(spec, Dicyclic):
        return {"kind": "dicyclic", "m": spec.m}
    if isinstance(spec, Symmetric):
        return {"kind": "symmetric", "n": spec.n}
    if isinstance(spec, Alternating):
        return {"kind": "alternating", "n": spec.n}
    if isinstance(spec, SemidirectZqZpa):
        return {"kind": "semidirect_zq_zpa", "q": spec.q, "p": spec.p, "a": spec.a, "action": spec.action}
    if isinstance(spec, PermGroup):
        return {"kind": "perm_group", "degree": spec.degree, "generators": [list(g) for g in spec.generators]}
    if isinstance(spec, CayleyTable):
        return {"kind": "cayley_table", "table": [list(row) for row in spec.table]}
    raise InvalidSpec(f"unknown spec object: {spec!r}")


def spec_from_json(data: dict) -> GroupSpec:
    """Parse the JSON form produced by :func:`spec_to_json`."""
    if not isinstance(data, dict) or "kind" not in data:
        raise InvalidSpec("spec JSON must be an object with a 'kind' field")
    kind = data["kind"]
    try:
        if kind == "cyclic":
            return Cyclic(int(data["n"]))
        if kind == "direct_product":
            return DirectProduct(spec_from_json(f) for f in data["factors"])
        if kind == "dihedral":
            return Dihedral(int(data["n"]))
        if kind == "dicyclic":
            return Dicyclic(int(data["m"]))
        if kind == "symmetric":
            return Symmetric(int(data["n"]))
        if kind == "alternating":
            return Alternating(int(data["n"]))
        if kind == "semidirect_zq_zpa":
            return SemidirectZqZpa(int(data["q"]), int(data["p"]), int(data["a"]), int(data["action"]))
        if kind == "perm_group":
            return PermGroup(int(data["degree"]), data["generators"])
        if kind == "cayley_table":
            return CayleyTable(data["table"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidSpec(f"malformed {kind!r} spec: {exc}") from exc
    raise InvalidSpec(f"unknown spec kind {kind!r}")


def document_to_spec(doc: dict) -> tuple[str, GroupSpec]:
    """Parse a ``{"name": ..., "spec": {...}}`` document."""
    if not isinstance(doc, dict) or "spec" not in doc:
        raise InvalidSpec("group document must be an object with a 'spec' field")
    spec = spec_from_json(doc["spec"])
    name = doc.get("name")
    if name is None:
        name = spec_display_name(spec)
    if not isinstance(name, str):
        raise InvalidSpec("group name must be a string")
    return name, spec


def spec_to_document(name: str, spec: GroupSpec) -> dict:
    return {"name": name, "spec": spec_to_json(spec)}


def spec_display_name(spec: GroupSpec) -> str:
    if isinstance(spec, Cyclic):
        return f"Z{spec.n}"
    if isinstance(spec, DirectProduct):
        return "x".join(spec_display_name(f) for f in spec.factors) if spec.factors else "Z1"
    if isinstance(spec, Dihedral):
        return f"Dih{spec.n}"
    if isinstance(spec, Dicyclic):
        return "Q8" if spec.m == 2 else f"Dic{spec.m}"
    if isinstance(spec, Symmetric):
        return f"S{spec.n}"
    if isinstance(spec, Alternating):
        return f"A{spec.n}"
    if isinstance(spec, SemidirectZqZpa):
        return f"Z{spec.q}:Z{spec.p ** spec.a}r{spec.action}"
    if isinstance(spec, PermGroup):
        return f"Perm{spec.degree}<{len(spec.generators)}>"
    if isinstance(spec, CayleyTable):
        return f"Table{len(spec.table)}"
    return repr(spec)


# --------------------------------------------------------------------------
# bitset helpers (subgroups are element-index bitsets stored as Python ints)


def mask_of(elements: Iterable[int]) -> int:
    mask = 0
    for e in elements:
        mask |= 1 << e
    return mask


def elements_of(mask: int, order: int) -> np.ndarray:
    """Indices of the set bits of ``mask``, ascending."""
    nbytes = (order + 7) // 8
    raw = np.frombuffer(mask.to_bytes(nbytes, "little"), dtype=np.uint8)
    bits = np.unpackbits(raw, bitorder="little", count=order)
    return np.flatnonzero(bits)


class FiniteGroup:
    """Immutable finite group backed by a Cayley table.

    Instances are safe to share across threads once built; all caches are
    filled with values that every computation agrees on, so racing readers
    observe identical results.
    """

    __slots__ = ("name", "order", "table", "identity", "inverse", "_orders", "_abelian", "_cyclic_masks")

    def __init__(self, table: np.ndarray, name: str):
        table = np.ascontiguousarray(table, dtype=np.int64)
        table.setflags(write=False)
        self.table = table
        self.order = int(table.shape[0])
        self.identity = 0
        inv = np.argmax(table == 0, axis=1)
        inv.setflags(write=False)
        self.inverse = inv
        self.name = name
        self._orders = None
        self._abelian = None
        self._cyclic_masks = None

    def __repr__(self) -> str:
        return f"FiniteGroup({self.name!r}, order={self.order})"

    def __len__(self) -> int:
        return self.order

    def mul(self, a: int, b: int) -> int:
        return int(self.table[a, b])

    def inv(self, a: int) -> int:
        return int(self.inverse[a])

    def element_orders(self) -> np.ndarray:
        """Order of every element, computed once and cached."""
        if self._orders is None:
            table = self.table
            orders = np.zeros(self.order, dtype=np.int64)
            for g in range(self.order):
                k, acc = 1, g
                while acc != 0:
                    acc = int(table[acc, g])
                    k += 1
                orders[g] = k
            orders.setflags(write=False)
            self._orders = orders
        return self._orders

    def is_abelian(self) -> bool:
        if self._abelian is None:
            self._abelian = bool(np.array_equal(self.table, self.table.T))
        return self._abelian

    def cyclic_subgroup_masks(self) -> tuple[int, ...]:
        """Bitsets of every cyclic subgroup, deduplicated, cached."""
        if self._cyclic_masks is None:
            table = self.table
            seen = set()
            for g in range(self.order):
                mask, acc = 1, g
                while acc != 0:
                    mask |= 1 << acc
                    acc = int(table[acc, g])
                seen.add(mask)
            self._cyclic_masks = tuple(sorted(seen, key=lambda m: (m.bit_count(), m)))
        return self._cyclic_masks


class Subgroup:
    """An element bitset closed under the group operation."""

    __slots__ = ("group", "mask", "order", "_elems", "_gens")

    def __init__(self, group: FiniteGroup, mask: int):
        self.group = group
        self.mask = mask
        self.order = mask.bit_count()
        self._elems = None
        self._gens = None

    @property
    def elements(self) -> np.ndarray:
        if self._elems is None:
            self._elems = elements_of(self.mask, self.group.order)
        return self._elems

    def __contains__(self, g: int) -> bool:
        return bool((self.mask >> g) & 1)

    def contains_subgroup(self, other: "Subgroup") -> bool:
        return (other.mask & ~self.mask) == 0

    def is_trivial(self) -> bool:
        return self.order == 1

    def is_full(self) -> bool:
        return self.order == self.group.order

    def generators(self) -> tuple[int, ...]:
        """A small generating set, chosen greedily over ascending indices."""
        if self._gens is None:
            gens: list[int] = []
            have = 1  # identity
            for e in self.elements:
                e = int(e)
                if (have >> e) & 1:
                    continue
                gens.append(e)
                have = close_mask(self.group, have | (1 << e))
                if have == self.mask:
                    break
            self._gens = tuple(gens)
        return self._gens

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Subgroup)
            and self.group is other.group
            and self.mask == other.mask
        )

    def __hash__(self) -> int:
        return hash((id(self.group), self.mask))

    def __repr__(self) -> str:
        return f"Subgroup(order={self.order}, of={self.group.name})"


def close_mask(G: FiniteGroup, mask: int) -> int:
    """Close a nonempty element bitset under the group product.

    A finite set closed under multiplication is a subgroup, so no separate
    inverse step is needed.
    """
    table = G.table
    elems = elements_of(mask, G.order)
    while True:
        prods = table[np.ix_(elems, elems)]
        new_mask = mask
        for e in np.unique(prods):
            new_mask |= 1 << int(e)
        if new_mask == mask:
            return mask
        mask = new_mask
        elems = elements_of(mask, G.order)


# --------------------------------------------------------------------------
# element-level operations


def element_order(G: FiniteGroup, g: int) -> int:
    """Smallest k >= 1 with g^k = identity; divides the group order."""
    return int(G.element_orders()[g])


def cyclic_subgroup(G: FiniteGroup, g: int) -> Subgroup:
    """The subgroup of all powers of ``g``."""
    table = G.table
    mask, acc = 1, g
    while acc != 0:
        mask |= 1 << acc
        acc = int(table[acc, g])
    return Subgroup(G, mask)


def generated_subgroup(G: FiniteGroup, gens: Iterable[int]) -> Subgroup:
    """Smallest subgroup containing ``gens``; empty input gives the trivial one."""
    mask = 1  # identity
    for g in gens:
        mask |= 1 << g
    return Subgroup(G, close_mask(G, mask))


def is_abelian(G: FiniteGroup) -> bool:
    return G.is_abelian()


def commutes(G: FiniteGroup, g: int, h: int) -> bool:
    return G.table[g, h] == G.table[h, g]


def prime_order_elements(G: FiniteGroup) -> list[int]:
    """All elements whose order is prime, ascending by index."""
    orders = G.element_orders()
    return [int(g) for g in np.flatnonzero([_is_prime(int(k)) for k in orders])]


def is_cyclic_group(G: FiniteGroup) -> bool:
    return bool((G.element_orders() == G.order).any())


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def multiplicative_order(r: int, q: int) -> int:
    """Order of ``r`` in the unit group mod ``q``; requires gcd(r, q) = 1."""
    if math.gcd(r, q) != 1:
        raise ValueError(f"{r} is not a unit mod {q}")
    k, acc = 1, r % q
    while acc != 1:
        acc = (acc * r) % q
        k += 1
    return k


# --------------------------------------------------------------------------
# table builders


def _table_cyclic(n: int) -> np.ndarray:
    idx = np.arange(n)
    return np.add.outer(idx, idx) % n


def _table_direct(ta: np.ndarray, tb: np.ndarray) -> np.ndarray:
    na, nb = ta.shape[0], tb.shape[0]
    t = ta[:, None, :, None] * nb + tb[None, :, None, :]
    return t.reshape(na * nb, na * nb)


def _table_dihedral(n: int) -> np.ndarray:
    order = 2 * n
    t = np.zeros((order, order), dtype=np.int64)
    for i in range(n):
        for j in range(n):
            t[i, j] = (i + j) % n
            t[i, n + j] = n + (i + j) % n
            t[n + i, j] = n + (i - j) % n
            t[n + i, n + j] = (i - j) % n
    return t


def _table_dicyclic(m: int) -> np.ndarray:
    # <a, b | a^(2m) = e, b^2 = a^m, b a b^-1 = a^-1>; indices: a^i, then a^i b.
    n = 2 * m
    order = 4 * m
    t = np.zeros((order, order), dtype=np.int64)
    for i in range(n):
        for j in range(n):
            t[i, j] = (i + j) % n
            t[i, n + j] = n + (i + j) % n
            t[n + i, j] = n + (i - j) % n
            t[n + i, n + j] = (i - j + m) % n
    return t


def _perm_table(perms: list[tuple[int, ...]]) -> np.ndarray:
    index = {p: i for i, p in enumerate(perms)}
    order = len(perms)
    t = np.zeros((order, order), dtype=np.int64)
    for i, s in enumerate(perms):
        for j, u in enumerate(perms):
            t[i, j] = index[tuple(s[u[k]] for k in range(len(s)))]
    return t


def _table_semidirect(q: int, p: int, a: int, r: int) -> np.ndarray:
    pa = p**a
    order = q * pa
    rj = [pow(r, j, q) for j in range(pa)]
    t = np.zeros((order, order), dtype=np.int64)
    for i1 in range(q):
        for j1 in range(pa):
            row = i1 * pa + j1
            twist = rj[j1]
            for i2 in range(q):
                base = (i1 + twist * i2) % q * pa
                for j2 in range(pa):
                    t[row, i2 * pa + j2] = base + (j1 + j2) % pa
    return t


def _close_perms(degree: int, gens: list[tuple[int, ...]], cap: int) -> list[tuple[int, ...]]:
    identity = tuple(range(degree))
    known = {identity}
    frontier = [identity]
    while frontier:
        nxt = []
        for w in frontier:
            for g in gens:
                prod = tuple(w[g[k]] for k in range(degree))
                if prod not in known:
                    known.add(prod)
                    if len(known) > cap:
                        raise OrderCapExceeded(
                            f"permutation closure exceeded the order cap {cap}"
                        )
                    nxt.append(prod)
        frontier = nxt
    return sorted(known)


# --------------------------------------------------------------------------
# validation


def validate_table(table: np.ndarray, check_associativity: bool) -> None:
    """Raise :class:`ValidationFailed` unless ``table`` is a group table."""
    n = table.shape[0]
    if table.ndim != 2 or table.shape[1] != n:
        raise ValidationFailed("table must be square")
    if table.min() < 0 or table.max() >= n:
        raise ValidationFailed("table entries must be element indices")
    idx = np.arange(n)
    if not (np.array_equal(np.sort(table, axis=1), np.broadcast_to(idx, (n, n)))
            and np.array_equal(np.sort(table, axis=0), np.broadcast_to(idx[:, None], (n, n)))):
        raise ValidationFailed("rows and columns must each be a permutation")
    if not (np.array_equal(table[0], idx) and np.array_equal(table[:, 0], idx)):
        raise ValidationFailed("element 0 must be a two-sided identity")
    inv = np.argmax(table == 0, axis=1)
    if not (table[idx, inv] == 0).all() or not (table[inv, idx] == 0).all():
        raise ValidationFailed("some element has no two-sided inverse")
    if check_associativity:
        for z in range(n):
            col = table[:, z]
            lhs = col[table]            # (x*y)*z
            rhs = table[:, col]         # x*(y*z)
            if not np.array_equal(lhs, rhs):
                raise ValidationFailed(f"associativity fails for some triple with z={z}")


def _check_semidirect_params(spec: SemidirectZqZpa) -> None:
    q, p, a, r = spec.q, spec.p, spec.a, spec.action
    if not _is_prime(q) or q == 2:
        raise InvalidSpec(f"q={q} must be an odd prime")
    if not _is_prime(p):
        raise InvalidSpec(f"p={p} must be prime")
    if a < 1:
        raise InvalidSpec(f"a={a} must be positive")
    if q % p != 1:
        raise InvalidSpec(f"q={q} must be 1 mod p={p}")
    if not (1 < r < q):
        raise InvalidSpec(f"action={r} must satisfy 1 < action < q")
    ord_r = multiplicative_order(r, q)
    s = 0
    while ord_r % p == 0:
        ord_r //= p
        s += 1
    if ord_r != 1 or s < 1 or p**s > p**a:
        raise InvalidSpec(
            f"action={r} must have multiplicative order p^s mod q with 1 <= s <= a"
        )


def _spec_order(spec: GroupSpec) -> int:
    if isinstance(spec, Cyclic):
        if spec.n < 1:
            raise InvalidSpec("Cyclic requires n >= 1")
        return spec.n
    if isinstance(spec, DirectProduct):
        out = 1
        for f in spec.factors:
            out *= _spec_order(f)
        return out
    if isinstance(spec, Dihedral):
        if spec.n < 3:
            raise InvalidSpec("Dihedral requires n >= 3")
        return 2 * spec.n
    if isinstance(spec, Dicyclic):
        if spec.m < 2:
            raise InvalidSpec("Dicyclic requires m >= 2")
        return 4 * spec.m
    if isinstance(spec, Symmetric):
        if not 1 <= spec.n <= 6:
            raise InvalidSpec("Symmetric supports n in 1..6")
        return math.factorial(spec.n)
    if isinstance(spec, Alternating):
        if not 3 <= spec.n <= 6:
            raise InvalidSpec("Alternating supports n in 3..6")
        return math.factorial(spec.n) // 2
    if isinstance(spec, SemidirectZqZpa):
        _check_semidirect_params(spec)
        return spec.q * spec.p**spec.a
    if isinstance(spec, PermGroup):
        return -1  # only known after closure
    if isinstance(spec, CayleyTable):
        return len(spec.table)
    raise InvalidSpec(f"unknown spec object: {spec!r}")


def build(spec: GroupSpec, *, order_cap: int = DEFAULT_ORDER_CAP, name: str | None = None) -> FiniteGroup:
    """Construct and validate the group described by ``spec``.

    Raises :class:`InvalidSpec` for malformed parameters,
    :class:`OrderCapExceeded` when the result would exceed ``order_cap`` and
    :class:`ValidationFailed` when a table fails the group axioms.
    """
    order = _spec_order(spec)
    if order >= 0 and order > order_cap:
        raise OrderCapExceeded(f"order {order} exceeds cap {order_cap}")

    explicit_table = isinstance(spec, CayleyTable)
    if isinstance(spec, Cyclic):
        table = _table_cyclic(spec.n)
    elif isinstance(spec, DirectProduct):
        table = _table_cyclic(1)
        for f in spec.factors:
            table = _table_direct(table, build(f, order_cap=order_cap).table)
    elif isinstance(spec, Dihedral):
        table = _table_dihedral(spec.n)
    elif isinstance(spec, Dicyclic):
        table = _table_dicyclic(spec.m)
    elif isinstance(spec, Symmetric):
        table = _perm_table(sorted(permutations(range(spec.n))))
    elif isinstance(spec, Alternating):
        table = _perm_table(sorted(p for p in permutations(range(spec.n)) if _is_even(p)))
    elif isinstance(spec, SemidirectZqZpa):
        table = _table_semidirect(spec.q, spec.p, spec.a, spec.action)
    elif isinstance(spec, PermGroup):
        for g in spec.generators:
            if sorted(g) != list(range(spec.degree)):
                raise InvalidSpec(f"{g!r} is not a permutation of range({spec.degree})")
        perms = _close_perms(spec.degree, list(spec.generators), order_cap)
        table = _perm_table(perms)
    elif isinstance(spec, CayleyTable):
        table = np.array(spec.table, dtype=np.int64)
        if table.ndim != 2:
            raise InvalidSpec("Cayley table must be a square matrix")
    else:
        raise InvalidSpec(f"unknown spec object: {spec!r}")

    if table.shape[0] > order_cap:
        raise OrderCapExceeded(f"order {table.shape[0]} exceeds cap {order_cap}")
    validate_table(table, check_associativity=explicit_table or table.shape[0] <= FULL_ASSOCIATIVITY_LIMIT)
    return FiniteGroup(table, name or spec_display_name(spec))


def _is_even(perm: tuple[int, ...]) -> bool:
    inversions = sum(
        1
        for i in range(len(perm))
        for j in range(i + 1, len(perm))
        if perm[i] > perm[j]
    )
    return inversions % 2 == 0
