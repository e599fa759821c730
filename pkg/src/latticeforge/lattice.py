"""Subgroup lattice enumeration and lattice-level predicates.

The enumeration seeds the lattice with every cyclic subgroup and closes the
collection under joins.  Every subgroup is a join of cyclic subgroups, so
joining against the cyclic seeds alone already reaches the full fixpoint
that closing under all pairwise joins would; this keeps elementary abelian
groups (whose lattices are large) tractable.

Meets and joins are computed on demand: a meet is a bitset intersection
(intersections of subgroups are subgroups), a join is a product-set closure
memoized per index pair.  No full |L| x |L| tables are stored.
"""

from __future__ import annotations

from collections import deque

import numpy as np

from .errors import BudgetExceeded
from .groups import FiniteGroup, Subgroup, close_mask, elements_of

DEFAULT_SUBGROUP_BUDGET = 100_000


class SubgroupLattice:
    """All subgroups of a finite group, in canonical order.

    Canonical order is ascending ``(order, mask)`` where ``mask`` is the
    little-endian element bitset read as an integer; index 0 is the trivial
    subgroup and the last index is the full group.  Instances are immutable
    after construction; the memo dictionaries only ever gain entries whose
    values are determined by the inputs, so concurrent readers are safe.
    """

    def __init__(self, group: FiniteGroup, masks: list[int]):
        self.group = group
        masks = sorted(masks, key=lambda m: (m.bit_count(), m))
        self.subgroups = [Subgroup(group, m) for m in masks]
        self._index = {m: i for i, m in enumerate(masks)}
        self._join_memo: dict[tuple[int, int], int] = {}
        self._leq = None
        self._covers = None
        self._cyclic = None
        self._distributive = None
        self._modular_violation: tuple[int, int, int] | None | bool = False  # False = not computed

    # -- basic structure -------------------------------------------------

    def __len__(self) -> int:
        return len(self.subgroups)

    def __iter__(self):
        return iter(self.subgroups)

    def __getitem__(self, i: int) -> Subgroup:
        return self.subgroups[i]

    @property
    def trivial(self) -> Subgroup:
        return self.subgroups[0]

    @property
    def full(self) -> Subgroup:
        return self.subgroups[-1]

    def index_of(self, sub: Subgroup) -> int:
        try:
            return self._index[sub.mask]
        except KeyError:
            raise KeyError(f"{sub!r} is not a member of this lattice") from None

    def from_mask(self, mask: int) -> Subgroup:
        return self.subgroups[self._index[mask]]

    def leq(self, a: Subgroup, b: Subgroup) -> bool:
        """Containment a <= b."""
        return (a.mask & ~b.mask) == 0

    # -- meet / join ------------------------------------------------------

    def meet(self, a: Subgroup, b: Subgroup) -> Subgroup:
        """Intersection; always again a subgroup, no closure needed."""
        return self.subgroups[self._index[a.mask & b.mask]]

    def join(self, a: Subgroup, b: Subgroup) -> Subgroup:
        return self.subgroups[self.join_index(self.index_of(a), self.index_of(b))]

    def meet_index(self, i: int, j: int) -> int:
        return self._index[self.subgroups[i].mask & self.subgroups[j].mask]

    def join_index(self, i: int, j: int) -> int:
        if i > j:
            i, j = j, i
        key = (i, j)
        memo = self._join_memo
        out = memo.get(key)
        if out is None:
            a, b = self.subgroups[i], self.subgroups[j]
            if a.contains_subgroup(b):
                out = i
            elif b.contains_subgroup(a):
                out = j
            else:
                union = a.mask | b.mask
                out = self._index.get(union)
                if out is None:
                    out = self._index[self._closed_union(a, b)]
            memo[key] = out
        return out

    def _closed_union(self, a: Subgroup, b: Subgroup) -> int:
        G = self.group
        if G.is_abelian():
            # product of subgroups is already the join in an abelian group
            prods = G.table[np.ix_(a.elements, b.elements)]
            mask = a.mask | b.mask
            for e in np.unique(prods):
                mask |= 1 << int(e)
            return mask
        return close_mask(G, a.mask | b.mask)

    # -- relations --------------------------------------------------------

    def leq_matrix(self) -> np.ndarray:
        """Boolean containment matrix, computed lazily (row i <= col j)."""
        if self._leq is None:
            n = len(self.subgroups)
            membership = np.zeros((n, self.group.order), dtype=np.float32)
            for i, s in enumerate(self.subgroups):
                membership[i, s.elements] = 1.0
            # leq[i, j]  <=>  no element of i lies outside j
            outside = membership @ (1.0 - membership).T
            leq = outside < 0.5
            leq.setflags(write=False)
            self._leq = leq
        return self._leq

    def covers(self) -> list[tuple[int, int]]:
        """Hasse edges as (lower, upper) index pairs, sorted."""
        if self._covers is None:
            edges = []
            subs = self.subgroups
            for j, top in enumerate(subs):
                kept: list[int] = []
                below = [i for i in range(j) if subs[i].mask & ~top.mask == 0]
                below.sort(key=lambda i: -subs[i].order)
                for i in below:
                    if not any(subs[i].mask & ~subs[k].mask == 0 for k in kept):
                        kept.append(i)
                edges.extend((i, j) for i in kept)
            self._covers = sorted(edges)
        return self._covers

    def is_maximal_in(self, a: Subgroup, b: Subgroup) -> bool:
        """True iff a < b with no subgroup strictly between."""
        if a.mask == b.mask or not self.leq(a, b):
            return False
        for c in self.subgroups:
            if a.order < c.order < b.order and b.order % c.order == 0:
                if (a.mask & ~c.mask) == 0 and (c.mask & ~b.mask) == 0:
                    return False
        return True

    # -- cyclicity ---------------------------------------------------------

    def _cyclic_flags(self) -> np.ndarray:
        if self._cyclic is None:
            orders = self.group.element_orders()
            flags = np.zeros(len(self.subgroups), dtype=bool)
            for i, s in enumerate(self.subgroups):
                flags[i] = bool((orders[s.elements] == s.order).any())
            self._cyclic = flags
        return self._cyclic

    def is_cyclic_subgroup(self, a: Subgroup) -> bool:
        """True iff some element of ``a`` generates it."""
        return bool(self._cyclic_flags()[self.index_of(a)])

    def cyclic_subgroup_indices(self) -> list[int]:
        return [i for i, f in enumerate(self._cyclic_flags()) if f]

    # -- lattice laws -------------------------------------------------------

    def is_distributive(self) -> bool:
        """Exhaustive check of a ^ (b v c) == (a ^ b) v (a ^ c).

        Scans triples in canonical order and stops at the first violation.
        Triples containing the trivial or full subgroup satisfy the law
        identically and are skipped.
        """
        if self._distributive is None:
            self._distributive = self._distributive_scan()
        return self._distributive

    def _distributive_scan(self) -> bool:
        n = len(self.subgroups)
        if n <= 2:
            return True
        full = n - 1
        meet_i, join_i = self.meet_index, self.join_index
        inner = [i for i in range(1, full)]
        for a in inner:
            for b in inner:
                for c in inner:
                    lhs = meet_i(a, join_i(b, c))
                    rhs = join_i(meet_i(a, b), meet_i(a, c))
                    if lhs != rhs:
                        return False
        return True

    def is_modular(self) -> bool:
        """Exhaustive check of the modular law a <= c => a v (b ^ c) == (a v b) ^ c."""
        return self.modular_violation() is None

    def modular_violation(self) -> tuple[int, int, int] | None:
        """First violating triple (a, c, b) in canonical scan order, or None.

        Vectorized over b for each containment pair (a, c); exhaustive when
        no violation exists.
        """
        if self._modular_violation is False:
            self._modular_violation = self._modular_scan()
        return self._modular_violation

    def _modular_scan(self) -> tuple[int, int, int] | None:
        n = len(self.subgroups)
        if n <= 2:
            return None
        leq = self.leq_matrix()
        full = n - 1
        meet_rows: dict[int, np.ndarray] = {}

        def meet_row(c: int) -> np.ndarray:
            row = meet_rows.get(c)
            if row is None:
                cmask = self.subgroups[c].mask
                idx = self._index
                row = np.fromiter(
                    (idx[s.mask & cmask] for s in self.subgroups), dtype=np.int32, count=n
                )
                meet_rows[c] = row
            return row

        for a in range(1, full):
            ups = np.flatnonzero(leq[a])
            jrow = None
            for c in ups:
                c = int(c)
                if c == a or c == full:
                    continue
                if jrow is None:
                    jrow = np.argmax(leq[a] & leq, axis=1)
                mrow = meet_row(c)
                lhs = jrow[mrow]
                rhs = mrow[jrow]
                bad = np.flatnonzero(lhs != rhs)
                if bad.size:
                    return (a, c, int(bad[0]))
        return None


def enumerate_subgroups(G: FiniteGroup, *, budget: int = DEFAULT_SUBGROUP_BUDGET) -> SubgroupLattice:
    """Enumerate every subgroup of ``G``.

    Starts from the cyclic subgroups and closes under joins until no new
    subgroup appears; complete because every subgroup is the join of the
    cyclic subgroups it contains.  Raises :class:`BudgetExceeded` when the
    subgroup count passes ``budget`` (lattice size, not group order, is the
    real cost driver).
    """
    cyclic = [Subgroup(G, m) for m in G.cyclic_subgroup_masks()]
    known: set[int] = {s.mask for s in cyclic}
    known.add(1)  # trivial subgroup, present even for the trivial group
    if len(known) > budget:
        raise BudgetExceeded(f"subgroup count exceeded the budget of {budget}")
    by_union: dict[int, int] = {}
    queue = deque(sorted(known, key=lambda m: (m.bit_count(), m)))
    abelian = G.is_abelian()
    table = G.table

    while queue:
        hmask = queue.popleft()
        helems = elements_of(hmask, G.order)
        for c in cyclic:
            if c.mask | hmask == hmask:
                continue
            union = c.mask | hmask
            closed = by_union.get(union)
            if closed is None:
                if union in known:
                    closed = union
                elif abelian:
                    prods = table[np.ix_(helems, c.elements)]
                    closed = union
                    for e in np.unique(prods):
                        closed |= 1 << int(e)
                else:
                    closed = close_mask(G, union)
                by_union[union] = closed
            if closed not in known:
                known.add(closed)
                if len(known) > budget:
                    raise BudgetExceeded(
                        f"subgroup count exceeded the budget of {budget}"
                    )
                queue.append(closed)

    return SubgroupLattice(G, list(known))


def hasse_dot(lat: SubgroupLattice) -> str:
    """Render the Hasse diagram as DOT, byte-stable for identical lattices.

    One node per subgroup (id ``s<canonical index>``) labeled with its order
    and a generating set; one edge per cover, drawn from the larger subgroup
    down to the smaller so the full group sits at the top.
    """
    lines = [f'digraph "{lat.group.name}" {{', "  rankdir=TB;", "  node [shape=box];"]
    for i, s in enumerate(lat.subgroups):
        gens = ",".join(str(g) for g in s.generators())
        lines.append(f'  s{i} [label="order={s.order}; gens=[{gens}]"];')
    for low, high in sorted(lat.covers(), key=lambda e: (e[1], e[0])):
        lines.append(f"  s{high} -> s{low};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_lattice_dot(lat: SubgroupLattice, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(hasse_dot(lat))
