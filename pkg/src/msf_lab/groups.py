"""Exact arithmetic for three concrete group families and generating multisets.

Families:

* ``FreeGroup(rank)`` -- elements are freely reduced words, stored as tuples of
  nonzero ints (``+i`` is the i-th generator, ``-i`` its inverse, 1-based).
* ``FreeAbelian(dim)`` -- elements are integer vectors.
* ``FreeProduct(orders)`` -- free product of finite cyclic groups
  ``Z/m_1 * ... * Z/m_r``; elements are alternating normal forms, tuples of
  ``(factor, exponent)`` with ``0 < exponent < m_factor`` and no two adjacent
  syllables in the same factor.

A generating multiset is an ordered list of slots, each carrying a group
element, together with an involution on slot ids pairing every slot with a slot
for its inverse.
"""
from __future__ import annotations

import itertools
import re
import string
from dataclasses import dataclass, field
from typing import Optional, Sequence

LETTERS = string.ascii_lowercase


class GroupError(ValueError):
    pass


@dataclass(frozen=True)
class FreeGroup:
    rank: int
    tag = "free"

    def __post_init__(self):
        if self.rank < 1:
            raise GroupError("free group rank must be >= 1")

    def identity(self) -> "GroupElement":
        return GroupElement(self, ())

    def generator(self, i: int) -> "GroupElement":
        return GroupElement(self, (i + 1,))

    def canonical(self, word) -> tuple:
        out: list = []
        for letter in word:
            if letter == 0 or abs(letter) > self.rank:
                raise GroupError(f"letter {letter} outside rank {self.rank}")
            if out and out[-1] == -letter:
                out.pop()
            else:
                out.append(letter)
        return tuple(out)

    def mul(self, x: tuple, y: tuple) -> tuple:
        k = 0
        n = min(len(x), len(y))
        while k < n and x[len(x) - 1 - k] == -y[k]:
            k += 1
        return x[: len(x) - k] + y[k:]

    def inv(self, x: tuple) -> tuple:
        return tuple(-letter for letter in reversed(x))

    def has_infinite_order(self, x: tuple) -> bool:
        return len(x) > 0

    def format(self, x: tuple) -> str:
        if not x:
            return "e"
        parts = []
        for letter, grp in itertools.groupby(x):
            power = len(list(grp)) * (1 if letter > 0 else -1)
            name = LETTERS[abs(letter) - 1]
            parts.append(name if power == 1 else f"{name}^{power}")
        return "".join(parts)

    def parse(self, text: str) -> "GroupElement":
        text = text.replace(" ", "").replace("*", "")
        if text in ("", "e", "1"):
            return self.identity()
        word: list = []
        for name, power in _parse_syllables(text):
            i = LETTERS.index(name) + 1
            if i > self.rank:
                raise GroupError(f"generator {name!r} outside rank {self.rank}")
            word.extend([i if power > 0 else -i] * abs(power))
        return GroupElement(self, self.canonical(word))


@dataclass(frozen=True)
class FreeAbelian:
    dim: int
    tag = "abelian"

    def __post_init__(self):
        if self.dim < 1:
            raise GroupError("free abelian dimension must be >= 1")

    def identity(self) -> "GroupElement":
        return GroupElement(self, (0,) * self.dim)

    def generator(self, i: int) -> "GroupElement":
        v = [0] * self.dim
        v[i] = 1
        return GroupElement(self, tuple(v))

    def canonical(self, vec) -> tuple:
        vec = tuple(int(c) for c in vec)
        if len(vec) != self.dim:
            raise GroupError(f"expected a {self.dim}-vector, got {vec}")
        return vec

    def mul(self, x: tuple, y: tuple) -> tuple:
        return tuple(a + b for a, b in zip(x, y))

    def inv(self, x: tuple) -> tuple:
        return tuple(-a for a in x)

    def has_infinite_order(self, x: tuple) -> bool:
        return any(x)

    def format(self, x: tuple) -> str:
        return "(" + ",".join(str(c) for c in x) + ")"

    def parse(self, text: str) -> "GroupElement":
        """Accepts ``e``, ``(1,0)``, or sums of basis vectors like ``e1-e2``."""
        text = text.replace(" ", "")
        if text in ("", "e", "0"):
            return self.identity()
        if text.startswith("("):
            return GroupElement(self, self.canonical(int(c) for c in text.strip("()").split(",")))
        vec = [0] * self.dim
        for sign, coeff, idx in re.findall(r"([+-]?)(\d*)e(\d+)", text):
            i = int(idx) - 1
            if not 0 <= i < self.dim:
                raise GroupError(f"basis vector e{idx} outside dimension {self.dim}")
            vec[i] += (-1 if sign == "-" else 1) * (int(coeff) if coeff else 1)
        return GroupElement(self, tuple(vec))


@dataclass(frozen=True)
class FreeProduct:
    orders: tuple
    tag = "free_product"

    def __post_init__(self):
        object.__setattr__(self, "orders", tuple(int(m) for m in self.orders))
        if not self.orders or any(m < 2 for m in self.orders):
            raise GroupError("free product factors need orders >= 2")

    def identity(self) -> "GroupElement":
        return GroupElement(self, ())

    def generator(self, i: int) -> "GroupElement":
        return GroupElement(self, ((i, 1),))

    def canonical(self, syllables) -> tuple:
        out: tuple = ()
        for f, e in syllables:
            out = self.mul(out, ((f, e % self.orders[f]),) if e % self.orders[f] else ())
        return out

    def mul(self, x: tuple, y: tuple) -> tuple:
        out = list(x)
        rest = list(y)
        while out and rest and out[-1][0] == rest[0][0]:
            f = out[-1][0]
            e = (out[-1][1] + rest[0][1]) % self.orders[f]
            out.pop()
            rest.pop(0)
            if e:
                out.append((f, e))
                break
        return tuple(out) + tuple(rest)

    def inv(self, x: tuple) -> tuple:
        return tuple((f, self.orders[f] - e) for f, e in reversed(x))

    def has_infinite_order(self, x: tuple) -> bool:
        # Finite order iff conjugate into a factor; cyclically reduce and look.
        while len(x) >= 2 and x[0][0] == x[-1][0]:
            first = (x[0],)
            x = self.mul(self.mul(self.inv(first), x), first)
        return len(x) >= 2

    def format(self, x: tuple) -> str:
        if not x:
            return "e"
        return "".join(LETTERS[f] if e == 1 else f"{LETTERS[f]}^{e}" for f, e in x)

    def parse(self, text: str) -> "GroupElement":
        text = text.replace(" ", "").replace("*", "")
        if text in ("", "e", "1"):
            return self.identity()
        syl = []
        for name, power in _parse_syllables(text):
            f = LETTERS.index(name)
            if f >= len(self.orders):
                raise GroupError(f"factor {name!r} outside {len(self.orders)} factors")
            syl.append((f, power))
        return GroupElement(self, self.canonical(syl))


Family = FreeGroup | FreeAbelian | FreeProduct


def _parse_syllables(text: str):
    pos = 0
    pattern = re.compile(r"([a-z])(?:\^(-?\d+))?")
    while pos < len(text):
        m = pattern.match(text, pos)
        if not m:
            raise GroupError(f"cannot parse word {text!r} at position {pos}")
        yield m.group(1), int(m.group(2)) if m.group(2) else 1
        pos = m.end()


@dataclass(frozen=True)
class GroupElement:
    family: Family
    form: tuple

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return group_multiply(self, other)

    def inverse(self) -> "GroupElement":
        return GroupElement(self.family, self.family.inv(self.form))

    def is_identity(self) -> bool:
        return self.form == self.family.identity().form

    def has_infinite_order(self) -> bool:
        return self.family.has_infinite_order(self.form)

    def sort_key(self):
        return (len(self.form), self.form)

    def __str__(self):
        return self.family.format(self.form)


def group_multiply(g: GroupElement, h: GroupElement) -> GroupElement:
    if g.family != h.family:
        raise GroupError(f"family mismatch: {g.family} vs {h.family}")
    return GroupElement(g.family, g.family.mul(g.form, h.form))


@dataclass(frozen=True)
class GeneratingMultiset:
    """Slots ``0..d-1`` with names, elements and an involution.

    ``words`` records, for a word-power multiset, the base-slot sequence each
    slot was formed from; ``base`` and ``power`` point back to the base set.
    """

    family: Family
    names: tuple
    elements: tuple
    involution: tuple
    words: tuple = ()
    base: Optional["GeneratingMultiset"] = field(default=None, compare=False, repr=False)
    power: int = 1

    @property
    def d(self) -> int:
        return len(self.elements)

    def slot(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise GroupError(f"no slot named {name!r}; have {list(self.names)}") from None

    def root_multiset(self) -> "GeneratingMultiset":
        return self if self.base is None else self.base.root_multiset()


@dataclass(frozen=True)
class Violation:
    slot: int
    axiom: str
    message: str


def validate_multiset(S: GeneratingMultiset) -> Optional[Violation]:
    """Return ``None`` when ``S`` is a valid symmetric multiset, else the first violation."""
    if S.d < 1:
        return Violation(-1, "nonempty", "multiset has no slots")
    if len(S.involution) != S.d:
        return Violation(-1, "involution", "involution length differs from slot count")
    for s in range(S.d):
        t = S.involution[s]
        if not 0 <= t < S.d:
            return Violation(s, "involution", f"slot {s} maps outside range")
        if S.involution[t] != s:
            return Violation(s, "involution", f"iota(iota({s})) = {S.involution[t]} != {s}")
        if S.elements[t] != S.elements[s].inverse():
            return Violation(
                s, "inverse",
                f"element(iota({S.names[s]})) = {S.elements[t]} != {S.elements[s].inverse()}",
            )
    return None


def check_multiset(S: GeneratingMultiset) -> GeneratingMultiset:
    v = validate_multiset(S)
    if v is not None:
        raise GroupError(f"invalid multiset at slot {v.slot} ({v.axiom}): {v.message}")
    return S


def make_multiset(family: Family, names: Sequence[str], involution: Optional[Sequence[int]] = None):
    """Build a multiset from element names; pair inverses greedily if no involution is given."""
    elements = tuple(family.parse(n) for n in names)
    if involution is None:
        inv = [-1] * len(elements)
        for s, g in enumerate(elements):
            if inv[s] >= 0:
                continue
            target = g.inverse()
            for t in range(s, len(elements)):
                if inv[t] < 0 and elements[t] == target and (t != s or g == target):
                    inv[s], inv[t] = t, s
                    break
            else:
                raise GroupError(f"no unpaired inverse slot for {names[s]!r}")
        involution = inv
    return GeneratingMultiset(family, tuple(names), elements, tuple(involution))


def standard_multiset(family: Family) -> GeneratingMultiset:
    """The usual symmetric generating set of each family.

    Free groups and free abelian groups get ``x, x^-1`` per generator; a free
    product gets every nontrivial power of each factor generator (a single
    self-inverse slot for ``Z/2``).
    """
    if isinstance(family, FreeGroup):
        names = [n for i in range(family.rank) for n in (LETTERS[i], LETTERS[i] + "^-1")]
    elif isinstance(family, FreeAbelian):
        names = [n for i in range(family.dim) for n in (f"e{i + 1}", f"-e{i + 1}")]
    else:
        names = [
            LETTERS[f] if e == 1 else f"{LETTERS[f]}^{e}"
            for f, m in enumerate(family.orders)
            for e in range(1, m)
        ]
    return make_multiset(family, names)


def power_multiset(S: GeneratingMultiset, k: int) -> GeneratingMultiset:
    """All ``d**k`` formal words of length ``k`` in ``S``, one slot per word."""
    if k < 1:
        raise GroupError("power k must be >= 1")
    check_multiset(S)
    fam = S.family
    words = list(itertools.product(range(S.d), repeat=k))
    index = {w: i for i, w in enumerate(words)}
    elements, names, inv = [], [], []
    for w in words:
        form = fam.identity().form
        for s in w:
            form = fam.mul(form, S.elements[s].form)
        elements.append(GroupElement(fam, form))
        names.append("*".join(S.names[s] for s in w))
        inv.append(index[tuple(S.involution[s] for s in reversed(w))])
    return GeneratingMultiset(
        fam, tuple(names), tuple(elements), tuple(inv), tuple(words), base=S, power=S.power * k
    )


def make_family(name: str, rank: int = 0, dim: int = 0, orders: Sequence[int] = ()) -> Family:
    if name == "free":
        return FreeGroup(rank)
    if name == "abelian":
        return FreeAbelian(dim)
    if name == "free_product":
        return FreeProduct(tuple(orders))
    raise GroupError(f"unknown group family {name!r}")
