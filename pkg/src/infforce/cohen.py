"""Finite-depth Cohen forcing: Add(w,1) bit strings and Add(w,w) partial maps.

Single conditions are plain ``str`` bit strings ordered by end-extension.
Product conditions are finite maps ``(slice, position) -> bit``.  A
"generic real" here means: meets every family in a finite supplied list,
and every result is relative to that list and to the working depth.
"""

from __future__ import annotations

import json
import math
import random
import re
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import DepthExhausted, InternalConsistencyError, ParseError, PreconditionViolated

JOINT_NOTE = ("joint-family reading: genericity of d over the inputs is checked as "
              "'inputs on their slices, d elsewhere, meets every supplied family'")
MAX_BOX = 20


def extends(q: str, p: str) -> bool:
    """Order on single conditions: ``q <= p`` iff q end-extends p."""
    return q.startswith(p)


def _check_bits(bits: str) -> str:
    if any(ch not in "01" for ch in bits):
        raise ValueError(f"not a bit string: {bits!r}")
    return bits


class ProductCondition:
    """Finite partial map from (slice, position) to a bit; immutable."""

    __slots__ = ("_cells", "_rows", "_hash")

    def __init__(self, cells: Mapping[tuple[int, int], str | int] | None = None):
        self._cells = {(int(n), int(i)): str(b) for (n, i), b in (cells or {}).items()}
        for b in self._cells.values():
            if b not in ("0", "1"):
                raise ValueError(f"bad bit {b!r}")
        self._rows: dict[int, str] | None = None
        self._hash = None

    @classmethod
    def _raw(cls, cells: dict) -> "ProductCondition":
        out = cls.__new__(cls)
        out._cells, out._rows, out._hash = cells, None, None
        return out

    @classmethod
    def from_reals(cls, reals: Iterable[str], offset: int = 0) -> "ProductCondition":
        return cls._raw({(n + offset, i): b for n, bits in enumerate(reals)
                         for i, b in enumerate(bits)})

    @property
    def cells(self) -> dict:
        return dict(self._cells)

    def get(self, n: int, i: int) -> str | None:
        return self._cells.get((n, i))

    def __len__(self) -> int:
        return len(self._cells)

    def __iter__(self):
        return iter(sorted(self._cells.items()))

    def __eq__(self, other):
        return isinstance(other, ProductCondition) and self._cells == other._cells

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._cells.items()))
        return self._hash

    def __repr__(self):
        return f"ProductCondition({self.to_json()})"

    def slices(self) -> set[int]:
        return {n for n, _ in self._cells}

    def row(self, n: int) -> str:
        """Slice ``n`` as text, ``.`` marking undefined positions."""
        if self._rows is None:
            rows: dict[int, list] = {}
            for (m, i), b in self._cells.items():
                r = rows.setdefault(m, [])
                if len(r) <= i:
                    r.extend("." * (i + 1 - len(r)))
                r[i] = b
            self._rows = {m: "".join(r) for m, r in rows.items()}
        return self._rows.get(n, "")

    def extends(self, other: "ProductCondition") -> bool:
        """``self <= other``: self's map contains other's."""
        mine = self._cells
        return all(mine.get(k) == b for k, b in other._cells.items())

    def compatible(self, other: "ProductCondition") -> bool:
        mine = self._cells
        return all(mine.get(k, b) == b for k, b in other._cells.items())

    def union(self, other: "ProductCondition") -> "ProductCondition":
        if not self.compatible(other):
            raise ValueError("incompatible conditions")
        if other.extends(self):
            return other
        if self.extends(other):
            return self
        cells = dict(self._cells)
        cells.update(other._cells)
        return ProductCondition._raw(cells)

    def with_cells(self, new: Mapping[tuple[int, int], str]) -> "ProductCondition":
        if all(k in self._cells for k in new):
            return self
        cells = dict(self._cells)
        cells.update(new)
        return ProductCondition._raw(cells)

    def restrict(self, slices: Iterable[int]) -> "ProductCondition":
        keep = set(slices)
        return ProductCondition._raw({k: b for k, b in self._cells.items() if k[0] in keep})

    def max_position(self) -> int:
        return max((i for _, i in self._cells), default=-1)

    def to_json(self) -> dict:
        return {str(n): self.row(n) for n in sorted(self.slices())}

    @classmethod
    def from_json(cls, data: Mapping[str, str]) -> "ProductCondition":
        cells = {}
        for n, row in data.items():
            for i, b in enumerate(row):
                if b != ".":
                    cells[(int(n), i)] = b
        return cls(cells)


EMPTY = ProductCondition()


# -- dense families ----------------------------------------------------------

@lru_cache(maxsize=None)
def _compatible_re(word: str) -> re.Pattern:
    return re.compile("".join(f"[{c}.]" for c in word))


def _least_start(row: str, word: str, min_pos: int) -> int:
    """Least s >= min_pos where ``word`` fits the partial row (``.`` = free)."""
    padded = row + "." * (len(word) + max(0, min_pos - len(row)))
    return _compatible_re(word).search(padded, min_pos).start()


class _Family:
    slice: int | None

    @property
    def product(self) -> bool:
        return self.slice is not None

    def support(self) -> frozenset[int]:
        return frozenset() if self.slice is None else frozenset({self.slice})

    def _expect(self, p):
        if self.product != isinstance(p, ProductCondition):
            kind = "product" if self.product else "single"
            raise TypeError(f"{self.spec} is a {kind} family; got {type(p).__name__}")


@dataclass(frozen=True)
class Decide(_Family):
    """Conditions that decide one position."""

    pos: int
    slice: int | None = None

    @property
    def spec(self) -> str:
        return f"decide:{self.pos}" if self.slice is None else f"decide:{self.slice},{self.pos}"

    def witness(self, p):
        self._expect(p)
        if self.slice is None:
            return p[:self.pos + 1] if len(p) > self.pos else None
        b = p.get(self.slice, self.pos)
        return None if b is None else ProductCondition._raw({(self.slice, self.pos): b})

    def meet(self, p):
        self._expect(p)
        if self.slice is None:
            return p if len(p) > self.pos else p + "0" * (self.pos + 1 - len(p))
        return p.with_cells({(self.slice, self.pos): "0"})


@dataclass(frozen=True)
class Pattern(_Family):
    """Conditions containing ``word`` starting at some position >= ``min_pos``."""

    word: str
    min_pos: int
    slice: int | None = None

    def __post_init__(self):
        if not self.word:
            raise ValueError("empty pattern word")
        _check_bits(self.word)

    @property
    def spec(self) -> str:
        head = "" if self.slice is None else f"{self.slice},"
        return f"pattern:{head}{self.word}@{self.min_pos}"

    def witness(self, p):
        self._expect(p)
        row = p if self.slice is None else p.row(self.slice)
        s = row.find(self.word, self.min_pos)
        if s < 0:
            return None
        if self.slice is None:
            return p[:s + len(self.word)]
        return ProductCondition._raw({(self.slice, s + j): c for j, c in enumerate(self.word)})

    def meet(self, p):
        self._expect(p)
        if self.witness(p) is not None:
            return p
        w = self.word
        if self.slice is None:
            s = _least_start(p, w, self.min_pos)
            bits = list(p) + ["0"] * (s + len(w) - len(p))
            for j, c in enumerate(w):
                bits[s + j] = c
            return "".join(bits)
        s = _least_start(p.row(self.slice), w, self.min_pos)
        return p.with_cells({(self.slice, s + j): c for j, c in enumerate(w)})


@dataclass(frozen=True)
class ExplicitList(_Family):
    """The open set generated by listed conditions (everything below a member)."""

    members: tuple
    product_kind: bool = False
    source: str | None = None

    @property
    def slice(self):
        return 0 if self.product_kind else None

    @property
    def product(self) -> bool:
        return self.product_kind

    def support(self) -> frozenset[int]:
        if not self.product_kind:
            return frozenset()
        return frozenset().union(*(m.slices() for m in self.members))

    @property
    def spec(self) -> str:
        return f"list:{self.source}" if self.source else "list:<inline>"

    def witness(self, p):
        self._expect(p)
        for m in self.members:
            if (extends(p, m) if not self.product_kind else p.extends(m)):
                return m
        return None

    def meet(self, p):
        self._expect(p)
        if self.witness(p) is not None:
            return p
        for m in self.members:
            if not self.product_kind:
                if extends(m, p):
                    return m
            elif p.compatible(m):
                return p.union(m)
        raise DepthExhausted(f"{self.spec}: no listed member lies below the condition")

    def check_dense(self, depth: int) -> None:
        """Raise unless every condition is compatible with some member.

        Single lists are checked on all strings of length ``depth`` via a
        trie walk; product lists on every assignment of the cells the members
        mention (at most 20 of them).
        """
        if not self.members:
            raise PreconditionViolated(f"{self.spec}: empty list is not dense")
        if not self.product_kind:
            if not self._covers("", depth):
                raise PreconditionViolated(f"{self.spec}: not dense up to depth {depth}")
            return
        box = sorted(set().union(*(m.cells.keys() for m in self.members)))
        if len(box) > MAX_BOX:
            raise PreconditionViolated(f"{self.spec}: density check needs <= {MAX_BOX} cells")
        for bits in range(2 ** len(box)):
            total = ProductCondition._raw(
                {c: "1" if bits >> j & 1 else "0" for j, c in enumerate(box)})
            if self.witness(total) is None:
                raise PreconditionViolated(f"{self.spec}: {total.to_json()} meets no member")

    def _covers(self, prefix: str, depth: int) -> bool:
        if any(extends(prefix, m) for m in self.members):
            return True
        if len(prefix) >= depth:
            return any(extends(m, prefix) for m in self.members)
        return self._covers(prefix + "0", depth) and self._covers(prefix + "1", depth)


DenseFamily = Decide | Pattern | ExplicitList


def extend_to_meet(p, fam: DenseFamily):
    """Least-effort q <= p lying in ``fam`` (zero fill, earliest pattern slot)."""
    return fam.meet(p)


_NAT = r"(\d+)"
_SPEC = [
    (re.compile(rf"decide:{_NAT}$"), lambda m: Decide(int(m[1]))),
    (re.compile(rf"decide:{_NAT},{_NAT}$"), lambda m: Decide(int(m[2]), int(m[1]))),
    (re.compile(rf"pattern:([01]+)@{_NAT}$"), lambda m: Pattern(m[1], int(m[2]))),
    (re.compile(rf"pattern:{_NAT},([01]+)@{_NAT}$"),
     lambda m: Pattern(m[2], int(m[3]), int(m[1]))),
]


def load_list(path: str | Path, depth: int = 16) -> ExplicitList:
    """Read a list family: a JSON array of bit strings (single) or of
    ``{slice: row}`` objects with ``.`` for undefined positions (product)."""
    data = json.loads(Path(path).read_text())
    if not isinstance(data, list) or not data:
        raise ValueError(f"{path}: expected a nonempty JSON array")
    if all(isinstance(m, str) for m in data):
        fam = ExplicitList(tuple(_check_bits(m) for m in data), False, str(path))
    elif all(isinstance(m, dict) for m in data):
        fam = ExplicitList(tuple(ProductCondition.from_json(m) for m in data), True, str(path))
    else:
        raise ValueError(f"{path}: mixed member kinds")
    fam.check_dense(depth)
    return fam


def parse_family(spec: str, depth: int = 16) -> DenseFamily:
    spec = spec.strip()
    if spec.startswith("list:"):
        return load_list(spec[5:], depth)
    for rx, build in _SPEC:
        m = rx.match(spec)
        if m:
            return build(m)
    raise ParseError(f"bad dense-family spec {spec!r}", 0)


def parse_families(text: str, depth: int = 16) -> list[DenseFamily]:
    return [parse_family(s, depth) for s in text.split(";") if s.strip()]


def family_to_json(fam: DenseFamily) -> dict:
    out = {"spec": fam.spec}
    if isinstance(fam, ExplicitList):
        out["members"] = [m.to_json() if fam.product_kind else m for m in fam.members]
    return out


def family_from_json(data: Mapping) -> DenseFamily:
    if "members" in data:
        ms = data["members"]
        product = bool(ms) and isinstance(ms[0], dict)
        members = tuple(ProductCondition.from_json(m) if product else m for m in ms)
        return ExplicitList(members, product, data["spec"][5:] or None)
    return parse_family(data["spec"])


# -- reals -------------------------------------------------------------------

@dataclass
class RealApprox:
    bits: str
    witnesses: list[tuple[str, str]] = field(default_factory=list)

    @property
    def depth(self) -> int:
        return len(self.bits)

    def replay(self, families: Sequence[DenseFamily]) -> bool:
        by_spec = {f.spec: f for f in families}
        return all(extends(self.bits, w) and by_spec[s].witness(w) is not None
                   for s, w in self.witnesses)

    def to_json(self) -> dict:
        return {"bits": self.bits, "witnesses": [{"family": s, "prefix": w}
                                                 for s, w in self.witnesses]}


def _single_only(families):
    for f in families:
        if f.product:
            raise TypeError(f"{f.spec} is a product family")


def build_generic_real(families: Sequence[DenseFamily], depth: int) -> RealApprox:
    """Meet each family in order from the empty condition, then zero-fill."""
    _single_only(families)
    p = ""
    for f in families:
        p = f.meet(p)
        if len(p) > depth:
            raise DepthExhausted(f"{f.spec} needs {len(p)} bits, depth is {depth}")
    bits = p + "0" * (depth - len(p))
    return RealApprox(bits, [(f.spec, f.witness(bits)) for f in families])


def _check_depth(q: ProductCondition, depth: int, what: str) -> None:
    if q.max_position() >= depth:
        raise DepthExhausted(f"{what} needs position {q.max_position()}, depth is {depth}")


def _fill(q: ProductCondition, slices: Iterable[int], depth: int, rng: random.Random) -> dict:
    """Random total rows on ``slices``, keeping q's bits where defined."""
    out = {}
    for n in slices:
        noise = format(rng.getrandbits(depth), f"0{depth}b") if depth else ""
        row = q.row(n)
        out[n] = "".join(row[i] if i < len(row) and row[i] != "." else noise[i]
                         for i in range(depth))
    return out


def _slice_count(families, k: int) -> int:
    return max([k] + [max(f.support()) + 1 for f in families if f.support()])


def _witness_json(fam, w):
    return None if w is None else (w.to_json() if isinstance(w, ProductCondition) else w)


def _meets_slices(fam, k) -> bool:
    return fam.support() and max(fam.support()) < k


def build_mutual_tower(k: int, families: Sequence[DenseFamily], depth: int,
                       seed: int) -> list[RealApprox]:
    """First ``k`` slices of one product generic meeting every family.

    Families are met in order under the zero-fill policy; the remaining
    positions of each slice are filled from ``seed``.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    for f in families:
        if not f.product:
            raise TypeError(f"{f.spec} is not a product family")
    q = EMPTY
    for f in families:
        q = f.meet(q)
        _check_depth(q, depth, f.spec)
    rows = _fill(q, range(_slice_count(families, k)), depth, random.Random(seed))
    whole = ProductCondition.from_reals(rows[n] for n in sorted(rows))
    out = []
    for n in range(k):
        ws = []
        for f in families:
            if f.support() == {n}:
                w = f.witness(whole)
                ws.append((f.spec, rows[n][:w.max_position() + 1]))
        out.append(RealApprox(rows[n], ws))
    return out


# -- amalgamation ------------------------------------------------------------

@dataclass
class Stage:
    n: int
    witness: ProductCondition | None
    p: ProductCondition
    aux: dict[int, str]

    def to_json(self) -> dict:
        return {"stage": self.n, "witness": None if self.witness is None else self.witness.to_json(),
                "p": self.p.to_json(), "aux": {str(k): v for k, v in sorted(self.aux.items())}}


@dataclass
class AmalgamationCertificate:
    inputs: list[str]
    families: list[DenseFamily]
    depth: int
    seed: int
    policy: str
    d: dict[int, str]
    diffs: dict[int, list[int]]
    stages: list[Stage]
    note: str = JOINT_NOTE

    @property
    def k(self) -> int:
        return len(self.inputs)

    def d_condition(self) -> ProductCondition:
        return ProductCondition._raw({(n, i): b for n, row in self.d.items()
                                      for i, b in enumerate(row)})

    def to_json(self) -> dict:
        return {
            "seed": self.seed, "depth": self.depth, "k": self.k, "policy": self.policy,
            "families": [family_to_json(f) for f in self.families],
            "inputs": self.inputs,
            "d": {str(n): row for n, row in sorted(self.d.items())},
            "diffs": {str(n): v for n, v in sorted(self.diffs.items())},
            "chain": [s.to_json() for s in self.stages],
            "note": self.note,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "AmalgamationCertificate":
        stages = [Stage(s["stage"],
                        None if s["witness"] is None else ProductCondition.from_json(s["witness"]),
                        ProductCondition.from_json(s["p"]),
                        {int(k): v for k, v in s["aux"].items()}) for s in data["chain"]]
        return cls(list(data["inputs"]), [family_from_json(f) for f in data["families"]],
                   data["depth"], data["seed"], data["policy"],
                   {int(n): r for n, r in data["d"].items()},
                   {int(n): list(v) for n, v in data["diffs"].items()}, stages,
                   data.get("note", JOINT_NOTE))


def _patched(row: str, p: ProductCondition, n: int) -> str:
    prow = p.row(n)
    if not prow:
        return row
    return "".join(prow[i] if i < len(prow) and prow[i] != "." else b
                   for i, b in enumerate(row))


def amalgamate(inputs: Sequence[RealApprox | str], families: Sequence[DenseFamily],
               depth: int, seed: int, policy: str = "tower") -> AmalgamationCertificate:
    """Combine reals ``c_0..c_{k-1}`` into one product generic ``d``.

    Stage n keeps the committed condition ``p_{n-1}``, assembles a total
    condition X from the finished slices of d, the inputs (patched by
    ``p_{n-1}``) and an auxiliary generic e on the remaining slices, takes
    the minimal witness of family n inside X and commits ``p_n``.  Input
    slice n becomes ``c_n`` patched by ``p_n``; later slices start from e.

    ``policy="tower"`` reads slice n of X from ``c_n`` itself; ``"fresh"``
    draws it from e, as in the textbook argument, and may then fail to
    keep the later families reachable.
    """
    if policy not in ("tower", "fresh"):
        raise ValueError(f"unknown policy {policy!r}")
    cs = [r.bits if isinstance(r, RealApprox) else r for r in inputs]
    for j, c in enumerate(cs):
        _check_bits(c)
        if len(c) < depth:
            raise PreconditionViolated(f"input {j} has {len(c)} bits, depth is {depth}")
    cs = [c[:depth] for c in cs]
    for f in families:
        if not f.product:
            raise TypeError(f"{f.spec} is not a product family")
    k, K = len(cs), len(families)
    joint = ProductCondition.from_reals(cs)
    for m, f in enumerate(families):
        if _meets_slices(f, k) and f.witness(joint) is None:
            raise PreconditionViolated(
                f"inputs are not mutually generic: their product misses family {m} ({f.spec})")
    N = max(K, k)
    S = max(N, _slice_count(families, k))
    rng = random.Random(seed)
    p = EMPTY
    finished: dict[int, str] = {}
    stages: list[Stage] = []
    X = EMPTY
    for n in range(N):
        fixed = {}
        for j in range(S):
            if j < k and (j != n or policy == "tower"):
                fixed[j] = _patched(cs[j], p, j)
            elif j < n:
                fixed[j] = finished[j]
        # fixed rows are already patched by p, so they agree with it
        cond = p.with_cells({(j, i): b for j, row in fixed.items() for i, b in enumerate(row)})
        for m in range(n, K):
            cond = families[m].meet(cond)
            _check_depth(cond, depth, f"stage {n}, family {m} ({families[m].spec})")
        aux = _fill(cond, [j for j in range(S) if j not in fixed], depth, rng)
        X = cond.with_cells({(j, i): b for j, row in aux.items() for i, b in enumerate(row)})
        w = None
        if n < K:
            w = families[n].witness(X)
            if w is None:
                raise InternalConsistencyError(f"stage {n}: family {n} not met after meeting it")
            p = p.union(w)
        if n >= k:
            finished[n] = "".join(X.row(n))
        stages.append(Stage(n, w, p, aux))
    d = {}
    for j in range(S):
        if j < k:
            d[j] = _patched(cs[j], p, j)
        elif j < N:
            d[j] = finished[j]
        else:
            d[j] = X.row(j)
    diffs = {j: [i for i in range(depth) if d[j][i] != cs[j][i]] for j in range(k)}
    return AmalgamationCertificate(cs, list(families), depth, seed, policy, d, diffs, stages)


@dataclass
class Verification:
    ok: bool
    failure: str | None = None

    def to_json(self) -> dict:
        return {"ok": self.ok, "failure": self.failure}


def verify_amalgamation(cert: AmalgamationCertificate,
                        families: Sequence[DenseFamily] | None = None) -> Verification:
    """Replay every claim of a certificate; report the first one that fails."""
    fams = list(cert.families if families is None else families)
    for j, row in cert.d.items():
        if len(row) != cert.depth or any(b not in "01" for b in row):
            return Verification(False, f"slice {j} of d is not a {cert.depth}-bit string")
    prev = EMPTY
    for st in cert.stages:
        n = st.n
        if n < len(fams):
            if st.witness is None or fams[n].witness(st.witness) is None:
                return Verification(False, f"witness of stage {n} is not in family {n}")
            if not st.p.extends(st.witness):
                return Verification(False, f"p_{n} does not contain its witness")
        if not st.p.extends(prev):
            return Verification(False, f"p_{n} does not extend p_{n - 1}")
        prev = st.p
    d = cert.d_condition()
    for st in cert.stages:
        if not d.extends(st.p):
            return Verification(False, f"d does not extend p_{st.n}")
    for j, c in enumerate(cert.inputs):
        actual = [i for i in range(cert.depth) if cert.d.get(j, "")[i:i + 1] != c[i]]
        if actual != sorted(cert.diffs.get(j, [])):
            return Verification(False, f"slice {j} of d differs from c_{j} on {actual}, "
                                       f"recorded diff_{j} is {cert.diffs.get(j, [])}")
    for m, f in enumerate(fams):
        if f.witness(d) is None:
            return Verification(False, f"d misses family {m} ({f.spec})")
    joint = ProductCondition._raw({**d._cells, **ProductCondition.from_reals(cert.inputs)._cells})
    for m, f in enumerate(fams):
        if f.witness(joint) is None:
            return Verification(False, f"inputs together with d miss family {m} ({f.spec})")
    final = cert.stages[-1].p if cert.stages else EMPTY
    for j in range(cert.k):
        fixed = sum(1 for (n, _) in final._cells if n == j)
        if len(cert.diffs.get(j, [])) > fixed:
            return Verification(False, f"diff_{j} is larger than the p-chain's part of slice {j}")
    return Verification(True)


def iterate_amalgamation(length: int, families: Sequence[DenseFamily], depth: int,
                         seed: int) -> list[AmalgamationCertificate]:
    """Amalgamate growing prefixes of one tower: each step extends the last.

    Returns one certificate per prefix length; raises if any fails to verify.
    """
    tower = build_mutual_tower(length, families, depth, seed)
    certs = []
    for t in range(1, length + 1):
        cert = amalgamate(tower[:t], families, depth, seed + t)
        result = verify_amalgamation(cert)
        if not result.ok:
            raise InternalConsistencyError(f"prefix {t}: {result.failure}")
        certs.append(cert)
    return certs


# -- pairing -----------------------------------------------------------------

def pairing(n: int, i: int) -> int:
    return (n + i) * (n + i + 1) // 2 + n


def unpairing(z: int) -> tuple[int, int]:
    w = (math.isqrt(8 * z + 1) - 1) // 2
    n = z - w * (w + 1) // 2
    return n, w - n


def to_single(p: ProductCondition) -> dict[int, str]:
    """Image of a product condition as a finite partial map on positions."""
    return {pairing(n, i): b for (n, i), b in p._cells.items()}


def from_single(flat: Mapping[int, str]) -> ProductCondition:
    return ProductCondition({unpairing(z): b for z, b in flat.items()})


def flat_extends(q: Mapping[int, str], p: Mapping[int, str]) -> bool:
    return all(q.get(z) == b for z, b in p.items())
