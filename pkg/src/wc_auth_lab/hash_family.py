"""Hash function families for Wegman-Carter authentication.

A family is an indexed set of functions from a finite message space to a
finite tag space.  Three kinds are supported:

* ``affine``   -- key (a, b) in GF(p)^2, message m in GF(p),
                  tag = a*m + b mod p.
* ``polynomial`` -- key (x, y) in GF(p)^2, message (m_1..m_s) in GF(p)^s,
                  tag = y + sum_i m_i * x**i mod p.
* ``table``    -- an explicit (key, message) -> tag lookup table.

Keys are canonically enumerated as integers 0..|K|-1 (row-major over the
(a, b) / (x, y) pairs: index = a*p + b), messages as 0..|M|-1 (base-p
digits, most significant first), tags as 0..|T|-1.  All certification is
done by exhaustive counting, never by trusting a construction formula.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction

from .errors import EnumerationGuardError, PreconditionError
from .exact_math import PrimeField

CERTIFY_GUARD = 10**8

AFFINE = "affine"
POLYNOMIAL = "polynomial"
TABLE = "table"


@dataclass(frozen=True)
class FamilyCertificate:
    """Measured universality data for a family.

    ``is_universal_uniform`` records whether every (message, tag) pair has
    exactly |K|/|T| matching keys.  ``epsilon`` is the worst measured
    fraction of a preimage slice that also maps a second message to a
    chosen tag; ``witness`` is the lexicographically smallest
    (m1, t1, m2, t2) attaining it.  ``has_duplicate_functions`` flags
    table families in which two distinct keys index the same function
    (epsilon is always counted over keys).
    """

    is_universal_uniform: bool
    epsilon: Fraction
    witness: tuple[int, int, int, int]
    has_duplicate_functions: bool


class HashFamily:
    """Immutable indexed family {f_k : M -> T} with enumerable spaces."""

    def __init__(
        self,
        kind: str,
        *,
        p: int | None = None,
        s: int = 1,
        table: dict[tuple[int, int], int] | None = None,
        num_keys: int | None = None,
        num_messages: int | None = None,
        num_tags: int | None = None,
    ):
        self.kind = kind
        self._certificate: FamilyCertificate | None = None
        self._eval_rows: dict[int, tuple[int, ...]] = {}
        self._slice_cache: dict[tuple[int, int], frozenset[int]] = {}

        if kind in (AFFINE, POLYNOMIAL):
            if p is None:
                raise PreconditionError("missing_modulus", f"{kind} family needs a prime p")
            self.field = PrimeField(p)
            self.p = p
            if kind == AFFINE:
                s = 1
            if s < 1:
                raise PreconditionError("bad_message_arity", "message arity s must be >= 1")
            self.s = s
            self.num_keys = p * p
            self.num_messages = p**s
            self.num_tags = p
            self.table = None
        elif kind == TABLE:
            if table is None:
                raise PreconditionError("missing_table", "table family needs an explicit map")
            if num_keys is None or num_messages is None:
                num_keys = max(k for k, _ in table) + 1
                num_messages = max(m for _, m in table) + 1
            if num_tags is None:
                num_tags = max(table.values()) + 1
            _check_table_complete(table, num_keys, num_messages, num_tags)
            self.p = None
            self.s = 1
            self.num_keys = num_keys
            self.num_messages = num_messages
            self.num_tags = num_tags
            self.table = dict(table)
        else:
            raise PreconditionError("unknown_kind", f"unknown family kind {kind!r}")

    # -- constructors -------------------------------------------------

    @classmethod
    def affine(cls, p: int) -> "HashFamily":
        return cls(AFFINE, p=p)

    @classmethod
    def polynomial(cls, p: int, s: int) -> "HashFamily":
        return cls(POLYNOMIAL, p=p, s=s)

    @classmethod
    def from_table(
        cls,
        table: dict[tuple[int, int], int],
        num_keys: int | None = None,
        num_messages: int | None = None,
        num_tags: int | None = None,
    ) -> "HashFamily":
        return cls(
            TABLE,
            table=table,
            num_keys=num_keys,
            num_messages=num_messages,
            num_tags=num_tags,
        )

    @classmethod
    def from_csv(cls, path: str, num_tags: int | None = None) -> "HashFamily":
        """Load a table family from a CSV file with header ``key,message,tag``."""
        table: dict[tuple[int, int], int] = {}
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != ["key", "message", "tag"]:
                raise PreconditionError(
                    "bad_csv_header", f"expected header key,message,tag, got {header}"
                )
            for row in reader:
                if not row:
                    continue
                k, m, t = (int(x) for x in row)
                if (k, m) in table:
                    raise PreconditionError(
                        "duplicate_table_entry", f"(key={k}, message={m}) appears twice"
                    )
                table[(k, m)] = t
        if not table:
            raise PreconditionError("empty_table", f"no rows in {path}")
        return cls.from_table(table, num_tags=num_tags)

    # -- index <-> structured key/message helpers ---------------------

    def key_pair(self, key: int) -> tuple[int, int]:
        """Decode a key index into its (a, b) / (x, y) pair (algebraic kinds)."""
        self._check_key(key)
        if self.kind == TABLE:
            raise PreconditionError("table_key_unstructured", "table keys have no pair form")
        return divmod(key, self.p)

    def key_index(self, pair: tuple[int, int]) -> int:
        a, b = pair
        if not (0 <= a < self.p and 0 <= b < self.p):
            raise PreconditionError("key_out_of_range", f"pair {pair} not in GF({self.p})^2")
        return a * self.p + b

    def message_tuple(self, message: int) -> tuple[int, ...]:
        """Decode a message index into base-p digits, most significant first."""
        self._check_message(message)
        if self.kind == TABLE:
            return (message,)
        digits = []
        for _ in range(self.s):
            message, d = divmod(message, self.p)
            digits.append(d)
        return tuple(reversed(digits))

    def message_index(self, parts: tuple[int, ...]) -> int:
        if len(parts) != self.s:
            raise PreconditionError("bad_message_arity", f"expected {self.s} coordinates")
        idx = 0
        for d in parts:
            if not 0 <= d < self.p:
                raise PreconditionError("message_out_of_range", f"coordinate {d} not in GF({self.p})")
            idx = idx * self.p + d
        return idx

    # -- evaluation ----------------------------------------------------

    def evaluate(self, key: int, message: int) -> int:
        """Return the tag f_key(message)."""
        self._check_key(key)
        self._check_message(message)
        if self.kind == TABLE:
            return self.table[(key, message)]
        a, b = divmod(key, self.p)
        if self.kind == AFFINE:
            return (a * message + b) % self.p
        acc = b
        xpow = 1
        for m_i in self.message_tuple(message):
            xpow = (xpow * a) % self.p
            acc = (acc + m_i * xpow) % self.p
        return acc

    def _row(self, key: int) -> tuple[int, ...]:
        """All tags of one key, cached: row[m] = f_key(m)."""
        row = self._eval_rows.get(key)
        if row is None:
            row = tuple(self.evaluate(key, m) for m in range(self.num_messages))
            self._eval_rows[key] = row
        return row

    # -- slices ---------------------------------------------------------

    def preimage_slice(self, message: int, tag: int) -> frozenset[int]:
        """Keys consistent with one observed pair: {k : f_k(message) = tag}."""
        self._check_message(message)
        self._check_tag(tag)
        cached = self._slice_cache.get((message, tag))
        if cached is not None:
            return cached
        result = frozenset(
            k for k in range(self.num_keys) if self.evaluate(k, message) == tag
        )
        self._slice_cache[(message, tag)] = result
        return result

    def double_slice(self, m: int, t: int, m2: int, t2: int) -> frozenset[int]:
        """Keys consistent with two observed pairs at distinct messages."""
        if m == m2:
            raise PreconditionError("messages_equal", "double slice needs m != m2")
        self._check_tag(t2)
        return frozenset(
            k for k in self.preimage_slice(m, t) if self.evaluate(k, m2) == t2
        )

    # -- certification ----------------------------------------------------

    def certify(self) -> FamilyCertificate:
        """Measure universality exhaustively; cached after the first call."""
        if self._certificate is not None:
            return self._certificate
        if self.num_keys * self.num_messages > CERTIFY_GUARD:
            raise EnumerationGuardError(
                f"certify would enumerate {self.num_keys * self.num_messages} pairs"
            )

        rows = [self._row(k) for k in range(self.num_keys)]

        uniform = self.num_keys % self.num_tags == 0
        slice_size = self.num_keys // self.num_tags if uniform else None
        if uniform:
            for m in range(self.num_messages):
                counts = [0] * self.num_tags
                for k in range(self.num_keys):
                    counts[rows[k][m]] += 1
                if any(c != slice_size for c in counts):
                    uniform = False
                    break

        epsilon = Fraction(0)
        witness = (0, 0, 0, 0)
        for m1 in range(self.num_messages):
            for m2 in range(self.num_messages):
                if m1 == m2:
                    continue
                joint = {}
                first = [0] * self.num_tags
                for k in range(self.num_keys):
                    t1 = rows[k][m1]
                    t2 = rows[k][m2]
                    first[t1] += 1
                    joint[(t1, t2)] = joint.get((t1, t2), 0) + 1
                for (t1, t2), c in sorted(joint.items()):
                    frac = Fraction(c, first[t1])
                    if frac > epsilon:
                        epsilon = frac
                        witness = (m1, t1, m2, t2)

        duplicates = len(set(rows)) < self.num_keys
        self._certificate = FamilyCertificate(uniform, epsilon, witness, duplicates)
        return self._certificate

    # -- bookkeeping ---------------------------------------------------

    def _check_key(self, key: int) -> None:
        if not 0 <= key < self.num_keys:
            raise PreconditionError("key_out_of_range", f"key {key} not in [0, {self.num_keys})")

    def _check_message(self, message: int) -> None:
        if not 0 <= message < self.num_messages:
            raise PreconditionError(
                "message_out_of_range", f"message {message} not in [0, {self.num_messages})"
            )

    def _check_tag(self, tag: int) -> None:
        if not 0 <= tag < self.num_tags:
            raise PreconditionError("tag_out_of_range", f"tag {tag} not in [0, {self.num_tags})")

    def __repr__(self) -> str:
        if self.kind == TABLE:
            return f"HashFamily(table, |K|={self.num_keys}, |M|={self.num_messages}, |T|={self.num_tags})"
        return f"HashFamily({self.kind}, p={self.p}, s={self.s})"


def _check_table_complete(
    table: dict[tuple[int, int], int], num_keys: int, num_messages: int, num_tags: int
) -> None:
    if len(table) != num_keys * num_messages:
        raise PreconditionError(
            "incomplete_table",
            f"table has {len(table)} entries, expected {num_keys * num_messages}",
        )
    for (k, m), t in table.items():
        if not (0 <= k < num_keys and 0 <= m < num_messages and 0 <= t < num_tags):
            raise PreconditionError(
                "table_entry_out_of_range", f"entry ({k}, {m}) -> {t} out of range"
            )
