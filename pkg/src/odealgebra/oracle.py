"""Brute-force reference functions and an exhaustive differential harness.

Nothing here imports the algebra engine or the translators: the reference
functions are plain bit loops, so agreement with them is independent
evidence.
"""

from __future__ import annotations

import json
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable

Evaluatable = Callable[[int], int]


def popcount(x: int) -> int:
    if x < 0:
        raise ValueError("popcount of a negative number")
    count = 0
    while x:
        count += x & 1
        x >>= 1
    return count


def popcount_mod(x: int, n: int) -> int:
    if n < 2:
        raise ValueError("modulus must be at least 2")
    return popcount(x) % n


def bit_length(x: int) -> int:
    length = 0
    while x:
        length += 1
        x >>= 1
    return length


def brute_exists(pred: Callable[[int], int], bound: int) -> int:
    """1 iff pred(z) holds for some z <= bound."""
    for z in range(bound + 1):
        if pred(z):
            return 1
    return 0


def brute_forall(pred: Callable[[int], int], bound: int) -> int:
    for z in range(bound + 1):
        if not pred(z):
            return 0
    return 1


def brute_mu(pred: Callable[[int], int], bound: int) -> int:
    """Least z <= bound with pred(z), or bound + 1 when there is none."""
    for z in range(bound + 1):
        if pred(z):
            return z
    return bound + 1


REFERENCES: dict[str, Callable[..., Evaluatable]] = {
    "popcount": lambda: popcount,
    "popcount-mod": lambda n: (lambda x: popcount_mod(x, n)),
    "identity": lambda: (lambda x: x),
    "bit-length": lambda: bit_length,
}


def reference(spec: str) -> Evaluatable:
    """Look up a reference function by text, e.g. ``popcount-mod:3``."""
    name, _, arg = spec.partition(":")
    if name not in REFERENCES:
        raise KeyError(f"unknown reference {name!r}; known: {', '.join(sorted(REFERENCES))}")
    maker = REFERENCES[name]
    return maker(int(arg)) if arg else maker()


@dataclass(frozen=True)
class Domain:
    """Half-open range [start, stop), optionally replaced by a seeded uniform sample."""

    start: int = 0
    stop: int = 1 << 10
    samples: int | None = None
    seed: int | None = None

    def points(self) -> list[int]:
        if self.samples is None or self.samples >= self.stop - self.start:
            return list(range(self.start, self.stop))
        rng = random.Random(self.seed)
        return sorted(rng.sample(range(self.start, self.stop), self.samples))


@dataclass
class DiffReport:
    pairs: int
    counterexample: tuple[int, int, int] | None  # (input, lhs, rhs)
    elapsed: float
    domain: Domain = field(default_factory=Domain)
    labels: tuple[str, str] = ("lhs", "rhs")

    @property
    def ok(self) -> bool:
        return self.counterexample is None

    def text(self) -> str:
        a, b = self.labels
        d = self.domain
        lines = [
            f"compare: {a} vs {b}",
            f"domain: [{d.start}, {d.stop})"
            + (f" sampled {d.samples} seed {d.seed}" if d.samples is not None else ""),
            f"pairs tested: {self.pairs}",
        ]
        if self.ok:
            lines.append("result: no counterexample")
        else:
            x, u, v = self.counterexample
            lines.append(f"result: counterexample at x={x}: {a}={u} {b}={v}")
        lines.append(f"elapsed: {self.elapsed:.3f}s")
        return "\n".join(lines)

    def record(self) -> str:
        data = asdict(self)
        data["ok"] = self.ok
        return json.dumps(data, sort_keys=True)


def _first_mismatch(fa: Evaluatable, fb: Evaluatable, xs: Iterable[int]):
    for x in xs:
        u, v = fa(x), fb(x)
        if u != v:
            return (x, u, v)
    return None


def diff(fa: Evaluatable, fb: Evaluatable, domain: Domain | None = None,
         workers: int = 1, labels: tuple[str, str] = ("lhs", "rhs")) -> DiffReport:
    """Compare two functions on every point of the domain.

    With several workers the domain is cut into contiguous shards and the
    least counterexample over all shards is reported, so the result does
    not depend on the number of workers.
    """
    domain = domain or Domain()
    xs = domain.points()
    t0 = time.perf_counter()
    if workers <= 1 or len(xs) < 2 * workers:
        found = _first_mismatch(fa, fb, xs)
    else:
        size = -(-len(xs) // workers)
        shards = [xs[i:i + size] for i in range(0, len(xs), size)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda s: _first_mismatch(fa, fb, s), shards))
        hits = [r for r in results if r is not None]
        found = min(hits) if hits else None
    return DiffReport(len(xs), found, time.perf_counter() - t0, domain, labels)
