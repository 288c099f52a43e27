"""Monte Carlo for Pólya urns and general exchangeable 0/1 sequences.

Replications are cut into fixed-size chunks, each with its own stream
spawned from one ``SeedSequence``.  The chunking depends only on the
replication count, so results are identical for any number of workers.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .wasserstein import step_l1_distance

CHUNK = 1 << 16
GENERATOR = "numpy.PCG64 via SeedSequence.spawn, chunk=65536"
_MAX_EXACT_FLOAT = 2 ** 53


@dataclass(frozen=True)
class UrnConfig:
    A: int
    B: int
    m: int
    n: int
    replications: int
    seed: int

    def __post_init__(self):
        for name in ("A", "B", "m", "n", "replications"):
            v = getattr(self, name)
            if not (isinstance(v, (int, np.integer)) and v >= 1):
                raise ValueError(f"{name} must be an integer >= 1")
        if not (isinstance(self.seed, (int, np.integer)) and 0 <= self.seed < 2 ** 64):
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.A + self.B + self.n * self.m >= _MAX_EXACT_FLOAT:
            raise OverflowError("ball counts would exceed the exactly representable range")


@dataclass
class EmpiricalLaw:
    n: int
    counts: np.ndarray
    replications: int
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.shape != (self.n + 1,):
            raise ValueError("counts must have n + 1 entries")
        if int(self.counts.sum()) != self.replications:
            raise ValueError("counts must sum to the replication count")

    @property
    def proportions(self):
        return self.counts / self.replications

    def to_csv(self, path=None):
        buf = io.StringIO()
        buf.write("# " + json.dumps(self.metadata, sort_keys=True) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "count"])
        for k, c in enumerate(self.counts):
            w.writerow([k, int(c)])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, text):
        lines = text.splitlines()
        meta = json.loads(lines[0][2:]) if lines and lines[0].startswith("# ") else {}
        body = lines[1:] if meta or (lines and lines[0].startswith("#")) else lines
        rows = list(csv.reader(body))[1:]
        counts = np.array([int(r[1]) for r in rows], dtype=np.int64)
        return cls(n=counts.size - 1, counts=counts, replications=int(counts.sum()), metadata=meta)


def _chunks(replications, seed):
    sizes = [CHUNK] * (replications // CHUNK)
    if replications % CHUNK:
        sizes.append(replications % CHUNK)
    seqs = np.random.SeedSequence(seed).spawn(len(sizes))
    return list(zip(sizes, seqs))


def _run(task, chunks, workers):
    if workers <= 1:
        parts = [task(size, ss) for size, ss in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda c: task(*c), chunks))
    return parts


def _urn_chunk(cfg, size, ss, record_sequences=False):
    rng = np.random.Generator(np.random.PCG64(ss))
    white = np.full(size, cfg.A, dtype=np.int64)
    black = np.full(size, cfg.B, dtype=np.int64)
    drawn = np.zeros(size, dtype=np.int64)
    code = np.zeros(size, dtype=np.int64)
    for _ in range(cfg.n):
        hit = rng.random(size) < white / (white + black)
        white += cfg.m * hit
        black += cfg.m * ~hit
        drawn += hit
        if record_sequences:
            code = 2 * code + hit
    return code if record_sequences else np.bincount(drawn, minlength=cfg.n + 1)


def simulate_urn(cfg: UrnConfig, workers=1):
    """Histogram of the number of white draws over ``cfg.replications`` urns."""
    parts = _run(lambda size, ss: _urn_chunk(cfg, size, ss), _chunks(cfg.replications, cfg.seed), workers)
    meta = {"source": "urn", "config": asdict(cfg), "generator": GENERATOR}
    return EmpiricalLaw(n=cfg.n, counts=np.sum(parts, axis=0), replications=cfg.replications, metadata=meta)


def urn_sequence_counts(cfg: UrnConfig, workers=1):
    """Counts of every draw pattern, indexed by the pattern read as a binary
    number with the first draw most significant.  Intended for small ``n``."""
    if cfg.n > 20:
        raise ValueError("sequence counting is limited to n <= 20")
    parts = _run(
        lambda size, ss: np.bincount(_urn_chunk(cfg, size, ss, True), minlength=2 ** cfg.n),
        _chunks(cfg.replications, cfg.seed),
        workers,
    )
    return np.sum(parts, axis=0)


def simulate_exchangeable(mu, n, replications, seed, workers=1):
    """Draw ``theta ~ mu`` then ``Binomial(n, theta)``; histogram of the counts."""
    if not (isinstance(n, (int, np.integer)) and n >= 1):
        raise ValueError("n must be a positive integer")
    if not (isinstance(replications, (int, np.integer)) and replications >= 1):
        raise ValueError("replications must be a positive integer")

    def task(size, ss):
        rng = np.random.Generator(np.random.PCG64(ss))
        theta = np.clip(mu.sample(rng, size), 0.0, 1.0)
        return np.bincount(rng.binomial(n, theta), minlength=n + 1)

    parts = _run(task, _chunks(replications, seed), workers)
    meta = {"source": "exchangeable", "measure": mu.to_dict(), "n": n,
            "replications": replications, "seed": seed, "generator": GENERATOR}
    return EmpiricalLaw(n=n, counts=np.sum(parts, axis=0), replications=replications, metadata=meta)


def total_variation(p, q):
    return 0.5 * float(np.sum(np.abs(np.asarray(p, dtype=float) - np.asarray(q, dtype=float))))


def empirical_dw(emp: EmpiricalLaw, mu):
    """L1 distance between the empirical CDF of the mean and ``F_mu``."""
    return step_l1_distance(emp.n, np.cumsum(emp.counts) / emp.replications, mu)


def bootstrap_se(emp: EmpiricalLaw, mu, resamples=200, seed=0):
    """Standard error of :func:`empirical_dw` by multinomial resampling of the histogram."""
    rng = np.random.default_rng(seed)
    p = emp.proportions
    values = np.empty(resamples)
    for i in range(resamples):
        counts = rng.multinomial(emp.replications, p)
        values[i] = step_l1_distance(emp.n, np.cumsum(counts) / emp.replications, mu)
    return float(np.std(values, ddof=1))
