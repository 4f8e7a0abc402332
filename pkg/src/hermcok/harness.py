"""Monte Carlo experiments comparing sampled cokernels with the closed forms.

Work is split into fixed blocks of sample indices.  Each block draws its
matrices from its own counter-based stream, so a report depends only on the
configuration and seed, never on the number of worker processes.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np
from scipy import stats
from statsmodels.stats.proportion import proportion_confint

from .cokernel import ClampError, batch_elementary_divisors, count_surjections
from .partitions import Partition
from .ring import make_spec
from .sampler import EntryDistribution, sample_batch
from .theory import TheoryContext, class_probability, exact_classes, moment_closed_form

log = logging.getLogger(__name__)

BLOCK = 8192
SCHEMA = 1


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    p: int = 2
    kind: str = "unram"
    unit_param: int | None = None
    n: int = 4
    n_ladder: tuple = ()
    clamp: int = 1
    trunc: int | None = None
    samples: int = 10000
    sampler: str = "haar"
    dist_y: EntryDistribution | None = None
    dist_z: EntryDistribution | None = None
    seed: int = 0
    threads: int = 1
    out: str | None = None
    format: str = "json"

    def __post_init__(self):
        if self.trunc is None:
            self.trunc = self.clamp
        self.n_ladder = tuple(self.n_ladder)

    def validate(self):
        if self.clamp < 1:
            raise ConfigError("clamp must be >= 1")
        if self.clamp > self.trunc:
            raise ConfigError(f"clamp {self.clamp} exceeds truncation {self.trunc}")
        if self.samples < 1:
            raise ConfigError("need at least one sample")
        if self.n < 1 or any(k < 1 for k in self.n_ladder):
            raise ConfigError("matrix size must be >= 1")
        if self.sampler not in ("haar", "eps"):
            raise ConfigError(f"unknown sampler {self.sampler!r}")
        if self.sampler == "eps" and (self.dist_y is None or self.dist_z is None):
            raise ConfigError("the eps sampler needs --dist-y and --dist-z")
        if self.format not in ("json", "csv"):
            raise ConfigError(f"unknown format {self.format!r}")
        for d in (self.dist_y, self.dist_z):
            if d is not None and d.p != self.p:
                raise ConfigError(f"distribution over {d.p} residues does not match p = {self.p}")
        self.spec()
        return self

    def spec(self, M=None):
        return make_spec(self.p, self.kind, self.unit_param, self.trunc if M is None else M)

    def distributions(self):
        if self.sampler == "haar":
            return None, None
        return self.dist_y, self.dist_z

    def to_json(self):
        d = asdict(self)
        d["n_ladder"] = list(self.n_ladder)
        d["dist_y"] = self.dist_y.to_json() if self.dist_y else None
        d["dist_z"] = self.dist_z.to_json() if self.dist_z else None
        return d


@dataclass
class ExperimentReport:
    experiment: str
    config: dict
    rows: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    runtime_s: float = 0.0

    def to_json(self):
        return {
            "schema": SCHEMA,
            "experiment": self.experiment,
            "seed": self.config.get("seed"),
            "config": self.config,
            "rows": self.rows,
            "summary": self.summary,
            "runtime_s": self.runtime_s,
        }

    def dumps(self, fmt="json"):
        if fmt == "json":
            return json.dumps(self.to_json(), indent=2, default=_jsonable)
        return self.to_csv()

    def to_csv(self):
        cols = []
        for row in self.rows:
            for k in row:
                if k not in cols:
                    cols.append(k)
        buf = io.StringIO()
        buf.write(f"# schema={SCHEMA} experiment={self.experiment} seed={self.config.get('seed')} columns={','.join(cols)}\n")
        w = csv.DictWriter(buf, fieldnames=cols, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for row in self.rows:
            w.writerow({k: _csv_cell(v) for k, v in row.items()})
        return buf.getvalue()

    def row(self, gamma):
        return next((r for r in self.rows if r.get("gamma") == str(gamma)), None)


def _jsonable(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, Partition):
        return str(x)
    raise TypeError(f"cannot serialize {type(x)}")


def _csv_cell(v):
    if isinstance(v, dict):
        return json.dumps(v, default=_jsonable)
    return v


# ----------------------------------------------------------------------------
# sampling


def _count_block(args):
    p, kind, unit_param, M, n, a, seed, start, stop, dist_y, dist_z = args
    spec = make_spec(p, kind, unit_param, M)
    Y, Z = sample_batch(spec, n, seed, range(start, stop), dist_y, dist_z)
    div = batch_elementary_divisors(spec, Y, Z, a)
    rows, counts = np.unique(div, axis=0, return_counts=True)
    return {tuple(int(x) for x in r if x): int(c) for r, c in zip(rows, counts)}


def sample_cokernel_types(cfg, n=None, dists=None):
    """Histogram {clamped Partition: count} of cok(X) (x) O/pi^a over cfg.samples draws.

    ``dists`` overrides the configured (dist_y, dist_z); (None, None) is Haar.
    """
    n = cfg.n if n is None else n
    dist_y, dist_z = cfg.distributions() if dists is None else dists
    a = cfg.clamp
    jobs = [
        (cfg.p, cfg.kind, cfg.unit_param, cfg.trunc, n, a, cfg.seed, s, min(cfg.samples, s + BLOCK), dist_y, dist_z)
        for s in range(0, cfg.samples, BLOCK)
    ]
    total = Counter()
    if cfg.threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.threads) as ex:
            for part in ex.map(_count_block, jobs):
                total.update(part)
    else:
        for job in jobs:
            total.update(_count_block(job))
    return Counter({Partition(k, a): v for k, v in total.items()})


# ----------------------------------------------------------------------------
# statistics


def wilson(count, N):
    lo, hi = proportion_confint(count, N, alpha=0.05, method="wilson")
    return float(lo), float(hi)


def total_variation(freqs, probs, N):
    """TV distance between empirical and reference vectors, with a standard error."""
    keys = set(freqs) | set(probs)
    tv = 0.5 * sum(abs(freqs.get(k, 0.0) - probs.get(k, 0.0)) for k in keys)
    se = 0.5 * sum(math.sqrt(f * (1 - f) / N) for f in freqs.values())
    return tv, se


def _theory_buckets(ctx, classes, n):
    """Theory values for the listed classes plus an 'other' bucket holding the rest."""
    probs = {}
    err = 0.0
    for cls in classes:
        val = class_probability(cls, n, ctx)
        if val is not None:
            probs[str(cls)] = val.value
            err += val.error
    probs["other"] = max(0.0, 1.0 - sum(probs.values()))
    return probs, err


def _reference_classes(cfg, n, counts):
    a = cfg.clamp
    if a == 1:
        return [Partition.clamped((1,) * k, 1) for k in range(n + 1)]
    found = {c for c in counts if c.exact()}
    for cls in exact_classes(a, min(n, 3), max_size=3):
        found.add(cls)
    return sorted(found, key=lambda c: (c.size, c.parts))


def _bucketize(counts, known):
    out = Counter()
    for cls, c in counts.items():
        out[str(cls) if str(cls) in known else "other"] += c
    return out


def run_distribution_experiment(cfg, ctx=None):
    cfg.validate()
    t0 = time.perf_counter()
    spec = cfg.spec()
    ctx = ctx or TheoryContext(spec)
    N = cfg.samples
    n = cfg.n
    counts = sample_cokernel_types(cfg)
    classes = _reference_classes(cfg, n, counts)
    listed = sorted(set(classes) | set(counts), key=lambda c: (c.size, c.parts))
    rows = []
    for cls in listed:
        c = counts.get(cls, 0)
        freq = Fraction(c, N)
        lo, hi = wilson(c, N)
        fin = class_probability(cls, n, ctx)
        lim = class_probability(cls, None, ctx)
        row = {"gamma": str(cls), "count": c, "freq": float(freq), "wilson_lo": lo, "wilson_hi": hi}
        if fin is not None:
            p0 = fin.value
            se = math.sqrt(max(p0 * (1 - p0), 0.0) / N)
            row.update(
                finite_n=p0,
                finite_n_exact=fin.exact,
                finite_n_error=fin.error,
                limit=lim.value,
                limit_error=lim.error,
                se=se,
                z=(float(freq) - p0) / se if se > 0 else (0.0 if float(freq) == p0 else math.inf),
            )
            row["within_3se"] = abs(float(freq) - p0) <= 3 * se + fin.error
        else:
            row.update(finite_n=None, limit=None, se=math.sqrt(float(freq) * (1 - float(freq)) / N), z=None)
        rows.append(row)
    assert sum(Fraction(r["count"], N) for r in rows) == 1
    probs_lim, lim_err = _theory_buckets(ctx, classes, None)
    emp = _bucketize(counts, probs_lim)
    freqs = {k: v / N for k, v in emp.items()}
    tv, tv_se = total_variation(freqs, probs_lim, N)
    probs_fin, _ = _theory_buckets(ctx, classes, n)
    summary = {
        "samples": N,
        "tv_limit": tv,
        "tv_se": tv_se,
        "tv_theory_error": lim_err,
        "chi2": _chi2(emp, probs_fin, N),
        "classes_observed": len(counts),
    }
    report = ExperimentReport("distribution", cfg.to_json(), rows, summary, time.perf_counter() - t0)
    _emit(cfg, report)
    return report


def _chi2(emp, probs, N):
    keys = [k for k in probs if probs[k] > 0]
    if len(keys) < 2:
        return None
    obs = np.array([emp.get(k, 0) for k in keys], dtype=float)
    exp = np.array([probs[k] for k in keys], dtype=float)
    exp = exp / exp.sum() * obs.sum()
    if obs.sum() != N:
        return None
    stat, pval = stats.chisquare(obs, exp)
    return {"statistic": float(stat), "p_value": float(pval), "dof": len(keys) - 1}


def moment_statistics(counts, mu, q, N):
    """Mean and standard error of #Sur(cok, G_mu) from a type histogram."""
    a = next(iter(counts)).clamp if counts else None
    if mu.parts and a is not None and mu.parts[0] > a:
        raise ClampError(f"clamp {a} is below the largest part of {mu}")
    s1 = s2 = 0
    for cls, c in counts.items():
        s = count_surjections(cls, mu, q)
        s1 += c * s
        s2 += c * s * s
    mean = Fraction(s1, N)
    var = Fraction(s2, N) - mean * mean
    if N > 1:
        var = var * N / (N - 1)
    return mean, math.sqrt(float(var) / N)


def run_moment_experiment(cfg, targets):
    cfg.validate()
    targets = [t if isinstance(t, Partition) else Partition.parse(str(t)) for t in targets]
    for mu in targets:
        if mu.parts and mu.parts[0] > cfg.clamp:
            raise ClampError(f"clamp {cfg.clamp} is below the largest part of {mu}")
    t0 = time.perf_counter()
    spec = cfg.spec()
    counts = sample_cokernel_types(cfg)
    rows = []
    for mu in targets:
        mean, se = moment_statistics(counts, mu, spec.q, cfg.samples)
        th = moment_closed_form(mu, spec)
        rows.append(
            {
                "mu": str(mu.unclamped()),
                "empirical": float(mean),
                "se": se,
                "closed_form": th,
                "rel_error": abs(float(mean) - th) / th,
                "z": (float(mean) - th) / se if se > 0 else 0.0,
            }
        )
    report = ExperimentReport("moments", cfg.to_json(), rows, {"samples": cfg.samples}, time.perf_counter() - t0)
    _emit(cfg, report)
    return report


def run_universality_sweep(cfg, samplers=None, ctx=None):
    """TV distance to the limit along cfg.n_ladder for each sampler.

    ``samplers`` is a list of (label, dist_y, dist_z); None entries mean Haar.
    By default the Haar sampler is compared with the configured skewed one.
    """
    cfg.validate()
    if len(cfg.n_ladder) < 2 or list(cfg.n_ladder) != sorted(set(cfg.n_ladder)):
        raise ConfigError("the sweep needs an increasing n-ladder with at least two sizes")
    if samplers is None:
        samplers = [("haar", None, None)]
        if cfg.dist_y is not None and cfg.dist_z is not None:
            samplers.append(("eps", cfg.dist_y, cfg.dist_z))
    if len(samplers) < 2:
        raise ConfigError("the sweep needs a Haar sampler and a skewed sampler")
    t0 = time.perf_counter()
    spec = cfg.spec()
    ctx = ctx or TheoryContext(spec)
    rows = []
    summary = {"samples": cfg.samples, "samplers": {}}
    for label, dy, dz in samplers:
        tvs = []
        for n in cfg.n_ladder:
            counts = sample_cokernel_types(cfg, n, (dy, dz))
            classes = _reference_classes(cfg, n, counts)
            probs, err = _theory_buckets(ctx, classes, None)
            emp = _bucketize(counts, probs)
            tv, se = total_variation({k: v / cfg.samples for k, v in emp.items()}, probs, cfg.samples)
            tvs.append((tv, se))
            rows.append({"sampler": label, "n": n, "tv": tv, "tv_se": se, "theory_error": err})
        steps = [tvs[i + 1][0] <= tvs[i][0] + 2 * math.hypot(tvs[i][1], tvs[i + 1][1]) for i in range(len(tvs) - 1)]
        summary["samplers"][label] = {
            "tv": [t for t, _ in tvs],
            "non_increasing": all(steps),
            "last_below_first": tvs[-1][0] < tvs[0][0] + 2 * tvs[-1][1],
        }
    report = ExperimentReport("sweep", cfg.to_json(), rows, summary, time.perf_counter() - t0)
    _emit(cfg, report)
    return report


def _emit(cfg, report):
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(report.dumps(cfg.format))
        log.info("wrote %s", cfg.out)
