"""Config-driven experiments and their artifacts.

A config is an INI file::

    [experiment]
    kind = curse_sweep          ; curse_sweep | concentration | nn_radius | vc_demo | bench
    seed = 1

    [domain]
    kind = hamming
    dims = 16, 32, 64, 128

    [data]
    n = 4096                    ; or "auto": 2^ceil(sqrt(d)) capped at n_max
    n_max = 65536

    [tree]
    strategy = vp
    b = 16

    [queries]
    count = 500
    replay_fraction = 0.05

The seed can be overridden by the ``MCL_SEED`` environment variable (and by
``mcl run --seed``, which wins over both).  Every run writes its CSV/JSON
artifacts plus ``<kind>.meta.json`` holding the resolved config, the library
version and SHA-256 digests of the artifacts.  Nothing time-dependent goes
into these files, so identical config, seed and version give identical bytes.
"""
from __future__ import annotations

import configparser
import csv
import hashlib
import io
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from mcl import __version__, concentration, vc
from mcl.domains import KINDS, Domain, sample_points
from mcl.rng import stream
from mcl.tree import STRATEGIES, BuildParams, RangeQuery, build, linear_nn, linear_scan, nn_search, range_search, validate_tree

EXPERIMENTS = ("curse_sweep", "concentration", "nn_radius", "vc_demo", "bench")
N_MAX_LIMIT = 2**20
ALPHA_METHODS = concentration.METHODS
LOG_BASES = {"sample_size_bound": "e", "bins_class_bound": "2"}
# entropy-radius predictions of the median NN radius on the Hamming cube with n = 2^ceil(sqrt d)
NN_RADIUS_PREDICTIONS = {64: 0.30, 144: 0.34, 256: 0.36}
NN_RADIUS_TOLERANCE = 0.03

SWEEP_FIELDS = (
    "d", "n", "strategy", "mean_cost", "mean_bins_opened", "leaf_count", "fraction_opened",
    "linear_cost", "speedup", "seed", "mean_bins_opened_all_rounds", "replayed", "mismatches",
)
ALPHA_FIELDS = ("d", "eps", "method", "value", "stderr")
NNRADIUS_FIELDS = ("d", "n", "p10", "median", "p90", "mean", "occupancy", "seed")


class ConfigError(ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(f"config field {field}: {message}")
        self.field = field


class InvariantViolation(RuntimeError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    seed: int = 0
    domain: str = "hamming"
    dims: tuple[int, ...] = (16,)
    n: int | None = 4096  # None selects the 2^ceil(sqrt d) rule
    n_max: int = 2**16
    strategy: str = "vp"
    strategies: tuple[str, ...] = STRATEGIES
    b: int = 16
    c: int = 16
    h: int = 48
    queries: int = 500
    replay_fraction: float = 0.05
    eps_steps: int = 15
    samples: int = 20000
    methods: tuple[str, ...] = ALPHA_METHODS
    vc_trials: int = 10_000
    vc_sample: int = 200
    out: str | None = None

    def __post_init__(self):
        if self.kind not in EXPERIMENTS:
            raise ConfigError("experiment.kind", f"must be one of {EXPERIMENTS}, got {self.kind!r}")
        if self.domain not in KINDS:
            raise ConfigError("domain.kind", f"must be one of {KINDS}, got {self.domain!r}")
        if not self.dims or any(d < 1 for d in self.dims):
            raise ConfigError("domain.dims", "need at least one positive dimension")
        if self.domain == "sphere" and min(self.dims) < 2:
            raise ConfigError("domain.dims", "sphere needs d >= 2")
        if self.n is not None and self.n < 1:
            raise ConfigError("data.n", "must be >= 1 or 'auto'")
        if not 1 <= self.n_max <= N_MAX_LIMIT:
            raise ConfigError("data.n_max", f"must lie in [1, {N_MAX_LIMIT}]")
        if self.n is not None and self.n > N_MAX_LIMIT:
            raise ConfigError("data.n", f"must be <= {N_MAX_LIMIT}")
        if self.strategy not in STRATEGIES:
            raise ConfigError("tree.strategy", f"must be one of {STRATEGIES}")
        if not self.strategies or any(s not in STRATEGIES for s in self.strategies):
            raise ConfigError("tree.strategies", f"entries must be among {STRATEGIES}")
        for name in ("b", "c", "h"):
            if getattr(self, name) < 1:
                raise ConfigError(f"tree.{name}", "must be >= 1")
        if self.queries < 1:
            raise ConfigError("queries.count", "must be >= 1")
        if not 0 <= self.replay_fraction <= 1:
            raise ConfigError("queries.replay_fraction", "must lie in [0, 1]")
        if self.eps_steps < 1:
            raise ConfigError("concentration.eps_steps", "must be >= 1")
        if self.samples < 1000:
            raise ConfigError("concentration.samples", "must be >= 1000")
        if any(m not in ALPHA_METHODS for m in self.methods):
            raise ConfigError("concentration.methods", f"entries must be among {ALPHA_METHODS}")
        if self.vc_trials < 1 or self.vc_sample < 4:
            raise ConfigError("vc", "trials must be >= 1 and sample >= 4")
        if self.seed < 0:
            raise ConfigError("experiment.seed", "must be >= 0")

    def n_for(self, d: int) -> int:
        if self.n is not None:
            return self.n
        return min(2 ** math.ceil(math.sqrt(d)), self.n_max)

    def echo(self) -> dict:
        out = asdict(self)
        out.pop("out")
        out["n"] = "auto" if self.n is None else self.n
        return out


_SCHEMA = {
    "experiment": {"kind": ("kind", str), "seed": ("seed", int), "out": ("out", str)},
    "domain": {"kind": ("domain", str), "dims": ("dims", "ints")},
    "data": {"n": ("n", "n"), "n_max": ("n_max", int)},
    "tree": {
        "strategy": ("strategy", str), "strategies": ("strategies", "strs"),
        "b": ("b", int), "c": ("c", int), "h": ("h", int),
    },
    "queries": {"count": ("queries", int), "replay_fraction": ("replay_fraction", float)},
    "concentration": {"eps_steps": ("eps_steps", int), "samples": ("samples", int), "methods": ("methods", "strs")},
    "vc": {"trials": ("vc_trials", int), "sample": ("vc_sample", int)},
}


def _convert(field_name: str, kind, raw: str):
    try:
        if kind == "ints":
            return tuple(int(v) for v in raw.split(",") if v.strip())
        if kind == "strs":
            return tuple(v.strip() for v in raw.split(",") if v.strip())
        if kind == "n":
            return None if raw.strip().lower() == "auto" else int(raw)
        return kind(raw.strip())
    except ValueError as exc:
        raise ConfigError(field_name, f"cannot parse {raw!r}") from exc


def parse_config(text: str, seed_override: int | None = None) -> ExperimentConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError("<file>", str(exc).splitlines()[0]) from exc
    values = {}
    for section in cp.sections():
        if section not in _SCHEMA:
            raise ConfigError(section, "unknown section")
        for key, raw in cp[section].items():
            if key not in _SCHEMA[section]:
                raise ConfigError(f"{section}.{key}", "unknown key")
            name, kind = _SCHEMA[section][key]
            values[name] = _convert(f"{section}.{key}", kind, raw)
    if "kind" not in values:
        raise ConfigError("experiment.kind", "missing")
    env = os.environ.get("MCL_SEED")
    if env is not None:
        values["seed"] = _convert("MCL_SEED", int, env)
    if seed_override is not None:
        values["seed"] = seed_override
    return ExperimentConfig(**values)


def load_config(path, seed_override: int | None = None) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc.strerror}") from exc
    return parse_config(text, seed_override)


# -- artifact helpers --------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _csv_bytes(fields, rows) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for r in rows:
        w.writerow([_fmt(r[f]) for f in fields])
    return buf.getvalue().encode()


def _json_bytes(obj) -> bytes:
    return (json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n").encode()


def _jsonable(v):
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, tuple):
        return list(v)
    raise TypeError(f"cannot serialise {type(v).__name__}")


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@dataclass
class RunResult:
    config: ExperimentConfig
    out: Path
    artifacts: dict[str, Path]
    summary: dict


# -- sweeps ------------------------------------------------------------------


def _replay_mask(seed: int, d: int, count: int, fraction: float) -> np.ndarray:
    k = int(round(fraction * count))
    mask = np.zeros(count, dtype=bool)
    if k:
        mask[stream(seed, "replay", d).choice(count, size=k, replace=False)] = True
    return mask


def sweep_row(cfg: ExperimentConfig, d: int, strategy: str, threads: int = 1) -> dict:
    """Build a tree on ``n`` random points and time ``cfg.queries`` exact NN queries in trace units."""
    dom = Domain(cfg.domain, d)
    n = cfg.n_for(d)
    pts = sample_points(dom, cfg.seed, n)
    tree = build(pts, dom, BuildParams(strategy, cfg.b, cfg.c, cfg.h), seed=cfg.seed)
    report = validate_tree(tree)
    if not report.ok:
        raise InvariantViolation(f"tree for d={d} failed validation: {report.violations[:3]}")
    queries = dom.sample(stream(cfg.seed, "queries", dom.kind, d), cfg.queries)
    replay = _replay_mask(cfg.seed, d, cfg.queries, cfg.replay_fraction)

    def one(i: int):
        res = nn_search(tree, queries[i])
        bad = 0
        if replay[i]:
            j, dist = linear_nn(dom, pts, queries[i])
            q = RangeQuery(queries[i], math.nextafter(res.distance, math.inf))
            got, _ = range_search(tree, q)
            bad = int(j != res.index or dist != res.distance or not np.array_equal(got, linear_scan(dom, pts, q)))
        last = res.trace.rounds[-1]
        return res.trace.cost, last.bins_opened, res.trace.bins_opened, bad

    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            stats = list(ex.map(one, range(cfg.queries)))
    else:
        stats = [one(i) for i in range(cfg.queries)]
    arr = np.array(stats, dtype=np.int64)
    mismatches = int(arr[:, 3].sum())
    if mismatches:
        raise InvariantViolation(f"{mismatches} replayed queries disagree with linear scan at d={d}")
    total_cost, total_bins, total_all = (int(v) for v in arr[:, :3].sum(axis=0))
    mean_cost = total_cost / cfg.queries
    mean_bins = total_bins / cfg.queries
    leaves = tree.leaf_count
    fraction = mean_bins / leaves
    if not 0 <= fraction <= 1:
        raise InvariantViolation(f"fraction of leaves opened out of range: {fraction}")
    return {
        "d": d, "n": n, "strategy": strategy, "mean_cost": mean_cost, "mean_bins_opened": mean_bins,
        "leaf_count": leaves, "fraction_opened": fraction, "linear_cost": n, "speedup": n / mean_cost,
        "seed": cfg.seed, "mean_bins_opened_all_rounds": total_all / cfg.queries,
        "replayed": int(replay.sum()), "mismatches": mismatches,
    }


def run_curse_sweep(cfg: ExperimentConfig, out: Path, threads: int = 1) -> tuple[dict, dict]:
    rows = [sweep_row(cfg, d, cfg.strategy, threads) for d in cfg.dims]
    return {"curse.csv": _csv_bytes(SWEEP_FIELDS, rows)}, {"rows": len(rows)}


def run_bench(cfg: ExperimentConfig, out: Path, threads: int = 1) -> tuple[dict, dict]:
    rows, timing = [], []
    for d in cfg.dims:
        for s in cfg.strategies:
            t0 = time.perf_counter()
            rows.append(sweep_row(cfg, d, s, threads))
            timing.append({"d": d, "strategy": s, "seconds": round(time.perf_counter() - t0, 3)})
    # wall-clock numbers vary between runs, so they stay out of the metadata digests
    (out / "bench-timing.json").write_bytes(_json_bytes(timing))
    return {"bench.csv": _csv_bytes(SWEEP_FIELDS, rows)}, {"rows": len(rows)}


# -- concentration and NN radius ----------------------------------------------


def run_concentration(cfg: ExperimentConfig, out: Path, threads: int = 1) -> tuple[dict, dict]:
    rows = []
    for d in cfg.dims:
        dom = Domain(cfg.domain, d)
        if dom.is_bits:
            grid = [k / d for k in range(1, min(cfg.eps_steps, d) + 1)]
        else:
            grid = [round(0.02 * k, 10) for k in range(1, cfg.eps_steps + 1)]
        for method in cfg.methods:
            if method != "empirical_lower" and dom.kind != "hamming":
                continue
            if method == "empirical_lower":
                est = concentration.empirical_alpha_lower(dom, cfg.seed, cfg.samples, grid)
            else:
                est = concentration.concentration_curve(d, grid, method)
            for e, a, s in zip(est.eps, est.alpha, est.stderr):
                rows.append({"d": d, "eps": e, "method": method, "value": a, "stderr": s})
    return {"alpha.csv": _csv_bytes(ALPHA_FIELDS, rows)}, {"rows": len(rows)}


def run_nn_radius(cfg: ExperimentConfig, out: Path, threads: int = 1) -> tuple[dict, dict]:
    rows = []
    for d in cfg.dims:
        st = concentration.nn_radius_stats(Domain(cfg.domain, d), cfg.n_for(d), cfg.queries, cfg.seed)
        rows.append({f: getattr(st, f) for f in NNRADIUS_FIELDS})
    return {"nnradius.csv": _csv_bytes(NNRADIUS_FIELDS, rows)}, {"rows": len(rows)}


# -- VC demo -----------------------------------------------------------------


def _witness_entry(cls, sample, k, trials, seed):
    found = vc.find_shattered_subset(sample, cls, k, trials, seed)
    entry = {"class": cls.name, "k": k, "trials": trials, "seed": seed, "found": found is not None}
    if found is not None:
        idx, rep = found
        entry["points"] = sample[idx].tolist()
        entry["recheck"] = vc.shatters(sample[idx], cls).shattered
    return entry


def vc_report(cfg: ExperimentConfig) -> dict:
    seed, trials = cfg.seed, cfg.vc_trials
    witnesses = []
    for d in (1, 2):
        sample = stream(seed, "vc-sample", d).standard_normal((cfg.vc_sample, d))
        balls = vc.euclidean_balls(d)
        witnesses.append(_witness_entry(balls, sample, d + 1, trials, seed))
        witnesses.append(_witness_entry(balls, sample, d + 2, trials, seed))
        boxes = vc.axis_boxes(d)
        witnesses.append(_witness_entry(boxes, sample, 2 * d, trials, seed))
        witnesses.append(_witness_entry(boxes, sample, 2 * d + 1, trials, seed))

    finite = []
    fixtures = [
        (vc.hamming_balls(3), vc.hamming_cube(3)),
        (vc.hamming_balls(4), vc.hamming_cube(4)),
        (vc.weight_thresholds(6), vc.hamming_cube(6)),
        (vc.first_coordinate_thresholds(4), vc.hamming_cube(4)),
        (vc.grid_intervals(8), np.arange(8)[:, None]),
        (vc.random_table_class(16, 10, seed), np.arange(10)[:, None]),
        (vc.random_table_class(64, 12, seed), np.arange(12)[:, None]),
    ]
    for cls, dom_pts in fixtures:
        dim, witness = vc.vc_dimension_exhaustive(dom_pts, cls)
        entry = {
            "class": cls.name, "size": len(cls), "vc_dimension": dim, "witness": list(witness),
            "log2_bound": vc.finite_class_bound(cls), "within_bound": dim <= vc.finite_class_bound(cls),
        }
        if cls.name.startswith("hamming-balls"):
            entry["upper_formula"] = vc.hamming_ball_vc_upper(dom_pts.shape[1])
        finite.append(entry)

    bounds = {
        "goldberg_jerrum": [{"s": s, "t": t, "bound": vc.goldberg_jerrum_bound(s, t)} for s, t in [(1, 1), (3, 10), (16, 16), (64, 64)]],
        "bins_class": [{"h": h, "p": p, "bound": vc.bins_class_bound(h, p)} for h, p in [(1, 1), (8, 4), (16, 8), (48, 16)]],
        "sample_size": [
            {"eps": e, "delta": dl, "d": dd, "bound": vc.sample_size_bound(e, dl, dd)}
            for e, dl, dd in [(0.1, 0.05, 10), (0.05, 0.05, 10), (0.1, 0.05, 20), (0.2, 0.01, 5)]
        ],
        "log_bases": LOG_BASES,
    }

    # empirical measures of weight thresholds against their exact measure
    dd, eps, delta = 8, 0.1, 0.05
    cls = vc.weight_thresholds(dd)
    measure = vc.weight_threshold_measure(dd)
    rng = stream(seed, "vc-deviation", dd)
    n_bound = vc.sample_size_bound(eps, delta, 1)
    data = rng.integers(0, 2, size=(n_bound, dd))
    first_below = None
    n = 16
    while n <= n_bound:
        if vc.empirical_deviation(cls, data[:n], measure) < eps:
            first_below = n
            break
        n *= 2
    deviation = {
        "class": cls.name, "eps": eps, "delta": delta, "vc_dimension": 1, "n_bound": n_bound,
        "deviation_at_bound": vc.empirical_deviation(cls, data, measure), "first_n_below_eps": first_below,
    }
    return {"witnesses": witnesses, "finite_classes": finite, "bounds": bounds, "deviation": deviation,
            "budget": {"trials": trials, "sample": cfg.vc_sample}, "seed": seed}


def run_vc_demo(cfg: ExperimentConfig, out: Path, threads: int = 1) -> tuple[dict, dict]:
    rep = vc_report(cfg)
    return {"vc-report.json": _json_bytes(rep)}, {"witnesses": len(rep["witnesses"])}


_RUNNERS = {
    "curse_sweep": run_curse_sweep,
    "concentration": run_concentration,
    "nn_radius": run_nn_radius,
    "vc_demo": run_vc_demo,
    "bench": run_bench,
}


def run(cfg: ExperimentConfig, out=None, threads: int = 1) -> RunResult:
    """Run an experiment and write its artifacts; raises ``InvariantViolation`` on a failed mid-run check."""
    if threads < 1:
        raise ValueError("threads must be >= 1")
    out = Path(out or cfg.out or "results")
    out.mkdir(parents=True, exist_ok=True)
    files, summary = _RUNNERS[cfg.kind](cfg, out, threads)
    paths = {}
    for name, data in files.items():
        (out / name).write_bytes(data)
        paths[name] = out / name
    meta = {
        "experiment": cfg.kind, "version": __version__, "seed": cfg.seed, "config": cfg.echo(),
        "artifacts": {name: hashlib.sha256(data).hexdigest() for name, data in files.items()},
        "log_bases": LOG_BASES, "summary": summary,
    }
    (out / f"{cfg.kind}.meta.json").write_bytes(_json_bytes(meta))
    return RunResult(cfg, out, paths, summary)


# -- report ------------------------------------------------------------------


class ArtifactError(RuntimeError):
    pass


@dataclass
class Check:
    experiment: str
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.experiment}: {self.name}" + (f" ({self.detail})" if self.detail else "")


def _strict(values, increasing: bool) -> bool:
    pairs = zip(values, values[1:])
    return all(b > a for a, b in pairs) if increasing else all(b < a for a, b in pairs)


def check_sweep(rows: list[dict], name: str = "curse_sweep", trends: bool = True) -> tuple[list[Check], list[str]]:
    rows = sorted(rows, key=lambda r: int(r["d"]))
    frac = [float(r["fraction_opened"]) for r in rows]
    speed = [float(r["speedup"]) for r in rows]
    ds = [int(r["d"]) for r in rows]
    checks = [
        Check(name, "replayed queries match linear scan", all(int(r["mismatches"]) == 0 for r in rows),
              f"{sum(int(r['replayed']) for r in rows)} replayed"),
    ]
    if trends:
        checks += [
        Check(name, "fraction of leaves opened strictly increasing in d", _strict(frac, True),
              ", ".join(f"d={d}: {f:.4f}" for d, f in zip(ds, frac))),
        Check(name, "fraction opened > 0.5 at largest d", frac[-1] > 0.5, f"{frac[-1]:.4f}"),
        Check(name, "speedup < 2 at largest d", speed[-1] < 2, f"{speed[-1]:.3f}"),
        ]
    notes = [f"d={d}: speedup {s:.3f}" + ("  <-- below 2x" if s < 2 else "") for d, s in zip(ds, speed)]
    return checks, notes


def check_alpha(rows: list[dict]) -> tuple[list[Check], list[str]]:
    checks, notes = [], []
    by = {}
    for r in rows:
        by.setdefault((int(r["d"]), r["method"]), []).append((float(r["eps"]), float(r["value"])))
    for (d, method), pts in sorted(by.items()):
        vals = [v for _, v in sorted(pts)]
        checks.append(Check("concentration", f"{method} d={d} non-increasing in eps",
                            all(b <= a for a, b in zip(vals, vals[1:]))))
    for d in sorted({d for d, _ in by}):
        ex = dict(by.get((d, "exact_halfcube"), []))
        bd = dict(by.get((d, "chernoff_okamoto"), []))
        common = sorted(set(ex) & set(bd))
        if common:
            ok = all(ex[e] <= bd[e] for e in common)
            checks.append(Check("concentration", f"exact half-cube <= Chernoff-Okamoto at d={d}", ok, f"{len(common)} grid points"))
            notes.append(f"d={d}: exact at eps={common[0]:.3f} is {ex[common[0]]:.6g}, bound {bd[common[0]]:.6g}")
    return checks, notes


def check_nnradius(rows: list[dict]) -> tuple[list[Check], list[str]]:
    rows = sorted(rows, key=lambda r: int(r["d"]))
    med = [float(r["median"]) for r in rows]
    spread = [float(r["p90"]) - float(r["p10"]) for r in rows]
    checks = [
        Check("nn_radius", "median NN radius strictly increasing in d", _strict(med, True)),
        Check("nn_radius", "spread p90-p10 strictly decreasing in d", _strict(spread, False)),
        Check("nn_radius", "medians below 0.5", all(m < 0.5 for m in med)),
        Check("nn_radius", "occupancy >= 1", all(float(r["occupancy"]) >= 1 for r in rows)),
    ]
    for r, m in zip(rows, med):
        d = int(r["d"])
        if d in NN_RADIUS_PREDICTIONS:
            p = NN_RADIUS_PREDICTIONS[d]
            checks.append(Check("nn_radius", f"median at d={d} within {NN_RADIUS_TOLERANCE} of {p}",
                                abs(m - p) <= NN_RADIUS_TOLERANCE, f"{m:.4f}"))
    notes = [f"d={int(r['d'])} n={r['n']}: median {m:.4f}, spread {s:.4f}" for r, m, s in zip(rows, med, spread)]
    return checks, notes


def check_vc(rep: dict) -> tuple[list[Check], list[str]]:
    checks = []
    for w in rep["witnesses"]:
        if not w["class"].startswith("balls-"):
            continue
        d = int(w["class"].split("R")[-1])
        expect = w["k"] == d + 1
        label = "found" if expect else "not found"
        checks.append(Check("vc_demo", f"{w['class']} {w['k']}-point shattered set {label}", w["found"] == expect,
                            f"{w['trials']} trials"))
    gj = {(e["s"], e["t"]): e["bound"] for e in rep["bounds"]["goldberg_jerrum"]}
    checks.append(Check("vc_demo", "goldberg_jerrum_bound(3, 10) == 144", gj.get((3, 10)) == 144))
    checks.append(Check("vc_demo", "finite classes within ceil(log2 |class|)", all(f["within_bound"] for f in rep["finite_classes"])))
    dev = rep["deviation"]
    checks.append(Check("vc_demo", "empirical deviation <= eps at the sample-size bound", dev["deviation_at_bound"] <= dev["eps"],
                        f"{dev['deviation_at_bound']:.2e} at n={dev['n_bound']}"))
    notes = [f"{w['class']} k={w['k']}: {'witness ' + str(w['points']) if w['found'] else 'none found'}" for w in rep["witnesses"]]
    return checks, notes


def summarize(directory) -> tuple[list[Check], list[str]]:
    """Checks and human-readable lines for every experiment found in ``directory``."""
    directory = Path(directory)
    if not directory.is_dir():
        raise ArtifactError(f"{directory} is not a directory")
    metas = sorted(directory.glob("*.meta.json"))
    if not metas:
        raise ArtifactError(f"no experiment artifacts in {directory}")
    checks, lines = [], []
    for mp in metas:
        try:
            meta = json.loads(mp.read_text())
            kind = meta["experiment"]
            names = meta["artifacts"]
        except (ValueError, KeyError) as exc:
            raise ArtifactError(f"corrupt metadata {mp.name}: {exc}") from exc
        lines.append(f"== {kind} (seed {meta.get('seed')}, version {meta.get('version')})")
        if meta.get("version") != __version__:
            lines.append(f"warning: artifacts written by version {meta.get('version')}, this is {__version__}")
        for name, digest in names.items():
            path = directory / name
            if not path.exists():
                raise ArtifactError(f"missing artifact {name}")
            if hashlib.sha256(path.read_bytes()).hexdigest() != digest:
                raise ArtifactError(f"artifact {name} does not match its recorded digest")
        try:
            if kind in ("curse_sweep", "bench"):
                rows = read_csv(directory / ("curse.csv" if kind == "curse_sweep" else "bench.csv"))
                groups = {}
                for r in rows:
                    groups.setdefault(r["strategy"], []).append(r)
                new_checks, notes = [], []
                for strategy, grp in groups.items():
                    c, nt = check_sweep(grp, f"{kind}[{strategy}]", trends=kind == "curse_sweep")
                    new_checks += c
                    notes += [f"{strategy} {x}" for x in nt]
            elif kind == "concentration":
                new_checks, notes = check_alpha(read_csv(directory / "alpha.csv"))
            elif kind == "nn_radius":
                new_checks, notes = check_nnradius(read_csv(directory / "nnradius.csv"))
            elif kind == "vc_demo":
                new_checks, notes = check_vc(json.loads((directory / "vc-report.json").read_text()))
            else:
                raise ArtifactError(f"unknown experiment kind {kind!r}")
        except (KeyError, ValueError, IndexError) as exc:
            raise ArtifactError(f"corrupt artifact for {kind}: {exc}") from exc
        checks += new_checks
        lines += [c.line() for c in new_checks] + [f"  {n}" for n in notes]
    return checks, lines
