"""Simulation harness and real-network statistics pipeline.

A run walks a one-dimensional grid (pure-node count, sparsity, beta or K).
For every grid point and repetition it builds the population matrix,
samples a network, drops zero-degree nodes once, fits the estimator and
scores it against the pruned truth.
"""
from __future__ import annotations

import csv
import json
import math
import os
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .core import (
    BiAdjacency,
    ConfigError,
    DimmsbError,
    EmptyIntersection,
    MembershipMatrix,
    ProbabilityMatrix,
    UnknownId,
    index_labels,
)
from .estimator import DispOptions, disp
from .graphio import common_submatrix, degree_filter, provenance
from .linalg import spectral_norm
from .metrics import di_mixed_hamming, mixed_hamming, network_stats
from .model import (
    DEFAULT_MIXED_PMFS,
    MixedProfileSpec,
    ModelParams,
    build_omega,
    check_identifiability,
    make_planted_memberships,
    prune_zero_degree,
    sample_adjacency,
)

GRID_PARAMS = ("n0", "rho", "beta", "K")
P_KINDS = ("explicit", "scaled", "beta", "tri")
MIXED_MODES = ("profiles", "uniform", "random_pure")


@dataclass(frozen=True)
class ExperimentConfig:
    """One simulation study.

    ``p_kind`` selects how P is built at each grid point:

    * ``explicit``: ``p_matrix`` as given;
    * ``scaled``: ``rho * p_matrix`` (``p_matrix`` has max entry 1);
    * ``beta``: ``rho * (beta I + (1 - beta) 1 1')``;
    * ``tri``: ``rho *`` the matrix with constants ``tri = (diag, upper, lower)``.

    Mixed nodes follow ``mixed``: ``profiles`` splits them evenly over
    ``mixed_pmfs``; ``uniform`` gives each the PMF ``(1/K, ..., 1/K)``;
    ``random_pure`` assigns each to one community uniformly at random.
    """

    id: str
    n_r: int
    n_c: int
    K: int
    grid_param: str
    grid: tuple
    p_kind: str = "explicit"
    p_matrix: Optional[tuple] = None
    tri: tuple = (0.5, 0.2, 0.3)
    n0: int = 0
    rho: float = 1.0
    beta: float = 0.5
    mixed: str = "profiles"
    mixed_pmfs: tuple = DEFAULT_MIXED_PMFS
    repetitions: int = 50
    base_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "grid", tuple(self.grid))
        if self.p_matrix is not None:
            object.__setattr__(self, "p_matrix", tuple(tuple(float(x) for x in r) for r in self.p_matrix))
        object.__setattr__(self, "tri", tuple(float(x) for x in self.tri))
        object.__setattr__(self, "mixed_pmfs", tuple(tuple(float(x) for x in p) for p in self.mixed_pmfs))
        if self.grid_param not in GRID_PARAMS:
            raise ConfigError(f"grid_param must be one of {GRID_PARAMS}, got {self.grid_param!r}")
        if not self.grid:
            raise ConfigError("grid is empty")
        if self.p_kind not in P_KINDS:
            raise ConfigError(f"p_kind must be one of {P_KINDS}, got {self.p_kind!r}")
        if self.p_kind in ("explicit", "scaled") and self.p_matrix is None:
            raise ConfigError(f"p_kind={self.p_kind!r} needs p_matrix")
        if self.mixed not in MIXED_MODES:
            raise ConfigError(f"mixed must be one of {MIXED_MODES}, got {self.mixed!r}")
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")

    def settings_at(self, value) -> dict:
        s = {"n0": self.n0, "rho": self.rho, "beta": self.beta, "K": self.K}
        s[self.grid_param] = value
        s["n0"] = int(s["n0"])
        s["K"] = int(s["K"])
        return s

    def probability_at(self, value) -> ProbabilityMatrix:
        s = self.settings_at(value)
        K, rho = s["K"], float(s["rho"])
        if self.p_kind == "explicit":
            return ProbabilityMatrix.from_entries(self.p_matrix)
        if self.p_kind == "scaled":
            return ProbabilityMatrix.from_scaled(rho, self.p_matrix)
        if self.p_kind == "beta":
            b = float(s["beta"])
            return ProbabilityMatrix.from_scaled(rho, b * np.eye(K) + (1 - b) * np.ones((K, K)))
        d, up, lo = self.tri
        Pt = np.full((K, K), lo)
        Pt[np.triu_indices(K, 1)] = up
        np.fill_diagonal(Pt, d)
        return ProbabilityMatrix.from_entries(rho * Pt)

    def _memberships(self, n: int, K: int, n0: int, rng: np.random.Generator) -> MembershipMatrix:
        n_mixed = n - K * n0
        if self.mixed == "profiles":
            for p in self.mixed_pmfs:
                if len(p) != K:
                    raise ConfigError(f"mixed PMF {p} does not have K={K} entries")
            return make_planted_memberships(n, K, n0, MixedProfileSpec.even(self.mixed_pmfs, n_mixed))
        if self.mixed == "uniform":
            spec = MixedProfileSpec((((1.0 / K,) * K, n_mixed),)) if n_mixed else MixedProfileSpec()
            return make_planted_memberships(n, K, n0, spec)
        w = np.zeros((n, K))
        w[np.arange(K * n0), np.repeat(np.arange(K), n0)] = 1.0
        w[np.arange(K * n0, n), rng.integers(0, K, size=n_mixed)] = 1.0
        return MembershipMatrix(w, index_labels(n))

    def params_at(self, point_index: int) -> ModelParams:
        value = self.grid[point_index]
        s = self.settings_at(value)
        K, n0 = s["K"], s["n0"]
        if K * n0 > min(self.n_r, self.n_c):
            raise ConfigError(f"K*n0 = {K * n0} exceeds the node count at grid value {value}")
        rng = np.random.default_rng(np.random.SeedSequence(self.base_seed, spawn_key=(point_index, 2**31)))
        return ModelParams(
            self.probability_at(value),
            self._memberships(self.n_r, K, n0, rng),
            self._memberships(self.n_c, K, n0, rng),
        )

    def validate(self) -> None:
        """Raise :class:`ConfigError` unless every grid point is identifiable."""
        for i, value in enumerate(self.grid):
            try:
                report = check_identifiability(self.params_at(i))
            except DimmsbError as exc:
                if isinstance(exc, ConfigError):
                    raise
                raise ConfigError(f"grid value {value}: {exc}") from exc
            if not report.ok:
                raise ConfigError(f"grid value {value} is not identifiable: {report.summary()}")

    def to_dict(self) -> dict:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = json.loads(json.dumps(v))
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        if "builtin" in d:
            base = builtin_config(int(d.pop("builtin")))
            return replace(base, **d)
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        try:
            d = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        return cls.from_dict(d)


def builtin_config(id: int) -> ExperimentConfig:
    """Settings of the seven published simulation studies."""
    p1 = ((0.8, 0.1, 0.3), (0.2, 0.9, 0.4), (0.5, 0.2, 0.9))
    p2 = ((1.0, 0.4, 0.4), (0.6, 1.0, 1.0), (0.2, 0.2, 0.4))
    tenths = tuple(round(0.1 * i, 1) for i in range(1, 11))
    small = dict(n_r=60, n_c=80, K=3)
    big = dict(n_r=600, n_c=800, K=3)
    table = {
        1: dict(small, grid_param="n0", grid=(4, 8, 12, 16, 20), p_kind="explicit", p_matrix=p1),
        2: dict(small, grid_param="rho", grid=tenths, p_kind="scaled", p_matrix=p2, n0=8),
        3: dict(small, grid_param="beta", grid=tenths, p_kind="beta", n0=8),
        4: dict(big, grid_param="n0", grid=tuple(range(40, 201, 20)), p_kind="explicit", p_matrix=p1),
        5: dict(big, grid_param="rho", grid=tenths, p_kind="scaled", p_matrix=p2, n0=120),
        6: dict(big, grid_param="beta", grid=tenths, p_kind="beta", n0=120),
        7: dict(
            n_r=1200, n_c=1600, K=3, grid_param="K", grid=tuple(range(2, 9)),
            p_kind="tri", tri=(0.5, 0.2, 0.3), n0=120, mixed="uniform",
        ),
    }
    try:
        settings = table[int(id)]
    except (KeyError, ValueError):
        raise UnknownId(f"no builtin experiment {id!r}; choose 1-7") from None
    return ExperimentConfig(id=f"exp{id}", **settings)


@dataclass(frozen=True)
class RepRecord:
    rep: int
    seed: str
    n_r: int = 0
    n_c: int = 0
    dimhamm: float = math.nan
    row_mhamm: float = math.nan
    col_mhamm: float = math.nan
    seconds: float = math.nan
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass(frozen=True)
class PointResult:
    value: float
    records: tuple

    def _vals(self, name):
        return np.array([getattr(r, name) for r in self.records if r.ok], dtype=float)

    def mean(self, name: str) -> float:
        v = self._vals(name)
        return float(v.mean()) if len(v) else math.nan

    def std(self, name: str) -> float:
        v = self._vals(name)
        return float(v.std(ddof=1)) if len(v) > 1 else 0.0 if len(v) else math.nan

    @property
    def n_success(self) -> int:
        return sum(r.ok for r in self.records)

    @property
    def n_failed(self) -> int:
        return len(self.records) - self.n_success

    def summary(self) -> dict:
        out = {"value": self.value, "reps": self.n_success, "failed": self.n_failed}
        for name in ("dimhamm", "row_mhamm", "col_mhamm"):
            out[f"mean_{name}"] = self.mean(name)
            out[f"std_{name}"] = self.std(name)
        out["mean_seconds"] = self.mean("seconds")
        return out


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    points: tuple

    def summaries(self) -> list[dict]:
        return [p.summary() for p in self.points]

    def column(self, key: str) -> np.ndarray:
        return np.array([s[key] for s in self.summaries()], dtype=float)

    def write_csv(self, path, seed=None) -> None:
        rows = self.summaries()
        _write_csv(path, list(rows[0]), rows, provenance(seed, self.config.to_dict()))

    def write_long_csv(self, path, seed=None) -> None:
        """Per-repetition metrics in long format for plotting."""
        rows = []
        for p in self.points:
            for r in p.records:
                if r.ok:
                    for m in ("dimhamm", "row_mhamm", "col_mhamm", "seconds"):
                        rows.append({"grid": self.config.grid_param, "value": p.value, "rep": r.rep,
                                     "metric": m, "score": getattr(r, m)})
        _write_csv(path, ["grid", "value", "rep", "metric", "score"], rows,
                   provenance(seed, self.config.to_dict()))

    def to_dict(self) -> dict:
        return {
            "provenance": provenance(config=self.config.to_dict())[0],
            "config": self.config.to_dict(),
            "points": [
                {**p.summary(), "records": [asdict(r) for r in p.records]} for p in self.points
            ],
        }

    def write_json(self, path) -> None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, default=_json_default), encoding="utf-8")


def _json_default(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    raise TypeError(type(x))


def _write_csv(path, header, rows, meta) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        for m in meta:
            fh.write(f"# {m}\n")
        w = csv.DictWriter(fh, fieldnames=header, extrasaction="ignore")
        w.writeheader()
        w.writerows(rows)


def worker_count(requested: Optional[int] = None) -> int:
    cap = os.environ.get("DIMMSB_THREADS")
    n = requested or (int(cap) if cap else 1)
    if cap:
        n = min(n, int(cap))
    return max(1, n)


def rep_seed(base_seed: int, point: int, rep: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(base_seed, spawn_key=(point, rep))


def _one_rep(params: ModelParams, omega, K: int, base_seed: int, point: int, rep: int, opts) -> RepRecord:
    tag = f"{base_seed}:{point}:{rep}"
    try:
        a = sample_adjacency(omega, rep_seed(base_seed, point, rep))
        a, pr, pc = prune_zero_degree(a, params.pi_r, params.pi_c)
        t0 = time.perf_counter()
        fit = disp(a, K, opts)
        seconds = time.perf_counter() - t0
    except DimmsbError as exc:
        return RepRecord(rep, tag, error=f"{type(exc).__name__}: {exc}")
    return RepRecord(
        rep, tag, a.n_r, a.n_c,
        dimhamm=di_mixed_hamming(fit.pi_r_hat, pr, fit.pi_c_hat, pc),
        row_mhamm=mixed_hamming(fit.pi_r_hat, pr),
        col_mhamm=mixed_hamming(fit.pi_c_hat, pc),
        seconds=max(seconds, 1e-9),
    )


def run_experiment(
    cfg: ExperimentConfig,
    reps: Optional[int] = None,
    workers: Optional[int] = None,
    opts: Optional[DispOptions] = None,
    points: Optional[Sequence[int]] = None,
) -> ExperimentResult:
    """Run every grid point (or the selected ``points``) for ``reps`` repetitions.

    Each repetition draws from its own stream keyed by
    ``(base_seed, point, rep)``, so results do not depend on ``workers``.
    Estimation failures are recorded per repetition and excluded from means.
    """
    cfg.validate()
    reps = reps or cfg.repetitions
    nworkers = worker_count(workers)
    out = []
    for pi in points if points is not None else range(len(cfg.grid)):
        params = cfg.params_at(pi)
        omega = build_omega(params)
        K = params.K

        def job(rep, params=params, omega=omega, K=K, pi=pi):
            return _one_rep(params, omega, K, cfg.base_seed, pi, rep, opts)

        if nworkers > 1:
            with ThreadPoolExecutor(nworkers) as ex:
                records = list(ex.map(job, range(reps)))
        else:
            records = [job(r) for r in range(reps)]
        out.append(PointResult(cfg.grid[pi], tuple(records)))
    return ExperimentResult(cfg, tuple(out))


TABLE_FIELDS = (
    "matrix", "n_edges", "n_r", "n_c", "fit_n_r", "fit_n_c",
    "pure_r", "mixed_r", "pure_c", "mixed_c", "mu_r", "nu_r", "mu_c", "nu_c", "mhamm", "note",
)


def _square_core(a: BiAdjacency) -> BiAdjacency:
    # Alternate the degree >= 1 filter and label intersection until both hold.
    while True:
        b = common_submatrix(degree_filter(a, 1))
        if b.shape == a.shape:
            return b
        a = b


def _stats_row(name, m, a, fit_a, K, opts, pure_tol, with_mhamm, note=""):
    fit = disp(fit_a, K, opts)
    st = network_stats(fit.pi_r_hat, fit.pi_c_hat, pure_tol=pure_tol, with_mhamm=with_mhamm)
    return {
        "matrix": name, "n_edges": m, "n_r": a.n_r, "n_c": a.n_c,
        "fit_n_r": fit_a.n_r, "fit_n_c": fit_a.n_c,
        "pure_r": st.pure_r, "mixed_r": st.mixed_r, "pure_c": st.pure_c, "mixed_c": st.mixed_c,
        "mu_r": st.mu_r, "nu_r": st.nu_r, "mu_c": st.mu_c, "nu_c": st.nu_c,
        "mhamm": st.mhamm if with_mhamm else None, "note": note,
    }


def real_data_table(
    a: BiAdjacency,
    K: int,
    n_edges_list: Sequence[int],
    opts: Optional[DispOptions] = None,
    pure_tol: float = 1e-6,
) -> list[dict]:
    """Degree-filter, fit and summarize a labelled network for each threshold.

    Two rows per threshold: the filtered matrix (no MHamm) and its
    common-node square restriction (with MHamm). If the restriction leaves
    zero-degree nodes, the fit runs on the largest square sub-block with
    all degrees positive; ``fit_n_r``/``fit_n_c`` record that size.
    Thresholds that empty the graph give a row with only ``note`` set.
    """
    rows = []
    for m in n_edges_list:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            am = degree_filter(a, m)
        base = {"matrix": f"A_{m}", "n_edges": m, "n_r": am.n_r, "n_c": am.n_c}
        if min(am.shape) < K:
            rows.append({**base, "note": "skipped: EmptyAfterFilter"})
            continue
        try:
            rows.append(_stats_row(f"A_{m}", m, am, am, K, opts, pure_tol, False))
        except DimmsbError as exc:
            rows.append({**base, "note": f"skipped: {type(exc).__name__}"})
        try:
            common = common_submatrix(am)
            core = _square_core(common)
        except EmptyIntersection:
            rows.append({"matrix": f"A_{m},common", "n_edges": m, "note": "skipped: EmptyIntersection"})
            continue
        name = f"A_{m},common"
        if min(core.shape) < K:
            rows.append({"matrix": name, "n_edges": m, "n_r": common.n_r, "n_c": common.n_c,
                         "note": "skipped: EmptyAfterFilter"})
            continue
        note = "" if core.shape == common.shape else "fit on zero-degree-free core"
        try:
            rows.append(_stats_row(name, m, common, core, K, opts, pure_tol, True, note))
        except DimmsbError as exc:
            rows.append({"matrix": name, "n_edges": m, "n_r": common.n_r, "n_c": common.n_c,
                         "note": f"skipped: {type(exc).__name__}"})
    return rows


def write_table(rows: list[dict], path, seed=None) -> None:
    _write_csv(path, list(TABLE_FIELDS), rows, provenance(seed))


@dataclass(frozen=True)
class BoundReport:
    ratios: tuple
    scale: float
    assumption_ok: bool
    warning: Optional[str] = None

    @property
    def max_ratio(self) -> float:
        return max(self.ratios) if self.ratios else 0.0

    @property
    def mean_ratio(self) -> float:
        return float(np.mean(self.ratios)) if self.ratios else 0.0


def concentration_ratio(omega, rho: float, reps: int = 20, seed: int = 0) -> BoundReport:
    """``||A - Omega|| / sqrt(rho max(n_r, n_c) log(n_r + n_c))`` over ``reps`` samples."""
    omega = np.asarray(omega, dtype=float)
    n_r, n_c = omega.shape
    big, total = max(n_r, n_c), n_r + n_c
    ok = rho * big >= math.log(total)
    warning = None if ok else (
        f"sparsity assumption violated: rho*max(n_r,n_c) = {rho * big:.3g} < log(n_r+n_c) = {math.log(total):.3g}"
    )
    scale = math.sqrt(rho * big * math.log(total))
    ratios = []
    for r in range(reps):
        a = sample_adjacency(omega, np.random.SeedSequence(seed, spawn_key=(r,)))
        ratios.append(spectral_norm(a.toarray() - omega) / scale)
    return BoundReport(tuple(ratios), scale, ok, warning)


def bound_probe(params: ModelParams, reps: int = 20, seed: int = 0) -> BoundReport:
    return concentration_ratio(build_omega(params), params.P.rho, reps, seed)
