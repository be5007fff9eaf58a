"""Config-driven experiment campaigns tying samples to their limit laws.

An ExperimentSpec (JSON-serializable) fully determines a run, including the
master seed; reports therefore reproduce bit-identically, independent of the
worker-thread count. Report files carry a hash of the canonical spec JSON in
every row.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from dataclasses import dataclass, field, replace
from typing import List, Sequence

import numpy as np

from . import __version__
from .ensemble import EnsembleConfig, sample_matrix, smoothing_shift, smoothing_stream
from .errors import ConfigError, EstimationError, NumericError
from .invertibility import largest_sv_tail, min_sv_tail
from .limit_theory import disc_potential, law_for_shift, potential_from_law
from .linalg import eigenvalues, shift, singular_values
from .parallel import parallel_map
from .spectral_measures import (
    EmpiricalCDF,
    ks_distance,
    log_potential_empirical,
    radial_angular_cdfs,
)

KINDS = ("CircularLaw", "SvLaw", "Potential", "MinSv", "MaxSv", "TailIndex")


def format_complex(z: complex) -> str:
    """Shell-safe a+bi form with no spaces."""
    z = complex(z)
    sign = "+" if z.imag >= 0 else "-"
    return f"{z.real:.17g}{sign}{abs(z.imag):.17g}i"


def parse_complex(text: str) -> complex:
    """Parse 'a+bi' / 'a-bi' (no spaces) or a plain real number."""
    s = text.strip()
    if not s:
        raise ConfigError("empty complex literal")
    if s.endswith("i") or s.endswith("I"):
        body = s[:-1]
        split = -1
        for idx in range(len(body) - 1, 0, -1):
            if body[idx] in "+-" and body[idx - 1] not in "eE":
                split = idx
                break
        if split <= 0:
            raise ConfigError(f"cannot parse complex literal {text!r}")
        try:
            return complex(float(body[:split]), float(body[split:]))
        except ValueError as exc:
            raise ConfigError(f"cannot parse complex literal {text!r}") from exc
    try:
        return complex(float(s), 0.0)
    except ValueError as exc:
        raise ConfigError(f"cannot parse complex literal {text!r}") from exc


@dataclass(frozen=True)
class ExperimentSpec:
    """One experiment campaign: kind, ensemble, trial count, and kind-specific knobs."""

    kind: str
    ensemble: EnsembleConfig
    trials: int
    z_points: tuple = ()
    r: object = 0.0  # float or "auto" (1/sqrt(n p_n))
    thresholds: tuple = ()
    n_values: tuple = ()
    b_exponent: float = 3.0
    c_cut: float = 1.0
    q: float = 18.0
    big_r: float = 3.0
    out: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if self.kind in ("SvLaw", "Potential", "MinSv") and not self.z_points:
            raise ConfigError(f"{self.kind} requires at least one z point")
        if self.r != "auto" and not (isinstance(self.r, (int, float)) and self.r >= 0):
            raise ConfigError(f"r must be a nonnegative number or 'auto', got {self.r!r}")
        if self.kind == "TailIndex" and self.q <= 6:
            raise ConfigError(f"TailIndex requires q > 6, got {self.q}")
        if self.kind == "TailIndex" and self.big_r <= 0:
            raise ConfigError(f"TailIndex requires R > 0, got {self.big_r}")

    def resolve_r(self, config: EnsembleConfig) -> float:
        if self.r == "auto":
            return 1.0 / math.sqrt(config.n * config.p_n)
        return float(self.r)

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "ensemble": self.ensemble.to_json_dict(),
            "trials": self.trials,
            "z_points": [format_complex(z) for z in self.z_points],
            "r": self.r,
            "thresholds": list(self.thresholds),
            "n_values": list(self.n_values),
            "b_exponent": self.b_exponent,
            "c_cut": self.c_cut,
            "q": self.q,
            "R": self.big_r,
            "out": self.out,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "ExperimentSpec":
        allowed = {
            "kind", "ensemble", "trials", "z_points", "r", "thresholds",
            "n_values", "b_exponent", "c_cut", "q", "R", "out",
        }
        if not isinstance(d, dict):
            raise ConfigError("experiment spec must be a JSON object")
        unknown = set(d) - allowed
        if unknown:
            raise ConfigError(f"unknown experiment spec fields: {sorted(unknown)}")
        if "kind" not in d or "ensemble" not in d or "trials" not in d:
            raise ConfigError("experiment spec needs kind, ensemble and trials")
        z_points = tuple(
            parse_complex(z) if isinstance(z, str) else complex(z)
            for z in d.get("z_points", [])
        )
        r = d.get("r", 0.0)
        if isinstance(r, str) and r != "auto":
            raise ConfigError(f"r must be a number or 'auto', got {r!r}")
        return cls(
            kind=d["kind"],
            ensemble=EnsembleConfig.from_json_dict(d["ensemble"]),
            trials=int(d["trials"]),
            z_points=z_points,
            r=r,
            thresholds=tuple(float(t) for t in d.get("thresholds", [])),
            n_values=tuple(int(n) for n in d.get("n_values", [])),
            b_exponent=float(d.get("b_exponent", 3.0)),
            c_cut=float(d.get("c_cut", 1.0)),
            q=float(d.get("q", 18.0)),
            big_r=float(d.get("R", 3.0)),
            out=str(d.get("out", "")),
        )

    @classmethod
    def from_json(cls, text: str) -> "ExperimentSpec":
        return cls.from_json_dict(json.loads(text))

    def hash(self) -> str:
        canon = _stable_dumps(self.to_json_dict(), sort_keys=True)
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:16]


@dataclass
class ExperimentReport:
    """Tabular statistics plus provenance metadata."""

    columns: List[str]
    rows: List[dict]
    meta: dict = field(default_factory=dict)

    def append(self, **kwargs):
        row = {c: kwargs.get(c, "") for c in self.columns}
        row["spec_hash"] = self.meta.get("spec_hash", "")
        self.rows.append(row)

    def column(self, name):
        return [row[name] for row in self.rows]


def _new_report(spec: ExperimentSpec, columns: Sequence[str]) -> ExperimentReport:
    cols = list(columns) + ["spec_hash"]
    return ExperimentReport(
        cols,
        [],
        {
            "kind": spec.kind,
            "spec_hash": spec.hash(),
            "master_seed": spec.ensemble.master_seed,
            "version": __version__,
            "wall_time_s": 0.0,  # filled at end of run, excluded from serialization
        },
    )


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _stable_dumps(obj, sort_keys=False, indent=0) -> str:
    """JSON with a fixed 17-significant-digit float format."""
    if isinstance(obj, dict):
        keys = sorted(obj) if sort_keys else list(obj)
        parts = [f"{json.dumps(str(k))}: {_stable_dumps(obj[k], sort_keys)}" for k in keys]
        return "{" + ", ".join(parts) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_stable_dumps(v, sort_keys) for v in obj) + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, float):
        return f"{obj:.17g}"
    if isinstance(obj, (int, str)) or obj is None:
        return json.dumps(obj)
    raise ConfigError(f"cannot serialize {type(obj).__name__}")


def write_report(report: ExperimentReport, path, fmt: str = "csv") -> None:
    """Bit-stable serialization; wall time is deliberately not written."""
    if fmt not in ("csv", "json"):
        raise ConfigError(f"unknown report format {fmt!r}")
    stable_meta = {k: v for k, v in report.meta.items() if k != "wall_time_s"}
    try:
        if fmt == "csv":
            lines = [",".join(report.columns)]
            for row in report.rows:
                lines.append(",".join(_fmt(row[c]) for c in report.columns))
            text = "\n".join(lines) + "\n"
        else:
            payload = {
                "meta": stable_meta,
                "columns": list(report.columns),
                "rows": [
                    {c: row[c] for c in report.columns} for row in report.rows
                ],
            }
            text = _stable_dumps(payload) + "\n"
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc


def read_report(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _uniform01_cdf(x):
    return np.clip(np.asarray(x, dtype=np.float64), 0.0, 1.0)


def run_circular_law(spec: ExperimentSpec) -> ExperimentReport:
    """Per-trial eigenvalue statistics against the uniform-disc law."""
    if spec.kind != "CircularLaw":
        raise ConfigError(f"expected CircularLaw spec, got {spec.kind}")
    start = time.perf_counter()
    cfg = spec.ensemble
    soft_edge = 1.0 + 3.0 * cfg.n ** -0.25

    def one_trial(t):
        try:
            spectrum = eigenvalues(sample_matrix(cfg, t))
        except NumericError:
            return None
        radial, angular = radial_angular_cdfs(spectrum)
        mods = np.abs(spectrum.values)
        return (
            ks_distance(radial, _uniform01_cdf),
            ks_distance(angular, _uniform01_cdf),
            float(np.mean(mods > soft_edge)),
            float(np.mean(mods > 1.15)),
        )

    results = parallel_map(one_trial, range(spec.trials))
    report = _new_report(
        spec,
        ["row", "trial", "ks_radial", "ks_angular", "frac_beyond_soft", "frac_beyond_1p15", "failed"],
    )
    ok = [r for r in results if r is not None]
    for t, res in enumerate(results):
        if res is None:
            report.append(row="trial", trial=t, failed=True)
        else:
            report.append(
                row="trial", trial=t, ks_radial=res[0], ks_angular=res[1],
                frac_beyond_soft=res[2], frac_beyond_1p15=res[3], failed=False,
            )
    if ok:
        arr = np.array(ok)
        means = arr.mean(axis=0)
        if len(ok) > 1:
            errs = arr.std(axis=0, ddof=1) / math.sqrt(len(ok))
        else:
            errs = np.zeros(4)
        for name, vals in (("mean", means), ("stderr", errs)):
            report.append(
                row=name, trial=-1, ks_radial=float(vals[0]), ks_angular=float(vals[1]),
                frac_beyond_soft=float(vals[2]), frac_beyond_1p15=float(vals[3]),
                failed=False,
            )
    report.meta["failed_trials"] = len(results) - len(ok)
    report.meta["wall_time_s"] = time.perf_counter() - start
    return report


def _pooled_sv_cdf(cfg: EnsembleConfig, z: complex, trials: int) -> EmpiricalCDF:
    def one_trial(t):
        return np.asarray(singular_values(shift(sample_matrix(cfg, t), z)).values) ** 2

    atoms = np.concatenate(parallel_map(one_trial, range(trials)))
    return EmpiricalCDF.from_values(atoms)


def run_sv_law(spec: ExperimentSpec) -> ExperimentReport:
    """Trial-averaged squared-singular-value law against the limit CDF.

    With an n ladder, also reports the fitted slope of ln Delta_n over ln n
    as a decay diagnostic (the theoretical rate is only an upper bound, so the
    slope is informational).
    """
    if spec.kind != "SvLaw":
        raise ConfigError(f"expected SvLaw spec, got {spec.kind}")
    start = time.perf_counter()
    ns = list(spec.n_values) or [spec.ensemble.n]
    report = _new_report(spec, ["row", "n", "z_re", "z_im", "trials", "delta", "slope"])
    for z in spec.z_points:
        law = law_for_shift(z)
        deltas = []
        for n in ns:
            cfg = _resize(spec.ensemble, n)
            pooled = _pooled_sv_cdf(cfg, z, spec.trials)
            delta = ks_distance(pooled, law.cdf_squared)
            deltas.append(delta)
            report.append(
                row="stat", n=n, z_re=z.real, z_im=z.imag,
                trials=spec.trials, delta=delta, slope="",
            )
        if len(ns) >= 2:
            slope = float(np.polyfit(np.log(ns), np.log(deltas), 1)[0])
            report.append(
                row="slope", n=-1, z_re=z.real, z_im=z.imag,
                trials=spec.trials, delta="", slope=slope,
            )
    report.meta["wall_time_s"] = time.perf_counter() - start
    return report


def run_potential(spec: ExperimentSpec) -> ExperimentReport:
    """Empirical truncated log-determinant average vs the two exact potentials."""
    if spec.kind != "Potential":
        raise ConfigError(f"expected Potential spec, got {spec.kind}")
    start = time.perf_counter()
    cfg = spec.ensemble
    r = spec.resolve_r(cfg)
    report = _new_report(
        spec,
        ["row", "z_re", "z_im", "r", "trials", "included", "excluded",
         "u_empirical", "u_stderr", "u_disc", "u_law", "gap_disc", "gap_law", "flagged"],
    )

    def one_trial_factory(z):
        def one_trial(t):
            sample = sample_matrix(cfg, t)
            if r > 0:
                sample = smoothing_shift(sample, r, smoothing_stream(cfg, t))
            return singular_values(shift(sample, z))

        return one_trial

    for z in spec.z_points:
        spectra = parallel_map(one_trial_factory(z), range(spec.trials))
        u_disc = disc_potential(z)
        u_law = potential_from_law(z)
        try:
            est = log_potential_empirical(spectra, spec.b_exponent, spec.c_cut)
        except EstimationError:
            report.append(
                row="stat", z_re=z.real, z_im=z.imag, r=r, trials=spec.trials,
                included=0, excluded=spec.trials, u_disc=u_disc, u_law=u_law,
                flagged=True,
            )
            continue
        report.append(
            row="stat", z_re=z.real, z_im=z.imag, r=r, trials=spec.trials,
            included=est.trials - est.truncation_count, excluded=est.truncation_count,
            u_empirical=est.value, u_stderr=est.stderr, u_disc=u_disc, u_law=u_law,
            gap_disc=abs(est.value - u_disc), gap_law=abs(est.value - u_law),
            flagged=False,
        )
    report.meta["wall_time_s"] = time.perf_counter() - start
    return report


def run_minsv(spec: ExperimentSpec) -> ExperimentReport:
    """min_sv_tail over an (n, z) grid."""
    if spec.kind != "MinSv":
        raise ConfigError(f"expected MinSv spec, got {spec.kind}")
    if not spec.thresholds:
        raise ConfigError("MinSv requires thresholds")
    start = time.perf_counter()
    ns = list(spec.n_values) or [spec.ensemble.n]
    report = _new_report(
        spec,
        ["row", "n", "p_n", "z_re", "z_im", "threshold", "frequency", "trials", "s1_violation_freq"],
    )
    for n in ns:
        cfg = _resize(spec.ensemble, n)
        for z in spec.z_points:
            table = min_sv_tail(cfg, z, spec.trials, spec.thresholds)
            for t, f in zip(table.thresholds, table.frequencies):
                report.append(
                    row="stat", n=n, p_n=cfg.p_n, z_re=z.real, z_im=z.imag,
                    threshold=float(t), frequency=float(f), trials=spec.trials,
                    s1_violation_freq=table.s1_violation_frequency,
                )
    report.meta["wall_time_s"] = time.perf_counter() - start
    return report


def run_maxsv(spec: ExperimentSpec) -> ExperimentReport:
    """largest_sv_tail over an n grid."""
    if spec.kind != "MaxSv":
        raise ConfigError(f"expected MaxSv spec, got {spec.kind}")
    start = time.perf_counter()
    ns = list(spec.n_values) or [spec.ensemble.n]
    report = _new_report(spec, ["row", "n", "p_n", "frequency", "trials"])
    for n in ns:
        cfg = _resize(spec.ensemble, n)
        freq = largest_sv_tail(cfg, spec.trials)
        report.append(row="stat", n=n, p_n=cfg.p_n, frequency=freq, trials=spec.trials)
    report.meta["wall_time_s"] = time.perf_counter() - start
    return report


def _resize(cfg: EnsembleConfig, n: int) -> EnsembleConfig:
    """Same ensemble at a different dimension; theta (if any) re-derives p_n."""
    if cfg.theta is not None:
        return EnsembleConfig.from_theta(n, cfg.theta, cfg.dist, cfg.master_seed)
    return replace(cfg, n=n)


def tail_eigenvalue_index(delta: float, n: int, q: float):
    """(k1, effective index, clamped flag): k1 = floor(delta^((q+6)/(2q)) n ln n),
    clamped into [1, n-1] when the formula leaves the valid range."""
    k1 = int(math.floor(delta ** ((q + 6.0) / (2.0 * q)) * n * math.log(n)))
    clamped = k1 >= n or k1 < 1
    k1_eff = min(max(k1, 1), n - 1) if n > 1 else 1
    return k1, k1_eff, clamped


def tail_index_check(spec: ExperimentSpec, q: float = None, big_r: float = None) -> ExperimentReport:
    """Frequency of the k1-th largest eigenvalue modulus exceeding R, where
    k1 comes from tail_eigenvalue_index at the sv-law distance Delta_n
    measured at the reference shift z = 0."""
    if spec.kind != "TailIndex":
        raise ConfigError(f"expected TailIndex spec, got {spec.kind}")
    q = spec.q if q is None else q
    big_r = spec.big_r if big_r is None else big_r
    if q <= 6:
        raise ConfigError(f"q must exceed 6, got {q}")
    if big_r <= 0:
        raise ConfigError(f"R must be positive, got {big_r}")
    start = time.perf_counter()
    cfg = spec.ensemble
    n = cfg.n
    law = law_for_shift(0j)
    pooled = _pooled_sv_cdf(cfg, 0j, spec.trials)
    delta = ks_distance(pooled, law.cdf_squared)
    k1, k1_eff, clamped = tail_eigenvalue_index(delta, n, q)

    def one_trial(t):
        mods = np.sort(np.abs(eigenvalues(sample_matrix(cfg, t)).values))[::-1]
        return float(mods[k1_eff - 1]) > big_r

    hits = parallel_map(one_trial, range(spec.trials))
    report = _new_report(
        spec, ["row", "n", "delta", "k1", "k1_effective", "clamped", "R", "q", "frequency", "trials"]
    )
    report.append(
        row="stat", n=n, delta=delta, k1=k1, k1_effective=k1_eff, clamped=clamped,
        R=big_r, q=q, frequency=float(np.mean(hits)), trials=spec.trials,
    )
    report.meta["wall_time_s"] = time.perf_counter() - start
    return report


_RUNNERS = {
    "CircularLaw": run_circular_law,
    "SvLaw": run_sv_law,
    "Potential": run_potential,
    "MinSv": run_minsv,
    "MaxSv": run_maxsv,
    "TailIndex": tail_index_check,
}


def run_experiment(spec: ExperimentSpec) -> ExperimentReport:
    return _RUNNERS[spec.kind](spec)
