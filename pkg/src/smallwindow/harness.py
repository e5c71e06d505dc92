"""Moving-window evaluation: update protocols, per-window model fitting,
RMSEP and the window-size / delay sweeps.

Index walk for a series of ``n`` samples, window ``w`` and delay ``d``:

* continuous - sample ``t`` is predicted from the window ending at
  ``t - d``, for ``t = w - 1 + d, ..., n - 1``.
* delayed - windows end at ``w - 1, w - 1 + d, w - 1 + 2d, ...``; each one
  predicts the next ``d`` samples (lags ``1..d``), the final block being
  cut at the end of the series.

With ``d = 1`` both walks visit the same windows and samples.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Iterator

import numpy as np

from .dataset import Dataset
from .ensemble import ForestConfig, fit_forest, predict_forest
from .numeric import ContractError, DegenerateWindowError, derive_seed, mix_seed
from .pls import fit_pls_cv
from .rfpls import RfPlsConfig, fit_predict_rfpls
from .rpls import rpls_init, rpls_update

STANDARD_WINDOW_GRID = (2, 3, 4, 5, 6, 7, 8, 9, 10, 15, 20, 25)
STANDARD_DELAY_GRID = tuple(range(1, 10))

FLAG_FALLBACK_MMW = "fallback_mmw"
FLAG_INNER_PLS = "inner_pls_fallback"


class Kind(str, Enum):
    MMW = "mmw"
    PLS = "pls"
    RPLS = "rpls"
    RF = "rf"
    RFPLS = "rfpls"

    @classmethod
    def parse(cls, name: str) -> "Kind":
        try:
            return cls(name.strip().lower().replace("-", ""))
        except ValueError:
            choices = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown model {name!r}; choose from {{{choices}}}") from None


@dataclass(frozen=True)
class ModelSpec:
    kind: Kind
    window_size: int
    lam: float = 0.05
    forest: ForestConfig = field(default_factory=ForestConfig)
    seed: int = 0
    inner_pls_window: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        min_w = 3 if self.kind is Kind.RFPLS else 2
        if self.window_size < min_w:
            raise ContractError(f"{self.kind.value} needs a window of at least {min_w}")

    @property
    def id(self) -> str:
        return self.kind.value

    def echo(self) -> dict:
        out = {"model": self.kind.value, "window": self.window_size, "seed": self.seed}
        if self.kind is Kind.RPLS:
            out["lambda"] = self.lam
        if self.kind in (Kind.RF, Kind.RFPLS):
            out.update(
                trees=self.forest.n_trees, mtry=self.forest.mtry, min_leaf=self.forest.min_leaf
            )
        if self.kind is Kind.RFPLS:
            out["inner_pls_window"] = self.inner_pls_window or self.window_size - 1
        return out


@dataclass(frozen=True)
class UpdatePolicy:
    mode: str = "continuous"
    delay: int = 1

    def __post_init__(self):
        if self.mode not in ("continuous", "delayed"):
            raise ContractError(f"mode must be 'continuous' or 'delayed', got {self.mode!r}")
        if self.delay < 1:
            raise ContractError("delay must be >= 1")


@dataclass(frozen=True)
class PredictionRecord:
    t: int
    truth: float
    prediction: float
    lag: int
    window_end: int
    model: str
    flags: tuple[str, ...] = ()


@dataclass
class RunReport:
    records: list[PredictionRecord]
    rmsep: float
    n_predictions: int
    n_flagged: int
    config: dict

    def summary(self) -> dict:
        c = self.config
        return {
            "dataset": c.get("dataset"), "model": c.get("model"), "mode": c.get("mode"),
            "delay": c.get("delay"), "window": c.get("window"), "rmsep": self.rmsep,
            "n": self.n_predictions, "flagged": self.n_flagged,
        }

    @property
    def mean_signed_error(self) -> float:
        return math.fsum(r.prediction - r.truth for r in self.records) / len(self.records)


def predict_mmw(window_y) -> float:
    """Mean of the window's property values; ignores X entirely."""
    y = np.asarray(window_y, dtype=np.float64)
    if y.ndim != 1 or y.size == 0:
        raise ContractError("MMW needs a non-empty window")
    return math.fsum(y.tolist()) / y.size


def rmsep(records: Iterable[PredictionRecord]) -> float:
    records = list(records)
    if not records:
        raise ContractError("RMSEP of an empty record set")
    return math.sqrt(math.fsum((r.prediction - r.truth) ** 2 for r in records) / len(records))


def schedule(n: int, w: int, policy: UpdatePolicy) -> Iterator[tuple[int, list[int]]]:
    """Yield ``(window_end, targets)`` in time order."""
    d = policy.delay
    if policy.mode == "continuous":
        for t in range(w - 1 + d, n):
            yield t - d, [t]
    else:
        e = w - 1
        while e + 1 < n:
            yield e, list(range(e + 1, min(e + d, n - 1) + 1))
            e += d


def window_seed(base_seed: int, window_end: int) -> int:
    """Per-window forest seed: ``base XOR window_end``, then scrambled so that
    the per-tree ``seed XOR tree_index`` streams of nearby windows differ."""
    return mix_seed(derive_seed(base_seed, window_end))


class _Runner:
    """Fits one model kind window by window; RPLS keeps its state here."""

    def __init__(self, spec: ModelSpec):
        self.spec = spec
        self.state = None

    def fit(self, Xw, yw, window_end) -> Callable[[np.ndarray], tuple[float, tuple]]:
        """Return ``x -> (prediction, flags)`` for the window."""
        spec = self.spec
        kind = spec.kind
        if kind is Kind.MMW:
            m = predict_mmw(yw)
            return lambda x: (m, ())
        if kind is Kind.PLS:
            try:
                model = fit_pls_cv(Xw, yw)
            except DegenerateWindowError:
                return self._fallback(yw)
            return lambda x: (model.predict(x), ())
        if kind is Kind.RPLS:
            try:
                if self.state is None:
                    self.state = rpls_init(Xw, yw, spec.lam)
                else:
                    self.state = rpls_update(self.state, Xw, yw)
            except DegenerateWindowError:
                return self._fallback(yw)
            state = self.state
            return lambda x: (state.predict(x), ())
        seed = window_seed(spec.seed, window_end)
        if kind is Kind.RF:
            forest = fit_forest(Xw, yw, spec.forest, seed)
            return lambda x: (predict_forest(forest, x), ())
        cfg = RfPlsConfig(
            rf_window=spec.window_size, inner_pls_window=spec.inner_pls_window,
            forest=spec.forest, seed=seed,
        )

        def hybrid(x):
            res = fit_predict_rfpls(Xw, yw, x, cfg)
            return res.prediction, ((FLAG_INNER_PLS,) if res.inner_fallback else ())

        return hybrid

    @staticmethod
    def _fallback(yw):
        m = predict_mmw(yw)
        return lambda x: (m, (FLAG_FALLBACK_MMW,))


def run_series(
    d: Dataset, spec: ModelSpec, policy: UpdatePolicy | None = None, score_from: int = 0
) -> RunReport:
    """Walk the series in time order and record one prediction per target.

    Labels are read only through ``d.labels`` (the calibration window) and
    ``d.label`` (a target's truth, read after its prediction is made).
    Records are kept for targets ``t >= score_from``; earlier windows are
    still visited so recursive state evolves over the whole series.
    """
    policy = policy or UpdatePolicy()
    n, w = d.n_samples, spec.window_size
    need = w + (policy.delay if policy.mode == "continuous" else 1)
    if n < need:
        raise ContractError(
            f"dataset {d.name!r} has {n} samples; window {w} with {policy.mode} "
            f"delay {policy.delay} needs at least {need}"
        )
    runner = _Runner(spec)
    stateful = spec.kind is Kind.RPLS
    records: list[PredictionRecord] = []
    for e, targets in schedule(n, w, policy):
        if targets[-1] < score_from and not stateful:
            continue
        lo = e - w + 1
        Xw = d.X[lo : e + 1]
        yw = d.labels(lo, e + 1)
        predict = runner.fit(Xw, yw, e)
        for t in targets:
            if t < score_from:
                continue
            pred, flags = predict(d.X[t])
            truth = d.label(t)
            records.append(PredictionRecord(t, truth, float(pred), t - e, e, spec.id, flags))
    if not records:
        raise ContractError(f"no predictions fall at or after sample {score_from}")
    config = {
        "dataset": d.name, **spec.echo(), "mode": policy.mode, "delay": policy.delay,
        "score_from": score_from,
    }
    return RunReport(
        records=records, rmsep=rmsep(records), n_predictions=len(records),
        n_flagged=sum(1 for r in records if r.flags), config=config,
    )


@dataclass(frozen=True)
class SweepRow:
    model: str
    window: int
    mode: str
    delay: int
    rmsep: float
    n: int
    flagged: int
    error: str = ""


def _cell(d, kind, w, policy, score_from, model_kw) -> tuple[SweepRow, RunReport | None]:
    try:
        spec = ModelSpec(Kind.parse(kind) if isinstance(kind, str) else kind, w, **model_kw)
        rep = run_series(d, spec, policy, score_from)
    except ContractError as exc:
        k = kind if isinstance(kind, str) else kind.value
        return SweepRow(k, w, policy.mode, policy.delay, float("nan"), 0, 0, str(exc)), None
    return SweepRow(spec.id, w, policy.mode, policy.delay, rep.rmsep, rep.n_predictions, rep.n_flagged), rep


def sweep_window_size(
    d: Dataset, kinds, sizes=STANDARD_WINDOW_GRID, policy: UpdatePolicy | None = None,
    score_from: int = 0, keep_reports: bool = False, **model_kw,
):
    """RMSEP per (model, window size).  Cells that cannot run come back with
    ``rmsep = nan`` and the reason in ``error``."""
    policy = policy or UpdatePolicy()
    rows, reports = [], []
    for kind in kinds:
        for w in sizes:
            row, rep = _cell(d, kind, w, policy, score_from, model_kw)
            rows.append(row)
            reports.append(rep)
    return (rows, reports) if keep_reports else rows


def sweep_delay(
    d: Dataset, kinds, delays=STANDARD_DELAY_GRID, mode: str = "delayed", window: int = 4,
    score_from: int = 0, keep_reports: bool = False, **model_kw,
):
    """RMSEP per (model, delay) for one update mode at a fixed window size."""
    rows, reports = [], []
    for kind in kinds:
        for delay in delays:
            row, rep = _cell(d, kind, window, UpdatePolicy(mode, delay), score_from, model_kw)
            rows.append(row)
            reports.append(rep)
    return (rows, reports) if keep_reports else rows


# ---- serialisation ---------------------------------------------------------

RECORD_FIELDS = ("t", "truth", "prediction", "lag", "window_end", "model", "flags")
SUMMARY_FIELDS = ("model", "window", "mode", "delay", "rmsep", "n", "flagged")


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def records_csv(records: Iterable[PredictionRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RECORD_FIELDS)
    for r in records:
        w.writerow([r.t, _fmt(r.truth), _fmt(r.prediction), r.lag, r.window_end, r.model, ";".join(r.flags)])
    return buf.getvalue()


def summary_csv(rows: Iterable[SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_FIELDS)
    for r in rows:
        w.writerow([_fmt(getattr(r, f)) for f in SUMMARY_FIELDS])
    return buf.getvalue()


def summary_dict(row: SweepRow, dataset: str) -> dict:
    out = {"dataset": dataset, "model": row.model, "mode": row.mode, "delay": row.delay,
           "window": row.window, "rmsep": None if math.isnan(row.rmsep) else row.rmsep,
           "n": row.n, "flagged": row.flagged}
    if row.error:
        out["error"] = row.error
    return out


def atomic_write(path, text: str) -> Path:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_json(path, obj) -> Path:
    return atomic_write(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")
