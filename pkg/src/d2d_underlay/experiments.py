"""Sweep runner: multi-hop discovery trials, outage estimates over parameter
grids, figure presets and CSV output."""

from __future__ import annotations

import csv
import dataclasses
import inspect
import io
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .discovery import discover_over_channels, link_state, run_discovery
from .outage import (
    analytical_outage,
    power_savings,
    simulate_d2d_outage,
    simulate_macro_outage,
)
from .radio import EstimateMode, RadioParams
from .topology import ConfigError, SimConfig, sample_channels, sample_topology

log = logging.getLogger(__name__)

STREAM_DISCOVERY = 4
AXES = ("N_D", "alpha", "N_C", "r_over_R")
CSV_HEADER = ("axis", "series", "metric", "value", "std_err", "samples", "wall_time_s")
ALPHA_GRID = (2.0, 2.5, 3.0, 3.5, 4.0)


# ---------------------------------------------------------------- discovery


@dataclass
class TrialOutcome:
    trial: int
    success_ni: bool
    success_no_ni: bool
    tx_ni: int
    tx_no_ni: int
    success_ni_channel: bool
    success_no_ni_channel: bool
    tx_ni_channel: int
    tx_no_ni_channel: int
    route: Optional[tuple[int, ...]]
    hops: Optional[int]
    p_save: Optional[float]


def trial_rngs(seed: int, trial: int):
    ss = np.random.SeedSequence(seed, spawn_key=(STREAM_DISCOVERY, trial))
    topo_ss, chan_ss = ss.spawn(2)
    return np.random.default_rng(topo_ss), np.random.default_rng(chan_ss)


def run_trial(cfg: SimConfig, trial: int, dump: bool = False):
    """One topology: discovery with and without network information over the
    channel list, plus the single best channel alone. Route metrics come from
    the run matching ``cfg.ni_enabled``."""
    rt, rc = trial_rngs(cfg.seed, trial)
    topo = sample_topology(cfg, rt)
    draw = sample_channels(topo, cfg, rc)
    links = link_state(topo, draw, cfg)
    ni = discover_over_channels(topo, draw, cfg, links, ni=True)
    no_ni = discover_over_channels(topo, draw, cfg, links, ni=False)
    first = ni.per_channel[0][0]
    ni_1 = run_discovery(topo, draw, first, cfg, links, ni=True)
    no_ni_1 = run_discovery(topo, draw, first, cfg, links, ni=False)
    chosen = ni if cfg.ni_enabled else no_ni
    route = chosen.route
    out = TrialOutcome(
        trial=trial,
        success_ni=ni.success,
        success_no_ni=no_ni.success,
        tx_ni=ni.tx_count,
        tx_no_ni=no_ni.tx_count,
        success_ni_channel=ni_1.success,
        success_no_ni_channel=no_ni_1.success,
        tx_ni_channel=ni_1.tx_count,
        tx_no_ni_channel=no_ni_1.tx_count,
        route=route.nodes if route else None,
        hops=route.hops if route else None,
        p_save=power_savings(route, topo, draw, cfg) if route else None,
    )
    if not dump:
        return out, None
    doc = {
        "trial": trial,
        "seed": cfg.seed,
        "topology": topo.to_json(),
        "gains": draw.to_json(),
        "outcome": dataclasses.asdict(out),
    }
    return out, doc


def _run_block(args):
    cfg, start, stop, dump = args
    return [run_trial(cfg, t, dump) for t in range(start, stop)]


def run_trials(cfg: SimConfig, trials: Optional[int] = None, workers: int = 1, dump_limit: int = 0):
    """Run trials ``0 .. trials-1``; outcomes come back in trial order whatever
    the worker count. Returns ``(outcomes, dumps)``."""
    trials = cfg.trials if trials is None else trials
    block = 256
    jobs = [(cfg, s, min(s + block, trials), s < dump_limit) for s in range(0, trials, block)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_run_block, jobs))
    else:
        parts = [_run_block(j) for j in jobs]
    outcomes, dumps = [], []
    for part in parts:
        for out, doc in part:
            outcomes.append(out)
            if doc is not None and out.trial < dump_limit:
                dumps.append(doc)
    return outcomes, dumps


@dataclass(frozen=True)
class Stat:
    value: float
    std_err: float
    samples: int


def _mean(x) -> Stat:
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        return Stat(float("nan"), float("nan"), 0)
    se = float(x.std(ddof=1) / np.sqrt(x.size)) if x.size > 1 else 0.0
    return Stat(float(x.mean()), se, int(x.size))


def _ratio_saving(t, t_ni) -> Stat:
    """``1 - mean(t_ni)/mean(t)`` with a delta-method standard error."""
    t = np.asarray(t, dtype=float)
    t_ni = np.asarray(t_ni, dtype=float)
    n = t.size
    ratio = t_ni.mean() / t.mean()
    resid = t_ni - ratio * t
    se = float(np.sqrt(resid.var(ddof=1) / n) / t.mean()) if n > 1 else 0.0
    return Stat(float(1.0 - ratio), se, n)


def discovery_metrics(outcomes: Sequence[TrialOutcome]) -> dict[str, Stat]:
    col = lambda name: [getattr(o, name) for o in outcomes]  # noqa: E731
    ok = [o for o in outcomes if o.route is not None]
    return {
        "p_fail_ni": _mean([not s for s in col("success_ni")]),
        "p_fail_no_ni": _mean([not s for s in col("success_no_ni")]),
        "p_fail_ni_channel": _mean([not s for s in col("success_ni_channel")]),
        "p_fail_no_ni_channel": _mean([not s for s in col("success_no_ni_channel")]),
        "T_ni": _mean(col("tx_ni")),
        "T_no_ni": _mean(col("tx_no_ni")),
        "t_save": _ratio_saving(col("tx_no_ni"), col("tx_ni")),
        "t_save_channel": _ratio_saving(col("tx_no_ni_channel"), col("tx_ni_channel")),
        "p_save": _mean([o.p_save for o in ok]),
        "n_hops": _mean([o.hops for o in ok]),
    }


DISCOVERY_METRICS = (
    "p_fail_ni",
    "p_fail_no_ni",
    "p_fail_ni_channel",
    "p_fail_no_ni_channel",
    "T_ni",
    "T_no_ni",
    "t_save",
    "t_save_channel",
    "p_save",
    "n_hops",
)


def simulate_discovery(cfg: SimConfig, workers: int = 1, dump_limit: int = 0):
    outcomes, dumps = run_trials(cfg, workers=workers, dump_limit=dump_limit)
    return discovery_metrics(outcomes), dumps


# ------------------------------------------------------------------ outage

OUTAGE_KINDS = ("p_out_d2d_analytical", "p_out_d2d_simulated", "p_out_macro_simulated")


def outage_metric(name: str, cfg: SimConfig) -> Stat:
    """Evaluate ``<kind>_<mode>``, e.g. ``p_out_d2d_analytical_statistical``."""
    kind, _, mode = name.rpartition("_")
    mode = EstimateMode.parse(mode)
    if kind == "p_out_d2d_analytical":
        est = analytical_outage(cfg, mode, mc_samples=cfg.trials)
    elif kind == "p_out_d2d_simulated":
        est = simulate_d2d_outage(cfg, mode)
    elif kind == "p_out_macro_simulated":
        est = simulate_macro_outage(cfg, mode)
    else:
        raise ConfigError("metrics", f"unknown metric {name!r}")
    return Stat(est.p_out, est.std_err, est.samples)


def known_metric(name: str) -> bool:
    if name in DISCOVERY_METRICS:
        return True
    kind, _, mode = name.rpartition("_")
    return kind in OUTAGE_KINDS and mode in {m.value for m in EstimateMode}


# ------------------------------------------------------------------- sweeps


@dataclass(frozen=True)
class SweepSpec:
    base: SimConfig
    axis: str
    values: tuple
    metrics: tuple[str, ...]
    series: Optional[str] = None
    series_values: tuple = ()
    outputs: Optional[str] = None

    def __post_init__(self):
        if self.axis not in AXES:
            raise ConfigError("axis", f"must be one of {AXES}, got {self.axis!r}")
        if self.series is not None and self.series not in AXES:
            raise ConfigError("series", f"must be one of {AXES}, got {self.series!r}")
        if self.series is not None and not self.series_values:
            raise ConfigError("series_values", "series given without values")
        if not self.values:
            raise ConfigError("values", "at least one axis value required")
        if not self.metrics:
            raise ConfigError("metrics", "at least one metric required")
        for m in self.metrics:
            if not known_metric(m):
                raise ConfigError("metrics", f"unknown metric {m!r}")
        # surface invalid grid points before any work is done
        for sv in self.series_values or (None,):
            for v in self.values:
                self.config_at(v, sv)

    def config_at(self, value, series_value=None) -> SimConfig:
        cfg = self.base
        if self.series is not None:
            cfg = apply_axis(cfg, self.series, series_value)
        return apply_axis(cfg, self.axis, value)


def apply_axis(cfg: SimConfig, axis: str, value) -> SimConfig:
    if axis == "N_D":
        if float(value) != int(value):
            raise ConfigError("N_D", f"must be an integer, got {value!r}")
        return cfg.replace(N_D=int(value))
    if axis == "N_C":
        if float(value) != int(value):
            raise ConfigError("N_C", f"must be an integer, got {value!r}")
        return cfg.replace(N_C=int(value))
    if axis == "alpha":
        return cfg.replace(alpha=float(value))
    if axis == "r_over_R":
        return cfg.replace(r=float(value) * cfg.R)
    raise ConfigError("axis", f"unknown axis {axis!r}")


@dataclass(frozen=True)
class SweepRow:
    axis: float
    series: Optional[float]
    metric: str
    value: float
    std_err: float
    samples: int
    wall_time_s: float = 0.0


def run_sweep(
    spec: SweepSpec,
    workers: int = 1,
    timing: bool = False,
    dump: Optional[Callable[[dict], None]] = None,
    dump_limit: int = 100,
) -> list[SweepRow]:
    """Evaluate every metric at every (axis, series) grid point.

    Discovery metrics share one batch of trials per grid point. Rows are
    returned axis-major, then series, then in ``spec.metrics`` order.
    ``wall_time_s`` is recorded only with ``timing=True`` so that output is
    reproducible byte for byte by default.
    """
    rows = []
    series_values = spec.series_values if spec.series is not None else (None,)
    for v in spec.values:
        for sv in series_values:
            cfg = spec.config_at(v, sv)
            log.info("grid point %s=%s series %s=%s", spec.axis, v, spec.series, sv)
            results: dict[str, tuple[Stat, float]] = {}
            if any(m in DISCOVERY_METRICS for m in spec.metrics):
                t0 = time.perf_counter()
                stats, dumps = simulate_discovery(cfg, workers, dump_limit if dump else 0)
                dt = time.perf_counter() - t0
                for doc in dumps:
                    dump({"axis": spec.axis, "axis_value": v, "series": spec.series, "series_value": sv, **doc})
                for m in spec.metrics:
                    if m in DISCOVERY_METRICS:
                        results[m] = (stats[m], dt)
            for m in spec.metrics:
                if m not in results:
                    t0 = time.perf_counter()
                    results[m] = (outage_metric(m, cfg), time.perf_counter() - t0)
            for m in spec.metrics:
                st, dt = results[m]
                rows.append(
                    SweepRow(
                        axis=float(v),
                        series=None if sv is None else float(sv),
                        metric=m,
                        value=st.value,
                        std_err=st.std_err,
                        samples=st.samples,
                        wall_time_s=round(dt, 3) if timing else 0.0,
                    )
                )
    return rows


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def emit_csv(rows: Iterable[SweepRow], path) -> None:
    """Write ``rows`` as CSV with a fixed header; ``path`` may be ``'-'`` for
    standard output or an open text stream."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow(
            [_fmt(r.axis), _fmt(r.series), r.metric, _fmt(r.value), _fmt(r.std_err), str(r.samples), _fmt(r.wall_time_s)]
        )
    text = buf.getvalue()
    if path == "-":
        path = sys.stdout
    if hasattr(path, "write"):
        path.write(text)
        return
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def read_csv(path) -> list[SweepRow]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_HEADER:
            raise ValueError(f"unexpected header in {path}: {header}")
        return [
            SweepRow(
                axis=float(a),
                series=float(s) if s else None,
                metric=m,
                value=float(v),
                std_err=float(e),
                samples=int(n),
                wall_time_s=float(t),
            )
            for a, s, m, v, e, n, t in reader
        ]


# ------------------------------------------------------------------ presets


def _modes(kind: str, modes: Sequence[str]) -> tuple[str, ...]:
    return tuple(f"{kind}_{m}" for m in modes)


def preset(name: str, trials: int = 100_000, seed: int = 0, **overrides) -> SweepSpec:
    """Figure presets built on the parameter-table defaults.

    ``fig2``/``fig3`` discovery failure and transmission savings versus N_D;
    ``fig5`` D2D outage versus alpha per channel count at r/R = 0.25;
    ``fig6`` the same at 15 channels per radius ratio; ``fig7`` macro outage
    versus alpha per channel count (``fig7r`` per radius ratio);
    ``fig8`` the D2D/macro trade-off at 10 channels with all three estimate
    modes; ``fig9``/``fig10`` power savings and hop count versus N_D.
    """
    modes = overrides.pop("modes", None)
    base = SimConfig(trials=trials, seed=seed)
    n_d = (0, 2, 5, 10, 15, 20)
    both = ("statistical", "perfect")
    all_modes = ("perfect", "statistical", "truncated")
    if name in ("fig2", "fig3", "fig9", "fig10"):
        metrics = {
            "fig2": ("p_fail_ni", "p_fail_no_ni", "p_fail_ni_channel", "p_fail_no_ni_channel"),
            "fig3": ("t_save", "t_save_channel", "T_ni", "T_no_ni"),
            "fig9": ("p_save",),
            "fig10": ("n_hops",),
        }[name]
        spec = dict(base=base.replace(cells=7, N_C=30), axis="N_D", values=n_d, metrics=metrics,
                    series="alpha", series_values=(2.0, 3.0, 4.0))
    elif name == "fig5":
        spec = dict(base=base.replace(cells=1), axis="alpha", values=ALPHA_GRID,
                    metrics=_modes("p_out_d2d_analytical", modes or both) + _modes("p_out_d2d_simulated", modes or both),
                    series="N_C", series_values=(1, 5, 15))
    elif name == "fig6":
        spec = dict(base=base.replace(cells=1, N_C=15), axis="alpha", values=ALPHA_GRID,
                    metrics=_modes("p_out_d2d_analytical", modes or both),
                    series="r_over_R", series_values=(0.1, 0.15, 0.2, 0.25))
    elif name == "fig7":
        spec = dict(base=base.replace(cells=1), axis="alpha", values=ALPHA_GRID,
                    metrics=_modes("p_out_macro_simulated", modes or both),
                    series="N_C", series_values=(1, 5, 15))
    elif name == "fig7r":
        spec = dict(base=base.replace(cells=1, N_C=15), axis="alpha", values=ALPHA_GRID,
                    metrics=_modes("p_out_macro_simulated", modes or both),
                    series="r_over_R", series_values=(0.1, 0.15, 0.2, 0.25))
    elif name == "fig8":
        spec = dict(base=base.replace(cells=1, N_C=10), axis="alpha", values=ALPHA_GRID,
                    metrics=_modes("p_out_d2d_analytical", modes or all_modes)
                    + _modes("p_out_macro_simulated", modes or all_modes))
    else:
        raise ConfigError("preset", f"unknown preset {name!r}; choose from {PRESETS}")
    spec["base"] = spec["base"].replace(**overrides) if overrides else spec["base"]
    return SweepSpec(**spec)


PRESETS = ("fig2", "fig3", "fig5", "fig6", "fig7", "fig7r", "fig8", "fig9", "fig10")


# -------------------------------------------------------------- spec files


def config_from_dict(d: dict, base: Optional[SimConfig] = None) -> SimConfig:
    """Build a :class:`SimConfig` from JSON-style fields; ``radio`` takes the
    dB/dBm keys of :meth:`RadioParams.from_db`."""
    base = base or SimConfig()
    d = dict(d)
    known = {f.name for f in dataclasses.fields(SimConfig)}
    for k in d:
        if k not in known:
            raise ConfigError(k, "unknown configuration field")
    radio = d.pop("radio", None)
    if radio is not None:
        allowed = set(inspect.signature(RadioParams.from_db).parameters)
        for k in radio:
            if k not in allowed:
                raise ConfigError(f"radio.{k}", "unknown radio field")
        merged = {**base.radio.to_db(), **radio}
        try:
            d["radio"] = RadioParams.from_db(**merged)
        except ValueError as exc:
            raise ConfigError("radio", str(exc)) from None
    try:
        return dataclasses.replace(base, **d)
    except TypeError as exc:
        raise ConfigError("config", str(exc)) from None


def spec_from_dict(d: dict) -> SweepSpec:
    for key in ("axis", "values", "metrics"):
        if key not in d:
            raise ConfigError(key, "missing")
    base = config_from_dict(d.get("base", {}))
    series = d.get("series")
    series_name, series_values = None, ()
    if isinstance(series, dict):
        series_name = series.get("name")
        series_values = tuple(series.get("values", ()))
    elif series is not None:
        raise ConfigError("series", "expected an object with 'name' and 'values'")
    return SweepSpec(
        base=base,
        axis=d["axis"],
        values=tuple(d["values"]),
        metrics=tuple(d["metrics"]),
        series=series_name,
        series_values=series_values,
        outputs=d.get("outputs"),
    )


def load_spec(path) -> SweepSpec:
    try:
        with open(path) as fh:
            d = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError("spec", f"{path}: invalid JSON ({exc})") from None
    return spec_from_dict(d)
