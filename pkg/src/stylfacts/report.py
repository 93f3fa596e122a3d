"""Analysis pipeline: configuration, ingestion, fact execution, emission.

One `analyze` run reads OHLCV CSVs, runs the configured fact set per asset,
and writes per-asset JSON reports, per-curve CSV files, and a cross-asset
summary matrix.  Everything written is a pure function of (config, input
files): reports carry no wall-clock timestamps, floats go through repr
round-tripping, JSON keys are sorted, and each asset's random streams are
seeded from the master seed and the asset id (never from processing order),
so reruns and different worker counts produce identical bytes.

Failures are scoped to the asset that caused them: a bad file yields a
summary row with an error and the run continues.  Only an invalid config
aborts the whole run.
"""

from __future__ import annotations

import concurrent.futures
import hashlib
import json
import math
import os
import re
import tempfile
from dataclasses import dataclass, field, fields as dc_fields
from enum import Enum
from typing import Optional

import numpy as np

from . import __version__
from .errors import StylfactsError
from .facts import FACT_LABELS, FactConfig, FactId, run_all_facts
from .series import SamplingGrid, read_csv, validate_and_gapfill
from .volatility import VolatilityWindow, default_window, rolling_volatility

ALL_FACTS = tuple(f.value for f in FactId)

# FactConfig fields a config file may override, per fact or globally
_TUNABLE = tuple(f.name for f in dc_fields(FactConfig)
                 if f.name not in ("seed", "step_seconds"))


@dataclass(frozen=True)
class AssetInput:
    asset_id: str
    path: str

    def __post_init__(self):
        if not self.asset_id:
            raise ValueError("asset id must be non-empty")


@dataclass(frozen=True)
class RunConfig:
    """Mirrors the JSON config file; see load_config for the key set."""
    assets: tuple
    out_dir: str
    step_seconds: int = 86400
    facts: tuple = ALL_FACTS
    fact_params: dict = field(default_factory=dict)
    seed: int = 0
    gap_policy: str = "drop"
    workers: int = 1

    def __post_init__(self):
        seen = set()
        for a in self.assets:
            if a.asset_id in seen:
                raise ValueError(f"duplicate asset id {a.asset_id!r}")
            seen.add(a.asset_id)
        for f in self.facts:
            FactId(f)
        if self.gap_policy not in ("drop", "ffill"):
            raise ValueError(f"unknown gap policy {self.gap_policy!r}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.step_seconds <= 0:
            raise ValueError("step_seconds must be positive")
        for k in self.fact_params:
            if k not in _TUNABLE:
                raise ValueError(f"unknown fact parameter {k!r}")


def load_config(path: str) -> RunConfig:
    """Parse and validate a JSON config file.

    Keys: assets (list of {"id", "path"}), out_dir, step_seconds, facts,
    fact_params, seed, gap_policy, workers.  STYLFACTS_SEED in the
    environment overrides the seed.  Asset paths are resolved relative to
    the config file's directory and must exist.
    """
    with open(path, "r", encoding="utf-8") as f:
        raw = json.load(f)
    if not isinstance(raw, dict):
        raise ValueError("config root must be a JSON object")
    known = {"assets", "out_dir", "step_seconds", "facts", "fact_params",
             "seed", "gap_policy", "workers"}
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    if "assets" not in raw or "out_dir" not in raw:
        raise ValueError("config must set 'assets' and 'out_dir'")
    base = os.path.dirname(os.path.abspath(path))
    assets = []
    for entry in raw["assets"]:
        if not isinstance(entry, dict) or "id" not in entry or "path" not in entry:
            raise ValueError("each asset needs 'id' and 'path'")
        p = entry["path"]
        if not os.path.isabs(p):
            p = os.path.join(base, p)
        if not os.path.exists(p):
            raise ValueError(f"asset file not found: {p}")
        assets.append(AssetInput(asset_id=str(entry["id"]), path=p))
    out_dir = raw["out_dir"]
    if not os.path.isabs(out_dir):
        out_dir = os.path.join(base, out_dir)
    seed = int(raw.get("seed", 0))
    env_seed = os.environ.get("STYLFACTS_SEED")
    if env_seed is not None:
        seed = int(env_seed)
    return RunConfig(
        assets=tuple(assets),
        out_dir=out_dir,
        step_seconds=int(raw.get("step_seconds", 86400)),
        facts=tuple(raw.get("facts", ALL_FACTS)),
        fact_params=dict(raw.get("fact_params", {})),
        seed=seed,
        gap_policy=str(raw.get("gap_policy", "drop")),
        workers=int(raw.get("workers", 1)),
    )


def asset_seed(master_seed: int, asset_id: str) -> int:
    """Stable per-asset seed: a function of (master seed, asset id) only,
    so adding or removing assets never shifts another asset's streams."""
    digest = hashlib.sha256(asset_id.encode("utf-8")).digest()
    tag = int.from_bytes(digest[:8], "little")
    ss = np.random.SeedSequence([master_seed, tag])
    return int(ss.generate_state(1, np.uint64)[0])


def fact_config_for(config: RunConfig, asset_id: str) -> FactConfig:
    return FactConfig(seed=asset_seed(config.seed, asset_id),
                      step_seconds=config.step_seconds, **config.fact_params)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

REPORT_SCHEMA_VERSION = 1

_VERDICT_SCHEMA = {
    "type": "object",
    "required": ["label", "status", "metrics", "notes", "curves"],
    "additionalProperties": False,
    "properties": {
        "label": {"type": "string"},
        "status": {"enum": ["supported", "not_supported", "inconclusive"]},
        "metrics": {
            "type": "object",
            "additionalProperties": {"type": ["number", "integer", "boolean", "null"]},
        },
        "notes": {"type": "array", "items": {"type": "string"}},
        "curves": {
            "type": "object",
            "additionalProperties": {"type": "string"},
        },
    },
}

_SKIPPED_SCHEMA = {
    "type": "object",
    "required": ["status", "reason"],
    "additionalProperties": False,
    "properties": {
        "status": {"const": "skipped"},
        "reason": {"type": "string"},
    },
}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "$id": "stylfacts-asset-report",
    "type": "object",
    "required": ["schema_version", "tool_version", "asset_id", "data_summary",
                 "config", "facts"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": REPORT_SCHEMA_VERSION},
        "tool_version": {"type": "string"},
        "asset_id": {"type": "string"},
        "data_summary": {
            "type": "object",
            "required": ["n_bars", "n_returns", "start", "end", "step_seconds",
                         "volume_present_fraction", "gaps"],
            "additionalProperties": False,
            "properties": {
                "n_bars": {"type": "integer"},
                "n_returns": {"type": "integer"},
                "start": {"type": "integer"},
                "end": {"type": "integer"},
                "step_seconds": {"type": "integer"},
                "volume_present_fraction": {"type": "number"},
                "gaps": {
                    "type": "object",
                    "required": ["n_expected", "n_missing", "n_filled", "policy"],
                    "additionalProperties": False,
                    "properties": {
                        "n_expected": {"type": "integer"},
                        "n_missing": {"type": "integer"},
                        "n_filled": {"type": "integer"},
                        "policy": {"type": "string"},
                    },
                },
            },
        },
        "config": {
            "type": "object",
            "required": ["seed", "asset_seed", "facts", "fact_params",
                         "gap_policy", "step_seconds"],
            "additionalProperties": False,
            "properties": {
                "seed": {"type": "integer"},
                "asset_seed": {"type": "integer"},
                "facts": {"type": "array", "items": {"type": "string"}},
                "fact_params": {"type": "object"},
                "gap_policy": {"type": "string"},
                "step_seconds": {"type": "integer"},
            },
        },
        "facts": {
            "type": "object",
            "additionalProperties": False,
            "patternProperties": {
                "^F([1-9]|1[01])$": {"oneOf": [_VERDICT_SCHEMA, _SKIPPED_SCHEMA]},
            },
        },
    },
}


def _jsonable(obj):
    """Python/numpy scalars to JSON-safe values; non-finite floats to null."""
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return bool(obj) if obj is not None else None
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, str):
        return obj
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _atomic_write_bytes(path: str, data: bytes) -> None:
    d = os.path.dirname(path)
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def write_json(path: str, obj) -> None:
    data = json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"
    _atomic_write_bytes(path, data.encode("utf-8"))


def _fmt_cell(v) -> str:
    if isinstance(v, (np.integer, int)) and not isinstance(v, bool):
        return str(int(v))
    f = float(v)
    if math.isnan(f):
        return ""
    return repr(f)


def write_curve_csv(path: str, columns: dict) -> None:
    """One curve as CSV; column order follows the dict."""
    names = list(columns)
    arrays = [np.asarray(columns[k]) for k in names]
    n = len(arrays[0])
    if any(len(a) != n for a in arrays):
        raise ValueError("curve columns differ in length")
    lines = [",".join(names)]
    for i in range(n):
        lines.append(",".join(_fmt_cell(a[i]) for a in arrays))
    _atomic_write_bytes(path, ("\n".join(lines) + "\n").encode("utf-8"))


_SAFE_NAME = re.compile(r"[^A-Za-z0-9._-]+")


def _safe_name(name: str) -> str:
    out = _SAFE_NAME.sub("_", name)
    return out or "_"


# ---------------------------------------------------------------------------
# Per-asset analysis
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AssetOutcome:
    asset_id: str
    report: Optional[dict]          # None on hard failure
    files: tuple                    # (relative path, bytes-writer payload) pairs
    error: Optional[str] = None
    statuses: dict = field(default_factory=dict)


def _analyze_one(config: RunConfig, asset: AssetInput) -> AssetOutcome:
    """Pure computation for one asset: no file is written here."""
    try:
        series = read_csv(asset.path)
        series = validate_and_gapfill(series, SamplingGrid(step=config.step_seconds),
                                      policy=config.gap_policy)
        fcfg = fact_config_for(config, asset.asset_id)
        verdicts = run_all_facts(series, fcfg, facts=config.facts)
    except StylfactsError as e:
        return AssetOutcome(asset_id=asset.asset_id, report=None, files=(),
                            error=f"{type(e).__name__}: {e}",
                            statuses={f: "skipped" for f in ALL_FACTS})

    safe = _safe_name(asset.asset_id)
    files = []
    facts_obj = {}
    statuses = {}
    for fact in FactId:
        key = fact.value
        if key not in config.facts:
            facts_obj[key] = {"status": "skipped", "reason": "not in configured fact set"}
            statuses[key] = "skipped"
            continue
        v = verdicts[fact]
        curve_paths = {}
        for cname, cols in v.curves.items():
            rel = f"{safe}/{key}_{_safe_name(cname)}.csv"
            curve_paths[cname] = rel
            files.append((rel, dict(cols)))
        facts_obj[key] = {
            "label": FACT_LABELS[fact],
            "status": v.status.value,
            "metrics": _jsonable(v.metrics),
            "notes": [str(x) for x in v.notes],
            "curves": curve_paths,
        }
        statuses[key] = v.status.value

    # rolling-volatility overview for plotting, all three estimators on the
    # day-scale default window
    w = default_window(config.step_seconds)
    vol_cols = {"timestamp": None}
    try:
        for kind in ("basic", "parkinson", "rogers_satchell"):
            vs = rolling_volatility(series, kind, VolatilityWindow(w, 1), scale="std")
            vol_cols[kind] = vs.values
            vol_cols["timestamp"] = vs.timestamps
        files.append((f"{safe}/volatility.csv", vol_cols))
    except StylfactsError:
        pass

    gr = series.gap_report
    report = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "tool_version": __version__,
        "asset_id": asset.asset_id,
        "data_summary": {
            "n_bars": len(series),
            "n_returns": len(series) - 1,
            "start": int(series.timestamps[0]),
            "end": int(series.timestamps[-1]),
            "step_seconds": config.step_seconds,
            "volume_present_fraction": float(series.volume_present_fraction()),
            "gaps": {
                "n_expected": gr.n_expected,
                "n_missing": gr.n_missing,
                "n_filled": gr.n_filled,
                "policy": gr.policy,
            },
        },
        "config": {
            "seed": config.seed,
            "asset_seed": asset_seed(config.seed, asset.asset_id),
            "facts": list(config.facts),
            "fact_params": _jsonable(config.fact_params),
            "gap_policy": config.gap_policy,
            "step_seconds": config.step_seconds,
        },
        "facts": facts_obj,
    }
    return AssetOutcome(asset_id=asset.asset_id, report=report, files=tuple(files),
                        statuses=statuses)


@dataclass(frozen=True)
class RunResult:
    out_dir: str
    outcomes: tuple
    summary_path: str

    @property
    def failed_assets(self) -> tuple:
        return tuple(o.asset_id for o in self.outcomes if o.error is not None)

    @property
    def ok(self) -> bool:
        return not self.failed_assets


def _write_summary(path: str, rows: list) -> None:
    lines = ["asset," + ",".join(ALL_FACTS) + ",error"]
    for asset_id, statuses, error in rows:
        cells = [statuses.get(f, "skipped") for f in ALL_FACTS]
        lines.append(",".join([asset_id] + cells + [error or ""]))
    _atomic_write_bytes(path, ("\n".join(lines) + "\n").encode("utf-8"))


def run_analyze(config: RunConfig) -> RunResult:
    """Analyze every configured asset and write all outputs under out_dir.

    Assets are computed concurrently (config.workers threads); writing
    happens afterwards on the calling thread in asset order, which makes
    the output bytes independent of scheduling.
    """
    if config.workers == 1 or len(config.assets) <= 1:
        outcomes = [_analyze_one(config, a) for a in config.assets]
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=config.workers) as ex:
            outcomes = list(ex.map(lambda a: _analyze_one(config, a), config.assets))

    outcomes.sort(key=lambda o: o.asset_id)
    os.makedirs(config.out_dir, exist_ok=True)
    for o in outcomes:
        if o.report is None:
            continue
        for rel, cols in o.files:
            write_curve_csv(os.path.join(config.out_dir, rel), cols)
        write_json(os.path.join(config.out_dir, f"{_safe_name(o.asset_id)}.json"),
                   o.report)
    summary_path = os.path.join(config.out_dir, "summary.csv")
    _write_summary(summary_path, [(o.asset_id, o.statuses, o.error) for o in outcomes])
    return RunResult(out_dir=config.out_dir, outcomes=tuple(outcomes),
                     summary_path=summary_path)


def merge_reports(out_dir: str) -> str:
    """Rebuild summary.csv from the asset report JSONs found in out_dir."""
    rows = []
    for name in sorted(os.listdir(out_dir)):
        if not name.endswith(".json"):
            continue
        with open(os.path.join(out_dir, name), "r", encoding="utf-8") as f:
            rep = json.load(f)
        if not isinstance(rep, dict) or rep.get("schema_version") != REPORT_SCHEMA_VERSION:
            continue
        statuses = {k: v.get("status", "skipped") for k, v in rep.get("facts", {}).items()}
        rows.append((rep["asset_id"], statuses, None))
    rows.sort(key=lambda r: r[0])
    summary_path = os.path.join(out_dir, "summary.csv")
    _write_summary(summary_path, rows)
    return summary_path
