"""Atomic result files and YAML experiment configs with line-precise errors."""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import yaml

from ..config import GameParams
from ..coordinator import IntersectionLayout, PathIntent, pair_conflicts
from ..payoffs import DriverProfile
from .scenarios import DISTURBANCE_SD, AgentSpec, ScenarioSpec

FAMILIES = ("run", "table1", "fig7", "uniform", "four-av")


# -- atomic output -------------------------------------------------------------

def atomic_write_text(path, text: str) -> Path:
    """Write to a sibling temp file, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _cell(v):
    if isinstance(v, float):
        return repr(round(v, 9))
    if v is None:
        return ""
    return v


def write_csv(path, rows: list, columns: Optional[list] = None) -> Path:
    if columns is None:
        columns = []
        for row in rows:
            columns.extend(k for k in row if k not in columns)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: _cell(row.get(k)) for k in columns})
    return atomic_write_text(path, buf.getvalue())


def to_jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if hasattr(obj, "item"):            # numpy scalars
        return obj.item()
    if isinstance(obj, float) and obj != obj:
        return None
    return obj


def write_json(path, obj) -> Path:
    text = json.dumps(to_jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"
    return atomic_write_text(path, text)


# -- config --------------------------------------------------------------------

class ConfigError(ValueError):
    def __init__(self, source: str, line: Optional[int], message: str):
        self.source, self.line = source, line
        where = f"{source}:{line}" if line else source
        super().__init__(f"{where}: {message}")


@dataclass
class ExperimentConfig:
    family: Optional[str] = None
    seed: int = 0
    count: Optional[int] = None
    mu: Optional[tuple] = None
    jobs: Optional[int] = None
    out: Optional[str] = None
    params: GameParams = field(default_factory=GameParams)
    profile: DriverProfile = field(default_factory=DriverProfile)
    scenario: Optional[ScenarioSpec] = None
    params_keys: frozenset = frozenset()    # params set explicitly in the file

    def resolved(self) -> dict:
        """Plain-data view embedded in summaries for provenance."""
        d = {"family": self.family, "seed": self.seed, "count": self.count,
             "mu": list(self.mu) if self.mu is not None else None,
             "params": to_jsonable(self.params), "profile": to_jsonable(self.profile)}
        if self.scenario is not None:
            d["scenario"] = to_jsonable(self.scenario)
        return d


def _line_map(node, path=(), lines=None) -> dict:
    """path tuple -> 1-based source line of the key (or item) that introduced it."""
    lines = {} if lines is None else lines
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            p = path + (str(k.value),)
            lines[p] = k.start_mark.line + 1
            _line_map(v, p, lines)
    elif isinstance(node, yaml.SequenceNode):
        for i, v in enumerate(node.value):
            p = path + (i,)
            lines[p] = v.start_mark.line + 1
            _line_map(v, p, lines)
    return lines


_TOP = {"family", "seed", "count", "mu", "jobs", "out", "params", "profile", "scenario"}
_SCENARIO = {"agents", "mode", "dt", "timeout", "disturbance_sd", "layout", "sample_every", "name"}
_AGENT = {"id", "arm", "speed", "accel", "d0", "tts", "maneuver", "sigma", "length", "width",
          "profile"}


class _Reader:
    def __init__(self, source: str, lines: dict):
        self.source, self.lines = source, lines

    def fail(self, path, message):
        p = tuple(path)
        while p and p not in self.lines:
            p = p[:-1]
        raise ConfigError(self.source, self.lines.get(p), message)

    def mapping(self, obj, path, allowed=None):
        if obj is None:
            return {}
        if not isinstance(obj, dict):
            self.fail(path, f"{'.'.join(map(str, path)) or 'document'} must be a mapping")
        if allowed is not None:
            for k in obj:
                if k not in allowed:
                    self.fail(tuple(path) + (k,), f"unknown key {k!r}")
        return obj

    def build(self, cls, obj, path, extra=None):
        obj = dict(self.mapping(obj, path, {f.name for f in dataclasses.fields(cls)}))
        obj.update(extra or {})
        for k, v in obj.items():
            if isinstance(v, list):
                obj[k] = tuple(v)
        try:
            return cls(**obj)
        except (TypeError, ValueError) as exc:
            bad = next((k for k in obj if k in str(exc)), None)
            self.fail(tuple(path) + ((bad,) if bad else ()), str(exc))


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        raise ConfigError(source, mark.line + 1 if mark else None,
                          f"YAML syntax error: {exc.problem or exc}") from None
    rd = _Reader(source, _line_map(node) if node is not None else {})
    data = rd.mapping(data, (), _TOP)

    cfg = ExperimentConfig()
    fam = data.get("family")
    if fam is not None and fam not in FAMILIES:
        rd.fail(("family",), f"unknown family {fam!r}; expected one of {FAMILIES}")
    cfg.family = fam
    for key in ("seed", "count", "jobs"):
        v = data.get(key)
        if v is not None and (not isinstance(v, int) or isinstance(v, bool) or v < 0):
            rd.fail((key,), f"{key} must be a non-negative integer")
        if v is not None:
            setattr(cfg, key, v)
    if cfg.jobs == 0:
        rd.fail(("jobs",), "jobs must be at least 1")
    mu = data.get("mu")
    if mu is not None:
        mu = mu if isinstance(mu, list) else [mu]
        if not all(isinstance(m, (int, float)) and not isinstance(m, bool) and m >= 0 for m in mu):
            rd.fail(("mu",), "mu must be a non-negative number or a list of them")
        cfg.mu = tuple(mu)
    if data.get("out") is not None:
        cfg.out = str(data["out"])
    cfg.params = rd.build(GameParams, data.get("params"), ("params",))
    cfg.params_keys = frozenset(data.get("params") or ())
    cfg.profile = rd.build(DriverProfile, data.get("profile"), ("profile",))
    if "scenario" in data:
        cfg.scenario = _scenario(rd, data["scenario"], cfg)
    if cfg.family == "run" and cfg.scenario is None:
        rd.fail(("family",), "family 'run' needs a scenario section")
    return cfg


def _scenario(rd: _Reader, obj, cfg: ExperimentConfig) -> ScenarioSpec:
    path = ("scenario",)
    obj = rd.mapping(obj, path, _SCENARIO)
    agents_raw = obj.get("agents")
    if not isinstance(agents_raw, list) or not agents_raw:
        rd.fail(path + ("agents",), "scenario.agents must be a non-empty list")
    agents = []
    for i, a in enumerate(agents_raw):
        ap = path + ("agents", i)
        a = dict(rd.mapping(a, ap, _AGENT))
        for req in ("id", "arm", "speed"):
            if req not in a:
                rd.fail(ap, f"agent is missing {req!r}")
        prof = cfg.profile
        if "profile" in a:
            prof = rd.build(DriverProfile, {**dataclasses.asdict(cfg.profile), **(a.pop("profile") or {})},
                            ap + ("profile",))
        if "sigma" in a:
            try:
                prof = prof.with_sigma(a.pop("sigma"))
            except (TypeError, ValueError) as exc:
                rd.fail(ap + ("sigma",), str(exc))
        a["id"] = str(a["id"])
        try:
            PathIntent(a["arm"], a.get("maneuver", "Straight"))
        except ValueError as exc:
            rd.fail(ap + ("arm",), str(exc))
        try:
            agents.append(AgentSpec(profile=prof, **a))
        except (TypeError, ValueError) as exc:
            rd.fail(ap, str(exc))
    kw = {}
    for k in ("mode", "dt", "timeout", "disturbance_sd", "sample_every", "name"):
        if k in obj:
            kw[k] = obj[k]
    if "layout" in obj:
        kw["layout"] = rd.build(IntersectionLayout, obj["layout"], path + ("layout",))
    kw.setdefault("disturbance_sd", DISTURBANCE_SD)
    kw.setdefault("name", "run")
    try:
        spec = ScenarioSpec(tuple(agents), cfg.params, seed=cfg.seed, **kw)
    except (TypeError, ValueError) as exc:
        bad = next((k for k in kw if k in str(exc)), None)
        rd.fail(path + ((bad,) if bad else ()), str(exc))
    # geometry errors (e.g. two vehicles on one arm) surface here, not mid-run
    try:
        pair_conflicts(spec.layout, [PathIntent(a.arm, a.maneuver) for a in spec.agents])
    except ValueError as exc:
        rd.fail(path + ("agents",), str(exc))
    return spec


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(str(path), None, f"cannot read config: {exc.strerror or exc}") from None
    return parse_config(text, str(path))
