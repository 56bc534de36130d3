"""Session configuration: a JSON file naming the algebra, the rank, the
level, the check windows and the resource knobs.

Shape:

    {
      "algebra": "configs/sl2.json",
      "r": 1,
      "level": "1",
      "windows": [{"m0": [-2, 2], "m": [[-1, 1]], "states": ["vac", "e"],
                   "locality_bound": 8, "depth": 2}],
      "seed": 0, "samples": 20, "budget": 4000000,
      "cache": {"max_entries": 200000},
      "checks": null, "output": "report.json", "jobs": 1
    }

Rationals are strings ("p/q") end to end; window states use the state
reference grammar of :meth:`torva.vertexops.Session.parse_state`.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Optional

from .fields import ModeWindow
from .liecore import LieAlgebraSpec, SpecFormatError, frac
from .vertexops import Session

DEFAULT_WINDOW = {"m0": [-2, 2], "m": None, "states": ["vac"], "locality_bound": 8, "depth": 2}


@dataclass
class SessionConfig:
    algebra_path: str
    r: int
    level: str
    windows: list
    seed: int = 0
    samples: int = 20
    budget: int = 4_000_000
    cache_entries: int = 200_000
    checks: Optional[list] = None
    output: Optional[str] = None
    jobs: int = 1
    base_dir: str = "."
    depth: int = 2              # window defaults when a window omits them
    locality_bound: int = 8

    @classmethod
    def from_file(cls, path: str) -> "SessionConfig":
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise SpecFormatError(
                    f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}") from exc
        return cls.from_json(data, base_dir=os.path.dirname(os.path.abspath(path)))

    @classmethod
    def from_json(cls, data: dict, base_dir: str = ".") -> "SessionConfig":
        try:
            algebra = data["algebra"]
            r = int(data["r"])
            level = str(data.get("level", "0"))
        except KeyError as exc:
            raise SpecFormatError(f"config missing field {exc}") from exc
        if r < 1:
            raise SpecFormatError("rank r must be >= 1")
        try:
            frac(level)
        except (ValueError, ZeroDivisionError) as exc:
            raise SpecFormatError(f"level {level!r} is not a rational") from exc
        windows = data.get("windows") or [dict(DEFAULT_WINDOW)]
        if not isinstance(windows, list) or not windows:
            raise SpecFormatError("'windows' must be a nonempty list")
        cache = data.get("cache", {})
        return cls(
            algebra_path=algebra, r=r, level=level, windows=windows,
            seed=int(data.get("seed", 0)), samples=int(data.get("samples", 20)),
            budget=int(data.get("budget", 4_000_000)),
            cache_entries=int(cache.get("max_entries", 200_000)),
            checks=data.get("checks"), output=data.get("output"),
            jobs=int(data.get("jobs", 1)), base_dir=base_dir,
            depth=int(data.get("depth", 2)),
            locality_bound=int(data.get("locality_bound", 8)))

    def resolve(self, path: str) -> str:
        return path if os.path.isabs(path) else os.path.join(self.base_dir, path)

    def build_session(self) -> Session:
        spec = LieAlgebraSpec.from_file(self.resolve(self.algebra_path))
        return Session(spec, self.r, self.level, cache_entries=self.cache_entries)

    def build_windows(self, session: Session) -> list:
        out = []
        for w in self.windows:
            m0 = w.get("m0", [-2, 2])
            m_box = w.get("m") or [[-1, 1]] * self.r
            if len(m_box) != self.r:
                raise SpecFormatError(f"window box rank {len(m_box)} != r={self.r}")
            states = [session.parse_state(s) for s in w.get("states", ["vac"])]
            out.append(ModeWindow(m0, m_box, states,
                                  locality_bound=int(w.get("locality_bound", self.locality_bound)),
                                  depth=int(w.get("depth", self.depth))))
        return out

    def digest_payload(self) -> dict:
        return {"algebra": self.algebra_path, "r": self.r, "level": self.level,
                "windows": self.windows, "seed": self.seed, "samples": self.samples,
                "checks": self.checks}
