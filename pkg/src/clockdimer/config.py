"""Run configuration: INI-style ``key = value`` text with sections.

Grammar (every key optional, defaults shown)::

    [dimer]
    D1_GHz = 21.0
    E1_GHz = 1.9
    D2_GHz = 16.5
    E2_GHz = 2.6
    g = 2.0
    J_perp_GHz = 0.1
    J_zz_MHz = 50

    [drive]
    amplitude_mT = 1.0

    [sweep]
    jzz_MHz = 0, 50, 100
    t2_us = 0.1, 0.3, 1, 3, 10, 30, 100, inf

    [levels]
    monomer_range_mT = 500
    dimer_range_mT = 50
    steps = 201

    [run]
    seed = 0

Lists are comma separated; ``inf`` is accepted wherever a T2 is expected.
"""

from __future__ import annotations

import configparser
import hashlib
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from .model import DimerParams, ExchangeParams, MonomerParams


def _floats(text: str) -> tuple[float, ...]:
    items = [s.strip() for s in text.split(",")]
    return tuple(float(s) for s in items if s)


@dataclass(frozen=True)
class RunConfig:
    D1: float = 21.0
    E1: float = 1.9
    D2: float = 16.5
    E2: float = 2.6
    g: float = 2.0
    J_perp: float = 0.1  # GHz
    J_zz_MHz: float = 50.0
    amplitude_mT: float = 1.0
    jzz_grid_MHz: tuple[float, ...] = (0.0, 50.0, 100.0)
    t2_grid_us: tuple[float, ...] = (0.1, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0, math.inf)
    monomer_range_mT: float = 500.0
    dimer_range_mT: float = 50.0
    level_steps: int = 201
    seed: int = 0
    source: str = field(default="<defaults>", compare=False)

    def __post_init__(self):
        for name in ("D1", "D2", "amplitude_mT", "monomer_range_mT", "dimer_range_mT"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("E1", "E2"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.level_steps < 3:
            raise ValueError("levels.steps must be >= 3")
        if any(not t > 0 for t in self.t2_grid_us):
            raise ValueError("T2 values must be positive (use inf for no dephasing)")

    def dimer(self, J_zz_MHz: float | None = None) -> DimerParams:
        jzz = self.J_zz_MHz if J_zz_MHz is None else J_zz_MHz
        return DimerParams(
            MonomerParams(self.D1, self.E1, self.g),
            MonomerParams(self.D2, self.E2, self.g),
            ExchangeParams(self.J_perp, jzz * 1e-3),
        )

    def monomer(self, spin: int = 1) -> MonomerParams:
        return MonomerParams(self.D1, self.E1, self.g) if spin == 1 else MonomerParams(self.D2, self.E2, self.g)

    def canonical(self) -> str:
        d = asdict(self)
        d.pop("source")
        return "\n".join(f"{k}={d[k]!r}" for k in sorted(d))

    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:16]

    def override(self, **kwargs) -> RunConfig:
        return replace(self, **{k: v for k, v in kwargs.items() if v is not None})

    @classmethod
    def from_text(cls, text: str, source: str = "<string>") -> RunConfig:
        cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        cp.optionxform = str
        cp.read_string(text)
        kw: dict = {"source": source}

        def take(section, key, attr, conv=float):
            if cp.has_option(section, key):
                kw[attr] = conv(cp.get(section, key))

        take("dimer", "D1_GHz", "D1")
        take("dimer", "E1_GHz", "E1")
        take("dimer", "D2_GHz", "D2")
        take("dimer", "E2_GHz", "E2")
        take("dimer", "g", "g")
        take("dimer", "J_perp_GHz", "J_perp")
        take("dimer", "J_zz_MHz", "J_zz_MHz")
        take("drive", "amplitude_mT", "amplitude_mT")
        take("sweep", "jzz_MHz", "jzz_grid_MHz", _floats)
        take("sweep", "t2_us", "t2_grid_us", _floats)
        take("levels", "monomer_range_mT", "monomer_range_mT")
        take("levels", "dimer_range_mT", "dimer_range_mT")
        take("levels", "steps", "level_steps", int)
        take("run", "seed", "seed", int)

        known = {
            "dimer": {"D1_GHz", "E1_GHz", "D2_GHz", "E2_GHz", "g", "J_perp_GHz", "J_zz_MHz"},
            "drive": {"amplitude_mT"},
            "sweep": {"jzz_MHz", "t2_us"},
            "levels": {"monomer_range_mT", "dimer_range_mT", "steps"},
            "run": {"seed"},
        }
        for section in cp.sections():
            if section not in known:
                raise ValueError(f"{source}: unknown section [{section}]")
            extra = set(cp.options(section)) - known[section]
            if extra:
                raise ValueError(f"{source}: unknown keys in [{section}]: {', '.join(sorted(extra))}")
        return cls(**kw)

    @classmethod
    def from_file(cls, path: str | Path) -> RunConfig:
        path = Path(path)
        return cls.from_text(path.read_text(encoding="utf-8"), source=str(path))
