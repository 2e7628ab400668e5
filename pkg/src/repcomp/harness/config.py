"""Experiment configuration with flat JSON round-tripping."""

import json
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Sequence

from ..errors import SchemaError

SCHEME_NAMES = ("repcomp", "channelcomp_repeat", "digital_aircomp",
                "bit_slicing")
GRID_KINDS = ("snr", "fading", "nodes")
BUILDERS = ("auto", "optimizer", "amplitude_split")


@dataclass
class SchemeSpec:
    """One simulated scheme at a fixed slot count."""

    scheme: str
    L: int = 1
    alpha: float = 10.0

    def __post_init__(self):
        if self.scheme not in SCHEME_NAMES:
            raise SchemaError(f"unknown scheme {self.scheme!r}; "
                              f"expected one of {SCHEME_NAMES}")
        if self.L < 1:
            raise SchemaError("scheme L must be >= 1")

    def label(self):
        return f"{self.scheme}"


@dataclass
class GridSpec:
    """Sweep axis: SNR points, fading variances, or node counts."""

    kind: str
    points: List[float]
    sigma_z2: Optional[float] = None
    sigma_h2: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        if self.kind not in GRID_KINDS:
            raise SchemaError(f"grid kind must be one of {GRID_KINDS}")
        if not self.points:
            raise SchemaError("grid must have at least one point")
        if self.kind == "fading" and self.sigma_z2 is None:
            raise SchemaError("fading sweeps need a fixed sigma_z2")


@dataclass
class DesignSpec:
    """How designs are produced ahead of simulation."""

    sigma_z2: float = 0.01
    shared: Optional[bool] = None      # None: shared for symmetric kinds
    init: str = "ones"
    T: int = 30
    delta_stop: float = 1e-4
    eps_sdp: float = 1e-7
    delta_bb: float = 1e-6
    builder: str = "auto"
    autoshrink: bool = True
    min_sigma_z2: float = 1e-9
    bb_node_cap: int = 4000

    def __post_init__(self):
        if self.builder not in BUILDERS:
            raise SchemaError(f"builder must be one of {BUILDERS}")


@dataclass
class ExperimentConfig:
    """Full description of one Monte-Carlo experiment."""

    function_kind: str
    K: int
    Q: int
    schemes: List[SchemeSpec]
    grid: GridSpec
    trials: int = 1000
    seed: int = 0
    out: Optional[str] = None
    values: Optional[List[float]] = None
    design: DesignSpec = field(default_factory=DesignSpec)
    threads: int = 1
    cache_dir: Optional[str] = None

    def __post_init__(self):
        if self.trials < 1:
            raise SchemaError("trials must be >= 1")
        if not self.schemes:
            raise SchemaError("at least one scheme is required")

    @classmethod
    def from_dict(cls, raw) -> "ExperimentConfig":
        try:
            schemes = [SchemeSpec(**s) for s in raw["schemes"]]
            grid = GridSpec(**raw["grid"])
            design = DesignSpec(**raw.get("design", {}))
            keys = {k: v for k, v in raw.items()
                    if k not in ("schemes", "grid", "design")}
            return cls(schemes=schemes, grid=grid, design=design, **keys)
        except (KeyError, TypeError) as err:
            raise SchemaError(f"bad experiment config: {err}") from err

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))
