"""Environment configuration: schema, validation, serialization, defaults.

A config document is a JSON object (UTF-8, one per file) whose field names
match the dataclasses below. Physical rates are stored in per-second form;
the engine derives per-step coefficients from ``timestep_seconds``:

* per-step drift = ``fill_rate * timestep_seconds``
* per-step noise std = ``noise_std_per_sec * sqrt(timestep_seconds)``

so the same plant is described consistently at any control period.

Shipped synthetic configs live under ``configs/`` at the repository root
and are byte-for-byte the serialized output of :func:`default_config` for
each supported grid point (``synthetic-<n>-<m>-<delta>.json``).
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, IO, NamedTuple

__all__ = [
    "ConfigError",
    "Optimum",
    "ContainerParams",
    "EnvConfig",
    "load_config",
    "config_from_dict",
    "config_to_dict",
    "save_config",
    "fingerprint",
    "validate_reward_landscape",
    "timestep_warnings",
    "default_config",
    "default_config_name",
    "shipped_grid_points",
    "with_max_episode_steps",
]


class ConfigError(ValueError):
    """A config document is malformed or violates a declared invariant."""


class Optimum(NamedTuple):
    """One emptying-reward peak: center volume, height in (0, 1], width > 0."""

    volume: float
    height: float
    width: float


@dataclass(frozen=True)
class ContainerParams:
    """Per-container physical parameters.

    ``optima`` is ordered: the first entry is the ideal emptying volume and
    is the only one whose height is exactly 1.
    """

    name: str
    fill_rate: float           # volume units per second
    noise_std_per_sec: float   # volume units per sqrt(second)
    product_size: float        # volume units per product
    actuation_time: float      # seconds before the first product
    time_per_product: float    # seconds per product
    optima: tuple[Optimum, ...]

    @property
    def ideal_volume(self) -> float:
        """Volume of the ideal (height-1) optimum."""
        return self.optima[0].volume


@dataclass(frozen=True)
class EnvConfig:
    """Full environment description. Immutable after load; safe to share."""

    containers: tuple[ContainerParams, ...]
    pu_count: int
    max_volume: float
    timestep_seconds: float
    max_episode_steps: int
    reward_min: float
    reward_penalty: float
    initial_volume_range: tuple[float, float]

    @property
    def n(self) -> int:
        return len(self.containers)

    @property
    def m(self) -> int:
        return self.pu_count


# ---------------------------------------------------------------------------
# parsing / validation

def _require(d: dict, key: str, context: str) -> Any:
    if key not in d:
        raise ConfigError(f"{context}: missing field '{key}'")
    return d[key]


def _as_number(value: Any, field: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{field} must be a number (got {value!r})")
    return float(value)


def _as_int(value: Any, field: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{field} must be an integer (got {value!r})")
    return value


def _parse_container(d: Any, index: int) -> ContainerParams:
    context = f"containers[{index}]"
    if not isinstance(d, dict):
        raise ConfigError(f"{context} must be an object")
    name = _require(d, "name", context)
    if not isinstance(name, str) or not name:
        raise ConfigError(f"{context}: name must be a non-empty string")
    raw_optima = _require(d, "optima", context)
    if not isinstance(raw_optima, list):
        raise ConfigError(f"{context}: optima must be a list")
    optima = []
    for k, o in enumerate(raw_optima):
        if not isinstance(o, dict):
            raise ConfigError(f"{context}: optima[{k}] must be an object")
        optima.append(Optimum(
            volume=_as_number(_require(o, "volume", f"{context}.optima[{k}]"), f"{context}.optima[{k}].volume"),
            height=_as_number(_require(o, "height", f"{context}.optima[{k}]"), f"{context}.optima[{k}].height"),
            width=_as_number(_require(o, "width", f"{context}.optima[{k}]"), f"{context}.optima[{k}].width"),
        ))
    return ContainerParams(
        name=name,
        fill_rate=_as_number(_require(d, "fill_rate", context), f"{context}.fill_rate"),
        noise_std_per_sec=_as_number(_require(d, "noise_std_per_sec", context), f"{context}.noise_std_per_sec"),
        product_size=_as_number(_require(d, "product_size", context), f"{context}.product_size"),
        actuation_time=_as_number(_require(d, "actuation_time", context), f"{context}.actuation_time"),
        time_per_product=_as_number(_require(d, "time_per_product", context), f"{context}.time_per_product"),
        optima=tuple(optima),
    )


def _validate_container(p: ContainerParams, max_volume: float) -> None:
    who = f"container {p.name!r}"
    if p.fill_rate < 0:
        raise ConfigError(f"{who}: fill_rate must be non-negative")
    if p.noise_std_per_sec < 0:
        raise ConfigError(f"{who}: noise_std_per_sec must be non-negative")
    if p.product_size <= 0:
        raise ConfigError(f"{who}: product_size must be positive")
    if p.actuation_time <= 0:
        raise ConfigError(f"{who}: actuation_time must be positive")
    if p.time_per_product <= 0:
        raise ConfigError(f"{who}: time_per_product must be positive")
    if not p.optima:
        raise ConfigError(f"{who}: optima must be non-empty")
    for k, opt in enumerate(p.optima):
        if opt.width <= 0:
            raise ConfigError(f"{who}: optima[{k}] width must be positive")
        if not (0 < opt.height <= 1):
            raise ConfigError(f"{who}: optima[{k}] height must lie in (0, 1]")
        if k == 0:
            if opt.height != 1.0:
                raise ConfigError(f"{who}: the first optimum must have height 1")
        elif opt.height == 1.0:
            raise ConfigError(f"{who}: exactly the first optimum may have height 1")
        # checked exactly at double precision, deliberately without tolerance
        quotient = opt.volume / p.product_size
        if quotient < 1 or quotient != math.floor(quotient):
            raise ConfigError(
                f"{who}: optimum not a multiple of product size "
                f"(volume {opt.volume:g}, product_size {p.product_size:g})")
        if not (0 < opt.volume < max_volume):
            raise ConfigError(
                f"{who}: optimum volume {opt.volume:g} must lie strictly inside "
                f"(0, max_volume={max_volume:g})")


def _validate(cfg: EnvConfig) -> EnvConfig:
    if not cfg.containers:
        raise ConfigError("containers must be non-empty")
    if cfg.pu_count < 1:
        raise ConfigError("pu_count must be a positive integer")
    if cfg.max_volume <= 0:
        raise ConfigError("max_volume must be positive")
    if cfg.timestep_seconds <= 0:
        raise ConfigError("timestep_seconds must be positive")
    if cfg.max_episode_steps < 1:
        raise ConfigError("max_episode_steps must be a positive integer")
    if cfg.reward_penalty >= 0:
        raise ConfigError("reward_penalty must be negative")
    if cfg.reward_min >= cfg.reward_penalty:
        raise ConfigError("reward_min must be smaller than reward_penalty")
    lo, hi = cfg.initial_volume_range
    if not (0 <= lo <= hi < cfg.max_volume):
        raise ConfigError("initial_volume_range must satisfy 0 <= lo <= hi < max_volume")
    for p in cfg.containers:
        _validate_container(p, cfg.max_volume)
    return cfg


def config_from_dict(d: dict) -> EnvConfig:
    """Build and fully validate an :class:`EnvConfig` from a parsed document."""
    if not isinstance(d, dict):
        raise ConfigError("config document must be a JSON object")
    raw_containers = _require(d, "containers", "config")
    if not isinstance(raw_containers, list):
        raise ConfigError("containers must be a list")
    containers = tuple(_parse_container(c, i) for i, c in enumerate(raw_containers))
    raw_range = _require(d, "initial_volume_range", "config")
    if not isinstance(raw_range, list) or len(raw_range) != 2:
        raise ConfigError("initial_volume_range must be a two-element list [lo, hi]")
    cfg = EnvConfig(
        containers=containers,
        pu_count=_as_int(_require(d, "pu_count", "config"), "pu_count"),
        max_volume=_as_number(_require(d, "max_volume", "config"), "max_volume"),
        timestep_seconds=_as_number(_require(d, "timestep_seconds", "config"), "timestep_seconds"),
        max_episode_steps=_as_int(_require(d, "max_episode_steps", "config"), "max_episode_steps"),
        reward_min=_as_number(_require(d, "reward_min", "config"), "reward_min"),
        reward_penalty=_as_number(_require(d, "reward_penalty", "config"), "reward_penalty"),
        initial_volume_range=(
            _as_number(raw_range[0], "initial_volume_range[0]"),
            _as_number(raw_range[1], "initial_volume_range[1]"),
        ),
    )
    return _validate(cfg)


def load_config(source: str | Path | IO[str]) -> EnvConfig:
    """Load and validate a config from a file path or an open text stream.

    Raises :class:`ConfigError` with the violated invariant (and offending
    field) in the message.
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = source.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"parse error: {exc}") from exc
    return config_from_dict(doc)


# ---------------------------------------------------------------------------
# serialization

def config_to_dict(cfg: EnvConfig) -> dict:
    return {
        "containers": [
            {
                "name": p.name,
                "fill_rate": p.fill_rate,
                "noise_std_per_sec": p.noise_std_per_sec,
                "product_size": p.product_size,
                "actuation_time": p.actuation_time,
                "time_per_product": p.time_per_product,
                "optima": [
                    {"volume": o.volume, "height": o.height, "width": o.width}
                    for o in p.optima
                ],
            }
            for p in cfg.containers
        ],
        "pu_count": cfg.pu_count,
        "max_volume": cfg.max_volume,
        "timestep_seconds": cfg.timestep_seconds,
        "max_episode_steps": cfg.max_episode_steps,
        "reward_min": cfg.reward_min,
        "reward_penalty": cfg.reward_penalty,
        "initial_volume_range": list(cfg.initial_volume_range),
    }


def save_config(cfg: EnvConfig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(config_to_dict(cfg), indent=2) + "\n", encoding="utf-8")


def fingerprint(cfg: EnvConfig) -> str:
    """Stable 16-hex-digit digest of the canonical config serialization."""
    canonical = json.dumps(config_to_dict(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def with_max_episode_steps(cfg: EnvConfig, max_episode_steps: int) -> EnvConfig:
    """Copy of ``cfg`` with a different horizon (used by test-time evaluation)."""
    return _validate(replace(cfg, max_episode_steps=max_episode_steps))


# ---------------------------------------------------------------------------
# diagnostics (warnings, never errors)

#: Tolerance above 1 accepted by the landscape scan. Overlapping Gaussian
#: tails push the value at a peak marginally above 1 even for well-separated
#: peaks; anything beyond this slack indicates genuinely overlapping optima.
LANDSCAPE_TOLERANCE = 1e-9


def validate_reward_landscape(cfg: EnvConfig, grid_step: float = 0.01) -> list[str]:
    """Scan each container's emptying-reward curve on a volume grid.

    Evaluates the reward on ``{0, grid_step, 2*grid_step, ..., max_volume}``
    and returns one warning per container whose curve exceeds
    ``1 + LANDSCAPE_TOLERANCE`` anywhere, plus one per container whose peak
    heights are not non-decreasing in peak volume (late emptying is supposed
    to pay at least as much as early emptying).
    """
    from .reward import emptying_reward

    if grid_step <= 0:
        raise ValueError("grid_step must be positive")
    warnings = []
    steps = int(math.floor(cfg.max_volume / grid_step))
    grid = [k * grid_step for k in range(steps + 1)]
    if grid[-1] < cfg.max_volume:
        grid.append(cfg.max_volume)
    for p in cfg.containers:
        worst_v, worst_r = None, 1.0
        for v in grid:
            r = emptying_reward(v, p, cfg.reward_penalty)
            if r > worst_r:
                worst_v, worst_r = v, r
        if worst_r > 1.0 + LANDSCAPE_TOLERANCE:
            warnings.append(
                f"container {p.name!r}: reward exceeds 1 "
                f"(max {worst_r:.12g} at volume {worst_v:.6g})")
        by_volume = sorted(p.optima, key=lambda o: o.volume)
        if any(a.height > b.height for a, b in zip(by_volume, by_volume[1:])):
            warnings.append(
                f"container {p.name!r}: peak heights are not non-decreasing "
                f"in peak volume")
    return warnings


def timestep_warnings(cfg: EnvConfig) -> list[str]:
    """Flag configurations whose control period risks trivializing the task.

    Warns when any container's per-step drift ``fill_rate * timestep_seconds``
    is not strictly smaller than the smallest ``time_per_product``. This is a
    warning rather than an error so trivialized instances remain explorable.
    """
    warnings = []
    min_time_per_product = min(p.time_per_product for p in cfg.containers)
    for p in cfg.containers:
        drift = p.fill_rate * cfg.timestep_seconds
        if drift >= min_time_per_product:
            warnings.append(
                f"container {p.name!r}: per-step drift {drift:g} is not smaller "
                f"than the minimum time_per_product {min_time_per_product:g}; "
                f"the instance may be trivial at this timestep length")
    return warnings


# ---------------------------------------------------------------------------
# synthetic defaults

GRID_CONTAINER_COUNTS = (5, 11)
GRID_PU_COUNTS = (2, 5, 11)
GRID_TIMESTEPS = (60.0, 120.0)

_DEFAULT_FILL_RATES = (0.002, 0.004, 0.005, 0.006, 0.007, 0.008,
                       0.009, 0.010, 0.011, 0.012, 0.013)
_DEFAULT_NOISE_STD = 0.01
_DEFAULT_PRODUCT_SIZE = 5.0
_DEFAULT_ACTUATION_TIME = 120.0
_DEFAULT_TIME_PER_PRODUCT = 40.0
# ideal optimum first; heights grow with volume so late emptying pays best
_DEFAULT_OPTIMA = (
    Optimum(volume=35.0, height=1.0, width=1.5),
    Optimum(volume=25.0, height=0.7, width=1.5),
    Optimum(volume=15.0, height=0.4, width=1.5),
)


def default_config(n: int, m: int, delta: float) -> EnvConfig:
    """Synthetic config for a supported grid point (deterministic).

    Supported grid: n in {5, 11}, m in {2, 5, 11} with m <= n,
    delta in {60, 120} seconds.
    """
    if (n not in GRID_CONTAINER_COUNTS or m not in GRID_PU_COUNTS
            or float(delta) not in GRID_TIMESTEPS or m > n):
        raise ConfigError(f"unsupported grid point (n={n}, m={m}, delta={delta:g})")
    containers = tuple(
        ContainerParams(
            name=f"C1-{round(rate * 10000)}",
            fill_rate=rate,
            noise_std_per_sec=_DEFAULT_NOISE_STD,
            product_size=_DEFAULT_PRODUCT_SIZE,
            actuation_time=_DEFAULT_ACTUATION_TIME,
            time_per_product=_DEFAULT_TIME_PER_PRODUCT,
            optima=_DEFAULT_OPTIMA,
        )
        for rate in _DEFAULT_FILL_RATES[:n]
    )
    return _validate(EnvConfig(
        containers=containers,
        pu_count=m,
        max_volume=40.0,
        timestep_seconds=float(delta),
        max_episode_steps=1500,
        reward_min=-1.0,
        reward_penalty=-0.1,
        initial_volume_range=(0.0, 30.0),
    ))


def default_config_name(n: int, m: int, delta: float) -> str:
    return f"synthetic-{n}-{m}-{int(delta)}.json"


def shipped_grid_points() -> tuple[tuple[int, int, float], ...]:
    """Grid points whose configs ship under ``configs/``."""
    return tuple(
        (n, m, delta)
        for n, m in ((5, 2), (5, 5), (11, 2), (11, 11))
        for delta in GRID_TIMESTEPS
    )
