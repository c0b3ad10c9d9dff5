"""Run configuration: defaults, environment, ``key = value`` files and CLI overrides."""

import logging
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

from ..solvers.prox import Fidelity, SolverConfig
from ..solvers.scale_space import default_scale_grid, make_scale_grid
from .presets import DEFAULT_T_MAX_FACTOR, DEFAULT_T_MIN, SCALE_PROFILES, SOLVER_PROFILES

load_dotenv()

logger = logging.getLogger(__name__)

ENV_PROFILE = "TV_SPECTRUM_PROFILE"
ENV_OUTPUT_DIR = "TV_SPECTRUM_OUTPUT_DIR"
ENV_LOG_LEVEL = "TV_SPECTRUM_LOG_LEVEL"

DEFAULT_PROFILE = "paper"
DEFAULT_OUTPUT_DIR = "tv_spectrum_out"
DEFAULT_SCALE_PROFILE = "synthetic"
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")

SOLVER_KEYS = ("tau", "sigma", "theta", "max_its", "rel_tol")
INT_KEYS = ("n_scales", "seed", "max_its")
FLOAT_KEYS = ("t_min", "t_max", "epsilon_seg", "tau", "sigma", "theta", "rel_tol", "min_prominence")
STR_KEYS = ("fidelity", "spacing", "scale_profile", "profile", "band_method", "bands", "output_dir")
CONFIG_KEYS = INT_KEYS + FLOAT_KEYS + STR_KEYS


def log_level_from_env(default="INFO"):
    """Logging level name from the environment; unknown names fall back to the default"""
    level = os.getenv(ENV_LOG_LEVEL, default).strip().upper()
    if level not in LOG_LEVELS:
        logger.warning(f"Ignoring {ENV_LOG_LEVEL}={level!r}, using {default}")
        return default
    return level


def parse_band_selection(text):
    """
    Parse a band selection: ``auto`` (peaks), ``peaks``, ``otsu`` or
    ``manual:i0-i1,i2-i3``

    Returns:
        (method, params) as accepted by cluster_bands
    """
    text = text.strip()
    if text in ("auto", "peaks"):
        return "peaks", {}
    if text == "otsu":
        return "otsu", {}
    if text.startswith("manual:"):
        intervals = []
        for part in text[len("manual:") :].split(","):
            part = part.strip()
            if not part:
                continue
            bounds = part.split("-")
            if len(bounds) != 2:
                raise ValueError(f"Manual band must look like start-end, got {part!r}")
            intervals.append((int(bounds[0]), int(bounds[1])))
        return "manual", {"intervals": intervals}
    raise ValueError(f"Unknown band selection: {text} (expected auto, otsu or manual:i0-i1,...)")


def format_band_selection(method, params):
    if method == "manual":
        return "manual:" + ",".join(f"{s}-{e}" for s, e in params.get("intervals", []))
    return method


def parse_config_text(text):
    """Parse ``key = value`` lines into a dict of typed values"""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"Config line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ValueError(f"Config line {lineno}: unknown key {key!r}")
        values[key] = value
    return _typed(values)


def _typed(values):
    typed = {}
    for key, value in values.items():
        if value is None or (key in ("t_min", "t_max") and value == "auto"):
            continue
        if key in INT_KEYS:
            typed[key] = int(value)
        elif key in FLOAT_KEYS:
            typed[key] = float(value)
        else:
            typed[key] = str(getattr(value, "value", value))
    return typed


def _env_values():
    values = {}
    if os.getenv(ENV_PROFILE):
        values["profile"] = os.getenv(ENV_PROFILE)
    if os.getenv(ENV_OUTPUT_DIR):
        values["output_dir"] = os.getenv(ENV_OUTPUT_DIR)
    return values


@dataclass(frozen=True)
class RunConfig:
    """
    Every parameter of a decomposition run

    t_min and t_max left as None resolve to the default span
    [0.5, 1.25 * max(width, height) / 4] once the image size is known.
    n_scales and spacing default to those of the named scale profile.
    """

    fidelity: Fidelity = Fidelity.L1
    n_scales: int = 20
    t_min: Optional[float] = None
    t_max: Optional[float] = None
    spacing: str = "linear"
    scale_profile: str = DEFAULT_SCALE_PROFILE
    profile: str = DEFAULT_PROFILE
    solver: SolverConfig = field(default_factory=SolverConfig)
    band_method: str = "peaks"
    band_params: dict = field(default_factory=dict)
    epsilon_seg: float = 1e-3
    seed: int = 0
    output_dir: str = DEFAULT_OUTPUT_DIR

    def __post_init__(self):
        object.__setattr__(self, "fidelity", Fidelity.parse(self.fidelity))
        if self.n_scales < 2:
            raise ValueError(f"n_scales must be at least 2: {self.n_scales}")
        if self.spacing not in ("linear", "logarithmic"):
            raise ValueError(f"Unknown spacing: {self.spacing} (expected linear or logarithmic)")
        if self.band_method not in ("peaks", "otsu", "manual"):
            raise ValueError(f"Unknown band method: {self.band_method}")
        if self.epsilon_seg < 0:
            raise ValueError(f"epsilon_seg must be nonnegative: {self.epsilon_seg}")
        for name in ("t_min", "t_max"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ValueError(f"{name} must be positive: {value}")

    @classmethod
    def from_values(cls, values):
        """Build a config from a flat dict of typed values (missing keys take defaults)"""
        profile = values.get("profile", DEFAULT_PROFILE)
        if profile not in SOLVER_PROFILES:
            raise ValueError(
                f"Unknown profile: {profile} (available: {', '.join(SOLVER_PROFILES)})"
            )
        solver = SolverConfig.from_profile(profile, **{k: values.get(k) for k in SOLVER_KEYS})

        scale_profile = values.get("scale_profile", DEFAULT_SCALE_PROFILE)
        if scale_profile not in SCALE_PROFILES:
            raise ValueError(
                f"Unknown scale profile: {scale_profile} (available: {', '.join(SCALE_PROFILES)})"
            )
        explicit = {k: v for k, v in values.items() if v is not None}
        values = {**SCALE_PROFILES[scale_profile], **explicit}

        band_method = values.get("band_method", "peaks")
        band_params = {}
        if "bands" in values:
            band_method, band_params = parse_band_selection(values["bands"])
        if "min_prominence" in values:
            band_params["min_prominence"] = values["min_prominence"]

        kwargs = {
            k: values[k]
            for k in ("fidelity", "n_scales", "t_min", "t_max", "spacing", "epsilon_seg", "seed", "output_dir")
            if values.get(k) is not None
        }
        return cls(
            profile=profile,
            scale_profile=scale_profile,
            solver=solver,
            band_method=band_method,
            band_params=band_params,
            **kwargs,
        )

    @classmethod
    def load(cls, config_path=None, overrides=None):
        """
        Resolve a config: overrides > config file > environment > defaults

        Args:
            config_path: Optional ``key = value`` file
            overrides: Dict of values from the command line; None entries are ignored
        """
        values = _env_values()
        if config_path:
            values.update(parse_config_text(Path(config_path).read_text(encoding="utf-8")))
            logger.info(f"Loaded run configuration from {config_path}")
        values.update(_typed({k: v for k, v in (overrides or {}).items() if v is not None}))
        return cls.from_values(values)

    def with_overrides(self, **changes):
        return replace(self, **changes)

    def scale_grid(self, width, height):
        """The ScaleGrid of this run for an image of the given size"""
        if self.t_min is None and self.t_max is None:
            return default_scale_grid(width, height, self.n_scales, self.spacing)
        t_min = DEFAULT_T_MIN if self.t_min is None else self.t_min
        t_max = (
            DEFAULT_T_MAX_FACTOR * max(width, height) / 4.0 if self.t_max is None else self.t_max
        )
        return make_scale_grid(self.n_scales, t_min, t_max, self.spacing)

    def to_lines(self):
        """``key = value`` echo of every parameter, in a fixed order"""
        s = self.solver
        items = [
            ("fidelity", self.fidelity.value),
            ("n_scales", self.n_scales),
            ("t_min", "auto" if self.t_min is None else repr(float(self.t_min))),
            ("t_max", "auto" if self.t_max is None else repr(float(self.t_max))),
            ("spacing", self.spacing),
            ("scale_profile", self.scale_profile),
            ("profile", self.profile),
            ("tau", repr(float(s.tau))),
            ("sigma", repr(float(s.sigma))),
            ("theta", repr(float(s.theta))),
            ("max_its", s.max_its),
            ("rel_tol", repr(float(s.rel_tol))),
            ("bands", format_band_selection(self.band_method, self.band_params)),
            ("min_prominence", repr(float(self.band_params.get("min_prominence", 0.1)))),
            ("epsilon_seg", repr(float(self.epsilon_seg))),
            ("seed", self.seed),
        ]
        return [f"{key} = {value}" for key, value in items]
