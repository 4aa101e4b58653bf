"""Pipeline configuration: a plain key=value text file.

Lines are ``key = value``; ``#`` starts a comment. Unknown keys are
rejected so typos fail loudly. The parsed key/value strings are echoed
verbatim into every artifact sidecar for reproducibility.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .explain import ShapMode
from .features import Granularity, TableMode, TargetKind
from .ingest import DOMESTIC_LEAGUES, Competition, EventFormat
from .models import ModelFamily

_DEFAULTS: dict[str, str] = {
    "events_path": "events.csv",
    "matches_path": "matches.csv",
    "output_dir": "out",
    "events_format": "canonical_csv",
    "seed": "0",
    "window": "5",
    "min_history": "5",
    "venue_conditioned": "true",
    "granularity": "full",
    "mode": "mixed",
    "target_kind": "binary",
    "model_family": "random_forest",
    "tune_budget": "50",
    "cv_folds": "10",
    "test_fraction": "0.30",
    "k_min": "2",
    "k_max": "7",
    "pca_components": "2",
    "cluster_rows": "match_teams",
    "top_n": "20",
    "importance_repeats": "10",
    "shap_mode": "montecarlo",
    "shap_samples": "128",
    "shap_rows": "20",
    "shap_background": "32",
    "correlate_league": "PremierLeague",
    "simulate_leagues": "",
    "synth_teams": "8",
    "synth_leagues": "LaLiga,PremierLeague",
}


@dataclass
class PipelineConfig:
    events_path: Path
    matches_path: Path
    output_dir: Path
    events_format: EventFormat
    seed: int
    window: int
    min_history: int
    venue_conditioned: bool
    granularity: Granularity
    mode: TableMode
    target_kind: TargetKind
    model_family: ModelFamily
    tune_budget: int
    cv_folds: int
    test_fraction: float
    k_min: int
    k_max: int
    pca_components: int
    cluster_rows: str
    top_n: int
    importance_repeats: int
    shap_mode: ShapMode
    shap_samples: int
    shap_rows: int
    shap_background: int
    correlate_league: Competition
    simulate_leagues: list[Competition]
    synth_teams: int
    synth_leagues: list[Competition]
    echo: dict[str, str] = field(default_factory=dict)

    @property
    def feature_slug(self) -> str:
        return f"{self.mode.value}_{self.granularity.value}_{self.target_kind.value}"

    @property
    def model_slug(self) -> str:
        return f"{self.feature_slug}_{self.model_family.value}"


def _parse_bool(raw: str, key: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in ("true", "yes", "1"):
        return True
    if lowered in ("false", "no", "0"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {raw!r}")


def _parse_int(raw: str, key: str) -> int:
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"{key}: expected an integer, got {raw!r}") from exc


def _parse_enum(raw: str, enum_cls, key: str):
    try:
        return enum_cls(raw.strip())
    except ValueError as exc:
        choices = ", ".join(e.value for e in enum_cls)
        raise ConfigError(f"{key}: {raw!r} is not one of {choices}") from exc


def _parse_league_list(raw: str, key: str) -> list[Competition]:
    if not raw.strip():
        return []
    return [_parse_enum(part, Competition, key) for part in raw.split(",") if part.strip()]


def read_config_text(text: str) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"config line {lineno}: expected 'key = value'")
        key, _, value = stripped.partition("=")
        key = key.strip()
        if key not in _DEFAULTS:
            raise ConfigError(f"config line {lineno}: unknown key {key!r}")
        values[key] = value.strip()
    return values


def load_config(path: Path, overrides: dict[str, str] | None = None) -> PipelineConfig:
    """Parse, apply CLI overrides, validate, and resolve the configuration.

    Relative data paths are resolved against the config file's directory.
    """
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    values = dict(_DEFAULTS)
    echo = read_config_text(text)
    values.update(echo)
    if overrides:
        values.update(overrides)
        echo.update(overrides)

    base = path.parent
    test_fraction = float(values["test_fraction"])
    if not 0.0 < test_fraction < 1.0:
        raise ConfigError(f"test_fraction must be in (0,1), got {test_fraction}")
    k_min = _parse_int(values["k_min"], "k_min")
    k_max = _parse_int(values["k_max"], "k_max")
    if k_min < 2 or k_max < k_min:
        raise ConfigError(f"bad k range [{k_min}, {k_max}]")
    cluster_rows = values["cluster_rows"]
    if cluster_rows not in ("match_teams", "team_seasons"):
        raise ConfigError(f"cluster_rows must be match_teams or team_seasons, got {cluster_rows!r}")

    simulate = _parse_league_list(values["simulate_leagues"], "simulate_leagues")
    if not simulate:
        simulate = list(DOMESTIC_LEAGUES)

    full_echo = dict(sorted({**_DEFAULTS, **echo}.items()))
    return PipelineConfig(
        events_path=base / values["events_path"],
        matches_path=base / values["matches_path"],
        output_dir=base / values["output_dir"],
        events_format=_parse_enum(values["events_format"], EventFormat, "events_format"),
        seed=_parse_int(values["seed"], "seed"),
        window=_parse_int(values["window"], "window"),
        min_history=_parse_int(values["min_history"], "min_history"),
        venue_conditioned=_parse_bool(values["venue_conditioned"], "venue_conditioned"),
        granularity=_parse_enum(values["granularity"], Granularity, "granularity"),
        mode=_parse_enum(values["mode"], TableMode, "mode"),
        target_kind=_parse_enum(values["target_kind"], TargetKind, "target_kind"),
        model_family=_parse_enum(values["model_family"], ModelFamily, "model_family"),
        tune_budget=_parse_int(values["tune_budget"], "tune_budget"),
        cv_folds=_parse_int(values["cv_folds"], "cv_folds"),
        test_fraction=test_fraction,
        k_min=k_min,
        k_max=k_max,
        pca_components=_parse_int(values["pca_components"], "pca_components"),
        cluster_rows=cluster_rows,
        top_n=_parse_int(values["top_n"], "top_n"),
        importance_repeats=_parse_int(values["importance_repeats"], "importance_repeats"),
        shap_mode=_parse_enum(values["shap_mode"], ShapMode, "shap_mode"),
        shap_samples=_parse_int(values["shap_samples"], "shap_samples"),
        shap_rows=_parse_int(values["shap_rows"], "shap_rows"),
        shap_background=_parse_int(values["shap_background"], "shap_background"),
        correlate_league=_parse_enum(values["correlate_league"], Competition, "correlate_league"),
        simulate_leagues=simulate,
        synth_teams=_parse_int(values["synth_teams"], "synth_teams"),
        synth_leagues=_parse_league_list(values["synth_leagues"], "synth_leagues"),
        echo=full_echo,
    )
