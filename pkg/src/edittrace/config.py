"""Engine configuration, loadable from the environment."""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path


@dataclass
class EngineConfig:
    store_dir: Path | None = None
    provider_kind: str = "scripted"  # scripted | remote
    fixtures_dir: Path | None = None
    provider_endpoint: str = ""
    provider_api_key: str = ""
    provider_model: str = ""
    provider_timeout_s: float = 30.0
    search_url_template: str = "https://www.google.com/search?q={query}"
    marker_period_s: float = 30.0
    run_marker_scheduler: bool = False
    snapshot_debounce_s: float = 5.0
    series_period_s: float = 5.0
    perturbed_mode: bool = False
    perturbed_alternation: str = "strict"  # strict | random
    perturb_seed: int | None = None
    perturbed_prompt_path: Path | None = None
    study_mode: bool = False
    paste_cap: int = 50
    api_token: str | None = None
    max_conversation_messages: int | None = None

    @classmethod
    def from_env(cls, env: dict | None = None) -> "EngineConfig":
        env = dict(os.environ if env is None else env)

        def get(name: str, default=None):
            return env.get(f"EDITTRACE_{name}", default)

        def get_bool(name: str, default: bool) -> bool:
            raw = get(name)
            if raw is None:
                return default
            return raw.lower() in ("1", "true", "yes", "on")

        def get_float(name: str, default: float) -> float:
            raw = get(name)
            return default if raw is None else float(raw)

        config = cls()
        store = get("STORE_DIR")
        config.store_dir = Path(store) if store else None
        config.provider_kind = get("PROVIDER", config.provider_kind)
        fixtures = get("FIXTURES_DIR")
        config.fixtures_dir = Path(fixtures) if fixtures else None
        config.provider_endpoint = get("PROVIDER_ENDPOINT", config.provider_endpoint)
        config.provider_api_key = get("PROVIDER_API_KEY", config.provider_api_key)
        config.provider_model = get("PROVIDER_MODEL", config.provider_model)
        config.provider_timeout_s = get_float("PROVIDER_TIMEOUT_S", config.provider_timeout_s)
        config.search_url_template = get("SEARCH_URL", config.search_url_template)
        config.marker_period_s = get_float("MARKER_PERIOD_S", config.marker_period_s)
        config.run_marker_scheduler = get_bool("MARKER_SCHEDULER", config.run_marker_scheduler)
        config.snapshot_debounce_s = get_float("SNAPSHOT_DEBOUNCE_S", config.snapshot_debounce_s)
        config.series_period_s = get_float("SERIES_PERIOD_S", config.series_period_s)
        config.perturbed_mode = get_bool("PERTURBED_MODE", config.perturbed_mode)
        config.perturbed_alternation = get("PERTURBED_ALTERNATION", config.perturbed_alternation)
        seed = get("PERTURB_SEED")
        config.perturb_seed = int(seed) if seed else None
        prompt_path = get("PERTURBED_PROMPT_PATH")
        config.perturbed_prompt_path = Path(prompt_path) if prompt_path else None
        config.study_mode = get_bool("STUDY_MODE", config.study_mode)
        config.paste_cap = int(get("PASTE_CAP", config.paste_cap))
        config.api_token = get("API_TOKEN") or None
        max_messages = get("MAX_CONVERSATION_MESSAGES")
        config.max_conversation_messages = int(max_messages) if max_messages else None
        return config
