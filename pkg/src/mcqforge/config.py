"""Application configuration shared by the CLI, orchestrator, and service."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .gateway import DEFAULT_MODEL


@dataclass(frozen=True)
class AppConfig:
    model: str = DEFAULT_MODEL
    mode: str = "replay"  # live | record | replay
    transcript_path: str | None = None
    max_revisions: int = 3
    max_flaws: int = 1
    option_count: int = 4
    workers: int = 4
    seed: int = 0
    port: int = 8000
    base_url: str = "https://api.openai.com/v1"
    generation_temperature: float = 0.7
    use_llm_language: bool = False
    use_iwf_probe: bool = False

    def validate(self) -> None:
        if self.mode not in ("live", "record", "replay"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "replay":
            if not self.transcript_path:
                raise ValueError("replay mode requires a transcript path")
            if not Path(self.transcript_path).exists():
                raise ValueError(f"transcript not found: {self.transcript_path}")
        if self.mode == "record" and not self.transcript_path:
            raise ValueError("record mode requires a transcript path to write")
        if self.max_revisions < 0:
            raise ValueError("max_revisions must be >= 0")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
