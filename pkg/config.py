"""
scudkit Configuration Module
Loads settings from the environment (and a .env file) and resolves
CLI flag > config file > environment > default precedence.
"""
import os
from pathlib import Path
from typing import Any, Callable, Mapping

from dotenv import dotenv_values, load_dotenv

# Load environment variables from .env file
env_path = Path(__file__).parent / ".env"
load_dotenv(env_path)

BUNDLED_TAGSET = Path(__file__).parent / "treebank" / "data" / "scud.tagset"


class Config:
    """Application configuration loaded from environment variables."""

    # Annotation scheme
    TAGSET_PATH: str = os.getenv("SCUDKIT_TAGSET", str(BUNDLED_TAGSET))

    # Reproducibility and parallelism
    SEED: int = int(os.getenv("SCUDKIT_SEED", "42"))
    JOBS: int = int(os.getenv("SCUDKIT_JOBS", "1"))

    # Where evaluation results and downloads are kept
    LEDGER_PATH: str = os.getenv("SCUDKIT_LEDGER", str(Path.home() / ".config/scudkit/results.json"))
    CACHE_DIR: str = os.getenv("SCUDKIT_CACHE_DIR", str(Path.home() / ".cache/scudkit"))
    CORPUS_URL: str = os.getenv("SCUDKIT_CORPUS_URL", "").strip()

    LOG_LEVEL: str = os.getenv("SCUDKIT_LOG_LEVEL", "WARNING").upper()

    @classmethod
    def validate(cls) -> list[str]:
        """
        Validate the configuration.
        Returns a list of problems (empty when everything is usable).
        """
        problems = []

        if not Path(cls.TAGSET_PATH).is_file():
            problems.append(f"SCUDKIT_TAGSET: no such file {cls.TAGSET_PATH}")
        if cls.JOBS < 1:
            problems.append("SCUDKIT_JOBS must be at least 1")

        return problems

    @classmethod
    def is_valid(cls) -> bool:
        """Check if the configuration is usable."""
        return len(cls.validate()) == 0

    @staticmethod
    def read_file(path: str | Path | None) -> dict[str, str]:
        """
        Read a flat `key = value` config file.
        Keys are lower-cased; a missing path gives an empty mapping.
        """
        if not path:
            return {}
        path = Path(path)
        if not path.is_file():
            raise FileNotFoundError(f"config file not found: {path}")
        return {
            key.strip().lower(): value
            for key, value in dotenv_values(path).items()
            if value is not None
        }

    @classmethod
    def resolve(
        cls,
        key: str,
        flag: Any,
        file_values: Mapping[str, str],
        default: Any,
        cast: Callable[[str], Any] = str,
    ) -> Any:
        """Pick a setting: explicit flag, then config file entry, then the default."""
        if flag is not None:
            return flag
        if key in file_values:
            return cast(file_values[key])
        return default


# Singleton instance
config = Config()
