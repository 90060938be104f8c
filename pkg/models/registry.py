"""
Built-in models shipped as .balg files under models/registry/.
"""

import logging
from functools import lru_cache
from pathlib import Path
from typing import List

from config import config
from models.dsl import ModelFile, parse_file
from utils.errors import UnknownModelError

logger = logging.getLogger(__name__)

REGISTRY_NAMES = ("iwasawa", "nakamura-i", "nakamura-ii")


def registry_dir() -> Path:
    return Path(config.engine.registry_dir)


def available() -> List[str]:
    """Registry names with a model file present, in a fixed order."""
    found = {p.stem for p in registry_dir().glob("*.balg")}
    ordered = [name for name in REGISTRY_NAMES if name in found]
    return ordered + sorted(found - set(REGISTRY_NAMES))


@lru_cache(maxsize=None)
def registry(name: str) -> ModelFile:
    """
    Load a built-in model by name.

    Raises:
        UnknownModelError: no model file with that name
    """
    path = registry_dir() / f"{name}.balg"
    if not path.is_file():
        raise UnknownModelError(f"unknown model {name!r}; available: {', '.join(available())}")
    logger.info(f"Loading registry model {name} from {path}")
    return parse_file(path)
