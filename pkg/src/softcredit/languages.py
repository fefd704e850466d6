"""Language-type taxonomy used by the code-files filter.

The bundled snapshot mirrors the hosting platform's linguist
classification (programming / markup / data / prose).  Languages
missing from the snapshot are treated as non-programming so the filter
never passes a repository on an unverified name.
"""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources


@lru_cache(maxsize=1)
def language_types() -> dict[str, str]:
    payload = resources.files("softcredit.data").joinpath("languages.json")
    return json.loads(payload.read_text(encoding="utf-8"))


def is_programming_language(name: str) -> bool:
    return language_types().get(name) == "programming"


def has_programming_language_files(language_bytes: dict[str, int]) -> bool:
    """True when at least one programming language has nonzero bytes."""
    return any(
        size > 0 and is_programming_language(lang)
        for lang, size in language_bytes.items()
    )
