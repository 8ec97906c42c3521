import re

_TOKEN = re.compile(r"[^\W_]+")


def normalize(text: str) -> list[str]:
    """Lowercase ``text`` and split it on runs of non-alphanumeric characters."""
    return _TOKEN.findall(text.lower())


def normalize_key(text: str) -> str:
    return " ".join(normalize(text))
