"""Flat key=value text blocks used by params, attack, and experiment configs."""

from __future__ import annotations

from .errors import ValidationError


def parse_kv(text: str) -> dict[str, str]:
    """Parse ``key=value`` lines; '#' starts a comment, blank lines ignored."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValidationError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


def format_kv(items: dict[str, object]) -> str:
    return "".join(f"{k}={v}\n" for k, v in items.items())
