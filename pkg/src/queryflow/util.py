"""Small shared helpers."""

from __future__ import annotations

import re

_SCHEME_RE = re.compile(r"^[a-z][a-z0-9+.-]*://", re.IGNORECASE)
_UNSAFE_RE = re.compile(r"[^a-z0-9._-]+")


def slugify(text: str) -> str:
    """Deterministic filesystem-safe name for a query or topic."""
    slug = _UNSAFE_RE.sub("-", text.strip().lower()).strip("-")
    return slug or "empty"


def url_slug(url: str) -> str:
    """Slug for a URL: scheme dropped, the rest slugified."""
    return slugify(_SCHEME_RE.sub("", url))
