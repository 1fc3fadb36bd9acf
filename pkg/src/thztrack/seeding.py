"""Stable seed derivation so every random stream descends from one master seed."""

from __future__ import annotations

import hashlib


def derive_seed(*parts) -> int:
    """Derive a 63-bit child seed from a master seed and a component label.

    Uses SHA-256 over the repr of the parts, so the derivation is stable
    across processes and Python versions (unlike the built-in ``hash``).
    """
    text = "|".join(repr(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1
