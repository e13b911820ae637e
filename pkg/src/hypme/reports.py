"""Canonical report files.

Every CLI run emits one JSON report that embeds the tool version, the full
configuration echo (including seed and budget), and the payload.  Identical
configurations produce byte-identical files: keys are sorted, no timestamps
or machine identifiers are recorded, and all rationals are "p/q" strings.
"""

from __future__ import annotations

import json

from . import __version__


def render_report(config: dict, payload: dict) -> str:
    doc = {
        "tool": "hypme",
        "version": __version__,
        "config": config,
        "report": payload,
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def write_report(path: str, config: dict, payload: dict) -> None:
    text = render_report(config, payload)
    with open(path, "w") as fh:
        fh.write(text)
