"""Subtitle (SRT) ingestion: drop cue numbers and timestamps, keep words."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

_TIMING = re.compile(
    r"^\s*(\d{1,2}):(\d{2}):(\d{2})[,.](\d{1,3})\s*-->\s*(\d{1,2}):(\d{2}):(\d{2})[,.](\d{1,3})"
)
_TAGS = re.compile(r"<[^>]*>|\{[^}]*\}")
# words are alphanumeric runs; an apostrophe survives only between two such characters
_WORD = re.compile(r"[^\W_]+(?:'[^\W_]+)*")


@dataclass
class SrtResult:
    tokens: list[str]
    warnings: list[str] = field(default_factory=list)


def tokenize(text: str) -> list[str]:
    text = _TAGS.sub(" ", text).replace("’", "'").lower()
    return _WORD.findall(text)


def parse_srt_detailed(text: str) -> SrtResult:
    text = text.lstrip("﻿").replace("\r\n", "\n").replace("\r", "\n")
    out = SrtResult([])
    for n, block in enumerate(re.split(r"\n\s*\n", text.strip()), start=1):
        lines = [ln for ln in block.split("\n") if ln.strip()]
        if not lines:
            continue
        if lines[0].strip().isdigit():
            lines = lines[1:]
        if not lines or not _TIMING.match(lines[0]):
            out.warnings.append(f"block {n}: missing or malformed timestamp line, skipped")
            continue
        for line in lines[1:]:
            out.tokens.extend(tokenize(line))
    return out


def parse_srt(text: str) -> list[str]:
    return parse_srt_detailed(text).tokens
