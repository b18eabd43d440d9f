"""DOTA-style annotation line format.

One instance per line, whitespace separated, coordinates in original-image
pixels:

    x1 y1 x2 y2 x3 y3 x4 y4 <class> <difficulty>

Corners follow the clockwise convention of :meth:`OrientedBox.corners`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable

from ..errors import ParseError
from .boxes import OrientedBox, fit_corners

_TOKEN = re.compile(r"\S+")


@dataclass(frozen=True)
class Annotation:
    box: OrientedBox
    label: str = "bridge"
    difficulty: int = 0


def format_annotation_line(ann: Annotation) -> str:
    pts = ann.box.corners()
    coords = " ".join(f"{v:.6f}" for v in pts.reshape(-1))
    return f"{coords} {ann.label} {ann.difficulty}"


def _tokens_with_columns(line: str):
    return [(m.group(0), m.start() + 1) for m in _TOKEN.finditer(line)]


def parse_annotation_line(line: str, path: str = "<annotation>", line_no: int = 1) -> Annotation:
    tokens = _tokens_with_columns(line)
    if len(tokens) != 10:
        raise ParseError(
            path, line_no, 1,
            f"expected 10 fields (8 corner coordinates, class, difficulty), got {len(tokens)}",
        )
    coords = []
    for text, col in tokens[:8]:
        try:
            coords.append(float(text))
        except ValueError:
            raise ParseError(path, line_no, col, f"bad coordinate {text!r}") from None
    label = tokens[8][0]
    diff_text, diff_col = tokens[9]
    try:
        difficulty = int(diff_text)
    except ValueError:
        raise ParseError(path, line_no, diff_col, f"bad difficulty {diff_text!r}") from None
    try:
        box = fit_corners([coords[0:2], coords[2:4], coords[4:6], coords[6:8]])
    except Exception as exc:
        raise ParseError(path, line_no, tokens[0][1], f"degenerate corners: {exc}") from None
    return Annotation(box=box, label=label, difficulty=difficulty)


def parse_annotations(text: str, path: str = "<annotation>") -> list[Annotation]:
    anns = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        anns.append(parse_annotation_line(line, path, line_no))
    return anns


def load_annotations(path) -> list[Annotation]:
    with open(path, encoding="utf-8") as fh:
        return parse_annotations(fh.read(), str(path))


def save_annotations(path, annotations: Iterable[Annotation]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ann in annotations:
            fh.write(format_annotation_line(ann) + "\n")
