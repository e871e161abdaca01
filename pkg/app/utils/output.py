from __future__ import annotations

import csv
from pathlib import Path
from typing import Mapping

from PIL import Image

from ..sets import Diagnosis, PixelSet, Verdict

CERTIFIED_OUT_GRAY = 255
CERTIFIED_IN_GRAY = 64
UNDETERMINED_GRAY = 0
# decide=0 without a certificate (the naive renderer, a lowered threshold)
UNCERTIFIED_OUT_GRAY = 192

CSV_FIELDS = ("ix", "iy", "decision", "diagnosis")


def gray_level(verdict: Verdict) -> int:
    if verdict.diagnosis is Diagnosis.CERTIFIED_OUT:
        return CERTIFIED_OUT_GRAY
    if verdict.diagnosis is Diagnosis.CERTIFIED_IN:
        return CERTIFIED_IN_GRAY
    if verdict.decision == 0:
        return UNCERTIFIED_OUT_GRAY
    return UNDETERMINED_GRAY


def pixel_rows(pixels: PixelSet) -> list[list[int]]:
    if pixels.columns * pixels.rows != len(pixels.records):
        raise ValueError("pixel set does not cover a full grid; render with approximate_set")
    levels = [gray_level(record.verdict) for record in pixels.records]
    return [levels[i:i + pixels.columns] for i in range(0, len(levels), pixels.columns)]


def write_pgm(pixels: PixelSet, path: Path | str, binary: bool = False) -> Path:
    """Write the diagnosis image, plain P2 text by default or binary P5 through Pillow."""
    path = Path(path)
    rows = pixel_rows(pixels)
    if binary:
        image = Image.new("L", (pixels.columns, pixels.rows))
        image.putdata([level for row in rows for level in row])
        image.save(path, format="PPM")
        return path
    with path.open("w", encoding="ascii", newline="\n") as handle:
        handle.write(f"P2\n{pixels.columns} {pixels.rows}\n255\n")
        for row in rows:
            handle.write(" ".join(str(level) for level in row))
            handle.write("\n")
    return path


def write_pixel_csv(pixels: PixelSet, path: Path | str) -> Path:
    path = Path(path)
    window = pixels.window
    with path.open("w", encoding="ascii", newline="") as handle:
        handle.write(f"# n={pixels.n}\n")
        handle.write(f"# k={pixels.k}\n")
        handle.write(
            f"# window={window.re.lo},{window.re.hi},{window.im.lo},{window.im.hi}\n"
        )
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CSV_FIELDS)
        for record in pixels.records:
            writer.writerow(
                (record.ix, record.iy, record.decision, record.verdict.diagnosis.value)
            )
    return path


def read_pixel_csv(path: Path | str) -> tuple[dict[str, str], list[dict[str, str]]]:
    header: dict[str, str] = {}
    with Path(path).open(encoding="ascii", newline="") as handle:
        body = []
        for line in handle:
            if line.startswith("# "):
                key, _, value = line[2:].rstrip("\n").partition("=")
                header[key] = value
            else:
                body.append(line)
    return header, list(csv.DictReader(body))


def write_stats(stats: Mapping[str, object], path: Path | str) -> Path:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        for key, value in stats.items():
            handle.write(f"{key}={value}\n")
    return path
