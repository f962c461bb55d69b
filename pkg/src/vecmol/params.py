"""Tunable parser parameters and their key=value file format."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Mapping


class ParamsError(ValueError):
    pass


@dataclass(frozen=True)
class ParserParams:
    """Parameters for each parsing stage.

    A value of ``None`` disables the rule that uses it (written ``off`` in
    params files); this is how the pruning ablation is expressed.
    """

    bezier_flatness_pts: float = 0.25
    rect2line_long_ratio: float = 0.85
    rect2line_angle_tolerance: float = 5.0
    angle_tolerance_degrees: float = 3.0
    close_nonparallel_alpha: float | None = 1.75
    close_char_line_alpha: float | None = 1.5
    s_wedge_lengths_diff_ratio: float = 0.7
    neg_charge_y_position: float = 0.5
    neg_charge_length_tolerance: float = 0.5
    abs_cos_char_prune: float | None = 0.1
    char_line_z_tolerance: float | None = 1.5
    max_alpha_dist: float | None = 2.0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            name = FIELD_TO_NAME[f.name]
            if v is None:
                if f.name not in OPTIONAL:
                    raise ParamsError(f"{name} cannot be disabled")
                continue
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ParamsError(f"{name} must be a finite number, got {v!r}")
            if f.name in ANGLES:
                if not 0 < v < 45:
                    raise ParamsError(f"{name} must be in (0, 45), got {v}")
            elif f.name == "neg_charge_y_position":
                # 0 is part of the tuning grid; it accepts any height
                if not 0 <= v <= 5:
                    raise ParamsError(f"{name} must be in [0, 5], got {v}")
            elif not 0 < v <= 5:
                raise ParamsError(f"{name} must be in (0, 5], got {v}")

    def get(self, name: str) -> Any:
        return getattr(self, _field(name))

    def with_values(self, values: Mapping[str, Any]) -> "ParserParams":
        return dataclasses.replace(self, **{_field(k): v for k, v in values.items()})

    def as_dict(self) -> dict[str, Any]:
        return {FIELD_TO_NAME[f.name]: getattr(self, f.name) for f in fields(self)}

    def dumps(self) -> str:
        lines = []
        for name, v in self.as_dict().items():
            lines.append(f"{name}={'off' if v is None else repr(float(v))}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "ParserParams":
        values: dict[str, Any] = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParamsError(f"line {lineno}: expected NAME=value")
            key, val = (s.strip() for s in line.split("=", 1))
            if key not in NAME_TO_FIELD:
                raise ParamsError(f"line {lineno}: unknown parameter {key!r}")
            if val.lower() in ("off", "none"):
                values[key] = None
            else:
                try:
                    values[key] = float(val)
                except ValueError:
                    raise ParamsError(f"line {lineno}: bad value {val!r} for {key}") from None
        return cls().with_values(values)

    @classmethod
    def load(cls, path: str | Path) -> "ParserParams":
        return cls.loads(Path(path).read_text(encoding="utf-8"))


NAME_TO_FIELD = {
    "BEZIER_FLATNESS_PTS": "bezier_flatness_pts",
    "RECT2LINE_LONG_RATIO": "rect2line_long_ratio",
    "RECT2LINE_ANGLE_TOLERANCE": "rect2line_angle_tolerance",
    "ANGLE_TOLERANCE_DEGREES": "angle_tolerance_degrees",
    "CLOSE_NONPARALLEL_ALPHA": "close_nonparallel_alpha",
    "CLOSE_CHAR_LINE_ALPHA": "close_char_line_alpha",
    "S-WEDGE_LENGTHS_DIFF_RATIO": "s_wedge_lengths_diff_ratio",
    "NEG-CHARGE_Y_POSITION": "neg_charge_y_position",
    "NEG-CHARGE_LENGTH_TOLERANCE": "neg_charge_length_tolerance",
    "ABS_COS_CHAR_PRUNE": "abs_cos_char_prune",
    "CHAR_LINE_Z_TOLERANCE": "char_line_z_tolerance",
    "MAX_ALPHA_DIST": "max_alpha_dist",
}
FIELD_TO_NAME = {v: k for k, v in NAME_TO_FIELD.items()}
OPTIONAL = {"close_nonparallel_alpha", "close_char_line_alpha", "abs_cos_char_prune",
            "char_line_z_tolerance", "max_alpha_dist"}
ANGLES = {"rect2line_angle_tolerance", "angle_tolerance_degrees"}


def _field(name: str) -> str:
    if name in NAME_TO_FIELD:
        return NAME_TO_FIELD[name]
    if name in FIELD_TO_NAME:
        return name
    raise ParamsError(f"unknown parameter {name!r}")


DEFAULT_PARAMS = ParserParams()
