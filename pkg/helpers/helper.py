import os
import re
import tempfile
from fractions import Fraction
from pathlib import Path
from typing import Any, List, Union

from helpers.errors import ParameterError

_RANGE_RE = re.compile(r"^\s*(\d+)\s*(?:\.\.|-|:)\s*(\d+)\s*$")


def parse_rational(value: Union[str, int, float, Fraction]) -> Fraction:
    """
    Converte "p/q", um decimal ("0.1") ou um numero em Fraction exata.

    Args:
        value (str | int | float | Fraction): valor a converter. Floats passam
            por repr() para que 0.1 vire 1/10 e nao o binario mais proximo.

    Returns:
        Fraction: o racional exato.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ParameterError(f"Not a rational number: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    text = str(value).strip()
    try:
        if "/" in text:
            num, den = text.split("/", 1)
            return Fraction(int(num.strip()), int(den.strip()))
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as e:
        raise ParameterError(f"Not a rational number: {value!r}") from e


def format_rational(value: Fraction) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return f"{value.numerator}/1"
    return f"{value.numerator}/{value.denominator}"


def parse_range(text: str) -> List[int]:
    """Parse "6..17" (inclusive), "6-17", "6:17" or a single "9"."""
    text = str(text).strip()
    if text.isdigit():
        return [int(text)]
    match = _RANGE_RE.match(text)
    if not match:
        raise ParameterError(f"Not a range: {text!r} (expected A..B)")
    lo, hi = int(match.group(1)), int(match.group(2))
    if lo > hi:
        raise ParameterError(f"Empty range: {text!r}")
    return list(range(lo, hi + 1))


def atomic_write_text(path: Union[str, Path], text: str) -> Path:
    """Write to a temp file next to `path` and rename it into place."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{target.name}.", dir=str(target.parent))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp_name, target)
    except Exception:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise
    return target


def jsonable(obj: Any) -> Any:
    """Walk dicts/lists and turn Fractions into "p/q" strings."""
    if isinstance(obj, Fraction):
        return format_rational(obj)
    if isinstance(obj, dict):
        return {k: jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    return obj
