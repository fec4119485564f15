"""
Grid flag parsing.

A grid is a comma-separated list whose items are either single values or
inclusive ranges written ``start:stop:step``:

    25,100,1000        three sample sizes
    0.01:0.1:0.01      0.01, 0.02, ..., 0.1
    25,50,100:500:200  25, 50, 100, 300, 500
"""
import enum
import math
from typing import Callable, List, Sequence, Type, TypeVar, Union

from app.core.exceptions import ConfigurationError

T = TypeVar("T", int, float)
E = TypeVar("E", bound=enum.Enum)

_DECIMALS = 10


def _expand_range(item: str, cast: Callable[[str], T]) -> List[T]:
    parts = item.split(":")
    if len(parts) != 3:
        raise ConfigurationError(f"range {item!r} must be written start:stop:step")
    start, stop, step = (float(_cast_token(part, float)) for part in parts)
    if step <= 0:
        raise ConfigurationError(f"range {item!r} needs a positive step")
    if stop < start:
        raise ConfigurationError(f"range {item!r} ends before it starts")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    values = [round(start + i * step, _DECIMALS) for i in range(count)]
    return [_cast_token(repr(value), cast) for value in values]


def _cast_token(token: str, cast: Callable[[str], T]) -> T:
    try:
        if cast is int:
            value = float(token)
            if not value.is_integer():
                raise ValueError
            return int(value)
        return cast(token)
    except ValueError:
        raise ConfigurationError(f"cannot read {token!r} as {cast.__name__}") from None


def parse_grid(text: Union[str, Sequence[Union[int, float]], None], cast: Callable[[str], T] = float) -> List[T]:
    """
    Expand a grid flag into a list of values, preserving order and dropping duplicates.

    Args:
        text: Flag text, or an already materialized list (from a JSON config)
        cast: int or float

    Returns:
        List of values
    """
    if text is None:
        return []
    if not isinstance(text, str):
        text = ",".join(str(value) for value in text)
    values: List[T] = []
    for item in (part.strip() for part in text.split(",")):
        if not item:
            continue
        if ":" in item:
            values.extend(_expand_range(item, cast))
        else:
            values.append(_cast_token(item, cast))
    if not values:
        raise ConfigurationError(f"grid {text!r} is empty")
    return list(dict.fromkeys(values))


def parse_names(text: Union[str, Sequence[str], None]) -> List[str]:
    """Comma-separated names (tests, families)."""
    if text is None:
        return []
    if not isinstance(text, str):
        return [str(name) for name in text]
    return [name.strip() for name in text.split(",") if name.strip()]


def parse_choices(text: Union[str, Sequence[str], None], enum_type: Type[E]) -> List[E]:
    """Comma-separated enum values; an unknown name is a configuration error."""
    choices = []
    for name in parse_names(text):
        try:
            choices.append(enum_type(name))
        except ValueError:
            allowed = ", ".join(member.value for member in enum_type)
            raise ConfigurationError(f"unknown {enum_type.__name__} {name!r} (choose from {allowed})") from None
    return choices
