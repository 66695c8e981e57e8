"""JSON instance files.

Schema (UTF-8 JSON object)::

    {
      "states": ["1", "2", "3"],
      "initial": ["1/3", "1/3", "1/3"],
      "transition": [["3/4", "0", "1/4"], ...],
      "patterns": {"A": ["3", "2", "3"], "C": "33"}
    }

Probabilities are ``"p/q"`` or decimal strings, read exactly. A pattern is a
list of state labels, or a plain string when every label is one character.
``patterns`` may be omitted for commands that build their own collection.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

from .errors import ValidationError
from .model import Alphabet, ChainSpec, Pattern, PatternCollection, parse_probability


def _field_error(where: str, exc: Exception) -> ValidationError:
    msg = str(exc)
    return ValidationError(f"{where}: {msg}")


def parse_instance(doc: dict, exact: bool = True) -> tuple[ChainSpec, Optional[PatternCollection]]:
    if not isinstance(doc, dict):
        raise ValidationError("instance must be a JSON object")
    for key in ("states", "initial", "transition"):
        if key not in doc:
            raise ValidationError(f"missing field {key!r}")
    states = doc["states"]
    if not isinstance(states, list):
        raise ValidationError("states: expected a list of labels")
    try:
        alphabet = Alphabet(tuple(states))
    except ValidationError as exc:
        raise _field_error("states", exc) from None

    initial = doc["initial"]
    transition = doc["transition"]
    if not isinstance(initial, list):
        raise ValidationError("initial: expected a list")
    if not isinstance(transition, list) or not all(isinstance(r, list) for r in transition):
        raise ValidationError("transition: expected a list of rows")
    for i, v in enumerate(initial):
        try:
            parse_probability(v)
        except ValidationError as exc:
            raise _field_error(f"initial[{i}]", exc) from None
    for i, row in enumerate(transition):
        for j, v in enumerate(row):
            try:
                parse_probability(v)
            except ValidationError as exc:
                raise _field_error(f"transition[{i}][{j}]", exc) from None
    try:
        chain = ChainSpec(alphabet, tuple(initial), tuple(tuple(r) for r in transition), exact=exact)
    except ValidationError as exc:
        raise _field_error("chain", exc) from None

    raw = doc.get("patterns")
    if raw is None or raw == {}:
        return chain, None
    if not isinstance(raw, dict):
        raise ValidationError("patterns: expected an object mapping names to words")
    patterns = []
    for name, word in raw.items():
        try:
            patterns.append(Pattern(str(name), alphabet.parse_word(word)))
        except ValidationError as exc:
            raise _field_error(f"patterns.{name}", exc) from None
    return chain, PatternCollection(tuple(patterns))


def load_instance(path, exact: bool = True) -> tuple[ChainSpec, Optional[PatternCollection]]:
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    try:
        return parse_instance(doc, exact=exact)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from None


def _fmt(v) -> str:
    return str(v) if not isinstance(v, float) else repr(v)


def dump_instance(chain: ChainSpec, collection: Optional[PatternCollection] = None) -> dict:
    """Inverse of :func:`parse_instance`; patterns are written as label lists."""
    alpha = chain.alphabet
    doc = {
        "states": list(alpha.symbols),
        "initial": [_fmt(v) for v in chain.initial],
        "transition": [[_fmt(v) for v in row] for row in chain.transition],
    }
    if collection is not None:
        doc["patterns"] = {K.name: [alpha.label(s) for s in K.symbols] for K in collection}
    return doc
