"""System files, CLI presets and CSV output.

System files are TOML::

    name = "two-delay example"
    q = 0.8
    n = 2
    p = 1
    A0 = [[-1.0, 0.1], [0.0, -0.5]]
    B0 = [[1.0], [0.0]]

    [[delays]]
    tau = 0.5
    A = [[0.1, 0.0], [0.0, 0.1]]

    [nonlinearity]
    kind = "tanh"          # zero | tanh | sin_plus_offset | linear
    scale = [0.1, 0.2]     # tanh: vector; sin_plus_offset: scalar
    # offset = [...]       # sin_plus_offset
    # matrix = [[...]]     # linear
    # L = 0.2, m = 0.0     # optional upper bounds, checked against the catalog

Matrices are row-major arrays of arrays.
"""

from __future__ import annotations

import csv
import re
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import tomli
import tomli_w

from fracstab.errors import FracStabError, ParseError, ValidationError
from fracstab.solver import HistoryFn, InputSignal, Nonlinearity, SystemSpec

_TOP_KEYS = {"name", "description", "q", "n", "p", "A0", "B0", "delays", "nonlinearity"}
_NONLIN_KEYS = {"kind", "scale", "offset", "matrix", "L", "m"}


def _offset_of(doc: str, pattern: str, occurrence: int = 0, start: int = 0) -> int | None:
    matches = list(re.finditer(pattern, doc[start:], flags=re.MULTILINE))
    if occurrence < len(matches):
        return start + matches[occurrence].start()
    return None


def _line(doc: str, offset: int | None) -> int | None:
    return None if offset is None else doc.count("\n", 0, offset) + 1


def _locate(doc: str, fld: str | None) -> int | None:
    """Best-effort line number of the key behind a field path."""
    if not fld:
        return None
    m = re.match(r"(delays|taus)\[(\d+)\]", fld)
    if m:
        block = _offset_of(doc, r"^[ \t]*\[\[[ \t]*delays[ \t]*\]\]", int(m.group(2)))
        if block is not None and m.group(1) == "taus":
            key = _offset_of(doc, r"^[ \t]*tau[ \t]*=", 0, block)
            nxt = _offset_of(doc, r"^[ \t]*\[", 1, block)
            if key is not None and (nxt is None or key < nxt):
                return _line(doc, key)
        return _line(doc, block)
    head = fld.split(".")[0].split("[")[0]
    if head == "nonlinearity":
        return _line(doc, _offset_of(doc, r"^[ \t]*\[[ \t]*nonlinearity[ \t]*\]"))
    return _line(doc, _offset_of(doc, rf"^[ \t]*{re.escape(head)}[ \t]*="))


def _require(table: dict, key: str, path: str):
    if key not in table:
        raise ValidationError(f"missing required field {path}", field=path)
    return table[key]


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{path} must be a number, got {value!r}", field=path)
    return float(value)


def _matrix(value, path: str) -> np.ndarray:
    if not isinstance(value, list) or not value or not all(isinstance(r, list) for r in value):
        raise ValidationError(f"{path} must be a nonempty array of arrays", field=path)
    width = len(value[0])
    rows = []
    for i, row in enumerate(value):
        if len(row) != width or width == 0:
            raise ValidationError(f"{path} row {i} has length {len(row)}, expected {width}", field=path)
        rows.append([_number(x, f"{path}[{i}]") for x in row])
    return np.array(rows)


def _vector(value, path: str) -> np.ndarray:
    if not isinstance(value, list) or not value:
        raise ValidationError(f"{path} must be a nonempty array", field=path)
    return np.array([_number(x, f"{path}[{i}]") for i, x in enumerate(value)])


def _nonlinearity(table, path: str = "nonlinearity") -> Nonlinearity:
    if isinstance(table, str):
        table = {"kind": table}
    if not isinstance(table, dict):
        raise ValidationError(f"{path} must be a table", field=path)
    unknown = set(table) - _NONLIN_KEYS
    if unknown:
        raise ValidationError(f"unknown key(s) in {path}: {', '.join(sorted(unknown))}", field=path)
    kind = str(_require(table, "kind", f"{path}.kind")).lower()
    kwargs: dict = {}
    if kind == "tanh":
        scale = _require(table, "scale", f"{path}.scale")
        kwargs["scale"] = _vector(scale, f"{path}.scale") if isinstance(scale, list) else _number(scale, f"{path}.scale")
    elif kind == "sin_plus_offset":
        kwargs["scale"] = _number(_require(table, "scale", f"{path}.scale"), f"{path}.scale")
        kwargs["offset"] = _vector(_require(table, "offset", f"{path}.offset"), f"{path}.offset")
    elif kind == "linear":
        kwargs["matrix"] = _matrix(_require(table, "matrix", f"{path}.matrix"), f"{path}.matrix")
    if "L" in table:
        kwargs["lipschitz_L"] = _number(table["L"], f"{path}.L")
    if "m" in table:
        kwargs["offset_m"] = _number(table["m"], f"{path}.m")
    return Nonlinearity(kind, **kwargs)


def _build(data: dict) -> SystemSpec:
    unknown = set(data) - _TOP_KEYS
    if unknown:
        key = sorted(unknown)[0]
        raise ValidationError(f"unknown top-level key(s): {', '.join(sorted(unknown))}", field=key)

    q = _number(_require(data, "q", "q"), "q")
    a0 = _matrix(_require(data, "A0", "A0"), "A0")
    delays = data.get("delays", [])
    if not isinstance(delays, list) or not all(isinstance(d, dict) for d in delays):
        raise ValidationError("delays must be an array of tables", field="delays")

    n = int(_number(data["n"], "n")) if "n" in data else a0.shape[0]
    p = int(_number(data["p"], "p")) if "p" in data else len(delays)
    if a0.shape[0] != n:
        raise ValidationError(f"A0 has {a0.shape[0]} rows but n = {n}", field="A0")
    if len(delays) != p:
        raise ValidationError(
            f"p = {p} but {len(delays)} delay entries were given", field="delays"
        )

    mats, taus = [], []
    for i, entry in enumerate(delays):
        extra = set(entry) - {"tau", "A"}
        if extra:
            raise ValidationError(
                f"unknown key(s) in delays[{i}]: {', '.join(sorted(extra))}", field=f"delays[{i}]"
            )
        taus.append(_number(_require(entry, "tau", f"taus[{i}]"), f"taus[{i}]"))
        mats.append(_matrix(_require(entry, "A", f"delays[{i}].A"), f"delays[{i}].A"))

    b0 = _matrix(data["B0"], "B0") if "B0" in data else None
    nonlin = _nonlinearity(data.get("nonlinearity", {"kind": "zero"}))
    return SystemSpec(
        q=q,
        a0=a0,
        a_delays=tuple(mats),
        taus=tuple(taus),
        b0=b0,
        nonlinearity=nonlin,
        name=str(data.get("name", "")),
        description=str(data.get("description", "")),
    )


def parse_system(doc: str) -> SystemSpec:
    """Parse and fully validate a TOML system document.

    :raises ParseError: for malformed TOML, with the offending line.
    :raises ValidationError: for well-formed documents that violate an
        invariant; ``field`` names it and ``line`` points at its key when it
        can be located.
    """
    try:
        data = tomli.loads(doc)
    except tomli.TOMLDecodeError as exc:
        raise ParseError(f"invalid TOML: {exc}", line=getattr(exc, "lineno", None)) from exc
    try:
        return _build(data)
    except ValidationError as exc:
        line = _locate(doc, exc.field)
        where = f" (line {line})" if line is not None else ""
        err = type(exc)(f"{exc}{where}", field=exc.field)
        err.line = line
        raise err from exc


def load_system(path: str | Path) -> SystemSpec:
    path = Path(path)
    try:
        doc = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FracStabError(f"cannot read system file {path}: {exc.strerror}") from exc
    return parse_system(doc)


def system_to_dict(sys: SystemSpec) -> dict:
    """Plain-data view of a system; equal dicts mean identical systems."""
    out: dict = {}
    if sys.name:
        out["name"] = sys.name
    if sys.description:
        out["description"] = sys.description
    out.update(
        q=sys.q,
        n=sys.n,
        p=sys.p,
        A0=sys.a0.tolist(),
        B0=sys.b0.tolist(),
    )
    if sys.p:
        out["delays"] = [
            {"tau": tau, "A": mat.tolist()} for tau, mat in zip(sys.taus, sys.a_delays)
        ]
    f = sys.nonlinearity
    nl: dict = {"kind": f.kind}
    if f.kind == "tanh":
        nl["scale"] = f.scale.tolist()
    elif f.kind == "sin_plus_offset":
        nl["scale"] = float(f.scale)
        nl["offset"] = f.offset.tolist()
    elif f.kind == "linear":
        nl["matrix"] = f.matrix.tolist()
    nl["L"] = float(f.lipschitz_L)
    nl["m"] = float(f.offset_m)
    out["nonlinearity"] = nl
    return out


def serialize_system(sys: SystemSpec) -> str:
    return tomli_w.dumps(system_to_dict(sys))


# {{{ presets


def _floats(text: str, what: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ValidationError(f"{what}: expected comma-separated numbers, got {text!r}") from None


def _split(text: str) -> tuple[str, str]:
    kind, _, rest = text.partition(":")
    return kind.strip().lower(), rest


def parse_history_preset(text: str) -> HistoryFn:
    """``constant:v1[,v2..]``, ``poly:c0,c1,..`` or ``sin:amp,freq[,phase]``."""
    kind, rest = _split(text)
    vals = _floats(rest, "history")
    if kind == "constant" and vals:
        return HistoryFn.constant(vals)
    if kind == "poly" and vals:
        return HistoryFn.polynomial(np.array(vals)[:, None])
    if kind == "sin" and len(vals) in (2, 3):
        return HistoryFn.sinusoid([vals[0]], vals[1], vals[2] if len(vals) == 3 else 0.0)
    raise ValidationError(f"unrecognized history preset {text!r}", field="history")


def parse_input_preset(text: str) -> InputSignal:
    """``zero``, ``constant:v1[,v2..]`` or ``sin:amp,freq``."""
    kind, rest = _split(text)
    vals = _floats(rest, "input")
    if kind == "zero" and not vals:
        return InputSignal.zero()
    if kind == "constant" and vals:
        return InputSignal.constant(vals)
    if kind == "sin" and len(vals) == 2:
        return InputSignal.sinusoid([vals[0]], vals[1])
    raise ValidationError(f"unrecognized input preset {text!r}", field="input")


def parse_profile_preset(text: str, grid: np.ndarray, name: str) -> np.ndarray:
    """Sampled scalar profile ``constant:c`` or ``poly:c0,c1,..`` (power basis)."""
    kind, rest = _split(text)
    vals = _floats(rest, name)
    if kind == "constant" and len(vals) == 1:
        return np.full_like(grid, vals[0])
    if kind == "poly" and vals:
        return np.polynomial.polynomial.polyval(grid, vals)
    raise ValidationError(f"unrecognized {name} preset {text!r}", field=name)


# }}}

# {{{ csv


def fmt_state(x: float) -> str:
    """Shortest round-trip decimal."""
    return repr(float(x))


def fmt_scalar(x: float) -> str:
    """Report scalar with 12 significant digits."""
    return f"{float(x):.12g}"


def emit_csv(header: Sequence[str], rows: Iterable[Sequence], destination) -> None:
    """Write *rows* under *header*; LF line endings, no locale formatting.

    *destination* is a path or an open text stream.
    """
    def write(stream) -> None:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            if len(row) != len(header):
                raise ValidationError(
                    f"row has {len(row)} columns, header has {len(header)}"
                )
            writer.writerow(row)

    if hasattr(destination, "write"):
        write(destination)
        return
    path = Path(destination)
    try:
        with path.open("w", encoding="utf-8", newline="") as stream:
            write(stream)
    except OSError as exc:
        raise FracStabError(f"cannot write {path}: {exc.strerror}") from exc


# }}}
