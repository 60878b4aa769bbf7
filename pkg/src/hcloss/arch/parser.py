"""Parser and canonical printer for the textual architecture notation.

One layer per ``;``-terminated clause. A clause is ``kind:attrs:options:activations``
(trailing empty fields may be dropped), optionally followed by ``->label`` to name
the layer's output. ``#`` starts a comment. Clause kinds::

    in:yx:image(28)        input with signal axes ``yx``, name ``image`` and extent 28
    in:yx/3:image(112)     same with 3 feature channels (default 1)
    conv:3x16::r           16 kernels of size 3, no options, ReLU
    conv:5x64:p:br         zero padding, batch-norm then ReLU
    pool:2:m               max pooling in blocks (and strides) of 2
    drop:50                drop 50 percent at training time
    dense:n::r ->x         n output features (bound at shape inference), ReLU
    norm ->norm            x / ||x||
    from:x                 continue from the output labelled ``x``
    centers(C) ->centers   Hadamard centroid layer with parameter matrix ``C``

Feature counts may be integers or one of the symbols ``n`` (embedding size) and
``K`` / ``P`` (class count).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

from ..errors import (
    DuplicateLabelError,
    MalformedAttributeError,
    UnknownLayerError,
    UnknownOptionError,
    UnresolvedReferenceError,
)

Count = Union[int, str]

LAYER_KINDS = ("input", "conv", "pool", "dense", "dropout", "normalize", "centers", "label-ref")
KEYWORDS = {
    "in": "input",
    "conv": "conv",
    "pool": "pool",
    "dense": "dense",
    "drop": "dropout",
    "norm": "normalize",
    "from": "label-ref",
    "centers": "centers",
}
KEYWORD_OF = {kind: key for key, kind in KEYWORDS.items()}
ACTIVATIONS = {"r": "relu", "b": "batchnorm"}
ACTIVATION_CODE = {name: code for code, name in ACTIVATIONS.items()}
POOL_TECHNIQUES = {"m": "max"}
CONV_OPTIONS = {"p": "padding"}
SYMBOLS = ("n", "K", "P")

_LABEL_RE = re.compile(r"^(?P<body>.*?)\s*->\s*(?P<label>[A-Za-z_][A-Za-z0-9_]*)\s*$", re.S)
_KIND_RE = re.compile(r"^(?P<kind>[A-Za-z_]+)(?:\((?P<arg>[^()]*)\))?$")
_COUNT_RE = re.compile(r"^(?:\d+|[A-Za-z_][A-Za-z0-9_]*)$")
_INPUT_RE = re.compile(r"^(?P<name>[A-Za-z_][A-Za-z0-9_]*)(?:\((?P<extent>\d+)\))?$")
_AXES_RE = re.compile(r"^(?P<axes>[a-z]+)(?:/(?P<channels>\d+))?$")


@dataclass(frozen=True)
class LayerSpec:
    """One clause of an architecture description.

    Attributes:
        kind: One of ``LAYER_KINDS``.
        size: Kernel size (conv), block size (pool) or input extent (input, ``None`` if unbound).
        features: Kernel count (conv), output features (dense) or input channels; int or symbol.
        rate: Drop-out percentage (dropout).
        options: Option codes, e.g. ``("p",)`` for padded convolution.
        activations: Activation names applied after the layer, in order.
        label: Name of this layer's output, if tapped.
        ref: Referenced label (label-ref), input name (input) or parameter name (centers).
        axes: Signal axes of the input layer.
        line: 1-based source line.
        column: 1-based source column.
    """

    kind: str
    size: Optional[int] = None
    features: Optional[Count] = None
    rate: Optional[float] = None
    options: Tuple[str, ...] = ()
    activations: Tuple[str, ...] = ()
    label: Optional[str] = None
    ref: Optional[str] = None
    axes: Optional[str] = None
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)

    @property
    def padded(self) -> bool:
        return "p" in self.options


@dataclass(frozen=True)
class ArchGraph:
    """Ordered layer specs; ``layers[0]`` is the single input."""

    layers: Tuple[LayerSpec, ...]
    name: Optional[str] = field(default=None, compare=False)

    @property
    def input(self) -> LayerSpec:
        return self.layers[0]

    @property
    def body(self) -> Tuple[LayerSpec, ...]:
        """Layers after the input."""
        return self.layers[1:]

    @property
    def taps(self) -> Dict[str, int]:
        return {spec.label: i for i, spec in enumerate(self.layers) if spec.label}

    @property
    def centers(self) -> Optional[LayerSpec]:
        return next((spec for spec in self.layers if spec.kind == "centers"), None)

    def __len__(self) -> int:
        return len(self.layers)


def _split_clauses(text: str) -> List[Tuple[str, int, int]]:
    """Split text into ``(clause, line, column)`` triples, dropping comments."""
    clauses: List[Tuple[str, int, int]] = []
    buf: List[str] = []
    start: Optional[Tuple[int, int]] = None
    line, col = 1, 1
    in_comment = False
    for ch in text:
        if in_comment:
            if ch == "\n":
                in_comment = False
        elif ch == "#":
            in_comment = True
        elif ch == ";":
            clauses.append(("".join(buf).strip(), *(start or (line, col))))
            buf, start = [], None
        else:
            if start is None and not ch.isspace():
                start = (line, col)
            buf.append(ch)
        if ch == "\n":
            line, col = line + 1, 1
        else:
            col += 1
    if "".join(buf).strip():
        raise MalformedAttributeError("clause is not terminated by ';'", *(start or (line, col)))
    return [c for c in clauses if c[0]]


def _count(token: str, what: str, line: int, col: int) -> Count:
    token = token.strip()
    if not _COUNT_RE.match(token):
        raise MalformedAttributeError(f"{what} must be an integer or a symbol, got '{token}'", line, col)
    if token.isdigit():
        value = int(token)
        if value <= 0:
            raise MalformedAttributeError(f"{what} must be positive, got {value}", line, col)
        return value
    if token not in SYMBOLS:
        raise UnresolvedReferenceError(f"unknown symbol '{token}' for {what}; known symbols are {list(SYMBOLS)}", line, col)
    return token


def _activations(token: str, line: int, col: int) -> Tuple[str, ...]:
    names = []
    for code in token.strip():
        if code not in ACTIVATIONS:
            raise UnknownOptionError(f"unknown activation '{code}'", line, col)
        names.append(ACTIVATIONS[code])
    return tuple(names)


def _fields(body: str, n: int, kind: str, line: int, col: int) -> List[str]:
    parts = body.split(":")
    if len(parts) > n:
        raise MalformedAttributeError(f"'{kind}' takes at most {n - 1} fields, got {len(parts) - 1}", line, col)
    return parts + [""] * (n - len(parts))


def _parse_clause(clause: str, line: int, col: int) -> LayerSpec:
    label = None
    m = _LABEL_RE.match(clause)
    if m:
        clause, label = m.group("body").strip(), m.group("label")
    elif "->" in clause:
        raise MalformedAttributeError(f"bad label in '{clause}'", line, col)

    head, _, rest = clause.partition(":")
    km = _KIND_RE.match(head.strip())
    if not km or km.group("kind") not in KEYWORDS:
        raise UnknownLayerError(f"'{head.strip()}'", line, col)
    keyword, arg = km.group("kind"), km.group("arg")
    kind = KEYWORDS[keyword]
    if arg is not None and kind != "centers":
        raise MalformedAttributeError(f"'{keyword}' takes no parenthesised argument", line, col)

    if kind == "input":
        axes_tok, name_tok = _fields(rest, 2, keyword, line, col)
        am = _AXES_RE.match(axes_tok.strip())
        nm = _INPUT_RE.match(name_tok.strip())
        if not am or not nm:
            raise MalformedAttributeError(f"input must look like 'in:yx:image(28)', got '{clause}'", line, col)
        extent = int(nm.group("extent")) if nm.group("extent") else None
        channels = int(am.group("channels")) if am.group("channels") else 1
        if extent == 0 or channels == 0:
            raise MalformedAttributeError("input extent and channels must be positive", line, col)
        return LayerSpec("input", size=extent, features=channels, axes=am.group("axes"), ref=nm.group("name"), label=label, line=line, column=col)

    if kind == "conv":
        attrs, options, acts = _fields(rest, 3, keyword, line, col)
        if "x" not in attrs:
            raise MalformedAttributeError(f"conv needs 'KxB' (kernel size x kernel count), got '{attrs}'", line, col)
        size_tok, count_tok = attrs.split("x", 1)
        size = _count(size_tok, "kernel size", line, col)
        if not isinstance(size, int):
            raise MalformedAttributeError("kernel size must be an integer", line, col)
        for code in options.strip():
            if code not in CONV_OPTIONS:
                raise UnknownOptionError(f"unknown convolution option '{code}'", line, col)
        return LayerSpec(
            "conv",
            size=size,
            features=_count(count_tok, "kernel count", line, col),
            options=tuple(sorted(set(options.strip()))),
            activations=_activations(acts, line, col),
            label=label,
            line=line,
            column=col,
        )

    if kind == "pool":
        size_tok, technique = _fields(rest, 2, keyword, line, col)
        size = _count(size_tok, "pool size", line, col)
        if not isinstance(size, int):
            raise MalformedAttributeError("pool size must be an integer", line, col)
        technique = technique.strip()
        if technique not in POOL_TECHNIQUES:
            raise UnknownOptionError(f"unknown pooling technique '{technique}'", line, col)
        return LayerSpec("pool", size=size, options=(technique,), label=label, line=line, column=col)

    if kind == "dropout":
        (rate_tok,) = _fields(rest, 1, keyword, line, col)
        try:
            rate = float(rate_tok)
        except ValueError:
            raise MalformedAttributeError(f"drop-out percentage must be a number, got '{rate_tok}'", line, col) from None
        if not 0.0 < rate < 100.0:
            raise MalformedAttributeError(f"drop-out percentage must be in (0, 100), got {rate:g}", line, col)
        return LayerSpec("dropout", rate=rate, label=label, line=line, column=col)

    if kind == "dense":
        count_tok, options, acts = _fields(rest, 3, keyword, line, col)
        if options.strip():
            raise UnknownOptionError(f"dense layers take no options, got '{options.strip()}'", line, col)
        return LayerSpec("dense", features=_count(count_tok, "feature count", line, col), activations=_activations(acts, line, col), label=label, line=line, column=col)

    if kind == "normalize":
        if rest.strip():
            raise MalformedAttributeError("norm takes no fields", line, col)
        return LayerSpec("normalize", label=label, line=line, column=col)

    if kind == "label-ref":
        (ref,) = _fields(rest, 1, keyword, line, col)
        if not re.match(r"^[A-Za-z_][A-Za-z0-9_]*$", ref.strip()):
            raise MalformedAttributeError(f"bad label reference '{ref}'", line, col)
        if label:
            raise MalformedAttributeError("a label reference cannot itself be labelled", line, col)
        return LayerSpec("label-ref", ref=ref.strip(), line=line, column=col)

    # centers
    if rest.strip():
        raise MalformedAttributeError("centers takes no fields", line, col)
    param = (arg or "C").strip()
    if not re.match(r"^[A-Za-z_][A-Za-z0-9_]*$", param):
        raise MalformedAttributeError(f"bad parameter name '{param}'", line, col)
    return LayerSpec("centers", ref=param, label=label, line=line, column=col)


def _validate(layers: List[LayerSpec]) -> None:
    if not layers or layers[0].kind != "input":
        where = (layers[0].line, layers[0].column) if layers else (1, 1)
        raise MalformedAttributeError("the first clause must be the input layer", *where)
    seen: Dict[str, LayerSpec] = {}
    for spec in layers[1:]:
        if spec.kind == "input":
            raise MalformedAttributeError("only one input layer is allowed", spec.line, spec.column)
    for spec in layers:
        if spec.kind == "label-ref" and spec.ref not in seen:
            raise UnresolvedReferenceError(f"label '{spec.ref}' is not defined before use", spec.line, spec.column)
        if spec.kind == "centers" and not ("x" in seen or "norm" in seen):
            raise UnresolvedReferenceError("centers need an embedding tapped as 'x' (or 'norm') before them", spec.line, spec.column)
        if spec.label:
            if spec.label in seen:
                raise DuplicateLabelError(f"'{spec.label}' already labels the layer at line {seen[spec.label].line}", spec.line, spec.column)
            seen[spec.label] = spec


def parse(text: str, name: Optional[str] = None) -> ArchGraph:
    """Parse architecture text into an ``ArchGraph``.

    Raises:
        ArchParseError: The first problem found, as one of its five subclasses,
            carrying line and column.
    """
    layers = [_parse_clause(clause, line, col) for clause, line, col in _split_clauses(text)]
    _validate(layers)
    return ArchGraph(tuple(layers), name=name)


def format_layer(spec: LayerSpec) -> str:
    key = KEYWORD_OF[spec.kind]
    acts = "".join(ACTIVATION_CODE[a] for a in spec.activations)
    if spec.kind == "input":
        axes = spec.axes if spec.features in (None, 1) else f"{spec.axes}/{spec.features}"
        extent = f"({spec.size})" if spec.size is not None else ""
        body = f"in:{axes}:{spec.ref}{extent}"
    elif spec.kind == "conv":
        body = f"conv:{spec.size}x{spec.features}:{''.join(spec.options)}:{acts}".rstrip(":")
    elif spec.kind == "pool":
        body = f"pool:{spec.size}:{''.join(spec.options)}"
    elif spec.kind == "dropout":
        body = f"drop:{spec.rate:g}"
    elif spec.kind == "dense":
        body = f"dense:{spec.features}::{acts}".rstrip(":")
    elif spec.kind == "normalize":
        body = "norm"
    elif spec.kind == "label-ref":
        body = f"from:{spec.ref}"
    else:
        body = f"centers({spec.ref})"
    return f"{body} ->{spec.label};" if spec.label else f"{body};"


def format_graph(graph: ArchGraph) -> str:
    """Canonical text; ``parse(format_graph(g)) == g``."""
    return "\n".join(format_layer(spec) for spec in graph.layers) + "\n"


__all__ = ["LayerSpec", "ArchGraph", "parse", "format_layer", "format_graph", "LAYER_KINDS", "SYMBOLS"]
