"""
Newick reader/writer with the small NHX subset used throughout suget.

Annotations are written as ``[&&NHX:key=value:...]`` right after a node's
label. Two keys carry meaning downstream: ``S`` (species of a gene leaf)
and ``Ev`` (``Dup`` or ``Spec`` on an internal gene-tree node). Other keys
are kept verbatim. Branch lengths are read and dropped; any non-NHX
bracket comment is skipped.

Usage
-----
>>> tree = parse_newick("((a[&&NHX:S=human],b)[&&NHX:Ev=Dup],c);")
>>> serialize_newick(tree)
'((a[&&NHX:S=human],b)[&&NHX:Ev=Dup],c);'
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Tuple

from .errors import (
    DuplicateLeafLabel,
    EmptyLabelOnLeaf,
    NewickError,
    TrailingGarbage,
    UnbalancedParens,
)

_DELIMITERS = set("()[]:;,'")
_NHX_PREFIX = "&&NHX"


@dataclass
class RawNode:
    label: str = ""
    children: List[int] = field(default_factory=list)
    annotations: Dict[str, str] = field(default_factory=dict)


@dataclass
class RawTree:
    """
    Parsed tree before any phylogenetic interpretation.

    Nodes are stored in pre-order; ``children`` lists keep input order.
    """

    nodes: List[RawNode]
    root: int = 0

    def is_leaf(self, index: int) -> bool:
        return not self.nodes[index].children

    def leaves(self) -> List[int]:
        return [i for i, node in enumerate(self.nodes) if not node.children]

    def leaf_labels(self) -> List[str]:
        return [self.nodes[i].label for i in self.leaves()]

    def parents(self) -> List[int]:
        parent = [-1] * len(self.nodes)
        for i, node in enumerate(self.nodes):
            for child in node.children:
                parent[child] = i
        return parent

    def __str__(self) -> str:
        return serialize_newick(self)


# ---------------------------------------------------------------------------
# Reading
# ---------------------------------------------------------------------------

class _Reader:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def skip_ws(self) -> None:
        text = self.text
        while self.pos < len(text) and text[self.pos].isspace():
            self.pos += 1

    def label(self) -> str:
        self.skip_ws()
        text = self.text
        if self.pos < len(text) and text[self.pos] == "'":
            return self._quoted()
        start = self.pos
        while (
            self.pos < len(text)
            and text[self.pos] not in _DELIMITERS
            and not text[self.pos].isspace()
        ):
            self.pos += 1
        return text[start:self.pos]

    def _quoted(self) -> str:
        text = self.text
        self.pos += 1
        out = []
        while True:
            if self.pos >= len(text):
                raise NewickError("unterminated quoted label")
            char = text[self.pos]
            if char == "'":
                if text[self.pos + 1:self.pos + 2] == "'":
                    out.append("'")
                    self.pos += 2
                    continue
                self.pos += 1
                return "".join(out)
            out.append(char)
            self.pos += 1

    def suffix(self, node: RawNode) -> None:
        """Consume any branch length and bracket comments after a label."""
        text = self.text
        while True:
            char = self.peek()
            if char == ":":
                self.pos += 1
                self.skip_ws()
                start = self.pos
                while (
                    self.pos < len(text)
                    and text[self.pos] not in _DELIMITERS
                    and not text[self.pos].isspace()
                ):
                    self.pos += 1
                length = text[start:self.pos]
                try:
                    float(length)
                except ValueError:
                    raise NewickError(
                        f"bad branch length {length!r} at offset {start}"
                    ) from None
            elif char == "[":
                end = text.find("]", self.pos)
                if end < 0:
                    raise NewickError("unterminated '[' comment")
                body = text[self.pos + 1:end]
                self.pos = end + 1
                if body.startswith(_NHX_PREFIX):
                    node.annotations.update(_parse_nhx(body[len(_NHX_PREFIX):]))
            else:
                return


def _parse_nhx(body: str) -> Dict[str, str]:
    out: Dict[str, str] = {}
    for item in body.split(":"):
        if not item:
            continue
        key, sep, value = item.partition("=")
        if not sep:
            raise NewickError(f"NHX item without '=': {item!r}")
        out[key] = value
    return out


def parse_newick(text: str) -> RawTree:
    """
    Parse a single Newick statement terminated by ``;``.

    Raises UnbalancedParens, EmptyLabelOnLeaf, DuplicateLeafLabel or
    TrailingGarbage on the corresponding defects.
    """
    reader = _Reader(text)
    nodes: List[RawNode] = []
    stack: List[int] = []
    expect_node = True

    if not reader.peek():
        raise NewickError("empty Newick input")

    while True:
        char = reader.peek()
        if expect_node:
            if char == "(":
                reader.pos += 1
                index = len(nodes)
                nodes.append(RawNode())
                if stack:
                    nodes[stack[-1]].children.append(index)
                stack.append(index)
                continue
            if char in ("", ";") and stack:
                raise UnbalancedParens(f"unexpected end of tree at offset {reader.pos}")
            index = len(nodes)
            node = RawNode(label=reader.label())
            nodes.append(node)
            if stack:
                nodes[stack[-1]].children.append(index)
            reader.suffix(node)
            if not node.label:
                raise EmptyLabelOnLeaf(f"leaf without label at offset {reader.pos}")
            expect_node = False
            continue

        if char == ",":
            if not stack:
                raise TrailingGarbage(f"',' outside any clade at offset {reader.pos}")
            reader.pos += 1
            expect_node = True
        elif char == ")":
            if not stack:
                raise UnbalancedParens(f"unmatched ')' at offset {reader.pos}")
            reader.pos += 1
            index = stack.pop()
            nodes[index].label = reader.label()
            reader.suffix(nodes[index])
        elif char == ";":
            if stack:
                raise UnbalancedParens("unclosed '(' before ';'")
            reader.pos += 1
            if reader.peek():
                raise TrailingGarbage(
                    f"unexpected text after ';' at offset {reader.pos}"
                )
            break
        elif char == "":
            if stack:
                raise UnbalancedParens("unclosed '(' at end of input")
            raise NewickError("missing terminating ';'")
        else:
            raise TrailingGarbage(f"unexpected {char!r} at offset {reader.pos}")

    seen = set()
    for node in nodes:
        if not node.children:
            if node.label in seen:
                raise DuplicateLeafLabel(f"leaf label {node.label!r} occurs twice")
            seen.add(node.label)
    return RawTree(nodes=nodes, root=0)


def split_statements(text: str) -> Iterator[str]:
    """Yield each ';'-terminated statement of a multi-tree document."""
    start = 0
    quoted = False
    bracket = False
    for i, char in enumerate(text):
        if quoted:
            if char == "'":
                quoted = False
        elif bracket:
            if char == "]":
                bracket = False
        elif char == "'":
            quoted = True
        elif char == "[":
            bracket = True
        elif char == ";":
            yield text[start:i + 1]
            start = i + 1
    rest = text[start:]
    if rest.strip():
        yield rest


def parse_newick_many(text: str) -> List[RawTree]:
    return [parse_newick(stmt) for stmt in split_statements(text)]


def read_newick_file(path) -> List[RawTree]:
    with open(path) as handle:
        return parse_newick_many(handle.read())


# ---------------------------------------------------------------------------
# Writing
# ---------------------------------------------------------------------------

def _format_label(label: str) -> str:
    if not label:
        return ""
    if any(c in _DELIMITERS or c.isspace() for c in label):
        return "'" + label.replace("'", "''") + "'"
    return label


def _format_annotations(annotations: Dict[str, str]) -> str:
    if not annotations:
        return ""
    for key, value in annotations.items():
        if not key or any(c in ":=]" for c in key) or any(c in ":]" for c in value):
            raise NewickError(f"annotation {key}={value} cannot be written as NHX")
    items = ":".join(f"{key}={value}" for key, value in annotations.items())
    return f"[{_NHX_PREFIX}:{items}]"


def serialize_newick(tree: RawTree) -> str:
    """Write ``tree`` in canonical form: no whitespace, child order kept."""
    parts: List[str] = []
    # (node, next child position); iterative so deep caterpillars are fine
    stack: List[Tuple[int, int]] = [(tree.root, 0)]
    while stack:
        index, pos = stack.pop()
        node = tree.nodes[index]
        if not node.children:
            parts.append(_format_label(node.label))
            parts.append(_format_annotations(node.annotations))
            continue
        if pos == 0:
            parts.append("(")
        elif pos < len(node.children):
            parts.append(",")
        if pos < len(node.children):
            stack.append((index, pos + 1))
            stack.append((node.children[pos], 0))
        else:
            parts.append(")")
            parts.append(_format_label(node.label))
            parts.append(_format_annotations(node.annotations))
    parts.append(";")
    return "".join(parts)
