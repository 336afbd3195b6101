"""Minimal tolerant DOM on top of html.parser.

Good enough for export markup: elements with attributes and text, class
matching, document-order traversal. Never raises on malformed input —
mis-nested end tags are ignored, unknown constructs are skipped.
"""
from __future__ import annotations

from html.parser import HTMLParser
from typing import Iterator

VOID_TAGS = frozenset(
    "area base br col embed hr img input link meta param source track wbr".split()
)


class Element:
    __slots__ = ("tag", "attrs", "children", "parent")

    def __init__(self, tag: str, attrs: list[tuple[str, str | None]], parent: "Element | None"):
        self.tag = tag
        self.attrs = attrs
        self.children: list[Element | str] = []
        self.parent = parent

    def attr(self, name: str) -> str | None:
        for key, value in self.attrs:
            if key == name:
                return value
        return None

    @property
    def classes(self) -> set[str]:
        value = self.attr("class") or ""
        return set(value.split())

    def has_classes(self, *names: str) -> bool:
        return set(names) <= self.classes

    def iter(self) -> Iterator["Element"]:
        """All descendant elements in document order, self excluded."""
        for child in self.children:
            if isinstance(child, Element):
                yield child
                yield from child.iter()

    def find(self, tag: str | None = None, *classes: str) -> "Element | None":
        for el in self.iter():
            if tag is not None and el.tag != tag:
                continue
            if classes and not el.has_classes(*classes):
                continue
            return el
        return None

    def find_all(self, tag: str | None = None, *classes: str) -> list["Element"]:
        out = []
        for el in self.iter():
            if tag is not None and el.tag != tag:
                continue
            if classes and not el.has_classes(*classes):
                continue
            out.append(el)
        return out

    def text(self) -> str:
        """Whitespace-normalized text of all descendant data nodes."""
        parts: list[str] = []

        def walk(node: Element) -> None:
            for child in node.children:
                if isinstance(child, str):
                    parts.append(child)
                else:
                    walk(child)

        walk(self)
        return " ".join(" ".join(parts).split())


class _TreeBuilder(HTMLParser):
    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.root = Element("#document", [], None)
        self._stack = [self.root]

    def handle_starttag(self, tag, attrs):
        el = Element(tag, attrs, self._stack[-1])
        self._stack[-1].children.append(el)
        if tag not in VOID_TAGS:
            self._stack.append(el)

    def handle_startendtag(self, tag, attrs):
        self._stack[-1].children.append(Element(tag, attrs, self._stack[-1]))

    def handle_endtag(self, tag):
        # pop to the nearest matching open tag; stray end tags are ignored
        for i in range(len(self._stack) - 1, 0, -1):
            if self._stack[i].tag == tag:
                del self._stack[i:]
                return

    def handle_data(self, data):
        if data:
            self._stack[-1].children.append(data)


def parse_html(text: str) -> Element:
    """Parse HTML text into a document root. Tolerant of anything."""
    builder = _TreeBuilder()
    try:
        builder.feed(text)
        builder.close()
    except Exception:
        pass  # keep whatever tree was built before the parser choked
    return builder.root
