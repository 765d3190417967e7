"""Lenient HTML parsing, a small CSS-selector subset, and text flattening.

Built on the standard library parser so the harvester has no native
dependencies. The selector subset covers what site configs need:
``tag``, ``#id``, ``.class`` (combinable, e.g. ``div.content``), ``*``,
descendant chains separated by spaces, and comma-separated alternatives.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from html.parser import HTMLParser

from .errors import ValidationError

VOID_ELEMENTS = frozenset(
    "area base br col embed hr img input link meta param source track wbr".split()
)

SKIPPED_ELEMENTS = frozenset(("script", "style", "template", "noscript"))

BLOCK_ELEMENTS = frozenset(
    """
    address article aside blockquote dd div dl dt fieldset figcaption figure
    footer form h1 h2 h3 h4 h5 h6 header hr li main nav ol p pre section
    table td th tr ul
    """.split()
)


class Element:
    """One HTML element; children are Elements and text strings."""

    __slots__ = ("tag", "attrs", "children", "parent")

    def __init__(self, tag: str, attrs: dict[str, str], parent: "Element | None"):
        self.tag = tag
        self.attrs = attrs
        self.children: list[Element | str] = []
        self.parent = parent

    @property
    def classes(self) -> set[str]:
        return set(self.attrs.get("class", "").split())

    def iter_elements(self):
        """Depth-first pre-order over descendant elements."""
        for child in self.children:
            if isinstance(child, Element):
                yield child
                yield from child.iter_elements()

    def __repr__(self) -> str:  # pragma: no cover
        return f"<Element {self.tag}>"


class _TreeBuilder(HTMLParser):
    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.root = Element("#document", {}, None)
        self._stack = [self.root]

    def handle_starttag(self, tag, attrs):
        element = Element(tag, {k: (v or "") for k, v in attrs}, self._stack[-1])
        self._stack[-1].children.append(element)
        if tag not in VOID_ELEMENTS:
            self._stack.append(element)

    def handle_startendtag(self, tag, attrs):
        element = Element(tag, {k: (v or "") for k, v in attrs}, self._stack[-1])
        self._stack[-1].children.append(element)

    def handle_endtag(self, tag):
        for depth in range(len(self._stack) - 1, 0, -1):
            if self._stack[depth].tag == tag:
                del self._stack[depth:]
                return
        # Stray end tag: ignore.

    def handle_data(self, data):
        if data:
            self._stack[-1].children.append(data)


def parse_html(data: bytes | str) -> Element:
    """Parse possibly broken HTML into an element tree."""
    if isinstance(data, bytes):
        data = data.decode("utf-8", errors="replace")
    builder = _TreeBuilder()
    builder.feed(data)
    builder.close()
    return builder.root


@dataclass(frozen=True)
class SimpleSelector:
    tag: str | None
    element_id: str | None
    classes: frozenset[str]

    def matches(self, element: Element) -> bool:
        if self.tag is not None and element.tag != self.tag:
            return False
        if self.element_id is not None and element.attrs.get("id") != self.element_id:
            return False
        return self.classes <= element.classes


_SIMPLE_RE = re.compile(r"([a-zA-Z][\w-]*|\*)?((?:[#.][\w-]+)*)$")


def parse_selector(selector: str) -> list[list[SimpleSelector]]:
    """Parse a selector string into alternatives of descendant chains."""
    if not selector or not selector.strip():
        raise ValidationError("selector must be non-empty")
    alternatives = []
    for alternative in selector.split(","):
        chain = []
        for part in alternative.split():
            match = _SIMPLE_RE.match(part)
            if not match or (not match.group(1) and not match.group(2)):
                raise ValidationError(f"unsupported selector part {part!r}")
            tag = match.group(1)
            if tag == "*":
                tag = None
            element_id = None
            classes = set()
            for qualifier in re.findall(r"[#.][\w-]+", match.group(2) or ""):
                if qualifier.startswith("#"):
                    element_id = qualifier[1:]
                else:
                    classes.add(qualifier[1:])
            chain.append(
                SimpleSelector(
                    tag=tag, element_id=element_id, classes=frozenset(classes)
                )
            )
        if not chain:
            raise ValidationError(f"empty selector alternative in {selector!r}")
        alternatives.append(chain)
    return alternatives


def _chain_matches(element: Element, chain: list[SimpleSelector]) -> bool:
    if not chain[-1].matches(element):
        return False
    remaining = chain[:-1]
    ancestor = element.parent
    while remaining and ancestor is not None:
        if remaining[-1].matches(ancestor):
            remaining.pop()
        ancestor = ancestor.parent
    return not remaining


def select(root: Element, selector: str) -> list[Element]:
    """All elements matching the selector, in document order."""
    alternatives = parse_selector(selector)
    return [
        element
        for element in root.iter_elements()
        if any(_chain_matches(element, list(chain)) for chain in alternatives)
    ]


def top_level(elements: list[Element]) -> list[Element]:
    """Drop elements that are descendants of other elements in the list."""
    chosen: list[Element] = []
    element_set = set(map(id, elements))
    for element in elements:
        ancestor = element.parent
        nested = False
        while ancestor is not None:
            if id(ancestor) in element_set:
                nested = True
                break
            ancestor = ancestor.parent
        if not nested:
            chosen.append(element)
    return chosen


def extract_paragraphs(
    nodes: list[Element], removed: set[int] | None = None
) -> list[str]:
    """Flatten elements to paragraphs.

    Block elements and ``<br>`` runs become paragraph boundaries;
    whitespace is collapsed; empty paragraphs are dropped. Elements whose
    ``id()`` is in ``removed`` are skipped entirely, as are scripts and
    styles.
    """
    removed = removed or set()
    paragraphs: list[str] = []
    buffer: list[str] = []

    def flush() -> None:
        text = " ".join("".join(buffer).split())
        buffer.clear()
        if text:
            paragraphs.append(text)

    def walk(element: Element) -> None:
        for child in element.children:
            if isinstance(child, str):
                buffer.append(child)
                continue
            if id(child) in removed or child.tag in SKIPPED_ELEMENTS:
                continue
            if child.tag == "br":
                flush()
                continue
            is_block = child.tag in BLOCK_ELEMENTS
            if is_block:
                flush()
            walk(child)
            if is_block:
                flush()

    for node in nodes:
        flush()
        walk(node)
        flush()
    return paragraphs


def collect_links(root: Element) -> list[str]:
    """All ``<a href>`` values in document order, duplicates kept."""
    links = []
    for element in root.iter_elements():
        if element.tag == "a" and "href" in element.attrs:
            links.append(element.attrs["href"])
    return links


def find_title(root: Element) -> str:
    """The ``<title>`` text, else the first ``<h1>``, else empty."""
    for tag in ("title", "h1"):
        for element in root.iter_elements():
            if element.tag == tag:
                text = " ".join(
                    "".join(
                        child for child in _iter_text(element)
                    ).split()
                )
                if text:
                    return text
    return ""


def _iter_text(element: Element):
    for child in element.children:
        if isinstance(child, str):
            yield child
        elif child.tag not in SKIPPED_ELEMENTS:
            yield from _iter_text(child)
