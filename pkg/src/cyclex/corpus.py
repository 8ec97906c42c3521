"""Document ingestion: ImageCLEF-style XML metadata or JSON lines."""

from __future__ import annotations

import io
import json
import logging
import os
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Mapping

log = logging.getLogger(__name__)

XML_LANG = "{http://www.w3.org/XML/1998/namespace}lang"


class CorpusError(ValueError):
    pass


@dataclass(frozen=True)
class ElementPaths:
    """Where the three linkable fields live inside a metadata file.

    Each value is an ElementTree path relative to the root element, or
    ``@attr`` for an attribute of the root.  ``[@xml:lang='en']`` is
    accepted as shorthand for the XML namespace attribute.
    """

    name: str = "name"
    english: str = "text[@xml:lang='en']"
    comment: str = "comment"


@dataclass
class Document:
    doc_id: str
    raw_fields: dict[str, str] = field(default_factory=dict)
    extracted_text: str = ""

    def __post_init__(self):
        if not self.doc_id:
            raise CorpusError("document without id")


@dataclass
class Corpus:
    documents: dict[str, Document] = field(default_factory=dict)
    failures: list[tuple[str, str]] = field(default_factory=list)

    def add(self, doc: Document) -> None:
        if doc.doc_id in self.documents:
            raise CorpusError(f"duplicate doc_id {doc.doc_id!r}")
        self.documents[doc.doc_id] = doc

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents.values())


def _lookup(root: ET.Element, path: str) -> str | None:
    if path.startswith("@"):
        return root.get(path[1:])
    path = path.replace("@xml:lang", "@" + XML_LANG)
    element = root.find(path)
    if element is None:
        return None
    return " ".join(" ".join(element.itertext()).split())


def parse_metadata_xml(stream: BinaryIO | bytes, doc_id: str | None = None, paths: ElementPaths = ElementPaths()) -> Document:
    """Parse one metadata file into a :class:`Document` with extracted text."""
    data = stream if isinstance(stream, bytes) else stream.read()
    try:
        root = ET.parse(io.BytesIO(data)).getroot()
    except ET.ParseError as exc:
        line, col = exc.position
        raise CorpusError(f"malformed XML at line {line}, column {col}") from None
    name = _lookup(root, paths.name)
    if not name:
        raise CorpusError("metadata file has no name")
    raw = {"name": name}
    for key, path in (("english", paths.english), ("comment", paths.comment)):
        value = _lookup(root, path)
        if value:
            raw[key] = value
    doc = Document(doc_id or root.get("id") or name, raw)
    doc.extracted_text = extract_text(doc)
    return doc


def _file_stem_text(name: str) -> str:
    base = os.path.basename(name.strip())
    stem, dot, _ = base.rpartition(".")
    if not dot:
        stem = base
    for sep in "_-.":
        stem = stem.replace(sep, " ")
    return " ".join(stem.split())


def extract_text(doc: Document) -> str:
    """Join file name (sans extension), English section and general comment."""
    raw: Mapping[str, str] = doc.raw_fields
    if "text" in raw and len(raw) == 1:
        return raw["text"]
    parts = [
        _file_stem_text(raw.get("name", "")),
        " ".join(raw.get("english", "").split()),
        " ".join(raw.get("comment", "").split()),
    ]
    return " ".join(p for p in parts if p)


def load_corpus(path: str | Path, paths: ElementPaths = ElementPaths()) -> Corpus:
    """Load a directory of ``*.xml`` metadata files or a JSONL file.

    Per-file failures are logged and collected on ``Corpus.failures``.
    """
    path = Path(path)
    corpus = Corpus()
    if path.is_dir():
        files = sorted(p for p in path.iterdir() if p.suffix.lower() == ".xml")
        for p in files:
            try:
                doc = parse_metadata_xml(p.read_bytes(), doc_id=p.stem, paths=paths)
                corpus.add(doc)
            except (CorpusError, OSError) as exc:
                log.warning("skipping %s: %s", p.name, exc)
                corpus.failures.append((p.name, str(exc)))
        if not files:
            log.warning("no XML documents found in %s", path)
        return corpus
    try:
        handle = open(path, encoding="utf-8")
    except OSError as exc:
        raise CorpusError(f"cannot read corpus {path}: {exc.strerror}") from None
    with handle:
        for lineno, line in enumerate(handle, 1):
            if not line.strip() or line.startswith("#"):
                continue
            try:
                rec = json.loads(line)
                doc = Document(str(rec["doc_id"]), {"text": rec["text"]}, rec["text"])
                corpus.add(doc)
            except (json.JSONDecodeError, KeyError, TypeError, CorpusError) as exc:
                msg = f"line {lineno}: {exc}"
                log.warning("skipping %s %s", path.name, msg)
                corpus.failures.append((f"{path.name}:{lineno}", str(exc)))
    if not corpus.documents:
        log.warning("corpus %s is empty", path)
    return corpus


def write_corpus_jsonl(corpus: Corpus, path: str | Path, header: str | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        if header:
            f.write(f"# {header}\n")
        for doc_id in sorted(corpus.documents):
            rec = {"doc_id": doc_id, "text": corpus.documents[doc_id].extracted_text}
            f.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")
