"""PDF to Markdown conversion for question attachments.

Text-layer extraction only (no OCR): parses the PDF object graph, walks
pages in /Kids order, inflates FlateDecode content streams, and collects
the text-showing operators (Tj, TJ, ', ").  Each page starts with an HTML
comment page marker so page boundaries survive in the Markdown.
Encrypted or structurally broken files raise UnreadablePdf.
"""
from __future__ import annotations

import re
import zlib

from .errors import UnreadablePdf

_OBJ_RE = re.compile(rb"(\d+)\s+(\d+)\s+obj\b(.*?)endobj", re.DOTALL)
_STREAM_RE = re.compile(rb"stream\r?\n(.*?)\r?\nendstream", re.DOTALL)
_REF_RE = re.compile(rb"(\d+)\s+0\s+R")

PAGE_MARKER = "<!-- page {n} -->"


def _parse_objects(data: bytes) -> dict[int, bytes]:
    objects: dict[int, bytes] = {}
    for match in _OBJ_RE.finditer(data):
        objects[int(match.group(1))] = match.group(3)
    return objects


def _dict_part(body: bytes) -> bytes:
    end = body.find(b"stream")
    return body if end == -1 else body[:end]


def _object_stream(body: bytes) -> bytes | None:
    match = _STREAM_RE.search(body)
    if match is None:
        return None
    raw = match.group(1)
    if b"/FlateDecode" in _dict_part(body):
        try:
            return zlib.decompress(raw)
        except zlib.error as exc:
            raise UnreadablePdf(f"bad FlateDecode stream: {exc}") from None
    if b"/Filter" in _dict_part(body):
        raise UnreadablePdf("unsupported stream filter (only FlateDecode is handled)")
    return raw


def _decode_pdf_string(raw: bytes) -> str:
    out = []
    i = 0
    while i < len(raw):
        ch = raw[i : i + 1]
        if ch == b"\\":
            nxt = raw[i + 1 : i + 2]
            mapping = {b"n": "\n", b"r": "\r", b"t": "\t", b"b": "\b", b"f": "\f",
                       b"(": "(", b")": ")", b"\\": "\\"}
            if nxt in mapping:
                out.append(mapping[nxt])
                i += 2
                continue
            if nxt.isdigit():
                octal = raw[i + 1 : i + 4]
                digits = re.match(rb"[0-7]{1,3}", octal)
                if digits:
                    out.append(chr(int(digits.group(0), 8)))
                    i += 1 + len(digits.group(0))
                    continue
            i += 1
            continue
        out.append(ch.decode("latin-1"))
        i += 1
    return "".join(out)


_TEXT_OP_RE = re.compile(
    rb"\((?P<str>(?:[^()\\]|\\.)*)\)\s*(?P<op>Tj|'|\")"
    rb"|\[(?P<arr>(?:[^\]\\]|\\.)*)\]\s*TJ"
    rb"|(?P<nl>T\*|TD|Td)"
)
_ARR_STR_RE = re.compile(rb"\((?:[^()\\]|\\.)*\)")


def _extract_text(content: bytes) -> str:
    lines: list[str] = []
    current: list[str] = []
    for match in _TEXT_OP_RE.finditer(content):
        if match.group("nl") is not None:
            if current:
                lines.append("".join(current))
                current = []
            continue
        if match.group("arr") is not None:
            for s in _ARR_STR_RE.finditer(match.group("arr")):
                current.append(_decode_pdf_string(s.group(0)[1:-1]))
            continue
        if match.group("op") in (b"'", b'"') and current:
            lines.append("".join(current))
            current = []
        current.append(_decode_pdf_string(match.group("str")))
    if current:
        lines.append("".join(current))
    return "\n".join(line for line in lines if line.strip())


def _page_order(objects: dict[int, bytes]) -> list[int]:
    pages = {
        num: body
        for num, body in objects.items()
        if re.search(rb"/Type\s*/Page\b", _dict_part(body))
        and not re.search(rb"/Type\s*/Pages\b", _dict_part(body))
    }
    ordered: list[int] = []
    for num, body in objects.items():
        if re.search(rb"/Type\s*/Pages\b", _dict_part(body)):
            kids = re.search(rb"/Kids\s*\[(.*?)\]", _dict_part(body), re.DOTALL)
            if kids:
                for ref in _REF_RE.finditer(kids.group(1)):
                    ref_num = int(ref.group(1))
                    if ref_num in pages and ref_num not in ordered:
                        ordered.append(ref_num)
    for num in sorted(pages):
        if num not in ordered:
            ordered.append(num)
    return ordered


def convert_pdf(data: bytes) -> str:
    """Convert PDF bytes into Markdown with per-page markers."""
    if not data.startswith(b"%PDF-"):
        raise UnreadablePdf("not a PDF (missing %PDF header)")
    if re.search(rb"/Encrypt\b", data):
        raise UnreadablePdf("encrypted PDFs are not supported")
    objects = _parse_objects(data)
    if not objects:
        raise UnreadablePdf("no objects found")
    page_ids = _page_order(objects)
    if not page_ids:
        raise UnreadablePdf("no pages found")

    chunks: list[str] = []
    for n, page_id in enumerate(page_ids, start=1):
        body = objects[page_id]
        content_refs: list[int] = []
        contents = re.search(rb"/Contents\s*(\[(?:[^\]]*)\]|\d+\s+0\s+R)", _dict_part(body))
        if contents:
            content_refs = [int(m.group(1)) for m in _REF_RE.finditer(contents.group(1))]
        text_parts = []
        for ref in content_refs:
            if ref not in objects:
                continue
            stream = _object_stream(objects[ref])
            if stream:
                text_parts.append(_extract_text(stream))
        page_text = "\n".join(p for p in text_parts if p)
        chunks.append(PAGE_MARKER.format(n=n) + ("\n\n" + page_text if page_text else ""))
    return "\n\n".join(chunks) + "\n"
