"""Little-endian binary framing shared by the embedding and model files."""

from __future__ import annotations

import struct


class FormatError(Exception):
    """Base class for malformed binary files."""


class BadMagicError(FormatError):
    pass


class UnsupportedVersionError(FormatError):
    pass


class TruncatedPayloadError(FormatError):
    pass


class Reader:
    """Cursor over `data` that raises TruncatedPayloadError on shortage."""

    def __init__(self, data: bytes, label: str):
        self.data = data
        self.pos = 0
        self.label = label

    def take(self, n: int, what: str) -> bytes:
        end = self.pos + n
        if end > len(self.data):
            raise TruncatedPayloadError(
                f"{self.label}: truncated while reading {what} "
                f"(need {n} bytes at offset {self.pos}, have {len(self.data) - self.pos})"
            )
        chunk = self.data[self.pos:end]
        self.pos = end
        return chunk

    def u16(self, what: str) -> int:
        return struct.unpack("<H", self.take(2, what))[0]

    def u32(self, what: str) -> int:
        return struct.unpack("<I", self.take(4, what))[0]

    def string(self, what: str) -> str:
        n = self.u16(f"{what} length")
        return self.take(n, what).decode("utf-8")

    def expect_magic(self, magic: bytes) -> None:
        got = self.take(len(magic), "magic")
        if got != magic:
            raise BadMagicError(f"{self.label}: bad magic {got!r}, expected {magic!r}")

    def expect_version(self, supported: int) -> None:
        version = self.u16("version")
        if version != supported:
            raise UnsupportedVersionError(
                f"{self.label}: unsupported version {version} (supported: {supported})"
            )

    def expect_end(self) -> None:
        if self.pos != len(self.data):
            raise FormatError(
                f"{self.label}: {len(self.data) - self.pos} trailing bytes after payload"
            )


def pack_string(s: str) -> bytes:
    raw = s.encode("utf-8")
    if len(raw) > 0xFFFF:
        raise ValueError(f"string too long to encode ({len(raw)} bytes)")
    return struct.pack("<H", len(raw)) + raw
