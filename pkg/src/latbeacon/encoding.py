"""Canonical byte encoding shared by transcripts, files and challenge hashing.

Unsigned residues use a fixed little-endian width derived from q. Signed
vectors are zigzag mapped and stored at the smallest width that fits,
announced by a one-byte width prefix. Sequences carry a u64 length prefix,
maps are written in sorted key order and absent values are a 0/1 flag.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import DecodeError


def _fixed_bytes(arr: np.ndarray, width: int) -> bytes:
    arr = np.ascontiguousarray(arr, dtype=np.int64).ravel()
    if arr.size and (arr.min() < 0 or (width < 8 and arr.max() >= 1 << (8 * width))):
        raise ValueError("value does not fit the fixed integer width")
    return arr.astype("<u8").view(np.uint8).reshape(-1, 8)[:, :width].tobytes()


def _zigzag(arr: np.ndarray) -> np.ndarray:
    arr = np.asarray(arr, dtype=np.int64)
    return np.where(arr >= 0, arr * 2, -arr * 2 - 1)


def _byte_len(values: np.ndarray) -> np.ndarray:
    """Smallest byte width (at least one) holding each non-negative value."""
    values = np.asarray(values, dtype=np.int64)
    width = np.ones(values.shape, dtype=np.int64)
    for k in range(1, 8):
        width += values >= (1 << (8 * k))
    return width


class Writer:
    def __init__(self, width: int):
        self.width = width
        self.parts: list[bytes] = []

    def raw(self, data: bytes) -> Writer:
        self.parts.append(bytes(data))
        return self

    def u8(self, x: int) -> Writer:
        return self.raw(struct.pack("<B", x))

    def u16(self, x: int) -> Writer:
        return self.raw(struct.pack("<H", x))

    def u64(self, x: int) -> Writer:
        return self.raw(struct.pack("<Q", x))

    def f64(self, x: float) -> Writer:
        return self.raw(struct.pack("<d", x))

    def blob(self, data: bytes) -> Writer:
        return self.u64(len(data)).raw(data)

    def text(self, s: str) -> Writer:
        return self.blob(s.encode())

    def flag(self, present: bool) -> Writer:
        return self.u8(1 if present else 0)

    def zq(self, x: int) -> Writer:
        return self.raw(_fixed_bytes(np.array([x]), self.width))

    def zq_vec(self, arr) -> Writer:
        arr = np.asarray(arr)
        return self.u64(arr.size).raw(_fixed_bytes(arr, self.width))

    def zq_mat(self, arr) -> Writer:
        arr = np.asarray(arr)
        return self.u64(arr.shape[0]).u64(arr.shape[1]).raw(_fixed_bytes(arr, self.width))

    def z_vec(self, arr) -> Writer:
        zz = _zigzag(arr)
        width = int(_byte_len(zz.max() if zz.size else 0))
        return self.u64(zz.size).u8(width).raw(_fixed_bytes(zz, width))

    def zq_rows(self, mat) -> Writer:
        """Sequence of equal-length residue vectors, same bytes as repeated zq_vec."""
        mat = np.asarray(mat, dtype=np.int64)
        rows, cols = mat.shape
        self.u64(rows)
        if rows:
            body = np.frombuffer(_fixed_bytes(mat, self.width), dtype=np.uint8).reshape(rows, -1)
            prefix = np.full((rows, 1), cols, dtype="<u8").view(np.uint8)
            self.raw(np.hstack([prefix, body]).tobytes())
        return self

    def z_rows(self, mat) -> Writer:
        """Sequence of signed vectors, same bytes as repeated z_vec."""
        mat = np.asarray(mat, dtype=np.int64)
        rows, cols = mat.shape
        self.u64(rows)
        if not rows:
            return self
        zz = _zigzag(mat)
        tops = zz.max(axis=1) if cols else np.zeros(rows, dtype=np.int64)
        widths = _byte_len(tops)
        head = np.zeros((rows, 9), dtype=np.uint8)
        head[:, :8] = np.full((rows, 1), cols, dtype="<u8").view(np.uint8)
        head[:, 8] = widths
        if np.all(widths == widths[0]):
            body = np.frombuffer(_fixed_bytes(zz, int(widths[0])), dtype=np.uint8).reshape(rows, -1)
            return self.raw(np.hstack([head, body]).tobytes())
        chunks = [b""] * rows
        for width in np.unique(widths):
            idx = np.flatnonzero(widths == width)
            body = np.frombuffer(_fixed_bytes(zz[idx], int(width)), dtype=np.uint8).reshape(len(idx), -1)
            for k, i in enumerate(idx):
                chunks[i] = head[i].tobytes() + body[k].tobytes()
        return self.raw(b"".join(chunks))

    def ids(self, items) -> Writer:
        items = list(items)
        self.u64(len(items))
        for i in items:
            self.u64(i)
        return self

    def bits(self, bits) -> Writer:
        bits = np.asarray(bits, dtype=np.uint8)
        return self.u64(bits.size).raw(np.packbits(bits, bitorder="little").tobytes())

    def getvalue(self) -> bytes:
        return b"".join(self.parts)


class Reader:
    def __init__(self, data: bytes, width: int):
        self.data = memoryview(data)
        self.pos = 0
        self.width = width

    def take(self, n: int) -> bytes:
        if n < 0 or self.pos + n > len(self.data):
            raise DecodeError("malformed", "unexpected end of data")
        out = bytes(self.data[self.pos:self.pos + n])
        self.pos += n
        return out

    def u8(self) -> int:
        return self.take(1)[0]

    def u16(self) -> int:
        return struct.unpack("<H", self.take(2))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self.take(8))[0]

    def length(self, per_item: int = 1) -> int:
        n = self.u64()
        if n * max(per_item, 1) > len(self.data) - self.pos:
            raise DecodeError("malformed", "length prefix exceeds remaining data")
        return n

    def f64(self) -> float:
        return struct.unpack("<d", self.take(8))[0]

    def blob(self) -> bytes:
        return self.take(self.length())

    def text(self) -> str:
        try:
            return self.blob().decode()
        except UnicodeDecodeError:
            raise DecodeError("malformed", "bad utf-8") from None

    def flag(self) -> bool:
        b = self.u8()
        if b > 1:
            raise DecodeError("malformed", "presence flag must be 0 or 1")
        return b == 1

    def _fixed(self, count: int, width: int) -> np.ndarray:
        raw = np.frombuffer(self.take(count * width), dtype=np.uint8).reshape(count, width)
        buf = np.zeros((count, 8), dtype=np.uint8)
        buf[:, :width] = raw
        out = buf.view("<u8").ravel()
        if width == 8 and count and out.max() >= 1 << 63:
            raise DecodeError("malformed", "integer exceeds 63 bits")
        return out.astype(np.int64)

    def zq(self) -> int:
        return int(self._fixed(1, self.width)[0])

    def zq_vec(self) -> np.ndarray:
        return self._fixed(self.length(self.width), self.width)

    def zq_mat(self) -> np.ndarray:
        rows, cols = self.u64(), self.u64()
        if rows * cols * self.width > len(self.data) - self.pos:
            raise DecodeError("malformed", "matrix larger than remaining data")
        return self._fixed(rows * cols, self.width).reshape(rows, cols)

    def z_vec(self) -> np.ndarray:
        n = self.length()
        width = self.u8()
        if not 1 <= width <= 8:
            raise DecodeError("malformed", "bad signed width")
        zz = self._fixed(n, width)
        top = int(zz.max()) if n else 0
        if max(1, (top.bit_length() + 7) // 8) != width:
            raise DecodeError("malformed", "non-minimal signed width")
        return np.where(zz % 2 == 0, zz // 2, -(zz + 1) // 2)

    def zq_rows(self) -> np.ndarray:
        """Inverse of Writer.zq_rows; rows must share one length."""
        rows = self.length(8)
        if rows == 0:
            return np.zeros((0, 0), dtype=np.int64)
        start = self.pos
        cols = self.u64()
        self.pos = start
        stride = 8 + cols * self.width
        if rows * stride > len(self.data) - self.pos:
            raise DecodeError("malformed", "row block exceeds remaining data")
        block = np.frombuffer(self.take(rows * stride), dtype=np.uint8).reshape(rows, stride)
        if np.any(block[:, :8].copy().view("<u8").ravel() != cols):
            raise DecodeError("malformed", "ragged rows")
        return Reader(block[:, 8:].tobytes(), self.width)._fixed(rows * cols, self.width).reshape(rows, cols)

    def z_rows(self) -> np.ndarray:
        """Inverse of Writer.z_rows; rows must share one length."""
        rows = self.length(9)
        if rows == 0:
            return np.zeros((0, 0), dtype=np.int64)
        buf, end = self.data, len(self.data)
        pos = self.pos
        cols = None
        spans = []  # (offset, width) per row
        for _ in range(rows):
            if pos + 9 > end:
                raise DecodeError("malformed", "unexpected end of data")
            n, width = struct.unpack_from("<QB", buf, pos)
            if cols is None:
                cols = n
            if n != cols:
                raise DecodeError("malformed", "ragged rows")
            if not 1 <= width <= 8:
                raise DecodeError("malformed", "bad signed width")
            if pos + 9 + n * width > end:
                raise DecodeError("malformed", "unexpected end of data")
            spans.append((pos + 9, width))
            pos += 9 + n * width
        self.pos = pos
        widths = np.array([w for _, w in spans])
        zz = np.empty((rows, cols), dtype=np.int64)
        for width in np.unique(widths):
            idx = np.flatnonzero(widths == width)
            width = int(width)
            raw = b"".join(buf[spans[i][0]:spans[i][0] + cols * width] for i in idx)
            zz[idx] = Reader(raw, width)._fixed(len(idx) * cols, width).reshape(len(idx), cols)
        tops = zz.max(axis=1) if cols else np.zeros(rows, dtype=np.int64)
        if np.any(_byte_len(tops) != widths):
            raise DecodeError("malformed", "non-minimal signed width")
        return np.where(zz % 2 == 0, zz // 2, -(zz + 1) // 2)

    def ids(self) -> list[int]:
        return [self.u64() for _ in range(self.length(8))]

    def bits(self) -> np.ndarray:
        n = self.u64()
        nbytes = (n + 7) // 8
        raw = np.frombuffer(self.take(nbytes), dtype=np.uint8)
        bits = np.unpackbits(raw, bitorder="little")
        if bits[n:].any():
            raise DecodeError("malformed", "nonzero padding bits")
        return bits[:n].copy()

    def done(self) -> None:
        if self.pos != len(self.data):
            raise DecodeError("malformed", f"{len(self.data) - self.pos} trailing bytes")
