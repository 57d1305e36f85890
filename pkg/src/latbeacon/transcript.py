"""Transcript file: everything a third party needs to re-verify a run.

Layout: magic ``LBCN``, u16 version, parameter block (including the setup
seed the crs is derived from), directory block, epoch records, a one-byte
digest algorithm tag and the digest over all preceding bytes.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from .drng import EpochRecord, PublicDirectory, drng_setup
from .encoding import Reader, Writer
from .errors import DecodeError
from .params import SystemParams

MAGIC = b"LBCN"
VERSION = 1
DIGEST_SHA256 = 1
_DIGESTS = {DIGEST_SHA256: (hashlib.sha256, 32)}


def write_params(w: Writer, params: SystemParams, setup_seed: bytes) -> Writer:
    w.text(params.name).text(params.backend)
    for key in ("p", "q", "u", "v", "n", "t", "lambda_sec", "rep"):
        w.u64(getattr(params, key))
    for key in ("alpha", "beta", "r_enc"):
        w.f64(getattr(params, key))
    return w.raw(setup_seed)


def read_params(r: Reader) -> tuple[SystemParams, bytes]:
    name, backend = r.text(), r.text()
    ints = {key: r.u64() for key in ("p", "q", "u", "v", "n", "t", "lambda_sec", "rep")}
    floats = {key: r.f64() for key in ("alpha", "beta", "r_enc")}
    seed = r.take(32)
    return SystemParams(name=name, backend=backend, **ints, **floats), seed


@dataclass
class TranscriptFile:
    params: SystemParams
    setup_seed: bytes
    directory: PublicDirectory
    records: list = field(default_factory=list)

    def crs(self):
        return drng_setup(self.params, self.setup_seed)

    def encode(self) -> bytes:
        w = Writer(self.params.width).raw(MAGIC).u16(VERSION)
        write_params(w, self.params, self.setup_seed)
        self.directory.write(w)
        w.u64(len(self.records))
        for rec in self.records:
            rec.write(w)
        body = w.getvalue()
        return body + bytes([DIGEST_SHA256]) + hashlib.sha256(body).digest()

    @classmethod
    def decode(cls, data: bytes) -> TranscriptFile:
        data = bytes(data)
        if data[:4] != MAGIC:
            raise DecodeError("bad-magic", "not a transcript file")
        if len(data) < 6:
            raise DecodeError("malformed", "truncated header")
        version = int.from_bytes(data[4:6], "little")
        if version != VERSION:
            raise DecodeError("version-unsupported", f"version {version}")
        if len(data) < 6 + 33:
            raise DecodeError("malformed", "truncated file")
        # the tag sits right before a digest whose size depends on the tag
        for tag, (algo, size) in _DIGESTS.items():
            if len(data) > size and data[-size - 1] == tag:
                body, digest = data[:-size - 1], data[-size:]
                if algo(body).digest() != digest:
                    raise DecodeError("digest-mismatch", "integrity digest does not match")
                break
        else:
            raise DecodeError("digest-mismatch", "unknown digest algorithm tag")
        r = Reader(body, 1)
        r.take(6)
        params, seed = read_params(r)
        if params.q < 2:
            raise DecodeError("malformed", "bad modulus")
        r.width = params.width
        directory = PublicDirectory.read(r)
        records = [EpochRecord.read(r) for _ in range(r.length(1))]
        r.done()
        return cls(params, seed, directory, records)

    def write_to(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.encode())

    @classmethod
    def read_from(cls, path) -> TranscriptFile:
        with open(path, "rb") as fh:
            return cls.decode(fh.read())
