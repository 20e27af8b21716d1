"""On-disk cache of verified modular polynomials.

One file per prime, ``Fp_<p>.txt``::

    LAMBDA-MODPOLY v1 p=5
    0 6 1
    1 1 -65536
    ...
    CHECKSUM <sha256 of every preceding byte>

Coefficient lines are sorted by (i, j).  Loading re-runs the symmetry and
Kronecker checks, so a corrupted or hand-edited file is rejected.
"""

from __future__ import annotations

import hashlib
import os
import re
import tempfile
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .modpoly import BivarIntPoly, verify_kronecker, verify_symmetry

HEADER = "LAMBDA-MODPOLY v1 p={p}"
_HEADER_RE = re.compile(r"^LAMBDA-MODPOLY v1 p=(\d+)$")
_LINE_RE = re.compile(r"^(\d+) (\d+) (-?\d+)$")


class CacheError(Exception):
    pass


@dataclass(frozen=True)
class ModpolyCacheRecord:
    p_level: int
    coeffs: dict[str, str]
    checksum: str
    producer: str = f"lambda_lab {__version__}"

    @classmethod
    def from_poly(cls, F: BivarIntPoly) -> ModpolyCacheRecord:
        coeffs = {f"{i},{j}": str(c) for (i, j), c in sorted(F.coeffs.items())}
        body = _body(F.p_level, F.coeffs)
        return cls(F.p_level, coeffs, hashlib.sha256(body).hexdigest())

    def to_poly(self) -> BivarIntPoly:
        out = {}
        for key, val in self.coeffs.items():
            i, j = key.split(",")
            out[(int(i), int(j))] = int(val)
        return BivarIntPoly(self.p_level, out)

    def to_bytes(self) -> bytes:
        body = _body(self.p_level, self.to_poly().coeffs)
        return body + f"CHECKSUM {self.checksum}\n".encode("ascii")


def _body(p: int, coeffs: dict[tuple[int, int], int]) -> bytes:
    lines = [HEADER.format(p=p)]
    lines += [f"{i} {j} {c}" for (i, j), c in sorted(coeffs.items())]
    return ("\n".join(lines) + "\n").encode("ascii")


def parse_record(data: bytes) -> ModpolyCacheRecord:
    try:
        text = data.decode("ascii")
    except UnicodeDecodeError as exc:
        raise CacheError("cache file is not ASCII") from exc
    if not text.endswith("\n"):
        raise CacheError("cache file is truncated (no final newline)")
    lines = text[:-1].split("\n")
    if len(lines) < 2:
        raise CacheError("cache file is truncated")
    m = _HEADER_RE.match(lines[0])
    if not m:
        raise CacheError(f"bad header: {lines[0]!r}")
    p = int(m.group(1))
    last = lines[-1]
    if not last.startswith("CHECKSUM "):
        raise CacheError("missing CHECKSUM line")
    checksum = last[len("CHECKSUM ") :]
    body = data[: len(data) - len(last) - 1]
    if hashlib.sha256(body).hexdigest() != checksum:
        raise CacheError("checksum mismatch")
    coeffs: dict[str, str] = {}
    prev = None
    for line in lines[1:-1]:
        lm = _LINE_RE.match(line)
        if not lm:
            raise CacheError(f"malformed coefficient line: {line!r}")
        key = (int(lm.group(1)), int(lm.group(2)))
        if prev is not None and key <= prev:
            raise CacheError("coefficient lines not sorted by (i, j)")
        prev = key
        coeffs[f"{key[0]},{key[1]}"] = lm.group(3)
    return ModpolyCacheRecord(p, coeffs, checksum)


def cache_file(p: int, directory) -> Path:
    return Path(directory) / f"Fp_{p}.txt"


def cache_store(F: BivarIntPoly, directory) -> Path:
    """Write F atomically (temporary file, then rename)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    target = cache_file(F.p_level, directory)
    data = ModpolyCacheRecord.from_poly(F).to_bytes()
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=f".Fp_{F.p_level}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return target


def cache_load(p: int, directory) -> BivarIntPoly:
    path = cache_file(p, directory)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise CacheError(f"cannot read {path}: {exc}") from exc
    record = parse_record(data)
    if record.p_level != p:
        raise CacheError(f"{path} holds p={record.p_level}, expected p={p}")
    F = record.to_poly()
    if not verify_symmetry(F):
        raise CacheError(f"{path}: cached polynomial is not symmetric")
    if not verify_kronecker(F):
        raise CacheError(f"{path}: cached polynomial fails the Kronecker congruence")
    return F
