"""Pluggable embedding providers.

Three interchangeable sources of answer vectors:

* ``hash`` — a deterministic pseudo-embedder for tests and offline runs:
  SHA-256 of the text seeds a SplitMix64 stream whose uniform draws are
  L2-normalized into a unit vector.
* ``file`` — lookup of precomputed vectors keyed by SHA-256 of the
  NFC-normalized text (or of the joined pair).
* ``http`` — an external inference backend speaking a two-endpoint JSON
  contract, so a real transformer host can be attached without linking
  any ML framework here.

Pair embeddings join the reference and student texts and truncate the
combined whitespace-token stream to 256 tokens before key construction
or backend submission (reference first; each side capped at 128 when
both overflow).
"""

from __future__ import annotations

import hashlib
import unicodedata
from pathlib import Path

import numpy as np
import requests

from ._rng import SplitMix64, hash64
from .errors import BackendError, EmbeddingFormatError, LookupMissError

__all__ = [
    "PAIR_TOKEN_CAP",
    "hash_embed",
    "truncate_pair",
    "text_key",
    "pair_key",
    "HashProvider",
    "FileProvider",
    "HttpProvider",
    "provider_from_spec",
    "write_embedding_file",
    "read_embedding_file",
]

PAIR_TOKEN_CAP = 256
_PAIR_SEPARATOR = "\x1f"  # unit separator keeps (a, b) distinct from (b, a)
_FILE_HEADER_PREFIX = "asag-embeddings v1 dim="


def _nfc(text: str) -> str:
    return unicodedata.normalize("NFC", text)


def hash_embed(text: str, dim: int) -> np.ndarray:
    """Deterministic unit vector: SHA-256 seed into SplitMix64 draws."""
    if dim < 1:
        raise EmbeddingFormatError(f"dim must be >= 1, got {dim}")
    rng = SplitMix64(hash64(text))
    values = np.empty(dim, dtype=np.float64)
    for i in range(dim):
        values[i] = 2.0 * rng.next_unit() - 1.0
    norm = float(np.linalg.norm(values))
    return values / norm


def truncate_pair(reference: str, student: str, cap: int = PAIR_TOKEN_CAP) -> tuple[str, str]:
    """Cap the combined whitespace-token stream at ``cap`` tokens.

    Reference tokens come first; when both sides overflow cap/2 each side
    is cut to cap/2, otherwise only the longer side is trimmed.
    """
    ref_tokens = reference.split()
    stu_tokens = student.split()
    if len(ref_tokens) + len(stu_tokens) > cap:
        half = cap // 2
        if len(ref_tokens) > half and len(stu_tokens) > half:
            ref_tokens = ref_tokens[:half]
            stu_tokens = stu_tokens[:half]
        elif len(ref_tokens) > len(stu_tokens):
            ref_tokens = ref_tokens[: cap - len(stu_tokens)]
        else:
            stu_tokens = stu_tokens[: cap - len(ref_tokens)]
    return " ".join(ref_tokens), " ".join(stu_tokens)


def text_key(text: str) -> str:
    """64-hex lookup key for a single text."""
    return hashlib.sha256(_nfc(text).encode("utf-8")).hexdigest()


def pair_key(reference: str, student: str) -> str:
    """64-hex lookup key for a (reference, student) pair, post-truncation."""
    ref_t, stu_t = truncate_pair(reference, student)
    joined = _nfc(ref_t) + _PAIR_SEPARATOR + _nfc(stu_t)
    return hashlib.sha256(joined.encode("utf-8")).hexdigest()


class HashProvider:
    """Deterministic test-double provider; supports single texts and pairs."""

    kind = "hash"
    supports_pairs = True

    def __init__(self, dim: int):
        if dim < 1:
            raise EmbeddingFormatError(f"dim must be >= 1, got {dim}")
        self.dim = dim

    def embed_text(self, text: str) -> np.ndarray:
        if not text.strip():
            raise EmbeddingFormatError("cannot embed empty text")
        return hash_embed(text, self.dim)

    def embed_pair(self, reference: str, student: str) -> np.ndarray:
        ref_t, stu_t = truncate_pair(reference, student)
        return hash_embed(_nfc(ref_t) + _PAIR_SEPARATOR + _nfc(stu_t), self.dim)


class FileProvider:
    """Precomputed vectors from an embedding file, keyed by content hash."""

    kind = "file"
    supports_pairs = True

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.dim, self._records = read_embedding_file(self.path)

    def _lookup(self, key: str) -> np.ndarray:
        try:
            return self._records[key]
        except KeyError:
            raise LookupMissError(f"no embedding for key {key} in {self.path}") from None

    def embed_text(self, text: str) -> np.ndarray:
        return self._lookup(text_key(text))

    def embed_pair(self, reference: str, student: str) -> np.ndarray:
        return self._lookup(pair_key(reference, student))


class HttpProvider:
    """External inference backend: POST /embed and POST /embed_pair."""

    kind = "http"
    supports_pairs = True

    def __init__(self, base_url: str, dim: int | None = None, timeout: float = 60.0):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.dim = dim if dim is not None else self._probe_dim()

    def _post(self, endpoint: str, payload: dict) -> list[np.ndarray]:
        try:
            response = requests.post(f"{self.base_url}{endpoint}", json=payload, timeout=self.timeout)
        except requests.RequestException as exc:
            raise BackendError(f"embedding backend unreachable: {exc}") from exc
        if response.status_code != 200:
            raise BackendError(f"embedding backend returned status {response.status_code}")
        body = response.json()
        dim = int(body["dim"])
        vectors = [np.asarray(v, dtype=np.float64) for v in body["vectors"]]
        for v in vectors:
            if v.shape != (dim,):
                raise BackendError(f"backend vector has shape {v.shape}, expected ({dim},)")
        if getattr(self, "dim", None) is not None and dim != self.dim:
            raise BackendError(f"backend dim {dim} != provider dim {self.dim}")
        return vectors

    def _probe_dim(self) -> int:
        return self._post("/embed", {"texts": ["dimension probe"]})[0].shape[0]

    def embed_text(self, text: str) -> np.ndarray:
        return self._post("/embed", {"texts": [text]})[0]

    def embed_pair(self, reference: str, student: str) -> np.ndarray:
        ref_t, stu_t = truncate_pair(reference, student)
        return self._post("/embed_pair", {"pairs": [[ref_t, stu_t]]})[0]


def provider_from_spec(spec: str):
    """Build a provider from ``hash:<dim>``, ``file:<path>`` or ``http:<url>``."""
    kind, _, rest = spec.partition(":")
    if kind == "hash" and rest:
        return HashProvider(int(rest))
    if kind == "file" and rest:
        return FileProvider(rest)
    if kind == "http" and rest:
        return HttpProvider(rest)
    raise EmbeddingFormatError(
        f"bad provider spec {spec!r} (expected hash:<dim> | file:<path> | http:<url>)"
    )


# --- Embedding file format -----------------------------------------------------


def write_embedding_file(path: str | Path, dim: int, records: dict[str, np.ndarray]) -> None:
    """One header line, then ``<64-hex key>\\t<d space-separated floats>``."""
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(f"{_FILE_HEADER_PREFIX}{dim}\n")
        for key, vector in records.items():
            vector = np.asarray(vector, dtype=np.float64)
            if vector.shape != (dim,):
                raise EmbeddingFormatError(f"record {key} has shape {vector.shape}, expected ({dim},)")
            fh.write(key + "\t" + " ".join(repr(float(x)) for x in vector) + "\n")


def read_embedding_file(path: str | Path) -> tuple[int, dict[str, np.ndarray]]:
    path = Path(path)
    if not path.is_file():
        raise EmbeddingFormatError(f"missing embedding file: {path}")
    with path.open(encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if not header.startswith(_FILE_HEADER_PREFIX):
            raise EmbeddingFormatError(f"{path.name}: bad header {header!r}")
        try:
            dim = int(header[len(_FILE_HEADER_PREFIX):])
        except ValueError as exc:
            raise EmbeddingFormatError(f"{path.name}: bad dim in header {header!r}") from exc
        records: dict[str, np.ndarray] = {}
        for line_no, line in enumerate(fh, 2):
            line = line.rstrip("\n")
            if not line:
                continue
            key, _, values = line.partition("\t")
            if len(key) != 64 or not values:
                raise EmbeddingFormatError(f"{path.name} line {line_no}: malformed record")
            if key in records:
                raise EmbeddingFormatError(f"{path.name} line {line_no}: duplicate key {key}")
            vector = np.array([float(x) for x in values.split(" ")], dtype=np.float64)
            if vector.shape != (dim,):
                raise EmbeddingFormatError(
                    f"{path.name} line {line_no}: {vector.shape[0]} values, expected {dim}"
                )
            records[key] = vector
    return dim, records
