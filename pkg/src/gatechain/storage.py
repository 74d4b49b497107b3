"""Durable, bit-exact storage for the chain and key material.

The chain file is newline-delimited canonical block text: line i is the
canonical serialization of block i, so the file is human-auditable,
diffable, and round-trips byte-exactly. Appends are flushed and fsynced;
a torn trailing line from a crash is discarded on load (the append-only
format makes that safe), while a malformed interior line is a hard error.

The key store is a JSON document holding the AES data key, the authority
registry (records plus audit log), and private keys for identities hosted
on this node only.
"""

from __future__ import annotations

import json
import logging
import os
from pathlib import Path
from typing import Optional, Union

from .authorities import AuthorityRegistry
from .chain import Block, ChainError
from .crypto import AuthorityKeyPair

logger = logging.getLogger(__name__)

KEYSTORE_VERSION = 1


class StoreError(Exception):
    """Base error for persistence operations."""


class ChainLoadError(StoreError):
    """A non-trailing chain line failed to parse or deserialize."""

    def __init__(self, line_number: int, detail: str):
        self.line_number = line_number
        super().__init__(f"chain file line {line_number}: {detail}")


class IndexMismatchError(StoreError, ValueError):
    """Appended block's index does not continue the stored sequence."""


class ChainStore:
    """Append-only, one canonical block per line."""

    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)
        self._line_count: Optional[int] = None

    def exists(self) -> bool:
        return self.path.exists()

    def create(self) -> None:
        if self.path.exists():
            raise StoreError(f"chain file already exists: {self.path}")
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.touch()
        self._line_count = 0

    def _count_lines(self) -> int:
        if self._line_count is None:
            if not self.path.exists():
                raise StoreError(f"chain file missing: {self.path}")
            self._line_count = len(self._read_complete_lines()[0])
        return self._line_count

    def _read_complete_lines(self) -> tuple[list[str], bool]:
        """All newline-terminated lines, plus whether a torn tail was dropped."""
        raw = self.path.read_bytes()
        if not raw:
            return [], False
        torn = not raw.endswith(b"\n")
        text = raw.decode("utf-8", errors="replace")
        lines = text.split("\n")
        if torn:
            lines = lines[:-1]  # drop the partial tail
        else:
            lines = lines[:-1]  # split leaves one empty string after final \n
        return lines, torn

    def append_block(self, block: Block) -> None:
        """Durably append exactly one line; flushed and fsynced."""
        expected = self._count_lines()
        if block.index != expected:
            raise IndexMismatchError(
                f"block index {block.index} does not match line count {expected}"
            )
        line = block.serialize() + "\n"
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(line)
            fh.flush()
            os.fsync(fh.fileno())
        self._line_count = expected + 1

    def load(self) -> list[Block]:
        """Parse every stored block; discards a torn trailing line with a warning."""
        if not self.path.exists():
            raise StoreError(f"chain file missing: {self.path}")
        lines, torn = self._read_complete_lines()
        if torn:
            logger.warning(
                "chain file %s: discarding torn trailing line (crash recovery)",
                self.path,
            )
        blocks: list[Block] = []
        for line_number, line in enumerate(lines, start=1):
            try:
                data = json.loads(line)
                block = Block.from_dict(data)
            except (json.JSONDecodeError, ChainError, ValueError, TypeError) as exc:
                raise ChainLoadError(line_number, str(exc)) from exc
            if block.index != line_number - 1:
                raise ChainLoadError(
                    line_number, f"block index {block.index} out of sequence"
                )
            blocks.append(block)
        self._line_count = len(blocks)
        return blocks


class KeyStore:
    """Data key, authority registry, and locally hosted private keys."""

    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)

    def exists(self) -> bool:
        return self.path.exists()

    def save(
        self,
        data_key: bytes,
        registry: AuthorityRegistry,
        hosted_keys: dict[str, AuthorityKeyPair],
    ) -> None:
        document = {
            "version": KEYSTORE_VERSION,
            "data_key": data_key.hex(),
            **registry.to_dict(),
            "hosted_keys": {
                public_key: pair.private_hex for public_key, pair in hosted_keys.items()
            },
        }
        self.path.parent.mkdir(parents=True, exist_ok=True)
        tmp = self.path.with_suffix(self.path.suffix + ".tmp")
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(document, fh, indent=2, sort_keys=True)
            fh.write("\n")
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, self.path)

    def load(self) -> tuple[bytes, AuthorityRegistry, dict[str, AuthorityKeyPair]]:
        if not self.path.exists():
            raise StoreError(f"key store missing: {self.path}")
        try:
            document = json.loads(self.path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise StoreError(f"key store is not valid JSON: {exc}") from exc
        data_key_hex = document.get("data_key", "")
        if len(data_key_hex) != 64:
            raise StoreError("key store data_key must be 64 hex chars")
        data_key = bytes.fromhex(data_key_hex)
        registry = AuthorityRegistry.from_dict(document)
        hosted_keys: dict[str, AuthorityKeyPair] = {}
        for public_key, private_hex in document.get("hosted_keys", {}).items():
            pair = AuthorityKeyPair.from_private_hex(private_hex)
            if pair.public_key != public_key:
                raise StoreError(
                    f"hosted key mismatch: stored public key {public_key[:16]}… "
                    "does not match its private key"
                )
            hosted_keys[public_key] = pair
        return data_key, registry, hosted_keys
