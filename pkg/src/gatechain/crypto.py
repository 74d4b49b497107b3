"""Cryptographic substrate: canonical serialization, hashing, field encryption, signing.

Every hash in the ledger is computed over the canonical byte form produced
here, so this module is a bit-exact contract: the same logical value must
serialize to the same bytes on every platform and run.

Choices fixed for the whole system:

- SHA-256 digests, lowercase hex (64 chars).
- ECDSA over NIST P-256; public keys as uncompressed SEC1 points in hex
  (130 chars), signatures DER-encoded in hex. Signatures are made over the
  raw 32 digest bytes (prehashed), so any holder of the digest can verify.
- AES-256-GCM for field-level encryption; a cipher field is
  base64(nonce[12] || ciphertext || tag[16]) under a 256-bit data key.
"""

from __future__ import annotations

import base64
import hashlib
import json
import math
import os
import time
from dataclasses import dataclass
from functools import lru_cache

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.asymmetric import ec, utils
from cryptography.hazmat.primitives.ciphers.aead import AESGCM
from cryptography.hazmat.primitives.serialization import Encoding, PublicFormat

CURVE = ec.SECP256R1()
DATA_KEY_BYTES = 32
GCM_NONCE_BYTES = 12
GCM_TAG_BYTES = 16

_HEX_DIGITS = frozenset("0123456789abcdef")


class SerializationError(ValueError):
    """Value cannot be canonically serialized."""


class SigningError(ValueError):
    """Signing failed (malformed key or digest)."""


class KeyGenerationError(RuntimeError):
    """Key material could not be generated."""


class FieldDecryptionError(ValueError):
    """Cipher field failed to decrypt (wrong key, tampered, or malformed)."""


def is_hex_digest(value: object) -> bool:
    """True iff ``value`` is a 64-char lowercase hex string (SHA-256 output)."""
    return (
        isinstance(value, str)
        and len(value) == 64
        and all(c in _HEX_DIGITS for c in value)
    )


# ---------------------------------------------------------------------------
# Canonical serialization
# ---------------------------------------------------------------------------

def canonical_bytes(value: object) -> bytes:
    """Serialize a structured value to deterministic UTF-8 bytes.

    Supported kinds: str, int, finite float (rendered with exactly 6
    fractional digits — the timestamp precision of the ledger), list/tuple,
    and dict with str keys (keys sorted lexicographically, no insignificant
    whitespace). The output is valid JSON, so it round-trips through any
    JSON parser.
    """
    parts: list[str] = []
    _write_canonical(value, parts)
    return "".join(parts).encode("utf-8")


def _write_canonical(value: object, parts: list[str]) -> None:
    # bool is an int subclass; reject it explicitly before the int branch.
    if isinstance(value, bool):
        raise SerializationError("booleans are not part of the ledger value model")
    if isinstance(value, str):
        parts.append(json.dumps(value, ensure_ascii=False))
    elif isinstance(value, int):
        parts.append(str(value))
    elif isinstance(value, float):
        if not math.isfinite(value):
            raise SerializationError(f"non-finite number {value!r} is not serializable")
        parts.append(f"{value:.6f}")
    elif isinstance(value, (list, tuple)):
        parts.append("[")
        for i, item in enumerate(value):
            if i:
                parts.append(",")
            _write_canonical(item, parts)
        parts.append("]")
    elif isinstance(value, dict):
        parts.append("{")
        for i, key in enumerate(sorted(value)):
            if not isinstance(key, str):
                raise SerializationError(
                    f"record keys must be strings, got {type(key).__name__}"
                )
            if i:
                parts.append(",")
            parts.append(json.dumps(key, ensure_ascii=False))
            parts.append(":")
            _write_canonical(value[key], parts)
        parts.append("}")
    else:
        raise SerializationError(f"unsupported value kind: {type(value).__name__}")


def sha256_hex(data: bytes) -> str:
    """SHA-256 digest of ``data`` as 64 lowercase hex chars."""
    return hashlib.sha256(data).hexdigest()


def quantize_timestamp(ts: float) -> float:
    """Clamp a timestamp to the canonical microsecond (6-decimal) precision.

    Every timestamp that enters a hashed or compared structure must be
    quantized first, so in-memory values equal their serialized form.
    """
    return float(f"{ts:.6f}")


def now_timestamp() -> float:
    return quantize_timestamp(time.time())


# ---------------------------------------------------------------------------
# Authority keys and signatures (ECDSA P-256)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AuthorityKeyPair:
    """An authority identity: P-256 private key plus its hex public key."""

    private_key: ec.EllipticCurvePrivateKey
    public_key: str

    @property
    def private_hex(self) -> str:
        """Private scalar as 64 hex chars (key-store serialization form)."""
        return format(self.private_key.private_numbers().private_value, "064x")

    @classmethod
    def from_private_hex(cls, private_hex: str) -> "AuthorityKeyPair":
        try:
            private_key = ec.derive_private_key(int(private_hex, 16), CURVE)
        except (ValueError, TypeError) as exc:
            raise KeyGenerationError(f"invalid private key hex: {exc}") from exc
        return cls(private_key=private_key, public_key=_public_hex(private_key))


def _public_hex(private_key: ec.EllipticCurvePrivateKey) -> str:
    point = private_key.public_key().public_bytes(
        Encoding.X962, PublicFormat.UncompressedPoint
    )
    return point.hex()


def generate_keypair() -> AuthorityKeyPair:
    """Generate a fresh P-256 authority keypair."""
    try:
        private_key = ec.generate_private_key(CURVE)
    except Exception as exc:  # pragma: no cover - randomness failure
        raise KeyGenerationError(f"key generation failed: {exc}") from exc
    return AuthorityKeyPair(private_key=private_key, public_key=_public_hex(private_key))


@lru_cache(maxsize=4096)
def _parse_public_key(public_key_hex: str) -> ec.EllipticCurvePublicKey:
    # Cached: chain verification parses the same few authority keys per block.
    return ec.EllipticCurvePublicKey.from_encoded_point(
        CURVE, bytes.fromhex(public_key_hex)
    )


def sign_digest(private_key: ec.EllipticCurvePrivateKey, digest: str) -> str:
    """Sign a hex digest; returns the DER signature as hex.

    The signature is over the 32 raw digest bytes (prehashed SHA-256), so
    ``verify_signature(pub, digest, sig)`` holds for the paired public key.
    """
    if not is_hex_digest(digest):
        raise SigningError(f"not a valid hex digest: {digest!r}")
    try:
        signature = private_key.sign(
            bytes.fromhex(digest), ec.ECDSA(utils.Prehashed(hashes.SHA256()))
        )
    except Exception as exc:
        raise SigningError(f"signing failed: {exc}") from exc
    return signature.hex()


def verify_signature(public_key: str, digest: str, signature: str) -> bool:
    """True iff ``signature`` is valid for ``digest`` under ``public_key``.

    Malformed keys, digests, or signatures return False; never raises.
    """
    if not is_hex_digest(digest):
        return False
    try:
        key = _parse_public_key(public_key)
        key.verify(
            bytes.fromhex(signature),
            bytes.fromhex(digest),
            ec.ECDSA(utils.Prehashed(hashes.SHA256())),
        )
    except (InvalidSignature, ValueError, TypeError):
        return False
    return True


# ---------------------------------------------------------------------------
# Field-level encryption (AES-256-GCM)
# ---------------------------------------------------------------------------

def generate_data_key() -> bytes:
    """Fresh 256-bit symmetric data key."""
    return AESGCM.generate_key(bit_length=DATA_KEY_BYTES * 8)


def _check_data_key(key: bytes) -> None:
    if not isinstance(key, bytes) or len(key) != DATA_KEY_BYTES:
        raise ValueError(f"data key must be exactly {DATA_KEY_BYTES} bytes")


def encrypt_field(key: bytes, plaintext: str) -> str:
    """Encrypt one personal-data field; fresh random nonce per call."""
    _check_data_key(key)
    nonce = os.urandom(GCM_NONCE_BYTES)
    sealed = AESGCM(key).encrypt(nonce, plaintext.encode("utf-8"), None)
    return base64.b64encode(nonce + sealed).decode("ascii")


def decrypt_field(key: bytes, cipher: str) -> str:
    """Recover the plaintext of a cipher field.

    Raises FieldDecryptionError on wrong key, tampered bytes, or a malformed
    field — distinguishable from a legitimately empty plaintext.
    """
    _check_data_key(key)
    try:
        blob = base64.b64decode(cipher.encode("ascii"), validate=True)
    except (ValueError, UnicodeEncodeError, AttributeError) as exc:
        raise FieldDecryptionError(f"cipher field is not valid base64: {exc}") from exc
    if len(blob) < GCM_NONCE_BYTES + GCM_TAG_BYTES:
        raise FieldDecryptionError("cipher field too short for nonce and tag")
    nonce, sealed = blob[:GCM_NONCE_BYTES], blob[GCM_NONCE_BYTES:]
    try:
        plaintext = AESGCM(key).decrypt(nonce, sealed, None)
    except Exception as exc:
        raise FieldDecryptionError("authentication failed") from exc
    return plaintext.decode("utf-8")


def is_cipher_field(value: object) -> bool:
    """Structural check: base64 text long enough to hold nonce and tag."""
    if not isinstance(value, str) or not value:
        return False
    try:
        blob = base64.b64decode(value.encode("ascii"), validate=True)
    except (ValueError, UnicodeEncodeError):
        return False
    return len(blob) >= GCM_NONCE_BYTES + GCM_TAG_BYTES
