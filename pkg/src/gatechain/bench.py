"""Block-creation benchmark: per-block encryption, signing, and total times.

Each run builds a fresh in-memory chain from deterministic synthetic entry
transactions (seeded, so row counts and chain contents are reproducible;
timings naturally vary). Per block, three clocks are reported:

- encryption_time_s: AES-GCM encryption of the three identity fields
- sign_time_s: ECDSA signature over the header hash
- total_time_s: the whole build-and-append (encrypt + root + hash + sign
  + append-time verification)

estimated_tps is transactions-per-block divided by total_time_s (one
transaction per block here). A separate pass times signature verification
over every block; verification is reported both as an average and as a
ratio to signing. Ten untimed warmup blocks run first. Absolute numbers
are hardware-specific; only structural and ratio properties are asserted,
and reproducing timings measured in other environments is a non-goal.
"""

from __future__ import annotations

import platform
import random
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Union

from .authorities import AuthorityRegistry
from .chain import (
    ENTRY_TYPE,
    Block,
    Chain,
    EntryExitTransaction,
    compute_block_hash,
    compute_transactions_root,
    make_genesis,
)
from .crypto import (
    AuthorityKeyPair,
    encrypt_field,
    generate_data_key,
    generate_keypair,
    quantize_timestamp,
    sign_digest,
    verify_signature,
)

WARMUP_BLOCKS = 10

CSV_HEADER = "block_index,encryption_time_s,sign_time_s,total_time_s,estimated_tps"

_FIRST_NAMES = ("Ali", "Ayse", "Mert", "Elif", "Omar", "Lina", "Jonas", "Mia", "Arda", "Sara")
_LAST_NAMES = ("Veli", "Yilmaz", "Demir", "Kaya", "Haddad", "Novak", "Weber", "Rossi")
_NATIONALITIES = ("Turkish", "German", "Italian", "Jordanian", "Czech", "Dutch")
_GATES = ("Istanbul Airport", "Kapikule Gate", "Ankara Airport", "Izmir Port", "Habur Gate")


class BenchError(ValueError):
    pass


@dataclass(frozen=True)
class BenchRow:
    block_index: int
    encryption_time_s: float
    sign_time_s: float
    total_time_s: float
    estimated_tps: float


@dataclass(frozen=True)
class BenchReport:
    rows: tuple[BenchRow, ...]
    avg_encryption_time_s: float
    avg_sign_time_s: float
    avg_verify_time_s: float
    verify_to_sign_ratio: float
    environment: str
    chain: Chain
    validator_set: AuthorityRegistry


def synthetic_entry_form_fields(rng: random.Random, index: int) -> dict:
    """Deterministic entry payload content for one synthetic block."""
    day = 1 + (index % 27)
    return {
        "passport_number": f"P{rng.randrange(10**8):08d}-{index}",
        "name_surname": f"{rng.choice(_FIRST_NAMES)} {rng.choice(_LAST_NAMES)}",
        "nationality": rng.choice(_NATIONALITIES),
        "birthdate": f"19{rng.randrange(50, 100):02d}-{rng.randrange(1, 13):02d}-{rng.randrange(1, 29):02d}",
        "passport_validity_date": f"20{rng.randrange(26, 36):02d}-01-15",
        "entry_gate": rng.choice(_GATES),
        "entry_datetime": f"2025-12-{day:02d} {rng.randrange(0, 24):02d}:{rng.randrange(0, 60):02d}",
        "plate": f"{rng.randrange(10, 82)} AB {rng.randrange(100, 1000)}" if rng.random() < 0.3 else "",
    }


def _timed_block(
    chain: Chain,
    signer: AuthorityKeyPair,
    data_key: bytes,
    payload: dict,
) -> tuple[float, float, float]:
    """Build and append one entry block; returns (enc_s, sign_s, total_s)."""
    clock = time.perf_counter
    prev = chain.tip
    total_start = clock()

    enc_start = clock()
    passport_c = encrypt_field(data_key, payload["passport_number"])
    name_c = encrypt_field(data_key, payload["name_surname"])
    nationality_c = encrypt_field(data_key, payload["nationality"])
    enc_elapsed = clock() - enc_start

    tx = EntryExitTransaction(
        PassportNumber=passport_c,
        NameSurname=name_c,
        Nationality=nationality_c,
        Birthdate=payload["birthdate"],
        PassportValidityDate=payload["passport_validity_date"],
        EntryDate=payload["entry_datetime"],
        EntryGate=payload["entry_gate"],
        ExitDate="",
        ExitGate="",
        Plate=payload["plate"],
    )
    timestamp = max(quantize_timestamp(time.time()), prev.timestamp)
    root = compute_transactions_root((tx,))
    block_hash = compute_block_hash(
        prev.index + 1, ENTRY_TYPE, timestamp, prev.hash, root, signer.public_key
    )

    sign_start = clock()
    signature = sign_digest(signer.private_key, block_hash)
    sign_elapsed = clock() - sign_start

    block = Block(
        index=prev.index + 1,
        nonce=ENTRY_TYPE,
        timestamp=timestamp,
        previousHash=prev.hash,
        transactions=(tx,),
        transactions_root=root,
        authority=signer.public_key,
        hash=block_hash,
        signature=signature,
    )
    chain.append(block)
    total_elapsed = clock() - total_start
    return enc_elapsed, sign_elapsed, total_elapsed


def run_block_benchmark(n_blocks: int, seed: int = 0) -> BenchReport:
    """Create ``n_blocks`` synthetic entry blocks, timing each one."""
    if n_blocks < 1:
        raise BenchError(f"n_blocks must be >= 1, got {n_blocks}")
    rng = random.Random(seed)

    signer = generate_keypair()
    data_key = generate_data_key()
    authorities = AuthorityRegistry()
    authorities.bootstrap_admin(signer.public_key, "bench-signer", at=time.time())

    # Untimed warmup on a throwaway chain (JIT-free Python, but primes
    # OpenSSL contexts, allocator, and branch caches).
    warmup_chain = Chain(authorities)
    warmup_chain.append(make_genesis(signer))
    for i in range(WARMUP_BLOCKS):
        _timed_block(warmup_chain, signer, data_key, synthetic_entry_form_fields(rng, i))

    chain = Chain(authorities)
    chain.append(make_genesis(signer))
    rows: list[BenchRow] = []
    for i in range(1, n_blocks + 1):
        payload = synthetic_entry_form_fields(rng, i)
        enc_s, sign_s, total_s = _timed_block(chain, signer, data_key, payload)
        rows.append(
            BenchRow(
                block_index=i,
                encryption_time_s=enc_s,
                sign_time_s=sign_s,
                total_time_s=total_s,
                estimated_tps=1.0 / total_s,
            )
        )

    clock = time.perf_counter
    verify_times: list[float] = []
    for block in chain.blocks:
        start = clock()
        ok = verify_signature(block.authority, block.hash, block.signature)
        verify_times.append(clock() - start)
        if not ok:  # pragma: no cover - would indicate a build bug
            raise BenchError(f"block {block.index} signature did not verify")

    avg_enc = sum(r.encryption_time_s for r in rows) / len(rows)
    avg_sign = sum(r.sign_time_s for r in rows) / len(rows)
    avg_verify = sum(verify_times) / len(verify_times)
    return BenchReport(
        rows=tuple(rows),
        avg_encryption_time_s=avg_enc,
        avg_sign_time_s=avg_sign,
        avg_verify_time_s=avg_verify,
        verify_to_sign_ratio=avg_verify / avg_sign,
        environment=f"{platform.platform()} / Python {platform.python_version()}",
        chain=chain,
        validator_set=authorities,
    )


def emit_bench_csv(report: BenchReport, path: Union[str, Path]) -> None:
    """Write the per-block rows plus a trailing comment section of averages."""
    if not report.rows:
        raise BenchError("report has no rows")
    lines = [CSV_HEADER]
    for r in report.rows:
        lines.append(
            f"{r.block_index},{r.encryption_time_s!r},{r.sign_time_s!r},"
            f"{r.total_time_s!r},{r.estimated_tps!r}"
        )
    lines.append("# averages")
    lines.append(f"# avg_encryption_time_s,{report.avg_encryption_time_s!r}")
    lines.append(f"# avg_sign_time_s,{report.avg_sign_time_s!r}")
    lines.append(f"# avg_verify_time_s,{report.avg_verify_time_s!r}")
    lines.append(f"# verify_to_sign_ratio,{report.verify_to_sign_ratio!r}")
    lines.append(f"# environment,{report.environment}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
