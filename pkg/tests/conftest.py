"""Shared fixtures: an in-memory ledger world and random-chain generators."""

from __future__ import annotations

import random
import time
from dataclasses import dataclass

import pytest

from gatechain.authorities import AuthorityRegistry
from gatechain.chain import Chain, make_genesis
from gatechain.crypto import AuthorityKeyPair, generate_data_key, generate_keypair
from gatechain.registry import BorderRegistry, EntryForm, ExitForm


@dataclass
class World:
    chain: Chain
    authorities: AuthorityRegistry
    registry: BorderRegistry
    data_key: bytes
    admin: AuthorityKeyPair
    officer: AuthorityKeyPair
    auditor: AuthorityKeyPair


def make_world(chain_store=None, reject_expired_passports: bool = True) -> World:
    now = time.time()
    admin = generate_keypair()
    officer = generate_keypair()
    auditor = generate_keypair()
    authorities = AuthorityRegistry()
    authorities.bootstrap_admin(admin.public_key, "bootstrap-admin", at=now)
    authorities.add_authority(admin.public_key, officer.public_key, "officer-1", "officer", at=now)
    authorities.add_authority(admin.public_key, auditor.public_key, "auditor-1", "auditor", at=now)
    chain = Chain(authorities)
    genesis = make_genesis(admin, timestamp=now)
    chain.append(genesis)
    if chain_store is not None:
        chain_store.create()
        chain_store.append_block(genesis)
    data_key = generate_data_key()
    registry = BorderRegistry(
        chain,
        authorities,
        data_key,
        chain_store=chain_store,
        reject_expired_passports=reject_expired_passports,
    )
    return World(chain, authorities, registry, data_key, admin, officer, auditor)


@pytest.fixture
def world() -> World:
    return make_world()


_GATES = ("Istanbul Airport", "Kapikule Gate", "Ankara Airport", "Izmir Port")
_NATIONALITIES = ("Turkish", "German", "Jordanian", "Dutch")
_NAMES = ("Ali Veli", "Ayse Yilmaz", "Omar Haddad", "Mia Novak", "Jonas Weber")


def make_entry_form(passport: str, rng: random.Random | None = None, **overrides) -> EntryForm:
    rng = rng or random.Random(hash(passport) & 0xFFFF)
    day = 1 + rng.randrange(27)
    fields = dict(
        passport_number=passport,
        name_surname=rng.choice(_NAMES),
        nationality=rng.choice(_NATIONALITIES),
        birthdate=f"19{rng.randrange(60, 100)}-{rng.randrange(1, 13):02d}-{rng.randrange(1, 29):02d}",
        passport_validity_date="2031-01-15",
        entry_gate=rng.choice(_GATES),
        entry_datetime=f"2025-11-{day:02d} {rng.randrange(24):02d}:{rng.randrange(60):02d}",
        plate="06 AB 123" if rng.random() < 0.25 else "",
    )
    fields.update(overrides)
    return EntryForm(**fields)


def make_exit_form(passport: str, rng: random.Random | None = None, **overrides) -> ExitForm:
    rng = rng or random.Random(hash(passport) & 0xFFF)
    day = 1 + rng.randrange(27)
    fields = dict(
        passport_number=passport,
        exit_gate=rng.choice(_GATES),
        exit_datetime=f"2025-12-{day:02d} {rng.randrange(24):02d}:{rng.randrange(60):02d}",
        plate="",
    )
    fields.update(overrides)
    return ExitForm(**fields)


def grow_random_chain(world: World, rng: random.Random, n_blocks: int) -> None:
    """Append ``n_blocks`` valid entry/exit blocks driven by random forms."""
    passports = [f"P{rng.randrange(10**8):08d}" for _ in range(max(2, n_blocks))]
    open_set: set[str] = {
        p for p in passports if world.registry.has_open_trip(p)
    }
    produced = 0
    while produced < n_blocks:
        if open_set and (rng.random() < 0.45 or len(open_set) == len(passports)):
            passport = rng.choice(sorted(open_set))
            world.registry.register_exit(make_exit_form(passport, rng), world.officer)
            open_set.discard(passport)
        else:
            candidates = [p for p in passports if p not in open_set]
            passport = rng.choice(candidates)
            signer = world.officer if rng.random() < 0.8 else world.admin
            world.registry.register_entry(make_entry_form(passport, rng), signer)
            open_set.add(passport)
        produced += 1
