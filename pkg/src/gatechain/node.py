"""Single-node composition: stores + authority registry + chain + border registry."""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path
from typing import Union

from .authorities import AuthorityRegistry, ROLE_ADMIN, STATUS_ACTIVE
from .chain import Chain, make_genesis
from .crypto import AuthorityKeyPair, generate_data_key, generate_keypair
from .registry import BorderRegistry
from .storage import ChainStore, KeyStore, StoreError


@dataclass
class GateChainNode:
    chain: Chain
    authorities: AuthorityRegistry
    registry: BorderRegistry
    chain_store: ChainStore
    key_store: KeyStore
    data_key: bytes
    hosted_keys: dict[str, AuthorityKeyPair]

    @classmethod
    def initialize(
        cls,
        chain_path: Union[str, Path],
        keystore_path: Union[str, Path],
        admin_name: str = "bootstrap-admin",
    ) -> "GateChainNode":
        """Create fresh stores: data key, bootstrap admin, and genesis block."""
        chain_store = ChainStore(chain_path)
        key_store = KeyStore(keystore_path)
        if chain_store.exists():
            raise StoreError(f"refusing to overwrite existing chain file: {chain_path}")
        if key_store.exists():
            raise StoreError(f"refusing to overwrite existing key store: {keystore_path}")

        data_key = generate_data_key()
        admin = generate_keypair()
        authorities = AuthorityRegistry()
        now = time.time()
        authorities.bootstrap_admin(admin.public_key, admin_name, at=now)
        hosted = {admin.public_key: admin}

        chain = Chain(authorities)
        chain.append(make_genesis(admin, timestamp=now))

        chain_store.create()
        chain_store.append_block(chain[0])
        key_store.save(data_key, authorities, hosted)

        registry = BorderRegistry(chain, authorities, data_key, chain_store=chain_store)
        return cls(
            chain=chain,
            authorities=authorities,
            registry=registry,
            chain_store=chain_store,
            key_store=key_store,
            data_key=data_key,
            hosted_keys=hosted,
        )

    @classmethod
    def load(
        cls,
        chain_path: Union[str, Path],
        keystore_path: Union[str, Path],
    ) -> "GateChainNode":
        chain_store = ChainStore(chain_path)
        key_store = KeyStore(keystore_path)
        data_key, authorities, hosted = key_store.load()
        chain = Chain(authorities, blocks=chain_store.load())
        registry = BorderRegistry(chain, authorities, data_key, chain_store=chain_store)
        return cls(
            chain=chain,
            authorities=authorities,
            registry=registry,
            chain_store=chain_store,
            key_store=key_store,
            data_key=data_key,
            hosted_keys=hosted,
        )

    def save_keystore(self) -> None:
        """Persist the registry and hosted keys after authority mutations."""
        self.key_store.save(self.data_key, self.authorities, self.hosted_keys)

    def keypair_for(self, public_key: str) -> AuthorityKeyPair:
        pair = self.hosted_keys.get(public_key)
        if pair is None:
            raise StoreError(f"no hosted private key for {public_key[:16]}…")
        return pair

    def default_admin(self) -> AuthorityKeyPair:
        """The first active admin identity hosted on this node."""
        for record in self.authorities.list_records():
            if (
                record.role == ROLE_ADMIN
                and record.status == STATUS_ACTIVE
                and record.public_key in self.hosted_keys
            ):
                return self.hosted_keys[record.public_key]
        raise StoreError("no hosted active admin key in key store")

    def host_new_identity(self) -> AuthorityKeyPair:
        """Generate a keypair whose private half is kept in this key store."""
        pair = generate_keypair()
        self.hosted_keys[pair.public_key] = pair
        return pair
