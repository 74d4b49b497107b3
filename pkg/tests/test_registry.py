"""Border-registry tests: entry/exit recording, merging, statistics."""

from __future__ import annotations

import random

import pytest

from gatechain.authorities import PermissionDeniedError
from gatechain.chain import ENTRY_TYPE, EXIT_TYPE
from gatechain.crypto import decrypt_field
from gatechain.registry import (
    DuplicateOpenEntryError,
    ExitWithoutOpenEntryError,
    ExpiredPassportError,
    FormValidationError,
)

from conftest import grow_random_chain, make_entry_form, make_exit_form, make_world
from oracles import brute_force_stats, brute_force_travel_records


class TestRegisterEntry:
    def test_block_shape_matches_ledger_schema(self, world):
        block = world.registry.register_entry(make_entry_form("U1234567"), world.officer)
        tx = block.transactions[0]
        assert block.nonce == ENTRY_TYPE
        assert tx.ExitDate == ""
        assert tx.ExitGate == ""
        # identity fields are ciphertext, recoverable only with the data key
        assert tx.PassportNumber != "U1234567"
        assert decrypt_field(world.data_key, tx.PassportNumber) == "U1234567"

    def test_duplicate_open_entry_rejected(self, world):
        world.registry.register_entry(make_entry_form("U2"), world.officer)
        with pytest.raises(DuplicateOpenEntryError):
            world.registry.register_entry(make_entry_form("U2"), world.officer)

    def test_reentry_after_exit_allowed(self, world):
        world.registry.register_entry(make_entry_form("U3"), world.officer)
        world.registry.register_exit(make_exit_form("U3"), world.officer)
        block = world.registry.register_entry(make_entry_form("U3"), world.officer)
        assert block.nonce == ENTRY_TYPE

    def test_auditor_cannot_register(self, world):
        with pytest.raises(PermissionDeniedError):
            world.registry.register_entry(make_entry_form("U4"), world.auditor)

    def test_expired_passport_rejected(self, world):
        form = make_entry_form(
            "U5", passport_validity_date="2020-01-01", entry_datetime="2025-12-08 13:36"
        )
        with pytest.raises(ExpiredPassportError):
            world.registry.register_entry(form, world.officer)

    def test_expiry_check_configurable_off(self):
        world = make_world(reject_expired_passports=False)
        form = make_entry_form(
            "U6", passport_validity_date="2020-01-01", entry_datetime="2025-12-08 13:36"
        )
        block = world.registry.register_entry(form, world.officer)
        assert block.index == 1

    @pytest.mark.parametrize(
        "overrides",
        [
            {"passport_number": ""},
            {"entry_gate": ""},
            {"birthdate": "12.08.1995"},
            {"entry_datetime": "2025-12-08"},
            {"passport_validity_date": "2030/08/12"},
        ],
    )
    def test_malformed_forms_rejected(self, world, overrides):
        with pytest.raises(FormValidationError):
            world.registry.register_entry(make_entry_form("U7", **overrides), world.officer)


class TestRegisterExit:
    def test_exit_lands_in_new_higher_block(self, world):
        entry = world.registry.register_entry(make_entry_form("U10"), world.officer)
        exit_block = world.registry.register_exit(make_exit_form("U10"), world.officer)
        assert exit_block.index > entry.index
        assert exit_block.nonce == EXIT_TYPE
        tx = exit_block.transactions[0]
        assert tx.EntryDate == "" and tx.EntryGate == ""
        assert tx.ExitDate and tx.ExitGate

    def test_prior_blocks_byte_identical(self, world):
        world.registry.register_entry(make_entry_form("U11"), world.officer)
        before = [b.serialize() for b in world.chain]
        world.registry.register_exit(make_exit_form("U11"), world.officer)
        assert [b.serialize() for b in world.chain.blocks[: len(before)]] == before

    def test_exit_without_entry_rejected(self, world):
        with pytest.raises(ExitWithoutOpenEntryError):
            world.registry.register_exit(make_exit_form("NEVER"), world.officer)

    def test_exit_reencrypts_identity_fields(self, world):
        entry = world.registry.register_entry(make_entry_form("U12"), world.officer)
        exit_block = world.registry.register_exit(make_exit_form("U12"), world.officer)
        entry_tx, exit_tx = entry.transactions[0], exit_block.transactions[0]
        # same plaintext, different ciphertext: no linkage for outside observers
        assert entry_tx.PassportNumber != exit_tx.PassportNumber
        assert decrypt_field(world.data_key, entry_tx.PassportNumber) == decrypt_field(
            world.data_key, exit_tx.PassportNumber
        )
        # identity metadata repeated for self-containment
        assert exit_tx.Birthdate == entry_tx.Birthdate
        assert exit_tx.PassportValidityDate == entry_tx.PassportValidityDate

    def test_auditor_cannot_register_exit(self, world):
        world.registry.register_entry(make_entry_form("U13"), world.officer)
        with pytest.raises(PermissionDeniedError):
            world.registry.register_exit(make_exit_form("U13"), world.auditor)


class TestListTravelRecords:
    def test_three_pairs_one_passport(self, world):
        for _ in range(3):
            world.registry.register_entry(make_entry_form("U20"), world.officer)
            world.registry.register_exit(make_exit_form("U20"), world.officer)
        records = world.registry.list_travel_records(world.auditor.public_key)
        assert len(records) == 3
        assert all(r.status == "closed" for r in records)
        oracle = brute_force_travel_records(world.chain.blocks, world.data_key)
        assert [r.to_dict() for r in records] == oracle

    def test_open_trip_has_empty_exit_fields(self, world):
        world.registry.register_entry(make_entry_form("U21"), world.officer)
        records = world.registry.list_travel_records(world.officer.public_key)
        assert len(records) == 1
        record = records[0]
        assert record.status == "open"
        assert record.exit_date == "" and record.exit_gate == ""
        assert record.exit_block_index is None

    def test_empty_chain_yields_no_records(self, world):
        assert world.registry.list_travel_records(world.admin.public_key) == []

    def test_permission_required(self, world):
        ghost = "04" + "ab" * 64
        with pytest.raises(PermissionDeniedError):
            world.registry.list_travel_records(ghost)

    def test_filters(self, world):
        world.registry.register_entry(
            make_entry_form("F1", nationality="German", entry_gate="Izmir Port",
                            entry_datetime="2025-11-05 08:00"),
            world.officer,
        )
        world.registry.register_entry(
            make_entry_form("F2", nationality="Turkish", entry_gate="Kapikule Gate",
                            entry_datetime="2025-11-20 09:00"),
            world.officer,
        )
        world.registry.register_exit(
            make_exit_form("F2", exit_gate="Kapikule Gate", exit_datetime="2025-11-21 10:00"),
            world.officer,
        )
        lister = world.registry.list_travel_records
        caller = world.auditor.public_key
        assert [r.passport_number for r in lister(caller, passport_number="F1")] == ["F1"]
        assert [r.passport_number for r in lister(caller, nationality="German")] == ["F1"]
        assert [r.passport_number for r in lister(caller, gate="Kapikule Gate")] == ["F2"]
        assert [r.passport_number for r in lister(caller, status="open")] == ["F1"]
        assert [r.passport_number for r in lister(caller, status="closed")] == ["F2"]
        assert [r.passport_number for r in lister(caller, date_from="2025-11-10")] == ["F2"]
        assert [r.passport_number for r in lister(caller, date_to="2025-11-10")] == ["F1"]
        assert lister(caller, date_from="2030-01-01") == []

    def test_records_ordered_by_entry_block(self, world):
        grow_random_chain(world, random.Random(30), 15)
        records = world.registry.list_travel_records(world.admin.public_key)
        indices = [r.entry_block_index for r in records]
        assert indices == sorted(indices)

    @pytest.mark.parametrize("seed", range(25))
    def test_random_chain_oracle_equivalence(self, seed):
        world = make_world()
        rng = random.Random(1000 + seed)
        grow_random_chain(world, rng, rng.randrange(0, 20))
        records = world.registry.list_travel_records(world.admin.public_key)
        oracle = brute_force_travel_records(world.chain.blocks, world.data_key)
        assert [r.to_dict() for r in records] == oracle

    def test_decryption_failure_names_block_index(self, world):
        import dataclasses

        from gatechain.registry import DataIntegrityError

        world.registry.register_entry(make_entry_form("U30"), world.officer)
        block = world.registry.register_entry(make_entry_form("U31"), world.officer)
        tx = block.transactions[0]
        flipped = ("A" if tx.NameSurname[0] != "A" else "B") + tx.NameSurname[1:]
        bad_tx = dataclasses.replace(tx, NameSurname=flipped)
        world.chain.blocks[block.index] = dataclasses.replace(block, transactions=(bad_tx,))
        with pytest.raises(DataIntegrityError) as exc_info:
            world.registry.list_travel_records(world.admin.public_key)
        assert exc_info.value.block_index == block.index

    def test_at_most_one_open_trip_per_passport(self, world):
        grow_random_chain(world, random.Random(31), 18)
        records = world.registry.list_travel_records(world.admin.public_key)
        open_passports = [r.passport_number for r in records if r.status == "open"]
        assert len(open_passports) == len(set(open_passports))
        # every exit matched exactly one earlier entry
        for record in records:
            if record.exit_block_index is not None:
                assert record.exit_block_index > record.entry_block_index


class TestStatistics:
    def test_genesis_only_all_zero(self, world):
        stats = world.registry.compute_statistics(world.admin.public_key)
        assert stats.total_entries == 0
        assert stats.total_exits == 0
        assert stats.currently_inside == 0
        assert stats.per_gate == {} and stats.per_day == {} and stats.per_nationality == {}

    def test_two_entries_one_exit(self, world):
        world.registry.register_entry(make_entry_form("S1"), world.officer)
        world.registry.register_entry(make_entry_form("S2"), world.officer)
        world.registry.register_exit(make_exit_form("S1"), world.officer)
        stats = world.registry.compute_statistics(world.auditor.public_key)
        assert stats.total_entries == 2
        assert stats.total_exits == 1
        assert stats.currently_inside == 1

    def test_officer_cannot_view_stats(self, world):
        with pytest.raises(PermissionDeniedError):
            world.registry.compute_statistics(world.officer.public_key)

    @pytest.mark.parametrize("seed", range(10))
    def test_random_trips_match_brute_force_tally(self, seed):
        world = make_world()
        rng = random.Random(2000 + seed)
        grow_random_chain(world, rng, rng.randrange(2, 24))
        stats = world.registry.compute_statistics(world.admin.public_key)
        oracle = brute_force_stats(world.chain.blocks, world.data_key)
        assert stats.to_dict() == oracle

    def test_date_range_narrows_counts(self, world):
        world.registry.register_entry(
            make_entry_form("D1", entry_datetime="2025-11-03 10:00"), world.officer
        )
        world.registry.register_entry(
            make_entry_form("D2", entry_datetime="2025-11-25 10:00"), world.officer
        )
        stats = world.registry.compute_statistics(
            world.admin.public_key, date_from="2025-11-01", date_to="2025-11-10"
        )
        assert stats.total_entries == 1
        oracle = brute_force_stats(
            world.chain.blocks, world.data_key, date_from="2025-11-01", date_to="2025-11-10"
        )
        assert stats.total_entries == oracle["total_entries"]
        assert stats.total_exits == oracle["total_exits"]
        # currently_inside stays a whole-chain, present-state count
        assert stats.currently_inside == 2

    def test_invariant_inside_equals_entries_minus_exits(self, world):
        grow_random_chain(world, random.Random(32), 20)
        stats = world.registry.compute_statistics(world.admin.public_key)
        assert stats.currently_inside == stats.total_entries - stats.total_exits
        assert stats.currently_inside >= 0
