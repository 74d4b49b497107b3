"""Operational command line: init, key management, records, verification, bench.

Store paths come from flags or the GATECHAIN_CHAIN / GATECHAIN_KEYSTORE
environment variables. Commands that act on the ledger sign with the
bootstrap admin key by default; --as-key selects any other identity whose
private key is hosted in the key store. Every command exits 0 on success
and nonzero on any error; ``verify`` exits 1 when the chain is invalid.
"""

from __future__ import annotations

import csv
import io
import json
import sys
from typing import Optional

import click

from .bench import emit_bench_csv, run_block_benchmark
from .chain import verify_chain
from .node import GateChainNode
from .registry import EntryForm, ExitForm, RegistryError
from .storage import StoreError

DEFAULT_CHAIN = "gatechain.chain"
DEFAULT_KEYSTORE = "gatechain.keys.json"
DEFAULT_LISTEN = "127.0.0.1:8000"

FORMATS = ("table", "csv", "json-lines")


def store_options(command):
    command = click.option(
        "--chain",
        "chain_path",
        envvar="GATECHAIN_CHAIN",
        default=DEFAULT_CHAIN,
        show_default=True,
        help="Chain file path.",
    )(command)
    command = click.option(
        "--keystore",
        "keystore_path",
        envvar="GATECHAIN_KEYSTORE",
        default=DEFAULT_KEYSTORE,
        show_default=True,
        help="Key store path.",
    )(command)
    return command


def format_option(command):
    return click.option(
        "--format",
        "output_format",
        type=click.Choice(FORMATS),
        default="table",
        show_default=True,
        help="Output format.",
    )(command)


def as_key_option(command):
    return click.option(
        "--as-key",
        "as_key",
        default=None,
        help="Act as this hosted public key (default: bootstrap admin).",
    )(command)


def _load_node(chain_path: str, keystore_path: str) -> GateChainNode:
    try:
        return GateChainNode.load(chain_path, keystore_path)
    except (StoreError, ValueError) as exc:
        raise click.ClickException(str(exc))


def _signer(node: GateChainNode, as_key: Optional[str]):
    try:
        if as_key:
            return node.keypair_for(as_key)
        return node.default_admin()
    except StoreError as exc:
        raise click.ClickException(str(exc))


def _emit_rows(output_format: str, header: list[str], rows: list[list]) -> None:
    if output_format == "table":
        widths = [
            max(len(str(header[i])), *(len(str(r[i])) for r in rows)) if rows else len(header[i])
            for i in range(len(header))
        ]
        click.echo("  ".join(h.ljust(w) for h, w in zip(header, widths)))
        for row in rows:
            click.echo("  ".join(str(c).ljust(w) for c, w in zip(row, widths)))
    elif output_format == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer)
        writer.writerow(header)
        writer.writerows(rows)
        click.echo(buffer.getvalue(), nl=False)
    else:  # json-lines
        for row in rows:
            click.echo(json.dumps(dict(zip(header, row)), ensure_ascii=False))


@click.group()
@click.version_option(package_name="gatechain")
def main() -> None:
    """GateChain: permissioned entry-exit ledger operations."""


@main.command()
@store_options
@click.option("--admin-name", default="bootstrap-admin", show_default=True)
def init(chain_path: str, keystore_path: str, admin_name: str) -> None:
    """Create the key store, bootstrap admin, and genesis block."""
    try:
        node = GateChainNode.initialize(chain_path, keystore_path, admin_name=admin_name)
    except StoreError as exc:
        raise click.ClickException(str(exc))
    click.echo(f"chain:     {chain_path}")
    click.echo(f"keystore:  {keystore_path}")
    click.echo(f"admin key: {node.default_admin().public_key}")


@main.group()
def authority() -> None:
    """Manage the validator set."""


@authority.command("add")
@store_options
@as_key_option
@click.option("--public-key", "public_key", default=None, help="Key to register (hex).")
@click.option("--generate", is_flag=True, help="Generate and host a new keypair.")
@click.option("--name", "display_name", required=True)
@click.option("--role", type=click.Choice(["admin", "officer", "auditor"]), required=True)
def authority_add(
    chain_path: str,
    keystore_path: str,
    as_key: Optional[str],
    public_key: Optional[str],
    generate: bool,
    display_name: str,
    role: str,
) -> None:
    """Register a new authority (from a key or freshly generated)."""
    if bool(public_key) == generate:
        raise click.ClickException("provide exactly one of --public-key or --generate")
    node = _load_node(chain_path, keystore_path)
    actor = _signer(node, as_key)
    if generate:
        pair = node.host_new_identity()
        public_key = pair.public_key
    try:
        record = node.authorities.add_authority(
            actor.public_key, public_key, display_name, role
        )
    except Exception as exc:
        raise click.ClickException(str(exc))
    node.save_keystore()
    click.echo(f"added {record.role} {record.display_name}: {record.public_key}")


@authority.command("revoke")
@store_options
@as_key_option
@click.option("--public-key", "public_key", required=True)
def authority_revoke(
    chain_path: str, keystore_path: str, as_key: Optional[str], public_key: str
) -> None:
    """Revoke an authority; its future blocks will be rejected."""
    node = _load_node(chain_path, keystore_path)
    actor = _signer(node, as_key)
    try:
        record = node.authorities.revoke_authority(actor.public_key, public_key)
    except Exception as exc:
        raise click.ClickException(str(exc))
    node.save_keystore()
    click.echo(f"revoked {record.display_name}: {record.public_key}")


@authority.command("list")
@store_options
@format_option
def authority_list(chain_path: str, keystore_path: str, output_format: str) -> None:
    """List registered authorities."""
    node = _load_node(chain_path, keystore_path)
    header = ["public_key", "display_name", "role", "status", "added_at", "revoked_at"]
    rows = [
        [r.public_key, r.display_name, r.role, r.status, r.added_at,
         "" if r.revoked_at is None else r.revoked_at]
        for r in node.authorities.list_records()
    ]
    _emit_rows(output_format, header, rows)


@main.command("record-entry")
@store_options
@as_key_option
@click.option("--passport-number", required=True)
@click.option("--name-surname", required=True)
@click.option("--nationality", required=True)
@click.option("--birthdate", required=True, help="YYYY-MM-DD")
@click.option("--passport-validity-date", required=True, help="YYYY-MM-DD")
@click.option("--entry-gate", required=True)
@click.option("--entry-datetime", required=True, help="'YYYY-MM-DD HH:MM'")
@click.option("--plate", default="")
def record_entry(
    chain_path: str,
    keystore_path: str,
    as_key: Optional[str],
    passport_number: str,
    name_surname: str,
    nationality: str,
    birthdate: str,
    passport_validity_date: str,
    entry_gate: str,
    entry_datetime: str,
    plate: str,
) -> None:
    """Record a country entry as a new block."""
    node = _load_node(chain_path, keystore_path)
    operator = _signer(node, as_key)
    form = EntryForm(
        passport_number=passport_number,
        name_surname=name_surname,
        nationality=nationality,
        birthdate=birthdate,
        passport_validity_date=passport_validity_date,
        entry_gate=entry_gate,
        entry_datetime=entry_datetime,
        plate=plate,
    )
    try:
        block = node.registry.register_entry(form, operator)
    except Exception as exc:
        raise click.ClickException(str(exc))
    click.echo(f"entry recorded in block {block.index}")


@main.command("record-exit")
@store_options
@as_key_option
@click.option("--passport-number", required=True)
@click.option("--exit-gate", required=True)
@click.option("--exit-datetime", required=True, help="'YYYY-MM-DD HH:MM'")
@click.option("--plate", default="")
def record_exit(
    chain_path: str,
    keystore_path: str,
    as_key: Optional[str],
    passport_number: str,
    exit_gate: str,
    exit_datetime: str,
    plate: str,
) -> None:
    """Record a country exit as a new block (the entry block is untouched)."""
    node = _load_node(chain_path, keystore_path)
    operator = _signer(node, as_key)
    form = ExitForm(
        passport_number=passport_number,
        exit_gate=exit_gate,
        exit_datetime=exit_datetime,
        plate=plate,
    )
    try:
        block = node.registry.register_exit(form, operator)
    except Exception as exc:
        raise click.ClickException(str(exc))
    click.echo(f"exit recorded in block {block.index}")


RECORD_HEADER = [
    "passport_number", "name_surname", "nationality", "birthdate",
    "entry_date", "entry_gate", "exit_date", "exit_gate", "plate",
    "entry_block_index", "exit_block_index", "status",
]


@main.command("list")
@store_options
@as_key_option
@format_option
@click.option("--passport", default=None)
@click.option("--nationality", default=None)
@click.option("--from", "date_from", default=None, help="YYYY-MM-DD")
@click.option("--to", "date_to", default=None, help="YYYY-MM-DD")
@click.option("--gate", default=None)
@click.option("--status", type=click.Choice(["open", "closed"]), default=None)
def list_records(
    chain_path: str,
    keystore_path: str,
    as_key: Optional[str],
    output_format: str,
    passport: Optional[str],
    nationality: Optional[str],
    date_from: Optional[str],
    date_to: Optional[str],
    gate: Optional[str],
    status: Optional[str],
) -> None:
    """List merged travel records."""
    node = _load_node(chain_path, keystore_path)
    caller = _signer(node, as_key)
    try:
        records = node.registry.list_travel_records(
            caller.public_key,
            passport_number=passport,
            nationality=nationality,
            date_from=date_from,
            date_to=date_to,
            gate=gate,
            status=status,
        )
    except RegistryError as exc:
        raise click.ClickException(str(exc))
    rows = []
    for record in records:
        data = record.to_dict()
        data["exit_block_index"] = (
            "" if data["exit_block_index"] is None else data["exit_block_index"]
        )
        rows.append([data[k] for k in RECORD_HEADER])
    _emit_rows(output_format, RECORD_HEADER, rows)


@main.command()
@store_options
@as_key_option
@format_option
@click.option("--from", "date_from", default=None, help="YYYY-MM-DD")
@click.option("--to", "date_to", default=None, help="YYYY-MM-DD")
def stats(
    chain_path: str,
    keystore_path: str,
    as_key: Optional[str],
    output_format: str,
    date_from: Optional[str],
    date_to: Optional[str],
) -> None:
    """Entry/exit statistics from the merged records."""
    node = _load_node(chain_path, keystore_path)
    caller = _signer(node, as_key)
    try:
        report = node.registry.compute_statistics(
            caller.public_key, date_from=date_from, date_to=date_to
        )
    except RegistryError as exc:
        raise click.ClickException(str(exc))
    if output_format == "json-lines":
        click.echo(json.dumps(report.to_dict(), ensure_ascii=False))
        return
    header = ["kind", "key", "entries", "exits"]
    rows: list[list] = [
        ["total", "", report.total_entries, report.total_exits],
        ["currently_inside", "", report.currently_inside, ""],
    ]
    for gate_name, tally in sorted(report.per_gate.items()):
        rows.append(["gate", gate_name, tally.entries, tally.exits])
    for nationality, count in sorted(report.per_nationality.items()):
        rows.append(["nationality", nationality, count, ""])
    for day, tally in sorted(report.per_day.items()):
        rows.append(["day", day, tally.entries, tally.exits])
    _emit_rows(output_format, header, rows)


@main.command()
@store_options
@format_option
def verify(chain_path: str, keystore_path: str, output_format: str) -> None:
    """Verify the whole chain; exit 1 if any violation is found."""
    node = _load_node(chain_path, keystore_path)
    report = verify_chain(node.chain.blocks, node.authorities)
    if output_format == "json-lines":
        click.echo(json.dumps(report.to_dict(), ensure_ascii=False))
    else:
        header = ["block_index", "kind", "detail"]
        rows = [[v.block_index, v.kind.value, v.detail] for v in report.violations]
        if rows or output_format == "csv":
            _emit_rows(output_format, header, rows)
    if report.valid:
        click.echo("chain OK", err=True)
    else:
        click.echo(f"chain INVALID: {len(report.violations)} violation(s)", err=True)
        sys.exit(1)


@main.command()
@store_options
@click.option(
    "--listen",
    envvar="GATECHAIN_LISTEN",
    default=DEFAULT_LISTEN,
    show_default=True,
    help="host:port to bind.",
)
@click.option("--session-ttl", default=8 * 3600.0, show_default=True, help="Seconds.")
def serve(chain_path: str, keystore_path: str, listen: str, session_ttl: float) -> None:
    """Run the HTTP API until interrupted."""
    import uvicorn

    from .server import create_app

    node = _load_node(chain_path, keystore_path)
    app = create_app(node, session_ttl_s=session_ttl)
    try:
        host, port_text = listen.rsplit(":", 1)
        port = int(port_text)
    except ValueError:
        raise click.ClickException(f"--listen must be host:port, got {listen!r}")
    uvicorn.run(app, host=host, port=port, log_level="warning")


@main.command()
@click.option("--blocks", "n_blocks", type=int, required=True, help="Blocks to create.")
@click.option("--out", "out_path", required=True, help="CSV output path.")
@click.option("--seed", type=int, default=0, show_default=True)
def bench(n_blocks: int, out_path: str, seed: int) -> None:
    """Run the block-creation benchmark and write per-block timings as CSV."""
    if n_blocks < 1:
        raise click.ClickException("--blocks must be >= 1")
    report = run_block_benchmark(n_blocks, seed=seed)
    emit_bench_csv(report, out_path)
    post_run = verify_chain(report.chain.blocks, report.validator_set)
    click.echo(f"blocks:               {len(report.rows)}")
    click.echo(f"avg_encryption_time_s: {report.avg_encryption_time_s:.9f}")
    click.echo(f"avg_sign_time_s:       {report.avg_sign_time_s:.9f}")
    click.echo(f"avg_verify_time_s:     {report.avg_verify_time_s:.9f}")
    click.echo(f"verify_to_sign_ratio:  {report.verify_to_sign_ratio:.3f}")
    click.echo(f"chain_verified_clean:  {post_run.valid}")
    click.echo(f"csv: {out_path}")


if __name__ == "__main__":
    main()
