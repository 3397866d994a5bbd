"""
Pipeline stages. Each reads the previous stage's files under the output directory:

  raw/<dao>.json          fetch   logs, token metadata, block timestamps
  decoded/<dao>.json      decode  decoded events and drop counts
  harmonised/<dao>.json   build   harmonised record, validation report, provenance
  kpi/<dao>.json          kpi     harmonised document plus metrics and assessment
  stats/stat_report.json  stats   test battery
  report/                 report  tables, bundle and charts
"""
import datetime
import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Optional

import pandas as pd
from tqdm import tqdm

from dao_kpi.abi_codec.abi import event_topic
from dao_kpi.abi_codec.decode import DecodedEvent, decode_logs
from dao_kpi.abi_codec.governance import ProposalCreated, map_all, map_to_governance, to_token_transfer
from dao_kpi.abi_codec.resources import load_abi
from dao_kpi.chain_access.client import ChainClient
from dao_kpi.chain_access.data_utils import RawLog, TokenMetadata
from dao_kpi.chain_access.providers import FixtureProvider, HttpProvider, Provider, RecordingProvider
from dao_kpi.cli.config import DaoConfig, EndpointConfig, ProjectConfig
from dao_kpi.errors import ArgumentError, DaoKpiError, MalformedLogError, StageError
from dao_kpi.harmonize.dataset import (MANIFEST_NAME, dump_json, harmonised_document, load_json, provenance,
                                       read_harmonised, record_of, write_harmonised, write_manifest)
from dao_kpi.harmonize.record import DaoInputs, build_dao_record
from dao_kpi.harmonize.validate import dedup_and_validate
from dao_kpi.kpi_engine.metrics import kpi_section
from dao_kpi.report.emit import FORMATS, build_bundle, emit
from dao_kpi.report.summary import kpi_entry
from dao_kpi.stats.battery import run_battery


RAW_DIR, DECODED_DIR, HARMONISED_DIR, KPI_DIR, STATS_DIR, REPORT_DIR = (
    'raw', 'decoded', 'harmonised', 'kpi', 'stats', 'report')
STAT_REPORT_NAME = 'stat_report.json'


def make_provider(endpoint: EndpointConfig, config: ProjectConfig) -> Provider:
    if endpoint.fixture_dir is not None:
        provider = FixtureProvider(config.path(endpoint.fixture_dir))
    else:
        provider = HttpProvider(endpoint.resolve_url())
    if endpoint.record_dir is not None:
        provider = RecordingProvider(provider, config.path(endpoint.record_dir))
    return provider


def _error(errors: List[Dict[str, str]], dao_id: str, e: Exception) -> None:
    logging.error(f'{dao_id}: {e}')
    errors.append({
        'dao_id': dao_id,
        'error_message': str(e),
        'datetime': str(datetime.datetime.now()),
    })


def write_error_log(output_dir: Path, stage: str, errors: List[Dict[str, str]]) -> None:
    path = output_dir / f'{stage}_error_log.txt'
    if errors:
        pd.DataFrame(errors).to_csv(path)
    elif path.exists():
        path.unlink()


def _finish(stage: str, output_dir: Path, errors: List[Dict[str, str]], done: int) -> None:
    write_error_log(output_dir, stage, errors)
    if done == 0:
        raise StageError(stage, f'no DAO survived; see {output_dir / f"{stage}_error_log.txt"}')
    if errors:
        logging.warning(f'{stage}: {len(errors)} DAO(s) skipped, {done} done')


# fetch

def _window_blocks(dao: DaoConfig, config: ProjectConfig, gov_logs: Dict[str, List[RawLog]]) -> List[int]:
    """ Vote-window bounds of block-unit mappings, read from the ProposalCreated logs. """
    mapping = config.resolve_mapping(dao)
    if mapping.vote_window_unit != 'block':
        return []
    blocks = set()
    for contract in dao.governance:
        events, _ = decode_logs(load_abi(contract.abi, config.base_dir), gov_logs[contract.address], contract.address)
        for event in events:
            try:
                gov = map_to_governance(event, mapping)
            except MalformedLogError:
                continue
            if isinstance(gov, ProposalCreated):
                blocks.update((gov.vote_start, gov.vote_end))
    return sorted(blocks)


def fetch_dao(client: ChainClient, dao: DaoConfig, config: ProjectConfig, snapshot_block: int) -> Dict[str, Any]:
    """
    Pull everything one DAO needs up to the snapshot block.

    Vote-window blocks past the snapshot get timestamps extrapolated from the snapshot
    block with the endpoint's block time.
    """
    token_ref = dao.token_ref()
    for ref in dao.governance_refs() + [token_ref]:
        if ref.deploy_block > snapshot_block:
            raise ArgumentError(f'{ref.address} deploys at block {ref.deploy_block}, after snapshot {snapshot_block}')

    gov_logs = {ref.address: client.fetch_logs(ref, ref.deploy_block, snapshot_block) for ref in dao.governance_refs()}
    transfer = next((s for s in load_abi(dao.token.abi, config.base_dir) if s.name == 'Transfer'), None)
    token_logs = client.fetch_logs(token_ref, token_ref.deploy_block, snapshot_block,
                                   topic0=None if transfer is None else event_topic(transfer))
    metadata = client.fetch_token_metadata(token_ref, snapshot_block)

    blocks = {log.block_number for logs in gov_logs.values() for log in logs} | {l.block_number for l in token_logs}
    windows = _window_blocks(dao, config, gov_logs)
    timestamps = client.fetch_block_timestamps(sorted(blocks | {b for b in windows if b <= snapshot_block}
                                                      | {snapshot_block}))
    snapshot_timestamp = timestamps[snapshot_block]
    block_time = config.endpoint(dao.chain_id).block_time_seconds
    for block in windows:
        if block > snapshot_block:
            timestamps[block] = snapshot_timestamp + round((block - snapshot_block) * block_time)

    return {
        'dao_id': dao.dao_id,
        'chain_id': dao.chain_id,
        'snapshot_block': snapshot_block,
        'snapshot_timestamp': snapshot_timestamp,
        'governance': {address: [log.with_timestamp(timestamps[log.block_number]).to_dict() for log in logs]
                       for address, logs in gov_logs.items()},
        'token': {token_ref.address: [log.with_timestamp(timestamps[log.block_number]).to_dict()
                                      for log in token_logs]},
        'token_metadata': metadata.to_dict(),
        'timestamps': {str(b): t for b, t in sorted(timestamps.items())},
    }


def run_fetch(config: ProjectConfig, output_dir: Path, providers: Optional[Dict[int, Provider]] = None) -> List[Path]:
    """ Fetch all DAOs, at most `max_parallel_fetches` at a time; one client per chain is shared by its DAOs. """
    providers = providers or {}
    clients = {}
    for chain_id in sorted({dao.chain_id for dao in config.daos}):
        endpoint = config.endpoint(chain_id)
        provider = providers.get(chain_id) or make_provider(endpoint, config)
        client = ChainClient(endpoint.to_endpoint(), provider)
        try:
            head = client.fetch_chain_head()
        except DaoKpiError as e:
            raise StageError('fetch', f'chain {chain_id} unreachable: {e}')
        snapshot = config.snapshot_blocks[chain_id]
        if snapshot > head:
            raise StageError('fetch', f'snapshot block {snapshot} is past the head {head} of chain {chain_id}')
        clients[chain_id] = client

    raw_dir = output_dir / RAW_DIR
    errors, written = [], []
    with ThreadPoolExecutor(max_workers=config.max_parallel_fetches) as pool:
        futures = {pool.submit(fetch_dao, clients[dao.chain_id], dao, config, config.snapshot_blocks[dao.chain_id]):
                   dao.dao_id for dao in config.daos}
        for future in tqdm(as_completed(futures), total=len(futures), desc='fetch'):
            dao_id = futures[future]
            try:
                raw = future.result()
            except DaoKpiError as e:
                _error(errors, dao_id, e)
                continue
            path = raw_dir / f'{dao_id}.json'
            dump_json(raw, path)
            written.append(path)
    _finish('fetch', output_dir, sorted(errors, key=lambda e: e['dao_id']), len(written))
    return sorted(written)


# decode

def decode_dao(raw: Dict[str, Any], dao: DaoConfig, config: ProjectConfig) -> Dict[str, Any]:
    gov_events, token_events, drops = [], [], []
    for contract in dao.governance:
        logs = [RawLog.from_dict(d) for d in raw['governance'].get(contract.address, [])]
        events, report = decode_logs(load_abi(contract.abi, config.base_dir), logs, contract.address)
        gov_events.extend(events)
        drops.append(report.to_dict())
    logs = [RawLog.from_dict(d) for d in raw['token'].get(dao.token.address, [])]
    events, report = decode_logs(load_abi(dao.token.abi, config.base_dir), logs, dao.token.address)
    token_events.extend(events)
    drops.append(report.to_dict())
    return {
        **{key: raw[key] for key in ('dao_id', 'chain_id', 'snapshot_block', 'snapshot_timestamp',
                                     'token_metadata', 'timestamps')},
        'governance_events': [e.to_dict() for e in gov_events],
        'token_events': [e.to_dict() for e in token_events],
        'decode_drops': drops,
    }


def _per_dao(stage: str, config: ProjectConfig, output_dir: Path, work: Callable[[DaoConfig], Path]) -> List[Path]:
    errors, written = [], []
    for dao in tqdm(sorted(config.daos, key=lambda d: d.dao_id), desc=stage):
        try:
            written.append(work(dao))
        except StageError:
            raise
        except DaoKpiError as e:
            _error(errors, dao.dao_id, e)
    _finish(stage, output_dir, errors, len(written))
    return written


def _available(config: ProjectConfig, output_dir: Path, folder: str, stage: str) -> ProjectConfig:
    """ DAOs whose previous-stage file exists; none at all is a stage-dependency error. """
    present = [d for d in config.daos if (output_dir / folder / f'{d.dao_id}.json').exists()]
    if not present:
        raise StageError(stage, f'Missing inputs in {output_dir / folder}; run the previous stage first')
    return config.model_copy(update={'daos': present})


def run_decode(config: ProjectConfig, output_dir: Path) -> List[Path]:
    subset = _available(config, output_dir, RAW_DIR, 'decode')

    def work(dao: DaoConfig) -> Path:
        raw = load_json(output_dir / RAW_DIR / f'{dao.dao_id}.json', 'decode')
        path = output_dir / DECODED_DIR / f'{dao.dao_id}.json'
        dump_json(decode_dao(raw, dao, config), path)
        return path
    return _per_dao('decode', subset, output_dir, work)


# build

def build_dao(decoded: Dict[str, Any], dao: DaoConfig, config: ProjectConfig, raw_path: Path, root: Path):
    events = [DecodedEvent.from_dict(d) for d in decoded['governance_events'] + decoded['token_events']]
    clean, report = dedup_and_validate(events)
    governance = {c.address for c in dao.governance}
    gov_events, invalid = map_all([e for e in clean if e.contract in governance], config.resolve_mapping(dao))
    report.invalid_governance_events = invalid
    transfers = [t for t in (to_token_transfer(e) for e in clean if e.contract == dao.token.address) if t is not None]

    timestamps = {int(b): t for b, t in decoded['timestamps'].items()}
    mapping = config.resolve_mapping(dao)
    inputs = DaoInputs(
        dao_id=dao.dao_id,
        chain_id=dao.chain_id,
        snapshot_block=decoded['snapshot_block'],
        snapshot_timestamp=decoded['snapshot_timestamp'],
        gov_events=gov_events,
        transfers=transfers,
        token=TokenMetadata.from_dict(decoded['token_metadata']),
        timestamps=timestamps,
        treasury=None if dao.treasury is None else [t.to_entry() for t in dao.treasury],
        treasury_addresses=dao.treasury_addresses,
        locked_addresses=dao.locked_addresses,
        fully_automated=dao.fully_automated,
        quorum=dao.quorum,
        quorum_includes_abstain=mapping.quorum_includes_abstain,
    )
    record, report = build_dao_record(inputs, report)
    return harmonised_document(record, report, decoded['decode_drops'],
                               provenance([raw_path], root, decoded['snapshot_block']))


def run_build(config: ProjectConfig, output_dir: Path) -> List[Path]:
    subset = _available(config, output_dir, DECODED_DIR, 'build')
    documents = []

    def work(dao: DaoConfig) -> Path:
        decoded = load_json(output_dir / DECODED_DIR / f'{dao.dao_id}.json', 'build')
        document = build_dao(decoded, dao, config, output_dir / RAW_DIR / f'{dao.dao_id}.json', output_dir)
        path = write_harmonised(output_dir / HARMONISED_DIR, document)
        documents.append(document)
        return path
    written = _per_dao('build', subset, output_dir, work)
    write_manifest(output_dir / HARMONISED_DIR, documents)
    return written


# kpi, stats, report

def _manifest_documents(folder: Path, stage: str) -> Iterable[Dict[str, Any]]:
    manifest = load_json(folder / MANIFEST_NAME, stage)
    for entry in manifest['daos']:
        yield read_harmonised(folder / entry['file'], stage)


def run_kpi(config: ProjectConfig, output_dir: Path) -> List[Path]:
    errors, written, documents = [], [], []
    for document in tqdm(list(_manifest_documents(output_dir / HARMONISED_DIR, 'kpi')), desc='kpi'):
        dao_id = document['record']['dao_id']
        try:
            document = {**document, 'kpi': kpi_section(record_of(document))}
        except (DaoKpiError, ValueError) as e:
            _error(errors, dao_id, e)
            continue
        documents.append(document)
        written.append(write_harmonised(output_dir / KPI_DIR, document))
    _finish('kpi', output_dir, errors, len(written))
    write_manifest(output_dir / KPI_DIR, documents)
    return written


def kpi_entries(output_dir: Path, stage: str) -> List[Dict[str, Any]]:
    return [kpi_entry(d) for d in _manifest_documents(output_dir / KPI_DIR, stage)]


def run_stats(config: ProjectConfig, output_dir: Path) -> Path:
    report = run_battery(kpi_entries(output_dir, 'stats'), alpha=config.alpha)
    path = output_dir / STATS_DIR / STAT_REPORT_NAME
    dump_json(report, path)
    return path


def run_report(config: ProjectConfig, output_dir: Path, formats: Iterable[str] = FORMATS,
               radar_daos: Optional[List[str]] = None) -> List[Path]:
    entries = kpi_entries(output_dir, 'report')
    stat_report = load_json(output_dir / STATS_DIR / STAT_REPORT_NAME, 'report')
    try:
        bundle = build_bundle(entries, stat_report, radar_daos or config.radar_daos)
    except ArgumentError as e:
        raise StageError('report', str(e))
    return emit(bundle, output_dir / REPORT_DIR, formats)
