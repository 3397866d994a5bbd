"""Harmonised dataset on disk: one versioned document per DAO plus a manifest."""
import hashlib
import json
from pathlib import Path
from typing import Any, Dict, Iterable, List

from dao_kpi.errors import StageError
from dao_kpi.git_utils import software_provenance
from dao_kpi.harmonize.data_utils import DaoRecord, ValidationReport


SCHEMA_VERSION = '1.0'
MANIFEST_NAME = 'manifest.json'


def file_sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, 'rb') as f:
        for block in iter(lambda: f.read(1 << 16), b''):
            digest.update(block)
    return digest.hexdigest()


def provenance(raw_files: Iterable[Path], root: Path, snapshot_block: int) -> Dict[str, Any]:
    """ Hashes of the raw inputs (relative to `root`), the cutoff block and the tool's own checkout. """
    hashes = {str(Path(p).relative_to(root).as_posix()): file_sha256(Path(p)) for p in sorted(raw_files)}
    return {'raw_files': hashes, 'snapshot_block': snapshot_block, **software_provenance()}


def dump_json(data: Any, path: Path) -> None:
    """ Stable serialization shared by every stage: sorted keys, fixed indentation, trailing newline. """
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w') as f:
        json.dump(data, f, sort_keys=True, indent=2)
        f.write('\n')


def load_json(path: Path, stage: str) -> Any:
    if not path.exists():
        raise StageError(stage, f'Missing input {path}; run the previous stage first')
    with open(path, 'r') as f:
        return json.load(f)


def harmonised_document(record: DaoRecord, report: ValidationReport, drop_reports: List[Dict[str, Any]],
                        prov: Dict[str, Any]) -> Dict[str, Any]:
    return {
        'schema_version': SCHEMA_VERSION,
        'record': record.to_dict(),
        'validation': report.to_dict(),
        'decode_drops': drop_reports,
        'provenance': prov,
    }


def write_harmonised(output_dir: Path, document: Dict[str, Any]) -> Path:
    path = output_dir / f'{document["record"]["dao_id"]}.json'
    dump_json(document, path)
    return path


def read_harmonised(path: Path, stage: str = 'kpi') -> Dict[str, Any]:
    document = load_json(path, stage)
    if document.get('schema_version') != SCHEMA_VERSION:
        raise StageError(stage, f'{path} has schema_version {document.get("schema_version")}, '
                                f'expected {SCHEMA_VERSION}')
    return document


def record_of(document: Dict[str, Any]) -> DaoRecord:
    return DaoRecord.from_dict(document['record'])


def write_manifest(output_dir: Path, documents: List[Dict[str, Any]]) -> Path:
    entries = sorted(
        ({'dao_id': d['record']['dao_id'], 'chain_id': d['record']['chain_id'],
          'activity_tier': d['record']['activity_tier'], 'file': f'{d["record"]["dao_id"]}.json'}
         for d in documents),
        key=lambda e: e['dao_id'],
    )
    path = output_dir / MANIFEST_NAME
    dump_json({'schema_version': SCHEMA_VERSION, 'daos': entries}, path)
    return path
