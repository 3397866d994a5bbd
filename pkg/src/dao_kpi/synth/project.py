"""Synthetic projects: generated DAOs recorded as RPC fixtures plus a project config to run the pipeline on."""
import logging
import tempfile
from collections import defaultdict
from decimal import Decimal
from pathlib import Path
from typing import Dict, List, Optional

from dao_kpi.chain_access.providers import RecordingProvider
from dao_kpi.cli.config import load_config
from dao_kpi.cli.stages import run_fetch
from dao_kpi.errors import SpecError
from dao_kpi.harmonize.dataset import dump_json, load_json
from dao_kpi.synth.data_utils import HOLDER_DISTRIBUTIONS, FRAMEWORKS, GroundTruth, SynthFixtures, SynthSpec
from dao_kpi.synth.generator import generate
from dao_kpi.synth.node import InMemoryNode
from dao_kpi.synth.prng import SplitMix64, stable_seed


PROJECT_NAME = 'project.json'
GROUND_TRUTH_NAME = 'ground_truth.json'
SPECS_NAME = 'synth_specs.json'
SNAPSHOT_MARGIN_BLOCKS = 10
DURATION_RANGES = ((1.0, 2.0), (3.0, 7.0), (5.0, 14.0), (10.0, 20.0))
TREASURY_CHOICES = (Decimal('20000000'), Decimal('75000000'), Decimal('400000000'), Decimal('2500000000'))


def random_specs(seed: int, count: int) -> List[SynthSpec]:
    """ `count` varied specs drawn from one seed; the same seed always yields the same list. """
    if count < 1:
        raise SpecError(f'dao count must be positive, got {count}')
    specs = []
    for i in range(count):
        rng = SplitMix64(stable_seed(seed, i))
        distribution = rng.choice(HOLDER_DISTRIBUTIONS)
        holder_param = {'uniform': None,
                        'pareto': rng.uniform(1.1, 3.0),
                        'single_whale': rng.uniform(0.05, 0.8)}[distribution]
        specs.append(SynthSpec(
            seed=stable_seed(seed, i, 'dao'),
            member_count=rng.randint(20, 300),
            participation_target=rng.uniform(0.05, 0.8),
            proposal_count=rng.randint(1, 30),
            approval_target=rng.random(),
            duration_days_range=rng.choice(DURATION_RANGES),
            holder_distribution=distribution,
            holder_param=holder_param,
            automated=rng.random() < 0.5,
            treasury_usd=rng.choice(TREASURY_CHOICES),
            treasury_token_share=rng.uniform(0.0, 0.6),
            transfer_count=rng.randint(0, 60),
            framework=rng.choice(FRAMEWORKS),
            dao_id=f'synth-{seed}-{i:02d}',
        ))
    return specs


def _dao_config(fx: SynthFixtures, spec: SynthSpec) -> Dict:
    return {
        'dao_id': fx.dao_id,
        'chain_id': fx.chain_id,
        'governance': [{'address': fx.governance_address, 'deploy_block': 0, 'abi': fx.framework}],
        'token': {'address': fx.token_address, 'deploy_block': 0, 'abi': 'erc20'},
        'mapping': fx.framework,
        'fully_automated': spec.automated,
        'treasury': [{'asset': 'USD', 'amount': str(spec.treasury_usd), 'usd_price': '1'}],
        'treasury_addresses': [fx.treasury_address],
        'quorum': None,
    }


def write_synth_project(specs: List[SynthSpec], project_dir: Path, max_results_per_query: int = 10_000,
                        max_block_span: int = 50_000, alpha: Optional[float] = None) -> Path:
    """
    Generate every spec, serve each chain from an in-memory node and record the fetch
    stage's requests as fixtures, so the written project replays offline.

    Writes project.json, ground_truth.json, synth_specs.json and fixtures/<chain_id>/.
    Returns the path of project.json.
    """
    project_dir = Path(project_dir)
    ids = [s.dao_id for s in specs]
    if len(set(ids)) != len(ids):
        raise SpecError(f'duplicate synthetic dao_id among {ids}')

    generated = [(spec, *generate(spec)) for spec in specs]
    by_chain = defaultdict(list)
    for spec, fx, _ in generated:
        by_chain[fx.chain_id].append(fx)

    nodes, endpoints, snapshots = {}, [], {}
    for chain_id, fixtures in sorted(by_chain.items()):
        if len({fx.block_time_seconds for fx in fixtures}) != 1:
            raise SpecError(f'DAOs on chain {chain_id} must share block_time_seconds')
        snapshots[chain_id] = max(fx.last_block for fx in fixtures) + SNAPSHOT_MARGIN_BLOCKS
        nodes[chain_id] = InMemoryNode.from_fixtures(fixtures, head=snapshots[chain_id],
                                                     max_results=max_results_per_query)
        endpoints.append({
            'chain_id': chain_id,
            'fixture_dir': f'fixtures/{chain_id}',
            'max_block_span': max_block_span,
            'rate_limit': 1_000_000.0,
            'max_results_per_query': max_results_per_query,
            'block_time_seconds': fixtures[0].block_time_seconds,
        })

    project = {
        'endpoints': endpoints,
        'daos': [_dao_config(fx, spec) for spec, fx, _ in generated],
        'snapshot_blocks': {str(c): b for c, b in snapshots.items()},
        'output_dir': 'output',
    }
    if alpha is not None:
        project['alpha'] = alpha
    project_path = project_dir / PROJECT_NAME
    dump_json(project, project_path)
    dump_json({truth.dao_id: truth.to_dict() for _, _, truth in generated}, project_dir / GROUND_TRUTH_NAME)
    dump_json([spec.to_dict() for spec in specs], project_dir / SPECS_NAME)

    config = load_config(project_path)
    recorders = {chain_id: RecordingProvider(node, config.path(config.endpoint(chain_id).fixture_dir))
                 for chain_id, node in nodes.items()}
    with tempfile.TemporaryDirectory() as scratch:
        run_fetch(config, Path(scratch), providers=recorders)
    for chain_id, node in nodes.items():
        logging.info(f'Recorded chain {chain_id}: {dict(sorted(node.requests.items()))}')
    return project_path


def read_ground_truth(project_dir: Path) -> Dict[str, GroundTruth]:
    data = load_json(Path(project_dir) / GROUND_TRUTH_NAME, 'synth')
    return {dao_id: GroundTruth.from_dict(d) for dao_id, d in data.items()}


def read_specs(path: Path) -> List[SynthSpec]:
    data = load_json(Path(path), 'synth')
    if not isinstance(data, list):
        raise SpecError(f'{path} must hold a list of synth specs')
    return [SynthSpec.from_dict(d) for d in data]
