from decimal import Decimal
from typing import Dict, Optional

import pytest

from dao_kpi.kpi_engine import kpi_config as cfg
from dao_kpi.synth.data_utils import SynthSpec
from dao_kpi.synth.project import write_synth_project


def make_entry(dao_id: str, levels: Dict[str, str], metrics: Optional[Dict] = None, chain_id: int = 1,
               voters=(), tier: str = 'ModeratelyActive') -> Dict:
    """ A per-DAO KPI entry as the stats and report stages see it. """
    assessment = {}
    for kpi in cfg.KPI_NAMES:
        level = levels.get(kpi, cfg.NOT_ASSESSABLE)
        score = cfg.SCORES[kpi].get(level)
        assessment[kpi] = {'level': level, 'score': None if score is None else str(score), 'reason': ''}
    scores = [cfg.SCORES[k].get(assessment[k]['level']) for k in cfg.KPI_NAMES]
    assessment['composite'] = None if None in scores else str(sum(scores, Decimal(0)))
    base = {
        'participation_rate': 0.2, 'treasury_usd': '250000000', 'circulating_pct': 0.7, 'approval_rate': 0.5,
        'avg_duration_days': 5.0, 'largest_holder_share': 0.2, 'proposer_concentration': 0.5,
        'total_members': 100, 'active_members': 20, 'total_proposals': 4, 'fully_automated': True,
    }
    base.update(metrics or {})
    return {'dao_id': dao_id, 'chain_id': chain_id, 'activity_tier': tier, 'voters': list(voters),
            'total_proposals': base['total_proposals'], 'metrics': base, 'assessment': assessment}


@pytest.fixture
def entry_factory():
    return make_entry


SMALL_SPECS = [
    SynthSpec(seed=101, member_count=40, participation_target=0.05, proposal_count=3, approval_target=0.2,
              holder_distribution='single_whale', holder_param=0.7, treasury_usd=Decimal('50000000'),
              framework='governor_alpha', dao_id='alpha-small'),
    SynthSpec(seed=102, member_count=60, participation_target=0.3, proposal_count=5, approval_target=0.6,
              treasury_usd=Decimal('400000000'), framework='governor_bravo', dao_id='bravo-mid'),
    SynthSpec(seed=103, member_count=80, participation_target=0.6, proposal_count=6, approval_target=0.9,
              holder_distribution='pareto', holder_param=1.5, treasury_usd=Decimal('2000000000'),
              automated=False, framework='oz_governor', dao_id='oz-large'),
    SynthSpec(seed=104, member_count=30, participation_target=0.5, proposal_count=4, approval_target=0.5,
              duration_days_range=(1.0, 2.0), framework='governor_bravo', dao_id='bravo-fast'),
]


@pytest.fixture(scope='session')
def small_project(tmp_path_factory):
    """ Four synthetic DAOs, one per framework plus a short-window one, recorded as fixtures. """
    project_dir = tmp_path_factory.mktemp('small_project')
    write_synth_project(SMALL_SPECS, project_dir)
    return project_dir
