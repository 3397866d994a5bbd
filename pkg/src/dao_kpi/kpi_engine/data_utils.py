from dataclasses import dataclass
from decimal import Decimal
from typing import Any, Dict, Optional

from dao_kpi.errors import DataIntegrityError
from dao_kpi.kpi_engine.kpi_config import KPI_NAMES, NOT_ASSESSABLE


@dataclass(frozen=True)
class ParticipationMetrics:
    active_members: int
    total_members: int

    def __post_init__(self):
        if not 0 <= self.active_members <= max(self.total_members, 0):
            raise DataIntegrityError(f'{self.active_members} active members outside [0, {self.total_members}]')

    @property
    def rate(self) -> Optional[float]:
        if self.total_members <= 0:
            return None
        return self.active_members / self.total_members


@dataclass(frozen=True)
class TreasuryMetrics:
    treasury_usd: Optional[Decimal]
    total_supply: int
    circulating_supply: int

    @property
    def circulating_pct(self) -> float:
        if self.total_supply <= 0:
            return 0.0
        return self.circulating_supply / self.total_supply


@dataclass(frozen=True)
class VotingMetrics:
    approved: int
    total_proposals: int
    total_duration_seconds: int

    def __post_init__(self):
        if self.approved > self.total_proposals:
            raise ValueError(f'{self.approved} approved out of {self.total_proposals} proposals')

    @property
    def approval_rate(self) -> Optional[float]:
        if self.total_proposals == 0:
            return None
        return self.approved / self.total_proposals

    @property
    def avg_duration_days(self) -> Optional[float]:
        if self.total_proposals == 0:
            return None
        return self.total_duration_seconds / (self.total_proposals * 86_400)


@dataclass(frozen=True)
class DecentralisationMetrics:
    largest_holder_share: float
    participation_level: str
    fully_automated: bool


@dataclass(frozen=True)
class KpiResult:
    level: str
    score: Optional[Decimal]
    reason: str = ''

    @property
    def assessable(self) -> bool:
        return self.score is not None

    @classmethod
    def not_assessable(cls, reason: str) -> 'KpiResult':
        return cls(level=NOT_ASSESSABLE, score=None, reason=reason)

    def to_dict(self) -> Dict[str, Any]:
        return {'level': self.level, 'score': None if self.score is None else str(self.score), 'reason': self.reason}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'KpiResult':
        return cls(level=data['level'], score=None if data['score'] is None else Decimal(data['score']),
                   reason=data.get('reason', ''))


@dataclass(frozen=True)
class KpiAssessment:
    participation: KpiResult
    funds: KpiResult
    voting: KpiResult
    decentralisation: KpiResult
    composite: Optional[Decimal]

    def results(self) -> Dict[str, KpiResult]:
        return {name: getattr(self, name) for name in KPI_NAMES}

    def to_dict(self) -> Dict[str, Any]:
        data = {name: result.to_dict() for name, result in self.results().items()}
        data['composite'] = None if self.composite is None else str(self.composite)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'KpiAssessment':
        return cls(**{name: KpiResult.from_dict(data[name]) for name in KPI_NAMES},
                   composite=None if data['composite'] is None else Decimal(data['composite']))
