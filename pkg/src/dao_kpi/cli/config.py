"""Project configuration: chain endpoints, DAOs and analysis settings, validated with pydantic."""
import json
import os
from decimal import Decimal
from pathlib import Path
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, ValidationError, field_validator, model_validator

from dao_kpi.abi_codec.resources import load_abi, load_mapping
from dao_kpi.abi_codec.governance import EventMapping, validate_mapping
from dao_kpi.chain_access.data_utils import ChainEndpoint, ContractRef, normalize_address
from dao_kpi.errors import ArgumentError, ConfigError, DaoKpiError
from dao_kpi.harmonize.data_utils import TreasuryEntry


class EndpointConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    chain_id: int
    rpc_url: Optional[str] = None
    rpc_url_env: Optional[str] = None # name of the variable holding the URL, credentials included
    fixture_dir: Optional[str] = None
    record_dir: Optional[str] = None
    max_block_span: int = Field(2000, ge=1)
    rate_limit: float = Field(10.0, gt=0)
    max_results_per_query: int = Field(10_000, ge=1)
    block_time_seconds: float = Field(12.0, gt=0)

    @model_validator(mode='after')
    def _one_source(self) -> 'EndpointConfig':
        if sum(x is not None for x in (self.rpc_url, self.rpc_url_env, self.fixture_dir)) != 1:
            raise ValueError(f'chain {self.chain_id}: set exactly one of rpc_url, rpc_url_env, fixture_dir')
        return self

    def resolve_url(self) -> Optional[str]:
        if self.rpc_url_env is None:
            return self.rpc_url
        url = os.environ.get(self.rpc_url_env)
        if not url:
            raise ConfigError(f'chain {self.chain_id}: environment variable {self.rpc_url_env} is not set')
        return url

    def to_endpoint(self) -> ChainEndpoint:
        return ChainEndpoint(chain_id=self.chain_id, rpc_url=self.rpc_url or self.rpc_url_env or self.fixture_dir,
                             max_block_span=self.max_block_span, rate_limit=self.rate_limit,
                             max_results_per_query=self.max_results_per_query,
                             block_time_seconds=self.block_time_seconds)


class ContractConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    address: str
    deploy_block: int = Field(0, ge=0)
    abi: str

    @field_validator('address')
    @classmethod
    def _address(cls, value: str) -> str:
        try:
            return normalize_address(value)
        except ArgumentError as e:
            raise ValueError(str(e))


class TreasuryEntryConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    asset: str
    amount: Decimal
    usd_price: Decimal

    def to_entry(self) -> TreasuryEntry:
        return TreasuryEntry(asset=self.asset, amount=self.amount, usd_price=self.usd_price)


class DaoConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    dao_id: str = Field(pattern=r'^[A-Za-z0-9_.-]+$')
    chain_id: int
    governance: List[ContractConfig] = Field(min_length=1)
    token: ContractConfig
    mapping: str
    fully_automated: Optional[bool] = None
    treasury: Optional[List[TreasuryEntryConfig]] = None
    treasury_addresses: List[str] = Field(default_factory=list)
    locked_addresses: List[str] = Field(default_factory=list)
    quorum: Optional[int] = Field(None, ge=0)

    @field_validator('treasury_addresses', 'locked_addresses')
    @classmethod
    def _addresses(cls, values: List[str]) -> List[str]:
        try:
            return [normalize_address(v) for v in values]
        except ArgumentError as e:
            raise ValueError(str(e))

    def governance_refs(self) -> List[ContractRef]:
        return [ContractRef(c.address, self.chain_id, c.deploy_block, 'governance') for c in self.governance]

    def token_ref(self) -> ContractRef:
        return ContractRef(self.token.address, self.chain_id, self.token.deploy_block, 'token')


class ProjectConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    endpoints: List[EndpointConfig] = Field(min_length=1)
    daos: List[DaoConfig] = Field(min_length=1)
    snapshot_blocks: Dict[int, int]
    alpha: float = Field(0.05, gt=0, lt=1)
    output_dir: str = 'output'
    max_parallel_fetches: int = Field(4, ge=1)
    radar_daos: Optional[List[str]] = None

    # set after loading; relative paths resolve against it
    _base_dir: Path = PrivateAttr(default=Path('.'))

    @model_validator(mode='after')
    def _consistent(self) -> 'ProjectConfig':
        chains = [e.chain_id for e in self.endpoints]
        if len(set(chains)) != len(chains):
            raise ValueError('duplicate chain_id among endpoints')
        ids = [d.dao_id for d in self.daos]
        duplicates = sorted({i for i in ids if ids.count(i) > 1})
        if duplicates:
            raise ValueError(f'duplicate dao_id: {", ".join(duplicates)}')
        for dao in self.daos:
            if dao.chain_id not in chains:
                raise ValueError(f'{dao.dao_id}: no endpoint for chain {dao.chain_id}')
            if dao.chain_id not in self.snapshot_blocks:
                raise ValueError(f'{dao.dao_id}: no snapshot block for chain {dao.chain_id}')
        return self

    @property
    def base_dir(self) -> Path:
        return self._base_dir

    def endpoint(self, chain_id: int) -> EndpointConfig:
        return next(e for e in self.endpoints if e.chain_id == chain_id)

    def path(self, value: str) -> Path:
        path = Path(value)
        return path if path.is_absolute() else self.base_dir / path

    def resolve_mapping(self, dao: DaoConfig) -> EventMapping:
        return load_mapping(dao.mapping, self.base_dir)

    def check_references(self) -> None:
        """ Every ABI and mapping reference must load, and each mapping must fit its governance ABIs. """
        for dao in self.daos:
            mapping = self.resolve_mapping(dao)
            specs = []
            for contract in dao.governance:
                specs.extend(load_abi(contract.abi, self.base_dir))
            validate_mapping(mapping, specs)
            load_abi(dao.token.abi, self.base_dir)


def load_config(path: Path, snapshot_block: Optional[int] = None, alpha: Optional[float] = None,
                output_dir: Optional[Path] = None) -> ProjectConfig:
    """
    Read and validate a project config; command-line values override the file's.

    Raises
    ------
    ConfigError
        Unreadable file, schema violation, duplicate DAO or unresolvable reference.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f'Cannot read config {path}: {e}')
    if alpha is not None:
        data['alpha'] = alpha
    if output_dir is not None:
        data['output_dir'] = str(output_dir)
    if snapshot_block is not None:
        data['snapshot_blocks'] = {str(e['chain_id']): snapshot_block for e in data.get('endpoints', [])}
    try:
        config = ProjectConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f'Invalid config {path}: {e}')
    config._base_dir = path.resolve().parent
    try:
        config.check_references()
    except ConfigError:
        raise
    except DaoKpiError as e:
        raise ConfigError(str(e))
    return config
