import re
from dataclasses import dataclass, replace
from typing import Any, Dict, List, Optional, Tuple

from dao_kpi.errors import ArgumentError


ADDRESS_RE = re.compile(r'^0x[0-9a-fA-F]{40}$')
HASH_RE = re.compile(r'^0x[0-9a-fA-F]{64}$')
ZERO_ADDRESS = '0x' + '00' * 20
CONTRACT_KINDS = ('governance', 'token')


def normalize_address(address: str) -> str:
    if not isinstance(address, str) or not ADDRESS_RE.match(address):
        raise ArgumentError(f'Not a 20-byte hex address: {address!r}')
    return address.lower()


def to_hex_quantity(value: int) -> str:
    return hex(int(value))


def from_hex_quantity(value: Any) -> int:
    if isinstance(value, int):
        return value
    if value in ('0x', '', None):
        return 0
    return int(str(value), 16)


def hex_to_bytes(value: str) -> bytes:
    value = value[2:] if value.startswith('0x') else value
    return bytes.fromhex(value)


def bytes_to_hex(value: bytes) -> str:
    return '0x' + value.hex()


@dataclass(frozen=True)
class ChainEndpoint:
    chain_id: int
    rpc_url: str
    max_block_span: int = 2000
    rate_limit: float = 10.0
    max_results_per_query: int = 10000 # provider hard cap on logs per eth_getLogs answer
    block_time_seconds: float = 12.0

    def __post_init__(self):
        if self.max_block_span < 1:
            raise ArgumentError(f'max_block_span must be >= 1, got {self.max_block_span}')
        if not self.rate_limit > 0:
            raise ArgumentError(f'rate_limit must be > 0, got {self.rate_limit}')
        if self.max_results_per_query < 1:
            raise ArgumentError(f'max_results_per_query must be >= 1, got {self.max_results_per_query}')


@dataclass(frozen=True)
class ContractRef:
    address: str
    chain_id: int
    deploy_block: int = 0
    kind: str = 'governance'

    def __post_init__(self):
        object.__setattr__(self, 'address', normalize_address(self.address))
        if self.deploy_block < 0:
            raise ArgumentError(f'deploy_block must be non-negative, got {self.deploy_block}')
        if self.kind not in CONTRACT_KINDS:
            raise ArgumentError(f'Unknown contract kind "{self.kind}", expected one of {CONTRACT_KINDS}')


@dataclass(frozen=True)
class RawLog:
    address: str
    topics: Tuple[str, ...]
    data: str
    block_number: int
    tx_hash: str
    log_index: int
    block_timestamp: Optional[int] = None

    def __post_init__(self):
        if len(self.topics) > 4:
            raise ArgumentError(f'A log carries at most 4 topics, got {len(self.topics)}')

    @property
    def key(self) -> Tuple[int, str, int]:
        return (self.block_number, self.tx_hash, self.log_index)

    @property
    def sort_key(self) -> Tuple[int, int]:
        return (self.block_number, self.log_index)

    def with_timestamp(self, timestamp: int) -> 'RawLog':
        return replace(self, block_timestamp=timestamp)

    @classmethod
    def from_rpc(cls, entry: Dict[str, Any]) -> 'RawLog':
        """ Build from an eth_getLogs result entry (hex quantities). """
        return cls(
            address=entry['address'].lower(),
            topics=tuple(t.lower() for t in entry.get('topics', [])),
            data=entry.get('data', '0x').lower(),
            block_number=from_hex_quantity(entry['blockNumber']),
            tx_hash=entry['transactionHash'].lower(),
            log_index=from_hex_quantity(entry['logIndex']),
        )

    def to_rpc(self) -> Dict[str, Any]:
        return {
            'address': self.address,
            'topics': list(self.topics),
            'data': self.data,
            'blockNumber': to_hex_quantity(self.block_number),
            'transactionHash': self.tx_hash,
            'logIndex': to_hex_quantity(self.log_index),
            'removed': False,
        }

    def to_dict(self) -> Dict[str, Any]:
        return {
            'address': self.address,
            'topics': list(self.topics),
            'data': self.data,
            'block_number': self.block_number,
            'tx_hash': self.tx_hash,
            'log_index': self.log_index,
            'block_timestamp': self.block_timestamp,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'RawLog':
        return cls(
            address=data['address'],
            topics=tuple(data['topics']),
            data=data['data'],
            block_number=data['block_number'],
            tx_hash=data['tx_hash'],
            log_index=data['log_index'],
            block_timestamp=data.get('block_timestamp'),
        )


@dataclass(frozen=True)
class TokenMetadata:
    decimals: int
    total_supply: int
    symbol: str
    decimals_defaulted: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            'decimals': self.decimals,
            'total_supply': str(self.total_supply),
            'symbol': self.symbol,
            'decimals_defaulted': self.decimals_defaulted,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'TokenMetadata':
        return cls(
            decimals=int(data['decimals']),
            total_supply=int(data['total_supply']),
            symbol=data['symbol'],
            decimals_defaulted=bool(data.get('decimals_defaulted', False)),
        )


def sort_logs(logs: List[RawLog]) -> List[RawLog]:
    return sorted(logs, key=lambda log: log.sort_key)
