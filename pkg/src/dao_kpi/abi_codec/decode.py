"""Decode raw logs against event specs, and the inverse encoder used by the generator."""
import logging
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

from eth_abi import decode, encode
from eth_abi.exceptions import DecodingError, EncodingError
from eth_abi.grammar import parse as parse_type
from eth_utils import keccak

from dao_kpi.abi_codec.abi import AbiEventSpec, AbiParam, event_topic, specs_by_topic
from dao_kpi.chain_access.data_utils import RawLog, bytes_to_hex, hex_to_bytes
from dao_kpi.errors import ArgumentError, MalformedLogError, WrongEventError


@dataclass(frozen=True)
class DecodedParam:
    name: str
    type: str
    value: Any
    indexed: bool = False
    hashed: bool = False # value is the 32-byte keccak left in the topic, not the original


@dataclass(frozen=True)
class DecodedEvent:
    event_name: str
    contract: str
    params: Tuple[DecodedParam, ...]
    block_number: int
    tx_hash: str
    log_index: int
    timestamp_utc: Optional[int] = None

    @property
    def key(self) -> Tuple[int, str, int]:
        return (self.block_number, self.tx_hash, self.log_index)

    def get(self, name: str) -> Any:
        for param in self.params:
            if param.name == name:
                return param.value
        raise KeyError(f'{self.event_name} has no parameter "{name}"')

    def has(self, name: str) -> bool:
        return any(param.name == name for param in self.params)

    def with_timestamp(self, timestamp: int) -> 'DecodedEvent':
        return replace(self, timestamp_utc=timestamp)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'event_name': self.event_name,
            'contract': self.contract,
            'block_number': self.block_number,
            'tx_hash': self.tx_hash,
            'log_index': self.log_index,
            'timestamp_utc': self.timestamp_utc,
            'params': [
                {'name': p.name, 'type': p.type, 'indexed': p.indexed, 'hashed': p.hashed,
                 'value': value_to_json(p.type, p.value, p.hashed)}
                for p in self.params
            ],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'DecodedEvent':
        params = tuple(
            DecodedParam(name=p['name'], type=p['type'], indexed=p['indexed'], hashed=p['hashed'],
                         value=value_from_json(p['type'], p['value'], p['hashed']))
            for p in data['params']
        )
        return cls(event_name=data['event_name'], contract=data['contract'], params=params,
                   block_number=data['block_number'], tx_hash=data['tx_hash'], log_index=data['log_index'],
                   timestamp_utc=data.get('timestamp_utc'))


@dataclass
class DropReport:
    """ Per-contract decode bookkeeping: logs_in == events_out + sum(dropped). """
    contract: str
    logs_in: int = 0
    events_out: int = 0
    dropped: Counter = field(default_factory=Counter)

    @property
    def dropped_total(self) -> int:
        return sum(self.dropped.values())

    def to_dict(self) -> Dict[str, Any]:
        return {'contract': self.contract, 'logs_in': self.logs_in, 'events_out': self.events_out,
                'dropped': dict(sorted(self.dropped.items()))}


def _element_type(type_str: str) -> str:
    return parse_type(type_str).item_type.to_type_str()


def value_to_json(type_str: str, value: Any, hashed: bool = False) -> Any:
    if hashed:
        return bytes_to_hex(value)
    parsed = parse_type(type_str)
    if parsed.arrlist is not None:
        element = _element_type(type_str)
        return [value_to_json(element, v) for v in value]
    if parsed.base in ('uint', 'int'):
        return str(value)
    if parsed.base == 'bytes':
        return bytes_to_hex(value)
    return value


def value_from_json(type_str: str, value: Any, hashed: bool = False) -> Any:
    if hashed:
        return hex_to_bytes(value)
    parsed = parse_type(type_str)
    if parsed.arrlist is not None:
        element = _element_type(type_str)
        return tuple(value_from_json(element, v) for v in value)
    if parsed.base in ('uint', 'int'):
        return int(value)
    if parsed.base == 'bytes':
        return hex_to_bytes(value)
    return value


def _normalize(type_str: str, value: Any) -> Any:
    """ Lower-case addresses and freeze arrays into tuples. """
    parsed = parse_type(type_str)
    if parsed.arrlist is not None:
        element = _element_type(type_str)
        return tuple(_normalize(element, v) for v in value)
    if parsed.base == 'address':
        return value.lower()
    return value


def decode_log(spec: AbiEventSpec, log: RawLog, topic: Optional[str] = None) -> DecodedEvent:
    """
    Decode one raw log.

    Parameters
    ----------
    spec: AbiEventSpec
        Event the log is expected to be.
    log: RawLog
        Undecoded log.
    topic: str, optional
        Precomputed topic-0 to match instead of hashing the signature.

    Returns
    -------
    event: DecodedEvent
        Parameters in ABI order. Indexed string/bytes/array parameters carry their
        32-byte topic hash with `hashed=True`.
    """
    topic_values = list(log.topics)
    if not spec.anonymous:
        expected = (topic or event_topic(spec)).lower()
        if not topic_values or topic_values[0].lower() != expected:
            raise WrongEventError(f'Log {log.key} is not a {spec.name} event')
        topic_values = topic_values[1:]

    indexed = spec.indexed_inputs
    if len(topic_values) != len(indexed):
        raise MalformedLogError(f'{spec.name}: expected {len(indexed)} indexed topics, got {len(topic_values)}')

    try:
        data = hex_to_bytes(log.data)
    except ValueError:
        raise MalformedLogError(f'{spec.name}: data is not valid hex')
    if len(data) % 32 != 0:
        raise MalformedLogError(f'{spec.name}: data length {len(data)} is not a multiple of 32')

    data_inputs = spec.data_inputs
    try:
        data_values = decode([p.type for p in data_inputs], data) if data_inputs else ()
    except (DecodingError, OverflowError, ValueError) as e:
        raise MalformedLogError(f'{spec.name}: cannot decode data ({e})')

    topic_iter = iter(topic_values)
    data_iter = iter(data_values)
    params = []
    for param in spec.inputs:
        if param.indexed:
            raw = hex_to_bytes(next(topic_iter))
            if len(raw) != 32:
                raise MalformedLogError(f'{spec.name}: topic for {param.name} is not 32 bytes')
            if param.hashed_when_indexed:
                params.append(DecodedParam(param.name, param.type, raw, indexed=True, hashed=True))
                continue
            try:
                value = decode([param.type], raw)[0]
            except (DecodingError, OverflowError, ValueError) as e:
                raise MalformedLogError(f'{spec.name}: cannot decode topic {param.name} ({e})')
            params.append(DecodedParam(param.name, param.type, _normalize(param.type, value), indexed=True))
        else:
            params.append(DecodedParam(param.name, param.type, _normalize(param.type, next(data_iter))))

    return DecodedEvent(event_name=spec.name, contract=log.address.lower(), params=tuple(params),
                        block_number=log.block_number, tx_hash=log.tx_hash, log_index=log.log_index,
                        timestamp_utc=log.block_timestamp)


def _topic_for(param: AbiParam, value: Any, hashed: bool) -> bytes:
    if param.hashed_when_indexed:
        if hashed or (isinstance(value, bytes) and len(value) == 32 and param.type != 'bytes'):
            return value
        if param.type == 'string':
            return keccak(text=value)
        if param.type == 'bytes':
            return keccak(value)
        raise ArgumentError(f'Indexed array parameter {param.name} must be given as its 32-byte hash')
    return encode([param.type], [value])


def encode_log(spec: AbiEventSpec, values: Sequence[Any], address: str, block_number: int, tx_hash: str,
               log_index: int, hashed: Sequence[bool] = None, topic: Optional[str] = None) -> RawLog:
    """ Inverse of decode_log: lay `values` (ABI order) out as topics and head/tail data. """
    if len(values) != len(spec.inputs):
        raise ArgumentError(f'{spec.name} takes {len(spec.inputs)} values, got {len(values)}')
    hashed = hashed or [False] * len(values)

    topics = [] if spec.anonymous else [(topic or event_topic(spec)).lower()]
    data_types, data_values = [], []
    for param, value, is_hashed in zip(spec.inputs, values, hashed):
        if param.indexed:
            topics.append(bytes_to_hex(_topic_for(param, value, is_hashed)))
        else:
            data_types.append(param.type)
            data_values.append(value)
    try:
        data = encode(data_types, data_values) if data_types else b''
    except EncodingError as e:
        raise ArgumentError(f'{spec.name}: cannot encode values ({e})')
    return RawLog(address=address.lower(), topics=tuple(topics), data=bytes_to_hex(data),
                  block_number=block_number, tx_hash=tx_hash, log_index=log_index)


def reencode(spec: AbiEventSpec, event: DecodedEvent, topic: Optional[str] = None) -> RawLog:
    return encode_log(spec, [p.value for p in event.params], event.contract, event.block_number, event.tx_hash,
                      event.log_index, hashed=[p.hashed for p in event.params], topic=topic)


def decode_logs(specs: List[AbiEventSpec], logs: List[RawLog], contract: str,
                topic_overrides: Optional[Mapping[str, str]] = None) -> Tuple[List[DecodedEvent], DropReport]:
    """
    Decode every log of one contract, skipping and counting those that cannot be decoded.

    Logs are matched on topic-0; logs with an unknown topic are tried against the
    anonymous events of the ABI in document order.
    """
    by_topic = specs_by_topic(specs, dict(topic_overrides) if topic_overrides else None)
    anonymous = [spec for spec in specs if spec.anonymous]
    report = DropReport(contract=contract.lower())
    events = []
    for log in logs:
        report.logs_in += 1
        spec = by_topic.get(log.topics[0].lower()) if log.topics else None
        if spec is None:
            event = _try_anonymous(anonymous, log)
            if event is None:
                report.dropped['unknown_topic'] += 1
            else:
                events.append(event)
                report.events_out += 1
            continue
        try:
            events.append(decode_log(spec, log, topic=log.topics[0]))
            report.events_out += 1
        except MalformedLogError as e:
            logging.warning(f'Dropping malformed log {log.key}: {e}')
            report.dropped['malformed'] += 1
    return events, report


def _try_anonymous(anonymous: List[AbiEventSpec], log: RawLog) -> Optional[DecodedEvent]:
    for spec in anonymous:
        try:
            return decode_log(spec, log)
        except (MalformedLogError, WrongEventError):
            continue
    return None
