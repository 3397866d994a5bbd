"""ABI documents: event specs, canonical signatures, topic-0 and function selectors."""
import json
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Dict, List, Optional, Tuple

from eth_abi.exceptions import ABITypeError, ParseError
from eth_abi.grammar import BasicType, normalize, parse as parse_type
from eth_utils import keccak

from dao_kpi.errors import AbiParseError, UnsupportedTypeError


SUPPORTED_BASES = {'address', 'bool', 'uint', 'int', 'bytes', 'string'}
MAX_INDEXED = 3
MAX_INDEXED_ANONYMOUS = 4


@dataclass(frozen=True)
class AbiParam:
    name: str
    type: str # canonical form, e.g. uint256 rather than uint
    indexed: bool = False

    @property
    def hashed_when_indexed(self) -> bool:
        """ Dynamic values and arrays only leave their keccak hash in a topic. """
        parsed = parse_type(self.type)
        return parsed.is_dynamic or parsed.arrlist is not None


@dataclass(frozen=True)
class AbiEventSpec:
    name: str
    inputs: Tuple[AbiParam, ...]
    anonymous: bool = False

    @property
    def signature(self) -> str:
        return f'{self.name}({",".join(p.type for p in self.inputs)})'

    @property
    def indexed_inputs(self) -> Tuple[AbiParam, ...]:
        return tuple(p for p in self.inputs if p.indexed)

    @property
    def data_inputs(self) -> Tuple[AbiParam, ...]:
        return tuple(p for p in self.inputs if not p.indexed)

    @property
    def topic(self) -> str:
        return event_topic(self)


def canonical_type(type_str: str, event_name: str = None) -> str:
    """
    Validate a parameter type and return its canonical spelling.

    Supported: address, bool, uintN, intN, bytesN, bytes, string, and one array
    dimension (fixed or dynamic) over those. Tuples and nested arrays are not.
    """
    if not isinstance(type_str, str) or type_str.startswith('tuple') or type_str.startswith('('):
        raise UnsupportedTypeError(str(type_str), event_name)
    try:
        parsed = parse_type(normalize(type_str))
        parsed.validate()
    except (ParseError, ABITypeError, ValueError):
        raise UnsupportedTypeError(type_str, event_name)
    if not isinstance(parsed, BasicType) or parsed.base not in SUPPORTED_BASES:
        raise UnsupportedTypeError(type_str, event_name)
    if parsed.arrlist is not None and len(parsed.arrlist) > 1:
        raise UnsupportedTypeError(type_str, event_name)
    return parsed.to_type_str()


def _parse_event(entry: Dict[str, Any], position: int) -> AbiEventSpec:
    name = entry.get('name')
    if not isinstance(name, str) or not name:
        raise AbiParseError('Event entry without a name', position)
    raw_inputs = entry.get('inputs', [])
    if not isinstance(raw_inputs, list):
        raise AbiParseError(f'Event {name}: inputs must be a list', position)

    inputs = []
    for i, raw in enumerate(raw_inputs):
        if not isinstance(raw, dict) or 'type' not in raw:
            raise AbiParseError(f'Event {name}: input {i} has no type', position)
        inputs.append(AbiParam(
            name=raw.get('name') or f'arg{i}',
            type=canonical_type(raw['type'], name),
            indexed=bool(raw.get('indexed', False)),
        ))

    anonymous = bool(entry.get('anonymous', False))
    limit = MAX_INDEXED_ANONYMOUS if anonymous else MAX_INDEXED
    if sum(p.indexed for p in inputs) > limit:
        raise AbiParseError(f'Event {name} declares more than {limit} indexed inputs', position)
    return AbiEventSpec(name=name, inputs=tuple(inputs), anonymous=anonymous)


def parse_abi(abi_text: str, on_unsupported: str = 'raise') -> List[AbiEventSpec]:
    """
    Parse an ABI document and return its event entries.

    Parameters
    ----------
    abi_text: str
        Standard JSON ABI: a list of entries, or an artifact object with an "abi" key.
    on_unsupported: str
        'raise' (default) to fail on unsupported parameter types, 'skip' to leave such
        events out with a warning; their logs are then counted as dropped when decoding.

    Returns
    -------
    specs: list[AbiEventSpec]
        One spec per event entry, in document order. Functions, constructors and
        errors are ignored.
    """
    try:
        document = json.loads(abi_text)
    except json.JSONDecodeError as e:
        raise AbiParseError(f'Malformed ABI document: {e.msg}', e.pos)
    if isinstance(document, dict) and 'abi' in document:
        document = document['abi']
    if not isinstance(document, list):
        raise AbiParseError('ABI document must be a list of entries', 0)

    specs = []
    for position, entry in enumerate(document):
        if not isinstance(entry, dict):
            raise AbiParseError(f'ABI entry {position} is not an object', position)
        if entry.get('type') != 'event':
            continue
        try:
            specs.append(_parse_event(entry, position))
        except UnsupportedTypeError as e:
            if on_unsupported != 'skip':
                raise
            logging.warning(f'Skipping event {entry.get("name")}: {e}')
    return specs


@lru_cache(maxsize=None)
def _keccak_hex(text: str) -> str:
    return '0x' + keccak(text=text).hex()


def event_topic(spec: AbiEventSpec, overrides: Optional[Dict[str, str]] = None) -> str:
    """
    Topic-0 of an event: keccak-256 of its canonical signature.

    `overrides` maps an event name or signature to a precomputed topic and skips hashing.
    """
    if overrides:
        for key in (spec.signature, spec.name):
            if key in overrides:
                return overrides[key].lower()
    return _keccak_hex(spec.signature)


def function_selector(signature: str) -> bytes:
    """ First four bytes of keccak-256 of a function signature such as "decimals()". """
    return keccak(text=signature)[:4]


def specs_by_topic(specs: List[AbiEventSpec], overrides: Optional[Dict[str, str]] = None) -> Dict[str, AbiEventSpec]:
    return {event_topic(spec, overrides): spec for spec in specs if not spec.anonymous}
