"""Normalize decoded events into framework-independent governance and token records."""
import enum
import logging
from dataclasses import dataclass
from typing import ClassVar, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from dao_kpi.abi_codec.abi import AbiEventSpec
from dao_kpi.abi_codec.decode import DecodedEvent
from dao_kpi.chain_access.data_utils import ZERO_ADDRESS
from dao_kpi.errors import ConfigError, MalformedLogError


class Support(str, enum.Enum):
    AGAINST = 'against'
    FOR = 'for'
    ABSTAIN = 'abstain'


EventKind = Literal['proposal_created', 'vote_cast', 'proposal_executed', 'proposal_canceled', 'proposal_queued']

# roles each kind must bind to an event parameter; description is optional
REQUIRED_ROLES = {
    'proposal_created': ('proposal_id', 'proposer', 'vote_start', 'vote_end'),
    'vote_cast': ('voter', 'proposal_id', 'support', 'weight'),
    'proposal_executed': ('proposal_id',),
    'proposal_canceled': ('proposal_id',),
    'proposal_queued': ('proposal_id', 'eta'),
}
OPTIONAL_ROLES = {'proposal_created': ('description',)}


class EventRole(BaseModel):
    model_config = ConfigDict(extra='forbid', frozen=True)

    kind: EventKind
    params: Dict[str, str] # role -> event parameter name


class EventMapping(BaseModel):
    """ Per-framework table telling which events matter and which parameter plays which role. """
    model_config = ConfigDict(extra='forbid', frozen=True)

    framework: str
    vote_window_unit: Literal['block', 'timestamp'] = 'block'
    support_values: Dict[str, Support] = Field(default_factory=dict)
    quorum_includes_abstain: bool = False
    events: Dict[str, EventRole]

    @classmethod
    def from_json(cls, text: str) -> 'EventMapping':
        try:
            mapping = cls.model_validate_json(text)
        except ValidationError as e:
            raise ConfigError(f'Invalid event mapping: {e}')
        mapping.check_roles()
        return mapping

    def check_roles(self) -> None:
        for event_name, role in self.events.items():
            allowed = REQUIRED_ROLES[role.kind] + OPTIONAL_ROLES.get(role.kind, ())
            missing = [r for r in REQUIRED_ROLES[role.kind] if r not in role.params]
            unknown = [r for r in role.params if r not in allowed]
            if missing:
                raise ConfigError(f'Mapping {self.framework}: {event_name} lacks roles {missing}')
            if unknown:
                raise ConfigError(f'Mapping {self.framework}: {event_name} has unknown roles {unknown}')


def validate_mapping(mapping: EventMapping, specs: List[AbiEventSpec]) -> None:
    """ Fail at load time when a mapping names an event or parameter the ABI does not have. """
    by_name = {spec.name: spec for spec in specs}
    for event_name, role in mapping.events.items():
        spec = by_name.get(event_name)
        if spec is None:
            raise ConfigError(f'Mapping {mapping.framework} references event {event_name} absent from the ABI')
        names = {p.name for p in spec.inputs}
        for role_name, param_name in role.params.items():
            if param_name not in names:
                raise ConfigError(f'Mapping {mapping.framework}: {event_name}.{param_name} (role {role_name}) '
                                  f'is not a parameter of {spec.signature}')


@dataclass(frozen=True)
class ProposalCreated:
    kind: ClassVar[str] = 'proposal_created'
    proposal_id: int
    proposer: str
    vote_start: int
    vote_end: int
    description: str
    window_unit: str
    block_number: int
    log_index: int
    timestamp_utc: Optional[int] = None


@dataclass(frozen=True)
class VoteCast:
    kind: ClassVar[str] = 'vote_cast'
    voter: str
    proposal_id: int
    support: Support
    weight: int
    block_number: int
    log_index: int
    timestamp_utc: Optional[int] = None


@dataclass(frozen=True)
class ProposalExecuted:
    kind: ClassVar[str] = 'proposal_executed'
    proposal_id: int
    block_number: int
    log_index: int
    timestamp_utc: Optional[int] = None


@dataclass(frozen=True)
class ProposalCanceled:
    kind: ClassVar[str] = 'proposal_canceled'
    proposal_id: int
    block_number: int
    log_index: int
    timestamp_utc: Optional[int] = None


@dataclass(frozen=True)
class ProposalQueued:
    kind: ClassVar[str] = 'proposal_queued'
    proposal_id: int
    eta: int
    block_number: int
    log_index: int
    timestamp_utc: Optional[int] = None


GovernanceEvent = Union[ProposalCreated, VoteCast, ProposalExecuted, ProposalCanceled, ProposalQueued]


@dataclass(frozen=True)
class TokenTransfer:
    sender: str
    recipient: str
    amount: int
    block_number: int
    log_index: int

    @property
    def is_mint(self) -> bool:
        return self.sender == ZERO_ADDRESS

    @property
    def is_burn(self) -> bool:
        return self.recipient == ZERO_ADDRESS


def _support(raw, mapping: EventMapping, event: DecodedEvent) -> Support:
    key = str(raw).lower()
    if key not in mapping.support_values:
        raise MalformedLogError(f'{event.event_name} at {event.key}: support value {raw!r} '
                                f'not in {mapping.framework} encoding')
    return mapping.support_values[key]


def map_to_governance(decoded: DecodedEvent, mapping: EventMapping) -> Optional[GovernanceEvent]:
    """
    Translate a decoded event with the DAO's mapping table.

    Returns None for events the mapping does not list (token transfers, admin events).
    Raises MalformedLogError when the values break a record invariant.
    """
    role = mapping.events.get(decoded.event_name)
    if role is None:
        return None
    value = {r: decoded.get(p) for r, p in role.params.items()}
    common = dict(block_number=decoded.block_number, log_index=decoded.log_index,
                  timestamp_utc=decoded.timestamp_utc)
    proposal_id = int(value['proposal_id'])
    if proposal_id < 0:
        raise MalformedLogError(f'{decoded.event_name} at {decoded.key}: negative proposal id')

    if role.kind == 'proposal_created':
        vote_start, vote_end = int(value['vote_start']), int(value['vote_end'])
        if vote_start > vote_end:
            raise MalformedLogError(f'Proposal {proposal_id}: vote_start {vote_start} > vote_end {vote_end}')
        description = value.get('description', '')
        if isinstance(description, bytes):
            description = description.hex()
        return ProposalCreated(proposal_id=proposal_id, proposer=value['proposer'].lower(), vote_start=vote_start,
                               vote_end=vote_end, description=description,
                               window_unit=mapping.vote_window_unit, **common)
    if role.kind == 'vote_cast':
        return VoteCast(voter=value['voter'].lower(), proposal_id=proposal_id,
                        support=_support(value['support'], mapping, decoded), weight=int(value['weight']), **common)
    if role.kind == 'proposal_executed':
        return ProposalExecuted(proposal_id=proposal_id, **common)
    if role.kind == 'proposal_canceled':
        return ProposalCanceled(proposal_id=proposal_id, **common)
    return ProposalQueued(proposal_id=proposal_id, eta=int(value['eta']), **common)


def map_all(events: List[DecodedEvent], mapping: EventMapping):
    """ Map a batch; events breaking an invariant are dropped, and their count is returned with the result. """
    mapped, invalid = [], 0
    for event in events:
        try:
            gov = map_to_governance(event, mapping)
        except MalformedLogError as e:
            logging.warning(f'Dropping governance event: {e}')
            invalid += 1
            continue
        if gov is not None:
            mapped.append(gov)
    return mapped, invalid


def to_token_transfer(decoded: DecodedEvent) -> Optional[TokenTransfer]:
    """ ERC-20 Transfer by position (from, to, amount) since parameter names vary between tokens. """
    if decoded.event_name != 'Transfer' or len(decoded.params) != 3:
        return None
    sender, recipient, amount = decoded.params
    if sender.type != 'address' or recipient.type != 'address' or not amount.type.startswith('uint'):
        return None
    return TokenTransfer(sender=sender.value, recipient=recipient.value, amount=int(amount.value),
                         block_number=decoded.block_number, log_index=decoded.log_index)
