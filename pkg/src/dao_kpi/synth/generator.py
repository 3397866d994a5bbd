"""Generate encoded token and governance logs for a synthetic DAO, with the values they must yield."""
import logging
from collections import Counter
from decimal import Decimal
from typing import Any, Dict, List, Tuple

from eth_utils import keccak

from dao_kpi.abi_codec.decode import encode_log
from dao_kpi.abi_codec.governance import Support
from dao_kpi.abi_codec.resources import load_abi, load_mapping
from dao_kpi.chain_access.data_utils import ZERO_ADDRESS
from dao_kpi.errors import SpecError
from dao_kpi.harmonize.data_utils import SECONDS_PER_DAY
from dao_kpi.synth.data_utils import GENESIS_TIMESTAMP, GroundTruth, SynthFixtures, SynthSpec, round_half_up
from dao_kpi.synth.expected import expected_kpis
from dao_kpi.synth.prng import SplitMix64


TOKEN_SUPPLY = 100_000_000 * 10 ** 18
MINTS_PER_BLOCK = 50
TRANSFER_GAP_BLOCKS = (1, 20)
PROPOSAL_GAP_BLOCKS = (1, 7_200)
EXTRA_VOTERS_MAX = 5
BURN_EVERY = 10 # every tenth transfer burns
MAX_TRANSFER_FRACTION = 0.05
TIMELOCK_DELAY_SECONDS = 2 * SECONDS_PER_DAY
SUPPORT_ODDS = ((0.6, Support.FOR), (0.9, Support.AGAINST), (1.0, Support.ABSTAIN))


def synth_address(dao_id: str, role: str, index: int = 0) -> str:
    return '0x' + keccak(text=f'{dao_id}/{role}/{index}')[12:].hex()


def _tx_hash(dao_id: str, block: int, seq: int) -> str:
    return '0x' + keccak(text=f'{dao_id}/tx/{block}/{seq}').hex()


def _default(type_str: str) -> Any:
    if type_str.endswith('[]'):
        return []
    if type_str == 'address':
        return ZERO_ADDRESS
    if type_str == 'bool':
        return False
    if type_str == 'string':
        return ''
    if type_str == 'bytes':
        return b''
    if type_str.startswith('bytes'):
        return b'\x00' * int(type_str[5:])
    return 0


class _LogWriter:
    """ Collects events by block, then lays them out with per-block log indexes. """

    def __init__(self, spec: SynthSpec, governance: str, token: str):
        self.dao_id = spec.dao_id
        self.governance = governance
        self.token = token
        self.gov_abi = {s.name: s for s in load_abi(spec.framework)}
        self.erc20 = {s.name: s for s in load_abi('erc20')}
        self.mapping = load_mapping(spec.framework)
        self.support_keys = {}
        for key, support in sorted(self.mapping.support_values.items()):
            self.support_keys.setdefault(support, key)
        self.pending: List[Tuple[int, int, Any, list, str]] = []

    @property
    def can_abstain(self) -> bool:
        return Support.ABSTAIN in self.support_keys

    def support_value(self, support: Support, type_str: str) -> Any:
        key = self.support_keys[support]
        return key == 'true' if type_str == 'bool' else int(key)

    def transfer(self, block: int, sender: str, recipient: str, amount: int) -> None:
        self.pending.append((block, len(self.pending), self.erc20['Transfer'], [sender, recipient, amount], self.token))

    def governance_event(self, block: int, event_name: str, roles: Dict[str, Any], extra: Dict[str, Any] = None):
        spec = self.gov_abi[event_name]
        by_param = dict(extra or {})
        for role, param in self.mapping.events[event_name].params.items():
            if role in roles:
                by_param[param] = roles[role]
        if 'support' in roles:
            param = self.mapping.events[event_name].params['support']
            type_str = next(p.type for p in spec.inputs if p.name == param)
            by_param[param] = self.support_value(roles['support'], type_str)
        values = [by_param.get(p.name, _default(p.type)) for p in spec.inputs]
        self.pending.append((block, len(self.pending), spec, values, self.governance))

    def encode(self):
        logs = []
        index_in_block = Counter()
        for block, seq, spec, values, address in sorted(self.pending, key=lambda p: (p[0], p[1])):
            log_index = index_in_block[block]
            index_in_block[block] += 1
            logs.append(encode_log(spec, values, address, block, _tx_hash(self.dao_id, block, seq), log_index))
        return logs


def _allocate(spec: SynthSpec, circulating: int, rng: SplitMix64) -> List[int]:
    """ Initial member balances, largest first, summing to `circulating`. """
    n = spec.member_count
    if n == 0:
        return []
    if spec.holder_distribution == 'single_whale':
        whale = int(Decimal(circulating) * Decimal(str(spec.holder_param)))
        if n == 1:
            return [circulating]
        share, remainder = divmod(circulating - whale, n - 1)
        return [whale, share + remainder] + [share] * (n - 2)

    if spec.holder_distribution == 'pareto':
        weights = sorted(((1.0 - rng.random()) ** (-1.0 / spec.holder_param) for _ in range(n)), reverse=True)
    else:
        weights = [1.0] * n
    total_weight = sum(weights)
    amounts = [max(1, int(circulating * (w / total_weight))) for w in weights]
    amounts[0] += circulating - sum(amounts)
    if amounts[0] < 1:
        raise SpecError(f'{spec.dao_id}: supply too small for {n} members')
    return amounts


def _tally(votes: List[List], weights: Dict[str, int]) -> Tuple[int, int]:
    votes_for = sum(weights[v] for v, s in votes if s == Support.FOR)
    votes_against = sum(weights[v] for v, s in votes if s == Support.AGAINST)
    return votes_for, votes_against


def _force_outcome(votes: List[List], weights: Dict[str, int], approved: bool) -> None:
    """ Flip the heaviest dissenting votes until `for` beats `against` (approved) or stops doing so. """
    while True:
        votes_for, votes_against = _tally(votes, weights)
        if approved and votes_for > votes_against:
            return
        if not approved and votes_for <= votes_against:
            return
        if approved:
            candidates = [v for v in votes if v[1] != Support.FOR]
            target = Support.FOR
        else:
            candidates = [v for v in votes if v[1] == Support.FOR]
            target = Support.AGAINST
        heaviest = max(candidates, key=lambda v: (weights[v[0]], v[0]))
        heaviest[1] = target


def generate(spec: SynthSpec) -> Tuple[SynthFixtures, GroundTruth]:
    """
    Build one DAO's chain history.

    Blocks hold, in order: mints to treasury and members, member-to-member transfers
    (every tenth one a burn), then proposals with their votes and, for automated DAOs,
    queue and execution of the approved ones. Every vote window closes before the
    last emitted block. The ground truth is counted from what was emitted.
    """
    rng = SplitMix64(spec.seed)
    holder_rng, transfer_rng, gov_rng = rng.fork('holders'), rng.fork('transfers'), rng.fork('governance')

    governance, token, treasury = (synth_address(spec.dao_id, role) for role in ('governance', 'token', 'treasury'))
    members = [synth_address(spec.dao_id, 'member', i) for i in range(spec.member_count)]
    writer = _LogWriter(spec, governance, token)

    # mints
    treasury_mint = int(Decimal(TOKEN_SUPPLY) * Decimal(str(spec.treasury_token_share)))
    if spec.member_count == 0:
        treasury_mint = TOKEN_SUPPLY
    balances = Counter()
    supply_changes = []
    recipients = [(treasury, treasury_mint)] + list(zip(members, _allocate(spec, TOKEN_SUPPLY - treasury_mint,
                                                                            holder_rng)))
    block = 1
    for i, (address, amount) in enumerate(recipients):
        block = 1 + i // MINTS_PER_BLOCK
        if amount > 0:
            writer.transfer(block, ZERO_ADDRESS, address, amount)
            balances[address] += amount
            supply_changes.append((block, amount))

    # transfers between members other than the largest holder
    movers = members[1:]
    if len(movers) >= 2:
        for k in range(spec.transfer_count):
            block += transfer_rng.randint(*TRANSFER_GAP_BLOCKS)
            sender = transfer_rng.choice(movers)
            if balances[sender] < 2:
                continue
            amount = min(balances[sender] - 1,
                         1 + int(balances[sender] * MAX_TRANSFER_FRACTION * transfer_rng.random()))
            if k % BURN_EVERY == BURN_EVERY - 1:
                recipient = ZERO_ADDRESS
                supply_changes.append((block, -amount))
            else:
                recipient = transfer_rng.choice([m for m in movers if m != sender])
                balances[recipient] += amount
            balances[sender] -= amount
            writer.transfer(block, sender, recipient, amount)

    # governance
    active = gov_rng.sample(members, spec.active_target)
    low_days, high_days = spec.duration_days_range
    approved_ids = set(gov_rng.sample(range(spec.proposal_count), spec.approved_target))
    assigned = {p: set() for p in range(spec.proposal_count)}
    for voter in active:
        assigned[gov_rng.below(spec.proposal_count)].add(voter)

    total_duration = 0
    last_block = block
    for p in range(spec.proposal_count):
        block += gov_rng.randint(*PROPOSAL_GAP_BLOCKS)
        proposer = gov_rng.choice(active)
        duration_blocks = max(1, round_half_up(gov_rng.uniform(low_days, high_days) * SECONDS_PER_DAY
                                               / spec.block_time_seconds))
        start, end = block + 1, block + 1 + duration_blocks
        total_duration += duration_blocks * spec.block_time_seconds
        if spec.framework == 'oz_governor':
            proposal_id = int.from_bytes(keccak(text=f'{spec.dao_id}/proposal/{p}'), 'big')
        else:
            proposal_id = p + 1

        writer.governance_event(block, 'ProposalCreated', {
            'proposal_id': proposal_id, 'proposer': proposer, 'vote_start': start, 'vote_end': end,
            'description': f'Proposal #{p + 1}',
        }, extra={'targets': [token], 'values': [0], 'signatures': [''], 'calldatas': [b'']})

        voters = assigned[p] | set(gov_rng.sample(active, gov_rng.randint(0, min(len(active), EXTRA_VOTERS_MAX))))
        if p in approved_ids and not voters:
            voters.add(proposer)
        votes = []
        for voter in sorted(voters):
            draw = gov_rng.random()
            support = next(s for bound, s in SUPPORT_ODDS if draw < bound)
            if support == Support.ABSTAIN and not writer.can_abstain:
                support = Support.AGAINST
            votes.append([voter, support])
        _force_outcome(votes, balances, p in approved_ids)
        for voter, support in votes:
            writer.governance_event(gov_rng.randint(start, end), 'VoteCast', {
                'voter': voter, 'proposal_id': proposal_id, 'support': support, 'weight': balances[voter]})

        last_block = max(last_block, end)
        if spec.automated and p in approved_ids:
            eta = GENESIS_TIMESTAMP + (end + 1) * spec.block_time_seconds + TIMELOCK_DELAY_SECONDS
            writer.governance_event(end + 1, 'ProposalQueued', {'proposal_id': proposal_id, 'eta': eta})
            writer.governance_event(end + 2, 'ProposalExecuted', {'proposal_id': proposal_id})
            last_block = max(last_block, end + 2)

    logs = writer.encode()
    fixtures = SynthFixtures(
        dao_id=spec.dao_id, chain_id=spec.chain_id, framework=spec.framework, governance_address=governance,
        token_address=token, treasury_address=treasury, logs=logs, supply_changes=supply_changes,
        last_block=max([last_block] + [log.block_number for log in logs]),
        block_time_seconds=spec.block_time_seconds,
    )
    truth = _ground_truth(spec, balances, treasury, active, len(approved_ids), total_duration)
    logging.debug(f'{spec.dao_id}: {len(logs)} logs up to block {fixtures.last_block}')
    return fixtures, truth


def _ground_truth(spec: SynthSpec, balances: Counter, treasury: str, active: List[str], approved: int,
                  total_duration: int) -> GroundTruth:
    total_supply = sum(balances.values())
    circulating = total_supply - balances[treasury]
    holdings = [amount for address, amount in balances.items() if address != treasury and amount > 0]
    largest = max(holdings, default=0)
    proposals = spec.proposal_count
    levels, scores, composite = expected_kpis(
        active=len(active), members=len(holdings), treasury_usd=spec.treasury_usd, circulating=circulating,
        total_supply=total_supply, approved=approved, proposals=proposals, total_duration_seconds=total_duration,
        largest=largest, automated=spec.automated)
    return GroundTruth(
        dao_id=spec.dao_id,
        total_members=len(holdings),
        active_members=len(active),
        participation_rate=len(active) / len(holdings) if holdings else None,
        total_proposals=proposals,
        approved=approved,
        approval_rate=approved / proposals if proposals else None,
        total_duration_seconds=total_duration,
        avg_duration_days=total_duration / (proposals * SECONDS_PER_DAY) if proposals else None,
        total_supply=total_supply,
        circulating_supply=circulating,
        circulating_pct=circulating / total_supply if total_supply > 0 else 0.0,
        largest_holder_share=min(1.0, largest / circulating) if circulating > 0 else 0.0,
        treasury_usd=spec.treasury_usd,
        fully_automated=spec.automated,
        voters=sorted(active),
        levels=levels,
        scores=scores,
        composite=composite,
    )
