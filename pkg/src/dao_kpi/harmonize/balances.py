"""Token-holder balances replayed from Transfer events."""
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

from dao_kpi.abi_codec.governance import TokenTransfer
from dao_kpi.chain_access.data_utils import ZERO_ADDRESS
from dao_kpi.errors import ArgumentError, DataIntegrityError
from dao_kpi.harmonize.data_utils import BURN_ADDRESSES


@dataclass
class BalanceSheet:
    """ Balances after replaying transfers up to and including `cursor` (block_number, log_index). """
    balances: Counter = field(default_factory=Counter)
    minted: int = 0
    burned: int = 0
    cursor: Tuple[int, int] = (-1, -1)

    def copy(self) -> 'BalanceSheet':
        return BalanceSheet(Counter(self.balances), self.minted, self.burned, self.cursor)

    def nonzero(self) -> Dict[str, int]:
        return {address: amount for address, amount in sorted(self.balances.items()) if amount != 0}


def replay_transfers(transfers: Iterable[TokenTransfer], at_block: int,
                     start: Optional[BalanceSheet] = None) -> BalanceSheet:
    """
    Apply transfers in order, up to and including `at_block`.

    Starting from an earlier sheet only applies transfers past its cursor, so
    replaying (0, b'] then (b', b] gives the same sheet as replaying (0, b].

    Raises
    ------
    ArgumentError
        Transfers not sorted by (block_number, log_index).
    DataIntegrityError
        A balance would go negative; names the address and block.
    """
    sheet = start.copy() if start is not None else BalanceSheet()
    previous = (-1, -1)
    for transfer in transfers:
        position = (transfer.block_number, transfer.log_index)
        if position < previous:
            raise ArgumentError(f'Transfers are not sorted: {position} follows {previous}')
        previous = position
        if position <= sheet.cursor:
            continue
        if transfer.block_number > at_block:
            break

        if transfer.sender == ZERO_ADDRESS:
            sheet.minted += transfer.amount
        else:
            remaining = sheet.balances[transfer.sender] - transfer.amount
            if remaining < 0:
                raise DataIntegrityError(f'Balance of {transfer.sender} goes negative ({remaining}) '
                                         f'at block {transfer.block_number}')
            sheet.balances[transfer.sender] = remaining
        if transfer.recipient == ZERO_ADDRESS:
            sheet.burned += transfer.amount
        else:
            sheet.balances[transfer.recipient] += transfer.amount
        sheet.cursor = position
    return sheet


def reconstruct_balances(transfers: List[TokenTransfer], at_block: int) -> Dict[str, int]:
    """ Address to raw-unit balance at `at_block`; zero balances are omitted. """
    return replay_transfers(transfers, at_block).nonzero()


def excluded_addresses(treasury: Iterable[str], locked: Iterable[str]) -> frozenset:
    return frozenset(a.lower() for a in treasury) | frozenset(a.lower() for a in locked) | BURN_ADDRESSES


def circulating_supply(total_supply: int, balances: Dict[str, int], treasury: Iterable[str],
                       locked: Iterable[str]) -> int:
    """ Total supply less what treasury and locked (vesting) addresses hold. """
    held = sum(balances.get(a.lower(), 0) for a in set(treasury) | set(locked))
    return max(0, total_supply - held)


def largest_holder_share(balances: Dict[str, int], circulating: int, excluded: frozenset) -> float:
    """ Biggest single holding outside `excluded`, as a fraction of circulating supply. """
    if circulating <= 0:
        return 0.0
    holdings = [amount for address, amount in balances.items() if address not in excluded and amount > 0]
    if not holdings:
        return 0.0
    return min(1.0, max(holdings) / circulating)


def count_members(balances: Dict[str, int], excluded: frozenset, active: Iterable[str] = ()) -> int:
    """
    Addresses with a nonzero balance, DAO-controlled and burn addresses left out.
    Governance participants without tokens at the snapshot (delegates) count as members too.
    """
    holders = {address for address, amount in balances.items() if amount > 0 and address not in excluded}
    return len(holders | set(active))
