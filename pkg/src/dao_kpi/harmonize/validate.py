import logging
from typing import List, Tuple

from dao_kpi.abi_codec.decode import DecodedEvent
from dao_kpi.harmonize.balances import BalanceSheet
from dao_kpi.harmonize.data_utils import ValidationReport


def dedup_and_validate(events: List[DecodedEvent]) -> Tuple[List[DecodedEvent], ValidationReport]:
    """
    Drop repeated events and check the timeline.

    Parameters
    ----------
    events: list[DecodedEvent]
        Events of one DAO, any order, possibly with repeats.

    Returns
    -------
    clean: list[DecodedEvent]
        One event per (block_number, tx_hash, log_index), sorted by (block_number, log_index).
    report: ValidationReport
        Counts of duplicates, events without a timestamp, and events whose timestamp is
        earlier than one of a lower block.
    """
    report = ValidationReport(events_in=len(events))
    seen = set()
    clean = []
    for event in sorted(events, key=lambda e: (e.block_number, e.log_index, e.tx_hash)):
        if event.key in seen:
            report.duplicates += 1
            continue
        seen.add(event.key)
        clean.append(event)

    latest = None
    latest_block = None
    for event in clean:
        if event.timestamp_utc is None:
            report.missing_timestamps += 1
            continue
        if latest is not None and event.block_number > latest_block and event.timestamp_utc < latest:
            report.non_monotone_timestamps += 1
            continue
        if latest is None or event.timestamp_utc >= latest:
            latest, latest_block = event.timestamp_utc, event.block_number

    if report.duplicates or report.missing_timestamps or report.non_monotone_timestamps:
        logging.warning(f'{report.duplicates} duplicates, {report.missing_timestamps} events without timestamp, '
                        f'{report.non_monotone_timestamps} out-of-order timestamps')
    return clean, report


def check_supply(report: ValidationReport, total_supply: int, sheet: BalanceSheet) -> None:
    """ Compare totalSupply() with what the transfer history minted and burned. """
    difference = total_supply - (sheet.minted - sheet.burned)
    if difference != 0:
        logging.warning(f'totalSupply() differs from minted - burned by {difference}')
        report.supply_mismatch = str(difference)
