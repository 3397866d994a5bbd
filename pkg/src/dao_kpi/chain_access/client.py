"""Read-only access to an EVM chain: logs, block timestamps, token metadata."""
import logging
import re
import threading
from typing import Any, Dict, Iterable, List, Optional, Union

import retrying
from eth_abi import decode
from eth_abi.exceptions import DecodingError

from dao_kpi.abi_codec.abi import function_selector
from dao_kpi.chain_access.data_utils import (ChainEndpoint, ContractRef, RawLog, TokenMetadata, from_hex_quantity,
                                             hex_to_bytes, sort_logs, to_hex_quantity)
from dao_kpi.chain_access.providers import Provider, is_transient
from dao_kpi.chain_access.rate_limit import TokenBucket
from dao_kpi.errors import ArgumentError, ProviderError, TransportError


DEFAULT_DECIMALS = 18
MAX_DECIMALS = 77
# Messages providers use when an eth_getLogs answer would exceed their cap
TRUNCATION_RE = re.compile(r'(more than \d+ results|too many|limit exceeded|response size|block range)', re.IGNORECASE)
BlockTag = Union[int, str]


class ChainClient:
    """
    Client for one endpoint. One instance is shared by all threads fetching from that
    chain, so the rate limiter and the timestamp cache are shared too.

    Parameters
    ----------
    endpoint: ChainEndpoint
        Network description (block span cap, rate limit, provider result cap).
    provider: Provider
        Transport answering JSON-RPC requests (HTTP, fixture replay, in-memory node).
    retry_attempts: int
        Attempts per request before giving up on transient failures.
    backoff_start_ms: int
        First backoff delay; doubles on every retry.
    jitter_ms: int
        Upper bound of the random jitter added to each delay.
    """

    def __init__(self, endpoint: ChainEndpoint, provider: Provider, retry_attempts: int = 5,
                 backoff_start_ms: int = 500, jitter_ms: int = 250, limiter: TokenBucket = None):
        self.endpoint = endpoint
        self.provider = provider
        self.limiter = limiter or TokenBucket(endpoint.rate_limit)
        self.retry_attempts = retry_attempts
        self._retrying = retrying.Retrying(
            stop_max_attempt_number=retry_attempts,
            # retrying waits multiplier * 2^attempt, so half the first delay
            wait_exponential_multiplier=backoff_start_ms / 2,
            wait_exponential_max=60_000,
            wait_jitter_max=jitter_ms,
            retry_on_exception=is_transient,
        )
        self._timestamps: Dict[int, int] = {}
        self._cache_lock = threading.Lock()

    def _attempt(self, method: str, params: List[Any]) -> Any:
        self.limiter.acquire()
        return self.provider.request(method, params)

    def call(self, method: str, params: List[Any]) -> Any:
        try:
            return self._retrying.call(self._attempt, method, params)
        except ProviderError as e:
            if is_transient(e):
                raise TransportError(f'{method} failed after {self.retry_attempts} attempts: {e}') from e
            raise
        except TransportError:
            raise
        except Exception as e:
            raise TransportError(f'{method} failed after {self.retry_attempts} attempts: {e}') from e

    def fetch_chain_head(self) -> int:
        return from_hex_quantity(self.call('eth_blockNumber', []))

    def fetch_logs(self, contract: ContractRef, from_block: int, to_block: int,
                   topic0: Optional[str] = None) -> List[RawLog]:
        """
        Fetch every log emitted by a contract in an inclusive block range.

        The range is walked in chunks of `max_block_span`; a chunk whose answer hits the
        provider's result cap is split in half until it fits.

        Returns
        -------
        logs: list[RawLog]
            Unique by (block_number, tx_hash, log_index), sorted by (block_number, log_index).
        """
        if from_block > to_block:
            raise ArgumentError(f'Inverted block range: from_block {from_block} > to_block {to_block}')
        if from_block < 0:
            raise ArgumentError(f'from_block must be non-negative, got {from_block}')

        span = self.endpoint.max_block_span
        unique: Dict[tuple, RawLog] = {}
        for start in range(from_block, to_block + 1, span):
            end = min(start + span - 1, to_block)
            for log in self._fetch_range(contract.address, start, end, topic0):
                unique[log.key] = log
        logging.debug(f'{len(unique)} logs for {contract.address} in [{from_block}, {to_block}]')
        return sort_logs(list(unique.values()))

    def _fetch_range(self, address: str, start: int, end: int, topic0: Optional[str]) -> List[RawLog]:
        log_filter = {'address': address, 'fromBlock': to_hex_quantity(start), 'toBlock': to_hex_quantity(end)}
        if topic0 is not None:
            log_filter['topics'] = [topic0.lower()]
        cap = self.endpoint.max_results_per_query
        try:
            result = self.call('eth_getLogs', [log_filter])
        except ProviderError as e:
            if not TRUNCATION_RE.search(str(e)):
                raise TransportError(f'eth_getLogs [{start}, {end}] for {address} failed: {e}') from e
            result = None

        # a full page over several blocks may hide more logs; a single block at the cap is complete
        if result is not None and (len(result) < cap or (start == end and len(result) == cap)):
            return [RawLog.from_rpc(entry) for entry in result]
        if start == end:
            raise TransportError(f'eth_getLogs for {address} still truncated at single block {start}')
        mid = (start + end) // 2
        logging.info(f'Provider cap reached for [{start}, {end}], splitting at {mid}')
        return self._fetch_range(address, start, mid, topic0) + self._fetch_range(address, mid + 1, end, topic0)

    def fetch_block_timestamps(self, blocks: Iterable[int]) -> Dict[int, int]:
        """ Map block number to UTC seconds. Every block is requested at most once per client. """
        wanted = sorted(set(blocks))
        with self._cache_lock:
            missing = [b for b in wanted if b not in self._timestamps]
        for block in missing:
            result = self.call('eth_getBlockByNumber', [to_hex_quantity(block), False])
            if result is None:
                raise TransportError(f'Unknown block {block} on chain {self.endpoint.chain_id}')
            with self._cache_lock:
                self._timestamps[block] = from_hex_quantity(result['timestamp'])
        with self._cache_lock:
            return {b: self._timestamps[b] for b in wanted}

    def _eth_call(self, address: str, signature: str, block: BlockTag) -> bytes:
        tag = to_hex_quantity(block) if isinstance(block, int) else block
        raw = self.call('eth_call', [{'to': address, 'data': '0x' + function_selector(signature).hex()}, tag])
        return hex_to_bytes(raw or '0x')

    def fetch_token_metadata(self, token: ContractRef, block: BlockTag = 'latest') -> TokenMetadata:
        """
        Read decimals, totalSupply and symbol of a governance token.

        A token whose `decimals()` reverts or returns nothing is treated as 18-decimal.
        """
        if token.kind != 'token':
            raise ArgumentError(f'{token.address} is configured as {token.kind}, not token')
        tag = to_hex_quantity(block) if isinstance(block, int) else block
        code = self.call('eth_getCode', [token.address, tag])
        if code in (None, '0x', '0x0', ''):
            raise TransportError(f'No contract deployed at {token.address} on chain {token.chain_id}')

        decimals, defaulted = self._read_decimals(token.address, block)

        try:
            raw_supply = self._eth_call(token.address, 'totalSupply()', block)
            total_supply = decode(['uint256'], raw_supply)[0]
        except (ProviderError, DecodingError) as e:
            raise TransportError(f'{token.address} does not answer totalSupply(); not a token contract ({e})') from e

        return TokenMetadata(decimals=decimals, total_supply=total_supply,
                             symbol=self._read_symbol(token.address, block), decimals_defaulted=defaulted)

    def _read_decimals(self, address: str, block: BlockTag):
        try:
            raw = self._eth_call(address, 'decimals()', block)
            decimals = decode(['uint256'], raw)[0]
        except (ProviderError, DecodingError) as e:
            logging.warning(f'decimals() unavailable on {address} ({e}); assuming {DEFAULT_DECIMALS}')
            return DEFAULT_DECIMALS, True
        if decimals > MAX_DECIMALS:
            logging.warning(f'decimals() on {address} returned {decimals}; assuming {DEFAULT_DECIMALS}')
            return DEFAULT_DECIMALS, True
        return decimals, False

    def _read_symbol(self, address: str, block: BlockTag) -> str:
        try:
            raw = self._eth_call(address, 'symbol()', block)
        except ProviderError as e:
            logging.warning(f'symbol() unavailable on {address} ({e})')
            return ''
        try:
            return decode(['string'], raw)[0]
        except (DecodingError, UnicodeDecodeError):
            # legacy tokens return bytes32
            if len(raw) == 32:
                return raw.rstrip(b'\x00').decode('ascii', errors='replace')
            logging.warning(f'Undecodable symbol() answer on {address}')
            return ''
