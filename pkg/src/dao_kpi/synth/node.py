"""In-memory JSON-RPC node over generated chain state."""
import bisect
import logging
from collections import Counter
from typing import Any, Dict, List

from eth_abi import encode

from dao_kpi.abi_codec.abi import function_selector
from dao_kpi.chain_access.data_utils import from_hex_quantity, normalize_address, to_hex_quantity
from dao_kpi.chain_access.providers import Provider
from dao_kpi.errors import ProviderError
from dao_kpi.synth.data_utils import GENESIS_TIMESTAMP, SynthFixtures


METHOD_NOT_FOUND = -32601
INVALID_PARAMS = -32602
EXECUTION_REVERTED = 3
DUMMY_CODE = '0x6080604052'


class _Token:

    def __init__(self, symbol: str, decimals: int):
        self.symbol = symbol
        self.decimals = decimals
        self.blocks: List[int] = []
        self.supply: List[int] = [] # running total after each change

    def add(self, block: int, delta: int) -> None:
        self.blocks.append(block)
        self.supply.append((self.supply[-1] if self.supply else 0) + delta)

    def total_supply(self, block: int) -> int:
        i = bisect.bisect_right(self.blocks, block)
        return self.supply[i - 1] if i else 0


class InMemoryNode(Provider):
    """
    Answers the handful of methods chain access uses: eth_chainId, eth_blockNumber,
    eth_getLogs, eth_getBlockByNumber, eth_call (decimals/totalSupply/symbol) and
    eth_getCode. Block timestamps are genesis + block * block_time.

    eth_getLogs refuses answers above `max_results` the way hosted providers do, so
    range splitting can be exercised. `requests` counts calls per method.
    """

    def __init__(self, chain_id: int, head: int, block_time_seconds: int,
                 genesis_timestamp: int = GENESIS_TIMESTAMP, max_results: int = 10_000):
        self.chain_id = chain_id
        self.head = head
        self.block_time_seconds = block_time_seconds
        self.genesis_timestamp = genesis_timestamp
        self.max_results = max_results
        self.logs = []
        self.tokens: Dict[str, _Token] = {}
        self.contracts = set()
        self.requests = Counter()

    @classmethod
    def from_fixtures(cls, fixtures: List[SynthFixtures], head: int, max_results: int = 10_000) -> 'InMemoryNode':
        first = fixtures[0]
        node = cls(first.chain_id, head, first.block_time_seconds, first.genesis_timestamp, max_results)
        for fx in fixtures:
            node.add_dao(fx)
        return node

    def add_dao(self, fixtures: SynthFixtures) -> None:
        if fixtures.chain_id != self.chain_id or fixtures.block_time_seconds != self.block_time_seconds:
            raise ValueError(f'{fixtures.dao_id} was generated for another chain or block time')
        token = _Token(fixtures.token_symbol, fixtures.token_decimals)
        for block, delta in sorted(fixtures.supply_changes):
            token.add(block, delta)
        self.tokens[fixtures.token_address] = token
        self.contracts.update({fixtures.governance_address, fixtures.token_address})
        self.logs.extend(fixtures.logs)
        self.logs.sort(key=lambda log: log.sort_key)

    def timestamp(self, block: int) -> int:
        return self.genesis_timestamp + block * self.block_time_seconds

    def _block(self, tag: Any) -> int:
        if tag in ('latest', 'safe', 'finalized', None):
            return self.head
        if tag == 'earliest':
            return 0
        return from_hex_quantity(tag)

    def request(self, method: str, params: List[Any]) -> Any:
        self.requests[method] += 1
        handler = getattr(self, f'_{method}', None)
        if handler is None:
            raise ProviderError(f'the method {method} does not exist/is not available', METHOD_NOT_FOUND)
        return handler(*params)

    def _eth_chainId(self) -> str:
        return to_hex_quantity(self.chain_id)

    def _eth_blockNumber(self) -> str:
        return to_hex_quantity(self.head)

    def _eth_getBlockByNumber(self, tag: Any, full: bool = False) -> Any:
        block = self._block(tag)
        if block > self.head:
            return None
        return {'number': to_hex_quantity(block), 'timestamp': to_hex_quantity(self.timestamp(block)),
                'transactions': []}

    def _eth_getLogs(self, log_filter: Dict[str, Any]) -> List[Dict[str, Any]]:
        start = self._block(log_filter.get('fromBlock', 'earliest'))
        end = self._block(log_filter.get('toBlock', 'latest'))
        if start > end:
            raise ProviderError('invalid block range', INVALID_PARAMS)
        address = log_filter.get('address')
        address = normalize_address(address) if address else None
        topics = log_filter.get('topics') or []
        topic0 = topics[0].lower() if topics and topics[0] else None

        matches = [log.to_rpc() for log in self.logs
                   if start <= log.block_number <= end
                   and (address is None or log.address == address)
                   and (topic0 is None or (log.topics and log.topics[0] == topic0))]
        if len(matches) > self.max_results:
            logging.debug(f'InMemoryNode: {len(matches)} logs in [{start}, {end}] exceed cap {self.max_results}')
            raise ProviderError(f'query returned more than {self.max_results} results', INVALID_PARAMS)
        return matches

    def _eth_getCode(self, address: str, tag: Any = 'latest') -> str:
        return DUMMY_CODE if normalize_address(address) in self.contracts else '0x'

    def _eth_call(self, call: Dict[str, Any], tag: Any = 'latest') -> str:
        token = self.tokens.get(normalize_address(call['to']))
        if token is None:
            raise ProviderError('execution reverted', EXECUTION_REVERTED)
        selector = call.get('data', '0x')[:10]
        if selector == '0x' + function_selector('decimals()').hex():
            return '0x' + encode(['uint8'], [token.decimals]).hex()
        if selector == '0x' + function_selector('totalSupply()').hex():
            return '0x' + encode(['uint256'], [token.total_supply(self._block(tag))]).hex()
        if selector == '0x' + function_selector('symbol()').hex():
            return '0x' + encode(['string'], [token.symbol]).hex()
        raise ProviderError('execution reverted', EXECUTION_REVERTED)
