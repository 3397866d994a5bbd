"""JSON-RPC transports: live HTTP, recorded fixture directory, and a recorder wrapping either."""
import hashlib
import itertools
import json
import logging
import threading
from pathlib import Path
from typing import Any, Dict, List

import requests

from dao_kpi.errors import ProviderError, TransportError


# JSON-RPC error codes providers use for throttling
TRANSIENT_RPC_CODES = {-32005, -32029, 429}
TRANSIENT_HTTP_STATUS = {429, 500, 502, 503, 504}


def request_key(method: str, params: List[Any]) -> str:
    """ Stable hash naming the fixture file of one request. """
    canonical = json.dumps({'method': method, 'params': params}, sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()


def is_transient(exc: Exception) -> bool:
    if isinstance(exc, requests.HTTPError):
        return exc.response is not None and exc.response.status_code in TRANSIENT_HTTP_STATUS
    if isinstance(exc, requests.RequestException):
        return True
    if isinstance(exc, ProviderError):
        return exc.code in TRANSIENT_RPC_CODES
    return False


def _unwrap(body: Dict[str, Any]) -> Any:
    if body.get('error') is not None:
        error = body['error']
        raise ProviderError(error.get('message', 'unknown provider error'), error.get('code'))
    return body.get('result')


class Provider:
    """ Anything that answers `request(method, params)` with a JSON-RPC result. """

    def request(self, method: str, params: List[Any]) -> Any:
        raise NotImplementedError


class HttpProvider(Provider):

    def __init__(self, rpc_url: str, timeout: float = 30.0, session: requests.Session = None):
        self.rpc_url = rpc_url
        self.timeout = timeout
        self.session = session or requests.Session()
        self._ids = itertools.count(1)

    def request(self, method: str, params: List[Any]) -> Any:
        payload = {'jsonrpc': '2.0', 'id': next(self._ids), 'method': method, 'params': params}
        logging.debug(f'RPC {method} {params}')
        response = self.session.post(self.rpc_url, json=payload, timeout=self.timeout)
        response.raise_for_status()
        return _unwrap(response.json())


class FixtureProvider(Provider):
    """ Replays responses recorded as one `<request hash>.json` file per request. """

    def __init__(self, fixture_dir: Path):
        self.fixture_dir = Path(fixture_dir)
        if not self.fixture_dir.is_dir():
            raise TransportError(f'Fixture directory does not exist: {self.fixture_dir}')

    def request(self, method: str, params: List[Any]) -> Any:
        path = self.fixture_dir / f'{request_key(method, params)}.json'
        if not path.exists():
            raise TransportError(f'No recorded response for {method} {json.dumps(params)} in {self.fixture_dir}')
        with open(path, 'r') as f:
            body = json.load(f)
        return _unwrap(body)


class RecordingProvider(Provider):
    """ Forwards to another provider and writes every exchange into the fixture layout. """

    def __init__(self, inner: Provider, record_dir: Path):
        self.inner = inner
        self.record_dir = Path(record_dir)
        self.record_dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def _write(self, method: str, params: List[Any], body: Dict[str, Any]) -> None:
        path = self.record_dir / f'{request_key(method, params)}.json'
        with self._lock:
            with open(path, 'w') as f:
                json.dump(body, f, sort_keys=True)

    def request(self, method: str, params: List[Any]) -> Any:
        try:
            result = self.inner.request(method, params)
        except ProviderError as e:
            self._write(method, params, {'jsonrpc': '2.0', 'id': 1, 'error': {'code': e.code, 'message': str(e)}})
            raise
        self._write(method, params, {'jsonrpc': '2.0', 'id': 1, 'result': result})
        return result
