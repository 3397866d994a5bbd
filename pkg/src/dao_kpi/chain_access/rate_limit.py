import math
import threading
import time
from typing import Callable


class TokenBucket:
    """
    Token-bucket limiter shared by every thread talking to one endpoint.

    Parameters
    ----------
    rate: float
        Sustained requests per second.
    burst: int, optional
        Bucket capacity. Defaults to ceil(rate), at least 1.
    clock, sleep: callables, optional
        Injected for tests; default to time.monotonic and time.sleep.
    """

    def __init__(self, rate: float, burst: int = None, clock: Callable[[], float] = time.monotonic,
                 sleep: Callable[[float], None] = time.sleep):
        if not rate > 0:
            raise ValueError(f'rate must be > 0, got {rate}')
        self.rate = float(rate)
        self.capacity = burst if burst is not None else max(1, math.ceil(rate))
        self._clock = clock
        self._sleep = sleep
        self._tokens = float(self.capacity)
        self._last = clock()
        self._lock = threading.Lock()

    def _refill(self) -> None:
        now = self._clock()
        self._tokens = min(self.capacity, self._tokens + (now - self._last) * self.rate)
        self._last = now

    def acquire(self) -> None:
        while True:
            with self._lock:
                self._refill()
                if self._tokens >= 1:
                    self._tokens -= 1
                    return
                wait = (1 - self._tokens) / self.rate
            self._sleep(wait)
