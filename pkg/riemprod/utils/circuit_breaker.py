"""Timeout guard for verification trials running in worker threads."""
import asyncio
import logging
from typing import Awaitable, TypeVar

from riemprod.exceptions import TrialTimeoutError

logger = logging.getLogger(__name__)

T = TypeVar('T')


async def with_timeout(coro: Awaitable[T], timeout: float, name: str = "trial") -> T:
    """
    Await a coroutine, converting a timeout into TrialTimeoutError.

    A worker thread behind an abandoned asyncio.to_thread call keeps running
    until it returns; only its result is discarded.
    """
    try:
        return await asyncio.wait_for(coro, timeout=timeout)
    except asyncio.TimeoutError:
        logger.warning(f"{name} timed out after {timeout}s")
        raise TrialTimeoutError(f"{name} exceeded {timeout} seconds")
