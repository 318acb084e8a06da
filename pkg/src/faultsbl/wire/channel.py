import asyncio
from multiprocessing import Pipe
from multiprocessing.connection import Connection
from typing import Any, AsyncIterator, Protocol


class Channel(Protocol):
    def send(self, ev: Any, /) -> None:
        ...


class AsyncChannel(Protocol):
    def recv(self) -> AsyncIterator[Any]:
        ...


class NullChannel:
    """Discards events; used when a study runs without a live view."""

    def send(self, ev: Any, /) -> None:
        pass


class ListChannel:
    def __init__(self) -> None:
        self.events: list[Any] = []

    def send(self, ev: Any, /) -> None:
        self.events.append(ev)


def create_channel() -> tuple["AsyncConn", Connection]:
    """
    One-way event pipe: the worker process sends on the sync end, the terminal
    view consumes the async end.
    """
    receiving_conn, sending_conn = Pipe(duplex=False)
    return AsyncConn(receiving_conn), sending_conn


class AsyncConn:
    DEFAULT_SLEEP = 0.05
    MAX_SLEEP = 1.0
    GROWING_SLEEP_MULTIPLIER = 1.5

    def __init__(self, conn: Connection) -> None:
        self._conn = conn
        self._sleeping_delay = self.DEFAULT_SLEEP

    async def recv(self) -> AsyncIterator[Any]:
        while True:
            try:
                has_data = self._conn.poll()
            except (EOFError, OSError):
                return

            if has_data:
                try:
                    ev = self._conn.recv()
                except EOFError:
                    return
                self._sleeping_delay = self.DEFAULT_SLEEP
                yield ev
            else:
                # back off while the worker is busy crunching a batch
                await asyncio.sleep(self._sleeping_delay)
                self._sleeping_delay = min(
                    self._sleeping_delay * self.GROWING_SLEEP_MULTIPLIER, self.MAX_SLEEP
                )
