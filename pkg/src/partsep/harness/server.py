"""WebSocket gateway: one connection, one independent live session.

On connect the server sends a hello frame with the ensemble metadata
(``{"t": "hello", "k": <int>, "names": [...]}``) so clients can build
their switch panel; after that it speaks the session protocol verbatim.
Frames that fail to decode get an err reply and the connection stays up.
"""

from __future__ import annotations

import asyncio
import json
import logging

import websockets

from ..neural import SeparationModel
from .separate import part_names
from .session import DEFAULT_QPM, LiveSession

log = logging.getLogger("partsep.server")


class Gateway:
    def __init__(self, model: SeparationModel, profile: str | None = None,
                 qpm: float = DEFAULT_QPM):
        if not model.config.is_online:
            raise ValueError(f"{model.config.arch} cannot serve live sessions")
        self.model = model
        self.qpm = qpm
        self.names = part_names(profile, model.config.k)

    async def client(self, ws) -> None:
        session = LiveSession(self.model, qpm=self.qpm)
        await ws.send(json.dumps(
            {"t": "hello", "k": session.k, "names": self.names}))
        async for raw in ws:
            try:
                msg = json.loads(raw)
            except json.JSONDecodeError:
                await ws.send(json.dumps(
                    {"t": "err", "msg": "frame is not valid JSON"}))
                continue
            reply = session.handle(msg)
            if reply is not None:
                await ws.send(json.dumps(reply))

    async def run(self, host: str, port: int) -> None:
        async with websockets.serve(self.client, host, port):
            log.info("listening on ws://%s:%d", host, port)
            await asyncio.Future()


def serve(model: SeparationModel, host: str = "127.0.0.1", port: int = 8765,
          profile: str | None = None, qpm: float = DEFAULT_QPM) -> None:
    """Blocking entry point used by the CLI."""
    gateway = Gateway(model, profile=profile, qpm=qpm)
    try:
        asyncio.run(gateway.run(host, port))
    except KeyboardInterrupt:
        pass
