"""HTTP host for the bridge module: the studio's backend.

The service embeds one :class:`BridgeModule` and drives it through the
byte-buffer boundary exactly like any other host -- it never touches the
engine directly. Query responses are returned as the raw bridge payload
bytes, so a result document fetched over HTTP is byte-identical to the
native CLI's output for the same query.
"""

from __future__ import annotations

import json

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from .bridge import BridgeHost, BridgeModule
from .query import canonical_json_bytes


class CreateSessionRequest(BaseModel):
    schema_document: dict = Field(description="cube schema JSON document")
    facts_csv: str = Field(description="fact table CSV text")


class SessionCreatedResponse(BaseModel):
    session: int


class OkResponse(BaseModel):
    ok: bool = True


class HealthResponse(BaseModel):
    status: str
    sessions: int


def _error_response(payload: bytes) -> Response:
    code = json.loads(payload).get("code")
    status = 404 if code == "handle" else 400
    return Response(content=payload, media_type="application/json", status_code=status)


def create_app(module: BridgeModule | None = None) -> FastAPI:
    host = BridgeHost(module)
    app = FastAPI(title="parcube", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    # Every handler is async so bridge calls run on the single event-loop
    # thread: the host serializes access to the module, per its contract.

    @app.get("/health", response_model=HealthResponse)
    async def health() -> HealthResponse:
        return HealthResponse(status="ok", sessions=host.module.session_count)

    @app.post("/sessions", response_model=SessionCreatedResponse)
    async def create_session(request: CreateSessionRequest):
        status, payload = host.create_session(
            canonical_json_bytes(request.schema_document),
            request.facts_csv.encode("utf-8"),
        )
        if status != "ok":
            return _error_response(payload)
        return SessionCreatedResponse(session=json.loads(payload)["session"])

    @app.post("/sessions/{session_id}/query")
    async def query(session_id: int, request: Request) -> Response:
        status, payload = host.query(session_id, await request.body())
        if status != "ok":
            return _error_response(payload)
        return Response(content=payload, media_type="application/json")

    @app.post("/sessions/{session_id}/reset", response_model=OkResponse)
    async def reset(session_id: int):
        status, payload = host.reset(session_id)
        if status != "ok":
            return _error_response(payload)
        return OkResponse()

    @app.delete("/sessions/{session_id}", response_model=OkResponse)
    async def free(session_id: int):
        status, payload = host.free(session_id)
        if status != "ok":
            return _error_response(payload)
        return OkResponse()

    return app


app = create_app()
