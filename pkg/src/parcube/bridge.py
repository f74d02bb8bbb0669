"""Flat embeddable compute boundary: handles and byte buffers only.

The engine's heavy calculation sections (validate, build, query) sit
behind a portable-binary-module style interface. One instantiated
:class:`BridgeModule` owns a growable linear memory; a host moves data in
and out exclusively through::

    alloc(length) -> ptr            dealloc(ptr, length)
    session_create(schema_ptr, schema_len, facts_ptr, facts_len) -> result_ptr
    session_query(session_id, query_ptr, query_len) -> result_ptr
    session_reset(session_id) -> result_ptr
    session_free(session_id) -> result_ptr

Every payload is UTF-8 JSON. Entry points return a pointer to a result
buffer laid out as ``[status: u8][payload_len: u32 LE][payload]`` with
status 0 = ok, 1 = error; the host reads it and releases it with
``dealloc(ptr, 5 + payload_len)``. No host object reference ever crosses
the boundary, and malformed payloads come back as error documents -- the
module does not raise for bad input, only for host-side memory misuse.

Query results serialize through the same canonical JSON writer as the
native CLI, so for any query document the ok-payload bytes are identical
to ``cube query`` output.

:class:`BridgeHost` is the reference headless host: a thin convenience
wrapper that marshals Python bytes across the boundary, and all the
service layer or tests ever touch.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

from .cube import Cube, build_cube
from .errors import CubeError, HandleError, ValidationFailedError
from .facts import FactTable, load_facts, validate
from .query import (
    canonical_json_bytes,
    default_aggregations,
    parse_query_document,
    run_query_full,
)
from .schema import CubeSchema

STATUS_OK = 0
STATUS_ERROR = 1

_PAGE = 65536
_ALIGN = 8


class LinearMemory:
    """Growable byte arena with a bump allocator and exact-size block reuse.

    Out-of-bounds access and mismatched dealloc raise ``MemoryError`` --
    the host broke the contract; payload-level problems never reach here.
    """

    def __init__(self, initial_pages: int = 16):
        self.data = bytearray(_PAGE * initial_pages)
        self._brk = _ALIGN  # keep 0 as a never-valid pointer
        self._live: dict[int, int] = {}
        self._free: dict[int, list[int]] = {}

    def alloc(self, length: int) -> int:
        if length < 0:
            raise MemoryError(f"negative allocation {length}")
        size = max(length, 1)
        bucket = self._free.get(size)
        if bucket:
            ptr = bucket.pop()
        else:
            ptr = self._brk
            self._brk += (size + _ALIGN - 1) // _ALIGN * _ALIGN
            if self._brk > len(self.data):
                pages = (self._brk - len(self.data) + _PAGE - 1) // _PAGE
                self.data.extend(bytes(_PAGE * pages))
        self._live[ptr] = size
        return ptr

    def dealloc(self, ptr: int, length: int) -> None:
        size = max(length, 1)
        if self._live.get(ptr) != size:
            raise MemoryError(f"dealloc({ptr}, {length}) does not match a live allocation")
        del self._live[ptr]
        self._free.setdefault(size, []).append(ptr)

    def write(self, ptr: int, payload: bytes) -> None:
        if ptr < 0 or ptr + len(payload) > len(self.data):
            raise MemoryError(f"write of {len(payload)} bytes at {ptr} is out of bounds")
        self.data[ptr : ptr + len(payload)] = payload

    def read(self, ptr: int, length: int) -> bytes:
        if ptr < 0 or length < 0 or ptr + length > len(self.data):
            raise MemoryError(f"read of {length} bytes at {ptr} is out of bounds")
        return bytes(self.data[ptr : ptr + length])


@dataclass
class Session:
    schema: CubeSchema
    facts: FactTable
    base_cube: Cube
    history: list = field(default_factory=list)
    current_cube: Cube | None = None


class BridgeModule:
    """One module instance: a linear memory plus a session table."""

    def __init__(self):
        self.memory = LinearMemory()
        self._sessions: dict[int, Session] = {}
        self._next_handle = 1

    # -- exports ----------------------------------------------------------

    def alloc(self, length: int) -> int:
        return self.memory.alloc(length)

    def dealloc(self, ptr: int, length: int) -> None:
        self.memory.dealloc(ptr, length)

    def session_create(
        self, schema_ptr: int, schema_len: int, facts_ptr: int, facts_len: int
    ) -> int:
        schema_bytes = self.memory.read(schema_ptr, schema_len)
        facts_bytes = self.memory.read(facts_ptr, facts_len)
        try:
            schema = CubeSchema.from_json(schema_bytes)
            facts = load_facts(facts_bytes, schema)
            report = validate(facts)
            if not report.ok:
                raise ValidationFailedError(
                    "facts failed validation", report=report.to_dict()
                )
            base = build_cube(facts, default_aggregations(schema, {}))
        except CubeError as exc:
            return self._result(STATUS_ERROR, exc.to_document())
        handle = self._next_handle
        self._next_handle += 1
        self._sessions[handle] = Session(
            schema=schema, facts=facts, base_cube=base, current_cube=base
        )
        return self._result(STATUS_OK, {"session": handle})

    def session_query(self, session_id: int, query_ptr: int, query_len: int) -> int:
        payload = self.memory.read(query_ptr, query_len)
        session = self._sessions.get(session_id)
        if session is None:
            return self._result(
                STATUS_ERROR,
                HandleError(f"unknown or freed session handle {session_id}").to_document(),
            )
        try:
            doc = json.loads(payload.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            return self._result(
                STATUS_ERROR,
                {"code": "parse", "message": f"query payload is not valid JSON: {exc}"},
            )
        try:
            parse_query_document(doc)  # shape errors before any state change
            result, cube = run_query_full(
                session.schema, session.facts, doc, base=session.base_cube
            )
        except CubeError as exc:
            return self._result(STATUS_ERROR, exc.to_document())
        session.history.append(doc)
        session.current_cube = cube
        return self._result(STATUS_OK, result)

    def session_reset(self, session_id: int) -> int:
        session = self._sessions.get(session_id)
        if session is None:
            return self._result(
                STATUS_ERROR,
                HandleError(f"unknown or freed session handle {session_id}").to_document(),
            )
        session.history.clear()
        session.current_cube = session.base_cube
        return self._result(STATUS_OK, {"ok": True})

    def session_free(self, session_id: int) -> int:
        if session_id not in self._sessions:
            return self._result(
                STATUS_ERROR,
                HandleError(f"unknown or freed session handle {session_id}").to_document(),
            )
        del self._sessions[session_id]
        return self._result(STATUS_OK, {"ok": True})

    # -- internals ---------------------------------------------------------

    @property
    def session_count(self) -> int:
        return len(self._sessions)

    def _result(self, status: int, doc: dict) -> int:
        payload = canonical_json_bytes(doc)
        buf = struct.pack("<BI", status, len(payload)) + payload
        ptr = self.memory.alloc(len(buf))
        self.memory.write(ptr, buf)
        return ptr


class BridgeHost:
    """Reference host: shuttles Python bytes across the module boundary."""

    def __init__(self, module: BridgeModule | None = None):
        self.module = module or BridgeModule()

    def _send(self, payload: bytes) -> tuple[int, int]:
        ptr = self.module.alloc(len(payload))
        self.module.memory.write(ptr, payload)
        return ptr, len(payload)

    def _receive(self, result_ptr: int) -> tuple[str, bytes]:
        header = self.module.memory.read(result_ptr, 5)
        status, length = struct.unpack("<BI", header)
        payload = self.module.memory.read(result_ptr + 5, length)
        self.module.dealloc(result_ptr, 5 + length)
        return ("ok" if status == STATUS_OK else "error"), payload

    def create_session(self, schema_bytes: bytes, facts_bytes: bytes) -> tuple[str, bytes]:
        sp, sl = self._send(schema_bytes)
        fp, fl = self._send(facts_bytes)
        result = self.module.session_create(sp, sl, fp, fl)
        self.module.dealloc(sp, sl)
        self.module.dealloc(fp, fl)
        return self._receive(result)

    def query(self, session_id: int, query_bytes: bytes) -> tuple[str, bytes]:
        qp, ql = self._send(query_bytes)
        result = self.module.session_query(session_id, qp, ql)
        self.module.dealloc(qp, ql)
        return self._receive(result)

    def reset(self, session_id: int) -> tuple[str, bytes]:
        return self._receive(self.module.session_reset(session_id))

    def free(self, session_id: int) -> tuple[str, bytes]:
        return self._receive(self.module.session_free(session_id))
