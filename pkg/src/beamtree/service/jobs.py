"""Background auto-predict jobs: addressable, observable, cancellable.

Each beam step a job completes emits exactly one "step" event; a terminal
event ("done", "stopped", or "error") always closes the stream.  Events
are kept in order with a monotonically increasing sequence number so both
the push channel and the polling fallback can resume from any cursor.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

from ..decode import PredictionParams
from ..errors import BeamTreeError, NotFoundError
from .workspace import Workspace

# bound on unbounded jobs so a forgotten client cannot grow a tree forever
DEFAULT_MAX_STEPS = 32


@dataclass(frozen=True)
class JobEvent:
    seq: int
    kind: str  # step | done | stopped | error
    payload: dict

    def to_payload(self) -> dict:
        return {"seq": self.seq, "kind": self.kind, **self.payload}


class AutoPredictJob:
    def __init__(self, job_id: str, tree_id: str, params: PredictionParams, max_steps: int):
        self.job_id = job_id
        self.tree_id = tree_id
        self.params = params
        self.max_steps = max_steps
        self._events: list[JobEvent] = []
        self._cond = threading.Condition()
        self._stop = threading.Event()
        self._finished = False
        self._thread: threading.Thread | None = None

    # --- observation ---

    def status(self) -> dict:
        with self._cond:
            return {
                "job_id": self.job_id,
                "tree_id": self.tree_id,
                "steps": sum(1 for e in self._events if e.kind == "step"),
                "events": len(self._events),
                "finished": self._finished,
                "stop_requested": self._stop.is_set(),
            }

    def events_after(self, cursor: int) -> tuple[list[JobEvent], int, bool]:
        """Events with seq > cursor, the new cursor, and the finished flag."""
        with self._cond:
            fresh = [e for e in self._events if e.seq > cursor]
            new_cursor = self._events[-1].seq if self._events else 0
            return fresh, max(cursor, new_cursor), self._finished

    def wait_events(
        self, cursor: int, timeout: float = 1.0
    ) -> tuple[list[JobEvent], int, bool]:
        """Like events_after, but blocks up to ``timeout`` for news."""
        with self._cond:
            self._cond.wait_for(
                lambda: self._finished or (self._events and self._events[-1].seq > cursor),
                timeout=timeout,
            )
        return self.events_after(cursor)

    # --- control ---

    def request_stop(self) -> None:
        self._stop.set()

    def join(self, timeout: float | None = None) -> None:
        if self._thread is not None:
            self._thread.join(timeout)

    # --- internals ---

    def _emit(self, kind: str, payload: dict) -> None:
        with self._cond:
            self._events.append(JobEvent(len(self._events) + 1, kind, payload))
            if kind != "step":
                self._finished = True
            self._cond.notify_all()

    def _run(self, workspace: Workspace) -> None:
        step = 0
        try:
            while step < self.max_steps:
                if self._stop.is_set():
                    self._emit("stopped", {"steps": step})
                    return
                created = workspace.predict(self.tree_id, None, self.params)
                if not created:
                    break
                step += 1
                tree = workspace.get_tree(self.tree_id)
                self._emit(
                    "step",
                    {
                        "step": step,
                        "created": created,
                        "head": tree.head,
                        "node_count": len(tree.nodes),
                    },
                )
            self._emit("done", {"steps": step})
        except BeamTreeError as exc:
            self._emit("error", {"code": exc.code, "message": exc.message})
        except Exception as exc:  # job threads must never die silently
            self._emit("error", {"code": "internal-error", "message": str(exc)})


class JobManager:
    def __init__(self, workspace: Workspace):
        self._workspace = workspace
        self._jobs: dict[str, AutoPredictJob] = {}
        self._guard = threading.Lock()
        self._counter = 0

    def start_auto_predict(
        self,
        tree_id: str,
        params: PredictionParams,
        max_steps: int | None = None,
    ) -> AutoPredictJob:
        self._workspace.get_tree(tree_id)
        with self._guard:
            self._counter += 1
            job_id = f"job-{self._counter:06d}"
            job = AutoPredictJob(
                job_id, tree_id, params, max_steps or DEFAULT_MAX_STEPS
            )
            self._jobs[job_id] = job
        thread = threading.Thread(
            target=job._run, args=(self._workspace,), name=job_id, daemon=True
        )
        job._thread = thread
        thread.start()
        return job

    def get(self, job_id: str) -> AutoPredictJob:
        job = self._jobs.get(job_id)
        if job is None:
            raise NotFoundError(f"no job {job_id!r}")
        return job

    def jobs(self) -> list[AutoPredictJob]:
        return [self._jobs[jid] for jid in sorted(self._jobs)]

    def stop(self, job_id: str) -> AutoPredictJob:
        job = self.get(job_id)
        job.request_stop()
        return job

    def shutdown(self, timeout: float = 5.0) -> None:
        for job in self.jobs():
            job.request_stop()
        for job in self.jobs():
            job.join(timeout)
