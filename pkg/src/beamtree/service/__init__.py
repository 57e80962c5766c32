"""Service layer: durable workspace, background jobs, and the /v1 HTTP API."""

from .api import API_VERSION, ServiceConfig, build_app, check_port_free, serve
from .jobs import DEFAULT_MAX_STEPS, AutoPredictJob, JobEvent, JobManager
from .locks import LockTable, ReadWriteLock
from .workspace import Workspace, default_backend_configs

__all__ = [
    "API_VERSION",
    "AutoPredictJob",
    "DEFAULT_MAX_STEPS",
    "JobEvent",
    "JobManager",
    "LockTable",
    "ReadWriteLock",
    "ServiceConfig",
    "Workspace",
    "build_app",
    "check_port_free",
    "default_backend_configs",
    "serve",
]
