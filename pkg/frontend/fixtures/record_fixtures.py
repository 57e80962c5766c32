"""Record the frontend test fixtures from a fresh service.

Runs a deterministic session against an in-process app on a throwaway
workspace and writes, next to this script:

  api-log.json        every request of the session, in order
  tree-fixture.json   the exact export bytes of the session's tree
  badges-fixture.json badge map for the tree under the session wordlists
  ontology-fixture.json  ontology layers for the annotated tree
  upset-fixture.json  shared-word columns for a comparative pair

Replaying api-log.json against any fresh default workspace must yield a
tree whose export equals tree-fixture.json byte for byte; the vitest
suite asserts exactly that over real HTTP.

Usage: python3 record_fixtures.py
"""

from __future__ import annotations

import json
import sys
import tempfile
from pathlib import Path

from starlette.testclient import TestClient

from beamtree.service.api import build_app
from beamtree.service.workspace import Workspace

HERE = Path(__file__).resolve().parent

PROMPT = "The United States of America is a nation of"
TOPICS = ["immigrants", "nation", "america", "great", "lawyer", "democracy"]
COMPARE_TEMPLATE = "After receiving their degree , <PH> wants to become a"
COMPARE_VALUES = ["John", "Jessica"]
COMPARE_LISTS = ["occupations_female", "occupations_male"]


class Recorder:
    """TestClient wrapper that logs requests the way the web client does."""

    def __init__(self, client: TestClient):
        self.client = client
        self.log: list[dict] = []

    def request(self, method: str, path: str, body=None) -> dict:
        entry: dict = {"method": method, "path": path}
        if body is not None:
            entry["body"] = body
        self.log.append(entry)
        response = self.client.request(method, path, json=body)
        if response.status_code >= 400:
            raise RuntimeError(f"{method} {path} -> {response.status_code}: {response.text}")
        return response.json()


def main() -> int:
    with tempfile.TemporaryDirectory() as tmp:
        workspace = Workspace(tmp)
        try:
            client = TestClient(build_app(workspace))
            rec = Recorder(client)

            rec.request("GET", "/v1/health")
            doc = rec.request("POST", "/v1/trees", {"prompt": PROMPT})
            tid = doc["tree_id"]

            first = rec.request(
                "POST",
                f"/v1/trees/{tid}/predict",
                {"params": {"top_k": 3, "next_n": 2}},
            )
            edit_target = first["created"][0]
            rec.request(
                "POST",
                f"/v1/trees/{tid}/nodes/{edit_target}/edit",
                {"text": " great"},
            )
            second = rec.request(
                "POST",
                f"/v1/trees/{tid}/predict",
                {"node_id": edit_target, "params": {"top_k": 2, "next_n": 1}},
            )
            rec.request("POST", f"/v1/trees/{tid}/end", {"node_id": second["head"]})
            rec.request("POST", f"/v1/trees/{tid}/annotate")
            rec.request("PUT", "/v1/wordlists/topics", {"words": TOPICS})
            badges = rec.request(
                "POST", "/v1/badges", {"tree_ids": [tid], "lists": ["topics"]}
            )

            # exact persisted bytes; replay must reproduce these
            export = client.get(f"/v1/trees/{tid}/export")
            export.raise_for_status()

            ontology = client.get(f"/v1/trees/{tid}/ontology").json()

            # comparative pair for the shared-word fixtures (not replayed)
            cmp = client.post(
                "/v1/comparative",
                json={
                    "template": COMPARE_TEMPLATE,
                    "replacements": COMPARE_VALUES,
                    "params": {"top_k": 5, "next_n": 2},
                },
            ).json()
            upset = client.post(
                "/v1/upset",
                json={"tree_ids": cmp["tree_ids"], "lists": COMPARE_LISTS},
            ).json()

            (HERE / "api-log.json").write_text(json.dumps(rec.log, indent=2) + "\n")
            (HERE / "tree-fixture.json").write_bytes(export.content)
            (HERE / "badges-fixture.json").write_text(json.dumps(badges, indent=2) + "\n")
            (HERE / "ontology-fixture.json").write_text(json.dumps(ontology, indent=2) + "\n")
            (HERE / "upset-fixture.json").write_text(json.dumps(upset, indent=2) + "\n")
        finally:
            workspace.close()

    tree = json.loads((HERE / "tree-fixture.json").read_bytes())
    print(f"tree {tree['tree_id']}: {len(tree['nodes'])} nodes")
    print(f"log: {len(json.loads((HERE / 'api-log.json').read_text()))} requests")
    return 0


if __name__ == "__main__":
    sys.exit(main())
