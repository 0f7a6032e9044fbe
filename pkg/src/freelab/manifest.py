"""Run manifests: a reproducibility record written next to every output.

A manifest captures the tool version, the subcommand, digests of every
input file, and the list of outputs. It deliberately contains no
timestamps or host details so that identical runs produce identical
manifests (and, with the deterministic CSV writer, identical outputs).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field


def digest_bytes(data: bytes) -> str:
    return "sha256:" + hashlib.sha256(data).hexdigest()


def digest_file(path) -> str:
    with open(path, "rb") as fh:
        return digest_bytes(fh.read())


def digest_mapping(data: dict) -> str:
    """Digest of a config mapping, independent of key order."""
    return digest_bytes(json.dumps(data, sort_keys=True).encode())


@dataclass
class RunManifest:
    subcommand: str
    tool_version: str
    config_digest: str
    inputs: dict = field(default_factory=dict)  # label -> digest
    parameters: dict = field(default_factory=dict)  # non-file arguments
    outputs: list = field(default_factory=list)  # filenames, sorted on write

    def to_json(self) -> str:
        payload = {
            "subcommand": self.subcommand,
            "tool_version": self.tool_version,
            "config_digest": self.config_digest,
            "inputs": dict(sorted(self.inputs.items())),
            "parameters": dict(sorted(self.parameters.items())),
            "outputs": sorted(self.outputs),
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())
