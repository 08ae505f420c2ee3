"""CSV, sidecar, and manifest writers with round-trip float formatting."""

from __future__ import annotations

import hashlib
import os

import numpy as np


def fmt(value) -> str:
    """Shortest round-trip decimal for floats; plain str otherwise."""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def write_sidecar(path, metadata: dict) -> None:
    """Plain-text key = value sidecar describing an experiment's inputs."""
    with open(path, "w", newline="\n") as fh:
        for key in sorted(metadata):
            fh.write(f"{key} = {fmt(metadata[key])}\n")


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(path, experiment: str, claim: str, inputs: dict,
                   outputs, wall_time: float, status: str) -> None:
    """Record what ran, what it tests, what it wrote, and whether it finished."""
    with open(path, "w", newline="\n") as fh:
        fh.write(f"experiment = {experiment}\n")
        fh.write(f"claim = {claim}\n")
        fh.write(f"status = {status}\n")
        fh.write(f"wall_time_s = {wall_time:.3f}\n")
        for key in sorted(inputs):
            fh.write(f"input.{key} = {fmt(inputs[key])}\n")
        for out in outputs:
            digest = sha256_file(out) if os.path.exists(out) else "missing"
            fh.write(f"output = {os.path.basename(out)} sha256:{digest}\n")
