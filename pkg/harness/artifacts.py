# harness/artifacts.py
"""
Directorio de corrida <out>/<digest[:12]>/ con una CSV por métrica (t,value),
summary.json, summary.txt, config.json normalizado, digest.txt y version.txt.
Se escribe en un directorio temporal y se publica con os.replace bajo un lock.
"""
from __future__ import annotations

import hashlib
import json
import logging
import math
import os
import shutil
import tempfile
from pathlib import Path
from typing import Any, Dict

import numpy as np
from filelock import FileLock

from core.config import TOOL_VERSION
from harness.experiments import ExperimentResult

logger = logging.getLogger(__name__)


def canonical_json(value: Any) -> str:
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def config_digest(config: Dict) -> str:
    """sha256 del documento normalizado más la versión de la herramienta."""
    payload = {"config": config, "version": TOOL_VERSION}
    return hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (np.floating, float)):
        v = float(value)
        return v if math.isfinite(v) else str(v)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def _write_trace_csv(path: Path, times: np.ndarray, values: np.ndarray) -> None:
    data = np.column_stack([times, values])
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        np.savetxt(fh, data, delimiter=",", fmt="%.17g", header="t,value", comments="")


def _summary_text(result: ExperimentResult, digest: str) -> str:
    lines = [f"experimento: {result.name}", f"digest: {digest}", f"versión: {TOOL_VERSION}",
             f"resultado: {'OK' if result.passed else 'FALLÓ'}", ""]
    for line in result.warnings:
        lines.append(f"!! {line}")
    if result.warnings:
        lines.append("")
    lines.append("chequeos:")
    for name, ok in sorted(result.checks.items()):
        lines.append(f"  [{'ok' if ok else 'x '}] {name}")
    lines.append("")
    lines.append("resumen:")
    for key, value in sorted(result.summary.items()):
        lines.append(f"  {key}: {canonical_json(_jsonable(value))}")
    return "\n".join(lines) + "\n"


def write_run(result: ExperimentResult, config: Dict, out_dir: Path) -> Path:
    """Publica los artefactos de la corrida y devuelve el directorio final."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    digest = config_digest(config)
    target = out_dir / digest[:12]

    summary = {
        "experiment": result.name,
        "passed": result.passed,
        "checks": result.checks,
        "warnings": result.warnings,
        "summary": result.summary,
        "digest": digest,
        "version": TOOL_VERSION,
    }

    with FileLock(str(out_dir / f".{digest[:12]}.lock")):
        staging = Path(tempfile.mkdtemp(prefix=f".{digest[:12]}-", dir=out_dir))
        try:
            # 1) trazas: una CSV por métrica
            for trace in result.traces:
                for name, series in trace.values.items():
                    _write_trace_csv(staging / f"{trace.label}.{name}.csv", trace.times, series)
            # 2) estados exportados
            for name, state in result.states.items():
                state.to_binary(staging / f"state_{name}.kgss")
                state.to_csv(staging / f"state_{name}.csv")
            # 3) resumen, configuración y procedencia
            (staging / "summary.json").write_text(
                json.dumps(_jsonable(summary), indent=2, sort_keys=True) + "\n", encoding="utf-8")
            (staging / "summary.txt").write_text(_summary_text(result, digest), encoding="utf-8")
            (staging / "config.json").write_text(
                json.dumps(config, indent=2, sort_keys=True) + "\n", encoding="utf-8")
            (staging / "digest.txt").write_text(digest + "\n", encoding="utf-8")
            (staging / "version.txt").write_text(TOOL_VERSION + "\n", encoding="utf-8")

            if target.exists():
                shutil.rmtree(target)
            os.replace(staging, target)
        except BaseException:
            shutil.rmtree(staging, ignore_errors=True)
            raise

    logger.info("artefactos en %s", target)
    return target
