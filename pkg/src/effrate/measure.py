"""Command probe: runs a process and logs energy, wall time, and peak memory.

Energy comes from cumulative microjoule counters (the kernel's power-capping
sysfs interface on real hosts, or an injected deterministic source in
tests). Counters wrap around at an advertised maximum; a reading that
decreases is corrected by adding the counter's range. Power draw is
reported as mean watts over the run, total corrected energy / wall time.
FLOP counts are out of scope here and enter logs from external profilers.
"""

from __future__ import annotations

import logging
import math
import platform
import subprocess
import time
from dataclasses import dataclass
from pathlib import Path

import psutil

from .ingest import SCHEMA_VERSION

logger = logging.getLogger(__name__)

POWERCAP_ROOT = Path("/sys/class/powercap")

PEAK_MEMORY_KEY = "peak_memory_bytes"

ENERGY_UNAVAILABLE_FLAG = "energy_unavailable"
MEMORY_UNAVAILABLE_FLAG = "memory_unavailable"


class SpawnError(RuntimeError):
    """The measured command could not be started."""


class CounterUnavailable(RuntimeError):
    """No readable energy counters exist on this host."""


@dataclass(frozen=True)
class MeasurementSample:
    """One probe sample: monotonic timestamp, per-domain energy, and RSS."""

    timestamp_ns: int
    energies: dict[str, int]  # cumulative microjoules per power domain
    rss_bytes: int


def corrected_total(readings, max_range: int) -> int:
    """Total energy over a cumulative reading sequence, wraparound-corrected.

    Whenever a reading decreases, the counter wrapped: the delta is taken
    modulo the counter's range, which keeps every contribution non-negative
    no matter how the input sequence behaves.
    """
    if max_range <= 0:
        raise ValueError("max_range must be positive")
    total = 0
    for prev, cur in zip(readings, readings[1:]):
        delta = cur - prev
        if delta < 0:
            delta %= max_range
        total += delta
    return total


class PowercapSource:
    """Energy counters from the kernel power-capping sysfs tree."""

    def __init__(self, root: str | Path = POWERCAP_ROOT):
        self.root = Path(root)
        self._domains: dict[str, tuple[Path, int]] = {}
        if self.root.is_dir():
            for zone in sorted(self.root.iterdir()):
                energy = zone / "energy_uj"
                range_file = zone / "max_energy_range_uj"
                if not energy.is_file():
                    continue
                try:
                    int(energy.read_text())
                    max_range = int(range_file.read_text()) if range_file.is_file() else 2**63 - 1
                except (OSError, ValueError):
                    continue
                name_file = zone / "name"
                try:
                    name = name_file.read_text().strip() or zone.name
                except OSError:
                    name = zone.name
                self._domains[f"{zone.name}:{name}"] = (energy, max_range)

    @property
    def available(self) -> bool:
        return bool(self._domains)

    def domains(self) -> list[str]:
        return list(self._domains)

    def read(self, domain: str) -> int:
        try:
            path, _ = self._domains[domain]
            return int(path.read_text())
        except (KeyError, OSError, ValueError) as exc:
            raise CounterUnavailable(f"cannot read energy counter '{domain}'") from exc

    def max_range(self, domain: str) -> int:
        if domain not in self._domains:
            raise CounterUnavailable(f"unknown energy domain '{domain}'")
        return self._domains[domain][1]


class MockCounterSource:
    """Deterministic counter source for tests and CI.

    Serves a scripted sequence of cumulative readings per domain, repeating
    the last reading once the script is exhausted, so the corrected total is
    independent of how many times the sampler polls.
    """

    def __init__(self, readings, max_range: int = 2**32, domain: str = "mock:package-0"):
        if isinstance(readings, dict):
            self._readings = {d: list(r) for d, r in readings.items()}
        else:
            self._readings = {domain: list(readings)}
        for d, seq in self._readings.items():
            if not seq:
                raise ValueError(f"domain '{d}' needs at least one scripted reading")
        self._max_range = max_range
        self._cursor = {d: 0 for d in self._readings}

    @property
    def available(self) -> bool:
        return True

    def domains(self) -> list[str]:
        return list(self._readings)

    def read(self, domain: str) -> int:
        seq = self._readings[domain]
        i = self._cursor[domain]
        self._cursor[domain] = min(i + 1, len(seq) - 1)
        return seq[i]

    def max_range(self, domain: str) -> int:
        if isinstance(self._max_range, dict):
            return self._max_range[domain]
        return self._max_range


def _tree_rss(pid: int) -> int:
    """Resident set size of a process plus all its children, in bytes."""
    try:
        proc = psutil.Process(pid)
    except psutil.Error:
        return 0
    total = 0
    try:
        total += proc.memory_info().rss
        for child in proc.children(recursive=True):
            try:
                total += child.memory_info().rss
            except psutil.Error:
                pass
    except psutil.Error:
        pass
    return total


def _memory_ok() -> bool:
    try:
        psutil.Process().memory_info()
        return True
    except Exception:
        return False


def probe_available(source=None) -> dict[str, bool]:
    """Report which counters this host offers. Never fails."""
    if source is None:
        try:
            source = PowercapSource()
        except Exception:
            source = None
    energy = bool(source is not None and source.available)
    return {"energy": energy, "memory": _memory_ok()}


def measure_run(
    command,
    interval_ms: int = 100,
    source=None,
    *,
    experiment_id: str | None = None,
    task: str = "measure",
    dataset: str = "adhoc",
    method: str | None = None,
    environment_id: str | None = None,
    clock=None,
    memory_probe=None,
) -> dict:
    """Run a command, sampling counters until it exits; emit a log fragment.

    Returns a log-schema document whose raw measurements carry running_time
    (wall seconds), power_draw (mean watts, when energy counters exist), and
    peak_memory_bytes. On hosts without counters the energy metric is
    omitted and the document is flagged, everything else still reported.
    ``clock`` and ``memory_probe`` exist so tests can inject deterministic
    stand-ins for the wall clock and the RSS reader.
    """
    command = list(command)
    if not command:
        raise SpawnError("empty command")
    clock = clock if clock is not None else time.monotonic
    memory_probe = memory_probe if memory_probe is not None else _tree_rss
    if source is None:
        source = PowercapSource()
    energy_ok = source.available
    domains = source.domains() if energy_ok else []
    memory_ok = _memory_ok() if memory_probe is _tree_rss else True

    try:
        proc = subprocess.Popen(command)
    except (OSError, ValueError) as exc:
        raise SpawnError(f"cannot run {command[0]!r}: {exc}") from exc

    t0 = clock()
    readings: dict[str, list[int]] = {}
    if energy_ok:
        try:
            readings = {d: [source.read(d)] for d in domains}
        except CounterUnavailable:
            energy_ok = False
    samples: list[MeasurementSample] = []
    peak_rss = memory_probe(proc.pid) if memory_ok else 0

    while proc.poll() is None:
        time.sleep(interval_ms / 1000.0)
        snapshot: dict[str, int] = {}
        if energy_ok:
            try:
                for d in domains:
                    value = source.read(d)
                    readings[d].append(value)
                    snapshot[d] = value
            except CounterUnavailable:
                energy_ok = False
                snapshot = {}
        rss = memory_probe(proc.pid) if memory_ok else 0
        peak_rss = max(peak_rss, rss)
        samples.append(MeasurementSample(time.monotonic_ns(), snapshot, rss))

    if energy_ok:
        try:
            for d in domains:
                readings[d].append(source.read(d))
        except CounterUnavailable:
            energy_ok = False
    elapsed = clock() - t0

    flags = []
    measurements: dict[str, list[dict]] = {"running_time": [{"value": elapsed}]}
    total_energy_j: float | None = None
    if energy_ok:
        total_uj = sum(corrected_total(readings[d], source.max_range(d)) for d in domains)
        total_energy_j = total_uj / 1e6
        if elapsed > 0:
            measurements["power_draw"] = [{"value": total_energy_j / elapsed}]
    else:
        flags.append(ENERGY_UNAVAILABLE_FLAG)
        logger.warning("energy counters unavailable; omitting power_draw")
    if memory_ok and peak_rss > 0:
        measurements[PEAK_MEMORY_KEY] = [{"value": float(peak_rss)}]
    elif not memory_ok:
        flags.append(MEMORY_UNAVAILABLE_FLAG)

    method = method or Path(command[0]).name
    return {
        "schema_version": SCHEMA_VERSION,
        "id": experiment_id or f"measured-{method}",
        "configuration": {
            "task": task,
            "dataset": dataset,
            "method": method,
            "hyperparameters": {},
        },
        "environment": {
            "id": environment_id or platform.node() or "local",
            "hardware": platform.machine(),
            "software": f"python-{platform.python_version()}",
        },
        "raw_measurements": measurements,
        "flags": flags,
        "measurement": {
            "command": command,
            "interval_ms": interval_ms,
            "exit_code": proc.returncode,
            "domains": domains if energy_ok else [],
            "energy_j": total_energy_j,
        },
    }
