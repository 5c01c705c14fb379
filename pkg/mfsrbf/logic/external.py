"""Line-protocol adapter for objectives evaluated by an external program.

The program is started once and kept alive. For each evaluation one request line is
written to its stdin and one response line is read from its stdout::

    request:  <level> <eval_index> <x_1> ... <x_D>     (physical coordinates)
    response: ok <value>
              error <message>

Negative ``eval_index`` values mark fresh level-1 evaluations made for metrics only.
"""

from __future__ import annotations

import logging
import math
import subprocess

import numpy as np

from mfsrbf.config import ExternalConfig
from mfsrbf.constants import NUMBER_FORMAT
from mfsrbf.errors import EvaluationError, InvalidArgumentError

logger = logging.getLogger(__name__)


class ExternalEvaluator:
    """An N-level objective served by a child process."""

    def __init__(self, config: ExternalConfig, costs, seed=None):
        if not config.command:
            raise InvalidArgumentError("external.command is empty")
        self.config = config
        self.seed = seed
        self.dim = config.dim
        self.n_levels = config.n_levels
        self.costs = tuple(float(c) for c in costs)
        if len(self.costs) != self.n_levels:
            raise InvalidArgumentError(f"{len(self.costs)} cost ratios for {self.n_levels} levels")
        self.lower = np.zeros(self.dim) if config.lower is None else np.array(config.lower, dtype=float)
        self.upper = np.ones(self.dim) if config.upper is None else np.array(config.upper, dtype=float)
        if np.any(self.upper <= self.lower):
            raise InvalidArgumentError("external.upper must exceed external.lower in every dimension")
        self.x0 = np.full(self.dim, 0.5) if config.x0 is None else np.array(config.x0, dtype=float)
        self._fresh_index = 0
        self._proc = None

    # --- Process handling ---

    def _ensure_started(self):
        if self._proc is not None and self._proc.poll() is None:
            return
        try:
            self._proc = subprocess.Popen(
                list(self.config.command),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as e:
            raise EvaluationError(f"cannot start {self.config.command[0]}: {e}") from e
        logger.info("started external evaluator pid=%d", self._proc.pid)

    def close(self):
        if self._proc is None:
            return
        try:
            if self._proc.stdin:
                self._proc.stdin.close()
        except OSError:
            pass  # child already gone
        try:
            self._proc.wait(timeout=10)
        except subprocess.TimeoutExpired:
            self._proc.kill()
            self._proc.wait()
        self._proc = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False

    # --- Objective interface ---

    def to_physical(self, x):
        return self.lower + (self.upper - self.lower) * np.asarray(x, dtype=float)

    def to_normalized(self, x):
        return (np.asarray(x, dtype=float) - self.lower) / (self.upper - self.lower)

    def _request(self, level, eval_index, x):
        self._ensure_started()
        coords = " ".join(format(float(v), NUMBER_FORMAT) for v in x)
        try:
            self._proc.stdin.write(f"{level} {eval_index} {coords}\n")
            self._proc.stdin.flush()
            line = self._proc.stdout.readline()
        except (OSError, ValueError) as e:
            raise EvaluationError(f"external evaluator pipe failed: {e}", level=level) from e
        if not line:
            raise EvaluationError("external evaluator closed its output", level=level)
        status, _, payload = line.strip().partition(" ")
        if status == "error":
            raise EvaluationError(payload or "external evaluator reported an error", level=level)
        if status != "ok":
            raise EvaluationError(f"malformed response {line.strip()!r}", level=level)
        try:
            value = float(payload)
        except ValueError:
            raise EvaluationError(f"malformed value {payload!r}", level=level) from None
        if not math.isfinite(value):
            raise EvaluationError(f"non-finite value {payload!r}", level=level)
        return value

    def evaluate(self, level, x, eval_index):
        if not 1 <= level <= self.n_levels:
            raise InvalidArgumentError(f"level {level} outside 1..{self.n_levels}")
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.shape != (self.dim,):
            raise InvalidArgumentError(f"expected {self.dim} coordinates, got {x.shape[0]}")
        return self._request(level, int(eval_index), x)

    def true_high_fidelity(self, x):
        """One fresh level-1 evaluation, keyed by a negative index."""
        self._fresh_index -= 1
        return self.evaluate(1, x, self._fresh_index)
