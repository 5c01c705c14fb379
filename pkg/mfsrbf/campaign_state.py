import json
import logging
import math
import os
import zlib
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np

from mfsrbf.config import AcquisitionConfig, CampaignConfig, PsoConfig, SrbfConfig
from mfsrbf.constants import EVENT_TYPES, STATE_VERSION
from mfsrbf.errors import (
    DuplicatePointError,
    EvaluationError,
    InvalidArgumentError,
    InvalidStateError,
)
from mfsrbf.logic import active_learning, pso
from mfsrbf.logic import multifidelity as mf
from mfsrbf.logic.active_learning import TerminationReason
from mfsrbf.logic.benchmarks import initial_design as ccf_design

logger = logging.getLogger(__name__)

_EVENT_LEVELS = {
    "info": logging.INFO,
    "warning": logging.WARNING,
    "stagnation": logging.INFO,
    "error": logging.ERROR,
}


@dataclass
class CampaignRecord:
    """Everything a finished (or failed) campaign reports.

    ``iterations`` holds one row per sampled point: the initial design rows
    (``phase == "seed"``, iteration 0) followed by the adaptive additions.
    ``observed`` lists one value per level, ``None`` where the level was not sampled.
    """

    problem: str
    dim: int
    n_levels: int
    seed: Optional[int]
    beta: tuple
    budget: float
    iterations: list = field(default_factory=list)
    final_x_star: Optional[list] = None
    final_surrogate_min: Optional[float] = None
    termination_reason: Optional[str] = None
    cc: float = 0.0
    per_level_counts: tuple = ()
    events: list = field(default_factory=list)
    initial_level1_values: list = field(default_factory=list)
    last_acquisition_x: Optional[list] = None
    flags: tuple = ()

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        for key in ("beta", "per_level_counts", "flags"):
            if key in data:
                data[key] = tuple(data[key])
        return cls(**data)


class CampaignState:
    """Mutable state of one active-learning campaign.

    ``seed`` evaluates the initial design, ``step`` performs one
    propose / select-fidelity / add iteration and ``finish`` locates the reported
    optimum. Campaign happenings are kept as typed events.
    """

    def __init__(self, stack, budget, levels=None, srbf_config=None, acquisition_config=None,
                 pso_config=None, campaign_config=None, on_row: Optional[Callable] = None):
        self.stack = stack
        self.budget = float(budget)
        self.levels = levels or (mf.FidelityLevels.from_costs(stack.costs) if stack is not None else None)
        self.srbf_config = srbf_config or SrbfConfig()
        self.acquisition_config = acquisition_config or AcquisitionConfig()
        self.pso_config = pso_config or PsoConfig()
        self.campaign_config = campaign_config or CampaignConfig()
        self.on_row = on_row
        self.problem = getattr(stack, "problem", "external")
        self.stack_seed = getattr(stack, "seed", None)

        self.model = None
        self.ledger = mf.BudgetLedger.start(self.levels, self.budget) if self.levels else None
        self.iteration = 0
        self.stagnation_counter = 0
        self.stagnation_anchor = None
        self.rows = []
        self.events = []
        self.termination_reason = None
        self.last_acquisition = None
        self.final_x_star = None
        self.final_surrogate_min = None
        self.initial_level1_values = []
        self._seen_flags = ()

    # --- Events ---

    def add_event(self, message, event_type="info"):
        if event_type not in EVENT_TYPES:
            raise InvalidArgumentError(f"unknown event type {event_type!r}")
        self.events.append({"iteration": self.iteration, "type": event_type, "message": message})
        logger.log(_EVENT_LEVELS[event_type], "[iter %d] %s", self.iteration, message)

    def get_events(self, event_type=None):
        return [e for e in self.events if event_type is None or e["type"] == event_type]

    # --- Campaign ---

    @property
    def finished(self):
        return self.termination_reason is not None

    def _record_row(self, phase, x, observed):
        values = [observed.get(l) for l in range(1, self.levels.n_levels + 1)]
        row = {
            "iteration": self.iteration,
            "phase": phase,
            "level": min(observed),
            "x": [float(v) for v in np.asarray(x).reshape(-1)],
            "observed": values,
            "cc_after": self.ledger.cc,
            "kstar": list(self.model.kstar_history) if self.model is not None else [],
        }
        self.rows.append(row)
        if self.on_row is not None:
            self.on_row(row)

    def _note_flags(self):
        new = [f for f in self.model.flags if f not in self._seen_flags]
        for flag in new:
            self.add_event(f"surrogate fit flagged {flag}", "warning")
        self._seen_flags = tuple(self.model.flags)

    def seed(self, design=None):
        """Evaluate the initial design at every level and fit the hierarchy."""
        if self.model is not None:
            raise InvalidStateError("campaign already seeded")
        design = ccf_design(self.stack.dim) if design is None else np.atleast_2d(np.asarray(design, dtype=float))
        seed_cost = math.fsum(self.levels.beta) * len(design)
        if self.budget < seed_cost:
            raise InvalidArgumentError(f"budget {self.budget} below the initial design cost {seed_cost}")

        training = mf.initial_training(self.stack, design, self.levels, self.srbf_config.duplicate_tol)
        self.initial_level1_values = training[0].values.tolist()
        self.model = mf.fit_hierarchy(training, self.levels, None, self.srbf_config)
        self._note_flags()
        for j, x in enumerate(design):
            self.ledger = self.ledger.charge(1)
            self._record_row("seed", x, {l: float(t.values[j]) for l, t in enumerate(training, start=1)})
        self.add_event(f"initial design of {len(design)} points, CC={self.ledger.cc:.6g}")
        self._check_stop()

    def _check_stop(self, failed=False):
        stop, reason = active_learning.should_stop(
            self.ledger, self.budget, self.stagnation_counter, self.campaign_config, failed
        )
        if stop:
            self.termination_reason = reason.value
            self.add_event(f"terminated: {reason.value}", "error" if failed else "info")
        return stop

    def step(self):
        """One active-learning iteration; returns False once the campaign is over."""
        if self.model is None:
            raise InvalidStateError("campaign not seeded")
        if self.finished:
            return False
        self.iteration += 1

        x = active_learning.propose_point(
            self.model, self.model.all_points(), None, self.acquisition_config, self.pso_config
        )
        self.last_acquisition = x
        l_star = active_learning.select_fidelity(self.model, x, self.levels)

        near = self.model.training[l_star - 1].nearest_distance(x) < self.acquisition_config.d0
        self.stagnation_counter, self.stagnation_anchor = active_learning.update_stagnation(
            self.stagnation_counter, self.stagnation_anchor, x, near, self.acquisition_config.d0
        )
        if self.stagnation_counter:
            self.add_event(
                f"proposal clustered within d0 at level {l_star} ({self.stagnation_counter}/"
                f"{self.campaign_config.stagnation_patience})",
                "stagnation",
            )

        try:
            self.model, self.ledger, observed = mf.add_observation(
                self.model, self.ledger, x, l_star, self.stack, self.srbf_config
            )
        except DuplicatePointError as e:
            if not near:
                self.stagnation_counter += 1
            self.add_event(f"duplicate proposal skipped: {e}", "warning")
            return not self._check_stop()
        except EvaluationError as e:
            self.add_event(f"evaluation failed at level {e.level}: {e}", "error")
            self._check_stop(failed=True)
            return False

        self._note_flags()
        self._record_row("adaptive", x, observed)
        return not self._check_stop()

    def finish(self):
        """Locate the reported optimum on the last good model."""
        if self.model is None:
            raise InvalidStateError("campaign not seeded")
        mode = self.campaign_config.final_optimum
        if mode == "last_acquisition" and self.last_acquisition is None:
            self.add_event("no acquisition was made, reporting the mean minimizer", "warning")
            mode = "mean"
        if mode == "last_acquisition":
            x = np.asarray(self.last_acquisition, dtype=float)
            f = mf.predict_mf(self.model, x).mean
        else:
            result = pso.minimize(lambda X: self.model.predict_many(X)[0], self.model.dim, self.pso_config)
            x, f = result.x_best, result.f_best
        self.final_x_star = [float(v) for v in x]
        self.final_surrogate_min = float(f)
        self.add_event(f"surrogate optimum {f:.6g} at {np.array2string(np.asarray(x), precision=6)}")

    def to_record(self):
        return CampaignRecord(
            problem=self.problem,
            dim=self.model.dim if self.model is not None else self.stack.dim,
            n_levels=self.levels.n_levels,
            seed=self.stack_seed,
            beta=self.levels.beta,
            budget=self.budget,
            iterations=list(self.rows),
            final_x_star=self.final_x_star,
            final_surrogate_min=self.final_surrogate_min,
            termination_reason=self.termination_reason,
            cc=self.ledger.cc,
            per_level_counts=self.ledger.per_level_counts,
            events=list(self.events),
            initial_level1_values=list(self.initial_level1_values),
            last_acquisition_x=None if self.last_acquisition is None else [float(v) for v in self.last_acquisition],
            flags=tuple(self.model.flags) if self.model is not None else (),
        )

    # --- Persistence ---

    def save_state(self, filename="state.json", compressed=False):
        """Write the state as JSON, or zlib-compressed JSON with a ``.zsave`` suffix."""
        if self.model is None:
            raise InvalidStateError("nothing to save before the campaign is seeded")
        data = {
            "version": STATE_VERSION,
            "budget": self.budget,
            "iteration": self.iteration,
            "stagnation_counter": self.stagnation_counter,
            "stagnation_anchor": (
                None if self.stagnation_anchor is None else [float(v) for v in self.stagnation_anchor]
            ),
            "ledger": {"per_level_counts": list(self.ledger.per_level_counts), "cc": self.ledger.cc},
            "model": self.model.to_dict(),
            "record": self.to_record().to_dict(),
        }
        d_name = os.path.dirname(filename)
        if d_name:
            os.makedirs(d_name, exist_ok=True)
        if compressed or filename.endswith(".zsave"):
            filename = filename if filename.endswith(".zsave") else os.path.splitext(filename)[0] + ".zsave"
            with open(filename, "wb") as f:
                f.write(zlib.compress(json.dumps(data).encode("utf-8"), level=9))
        else:
            with open(filename, "w") as f:
                json.dump(data, f)
        return filename

    @classmethod
    def load_state(cls, filename, stack=None):
        """Rebuild a state from :meth:`save_state` output; ``stack`` is needed only to continue."""
        if not os.path.exists(filename) and filename.endswith(".json"):
            filename = filename[: -len(".json")] + ".zsave"
        try:
            if filename.endswith(".zsave"):
                with open(filename, "rb") as f:
                    data = json.loads(zlib.decompress(f.read()).decode("utf-8"))
            else:
                with open(filename, "r") as f:
                    data = json.load(f)
        except (OSError, ValueError, zlib.error) as e:
            raise InvalidStateError(f"cannot load campaign state {filename}: {e}") from e
        if data.get("version") != STATE_VERSION:
            raise InvalidStateError(f"state version {data.get('version')!r}, expected {STATE_VERSION}")
        model = mf.MfSurrogate.from_dict(data["model"])
        state = cls(stack, data["budget"], levels=model.levels)
        state._apply_state_data(data, model)
        return state

    def _apply_state_data(self, data, model):
        record = CampaignRecord.from_dict(data["record"])
        if self.stack is None:
            self.problem, self.stack_seed = record.problem, record.seed
        self.model = model
        self.ledger = mf.BudgetLedger(
            model.levels.beta, tuple(data["ledger"]["per_level_counts"]), self.budget, data["ledger"]["cc"]
        )
        self.iteration = data["iteration"]
        self.stagnation_counter = data["stagnation_counter"]
        anchor = data.get("stagnation_anchor")
        self.stagnation_anchor = None if anchor is None else np.array(anchor)
        self.rows = list(record.iterations)
        self.events = list(record.events)
        self.termination_reason = record.termination_reason
        self.last_acquisition = None if record.last_acquisition_x is None else np.array(record.last_acquisition_x)
        self.final_x_star = record.final_x_star
        self.final_surrogate_min = record.final_surrogate_min
        self.initial_level1_values = list(record.initial_level1_values)
        self._seen_flags = tuple(model.flags)


def drive_campaign(stack, initial_design=None, budget=None, srbf_config=None, acquisition_config=None,
                   pso_config=None, campaign_config=None, levels=None, on_row=None) -> CampaignState:
    """Run a campaign to completion and return its final state."""
    if budget is None:
        raise InvalidArgumentError("budget is required")
    state = CampaignState(stack, budget, levels, srbf_config, acquisition_config, pso_config,
                          campaign_config, on_row)
    try:
        state.seed(initial_design)
    except EvaluationError as e:
        state.termination_reason = TerminationReason.EVALUATION_FAILURE.value
        state.add_event(f"initial design failed: {e}", "error")
        raise
    while state.step():
        pass
    state.finish()
    return state


def run_campaign(stack, initial_design=None, budget=None, srbf_config=None, acquisition_config=None,
                 pso_config=None, campaign_config=None, levels=None, on_row=None) -> CampaignRecord:
    """Seed, iterate while CC < budget, then report the surrogate optimum.

    An evaluation failure ends the loop with reason ``evaluation-failure``; the optimum
    is still taken from the last good model.
    """
    return drive_campaign(stack, initial_design, budget, srbf_config, acquisition_config, pso_config,
                          campaign_config, levels, on_row).to_record()
