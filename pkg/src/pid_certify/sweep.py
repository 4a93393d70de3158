"""Worker pool for gain x plant x initial-state sweeps"""

import asyncio
import itertools
import logging
from dataclasses import dataclass, field
from typing import Callable, Literal, Optional

import numpy as np
from numpy.typing import NDArray

from .errors import PidCertifyError
from .models import ClassBounds, GainTriple, SimConfig, SweepRow, SweepSpec
from .plants import Plant, plant_from_spec
from .regions import check_gains
from .simulator import resolve_horizon, simulate

logger = logging.getLogger(__name__)

TaskStatus = Literal["pending", "running", "completed", "failed"]


@dataclass
class SweepTask:
    """One simulation of the sweep"""

    id: int
    plant: int
    gains: GainTriple
    trial: int
    x0: NDArray[np.float64]
    status: TaskStatus = "pending"
    error_message: Optional[str] = None
    result: Optional[SweepRow] = None


@dataclass
class SweepScheduler:
    """Runs sweep tasks on worker threads, at most `jobs` at a time"""

    jobs: int = 1
    tasks: list[SweepTask] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.jobs < 1:
            raise ValueError(f"jobs must be >= 1, got {self.jobs}")

    def add_task(
        self, plant: int, gains: GainTriple, trial: int, x0: NDArray[np.float64]
    ) -> int:
        """
        Add a task to the pool.

        Returns:
            Task ID
        """
        task = SweepTask(
            id=len(self.tasks), plant=plant, gains=gains, trial=trial, x0=x0
        )
        self.tasks.append(task)
        return task.id

    async def _process(
        self,
        task: SweepTask,
        work: Callable[[SweepTask], SweepRow],
        slots: asyncio.Semaphore,
    ) -> None:
        async with slots:
            task.status = "running"
            try:
                task.result = await asyncio.to_thread(work, task)
                task.status = "completed"
            except Exception as e:
                task.status = "failed"
                task.error_message = str(e)
                logger.error("Task %d failed: %s", task.id, e)

    async def run(self, work: Callable[[SweepTask], SweepRow]) -> list[SweepTask]:
        """Process every pending task; returns the tasks in ID order"""
        slots = asyncio.Semaphore(self.jobs)
        pending = [t for t in self.tasks if t.status == "pending"]
        logger.info("Sweep started: %d tasks on %d workers", len(pending), self.jobs)
        await asyncio.gather(*(self._process(t, work, slots) for t in pending))
        logger.info("Sweep finished: %s", self.stats())
        return self.tasks

    def stats(self) -> dict[str, int]:
        """Task counts by status"""
        counts = {"pending": 0, "running": 0, "completed": 0, "failed": 0}
        for task in self.tasks:
            counts[task.status] += 1
        counts["total"] = len(self.tasks)
        return counts


def _simulate_task(
    task: SweepTask,
    plants: list[Plant],
    bounds: ClassBounds,
    b_actual: float,
    setpoint: Optional[list[float]],
    cfg: SimConfig,
) -> SweepRow:
    plant = plants[task.plant]
    v1, v2 = check_gains(task.gains, bounds)
    row = SweepRow(
        plant=task.plant,
        kp=task.gains.kp,
        ki=task.gains.ki,
        kd=task.gains.kd,
        trial=task.trial,
        in_omega1=v1.in_region,
        in_omega2=v2.in_region,
        status="completed",
    )
    ystar = np.ones(plant.n) if setpoint is None else setpoint
    cfg = resolve_horizon(cfg, task.gains, b_actual, bounds)
    try:
        traj = simulate(
            plant, task.gains, b_actual, ystar, task.x0, np.zeros(plant.n), cfg
        )
    except PidCertifyError as e:
        return row.model_copy(update={"status": "failed", "error_message": e.detail})
    return row.model_copy(
        update={"verdict": traj.verdict, "final_error": traj.final_error}
    )


async def run_sweep(
    spec: SweepSpec,
    bounds: ClassBounds,
    cfg: SimConfig,
    seed: int,
    jobs: int = 1,
    b_actual: Optional[float] = None,
    setpoint: Optional[list[float]] = None,
) -> list[SweepRow]:
    """
    Simulate every plant for every gain triple from seeded initial states.

    Initial states are drawn before any work starts, so rows are identical
    for any number of workers.

    Returns:
        Rows in (plant, kp, ki, kd, trial) order
    """
    plants = [plant_from_spec(p) for p in spec.plants]
    rng = np.random.default_rng(seed)
    scheduler = SweepScheduler(jobs=jobs)
    for i, plant in enumerate(plants):
        for kp, ki, kd in itertools.product(spec.kp, spec.ki, spec.kd):
            gains = GainTriple(kp=kp, ki=ki, kd=kd, b_lower=spec.b_lower)
            for trial in range(spec.initial_states):
                x0 = rng.uniform(-spec.state_radius, spec.state_radius, plant.n)
                scheduler.add_task(i, gains, trial, x0)

    b = spec.b_lower if b_actual is None else b_actual
    tasks = await scheduler.run(
        lambda t: _simulate_task(t, plants, bounds, b, setpoint, cfg)
    )

    rows = []
    for task in tasks:
        if task.result is not None:
            rows.append(task.result)
        else:
            rows.append(
                SweepRow(
                    plant=task.plant,
                    kp=task.gains.kp,
                    ki=task.gains.ki,
                    kd=task.gains.kd,
                    trial=task.trial,
                    in_omega1=False,
                    in_omega2=False,
                    status="failed",
                    error_message=task.error_message,
                )
            )
    return rows
