import time
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Any, Iterator, Optional

from src.config import settings
from src.utils.logging import get_logger

logger = get_logger(__name__)


@dataclass
class Timing:
    """Elapsed wall time of a ``timer`` block, filled in on exit."""

    name: str
    elapsed: float = 0.0


class WandbMonitor:
    """Weights & Biases tracking for convergence studies and solver runs.

    Every method is a no-op while tracking is disabled or no run is open, so
    numerical code can report metrics unconditionally.
    """

    def __init__(self, enabled: Optional[bool] = None):
        if enabled is None:
            enabled = settings.wandb_enabled and bool(settings.wandb_api_key)
        self._enabled = enabled
        self._run = None

    @property
    def enabled(self) -> bool:
        return self._enabled

    @property
    def active(self) -> bool:
        return self._enabled and self._run is not None

    def _disable(self, action: str, error: Exception) -> None:
        logger.warning(f"W&B {action} failed, tracking off for this process: {error}")
        self._enabled = False
        self._run = None

    def init(self, run_name: Optional[str] = None, config: Optional[dict] = None) -> None:
        """Open a run in ``settings.wandb_project``; the run group is the CLI subcommand."""
        if not self._enabled:
            logger.debug("W&B tracking disabled")
            return

        try:
            import wandb

            self._run = wandb.init(
                project=settings.wandb_project,
                name=run_name,
                group=(config or {}).get("command"),
                config=dict(config or {}),
                reinit=True,
            )
        except Exception as e:
            self._disable("init", e)
            return
        logger.info(f"W&B run {self._run.name} started")

    def log(self, metrics: dict[str, Any], step: Optional[int] = None) -> None:
        if not self.active:
            return
        try:
            self._run.log(metrics, step=step)
        except Exception as e:
            self._disable("log", e)

    def log_solver_iteration(
        self,
        iteration: int,
        objective: float,
        infeasibility: float,
        penalty: float,
        inner_iterations: int,
    ) -> None:
        """Log one augmented Lagrangian outer iteration."""
        self.log(
            {
                "solver/objective": objective,
                "solver/infeasibility": infeasibility,
                "solver/penalty": penalty,
                "solver/inner_iterations": inner_iterations,
            },
            step=iteration,
        )

    def log_convergence_row(
        self, function_id: str, n: int, inf_error: float, euclid_error: float
    ) -> None:
        """Log one row of a quadrature convergence study."""
        self.log(
            {
                f"quadrature/{function_id}/inf_error": inf_error,
                f"quadrature/{function_id}/euclid_error": euclid_error,
            },
            step=n,
        )

    @contextmanager
    def timer(self, metric_name: str) -> Iterator[Timing]:
        """Time a block; yields the ``Timing`` that is filled in on exit."""
        timing = Timing(name=metric_name)
        started = time.perf_counter()
        try:
            yield timing
        finally:
            timing.elapsed = time.perf_counter() - started
            self.log({metric_name: timing.elapsed})

    def finish(self) -> None:
        if self._run is None:
            return
        run, self._run = self._run, None
        try:
            run.finish()
        except Exception as e:
            logger.warning(f"W&B run {run.name} did not close cleanly: {e}")
        else:
            logger.info(f"W&B run {run.name} closed")


monitor = WandbMonitor()
