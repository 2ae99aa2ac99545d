"""Deterministic Monte Carlo worker pool with per-sample random substreams."""

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional

import numpy as np

from lumpvol.core.config import get_settings
from lumpvol.core.exceptions import LumpVolException
from lumpvol.core.logging import get_logger
from lumpvol.models.volume import SampleRecord

logger = get_logger(__name__)


def sample_stream(seed: int, index: int) -> np.random.Generator:
    """Counter-based generator for sample ``index``; independent of worker count."""
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,)))
    )


class SampleTask:
    """One Monte Carlo sample evaluation with failure bookkeeping."""

    def __init__(
        self, seed: int, evaluate: Callable[[int, np.random.Generator], SampleRecord]
    ) -> None:
        self.seed = seed
        self.evaluate = evaluate

    def __call__(self, index: int) -> SampleRecord:
        try:
            record = self.evaluate(index, sample_stream(self.seed, index))
        except (LumpVolException, np.linalg.LinAlgError, FloatingPointError) as exc:
            return self.on_failure(index, exc)
        return record

    def on_failure(self, index: int, exc: Exception) -> SampleRecord:
        """Record a failed sample; the estimate skips it and counts it."""
        code = getattr(exc, "error_code", None) or type(exc).__name__
        logger.warning("sample_failed", index=index, error=code, message=str(exc))
        return SampleRecord(index=index, ratio=None, error=code)


def run_samples(
    task: SampleTask, n: int, threads: Optional[int] = None
) -> list[SampleRecord]:
    """Evaluate samples 0..n-1; results are returned in index order."""
    threads = threads if threads is not None else get_settings().THREADS
    if threads <= 1:
        return [task(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(task, range(n)))
