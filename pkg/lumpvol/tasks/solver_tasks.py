"""Newton solves with escalating retry attempts."""

from typing import Optional

from tenacity import (
    RetryCallState,
    Retrying,
    retry_if_exception_type,
    stop_after_attempt,
)

from lumpvol.core.config import get_settings
from lumpvol.core.exceptions import NoConvergenceException
from lumpvol.core.logging import get_logger
from lumpvol.models.sphere import ScalarField
from lumpvol.models.vortex import KWSolution, VortexConfig
from lumpvol.services.kw_vortex import kw_solve

logger = get_logger(__name__)


def _log_retry(state: RetryCallState) -> None:
    exc = state.outcome.exception() if state.outcome else None
    logger.warning(
        "kw_solve_retry",
        attempt=state.attempt_number,
        residual=getattr(exc, "residual", None),
    )


def robust_kw_solve(
    h: ScalarField,
    cfg: VortexConfig,
    tol: Optional[float] = None,
    attempts: Optional[int] = None,
) -> KWSolution:
    """kw_solve from v_s, then from phi_infinity, then with a doubled iteration cap."""
    settings = get_settings()
    attempts = attempts if attempts is not None else settings.SOLVE_ATTEMPTS
    plan = [
        ("approx", settings.NEWTON_MAX_ITER),
        ("limit", settings.NEWTON_MAX_ITER),
        ("limit", 2 * settings.NEWTON_MAX_ITER),
    ]
    for attempt in Retrying(
        stop=stop_after_attempt(attempts),
        retry=retry_if_exception_type(NoConvergenceException),
        before_sleep=_log_retry,
        reraise=True,
    ):
        with attempt:
            number = attempt.retry_state.attempt_number
            initial, max_iter = plan[min(number, len(plan)) - 1]
            sol = kw_solve(h, cfg, tol=tol, initial=initial, max_iter=max_iter)
    return KWSolution(
        phi=sol.phi,
        config=sol.config,
        residual=sol.residual,
        aliasing_residual=sol.aliasing_residual,
        iterations=sol.iterations,
        attempts=number,
    )
