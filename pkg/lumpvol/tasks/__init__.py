"""Sample worker pool and retried solve tasks."""

from lumpvol.tasks.sampling import SampleTask, run_samples, sample_stream
from lumpvol.tasks.solver_tasks import robust_kw_solve

__all__ = ["SampleTask", "robust_kw_solve", "run_samples", "sample_stream"]
