"""Latency measurement, speedups and the fitted latency cost model."""

__all__ = [
    "Workload",
    "LatencyReport",
    "Measurement",
    "CostModel",
    "build_workload",
    "measure",
    "speedup",
    "speedup_table",
    "fit_cost_model",
    "predict_speedup",
    "ResultsStore",
]


def __getattr__(name):
    if name in ("Workload", "LatencyReport", "Measurement", "CostModel"):
        from bench_harness import schemas
        return getattr(schemas, name)
    if name == "build_workload":
        from bench_harness.workload import build_workload
        return build_workload
    if name in ("measure", "speedup", "speedup_table"):
        from bench_harness import timing
        return getattr(timing, name)
    if name in ("fit_cost_model", "predict_speedup"):
        from bench_harness import cost_model
        return getattr(cost_model, name)
    if name == "ResultsStore":
        from bench_harness.store import ResultsStore
        return ResultsStore
    raise AttributeError(name)
