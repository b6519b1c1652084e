"""Per-node proactive admission controller.

The controller watches its own arrival and completion history through four
fixed-size circular buffers (arrival timestamps, execution times, CPU and
memory consumption of finished services) and keeps running estimates of the
arrival rate, the service rate, and the mean resource consumption. Each
arriving request is executed with the probability returned by
:func:`c3po.queueing.execution_probability`, computed from those estimates;
the rest are left for the caller to forward.

Two details matter for responsiveness:

* The arrival-rate estimate is maintained in O(1) per arrival by tracking
  the rolling sum of inter-arrival intervals instead of re-scanning the
  buffer (``mean_rate_incremental``).
* When the current rate estimate exceeds the remembered rate of the previous
  buffer window, the controller enters *conservative mode* and computes q as
  if the rate keeps rising by the same increment, shedding load before the
  surge fully materializes.

Slow-moving parameters (previous-window rate, service rate, mean
consumptions) are refreshed only when a buffer index wraps, using an
exponential moving average with equal weight on history and on the fresh
window mean.

The controller is deliberately free of randomness: the uniform draw used for
the execute/forward decision is an input, so identical inputs replay to
identical state trajectories.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from . import queueing
from .queueing import WorkloadEstimate

__all__ = ["Action", "ArrivalDecision", "CircularBuffer", "Controller", "ControllerInit"]


class Action(enum.Enum):
    EXECUTE = "execute"
    FORWARD = "forward"


@dataclass(frozen=True)
class ArrivalDecision:
    """Outcome of one admission decision."""

    action: Action
    q_used: float
    conservative: bool


@dataclass(frozen=True)
class ControllerInit:
    """Seed estimates used until the buffers produce real measurements.

    ``arrival_rate`` is returned as the rate estimate while fewer than two
    timestamps have been recorded; ``prev_arrival_rate`` seeds the
    previous-window rate used for conservative-mode detection.
    """

    service_rate: float
    cpu_mean: float = 0.0
    mem_mean: float = 0.0
    arrival_rate: float = 0.0
    prev_arrival_rate: float = 0.0

    def __post_init__(self) -> None:
        if self.service_rate <= 0:
            raise ValueError("initial service_rate must be > 0")
        if self.cpu_mean < 0 or self.mem_mean < 0:
            raise ValueError("initial mean consumptions must be >= 0")
        if self.arrival_rate < 0 or self.prev_arrival_rate < 0:
            raise ValueError("initial rates must be >= 0")


class CircularBuffer:
    """Fixed-capacity ring of floats with a wrapping write index."""

    __slots__ = ("slots", "write_index", "filled")

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.slots = [0.0] * capacity
        self.write_index = 0
        self.filled = False

    @property
    def capacity(self) -> int:
        return len(self.slots)

    def push(self, value: float) -> bool:
        """Write one value. Returns True when the index wraps back to 0."""
        self.slots[self.write_index] = value
        self.write_index = (self.write_index + 1) % len(self.slots)
        if self.write_index == 0:
            self.filled = True
            return True
        return False

    def mean(self) -> float:
        if self.filled:
            return math.fsum(self.slots) / len(self.slots)
        if self.write_index == 0:
            raise ValueError("buffer is empty")
        return math.fsum(self.slots[: self.write_index]) / self.write_index

    def chronological(self) -> list[float]:
        """Contents oldest to newest (meaningful for monotone values)."""
        if self.filled:
            return self.slots[self.write_index:] + self.slots[: self.write_index]
        return self.slots[: self.write_index]


class Controller:
    """Admission controller state machine for one node.

    ``q_override``, when set, replaces the computed execution probability in
    every decision; estimates keep updating. Used to pin q in experiments.
    """

    def __init__(
        self,
        buffer_size: int,
        cpu_capacity: float,
        mem_capacity: float,
        init: ControllerInit,
        q_override: float | None = None,
    ):
        if buffer_size < 2:
            raise ValueError("buffer_size must be >= 2 (the rate estimator "
                             "needs at least two timestamps)")
        if cpu_capacity <= 0 or mem_capacity <= 0:
            raise ValueError("capacities must be > 0")
        if q_override is not None and not 0.0 <= q_override <= 1.0:
            raise ValueError("q_override must be in [0, 1]")
        self.k = buffer_size
        self.cpu_capacity = cpu_capacity
        self.mem_capacity = mem_capacity
        self.buf_arrivals = CircularBuffer(buffer_size)
        self.buf_exec = CircularBuffer(buffer_size)
        self.buf_cpu = CircularBuffer(buffer_size)
        self.buf_mem = CircularBuffer(buffer_size)
        self.lambda_init = init.arrival_rate
        self.lambda_prev = init.prev_arrival_rate
        self.mu_est = init.service_rate
        self.cpu_mean_est = init.cpu_mean
        self.mem_mean_est = init.mem_mean
        self.interval_sum = 0.0  # rolling sum of inter-arrival intervals
        self.q_override = q_override
        self.arrivals_seen = 0
        self.completions_seen = 0
        self.last_arrival_time = -math.inf

    @property
    def arrival_index(self) -> int:
        return self.buf_arrivals.write_index

    @property
    def completion_index(self) -> int:
        return self.buf_exec.write_index

    def mean_rate_incremental(self, now: float) -> float:
        """Record an arrival timestamp and return the updated rate estimate.

        O(1): once the buffer is full, the rolling interval sum is patched by
        subtracting the interval that leaves the window (between the two
        oldest timestamps) and adding the one that enters (newest gap).
        Before the buffer fills, the estimate is (count-1)/span of the
        recorded timestamps; with fewer than two timestamps it is the
        configured initial rate.
        """
        if now < self.last_arrival_time:
            raise ValueError(f"non-monotone timestamp {now} < {self.last_arrival_time}")
        buf = self.buf_arrivals
        k = self.k
        if self.arrivals_seen >= k:
            i = buf.write_index  # slot of the oldest timestamp, about to go
            leaving = buf.slots[(i + 1) % k] - buf.slots[i]
            entering = now - buf.slots[(i - 1) % k]
            self.interval_sum += entering - leaving
        elif self.arrivals_seen >= 1:
            self.interval_sum += now - self.last_arrival_time
        buf.push(now)
        self.arrivals_seen += 1
        self.last_arrival_time = now
        samples = min(self.arrivals_seen, k)
        if samples < 2:
            return self.lambda_init
        if self.interval_sum <= 0.0:
            return math.inf  # all timestamps coincide
        return (samples - 1) / self.interval_sum

    def on_arrival(self, now: float, uniform_draw: float) -> ArrivalDecision:
        """Record an arrival and decide whether to execute or forward it.

        The caller supplies ``uniform_draw`` from [0, 1); the request is
        executed iff the draw falls below the computed q. The
        previous-window rate is refreshed (from the unboosted estimate) when
        the arrival index wraps.
        """
        if not 0.0 <= uniform_draw < 1.0:
            raise ValueError("uniform_draw must be in [0, 1)")
        rate = self.mean_rate_incremental(now)
        delta = max(0.0, rate - self.lambda_prev)
        conservative = delta > 0.0
        if self.q_override is not None:
            q = self.q_override
        else:
            q = queueing.execution_probability(WorkloadEstimate(
                arrival_rate=rate + delta,
                service_rate=self.mu_est,
                cpu_capacity=self.cpu_capacity,
                cpu_mean=self.cpu_mean_est,
                mem_capacity=self.mem_capacity,
                mem_mean=self.mem_mean_est,
            ))
        action = Action.EXECUTE if uniform_draw < q else Action.FORWARD
        if self.buf_arrivals.write_index == 0 and math.isfinite(rate):
            self.lambda_prev = 0.5 * (self.lambda_prev + rate)
        return ArrivalDecision(action=action, q_used=q, conservative=conservative)

    def on_complete(self, exec_time: float, cpu_used: float, mem_used: float) -> None:
        """Record one finished service; refresh estimates on buffer wrap."""
        if exec_time <= 0:
            raise ValueError("exec_time must be > 0")
        if cpu_used < 0 or mem_used < 0:
            raise ValueError("consumptions must be >= 0")
        self.buf_exec.push(exec_time)
        self.buf_cpu.push(cpu_used)
        wrapped = self.buf_mem.push(mem_used)
        self.completions_seen += 1
        if wrapped:
            self.mu_est = 0.5 * (self.mu_est + 1.0 / self.buf_exec.mean())
            self.cpu_mean_est = 0.5 * (self.cpu_mean_est + self.buf_cpu.mean())
            self.mem_mean_est = 0.5 * (self.mem_mean_est + self.buf_mem.mean())

    def snapshot(self) -> dict:
        """Current estimates and indices, for dumps and debugging."""
        return {
            "lambda_prev": self.lambda_prev,
            "mu_est": self.mu_est,
            "cpu_mean_est": self.cpu_mean_est,
            "mem_mean_est": self.mem_mean_est,
            "interval_sum": self.interval_sum,
            "arrival_index": self.arrival_index,
            "completion_index": self.completion_index,
            "arrivals_seen": self.arrivals_seen,
            "completions_seen": self.completions_seen,
            "cpu_capacity": self.cpu_capacity,
            "mem_capacity": self.mem_capacity,
        }
