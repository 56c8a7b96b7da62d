"""Sampling regime checks.

Two timescale conditions decide whether extracted phases come out
uniform: the sample interval must be long against the pooled coherence
time (the walk then decorrelates between samples), and the detector
must stay fast against it (interference is averaged out otherwise).
Neither is enforced anywhere; callers get a verdict and print it.
"""

from __future__ import annotations

from dataclasses import dataclass

from .simulate import effective_coherence_time

__all__ = ["RegimeCheck", "check_regime", "UNIFORMITY_RATIO"]

# t_sample / tau_bar at which the discretized distribution is flat to
# well below typical test sensitivity
UNIFORMITY_RATIO = 2.0


@dataclass(frozen=True)
class RegimeCheck:
    tau_bar: float
    sample_ratio: float
    detector_ratio: float

    @property
    def uniformity_met(self) -> bool:
        return self.sample_ratio >= UNIFORMITY_RATIO

    @property
    def detector_met(self) -> bool:
        return self.detector_ratio < 1.0

    @property
    def all_met(self) -> bool:
        return self.uniformity_met and self.detector_met

    def lines(self) -> list[str]:
        return [
            f"pooled coherence time: {self.tau_bar:.3e} s",
            "sampling: t_sample / tau_bar = "
            f"{self.sample_ratio:.3g} ({'met' if self.uniformity_met else 'NOT met'}, "
            f"needs >= {UNIFORMITY_RATIO:g})",
            "detector: t_response / tau_bar = "
            f"{self.detector_ratio:.3g} ({'met' if self.detector_met else 'NOT met'}, "
            "needs < 1)",
        ]


def check_regime(
    sample_interval: float,
    response_time: float,
    tau_c1: float,
    tau_c2: float,
) -> RegimeCheck:
    if sample_interval <= 0:
        raise ValueError("sample_interval must be positive")
    if response_time <= 0:
        raise ValueError("response_time must be positive")
    tau_bar = effective_coherence_time(tau_c1, tau_c2)
    return RegimeCheck(
        tau_bar=tau_bar,
        sample_ratio=sample_interval / tau_bar,
        detector_ratio=response_time / tau_bar,
    )
