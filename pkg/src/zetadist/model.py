"""Model point: the (sigma, m, alpha) triple everything is parameterized by.

sigma is the real part of the line, m the number of iterated integrations
applied to log zeta, alpha the projection direction used for marginals,
moment generating functions and tails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ParameterError


@dataclass(frozen=True)
class ModelPoint:
    sigma: float
    m: int
    alpha: float = 0.0

    def __post_init__(self):
        if not (isinstance(self.sigma, (int, float)) and math.isfinite(self.sigma)):
            raise ParameterError("sigma must be a finite number", sigma=repr(self.sigma))
        if not isinstance(self.m, (int,)) or isinstance(self.m, bool):
            raise ParameterError("m must be a nonnegative integer", m=repr(self.m))
        if self.m < 0:
            raise ParameterError("m must be a nonnegative integer", m=self.m)
        # admissible region: sigma > 1/2 for m = 0, sigma >= 1/2 once m >= 1
        if self.m == 0:
            if self.sigma <= 0.5:
                raise ParameterError(
                    "m = 0 requires sigma > 1/2", sigma=self.sigma, m=self.m
                )
        elif self.sigma < 0.5:
            raise ParameterError(
                "m >= 1 requires sigma >= 1/2", sigma=self.sigma, m=self.m
            )
        if not (isinstance(self.alpha, (int, float)) and math.isfinite(self.alpha)):
            raise ParameterError("alpha must be a finite number", alpha=repr(self.alpha))
