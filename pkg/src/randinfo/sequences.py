"""Non-increasing semi-axis sequences and the scalar functionals derived from them.

A :class:`SemiAxes` object models the sequence sigma_1 >= sigma_2 >= ... >= sigma_m >= 0
of semi-axis lengths of an ellipsoid, truncated at a finite dimension m
(sigma_j = 0 for j > m).  Three families are supported:

* ``polynomial``: sigma_j = scale * j**(-alpha) * ln(j+1)**(-beta)
* ``exponential``: sigma_j = scale * a**j with a in (0, 1)
* ``explicit``: a user-supplied finite list, scaled.

All tail sums are accumulated with compensated (Kahan) summation from the
smallest terms upward, so fast-decaying tails do not lose precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.integrate import quad

__all__ = ["SemiAxes"]

_FAMILIES = ("polynomial", "exponential", "explicit")

# Slack for the monotonicity check of analytic families: adjacent values are
# computed independently, so rounding may perturb them by a few ulp of sigma_1.
_MONOTONE_SLACK = 1e-14


def _kahan_suffix_sums(terms: np.ndarray) -> np.ndarray:
    """Suffix sums S[k] = sum(terms[k:]), accumulated smallest-first with
    Kahan compensation.  ``terms`` must be non-increasing."""
    out = np.empty(len(terms) + 1)
    out[-1] = 0.0
    total = 0.0
    comp = 0.0
    for i in range(len(terms) - 1, -1, -1):
        y = float(terms[i]) - comp
        t = total + y
        comp = (t - total) - y
        total = t
        out[i] = total
    return out


@dataclass(frozen=True)
class SemiAxes:
    """A non-increasing sequence of semi-axis lengths, truncated at dimension m.

    Construct through :meth:`polynomial`, :meth:`exponential`, :meth:`explicit`
    or :meth:`from_spec`; the raw constructor validates but does not fill in
    family parameters for you.
    """

    family: str
    m: int
    scale: float = 1.0
    alpha: float | None = None
    beta: float | None = None
    a: float | None = None
    explicit_values: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.m < 1:
            raise ValueError("truncation dimension m must be >= 1")
        if not (self.scale > 0):
            raise ValueError("scale must be positive")
        if self.family == "polynomial":
            if self.alpha is None or self.alpha < 0:
                raise ValueError("polynomial family needs alpha >= 0")
            if self.beta is None:
                object.__setattr__(self, "beta", 0.0)
            if self.alpha == 0 and self.beta < 0:
                raise ValueError("alpha = 0 requires beta >= 0")
        elif self.family == "exponential":
            if self.a is None or not (0 < self.a < 1):
                raise ValueError("exponential family needs a in (0, 1)")
        else:
            vals = self.explicit_values
            if not vals:
                raise ValueError("explicit family needs a non-empty value list")
            if len(vals) != self.m:
                raise ValueError("explicit value list length must equal m")
            if any(v < 0 for v in vals):
                raise ValueError("semi-axes must be non-negative")
            if any(b > a for a, b in zip(vals, vals[1:])):
                raise ValueError("explicit semi-axes must be non-increasing")
        values = self._evaluate()
        if not values[0] > 0:
            raise ValueError("sigma_1 must be positive")
        slack = _MONOTONE_SLACK * values[0]
        if np.any(values[1:] > values[:-1] + slack):
            raise ValueError("family parameters produce a non-monotone sequence")
        object.__setattr__(self, "_values", values)

    # -- construction helpers -------------------------------------------------

    @classmethod
    def polynomial(cls, alpha: float, beta: float = 0.0, *, m: int, scale: float = 1.0) -> "SemiAxes":
        return cls(family="polynomial", m=m, scale=scale, alpha=alpha, beta=beta)

    @classmethod
    def exponential(cls, a: float, *, m: int, scale: float = 1.0) -> "SemiAxes":
        return cls(family="exponential", m=m, scale=scale, a=a)

    @classmethod
    def explicit(cls, values, *, scale: float = 1.0) -> "SemiAxes":
        vals = tuple(float(v) for v in values)
        return cls(family="explicit", m=len(vals), scale=scale, explicit_values=vals)

    @classmethod
    def from_spec(cls, spec: dict) -> "SemiAxes":
        """Build from the JSON sequence spec, e.g.
        ``{"family": "polynomial", "alpha": 1.0, "beta": 0.0, "m": 4096, "scale": 1.0}``."""
        spec = dict(spec)
        family = spec.pop("family", None)
        scale = spec.pop("scale", 1.0)
        if family == "polynomial":
            return cls.polynomial(spec["alpha"], spec.get("beta", 0.0), m=spec["m"], scale=scale)
        if family == "exponential":
            return cls.exponential(spec["a"], m=spec["m"], scale=scale)
        if family == "explicit":
            return cls.explicit(spec["values"], scale=scale)
        raise ValueError(f"unknown family {family!r} in sequence spec")

    def to_spec(self) -> dict:
        if self.family == "polynomial":
            return {"family": "polynomial", "alpha": self.alpha, "beta": self.beta,
                    "m": self.m, "scale": self.scale}
        if self.family == "exponential":
            return {"family": "exponential", "a": self.a, "m": self.m, "scale": self.scale}
        return {"family": "explicit", "values": list(self.explicit_values), "scale": self.scale}

    def with_m(self, m: int) -> "SemiAxes":
        """The same family re-truncated at dimension ``m`` (explicit lists keep their length)."""
        if self.family == "explicit":
            if m != self.m:
                raise ValueError("explicit sequences cannot be re-truncated")
            return self
        spec = self.to_spec()
        spec["m"] = m
        return SemiAxes.from_spec(spec)

    # -- evaluation -----------------------------------------------------------

    def _evaluate(self) -> np.ndarray:
        j = np.arange(1, self.m + 1, dtype=float)
        if self.family == "polynomial":
            vals = j ** (-self.alpha) * np.log(j + 1.0) ** (-self.beta)
        elif self.family == "exponential":
            vals = self.a ** j
        else:
            vals = np.asarray(self.explicit_values, dtype=float)
        vals = self.scale * vals
        vals.setflags(write=False)
        return vals

    @property
    def values(self) -> np.ndarray:
        """sigma_1 .. sigma_m as a read-only array."""
        return self._values

    @cached_property
    def _suffix_sq(self) -> np.ndarray:
        return _kahan_suffix_sums(self._values ** 2)

    # -- scalar functionals ---------------------------------------------------

    def sigma_value(self, j: int) -> float:
        """sigma_j, with sigma_j = 0 for j > m."""
        if j < 1:
            raise ValueError("index j must be >= 1")
        if j > self.m:
            return 0.0
        return float(self._values[j - 1])

    def tail_sq(self, k: int) -> float:
        """sum_{j > k, j <= m} sigma_j**2.  The inclusive-start sum over j >= s
        is ``tail_sq(s - 1)``."""
        if k < 0:
            raise ValueError("k must be >= 0")
        return float(self._suffix_sq[min(k, self.m)])

    def c_k(self, k: int) -> float:
        """Tail-to-axis ratio sigma_k**-2 * sum_{j>k} sigma_j**2.

        Follows the a/0 = inf (a > 0) and 0/0 = 0 conventions.
        """
        if k < 1:
            raise ValueError("k must be >= 1")
        sk = self.sigma_value(k)
        tail = self.tail_sq(k)
        if sk > 0:
            return tail / sk**2
        return math.inf if tail > 0 else 0.0

    def n_zero(self, eps: float) -> int:
        """floor(eps**2 / (3 sigma_1**2) * sum_{j>=2} sigma_j**2): the largest
        number of random measurements that is still useless at accuracy
        sigma_1 * (1 - eps)."""
        if not (0 < eps < 1):
            raise ValueError("eps must lie in (0, 1)")
        s1 = float(self._values[0])
        return int(math.floor(eps**2 * self.tail_sq(1) / (3.0 * s1**2)))

    def neglected_tail_sq(self) -> float:
        """Mass sum_{j > m} sigma_j**2 that the truncation drops.

        Exact for the exponential family, an integral estimate for the
        polynomial family (infinite when the full sequence is not square
        summable), and zero for explicit lists.
        """
        if self.family == "explicit":
            return 0.0
        if self.family == "exponential":
            r = self.a**2
            return self.scale**2 * r ** (self.m + 1) / (1.0 - r)
        two_a, two_b = 2.0 * self.alpha, 2.0 * self.beta
        if two_a < 1.0 or (two_a == 1.0 and two_b <= 1.0):
            return math.inf
        m = float(self.m)
        if two_b == 0.0:
            val = m ** (1.0 - two_a) / (two_a - 1.0)
        elif two_a == 1.0:
            # x ~ x+1 inside the log: relative error O(1/(m log m))
            val = math.log(m + 1.0) ** (1.0 - two_b) / (two_b - 1.0)
        else:
            # substitute x = m e^t: the integrand decays exponentially in t
            val, _ = quad(lambda t: math.exp((1.0 - two_a) * t)
                          * math.log(m * math.exp(t) + 1.0) ** (-two_b),
                          0.0, math.inf)
            val *= m ** (1.0 - two_a)
        return self.scale**2 * val
