"""Scalar bounds determined by the maximal principal curvature ``lambda0`` and an area scale.

Covers the convex-core volume bound and its small-``lambda0`` expansion, the
radius-one neighborhood volume, the quasicircle Hausdorff-dimension bound and the
spectral bounds that take a constant ``k3`` as input.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .errors import AdmissibilityError
from .foliation import convexity_radius

DEFAULT_K3 = 1e-11
NEAR_BOUNDARY = 0.95


def _check_lambda0(lambda0: float) -> None:
    if not 0.0 <= lambda0 < 1.0:
        raise AdmissibilityError(f"need 0 <= lambda0 < 1, got {lambda0!r}", lambda0=lambda0)


def _check_area(a_hyp: float) -> None:
    if not a_hyp > 0:
        raise ValueError(f"a_hyp must be positive, got {a_hyp!r}")


def nominal_area(genus: int) -> float:
    """Hyperbolic area ``2 pi (2g - 2)`` of a closed genus-g surface."""
    if genus < 2:
        raise ValueError(f"genus must be >= 2, got {genus}")
    return 2 * math.pi * (2 * genus - 2)


def volume_bound(lambda0: float, a_hyp: float) -> float:
    """``a_hyp * (lambda0 / (1 - lambda0^2) + (1/2) log((1 + lambda0) / (1 - lambda0)))``."""
    _check_lambda0(lambda0)
    _check_area(a_hyp)
    # (1/2) log((1 + l) / (1 - l)) evaluated as atanh(l)
    return a_hyp * (lambda0 / (1 - lambda0**2) + math.atanh(lambda0))


def volume_bound_hyperbolic_form(lambda0: float, a_hyp: float) -> float:
    """The same bound written as ``a_hyp * (cosh r0 sinh r0 + r0)``."""
    _check_area(a_hyp)
    r0 = convexity_radius(lambda0)
    return a_hyp * (math.cosh(r0) * math.sinh(r0) + r0)


def volume_bound_taylor(lambda0: float, a_hyp: float) -> float:
    """Truncated expansion ``a_hyp * (2 lambda0 + 4/3 lambda0^3)``."""
    _check_lambda0(lambda0)
    _check_area(a_hyp)
    return a_hyp * (2 * lambda0 + 4.0 / 3.0 * lambda0**3)


def c1_volume_bound(lambda0: float, a_hyp: float) -> float:
    """Volume bound for the radius-one neighborhood: ``a_hyp (sinh(2 r0 + 2) / 2 - r0 - 1)``."""
    _check_area(a_hyp)
    r0 = convexity_radius(lambda0)
    return a_hyp * (0.5 * math.sinh(2 * r0 + 2) - r0 - 1)


def hausdorff_bound(lambda0: float) -> float:
    _check_lambda0(lambda0)
    return 1.0 + lambda0 * lambda0


def burger_canary_bounds(lambda0: float, a_hyp: float, k3: float = DEFAULT_K3) -> tuple[float, float]:
    """``(spectrum_lower_bound, hausdorff_bound_bc) = (k3 / V1^2, 2 - k3 / V1^2)``."""
    if not k3 > 0:
        raise ValueError(f"k3 must be positive, got {k3!r}")
    v1 = c1_volume_bound(lambda0, a_hyp)
    spec = k3 / v1**2
    return spec, 2.0 - spec


@dataclass(frozen=True)
class EstimateReport:
    lambda0: float
    a_hyp: float
    a_hyp_mode: str
    genus: int | None
    r0: float
    vol_bound_exact: float
    vol_bound_taylor: float
    vol_c1_bound: float
    hausdorff_bound_quasicircle: float
    hausdorff_bound_bc: float
    spectrum_lower_bound: float
    k3: float
    near_boundary: bool

    def to_dict(self) -> dict:
        return asdict(self)


def report(lambda0: float, genus: int | None = 2, a_hyp_mode: str = "nominal",
           a_hyp: float | None = None, k3: float = DEFAULT_K3) -> EstimateReport:
    """All bounds for one ``lambda0``.

    ``a_hyp_mode="nominal"`` takes the area from the genus; ``"effective"`` uses
    the supplied ``a_hyp`` (e.g. the effective area of a desk-model surface).
    """
    if a_hyp_mode == "nominal":
        if genus is None:
            raise ValueError("nominal area mode needs a genus")
        area = nominal_area(genus)
    elif a_hyp_mode == "effective":
        if a_hyp is None:
            raise ValueError("effective area mode needs a_hyp")
        area = float(a_hyp)
    else:
        raise ValueError(f"unknown a_hyp_mode {a_hyp_mode!r}")
    _check_lambda0(lambda0)
    spec, dim_bc = burger_canary_bounds(lambda0, area, k3)
    return EstimateReport(
        lambda0=float(lambda0), a_hyp=area, a_hyp_mode=a_hyp_mode, genus=genus,
        r0=convexity_radius(lambda0),
        vol_bound_exact=volume_bound(lambda0, area),
        vol_bound_taylor=volume_bound_taylor(lambda0, area),
        vol_c1_bound=c1_volume_bound(lambda0, area),
        hausdorff_bound_quasicircle=hausdorff_bound(lambda0),
        hausdorff_bound_bc=dim_bc, spectrum_lower_bound=spec, k3=float(k3),
        near_boundary=lambda0 >= NEAR_BOUNDARY)
