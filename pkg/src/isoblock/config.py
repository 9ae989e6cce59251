"""Default numerical settings, in one place.

The CLI's ``--config`` file and flags override these per run.
"""

from dataclasses import asdict, dataclass, fields, replace


@dataclass(frozen=True)
class Tolerances:
    loop_samples: int = 64  # boundary samples per closed curve (n = 2)
    surface_samples: int = 10_000  # boundary samples per surface (n = 3)
    sphere_grid: tuple = (128, 256)  # Kronecker quadrature grid (theta, phi)
    newton_tol: float = 1e-10
    tangency_tol: float = 1e-8
    quadrature_agreement: float = 0.05
    max_refinements: int = 6
    antipodal_tol: float = 1e-6
    isolation_horizon: float = 1.0

    def to_dict(self) -> dict:
        return asdict(self)

    def updated(self, **changes) -> "Tolerances":
        known = {f.name for f in fields(self)}
        return replace(self, **{k: v for k, v in changes.items() if k in known and v is not None})


DEFAULTS = Tolerances()
