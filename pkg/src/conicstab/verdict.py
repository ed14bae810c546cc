"""Answer types shared by the certification and refutation pipelines."""
from __future__ import annotations

from dataclasses import dataclass, field


class Verdict:
    status = "unknown"


@dataclass
class Certified(Verdict):
    certificate: "ChoiCertificate"
    representation: "DeterminantalRep | None" = None
    route: str = "containment"
    targets: object = None          # the pencil coefficients the certificate contains K in
    status = "certified"


@dataclass
class Refuted(Verdict):
    witness: "Witness"
    diagnostics: dict = field(default_factory=dict)
    status = "refuted"


@dataclass
class Unknown(Verdict):
    diagnostics: dict = field(default_factory=dict)
    status = "unknown"


@dataclass
class NoCounterexample:
    """Sampling found nothing.  Evidence only, never a proof."""

    samples: int
    degree_drops: int = 0
    max_imag_ratio: float = 0.0
    search_runs: int = 0
    status = "no-counterexample"
