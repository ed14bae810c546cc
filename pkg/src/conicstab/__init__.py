"""Certificates and counterexamples for conic stability of polynomials."""
from .certify import (ChoiCertificate, certify, certify_determinantal, certify_quadratic,
                      extract_determinantal_rep, scale_certify, stability_shortcuts,
                      verify_certificate)
from .model import (ConeSpec, DetPoly, MatrixPencil, QuadPoly, custom_cone, lorentz_pencil,
                    orthant_pencil, psd_pencil)
from .refute import Witness, check_witness, hyperbolicity_sample, minimize_interior_zero
from .verdict import Certified, NoCounterexample, Refuted, Unknown

__all__ = [
    "ChoiCertificate", "certify", "certify_determinantal", "certify_quadratic",
    "extract_determinantal_rep", "scale_certify", "stability_shortcuts", "verify_certificate",
    "ConeSpec", "DetPoly", "MatrixPencil", "QuadPoly", "custom_cone", "lorentz_pencil",
    "orthant_pencil", "psd_pencil", "Witness", "check_witness", "hyperbolicity_sample",
    "minimize_interior_zero", "Certified", "NoCounterexample", "Refuted", "Unknown",
]
