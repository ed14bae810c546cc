import json

import numpy as np
import pytest

from conicstab import serialize
from conicstab.cli import main, recheck_certificate
from conicstab.errors import SchemaError
from conicstab.model import DetPoly, MatrixPencil, QuadPoly, psd_pencil

from conftest import FIXTURES


def run(capsys, *args):
    code = main([str(a) for a in args])
    return code, capsys.readouterr()


def test_certify_exit_zero_and_document(tmp_path, capsys):
    out = tmp_path / "cert.json"
    code, io = run(capsys, "certify", FIXTURES / "psd_quadratic_g.json", "--json", out)
    assert code == 0 and "certified" in io.out
    doc = json.loads(out.read_text())
    assert doc["verdict"] == "certified" and doc["certificate"]["verified"]
    report = recheck_certificate(doc["certificate"])
    assert report.passed == doc["certificate"]["verified"]
    assert report.min_eig == doc["certificate"]["min_eig"]


def test_certificate_round_trip_general_pipeline(tmp_path, capsys):
    out = tmp_path / "cert.json"
    code, _ = run(capsys, "certify", FIXTURES / "psd_canonical.json", "--sigma", "+1", "--json", out)
    assert code == 0
    doc = json.loads(out.read_text())
    assert recheck_certificate(doc["certificate"]).passed
    # a tampered document no longer verifies
    doc["certificate"]["blocks"][1][1]["re"][1][1] = -1.0
    assert not recheck_certificate(doc["certificate"]).passed


def test_certify_unknown_exit_three(tmp_path, capsys):
    out = tmp_path / "v.json"
    code, io = run(capsys, "certify", FIXTURES / "lorentz_alternative_pencil.json", "--json", out)
    assert code == 3 and "unknown" in io.out
    doc = json.loads(out.read_text())
    assert doc["diagnostics"]["sigma=+1"]["status"] == "Infeasible"


def test_refute_with_witness(capsys):
    code, io = run(capsys, "refute", FIXTURES / "psd_diagonal_product.json",
                   "--witness", FIXTURES / "witness_identity.json")
    assert code == 2 and "refuted" in io.out
    code, io = run(capsys, "refute", FIXTURES / "psd_canonical.json",
                   "--witness", FIXTURES / "witness_identity.json")
    assert code == 3 and "rejected" in io.out


def test_refute_by_sampling(capsys, tmp_path):
    out = tmp_path / "w.json"
    code, _ = run(capsys, "refute", FIXTURES / "orthant_crossing_lines.json", "--samples", 100, "--json", out)
    assert code == 2
    z = serialize.decode_witness(json.loads(out.read_text())["witness"])
    assert abs(z[0] + z[2] - z[1]) <= 1e-8 * np.linalg.norm(z)


def test_scale(capsys, tmp_path):
    out = tmp_path / "s.json"
    code, io = run(capsys, "scale", FIXTURES / "rotated_psd_target.json", "--json", out)
    assert code == 0
    doc = json.loads(out.read_text())
    assert abs(doc["nu_star"] - 0.5) <= 1e-3 and doc["feasible_at_half"]
    assert recheck_certificate(doc["certificate"]).passed


def test_scale_precondition_failure(capsys):
    code, io = run(capsys, "scale", FIXTURES / "psd_quadratic_g.json", "--cone", "orthant:3")
    assert code == 3 and "ScalingPreconditionError" in io.out


def test_repr(capsys, tmp_path):
    out = tmp_path / "r.json"
    code, io = run(capsys, "repr", FIXTURES / "lorentzian_quadratic_4.json", "--json", out)
    assert code == 0
    doc = json.loads(out.read_text())
    A = np.array([[-15.0, 0, 0, -6], [0, 1, 0, 0], [0, 0, 1, 0], [-6, 0, 0, 0]])
    D = np.array([serialize.decode_matrix(m, "D") for m in doc["pencil"]])
    z = np.array([0.3, -1.2, 0.5, 2.0])
    ell = np.array(doc["ell"]) @ z
    assert np.isclose(np.linalg.det(np.tensordot(z, D, axes=1)), doc["factor"] * ell ** 2 * (z @ A @ z))
    code, io = run(capsys, "repr", FIXTURES / "lorentz_quadratic.json")
    assert code == 0 and "certificate" in io.out


def test_eval(capsys):
    code, io = run(capsys, "eval", FIXTURES / "psd_quadratic_g.json", "--point", "0,0,1")
    assert code == 0
    assert abs(complex(io.out.split("=")[1].strip()) - 8) <= 1e-12
    code, io = run(capsys, "eval", FIXTURES / "psd_lorentz_determinant.json", "--point",
                   f"1+2j,1+1j,{complex(np.sqrt(-3 + 2j))!r}")
    assert abs(complex(io.out.split("=")[1].strip())) <= 1e-9


def test_input_errors(capsys, tmp_path):
    code, io = run(capsys, "certify", tmp_path / "missing.json")
    assert code == 1
    bad = tmp_path / "bad.json"
    bad.write_text('{"kind": "determinantal",\n "n": 3,\n "matrices": [}')
    code, io = run(capsys, "certify", bad)
    assert code == 1 and "line 3" in io.err
    bad.write_text(json.dumps({"kind": "determinantal", "n": 3, "matrices": [[[1.0]]]}))
    code, io = run(capsys, "certify", bad, "--cone", "psd:2")
    assert code == 1 and "matrices" in io.err
    code, io = run(capsys, "certify", FIXTURES / "psd_quadratic_g.json", "--cone", "psd:3")
    assert code == 1 and "--cone" in io.err
    code, io = run(capsys, "eval", FIXTURES / "psd_quadratic_g.json")
    assert code == 1


def test_document_round_trips_exactly(rng):
    B = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    f = DetPoly(MatrixPencil(np.array([B + B.conj().T, np.eye(3)]), np.diag([0.1, 1 / 3, np.pi])))
    doc = json.loads(serialize.dumps(serialize.encode_problem(f)))
    g, K = serialize.decode_problem(doc)
    assert K is None
    assert np.array_equal(g.pencil.coeffs, f.pencil.coeffs)
    assert np.array_equal(g.pencil.constant, f.pencil.constant)
    q = QuadPoly(np.diag([1.0, 2.0, -1 / 7]), [0.1, 0.2, 0.3], 1 / 3)
    q2, K = serialize.decode_problem(json.loads(serialize.dumps(serialize.encode_problem(q, psd_pencil(2)))))
    assert np.array_equal(q2.A, q.A) and q2.c == q.c and K.kind == "psd"


def test_schema_errors_name_fields():
    with pytest.raises(SchemaError, match="kind"):
        serialize.decode_problem({"kind": "cubic", "n": 1})
    with pytest.raises(SchemaError, match=r"matrices\[1\]"):
        serialize.decode_problem({"kind": "determinantal", "n": 2,
                                  "matrices": [[[1.0]], [[1.0, 2.0]]]})
    with pytest.raises(SchemaError, match="cone.name"):
        serialize.decode_cone({"name": "cube", "size": 2})
