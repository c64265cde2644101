import json

import numpy as np
import pytest

from resolvent_lab import serialize as ser
from resolvent_lab.gauss import PolyGaussian
from resolvent_lab.levee import CRElement, Generator, Levee
from resolvent_lab.omega import Rate, StructuredPath
from resolvent_lab.report import dumps, emit_report, fmt_float
from resolvent_lab.subspace import AffineSubspace, Subspace


def _element():
    g2 = PolyGaussian.gaussian(np.array([[0.7, 0.1j], [0.1j, 0.4]]), b=[0.2, -0.3j], coeff=1 - 2j,
                               poly={(1, 0): 1.0, (0, 2): 0.5})
    return CRElement(3, [Levee(Subspace.span([1, 1, 0], [0, 0, 1]), g2),
                         Levee(Subspace.zero(3), PolyGaussian.constant(0.25))]) + \
        Generator(2.0, [0.0, 1.0, 1.0]).element()


def test_crelement_round_trip(rng):
    f = _element()
    doc = json.loads(json.dumps(ser.crelement_to_dict(f)))
    back = ser.crelement_from_dict(doc)
    Y = rng.normal(size=(10, 3))
    assert np.allclose(back(Y), f(Y), atol=1e-13)


def test_levee_in_non_orthonormal_basis():
    # profile written against the basis (2, 0): value g(2 y1)
    doc = {"basis": [[2.0, 0.0]], "terms": [{"coeff": [1.0, 0.0], "monomial": [0], "A": [[[0.5, 0.0]]],
                                             "b": [[0.0, 0.0]]}]}
    f = ser.crelement_from_dict([doc])
    assert np.isclose(f(np.array([0.3, 0.7])), np.exp(-0.5 * 0.36))


def test_bare_list_needs_dimension():
    with pytest.raises(ValueError):
        ser.crelement_from_dict([{"basis": [], "terms": [{"coeff": 1.0}]}])
    f = ser.crelement_from_dict([{"basis": [], "terms": [{"coeff": 1.0}]}], 2)
    assert np.isclose(f(np.zeros(2)), 1.0)


def test_dependent_basis_rejected():
    with pytest.raises(ValueError):
        ser.crelement_from_dict([{"basis": [[1.0, 0.0], [2.0, 0.0]], "terms": []}])


def test_path_round_trip():
    p = StructuredPath(AffineSubspace.through(Subspace.span([1.0, 0, 0]), [0, 1.0, 2.0]),
                       ([0, 1.0, 0],), (Rate({1: 1.0, -1: 0.5}, True),))
    q = ser.path_from_dict(json.loads(json.dumps(ser.path_to_dict(p))))
    for i in (3, 4, 100):
        assert np.allclose(q.point(i).offset, p.point(i).offset)
    assert q.rates[0] == p.rates[0]


def test_report_is_deterministic(tmp_path):
    data = {"b": [1.0, float("nan"), 1 + 2j], "a": {"y": True, "x": None}, "c": np.arange(3)}
    assert dumps(data) == dumps(dict(reversed(list(data.items()))))
    assert '"a"' in dumps(data).splitlines()[1]
    assert "null" in dumps(data)
    emit_report({"header": ["x", "y"], "rows": [[0.1, 2]]}, "csv", tmp_path / "r.csv")
    assert (tmp_path / "r.csv").read_text() == f"x,y\n{fmt_float(0.1)},2\n"
    with pytest.raises(ValueError):
        emit_report({}, "xml", tmp_path / "r.xml")
