"""Benchmark families, cost assembly, and the instance file format."""

import numpy as np
import pytest

from qmstbound.instances import (DENSITIES, FAMILIES, Instance,
                                 InstanceFormatError, InstanceSpec, generate,
                                 pad_cost, read_instance, write_instance)
from qmstbound.graph import Graph


def test_spec_validation():
    with pytest.raises(ValueError):
        InstanceSpec(family="CP9", n=8)
    with pytest.raises(ValueError):
        InstanceSpec(family="CP1", n=2)
    with pytest.raises(ValueError):
        InstanceSpec(family="CP1", n=8, density=50)
    for fam in ("OPsym", "OPvsym", "OPesym"):
        with pytest.raises(ValueError):
            InstanceSpec(family=fam, n=8, density=67)
        InstanceSpec(family=fam, n=8, density=100)
    with pytest.raises(ValueError):
        InstanceSpec(family="SV", n=8, cmax_off=0.0)


@pytest.mark.parametrize("family,hi_diag,hi_off", [
    ("CP1", 10, 10), ("CP2", 10, 100), ("CP3", 100, 10), ("CP4", 100, 100),
    ("OPsym", 100, 20),
])
def test_uniform_family_ranges(family, hi_diag, hi_off):
    d = 100 if family == "OPsym" else 67
    inst = generate(InstanceSpec(family=family, n=9, density=d, seed=4))
    q = inst.q
    assert np.allclose(q, q.T)
    assert np.array_equal(q, np.round(q))  # integer draws
    dg = np.diagonal(q)
    off = q[~np.eye(inst.m, dtype=bool)]
    assert dg.min() >= 1 and dg.max() <= hi_diag
    assert off.min() >= 1 and off.max() <= hi_off


def test_density_controls_edge_count():
    for d, m_expect in [(33, 15), (67, 30), (100, 45)]:
        inst = generate(InstanceSpec(family="CP1", n=10, density=d, seed=0))
        assert inst.m == m_expect
        assert inst.graph.n == 10


def test_generation_is_deterministic():
    a = generate(InstanceSpec(family="CP2", n=8, density=67, seed=9))
    b = generate(InstanceSpec(family="CP2", n=8, density=67, seed=9))
    assert a.graph.edges == b.graph.edges
    assert np.array_equal(a.q, b.q)
    c = generate(InstanceSpec(family="CP2", n=8, density=67, seed=10))
    assert not np.array_equal(a.q, c.q)


def test_opvsym_costs_factor_into_vertex_weights():
    inst = generate(InstanceSpec(family="OPvsym", n=7, seed=2))
    w = inst.extras["vertex_weights"]
    assert np.array_equal(w, np.round(w)) and w.min() >= 1 and w.max() <= 10
    g = inst.graph
    for e in range(g.m):
        for f in range(e + 1, g.m):
            i, j = g.edges[e]
            k, l = g.edges[f]
            assert inst.q[e, f] == pytest.approx(w[i] * w[j] * w[k] * w[l])
    dg = np.diagonal(inst.q)
    assert dg.min() >= 1 and dg.max() <= 10000


def test_opesym_costs_are_midpoint_distances():
    inst = generate(InstanceSpec(family="OPesym", n=6, seed=3))
    coords = inst.extras["coords"]
    assert coords.shape == (6, 2)
    assert coords.min() >= 0.0 and coords.max() <= 100.0
    g = inst.graph
    mids = np.array([(coords[u] + coords[v]) / 2.0 for u, v in g.edges])
    for e in range(g.m):
        u, v = g.edges[e]
        assert inst.q[e, e] == pytest.approx(np.linalg.norm(coords[u] - coords[v]))
        for f in range(e + 1, g.m):
            assert inst.q[e, f] == pytest.approx(np.linalg.norm(mids[e] - mids[f]))
    # midpoint distances form a metric
    for a in range(0, g.m, 3):
        for b in range(1, g.m, 4):
            for c in range(2, g.m, 5):
                assert inst.q[a, c] <= inst.q[a, b] + inst.q[b, c] + 1e-9


def test_sv_band_structure():
    inst = generate(InstanceSpec(family="SV", n=10, density=100, seed=6,
                                 cmax_diag=50.0, cmax_off=200.0))
    m = inst.m
    high = set(int(h) for h in inst.extras["high_edges"])
    assert len(high) == round(0.1 * m)
    dg = np.diagonal(inst.q)
    assert dg.min() >= 0.0 and dg.max() <= 0.2 * 50.0
    for e in range(m):
        for f in range(e + 1, m):
            band = (e in high) + (f in high)
            lo, hi = [(0.5, 0.7), (0.2, 0.4), (0.9, 1.0)][band]
            v = inst.q[e, f] / 200.0
            assert lo - 1e-12 <= v <= hi + 1e-12, (e, f, band, v)


def test_instance_rejects_bad_cost():
    g = Graph.complete(3)
    with pytest.raises(ValueError):
        Instance(graph=g, q=np.ones((2, 2)))
    bad = np.ones((3, 3))
    bad[0, 1] = 2.0
    with pytest.raises(ValueError):
        Instance(graph=g, q=bad)
    with pytest.raises(ValueError):
        Instance(graph=g, q=np.full((3, 3), np.nan))


def test_pad_cost():
    assert np.array_equal(pad_cost(np.array([[5.0]])), [[5.0, 0.0], [0.0, 0.0]])
    q = np.arange(9.0).reshape(3, 3)
    q = (q + q.T) / 2
    qp = pad_cost(q)
    assert qp.shape == (4, 4)
    assert np.array_equal(qp[:3, :3], q)
    assert np.all(qp[3, :] == 0.0) and np.all(qp[:, 3] == 0.0)
    assert np.linalg.norm(qp) == pytest.approx(np.linalg.norm(q))


def test_write_read_round_trip(tmp_path):
    inst = generate(InstanceSpec(family="CP3", n=7, density=67, seed=5))
    p = tmp_path / "a.qmst"
    write_instance(inst, p)
    back = read_instance(p)
    assert back.n == inst.n and back.m == inst.m
    assert back.graph.edges == inst.graph.edges
    assert np.array_equal(back.q, inst.q)  # %.17g keeps doubles exactly
    assert back.ub is None

    inst.ub = 123.456
    write_instance(inst, p)
    assert read_instance(p).ub == pytest.approx(123.456, abs=0)


def test_read_keeps_file_edge_order(tmp_path):
    p = tmp_path / "o.qmst"
    p.write_text(
        "# non-lexicographic order on purpose\n"
        "QMST 1\n"
        "3 3\n"
        "2 3\n"
        "1 2\n"
        "1 3\n"
        "1 2 3\n"
        "2 4 5\n"
        "3 5 6\n"
    )
    inst = read_instance(p)
    assert inst.graph.edges == ((1, 2), (0, 1), (0, 2))
    assert inst.q[0, 2] == 3.0


def test_read_skips_comments_and_blanks(tmp_path):
    p = tmp_path / "c.qmst"
    p.write_text(
        "# header comment\n"
        "\n"
        "QMST 1\n"
        "# another\n"
        "3 2\n"
        "1 2\n"
        "2 3\n"
        "1 0\n"
        "0 2\n"
    )
    inst = read_instance(p)
    assert inst.m == 2
    assert inst.q[0, 0] == 1.0 and inst.q[1, 1] == 2.0


@pytest.mark.parametrize("body,fragment", [
    ("QMSTX 1\n3 2\n1 2\n2 3\n1 0\n0 1\n", "magic"),
    ("QMST 1\n3 9\n", "end of file"),
    ("QMST 1\n3 2\n1 4\n2 3\n1 0\n0 1\n", "range"),
    ("QMST 1\n3 2\n1 2\n1 2\n1 0\n0 1\n", "duplicate"),
    ("QMST 1\n3 2\n1 2\n2 3\n1 0 7\n0 1\n", "row"),
    ("QMST 1\n3 2\n1 2\n2 3\n1 0\n5 1\n", "symmetric"),
    ("QMST 1\n3 2\n1 2\n2 3\n1 0\n0 1\nextra\n", "trailing"),
])
def test_read_rejects_malformed(tmp_path, body, fragment):
    p = tmp_path / "bad.qmst"
    p.write_text(body)
    with pytest.raises(InstanceFormatError, match=fragment):
        read_instance(p)


def test_read_error_carries_line_number(tmp_path):
    p = tmp_path / "l.qmst"
    p.write_text("# one\nQMST 1\n3 2\n1 2\n9 9\n1 0\n0 1\n")
    with pytest.raises(InstanceFormatError) as exc:
        read_instance(p)
    assert exc.value.line == 5


def test_families_and_densities_constants():
    assert FAMILIES == ("CP1", "CP2", "CP3", "CP4", "OPsym", "OPvsym",
                        "OPesym", "SV")
    assert DENSITIES == (33, 67, 100)
