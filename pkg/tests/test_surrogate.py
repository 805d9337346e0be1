import numpy as np
import pytest

from invsizer.errors import NonPhysical, ShapeMismatch
from invsizer.schema import CircuitId, all_schemas, builtin_schema
from invsizer.surrogate import blocks
from invsizer.surrogate import (UNIT_SCALE, monotonicity_contract, simulate, simulate_batch,
                                simulate_composed, surrogate_spec)

ALL = [s.circuit_id for s in all_schemas()]


def _midpoint(circuit):
    s = builtin_schema(circuit)
    return np.array([p.range.values()[len(p.range.values()) // 2] for p in s.parameters])


@pytest.mark.parametrize("circuit", ALL, ids=lambda c: c.value)
def test_simulate_is_deterministic_and_matches_batch(circuit):
    p = _midpoint(circuit)
    a, b = simulate(circuit, p), simulate(circuit, p)
    assert np.array_equal(a, b)
    xb, ok = simulate_batch(circuit, p[None, :])
    assert ok[0] and np.array_equal(xb[0], a)
    assert a.shape == (builtin_schema(circuit).n_metrics,)


@pytest.mark.parametrize("circuit", ALL, ids=lambda c: c.value)
def test_whole_grid_is_physical_with_positive_metrics(circuit):
    s = builtin_schema(circuit)
    x, ok = simulate_batch(circuit, s.grid())
    assert ok.all()
    assert np.isfinite(x).all()
    for j, m in enumerate(s.metrics):
        if m.sign_convention == "strictly-positive":
            assert (x[:, j] > 0).all(), m.name


@pytest.mark.parametrize("circuit", ALL, ids=lambda c: c.value)
def test_monotonicity_contract_over_grid(circuit):
    s = builtin_schema(circuit)
    grid = s.grid()
    x, _ = simulate_batch(circuit, grid)
    triples = monotonicity_contract(circuit)
    assert triples
    shape = [p.range.count for p in s.parameters]
    for param, metric, direction in triples:
        pi, mi = s.parameter_names.index(param), s.metric_names.index(metric)
        cube = x[:, mi].reshape(shape)
        d = np.diff(cube, axis=pi)
        assert ((d > 0) if direction == "increasing" else (d < 0)).all(), (param, metric)


def test_contract_is_read_from_shipped_formula_file():
    spec = surrogate_spec()
    for cid in ALL:
        declared = [(t["parameter"], t["metric"], t["direction"])
                    for t in spec["circuits"][cid.value]["monotonicity"]]
        assert declared == monotonicity_contract(cid)
        assert spec["circuits"][cid.value]["formulas"]


def test_csva_gain_increases_with_load_resistor():
    gains = [simulate("CSVA", [1.5, 0.75, rd, 6.0])[2] for rd in (0.5, 1.0, 2.0, 3.0)]
    assert all(b > a for a, b in zip(gains, gains[1:]))


def test_csva_gate_at_threshold_is_nonphysical():
    vth = surrogate_spec()["circuits"]["CSVA"]["constants"]["vth"]
    with pytest.raises(NonPhysical, match="overdrive"):
        simulate("CSVA", [1.2, vth, 1.0, 5.0])


def test_nonpositive_parameter_is_nonphysical():
    with pytest.raises(NonPhysical):
        simulate("CVA", [1.0, -6.0, 5.0, 5.0])


def test_bad_inputs_raise():
    with pytest.raises(ShapeMismatch):
        simulate("CSVA", [1.2, 0.6, 1.0])
    with pytest.raises(ValueError):
        simulate("CSVA", [1.2, np.nan, 1.0, 5.0])


def test_batch_flags_invalid_rows_instead_of_raising():
    p = np.array([[1.2, 0.6, 1.0, 5.0], [1.2, 0.1, 1.0, 5.0]])
    x, ok = simulate_batch("CSVA", p)
    assert ok.tolist() == [True, False]
    assert np.isfinite(x[0]).all()


def test_noise_is_seeded_and_limited_to_noisy_metrics():
    p = _midpoint("LNA")
    clean = simulate("LNA", p)
    a, b = simulate("LNA", p, noise_seed=3), simulate("LNA", p, noise_seed=3)
    assert np.array_equal(a, b)
    names = builtin_schema("LNA").metric_names
    nf = names.index("noise_figure")
    changed = [i for i in range(len(names)) if a[i] != clean[i]]
    assert changed == [nf]
    assert abs(a[nf] / clean[nf] - 1) < 0.05


def test_receiver_gain_is_sum_of_block_gains_over_grid():
    s = builtin_schema("Receiver")
    x, ok = simulate_batch("Receiver", s.grid())
    n = s.metric_names
    total = x[:, n.index("gain")]
    parts = x[:, n.index("lna_power_gain")] + x[:, n.index("mixer_conversion_gain")] + x[:, n.index("cva_gain")]
    assert np.max(np.abs(total - parts)) <= 1e-9


def test_receiver_noise_figure_follows_friis():
    schema = builtin_schema("Receiver")
    p = _midpoint("Receiver")
    si = [v * UNIT_SCALE[q.unit] for v, q in zip(p, schema.parameters)]
    blocks_spec = surrogate_spec()["circuits"]["Receiver"]["blocks"]
    _, _, lna = blocks.lna(*si[:7], blocks_spec["LNA"])
    _, _, mix = blocks.mixer(*si[7:11], blocks_spec["Mixer"])
    _, _, cva = blocks.cascode_gain_stage(*si[11:], blocks_spec["CVA"])
    f = [lna["noise_factor"], mix["noise_factor"], cva["noise_factor"]]
    g = [lna["gain_linear"], mix["gain_linear"]]
    friis = f[0] + (f[1] - 1) / g[0] + (f[2] - 1) / (g[0] * g[1])
    nf = simulate("Receiver", p)[schema.metric_names.index("noise_figure")]
    assert nf == pytest.approx(10 * np.log10(friis), rel=1e-12)


def test_transmitter_output_power_increases_with_pa_widths():
    s = builtin_schema("Transmitter")
    p = _midpoint("Transmitter")
    out = s.metric_names.index("output_power")
    for name in ("WN3", "WN4"):
        i = s.parameter_names.index(name)
        lo, hi = p.copy(), p.copy()
        lo[i], hi[i] = s.parameters[i].range.begin, s.parameters[i].range.values()[-1]
        assert simulate_composed("Transmitter", hi)[out] > simulate_composed("Transmitter", lo)[out]


def test_mixer_block_failure_propagates():
    s = builtin_schema("Receiver")
    p = s.grid()[0].copy()
    p[s.parameter_names.index("R1")] = 5e3
    with pytest.raises(NonPhysical, match="Mixer"):
        simulate_composed("Receiver", p)


def test_composed_requires_a_system():
    with pytest.raises(ValueError):
        simulate_composed("LNA", _midpoint("LNA"))


def test_metrics_are_smooth_in_the_interior():
    for cid in ALL:
        p = _midpoint(cid)
        for i in range(len(p)):
            h = 1e-6 * abs(p[i])
            up, dn = p.copy(), p.copy()
            up[i] += h
            dn[i] -= h
            d = (simulate(cid, up) - simulate(cid, dn)) / (2 * h)
            assert np.isfinite(d).all(), (cid, i)


def test_system_ids():
    assert {c for c in CircuitId if c.is_system} == {CircuitId.TRANSMITTER, CircuitId.RECEIVER}
