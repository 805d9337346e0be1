"""Map schema-ordered parameter arrays onto the block models."""
from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

import numpy as np

from ..errors import NonPhysical, ShapeMismatch
from ..schema import CircuitId, CircuitSchema, builtin_schema
from . import blocks

UNIT_SCALE = {"V": 1.0, "kΩ": 1e3, "Ω": 1.0, "µm": 1.0,
              "fF": 1e-15, "pF": 1e-12, "nH": 1e-9, "pH": 1e-12}


@lru_cache(maxsize=1)
def surrogate_spec() -> dict:
    """The shipped surrogate description: constants, formulas, monotonicity contract."""
    text = resources.files(__package__).joinpath("surrogate_spec.json").read_text(encoding="utf-8")
    return json.loads(text)


def _constants(circuit: CircuitId, block: str | None = None) -> dict:
    entry = surrogate_spec()["circuits"][circuit.value]
    return entry["blocks"][block] if block else entry["constants"]


def _to_si(schema: CircuitSchema, params: np.ndarray) -> list[np.ndarray]:
    return [params[:, i] * UNIT_SCALE[p.unit] for i, p in enumerate(schema.parameters)]


def _homogeneous(circuit: CircuitId, cols: list[np.ndarray]):
    c = _constants(circuit)
    if circuit is CircuitId.CSVA:
        return blocks.common_source(*cols, c)
    if circuit is CircuitId.CVA:
        return blocks.cascode(*cols, c)
    if circuit is CircuitId.TSVA:
        return blocks.two_stage(*cols, c)
    if circuit is CircuitId.LNA:
        return blocks.lna(*cols, c)
    if circuit is CircuitId.MIXER:
        return blocks.mixer(*cols, c)
    if circuit is CircuitId.VCO:
        cap, ind, rp, w_pair, w_ref, w_tail, w_var = cols
        return blocks.oscillator(cap, ind, rp, w_pair, w_tail, w_ref, w_var, c)
    if circuit is CircuitId.PA:
        return blocks.power_amplifier(*cols, c)
    raise ValueError(f"{circuit.value} is a composed system")


def _transmitter(cols):
    cv = _constants(CircuitId.TRANSMITTER, "VCO")
    cp = _constants(CircuitId.TRANSMITTER, "PA")
    cap, ind, rp, w_pair, w_tail, w_var = cols[:6]
    lip, lis, lop, los, wn3, wn4 = cols[6:]
    mv, gv, iv = blocks.oscillator(cap, ind, rp, w_pair, w_tail, cv["w_ref"], w_var, cv)
    mp, gp, ip = blocks.power_amplifier(lip, lis, cp["l_interstage"], lop, los, wn3, wn4, cp)
    p_sat = ip["p_sat_w"]
    p_out = p_sat * np.tanh(ip["gain_linear"] * iv["p_out_w"] / p_sat)
    metrics = {
        "dc_power": 1e3 * (iv["dc_power_w"] + ip["dc_power_w"]),
        "bandwidth": ip["bandwidth_ghz"],
        "output_power": blocks.dbm(p_out),
        "voltage_swing": iv["amplitude"],
        "vco_phase_noise": mv["phase_noise"],
        "vco_tuning_range": mv["tuning_range"],
        "pa_power_gain": mp["power_gain"],
        "pa_drain_efficiency": mp["drain_efficiency"],
        "pa_pae": mp["pae"],
    }
    margins = {**{f"VCO.{k}": v for k, v in gv.items()}, **{f"PA.{k}": v for k, v in gp.items()}}
    return metrics, margins, {}


def _receiver(cols):
    ml, gl, il = blocks.lna(*cols[:7], _constants(CircuitId.RECEIVER, "LNA"))
    mm, gm, im = blocks.mixer(*cols[7:11], _constants(CircuitId.RECEIVER, "Mixer"))
    mc, gc, ic = blocks.cascode_gain_stage(*cols[11:], _constants(CircuitId.RECEIVER, "CVA"))
    g1, g2 = il["gain_linear"], im["gain_linear"]
    friis = il["noise_factor"] + (im["noise_factor"] - 1.0) / g1 + (ic["noise_factor"] - 1.0) / (g1 * g2)
    metrics = {
        "dc_power": 1e3 * (il["dc_power_w"] + im["dc_power_w"] + ic["dc_power_w"]),
        "gain": ml["power_gain"] + mm["conversion_gain"] + mc["gain"],
        "noise_figure": blocks.db10(friis),
        "lna_power_gain": ml["power_gain"],
        "lna_s11": ml["s11"],
        "lna_noise_figure": ml["noise_figure"],
        "mixer_voltage_swing": mm["voltage_swing"],
        "mixer_conversion_gain": mm["conversion_gain"],
        "cva_gain": mc["gain"],
    }
    margins = {**{f"LNA.{k}": v for k, v in gl.items()}, **{f"Mixer.{k}": v for k, v in gm.items()},
               **{f"CVA.{k}": v for k, v in gc.items()}}
    return metrics, margins, {}


def _evaluate(circuit: CircuitId, params: np.ndarray):
    schema = builtin_schema(circuit)
    cols = _to_si(schema, params)
    with np.errstate(all="ignore"):
        if circuit is CircuitId.TRANSMITTER:
            metrics, margins, _ = _transmitter(cols)
        elif circuit is CircuitId.RECEIVER:
            metrics, margins, _ = _receiver(cols)
        else:
            metrics, margins, _ = _homogeneous(circuit, cols)
    n = params.shape[0]
    x = np.empty((n, schema.n_metrics))
    for j, name in enumerate(schema.metric_names):
        x[:, j] = metrics[name]
    margins = {"positive_parameters": params.min(axis=1),
               **{k: np.broadcast_to(v, (n,)) for k, v in margins.items()}}
    ok = np.isfinite(x).all(axis=1) & np.isfinite(params).all(axis=1)
    for v in margins.values():
        ok &= v > 0
    for j, m in enumerate(schema.metrics):
        if m.sign_convention == "strictly-positive":
            ok &= x[:, j] > 0
    return x, ok, margins


def _add_noise(circuit: CircuitId, x: np.ndarray, noise_seed: int | None) -> np.ndarray:
    if noise_seed is None:
        return x
    spec = surrogate_spec()
    names = builtin_schema(circuit).metric_names
    cols = [names.index(m) for m in spec["circuits"][circuit.value]["noisy_metrics"]]
    if not cols:
        return x
    rng = np.random.default_rng(noise_seed)
    z = rng.standard_normal((x.shape[0], len(cols)))
    x = x.copy()
    x[:, cols] *= 1.0 + spec["noise_sigma_relative"] * z
    return x


def _as_matrix(schema: CircuitSchema, params) -> np.ndarray:
    p = np.asarray(params, dtype=np.float64)
    if p.ndim == 1:
        p = p[None, :]
    if p.ndim != 2 or p.shape[1] != schema.n_parameters:
        raise ShapeMismatch(f"{schema.circuit_id.value} takes {schema.n_parameters} parameters, "
                            f"got array of shape {np.shape(params)}")
    return p


def simulate_batch(circuit: str | CircuitId, params, noise_seed: int | None = None):
    """Simulate many parameter rows at once.

    Returns ``(x, ok)``: the ``(n, n_metrics)`` metric matrix and a boolean
    mask marking physical rows. Rows with ``ok == False`` hold whatever the
    formulas produced (possibly NaN) and must not be used.
    """
    cid = CircuitId.parse(circuit)
    p = _as_matrix(builtin_schema(cid), params)
    x, ok, _ = _evaluate(cid, p)
    return _add_noise(cid, x, noise_seed), ok


def simulate(circuit: str | CircuitId, params, noise_seed: int | None = None) -> np.ndarray:
    """Performance vector for one parameter vector; raises NonPhysical when invalid."""
    cid = CircuitId.parse(circuit)
    schema = builtin_schema(cid)
    p = np.asarray(params, dtype=np.float64)
    if p.ndim != 1:
        raise ShapeMismatch("simulate takes a single parameter vector; use simulate_batch for rows")
    p = _as_matrix(schema, p)
    if not np.isfinite(p).all():
        raise ValueError("parameter vector contains non-finite values")
    x, ok, margins = _evaluate(cid, p)
    if not ok[0]:
        failed = [k for k, v in margins.items() if not v[0] > 0]
        reason = ", ".join(failed) if failed else "non-finite or non-positive metric"
        raise NonPhysical(f"{cid.value}: invalid operating point ({reason})")
    return _add_noise(cid, x, noise_seed)[0]


def simulate_composed(system: str | CircuitId, params, noise_seed: int | None = None) -> np.ndarray:
    """Simulate a heterogeneous system: block surrogates plus the cascade rules."""
    cid = CircuitId.parse(system)
    if not cid.is_system:
        raise ValueError(f"{cid.value} is not a composed system (expected Transmitter or Receiver)")
    return simulate(cid, params, noise_seed)


def monotonicity_contract(circuit: str | CircuitId) -> list[tuple[str, str, str]]:
    """Declared ``(parameter, metric, direction)`` triples for a circuit."""
    entry = surrogate_spec()["circuits"][CircuitId.parse(circuit).value]
    return [(t["parameter"], t["metric"], t["direction"]) for t in entry["monotonicity"]]
