"""Closed-form first-order circuit models.

Every function here is vectorised over numpy arrays. Inputs are SI
(farads, henries, ohms, volts) except transistor widths, which stay in µm
because the process constants are quoted per micron. Each returns a dict of
metric arrays in the schema's reporting units, a dict of named *margins*
(a point is physical only if every margin is strictly positive) and a dict
of internal quantities that system-level composition needs.
"""
from __future__ import annotations

import numpy as np

BOLTZMANN_T = 1.380649e-23 * 300.0  # kT at 300 K, in joules


def softmin(a, b, p):
    """Smooth minimum ``(a^-p + b^-p)^(-1/p)``; tends to min(a, b) as p grows."""
    return (a ** -p + b ** -p) ** (-1.0 / p)


def db10(x):
    return 10.0 * np.log10(x)


def db20(x):
    return 20.0 * np.log10(x)


def dbm(watts):
    return 10.0 * np.log10(watts / 1e-3)


def parallel(a, b):
    return a * b / (a + b)


def reflection(z, z0):
    return np.abs((z - z0) / (z + z0))


def coupled_input_impedance(w, l1, l2, k, z_load):
    """Impedance at the primary of two coupled inductors loaded on the secondary."""
    m2 = k * k * l1 * l2
    return 1j * w * l1 + (w * w * m2) / (1j * w * l2 + z_load)


# --- voltage amplifiers -------------------------------------------------------

def common_source(vdd, vgate, rd, wn, c):
    """Resistively loaded common-source stage with source degeneration.

    The overdrive ``u`` solves ``vgate - vth = u + I*r_source`` with the
    square-law current, which has a closed-form positive root.
    """
    b = c["kp"] * wn
    a = vgate - c["vth"]
    rs = c["r_source"]
    with np.errstate(invalid="ignore"):
        u = (np.sqrt(1.0 + 2.0 * b * rs * a) - 1.0) / (b * rs)
    i_d = 0.5 * b * u ** 2 * (1.0 + c["lambda"] * vdd)
    gm = b * u
    g_eff = gm / (1.0 + gm * rs)
    ro = 1.0 / (c["lambda"] * i_d)
    rout = parallel(rd, ro)
    c_out = c["c_load"] + c["c_drain"] * wn
    metrics = {
        "dc_power": 1e3 * (vdd * i_d + vdd ** 2 / c["r_bias"]),
        "bandwidth": 1e-9 / (2 * np.pi * rout * c_out),
        "gain": g_eff * rout,
    }
    saturation = vdd - i_d * (rd + rs) - u
    return metrics, {"overdrive": a, "saturation": saturation}, {}


def cascode(rd, wn1, wn2, wn3, c):
    """Cascode amplifier; the input device mirrors a reference diode of width ``wn3``."""
    vdd, lam, kp = c["vdd"], c["lambda"], c["kp"]
    i_d = c["i_ref"] * wn1 / wn3
    vov1 = np.sqrt(2 * c["i_ref"] / (kp * wn3))
    vov2 = np.sqrt(2 * i_d / (kp * wn2))
    gm1 = 2 * i_d / vov1
    gm2 = 2 * i_d / vov2
    ro = 1.0 / (lam * i_d)
    r_cascode = ro * (1.0 + gm2 * ro) + ro
    rout = parallel(rd, r_cascode)
    c_out = c["c_load"] + c["c_drain"] * wn2
    metrics = {
        "dc_power": 1e3 * vdd * (i_d + c["i_ref"]),
        "bandwidth": 1e-9 / (2 * np.pi * rout * c_out),
        "gain": gm1 * rout,
    }
    headroom = vdd - i_d * rd - vov1 - vov2 - c["v_margin"]
    return metrics, {"headroom": headroom}, {}


def two_stage(cc, wp1, wp2, wn1, wn2, wn3, c):
    """Miller-compensated two-stage amplifier with mirrored tail and sink currents."""
    vdd, lam = c["vdd"], c["lambda"]
    kn, kp_p = c["kp_n"], c["kp_p"]
    i_tail = c["i_ref"] * wn3 / c["w_ref"]
    i2 = c["i_ref"] * wn2 / c["w_ref"]
    gm1 = np.sqrt(kn * wn1 * i_tail)
    vov3 = np.sqrt(i_tail / (kp_p * wp1))
    vov6 = np.sqrt(2 * i2 / (kp_p * wp2))
    gm6 = 2 * i2 / vov6
    r1 = 1.0 / (lam * i_tail)
    r2 = 1.0 / (2 * lam * i2)
    a1, a2 = gm1 * r1, gm6 * r2
    c_node = cc * (1.0 + a2) + c["c_gate_p"] * (2 * wp1 + wp2)
    metrics = {
        "dc_power": 1e3 * vdd * (c["i_ref"] + i_tail + i2),
        "bandwidth": 1e-6 / (2 * np.pi * r1 * c_node),
        "gain": a1 * a2,
    }
    vov1 = np.sqrt(i_tail / (kn * wn1))
    vov_tail = np.sqrt(2 * c["i_ref"] / (kn * c["w_ref"]))
    tail_margin = c["v_cm"] - c["vth"] - vov1 - vov_tail
    m1_margin = (vdd - c["vth"] - vov3) - (c["v_cm"] - c["vth"])
    vov7 = np.sqrt(2 * i2 / (kn * wn2))
    swing = vdd - vov6 - vov7
    return metrics, {"tail_headroom": tail_margin, "input_saturation": m1_margin,
                     "output_swing": swing}, {}


# --- RF receive blocks ----------------------------------------------------------

def lna(c_out, c_series, ld, lg, ls, wn1, wn2, c):
    """Inductively degenerated cascode LNA evaluated at its input resonance.

    ``c_series`` is the DC-blocking capacitor in series with the gate, so the
    input loop resonates ``lg + ls`` against ``c_series`` in series with Cgs.
    The output is a parallel tank (``ld`` against ``c_out`` plus drain
    parasitics) loaded by a fixed resistance; detuning between input and
    output resonances costs gain.
    """
    rs = c["r_source"]
    i_d = c["j_bias"] * wn1
    gm = np.sqrt(2 * c["kp"] * wn1 * i_d)
    cgs = c["c_gs"] * wn1
    c_loop = c_series * cgs / (c_series + cgs)
    w = 1.0 / np.sqrt((lg + ls) * c_loop)
    r_lg = w * lg / c["q_gate"]
    w_t = gm / cgs
    r_in = r_lg + w_t * ls
    gm_eff = gm / (w * cgs * (rs + r_in))

    c_tank = c_out + c["c_drain"] * wn2
    r_tank = parallel(c["q_drain"] * np.sqrt(ld / c_tank), c["r_load"])
    y_load = 1.0 / r_tank + 1.0 / (1j * w * ld) + 1j * w * c_tank
    g_t = 4 * rs * gm_eff ** 2 * (1.0 / y_load).real
    noise_factor = 1.0 + r_lg / rs + c["gamma"] * gm * rs * (w / w_t) ** 2
    metrics = {
        "dc_power": 1e3 * c["vdd"] * i_d,
        "bandwidth": 1e-9 / (2 * np.pi * r_tank * c_tank),
        "power_gain": db10(g_t),
        "s11": db20(np.abs(r_in - rs) / (r_in + rs)),
        "noise_figure": db10(noise_factor),
    }
    internals = {"gain_linear": g_t, "noise_factor": noise_factor,
                 "dc_power_w": c["vdd"] * i_d}
    return metrics, {"input_match_offset": np.abs(r_in - rs)}, internals


def mixer(cap, r, wn1, wn2, c):
    """Single-balanced active mixer with an AC-coupled RF transconductor."""
    vdd, kp = c["vdd"], c["kp"]
    i_d = 0.5 * kp * wn1 * c["vov_rf"] ** 2
    gm = kp * wn1 * c["vov_rf"]
    vov_sw = np.sqrt(i_d / (kp * wn2))
    w = 2 * np.pi * c["f_rf"]
    x = w * cap * c["r_in"]
    coupling = x / np.sqrt(1.0 + x * x)
    gain_v = (2.0 / np.pi) * gm * r * coupling
    swing = vdd - 0.5 * i_d * r - c["vov_rf"] - vov_sw - c["v_margin"]
    noise_factor = (np.pi ** 2 / 4) * (1.0 + c["gamma"] / (gm * c["r_source"])
                                       + 1.0 / (gm ** 2 * c["r_source"] * r)) / coupling ** 2
    metrics = {
        "dc_power": 1e3 * vdd * i_d,
        "voltage_swing": swing,
        "conversion_gain": db20(gain_v),
        "noise_figure": db10(noise_factor),
    }
    internals = {"gain_linear": gain_v ** 2, "noise_factor": noise_factor,
                 "dc_power_w": vdd * i_d}
    return metrics, {"headroom": swing}, internals


def cascode_gain_stage(r, wn_in, wn_cas, c):
    """Baseband cascode stage of the receiver; gain reported in dB."""
    i_d = c["j_bias"] * wn_in
    gm1 = np.sqrt(2 * c["kp"] * wn_in * i_d)
    vov1 = 2 * i_d / gm1
    vov2 = np.sqrt(2 * i_d / (c["kp"] * wn_cas))
    gm2 = 2 * i_d / vov2
    ro = 1.0 / (c["lambda"] * i_d)
    rout = parallel(r, ro * (1.0 + gm2 * ro) + ro)
    gain_v = gm1 * rout
    noise_factor = 1.0 + c["gamma"] / (gm1 * c["r_source"]) + 1.0 / (gm1 ** 2 * c["r_source"] * r)
    metrics = {"gain": db20(gain_v)}
    internals = {"gain_linear": gain_v ** 2, "noise_factor": noise_factor,
                 "dc_power_w": c["vdd"] * i_d}
    headroom = c["vdd"] - i_d * r - vov1 - vov2 - c["v_margin"]
    return metrics, {"headroom": headroom}, internals


# --- RF transmit blocks -----------------------------------------------------------

def oscillator(cap, ind, rp, w_pair, w_tail, w_ref, w_var, c):
    """Cross-coupled LC oscillator with an accumulation-varactor tuning range."""
    vdd = c["vdd"]
    i_tail = c["i_ref"] * w_tail / w_ref
    c_fixed = cap + c["c_par"] * w_pair
    c_lo = c_fixed + c["c_var_min"] * w_var
    c_hi = c_fixed + c["c_var_max"] * w_var
    c_mid = 0.5 * (c_lo + c_hi)
    f_lo = 1.0 / (2 * np.pi * np.sqrt(ind * c_hi))
    f_hi = 1.0 / (2 * np.pi * np.sqrt(ind * c_lo))
    w0 = 1.0 / np.sqrt(ind * c_mid)
    r_tank = parallel(rp, c["q_ind"] * w0 * ind)
    gm = np.sqrt(c["kp"] * w_pair * i_tail)
    amp_current = (4.0 / np.pi) * i_tail * r_tank
    amp_voltage = vdd - np.sqrt(2 * i_tail / (c["kp"] * w_tail))
    amplitude = softmin(amp_current, amp_voltage, c["softmin_p"])
    p_tank = amplitude ** 2 / (2 * r_tank)
    q_loaded = r_tank / (w0 * ind)
    noise_factor = 1.0 + c["gamma"] * gm * r_tank
    f0 = w0 / (2 * np.pi)
    ssb = (2 * noise_factor * BOLTZMANN_T / p_tank) * (f0 / (2 * q_loaded * c["f_offset"])) ** 2
    p_out = c["buffer_gain"] * amplitude ** 2 / (2 * c["r_out"])
    metrics = {
        "dc_power": 1e3 * vdd * (i_tail + c["i_ref"]),
        "frequency": 1e-9 * f0,
        "phase_noise": db10(ssb),
        "tuning_range": 100.0 * (f_hi - f_lo) / f0,
        "output_power": dbm(p_out),
    }
    internals = {"amplitude": amplitude, "p_out_w": p_out, "dc_power_w": vdd * (i_tail + c["i_ref"])}
    startup = gm * r_tank - 1.0
    return metrics, {"startup": startup, "voltage_headroom": amp_voltage}, internals


def power_amplifier(lip, lis, lm, lop, los, wn1, wn2, c):
    """Two-stage transformer-coupled PA at a fixed carrier.

    The input and output transformers are treated as impedance transformers
    with ratio ``k^2 * L_primary / L_secondary`` plus a leakage reactance
    ``w * L * (1 - k^2)``. The inter-stage node is a lossy parallel tank of
    ``lm`` against the driver drain and output gate capacitances.
    """
    w = 2 * np.pi * c["f_carrier"]
    z0 = c["z0"]
    vdd, k2 = c["vdd"], c["k_coupling"] ** 2
    i1 = c["j_driver"] * wn1
    i2 = c["j_output"] * wn2
    gm1 = np.sqrt(2 * c["kp"] * wn1 * i1)
    gm2 = np.sqrt(2 * c["kp"] * wn2 * i2)
    r_gate = c["r_gate"] / wn1

    z_in = k2 * (lip / lis) * r_gate + 1j * w * lip * (1.0 - k2)
    gamma_in = reflection(z_in, z0)
    r_load = k2 * (lop / los) * z0
    z_out = k2 * (los / lop) * (c["r_drain"] / wn2) + 1j * w * los * (1.0 - k2)
    gamma_out = reflection(z_out, z0)

    c_is = c["c_drain"] * wn1 + c["c_gate"] * wn2
    y_is = 1.0 / (c["q_ind"] * w * lm) + 1j * (w * c_is - 1.0 / (w * lm))
    z_is = np.abs(1.0 / y_is)

    # available power -> gate voltage across the driver input, then two gm stages
    v_gate_sq = 1.0 / (r_gate * (w * c["c_gate"] * wn1) ** 2)
    core = v_gate_sq * (gm1 * z_is) ** 2 * gm2 ** 2 * r_load
    gain = (1.0 - gamma_in ** 2) * (1.0 - gamma_out ** 2) * core

    v_amp = softmin(vdd - c["v_knee"], i2 * r_load, c["softmin_p"])
    p_sat = 0.5 * v_amp ** 2 / r_load
    p_dc = vdd * (i1 + i2)
    p_in_sat = c["compression"] * p_sat / gain
    metrics = {
        "dc_power": 1e3 * p_dc,
        "s11": db20(gamma_in),
        "s22": db20(gamma_out),
        "power_gain": db10(gain),
        "pae": 100.0 * (p_sat - p_in_sat) / p_dc,
        "drain_efficiency": 100.0 * p_sat / (vdd * i2),
        "p_sat": dbm(p_sat),
    }
    internals = {"gain_linear": gain, "p_sat_w": p_sat, "dc_power_w": p_dc,
                 "bandwidth_ghz": 1e-9 / (2 * np.pi * c["c_drain"] * wn2 * r_load)}
    return metrics, {"gain_above_compression": gain / c["compression"] - 1.0}, internals
