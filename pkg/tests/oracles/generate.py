"""Regenerate frozen.json from closed forms and an independent ODE formulation.

Deliberately does not import the package under test.

    python3 tests/oracles/generate.py
"""

import json
from pathlib import Path

import numpy as np
from scipy.integrate import solve_ivp

HERE = Path(__file__).resolve().parent


def aggregate_rocof():
    E, dP, f0 = 31525.0, 52.56, 60.0
    return {"energy_mws": E, "dP_mw": dP, "f0_hz": f0, "rocof_hzps": -dP * f0 / (2 * E)}


def butterworth():
    fc, n, f = 0.5, 2, 5.0
    mag = 1.0 / np.sqrt(1.0 + (f / fc) ** (2 * n))
    return {"corner_hz": fc, "order": n, "probe_hz": f, "gain_db": 20 * np.log10(mag)}


def exponential():
    # f(t) = f0 - A (1 - exp(-t / tau)); slope at onset -A / tau
    A, tau = 0.5, 2.0
    return {"f0_hz": 60.0, "A_hz": A, "tau_s": tau, "slope_hzps": -A / tau}


def three_bus():
    """Kron-reduced two-machine model after a 20 MW load increase at bus 3."""
    case = json.loads((HERE / "three_bus.json").read_text())
    f0, base = case["f0_hz"], case["base_mva"]
    gens = case["generators"]
    m, n = len(gens), len(case["buses"])
    idx = {b["id"]: i for i, b in enumerate(case["buses"])}

    Ybus = np.zeros((n, n))
    for br in case["branches"]:
        i, j, b = idx[br["from"]], idx[br["to"]], br["b_pu"] * base
        Ybus[[i, j], [i, j]] += b
        Ybus[i, j] -= b
        Ybus[j, i] -= b
    K = np.array([g["S_mva"] / g["xd_pu"] for g in gens])
    C = np.zeros((n, m))
    for k, g in enumerate(gens):
        C[idx[g["bus"]], k] = K[k]
    Ybb = Ybus + np.diag(C.sum(axis=1))
    Z = np.linalg.inv(Ybb)
    Bred = np.diag(K) - C.T @ Z @ C  # dPe / d delta
    Lp = C.T @ Z  # dPe / d p = -Lp

    H = np.array([g["H_s"] for g in gens])
    S = np.array([g["S_mva"] for g in gens])
    M = 2 * H * S / f0
    D = np.array([g["D_pu"] for g in gens]) * S / f0
    Dw = np.array([g["damper_pu"] for g in gens]) * S / f0
    w = H * S / (H * S).sum()
    gov = [g["governor"] for g in gens]
    gain = np.array([S[k] / (gv["R"] * f0) if gv else 0.0 for k, gv in enumerate(gov)])
    Tg = np.array([gv["Tg_s"] if gv else 1.0 for gv in gov])
    has = np.array([gv is not None for gv in gov], dtype=float)

    dp = np.zeros(n)
    dp[idx[3]] = -20.0

    def rhs(t, y):
        d, df, pm = y[:m], y[m:2 * m], y[2 * m:]
        dPe = Bred @ d - Lp @ dp
        coi = w @ df
        ddf = (pm - dPe - D * df - Dw * (df - coi)) / M
        dpm = has * (-gain * df - pm) / Tg
        return np.concatenate([2 * np.pi * df, ddf, dpm])

    t_eval = [0.1, 0.5, 1.0, 2.0, 4.0, 8.0]
    sol = solve_ivp(rhs, (0.0, 8.0), np.zeros(3 * m), method="DOP853",
                    rtol=1e-12, atol=1e-14, t_eval=t_eval)
    df = sol.y[m:2 * m]
    return {
        "event": {"t_s": 1.0, "bus": 3, "dP_mw": -20.0},
        "t_after_event_s": t_eval,
        "machine_freq_hz": (f0 + df).T.tolist(),
        "coi_freq_hz": (f0 + w @ df).tolist(),
        "initial_rocof_hzps": -20.0 * f0 / (2 * (H * S).sum()),
    }


def main():
    out = {"aggregate_rocof": aggregate_rocof(), "butterworth": butterworth(), "exponential": exponential(), "three_bus": three_bus()}
    path = HERE / "frozen.json"
    path.write_text(json.dumps(out, indent=1, sort_keys=True) + "\n")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
