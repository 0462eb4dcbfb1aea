"""Regenerate src/inertia_scope/data/ieee24.json.

Network reactances follow the IEEE RTS-79 24-bus branch table (b = 1/x).
Loads are the RTS bus loads scaled to a 1684 MW system total; the unit
dispatch below is hand-picked to balance that total. Raw inertia constants
grow with unit size and are then scaled by one common factor so the whole
fleet stores 31,525 MWs.

    python scripts/build_ieee24.py
"""

import json
from pathlib import Path

TOTAL_LOAD = 1684.0
TARGET_ENERGY = 31525.0
LOAD_DAMPING = 0.025  # MW/Hz per MW of load (1.5 % per % frequency at 60 Hz)
GOVERNOR_TG = 2.0
# generator step-up transformer, pu on machine base, in series with xd'
XT_GSU = 0.15
# uniform damping: damper_pu = 2 H * rate, so relative swings decay at the same
# rate on every unit and the aggregate frequency is left alone
SWING_DECAY = 1.0  # 1/s
# base-loaded nuclear units and the synchronous condenser carry no droop
UNGOVERNED = {"SC", "U400"}

# (from, to, x_pu); parallel circuits listed twice
BRANCHES = [
    (1, 2, 0.0139), (1, 3, 0.2112), (1, 5, 0.0845), (2, 4, 0.1267), (2, 6, 0.1920),
    (3, 9, 0.1190), (3, 24, 0.0839), (4, 9, 0.1037), (5, 10, 0.0883), (6, 10, 0.0605),
    (7, 8, 0.0614), (8, 9, 0.1651), (8, 10, 0.1651), (9, 11, 0.0839), (9, 12, 0.0839),
    (10, 11, 0.0839), (10, 12, 0.0839), (11, 13, 0.0476), (11, 14, 0.0418),
    (12, 13, 0.0476), (12, 23, 0.0966), (13, 23, 0.0865), (14, 16, 0.0389),
    (15, 16, 0.0173), (15, 21, 0.0490), (15, 21, 0.0490), (15, 24, 0.0519),
    (16, 17, 0.0259), (16, 19, 0.0231), (17, 18, 0.0144), (17, 22, 0.1053),
    (18, 21, 0.0259), (18, 21, 0.0259), (19, 20, 0.0396), (19, 20, 0.0396),
    (20, 23, 0.0216), (20, 23, 0.0216), (21, 22, 0.0678),
]
# lines joining the {1..13} and {14..24} halves
AREA = set(range(14, 25))

RTS_LOAD = {
    1: 108, 2: 97, 3: 180, 4: 74, 5: 71, 6: 136, 7: 125, 8: 171, 9: 175,
    10: 195, 13: 265, 14: 194, 15: 317, 16: 100, 18: 333, 19: 181, 20: 128,
}

# unit class -> (rated MVA, raw H seconds, xd' pu on machine base)
CLASSES = {
    "U12": (15.0, 2.0, 0.25),
    "U20": (25.0, 2.2, 0.25),
    "U50": (60.0, 3.0, 0.30),
    "U76": (95.0, 3.5, 0.28),
    "U100": (120.0, 4.0, 0.30),
    "U155": (190.0, 4.5, 0.30),
    "SC": (200.0, 4.6, 0.30),
    "U197": (235.0, 5.0, 0.30),
    "U350": (410.0, 6.0, 0.32),
    "U400": (470.0, 7.0, 0.32),
}

# (bus, class, dispatch MW)
UNITS = [
    (1, "U20", 10), (1, "U20", 10), (1, "U76", 40), (1, "U76", 40),
    (2, "U20", 10), (2, "U20", 10), (2, "U76", 40), (2, "U76", 40),
    (7, "U100", 40), (7, "U100", 40), (7, "U100", 40),
    (13, "U197", 40), (13, "U197", 40), (13, "U197", 40),
    (14, "SC", 0),
    (15, "U12", 6), (15, "U12", 6), (15, "U12", 6), (15, "U12", 6), (15, "U12", 6),
    (15, "U155", 70),
    (16, "U155", 70),
    (18, "U400", 300),
    (21, "U400", 300),
    (22, "U50", 25), (22, "U50", 25), (22, "U50", 25),
    (22, "U50", 25), (22, "U50", 25), (22, "U50", 25),
    (23, "U155", 62), (23, "U155", 62), (23, "U350", 200),
]


def build() -> dict:
    raw_energy = sum(CLASSES[c][0] * CLASSES[c][1] for _, c, _ in UNITS)
    scale = TARGET_ENERGY / raw_energy

    generators = []
    counters = {}
    for bus, cls, p in UNITS:
        mva, h_raw, xd = CLASSES[cls]
        counters[(bus, cls)] = counters.get((bus, cls), 0) + 1
        generators.append({
            "name": f"G{bus}-{cls}-{counters[(bus, cls)]}",
            "bus": bus,
            "H_s": round(h_raw * scale, 12),
            "S_mva": mva,
            "P_mw": float(p),
            "D_pu": 1.0,
            "xd_pu": round(xd + XT_GSU, 6),
            "damper_pu": round(2.0 * h_raw * scale * SWING_DECAY, 12),
            "governor": None if cls in UNGOVERNED else {"R": 0.05, "Tg_s": GOVERNOR_TG},
            "synchronous": True,
        })

    factor = TOTAL_LOAD / sum(RTS_LOAD.values())
    loads = []
    for bus, p in RTS_LOAD.items():
        loads.append({"bus": bus, "P_mw": round(p * factor, 4)})
    # absorb rounding in the largest load so the total is exact
    drift = TOTAL_LOAD - sum(ld["P_mw"] for ld in loads)
    loads[-3]["P_mw"] = round(loads[-3]["P_mw"] + drift, 4)
    for ld in loads:
        ld["Df_mw_per_hz"] = round(LOAD_DAMPING * ld["P_mw"], 6)

    branches = [
        {"from": a, "to": b, "b_pu": round(1.0 / x, 6), "boundary": (a in AREA) != (b in AREA)}
        for a, b, x in BRANCHES
    ]
    return {
        "name": "ieee24",
        "f0_hz": 60.0,
        "base_mva": 100.0,
        "buses": [{"id": i} for i in range(1, 25)],
        "generators": generators,
        "branches": branches,
        "loads": loads,
        "meta": {
            "description": "IEEE RTS 24-bus topology, 33 units incl. synchronous condenser at bus 14",
            "h_scale_factor": scale,
            "raw_kinetic_energy_mws": raw_energy,
            "target_kinetic_energy_mws": TARGET_ENERGY,
            "load_scale_factor": factor,
            "boundary_area": sorted(AREA),
            "governor_tg_s": GOVERNOR_TG,
            "gsu_reactance_pu": XT_GSU,
            "swing_decay_per_s": SWING_DECAY,
        },
    }


if __name__ == "__main__":
    out = Path(__file__).resolve().parents[1] / "src" / "inertia_scope" / "data" / "ieee24.json"
    out.write_text(json.dumps(build(), indent=1) + "\n")
    print(f"wrote {out}")
