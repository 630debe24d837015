#!/usr/bin/env python3
"""Regenerate the benchmark fixtures under fixtures/.

Network sources:
  three_node  hand-written (parameters listed in the README)
  eight_node  EPANET example network 1 with loop pipes 113 and 122 removed
  anytown     Anytown benchmark model (ASCE TF WDST collection)
  net2, net3  EPANET example networks 2 and 3
  obcl        synthetic 262-junction single-source network (seeded generator)

Flow bounds come from a 168 h extended-period simulation run with WNTR's
EPANET engine. Pump lower bounds are the smallest strictly positive simulated
flow. These numbers are simulation output, not published reference data.

Usage: python3 scripts/make_fixtures.py <dir-with-Net1,Net2,Net3,Anytown.inp>
"""

import math
import random
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
OUT = ROOT / "fixtures"

GPM_PER_M3S = 15850.323141489

# (name, gap) in benchmark order
NETWORKS = [
    ("three_node", "1e-2"),
    ("eight_node", "1e-2"),
    ("anytown", "1e-5"),
    ("net2", "1e-5"),
    ("net3", "2e-3"),
    ("obcl", "8e-2"),
]


def read_lf(path):
    return Path(path).read_text(errors="replace").replace("\r\n", "\n").replace("\r", "\n")


def three_node():
    hs, r, nu = 393.7008, 3.746e-6, 2.59

    def head(q):
        return hs - r * q**nu

    return f"""[TITLE]
Three-node network: reservoir, pump, junction, pipe, tank

[JUNCTIONS]
;ID   Elev   Demand
 2    20     100

[RESERVOIRS]
;ID   Head
 1    10

[TANKS]
;ID   Elev   InitLevel   MinLevel   MaxLevel   Diameter   MinVol
 3    200    50          0          100        50         0

[PIPES]
;ID   Node1   Node2   Length          Diameter   Roughness   MinorLoss   Status
 23   2       3       1448.65786493   12         0.15        0           Open

[PUMPS]
;ID   Node1   Node2   Parameters
 12   1       2       HEAD C1

[CURVES]
;ID   Flow   Head
 C1   0      {hs!r}
 C1   600    {head(600.0)!r}
 C1   1000   {head(1000.0)!r}

[OPTIONS]
 Units      GPM
 Headloss   D-W

[COORDINATES]
 1   0     0
 2   100   0
 3   200   0

[END]
"""


def eight_node(src):
    out = []
    section = None
    for line in read_lf(src).split("\n"):
        s = line.strip()
        if s.startswith("["):
            section = s.upper()
        if section == "[PIPES]" and s and not s.startswith(";") and not s.startswith("["):
            if s.split()[0] in ("113", "122"):
                continue
        if section == "[TITLE]" and s.upper() == "[TITLE]":
            out.append(line)
            out.append(" EPANET example network 1 without loop pipes 113 and 122")
            continue
        out.append(line)
    return "\n".join(out)


def obcl(seed=20210607):
    rng = random.Random(seed)
    nj, extra = 262, 27
    lines = ["[TITLE]", "Synthetic 262-junction single-source network", "", "[JUNCTIONS]",
             ";ID   Elev   Demand   Pattern"]
    for i in range(1, nj + 1):
        lines.append(f" J{i}   {rng.uniform(5, 40):.2f}   {rng.uniform(2, 12):.2f}   P1")
    lines += ["", "[RESERVOIRS]", ";ID   Head", " R1   30", "", "[PIPES]",
              ";ID   Node1   Node2   Length   Diameter   Roughness   MinorLoss   Status"]
    edges = []
    for i in range(2, nj + 1):
        parent = rng.randint(max(1, i - 12), i - 1)
        edges.append((f"J{parent}", f"J{i}"))
    seen = set(edges)
    while len(edges) < nj - 1 + extra:
        a = rng.randint(1, nj)
        b = rng.randint(1, nj)
        if a == b or abs(a - b) > 40:
            continue
        e = (f"J{min(a, b)}", f"J{max(a, b)}")
        if e in seen or (e[1], e[0]) in seen:
            continue
        seen.add(e)
        edges.append(e)
    for k, (a, b) in enumerate(edges, start=1):
        idx = int(b[1:])
        diam = 16 if idx < 20 else (12 if idx < 80 else (8 if idx < 180 else 6))
        lines.append(f" P{k}   {a}   {b}   {rng.uniform(200, 1500):.1f}   {diam}   "
                     f"{rng.choice([100, 110, 120, 130])}   0   Open")
    lines += ["", "[PUMPS]", ";ID   Node1   Node2   Parameters", " PU1   R1   J1   HEAD C1", "",
              "[CURVES]", ";ID   Flow   Head", " C1   0      320", " C1   2500   290", " C1   4500   200",
              "", "[PATTERNS]", " P1   0.6   0.8   1.1   1.3   1.0   0.9", "",
              "[TIMES]", " Duration   168:00", " Hydraulic Timestep   1:00", " Pattern Timestep   4:00", "",
              "[OPTIONS]", " Units   GPM", " Headloss   H-W", "", "[END]", ""]
    return "\n".join(lines)


def simulate_bounds(inp_path):
    import wntr

    wn = wntr.network.WaterNetworkModel(str(inp_path))
    wn.options.time.duration = 168 * 3600
    wn.options.time.hydraulic_timestep = 3600
    wn.options.time.report_timestep = 3600
    res = wntr.sim.EpanetSimulator(wn).run_sim(file_prefix=str(OUT / "_tmp_sim"))
    flows = res.link["flowrate"] * GPM_PER_M3S
    rows = []
    for name in wn.link_name_list:
        link = wn.get_link(name)
        series = flows[name]
        if link.link_type == "Pump":
            positive = series[series > 1e-9]
            lo = float(positive.min()) if len(positive) else 1e-6
            hi = float(series.max())
            hi = max(hi, lo)
        else:
            lo, hi = float(series.min()), float(series.max())
        rows.append((name, lo, hi))
    for p in OUT.glob("_tmp_sim*"):
        p.unlink()
    return rows


def write_bounds(name, rows):
    with open(OUT / f"{name}_bounds.csv", "w", newline="\n") as fh:
        fh.write("link_id,q_min,q_max\n")
        for link, lo, hi in rows:
            fh.write(f"{link},{lo:.17g},{hi:.17g}\n")


def main():
    src = Path(sys.argv[1])
    OUT.mkdir(exist_ok=True)
    texts = {
        "three_node": three_node(),
        "eight_node": eight_node(src / "Net1.inp"),
        "anytown": read_lf(src / "Anytown.inp"),
        "net2": read_lf(src / "Net2.inp"),
        "net3": read_lf(src / "Net3.inp"),
        "obcl": obcl(),
    }
    for name, text in texts.items():
        (OUT / f"{name}.inp").write_text(text, newline="\n")

    # Three-node bounds: pump upper end back-solved from K^M = nu r q^(nu-1) = 0.5023.
    nu, r = 2.59, 3.746e-6
    qmax = (0.5023 / (nu * r)) ** (1.0 / (nu - 1.0))
    for _ in range(50):
        g = nu * r * qmax ** (nu - 1.0) - 0.5023
        dg = nu * (nu - 1.0) * r * qmax ** (nu - 2.0)
        qmax -= g / dg
    write_bounds("three_node", [("23", 0.0, qmax), ("12", 1.0, qmax)])

    for name, _ in NETWORKS[1:]:
        write_bounds(name, simulate_bounds(OUT / f"{name}.inp"))

    with open(OUT / "networks.csv", "w", newline="\n") as fh:
        fh.write("name,inp,bounds,gap\n")
        for name, gap in NETWORKS:
            fh.write(f"{name},{name}.inp,{name}_bounds.csv,{gap}\n")


if __name__ == "__main__":
    main()
