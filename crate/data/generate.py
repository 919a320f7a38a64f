#!/usr/bin/env python3
"""Regenerates the demo trajectory, corridor and scenario files in this directory.

The reference is a chain of quintic Hermite segments (position, velocity and
acceleration matched at every joint) flown at 1 m/s and 1 m altitude:
accelerate along +x, cruise, turn onto a 45 degree diagonal, cruise, turn
back to +x, cruise and stop. The corridor is one convex polyhedron per leg.
"""

import json
import math
from pathlib import Path

import numpy as np

HERE = Path(__file__).resolve().parent
Z = 1.0
S = math.sqrt(0.5)


def quintic(p0, v0, a0, p1, v1, a1, T):
    """Ascending coefficients of the quintic matching the end conditions."""
    M = np.array(
        [
            [1, 0, 0, 0, 0, 0],
            [0, 1, 0, 0, 0, 0],
            [0, 0, 2, 0, 0, 0],
            [1, T, T**2, T**3, T**4, T**5],
            [0, 1, 2 * T, 3 * T**2, 4 * T**3, 5 * T**4],
            [0, 0, 2, 6 * T, 12 * T**2, 20 * T**3],
        ],
        dtype=float,
    )
    c = np.linalg.solve(M, np.array([p0, v0, a0, p1, v1, a1], dtype=float))
    c[np.abs(c) < 1e-13] = 0.0
    return [float(v) for v in c]


def segment(p0, v0, p1, v1, T, corridor_index):
    axes = {}
    for k, name in enumerate("xyz"):
        axes[name] = quintic(p0[k], v0[k], 0.0, p1[k], v1[k], 0.0, T)
    return {"duration": T, "corridor_index": corridor_index, "coeffs": axes}


def arc_end(start, heading, turn, speed, T):
    """End point of a constant-speed circular turn by `turn` radians."""
    length = speed * T
    r = length / abs(turn)
    h0 = heading
    h1 = heading + turn
    side = math.copysign(1.0, turn)
    cx = start[0] - side * r * math.sin(h0)
    cy = start[1] + side * r * math.cos(h0)
    return (cx + side * r * math.sin(h1), cy - side * r * math.cos(h1), Z)


def reference():
    legs = []
    p = (0.0, 0.0, Z)
    rest = (0.0, 0.0, 0.0)
    east = (1.0, 0.0, 0.0)
    diag = (S, S, 0.0)

    # 0: accelerate to 1 m/s over 2 s (1 m); 1: cruise 8 s.
    p1 = (1.0, 0.0, Z)
    legs.append((p, rest, p1, east, 2.0, 0))
    p2 = (9.0, 0.0, Z)
    legs.append((p1, east, p2, east, 8.0, 0))
    # 2: turn left onto the diagonal over 2 s.
    p3 = arc_end(p2, 0.0, math.pi / 4, 1.0, 2.0)
    legs.append((p2, east, p3, diag, 2.0, 1))
    # 3: diagonal cruise 6 s.
    p4 = (p3[0] + 6 * S, p3[1] + 6 * S, Z)
    legs.append((p3, diag, p4, diag, 6.0, 2))
    # 4: turn right back to +x over 2 s.
    p5 = arc_end(p4, math.pi / 4, -math.pi / 4, 1.0, 2.0)
    legs.append((p4, diag, p5, east, 2.0, 3))
    # 5: cruise 4 s; 6: stop over 2 s (1 m).
    p6 = (p5[0] + 4.0, p5[1], Z)
    legs.append((p5, east, p6, east, 4.0, 4))
    p7 = (p6[0] + 1.0, p6[1], Z)
    legs.append((p6, east, p7, rest, 2.0, 4))

    segments = [segment(*leg) for leg in legs]
    joints = [p, p1, p2, p3, p4, p5, p6, p7]
    return {"t0": 0.0, "segments": segments}, joints


def face(normal, offset):
    return {"normal": [float(v) for v in normal], "offset": float(offset)}


def box(lo, hi):
    faces = []
    for k in range(3):
        n = [0.0, 0.0, 0.0]
        n[k] = 1.0
        faces.append(face(n, hi[k]))
        n = [0.0, 0.0, 0.0]
        n[k] = -1.0
        faces.append(face(n, -lo[k]))
    return {"faces": faces}


def slab(start, end, half_width, extend):
    """Box around the planar segment start-end, rotated into its heading."""
    d = np.array(end[:2]) - np.array(start[:2])
    d /= np.linalg.norm(d)
    n = np.array([-d[1], d[0]])
    s2, e2 = np.array(start[:2]), np.array(end[:2])
    faces = [
        face((d[0], d[1], 0.0), d @ e2 + extend),
        face((-d[0], -d[1], 0.0), -(d @ s2) + extend),
        face((n[0], n[1], 0.0), n @ s2 + half_width),
        face((-n[0], -n[1], 0.0), -(n @ s2) + half_width),
        face((0.0, 0.0, 1.0), Z + 0.3),
        face((0.0, 0.0, -1.0), -(Z - 0.3)),
    ]
    return {"faces": faces}


def corridor(j):
    zlo, zhi = Z - 0.3, Z + 0.3
    return {
        "polyhedra": [
            # Narrow straight section: the wind scenario pushes across it.
            box((-0.5, -0.3, zlo), (9.4, 0.3, zhi)),
            box((8.6, -0.5, zlo), (11.4, 1.4, zhi)),
            slab(j[3], j[4], 0.5, 0.8),
            box((j[4][0] - 0.6, j[4][1] - 0.6, zlo), (j[5][0] + 0.6, j[5][1] + 0.5, zhi)),
            box((j[5][0] - 0.5, j[5][1] - 0.4, zlo), (j[7][0] + 0.6, j[7][1] + 0.4, zhi)),
        ]
    }


MPCC = {"N": 20, "dt": 0.05, "rho": 0.0001}
# Filtered velocity-residual estimate fed to the controller.
ESTIMATOR_GAIN = 0.3


def scenario(name, disturbances, **extra):
    sc = {
        "name": name,
        "trajectory": "demo_trajectory.json",
        "corridor": "demo_corridor.json",
        "mpcc": MPCC,
        "start": {"position": [0.0, 0.0, Z], "velocity": [0.0, 0.0, 0.0]},
        "disturbances": disturbances,
        "duration_s": 30.0,
        "seed": 7,
        "estimator_gain": ESTIMATOR_GAIN,
    }
    sc.update(extra)
    return sc


# 0.5 m/s kick across the diagonal leg at mid-flight, to the right of travel.
IMPULSE = {"kind": "impulse", "start": 13.0, "duration": 0.05, "accel": [10 * S, -10 * S, 0.0]}
WIND = {"kind": "wind", "start": 4.0, "duration": 4.0, "accel": [0.0, 1.5, 0.0]}
BLOCKING = {"kind": "wind", "start": 4.0, "duration": 30.0, "accel": [0.0, 20.0, 0.0]}


def write(name, obj):
    (HERE / name).write_text(json.dumps(obj, indent=2) + "\n")


def main():
    traj, joints = reference()
    corr = corridor(joints)
    write("demo_trajectory.json", traj)
    write("demo_corridor.json", corr)
    write("nominal.json", scenario("nominal", []))
    write("impulse.json", scenario("impulse", [IMPULSE]))
    write("wind.json", scenario("wind", [WIND]))
    write("wind_baseline.json", scenario("wind_baseline", [WIND], controller="baseline"))
    write("blocking_wind.json", scenario("blocking_wind", [BLOCKING]))

    # Broken inputs for the validator and CLI error paths.
    gap = json.loads(json.dumps(corr))
    gap["polyhedra"][2] = slab(
        (joints[3][0] + 1.5, joints[3][1] + 1.5, Z), (joints[4][0], joints[4][1], Z), 0.5, 0.0
    )
    write("bad_corridor_gap.json", gap)
    jump = json.loads(json.dumps(traj))
    for seg in jump["segments"][2:]:
        seg["coeffs"]["y"][0] += 0.2
    write("bad_trajectory_jump.json", jump)
    outside = scenario("start_outside", [])
    outside["start"]["position"] = [2.0, 0.8, Z]
    write("bad_start_outside.json", outside)


if __name__ == "__main__":
    main()
