#!/usr/bin/env python3
"""Writes the robot, scene and plan files under data/.

Obstacles of the 3-DOF scene are spheres sized so that a tube around the
planned joint path keeps a chosen clearance; the tube covers the corner
cutting of the waypoint switch.
"""

import json
import math
import pathlib

import numpy as np

OUT = pathlib.Path(__file__).resolve().parent.parent / "data"
HALF_PI = math.pi / 2


def pose(xyz=(0, 0, 0), rpy=(0, 0, 0)):
    return {"xyz": [float(v) for v in xyz], "rpy": [float(v) for v in rpy]}


def capsule_x(radius, length):
    """Capsule from the link frame origin along +x."""
    return {"type": "capsule", "radius": radius, "half_length": length / 2,
            "origin": pose((length / 2, 0, 0), (0, HALF_PI, 0))}


def capsule_z(radius, length):
    return {"type": "capsule", "radius": radius, "half_length": length / 2,
            "origin": pose((0, 0, length / 2))}


def box(center, half, name):
    return {"name": name, "shape": {"type": "box", "half_extents": list(half)}, "pose": pose(center)}


def sphere(center, radius, name):
    return {"name": name, "shape": {"type": "sphere", "radius": radius}, "pose": pose(center)}


def write(name, obj):
    OUT.mkdir(exist_ok=True)
    (OUT / name).write_text(json.dumps(obj, indent=2) + "\n")


# --- kinematics mirror used for obstacle sizing -----------------------------

def rot(axis, q):
    axis = np.asarray(axis, float) / np.linalg.norm(axis)
    k = np.array([[0, -axis[2], axis[1]], [axis[2], 0, -axis[0]], [-axis[1], axis[0], 0]])
    return np.eye(3) + math.sin(q) * k + (1 - math.cos(q)) * k @ k


def rpy_matrix(r, p, y):
    return rot((0, 0, 1), y) @ rot((0, 1, 0), p) @ rot((1, 0, 0), r)


def segments(robot, q):
    """World (a, b, radius) of every capsule for configuration q."""
    R, t = np.eye(3), np.zeros(3)
    out = []
    for joint, qi in zip(robot["joints"], q):
        o = joint.get("origin", pose())
        t = t + R @ np.array(o["xyz"])
        R = R @ rpy_matrix(*o["rpy"]) @ rot(joint["axis"], qi)
        for s in joint["shapes"]:
            so = s["origin"]
            Rs = R @ rpy_matrix(*so["rpy"])
            c = t + R @ np.array(so["xyz"])
            h = Rs @ np.array([0, 0, s["half_length"]])
            out.append((c - h, c + h, s["radius"]))
    return out


def point_segment(p, a, b):
    ab = b - a
    u = np.clip(np.dot(p - a, ab) / np.dot(ab, ab), 0, 1)
    return np.linalg.norm(p - (a + u * ab))


def tube(waypoints, start, spread, step=0.01):
    pts = []
    path = [np.array(start)] + [np.array(w) for w in waypoints]
    for a, b in zip(path, path[1:]):
        n = max(2, int(np.linalg.norm(b - a) / step))
        for s in np.linspace(0, 1, n):
            pts.append(a + s * (b - a))
    corners = [np.array(c) for c in np.ndindex(*(3,) * len(start))]
    out = []
    for p in pts:
        for c in corners:
            out.append(p + spread * (c - 1))
    return out


def robot_2dof():
    return {
        "format_version": 1,
        "name": "planar_2dof",
        "joints": [
            {"name": "shoulder", "axis": [0, 0, 1], "lower": -2.8, "upper": 2.8, "max_velocity": 1.0,
             "link": "upper_arm", "shapes": [capsule_x(0.03, 0.5)]},
            {"name": "elbow", "axis": [0, 0, 1], "origin": pose((0.5, 0, 0)), "lower": -2.8, "upper": 2.8,
             "max_velocity": 1.0, "link": "forearm", "shapes": [capsule_x(0.03, 0.4)]},
        ],
    }


def slot_scene(clearance=0.005):
    # A plate in the x-z plane with a horizontal slot; the stretched arm fits
    # with `clearance` above, below and beyond the tip.
    gap = 0.03 + clearance
    tip = 0.9 + 0.03 + clearance
    return {
        "format_version": 1,
        "obstacles": [
            box((0.7, 0, gap + 0.1), (0.5, 0.05, 0.1), "slot_top"),
            box((0.7, 0, -gap - 0.1), (0.5, 0.05, 0.1), "slot_bottom"),
            box(((tip + 1.2) / 2, 0, 0), ((1.2 - tip) / 2, 0.05, gap), "slot_end"),
            box((-0.3, 0.75, 0), (0.1, 0.1, 0.2), "post"),
        ],
    }


def robot_3dof():
    return {
        "format_version": 1,
        "name": "spatial_3dof",
        "joints": [
            {"name": "yaw", "axis": [0, 0, 1], "lower": -2.9, "upper": 2.9, "max_velocity": 1.0,
             "link": "column", "shapes": [capsule_z(0.04, 0.3)]},
            {"name": "shoulder", "axis": [0, 1, 0], "origin": pose((0, 0, 0.3)), "lower": -1.8, "upper": 1.8,
             "max_velocity": 1.0, "link": "upper_arm", "shapes": [capsule_x(0.035, 0.4)]},
            {"name": "elbow", "axis": [0, 1, 0], "origin": pose((0.4, 0, 0)), "lower": -2.5, "upper": 2.5,
             "max_velocity": 1.0, "link": "forearm", "shapes": [capsule_x(0.03, 0.35)]},
        ],
    }


PLAN_3DOF_START = [-1.2, 0.2, 0.8]
PLAN_3DOF = [[-0.6, 0.0, 0.6], [0.0, -0.3, 0.5], [0.6, 0.0, 0.6], [1.2, 0.2, 0.8]]


def eight_obstacle_scene(robot):
    spread = 0.06
    configs = tube(PLAN_3DOF, PLAN_3DOF_START, spread)
    segs = [segments(robot, q) for q in configs]

    def clearance_radius(center, clearance):
        d = min(point_segment(center, a, b) - r for s in segs for (a, b, r) in s)
        return round(d - clearance, 4)

    # (center, clearance) pairs around the sweep; a floor box below.
    anchors = [
        ((0.55, -0.55, 0.05), 0.02),
        ((0.25, -0.2, 0.75), 0.03),
        ((0.75, 0.0, -0.05), 0.015),
        ((0.5, 0.5, 0.6), 0.025),
        ((0.55, 0.55, 0.05), 0.02),
        ((-0.1, 0.5, 0.25), 0.02),
        ((-0.1, -0.5, 0.25), 0.02),
    ]
    lowest = min(min(a[2], b[2]) - r for s in segs for (a, b, r) in s)
    top = round(lowest - 0.03, 3)
    obstacles = [box((0, 0, top - 0.02), (1.5, 1.5, 0.02), "floor")]
    for i, (c, cl) in enumerate(anchors):
        r = clearance_radius(np.array(c, float), cl)
        if r < 0.02:
            raise SystemExit(f"anchor {i} too close to the path (radius {r})")
        obstacles.append(sphere(c, r, f"ball{i}"))
    return {"format_version": 1, "obstacles": obstacles}


def robot_7dof():
    lengths = [0.15, 0.2, 0.2, 0.2, 0.2, 0.1, 0.1]
    radii = [0.05, 0.045, 0.045, 0.04, 0.04, 0.035, 0.035]
    axes = [[0, 0, 1], [0, 1, 0]] * 3 + [[0, 0, 1]]
    joints = []
    for i, (length, r, ax) in enumerate(zip(lengths, radii, axes)):
        j = {"name": f"j{i + 1}", "axis": ax, "lower": -2.6, "upper": 2.6, "max_velocity": 1.0,
             "link": f"link{i + 1}", "shapes": [capsule_z(r, length)]}
        if i > 0:
            j["origin"] = pose((0, 0, lengths[i - 1]))
        joints.append(j)
    return {
        "format_version": 1,
        "name": "chain_7dof",
        "joints": joints,
        "exclusions": [[i, i + 2] for i in range(5)],
        "tool": pose((0, 0, 0.1)),
    }


def scene_7dof():
    return {
        "format_version": 1,
        "obstacles": [
            box((0, 0, -0.08), (1.0, 1.0, 0.02), "table"),
            box((0.55, 0.0, 0.25), (0.05, 0.3, 0.25), "shelf_wall"),
            sphere((0.0, 0.45, 0.6), 0.1, "ball"),
            box((-0.4, -0.35, 0.2), (0.1, 0.1, 0.2), "pillar"),
            {"name": "sweeper", "shape": {"type": "capsule", "radius": 0.05, "half_length": 0.2},
             "schedule": [{"t": 0.0, "pose": pose((-0.5, 0.5, 0.9))},
                          {"t": 5.0, "pose": pose((-0.5, -0.5, 0.9))}]},
        ],
    }


def main():
    r2 = robot_2dof()
    write("robot_2dof.json", r2)
    write("scene_2dof_slot.json", slot_scene())
    write("plan_2dof_slot.json", {
        "format_version": 1,
        "start": [-0.8, 0.6],
        "waypoints": [[-0.5, 0.4], [-0.25, 0.2], [0.0, 0.0]],
        "gain": 2.0, "switch_radius": 0.03, "stall_window": 50, "stall_eps": 0.001,
        "config": {"dt": 0.01, "horizon": 1500, "lambda": 500.0, "eps": 0.1, "beta": 0.05},
    })

    r3 = robot_3dof()
    write("robot_3dof.json", r3)
    write("scene_3dof_eight.json", eight_obstacle_scene(r3))
    write("plan_3dof_eight.json", {
        "format_version": 1,
        "start": PLAN_3DOF_START,
        "waypoints": PLAN_3DOF,
        "gain": 2.0, "switch_radius": 0.05, "stall_window": 50, "stall_eps": 0.001,
        "config": {"dt": 0.01, "horizon": 1500, "lambda": 500.0, "eps": 0.1, "beta": 0.05},
    })

    write("robot_7dof.json", robot_7dof())
    write("scene_7dof.json", scene_7dof())
    write("plan_7dof.json", {
        "format_version": 1,
        "start": [0, 0.6, 0, -1.2, 0, 0.9, 0],
        "waypoints": [[0.8, 0.4, 0, -1.0, 0, 0.8, 0], [1.4, 0.6, 0.2, -1.2, 0, 0.9, 0]],
        "gain": 1.5, "switch_radius": 0.05,
        "config": {"dt": 0.01, "horizon": 1500, "lambda": 500.0, "eps": 0.1, "beta": 0.05},
    })
    write("empty_scene.json", {"format_version": 1, "obstacles": []})


if __name__ == "__main__":
    main()
