#!/usr/bin/env python3
"""Regenerates the bundled scenario maps (PGM + YAML metadata) and the
endurance-loop scenario file. Deterministic; outputs are committed."""

import math
import os

HERE = os.path.dirname(os.path.abspath(__file__))
MAPS = os.path.join(HERE, "..", "scenarios", "maps")
SCENARIOS = os.path.join(HERE, "..", "scenarios")

FREE, OCC = 254, 0


def write_pgm(path, grid):
    h = len(grid)
    w = len(grid[0])
    with open(path, "wb") as f:
        f.write(b"P5\n%d %d\n255\n" % (w, h))
        for row in grid:
            f.write(bytes(row))


def write_meta(path, resolution):
    with open(path, "w") as f:
        f.write("resolution: %g\n" % resolution)
        f.write("origin: [0.0, 0.0, 0.0]\n")
        f.write("occupied_thresh: 0.65\nfree_thresh: 0.196\n")


def blank(w, h):
    return [[FREE] * w for _ in range(h)]


def rect(grid, x0, y0, x1, y1, value, res):
    """Fill a world-frame rectangle [x0,x1) x [y0,y1). Row 0 is the map top."""
    h = len(grid)
    for cy in range(int(y0 / res), int(math.ceil(y1 / res))):
        for cx in range(int(x0 / res), int(math.ceil(x1 / res))):
            if 0 <= cx < len(grid[0]) and 0 <= cy < h:
                grid[h - 1 - cy][cx] = value


def border(grid, res, t):
    w = len(grid[0]) * res
    h = len(grid) * res
    rect(grid, 0, 0, w, t, OCC, res)
    rect(grid, 0, h - t, w, h, OCC, res)
    rect(grid, 0, 0, t, h, OCC, res)
    rect(grid, w - t, 0, w, h, OCC, res)


def make_smoke():
    res = 0.05
    grid = blank(240, 120)  # 12 x 6 m
    border(grid, res, 0.1)
    write_pgm(os.path.join(MAPS, "smoke.pgm"), grid)
    write_meta(os.path.join(MAPS, "smoke.yaml"), res)


def make_rooms():
    """Two rooms joined by a single 1.2 m corridor."""
    res = 0.1
    grid = blank(160, 80)  # 16 x 8 m
    border(grid, res, 0.2)
    # Dividing walls leaving a corridor at y in [3.4, 4.6], x in [6, 10].
    rect(grid, 6.0, 0.0, 10.0, 3.4, OCC, res)
    rect(grid, 6.0, 4.6, 10.0, 8.0, OCC, res)
    write_pgm(os.path.join(MAPS, "rooms.pgm"), grid)
    write_meta(os.path.join(MAPS, "rooms.yaml"), res)


def make_walled():
    """A room with a sealed chamber whose interior is unreachable."""
    res = 0.1
    grid = blank(120, 80)  # 12 x 8 m
    border(grid, res, 0.2)
    rect(grid, 8.0, 3.0, 11.0, 3.2, OCC, res)
    rect(grid, 8.0, 5.8, 11.0, 6.0, OCC, res)
    rect(grid, 8.0, 3.0, 8.2, 6.0, OCC, res)
    rect(grid, 10.8, 3.0, 11.0, 6.0, OCC, res)
    write_pgm(os.path.join(MAPS, "walled.pgm"), grid)
    write_meta(os.path.join(MAPS, "walled.yaml"), res)


RING_W, RING_H, CORRIDOR = 84.0, 74.0, 4.0
RING_RES = 0.2


def ring_centerline(step):
    """Points every `step` meters along the rectangular centerline starting
    at the bottom-left corner, counter-clockwise. The centerline rectangle is
    (W - c) x (H - c), perimeter 300 m."""
    x0 = y0 = CORRIDOR / 2.0
    x1, y1 = RING_W - CORRIDOR / 2.0, RING_H - CORRIDOR / 2.0
    corners = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
    pts = []
    s = 0.0
    per = 2 * ((x1 - x0) + (y1 - y0))
    while s < per - 1e-6:
        d = s
        for i in range(4):
            ax, ay = corners[i]
            bx, by = corners[(i + 1) % 4]
            seg = math.hypot(bx - ax, by - ay)
            if d <= seg:
                t = d / seg
                heading = math.atan2(by - ay, bx - ax)
                pts.append((ax + t * (bx - ax), ay + t * (by - ay), heading))
                break
            d -= seg
        s += step
    return pts


def make_ring():
    res = RING_RES
    grid = blank(int(RING_W / res), int(RING_H / res))
    border(grid, res, 0.4)
    # Inner block bounded by the corridor.
    rect(grid, CORRIDOR, CORRIDOR, RING_W - CORRIDOR, RING_H - CORRIDOR, OCC, res)
    # Localization features: alcoves notched into the outer wall and pillars
    # on the inner wall, at irregular arc positions.
    import random
    rng = random.Random(12345)
    for (x, y, heading) in ring_centerline(7.3):
        r = rng.random()
        nx, ny = math.sin(heading), -math.cos(heading)  # toward the outer wall
        if r < 0.45:
            # Pillar jutting from the inner wall (opposite the outer normal).
            px, py = x - nx * (CORRIDOR / 2 - 0.3), y - ny * (CORRIDOR / 2 - 0.3)
            rect(grid, px - 0.3, py - 0.3, px + 0.3, py + 0.3, OCC, res)
        elif r < 0.8:
            # Alcove carved into the outer wall.
            ax, ay = x + nx * (CORRIDOR / 2), y + ny * (CORRIDOR / 2)
            rect(grid, ax - 0.5, ay - 0.5, ax + 0.5, ay + 0.5, FREE, res)
    write_pgm(os.path.join(MAPS, "ring.pgm"), grid)
    write_meta(os.path.join(MAPS, "ring.yaml"), res)

    # The scenario: 24 waypoints (12.5 m spacing = 300 m route), 10 laps,
    # 10 patrol agents spread along the ring.
    waypoints = ring_centerline(12.5)
    assert len(waypoints) == 24
    import io
    out = io.StringIO()
    out.write("# 300 m loop, 10 laps, 10 patrol agents.\n")
    out.write("map: {pgm: maps/ring.pgm, meta: maps/ring.yaml}\n")
    out.write("start: [%.3f, %.3f, %.4f]\n" % waypoints[0])
    out.write("footprint_radius: 0.22\n")
    out.write("route:\n")
    for (x, y, th) in waypoints[1:] + [waypoints[0]]:
        out.write("  - [%.3f, %.3f, %.4f]\n" % (x, y, th))
    out.write("laps: 10\n")
    out.write("seed: 7\n")
    out.write("sim_dt: 0.05\n")
    out.write("lidar_rate_hz: 10\n")
    out.write("max_sim_time: 14400\n")
    out.write("waypoint_occupied_timeout: 30\n")
    out.write("limits: {vx_max: 0.45, wz_max: 1.0, ax: 0.5, aw: 1.5}\n")
    out.write("lidar: {beams: 360, fov_deg: 270, max_range: 8.0, sigma: 0.01, mount_height: 0.25}\n")
    out.write("odom_noise: [0.05, 0.005, 0.01, 0.002]\n")
    out.write("global_costmap: {inscribed_radius: 0.22, inflation_radius: 0.6, cost_scaling: 3.0, voxel_size: 0.2, decay_sec: 2.0, z_min: 0.0, z_max: 1.5}\n")
    out.write("local_costmap: {inscribed_radius: 0.22, inflation_radius: 1.0, cost_scaling: 2.0, voxel_size: 0.2, decay_sec: 1.5, z_min: 0.0, z_max: 1.5}\n")
    out.write("local_window: 6.0\n")
    out.write("planner_server: {cost_weight: 3.0}\n")
    out.write("controller_server: {weights: {obstacle: 2.0, path: 1.0, goal: 1.5, speed: 0.5}, xy_tol: 0.45, yaw_tol: 3.15, sim_time: 1.6, sim_dt: 0.2, n_vx: 6, n_wz: 15, lookahead: 0.8, rotate_wz: 0.6}\n")
    out.write("amcl: {particles: 400, noise: [0.08, 0.01, 0.02, 0.005], z_hit: 0.95, z_rand: 0.05, sigma_hit: 0.25, max_dist: 2.0, beam_subsample: 24, update_min_trans: 0.15, update_min_rot: 0.2}\n")
    out.write("initial_spread: {xy: 0.08, yaw: 0.05}\n")
    out.write("recovery_server: {spin_wz: 0.6, clear_throttle_sec: 10.0, spin_target_yaw: 1.57, wait_duration: 3.0}\n")
    out.write("navigator: {tick_period: 0.1, max_recovery_rounds: 4}\n")
    out.write("agents:\n")
    rng = random.Random(99)
    arc = ring_centerline(1.0)
    for k in range(10):
        s = int(rng.random() * len(arc))
        e = (s + 18 + int(rng.random() * 10)) % len(arc)
        (ax, ay, ah) = arc[s]
        (bx, by, _) = arc[e]
        side = 1.0 if rng.random() < 0.5 else -1.0
        off = side * (0.8 + 0.3 * rng.random())
        nx, ny = math.sin(ah), -math.cos(ah)
        ax, ay = ax + nx * off, ay + ny * off
        speed = 0.12 + 0.12 * rng.random()
        dwell = round(4.0 + 6.0 * rng.random(), 1)
        out.write("  - {x: %.3f, y: %.3f, speed: %.2f, radius: 0.3, dwell: %.1f, "
                  "waypoints: [[%.3f, %.3f], [%.3f, %.3f]]}\n"
                  % (ax, ay, speed, dwell, ax, ay, bx, by))
    with open(os.path.join(SCENARIOS, "endurance_loop.yaml"), "w") as f:
        f.write(out.getvalue())


def main():
    os.makedirs(MAPS, exist_ok=True)
    make_smoke()
    make_rooms()
    make_walled()
    make_ring()
    print("wrote maps to", MAPS)


if __name__ == "__main__":
    main()
