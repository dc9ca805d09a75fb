"""Compiled inner loops.

Everything here is plain IEEE arithmetic with fastmath off, so float32
operations round exactly as numpy's do. Accumulation orders are explicit.
"""

import numpy as np
from numba import njit

QNAN_BITS = 0x7E00
POS_INF_BITS = 0x7C00
MIN_NORMAL_F32 = 0x38800000
# |f32 bits| at or above this rounds past 65504 (65520 is the tie, which goes up)
OVERFLOW_F32 = 0x477FF000


@njit(cache=True)
def encode1(x):
    """float32 bit pattern (as int) -> binary16 bit pattern, round to nearest even."""
    sign = (x >> 16) & 0x8000
    a = x & 0x7FFFFFFF
    if a > 0x7F800000:
        return QNAN_BITS
    if a >= OVERFLOW_F32:
        return sign | POS_INF_BITS
    if a >= MIN_NORMAL_F32:
        # rebias 127 -> 15 and drop 13 mantissa bits, ties to even
        return sign | ((a - (112 << 23) + 0xFFF + ((a >> 13) & 1)) >> 13)
    # subnormal or zero: value * 2**24 rounded to an integer
    e = a >> 23
    shift = 126 - e
    if shift > 24:
        return sign
    m = (a & 0x7FFFFF) | 0x800000
    q = m >> shift
    rem = m & ((1 << shift) - 1)
    half = 1 << (shift - 1)
    if rem > half or (rem == half and (q & 1) == 1):
        q += 1
    return sign | q


@njit(cache=True)
def encode(bits32, out):
    for i in range(bits32.size):
        out[i] = encode1(np.int64(bits32[i]))


@njit(cache=True)
def mma16(a_bits, b_bits, c, half_mode, table, out, out_bits):
    """out = a @ b + c; products exact in float32, ascending-k float32 sums,
    c added last, one rounding to binary16 when half_mode."""
    av = np.empty((16, 16), np.float32)
    bv = np.empty((16, 16), np.float32)
    for i in range(16):
        for j in range(16):
            av[i, j] = table[a_bits[i, j]]
            bv[i, j] = table[b_bits[i, j]]
    for i in range(16):
        for j in range(16):
            acc = np.float32(0.0)
            for k in range(16):
                acc = acc + av[i, k] * bv[k, j]
            out[i, j] = acc + c[i, j]
    if half_mode:
        raw = out.view(np.uint32)
        for i in range(16):
            for j in range(16):
                h = encode1(np.int64(raw[i, j]))
                out_bits[i, j] = h
                out[i, j] = table[h]


@njit(cache=True)
def shuffle_tree(lanes, out):
    """lanes: (rows, 32) float32. Five shuffle-down rounds; out[r] = lane 0."""
    buf = np.empty(32, np.float32)
    nxt = np.empty(32, np.float32)
    for r in range(lanes.shape[0]):
        for i in range(32):
            buf[i] = lanes[r, i]
        off = 16
        while off >= 1:
            for i in range(32):
                src = i + off
                nxt[i] = buf[i] + (buf[src] if src < 32 else buf[i])
            for i in range(32):
                buf[i] = nxt[i]
            off //= 2
        out[r] = buf[0]


@njit(cache=True)
def pair_terms(world, sites, d0, depth, weight, cap, min_dist, energy, grad):
    """Per-atom energy and dE/dposition of the capped 12-6 site wells."""
    n = world.shape[0]
    m = sites.shape[0]
    for a in range(n):
        e_sum = 0.0
        gx = 0.0
        gy = 0.0
        gz = 0.0
        for s in range(m):
            dx = world[a, 0] - sites[s, 0]
            dy = world[a, 1] - sites[s, 1]
            dz = world[a, 2] - sites[s, 2]
            dist = np.sqrt(dx * dx + dy * dy + dz * dz)
            dc = max(dist, min_dist)
            sc = weight[a] * depth[s]
            r = d0[s] / dc
            s6 = r * r * r * r * r * r
            s12 = s6 * s6
            raw = sc * (s12 - 2.0 * s6)
            draw = sc * (-12.0 * s12 + 12.0 * s6) / dc
            if raw > 0.0:
                th = np.tanh(raw / cap)
                e = cap * th
                de = draw * (1.0 - th * th)
            else:
                e = raw
                de = draw
            e_sum += e
            if dist > min_dist:
                f = de / dc
                gx += f * dx
                gy += f * dy
                gz += f * dz
        energy[a] = e_sum
        grad[a, 0] = gx
        grad[a, 1] = gy
        grad[a, 2] = gz


@njit(cache=True)
def atom_records(local, tors, tors_axes, angles, rot, trans, sites, d0, depth, weight,
                 cap, min_dist, rec, group_torque):
    """Pose the ligand and fill per-atom (E, dE/dp, torque) records.

    Torsion k rotates its atoms by angles[k] about tors_axes[k] (through the
    ligand origin), then ``rot`` and ``trans`` place the ligand. Torques are
    about ``trans``; group_torque[k] sums them over torsion k's atoms.
    """
    n = local.shape[0]
    world = np.empty((n, 3))
    for a in range(n):
        px = local[a, 0]
        py = local[a, 1]
        pz = local[a, 2]
        k = tors[a]
        if k >= 0:
            x = tors_axes[k, 0]
            y = tors_axes[k, 1]
            z = tors_axes[k, 2]
            c = np.cos(angles[k])
            s = np.sin(angles[k])
            # Rodrigues: p c + (k x p) s + k (k.p)(1 - c)
            dot = x * px + y * py + z * pz
            cx = y * pz - z * py
            cy = z * px - x * pz
            cz = x * py - y * px
            px, py, pz = (px * c + cx * s + x * dot * (1.0 - c),
                          py * c + cy * s + y * dot * (1.0 - c),
                          pz * c + cz * s + z * dot * (1.0 - c))
        for i in range(3):
            world[a, i] = rot[i, 0] * px + rot[i, 1] * py + rot[i, 2] * pz + trans[i]
    energy = np.empty(n)
    grad = np.empty((n, 3))
    pair_terms(world, sites, d0, depth, weight, cap, min_dist, energy, grad)
    group_torque[:, :] = 0.0
    for a in range(n):
        rx = world[a, 0] - trans[0]
        ry = world[a, 1] - trans[1]
        rz = world[a, 2] - trans[2]
        gx = grad[a, 0]
        gy = grad[a, 1]
        gz = grad[a, 2]
        rec[a, 0] = energy[a]
        rec[a, 1] = gx
        rec[a, 2] = gy
        rec[a, 3] = gz
        rec[a, 4] = ry * gz - rz * gy
        rec[a, 5] = rz * gx - rx * gz
        rec[a, 6] = rx * gy - ry * gx
        k = tors[a]
        if k >= 0:
            for i in range(3):
                group_torque[k, i] += rec[a, 4 + i]
    return world


@njit(cache=True)
def reduce4_tiles(staged, p_bits, q_bits, half_mode, table, out):
    """Sum (x, y, z, e) records staged back to back (64 per tile) with MMAs.

    Each tile is a column-major 16x16 load; V += A P per tile, then
    W = Q half(V). out[r] = W[r, 0].
    """
    chunks = staged.size // 256
    a = np.empty((16, 16), np.uint16)
    v = np.zeros((16, 16), np.float32)
    v_next = np.empty((16, 16), np.float32)
    v_bits = np.empty((16, 16), np.uint16)
    for c in range(chunks):
        base = c * 256
        for j in range(16):
            for i in range(16):
                a[i, j] = encode1(np.int64(staged.view(np.uint32)[base + 16 * j + i]))
        mma16(a, p_bits, v, half_mode, table, v_next, v_bits)
        v[:, :] = v_next
    if not half_mode:
        raw = v.view(np.uint32)
        for i in range(16):
            for j in range(16):
                v_bits[i, j] = encode1(np.int64(raw[i, j]))
    zero = np.zeros((16, 16), np.float32)
    w = np.empty((16, 16), np.float32)
    w_bits = np.empty((16, 16), np.uint16)
    mma16(q_bits, v_bits, zero, half_mode, table, w, w_bits)
    for r in range(4):
        out[r] = w[r, 0]
