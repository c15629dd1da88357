#!/usr/bin/env python3
"""Offline generator for the bundled zero files.

Zeta zeros come from mpmath.zetazero. Dirichlet L-function zeros for the real
primitive characters mod 3, 4, 5 are located as sign changes of the Hardy-type
function Z(t) = exp(i theta(t)) L(1/2 + it, chi), which is real because these
characters have root number 1, and refined with the Illinois method. Each scan
is checked against the smooth zero count theta(T)/pi + 1 at the end height.

Usage: python3 generate.py [outdir]
"""
import os
import sys
import time

import mpmath as mp

mp.mp.dps = 20
TARGET = 1000

CHARS = {
    # label: (modulus, values on 0..q-1, parity a)
    "dirichlet_3": (3, [0, 1, -1], 1),
    "dirichlet_4": (4, [0, 1, 0, -1], 1),
    "dirichlet_5": (5, [0, 1, -1, -1, 1], 0),
}


def theta(t, q, a):
    s = mp.mpc(0.25 + a / 2.0, t / 2.0)
    return mp.im(mp.loggamma(s)) + (t / 2.0) * mp.log(q / mp.pi)


def hardy_z(t, q, vals, a):
    v = mp.dirichlet(mp.mpc(0.5, t), vals) * mp.expj(theta(t, q, a))
    return float(mp.re(v))


def refine(f, lo, hi, flo, fhi):
    side = 0
    for _ in range(60):
        mid = (lo * fhi - hi * flo) / (fhi - flo)
        fm = f(mid)
        if fm == 0.0 or hi - lo < 1e-11:
            return mid
        if (fm > 0) == (fhi > 0):
            hi, fhi = mid, fm
            if side == -1:
                flo /= 2
            side = -1
        else:
            lo, flo = mid, fm
            if side == 1:
                fhi /= 2
            side = 1
    return 0.5 * (lo + hi)


def scan(label, q, vals, a, log):
    f = lambda t: hardy_z(t, q, vals, a)
    zeros = []
    t = 0.5
    ft = f(t)
    while len(zeros) < TARGET + 5:
        spacing = 2 * mp.pi / mp.log(max(q * t / (2 * mp.pi), 3.0))
        step = float(spacing) / 8.0
        u = t + step
        fu = f(u)
        if (ft > 0) != (fu > 0):
            zeros.append(refine(f, t, u, ft, fu))
            if len(zeros) % 100 == 0:
                log(f"{label}: {len(zeros)} zeros, t = {u:.3f}")
        t, ft = u, fu
    zeros = zeros[:TARGET + 1]
    height = float(int((zeros[TARGET - 1] + zeros[TARGET]) / 2 * 1000)) / 1000
    kept = [z for z in zeros if z <= height]
    smooth = float(theta(height, q, a) / mp.pi) + 1.0
    log(f"{label}: height {height}, found {len(kept)}, smooth count {smooth:.2f}")
    return kept, height


def write(path, label, log_a, height, zeros, source):
    with open(path, "w") as fh:
        fh.write(f"# label: {label}\n")
        fh.write(f"# logA: {log_a:.15f}\n")
        fh.write("# degree: 1\n")
        fh.write(f"# height: {height:.3f}\n")
        fh.write("# central_multiplicity: 0\n")
        fh.write(f"# source: {source}\n")
        for z in zeros:
            fh.write(f"{z:.9f} 1\n")


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else os.path.dirname(os.path.abspath(__file__))
    logf = open(os.path.join(out, "generate.log"), "a")

    def log(msg):
        line = f"[{time.strftime('%H:%M:%S')}] {msg}"
        print(line, flush=True)
        logf.write(line + "\n")
        logf.flush()

    zz = []
    for n in range(1, TARGET + 2):
        zz.append(float(mp.im(mp.zetazero(n))))
        if n % 100 == 0:
            log(f"zeta: {n} zeros")
    height = float(int((zz[TARGET - 1] + zz[TARGET]) / 2 * 1000)) / 1000
    write(os.path.join(out, "zeta.zeros"), "zeta", 0.0, height, zz[:TARGET],
          "mpmath.zetazero")

    for label, (q, vals, a) in CHARS.items():
        zeros, height = scan(label, q, vals, a, log)
        write(os.path.join(out, f"{label}.zeros"), label, float(mp.log(q)), height,
              zeros, "mpmath.dirichlet Hardy-Z sign changes, Illinois refinement")
    log("done")


if __name__ == "__main__":
    main()
