#!/usr/bin/env python3
"""Independent oracle for wheel-load, allocation, and envelope constants."""
import numpy as np

M, IZ, LF, LR, TW, HG, CDA, FROLL, G = 900.0, 1100.0, 1.1, 1.2, 1.4, 0.45, 0.40, 0.012, 9.81
L = LF + LR


def axle_loads(ax):
    fzf = M * G * LR / L - M * ax * HG / L
    fzr = M * G * LF / L + M * ax * HG / L
    return fzf, fzr


def wheel_loads(ax, ay, xi_f):
    fzf, fzr = axle_loads(ax)
    dF = M * ay * HG / TW
    w = np.array([
        0.5 * fzf - xi_f * dF,
        0.5 * fzf + xi_f * dF,
        0.5 * fzr - (1 - xi_f) * dF,
        0.5 * fzr + (1 - xi_f) * dF,
    ])
    return np.maximum(w, 0.0)


def rear_force(fxf, pb):
    return fxf * (1 - pb) / pb if fxf < 0 else 0.0


def allocate(fxf, pb, mz, loads, mu):
    fxr = rear_force(fxf, pb)
    fx = np.array([0.5 * fxf, 0.5 * fxf, 0.5 * fxr, 0.5 * fxr])
    if mz != 0.0:
        dF = abs(mz) / (0.5 * TW)
        f, r = (0, 2) if mz > 0 else (1, 3)
        side = loads[f] + loads[r]
        share = loads[f] / side if side > 0 else 0.5
        fx[f] -= dF * share
        fx[r] -= dF * (1 - share)
    fx[2:] = np.minimum(fx[2:], 0.0)
    for w in range(4):
        cap = mu * loads[w]
        if abs(fx[w]) > cap:
            fx[w] = np.copysign(cap, fx[w])
    return fx


def torques(fx, r_wheel=0.30):
    sym = max(fx[0], fx[1], 0.0)
    drive = 2.0 * sym * r_wheel
    tb = np.array([(sym - fx[0]) * r_wheel, (sym - fx[1]) * r_wheel,
                   max(0.0, -fx[2]) * r_wheel, max(0.0, -fx[3]) * r_wheel])
    return drive, tb


def envelope(fxf, pb, loads, mu):
    fxr = rear_force(fxf, pb)
    nominal = np.array([0.5 * fxf, 0.5 * fxf, 0.5 * fxr, 0.5 * fxr])
    cap = np.maximum(0.0, mu * loads - np.abs(nominal))
    return -0.5 * TW * (cap[1] + cap[3]), 0.5 * TW * (cap[0] + cap[2])


def main():
    np.set_printoptions(precision=17)
    print("== wheel loads ax=-5 ay=3 xi=0.55 ==")
    w = wheel_loads(-5.0, 3.0, 0.55)
    print(repr(w), "sum", repr(w.sum()))

    print("== wheel loads clamp ax=-5 ay=12 xi=0.55 ==")
    w2 = wheel_loads(-5.0, 12.0, 0.55)
    print(repr(w2))

    print("== allocate fxf=-3000 pb=0.6 mz=500 mu=0.85, loads(ax=-5,ay=3) ==")
    fx = allocate(-3000.0, 0.6, 500.0, w, 0.85)
    print(repr(fx))
    print("sum", repr(fx.sum()), "expect", repr(-3000.0 - 2000.0 - 500.0 / 0.7))
    mz_real = -0.7 * (fx[0] + fx[2]) + 0.7 * (fx[1] + fx[3])
    print("mz realized", repr(mz_real))

    print("== allocate traction fxf=2000 mz=0 ==")
    fx3 = allocate(2000.0, 0.65, 0.0, wheel_loads(1.0, 0.0, 0.55), 0.85)
    print(repr(fx3), "drive torque", repr((fx3[0] + fx3[1]) * 0.30))

    print("== envelope zero demand, level loads, mu=0.85 ==")
    lo, hi = envelope(0.0, 0.65, wheel_loads(0.0, 0.0, 0.55), 0.85)
    print(repr(lo), repr(hi), "mu*m*g*tw/4 =", repr(0.85 * M * G * TW / 4))

    print("== envelope fxf=-4000 pb=0.65 loads(ax=-4, ay=0) mu=0.85 ==")
    lo2, hi2 = envelope(-4000.0, 0.65, wheel_loads(-4.0, 0.0, 0.55), 0.85)
    print(repr(lo2), repr(hi2))

    print("== mixed traction+Mz fxf=2000 pb=0.65 mz=500 loads(ax=1) mu=0.85 ==")
    wm = wheel_loads(1.0, 0.0, 0.55)
    fxm = allocate(2000.0, 0.65, 500.0, wm, 0.85)
    drive, tb = torques(fxm)
    print(repr(fxm))
    print("drive", repr(drive), "tb", repr(tb))
    print("sum", repr(fxm.sum()), "expect", repr(2000.0 - 500.0 / 0.7))
    print("mz", repr(-0.7 * (fxm[0] + fxm[2]) + 0.7 * (fxm[1] + fxm[3])))


if __name__ == "__main__":
    main()
