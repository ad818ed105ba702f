"""Independent high-precision reference chain used to freeze expected values.

Written directly from the link equations with mpmath and no code shared with
the package. Slow, so tests call it sparingly.
"""

import mpmath as mp

mp.mp.dps = 40

LAMBDA = mp.mpf("1.55e-6")
P_TX = mp.mpf("10e-3")
D_RX = 2 * mp.sqrt(mp.mpf("95e-4") / mp.pi)
D_TX = 2 * mp.sqrt(mp.mpf("9e-4") / mp.pi)
R_RX = D_RX / 2
L_SYS = mp.mpf("0.5")
SENS = mp.mpf("0.9")
Q_E = mp.mpf("1.602e-19")
K_B = mp.mpf("1.38e-23")
TEMP = mp.mpf(298)
GAIN = mp.mpf(10)
EXCESS = mp.mpf("3.2")
BW = mp.mpf("1e9")
R_LOAD = mp.mpf(50)


def q_tail(x):
    """Gaussian tail by direct quadrature of the density."""
    x = mp.mpf(x)
    if x < 0:
        return 1 - q_tail(-x)
    # shift u = x + t so the integrand peaks at t = 0 with width ~ 1/x
    scale = 1 / max(x, mp.mpf(1))
    knots = [0, scale, 4 * scale, 16 * scale, mp.inf]
    body = mp.quad(lambda t: mp.exp(-x * t - t * t / 2), knots)
    return mp.exp(-x * x / 2) * body / mp.sqrt(2 * mp.pi)


def q_exp(v_km, lam_um):
    v = mp.mpf(v_km)
    if v >= 50:
        return mp.mpf("1.6")
    if v >= 6:
        return mp.mpf("1.3")
    if v >= 1:
        return mp.mpf("0.16") * v + mp.mpf("0.34")
    if v > mp.mpf("0.015"):
        return mp.mpf("0.1428") * mp.mpf(lam_um) - mp.mpf("0.0947")
    return mp.mpf(0)


def fog_db_per_km(v_km, lam_um=mp.mpf("1.55")):
    return 17 / mp.mpf(v_km) * (mp.mpf(lam_um) / mp.mpf("0.55")) ** (-q_exp(v_km, lam_um))


def snr(p_w):
    p = mp.mpf(p_w)
    shot = 2 * Q_E * GAIN * (GAIN * SENS * p) * EXCESS * BW
    thermal = 4 * K_B * TEMP * BW / R_LOAD
    return (SENS * p) ** 2 / (shot + thermal)


def required_power(ber):
    """Closed-form inverse: solve (S P)^2 = g (a P + b) for the positive root."""
    x = mp.findroot(lambda t: q_tail(t) - mp.mpf(ber), 6)
    g = x * x
    a = 2 * Q_E * GAIN * GAIN * SENS * EXCESS * BW
    b = 4 * K_B * TEMP * BW / R_LOAD
    s2 = SENS**2
    return (g * a + mp.sqrt((g * a) ** 2 + 4 * s2 * g * b)) / (2 * s2)


def dbm(p_w):
    return 10 * mp.log10(mp.mpf(p_w) * 1000)


def power_dbm(axial_m, full_div, v_km):
    """Received power with fog at axial range, geometric loss clamped at one."""
    r = mp.mpf(axial_m)
    th = mp.mpf(full_div)
    g_tx = 32 / th**2
    g_rx = (mp.pi * D_RX / LAMBDA) ** 2
    l_geo = min(mp.mpf(1), (D_RX / (D_TX + th * r)) ** 2)
    p = P_TX * g_tx * g_rx * (LAMBDA / (4 * mp.pi * r)) ** 2 * l_geo * L_SYS
    return dbm(p) - fog_db_per_km(v_km) * r / 1000


def adaptive_div(axial_m):
    slant = mp.sqrt(mp.mpf(axial_m) ** 2 + R_RX**2)
    return 2 * mp.asin(R_RX / slant)


def threshold(v_km, mode, lo=75, hi=2000):
    req = dbm(required_power(mp.mpf("1e-9")))

    def margin(r):
        th = mp.mpf("1e-3") if mode == "fixed" else adaptive_div(r)
        return power_dbm(r, th, v_km) - req

    if margin(hi) >= 0:
        return mp.mpf(hi)
    return mp.findroot(margin, (mp.mpf(lo), mp.mpf(hi)), solver="bisect")
