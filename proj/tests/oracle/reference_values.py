"""Independent high-precision reference values for the frozen unit-test constants.

Run with: python3 tests/oracle/reference_values.py
Every number printed here is pasted into the C++ tests; nothing in this file
imports or calls the C++ implementation.
"""
import mpmath as mp

mp.mp.dps = 50
C0 = mp.mpf(299792458)
EPS0 = mp.mpf("8.8541878128e-12")


def lossy_sqrt(z):
    s = mp.sqrt(z)
    return -s if mp.im(s) > 0 else s


def i0e(x):
    x = mp.mpf(x)
    return mp.besseli(0, x) * mp.exp(-x)


def fresnel_te(eta, th_deg):
    th = mp.radians(th_deg)
    s = lossy_sqrt(eta - mp.sin(th) ** 2)
    return (mp.cos(th) - s) / (mp.cos(th) + s)


def phase(eta, th_deg, d, f_ghz):
    th = mp.radians(th_deg)
    lam = C0 / (mp.mpf(f_ghz) * 10**9)
    return 2 * mp.pi * d / lam * lossy_sqrt(eta - mp.sin(th) ** 2)


def sli(R, q):
    e = mp.exp(-2j * q)
    return abs(R * (1 - e) / (1 - R * R * e))


def lorentz(p2, p3, p4, f):
    return 1 + p2 / (p3 - p4 * f * f + 1j * f)


def drude(p2, p4, f):
    return 1 - p2 / (p4 - 1j * f)


def empirical(er, sig, f_ghz):
    return er - 1j * sig / (2 * mp.pi * mp.mpf(f_ghz) * 10**9 * EPS0)


def epld(f, th, d, p1, eta):
    x = p1 * f * f * mp.cos(mp.radians(th)) ** 2
    return i0e(x) * sli(fresnel_te(eta, th), phase(eta, th, d, f))


def trend(k, b, f, unit):
    return mp.mpf(10) ** (mp.mpf(k) * mp.mpf(f) / unit + mp.mpf(b))


GLASS = dict(b1="-14.7072", k2="-0.1444", b2="2.9835", k3="0.0767", b3="3.0687", k4="0.0684", b4="-2.4791")
STEEL = dict(b1="-15.0567", b2="4.4962", b4="-1.0056")


def glass_eta(f_ghz):
    # Built-in rows use one model unit (THz) for the trend, eta and roughness.
    g = GLASS
    f = mp.mpf(f_ghz) / 1000
    return lorentz(trend(g["k2"], g["b2"], f, 1), trend(g["k3"], g["b3"], f, 1),
                   trend(g["k4"], g["b4"], f, 1), f)


def glass_epld(f_ghz, th, d):
    f = mp.mpf(f_ghz) / 1000
    x = mp.mpf(10) ** mp.mpf(GLASS["b1"]) * f * f * mp.cos(mp.radians(th)) ** 2
    eta = glass_eta(f_ghz)
    return i0e(x) * sli(fresnel_te(eta, th), phase(eta, th, d, f_ghz))


def steel_epld(f_ghz, th, d):
    f = mp.mpf(f_ghz) / 1000
    eta = drude(mp.mpf(10) ** mp.mpf(STEEL["b2"]), mp.mpf(10) ** mp.mpf(STEEL["b4"]), f)
    x = mp.mpf(10) ** mp.mpf(STEEL["b1"]) * f * f * mp.cos(mp.radians(th)) ** 2
    return i0e(x) * sli(fresnel_te(eta, th), phase(eta, th, d, f_ghz))


def show(name, v):
    if isinstance(v, mp.mpc):
        print(f"{name}: {mp.nstr(mp.re(v), 17)} {mp.nstr(mp.im(v), 17)}")
    else:
        print(f"{name}: {mp.nstr(v, 17)}")


show("empirical(6.31,0.42,350)", empirical(mp.mpf("6.31"), mp.mpf("0.42"), 350))
show("drude steel 350 (GHz unit)", drude(mp.mpf(10) ** mp.mpf("4.4962"), mp.mpf(10) ** mp.mpf("-1.0056"), 350))
show("fresnel(2.25-0.1j,30)", fresnel_te(mp.mpc("2.25", "-0.1"), 30))
show("phase(2.9-0.05j,30,3mm,350)", phase(mp.mpc("2.9", "-0.05"), 30, mp.mpf("0.003"), 350))
show("sli(-0.4+0.05j,1.2-0.3j)", sli(mp.mpc("-0.4", "0.05"), mp.mpc("1.2", "-0.3")))
show("i0e(1)", i0e(1))
show("i0e(100)", i0e(100))
show("rough glass 350/30 (GHz unit)", i0e(mp.mpf(10) ** mp.mpf("-14.7072") * 350**2 * mp.cos(mp.radians(30)) ** 2))
show("baseline(6.31,0.3,350,30,5mm)",
     sli(fresnel_te(empirical(mp.mpf("6.31"), mp.mpf("0.3"), 350), 30),
         phase(empirical(mp.mpf("6.31"), mp.mpf("0.3"), 350), 30, mp.mpf("0.005"), 350)))
show("glass eta 350", glass_eta(350))
show("glass epld 350/30/5mm", glass_epld(350, 30, mp.mpf("0.005")))
show("glass epld 335.5/50/5mm", glass_epld(mp.mpf("335.5"), 50, mp.mpf("0.005")))
show("steel epld 350/30/1mm", steel_epld(350, 30, mp.mpf("0.001")))
