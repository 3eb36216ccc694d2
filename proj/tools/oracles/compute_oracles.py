"""High-precision reference values frozen into the C++ unit tests.

Run with `python3 tools/oracles/compute_oracles.py`. Independent of the C++
implementation: uses mpmath at 30 digits and direct 2-D integration.
"""
import mpmath as mp

mp.mp.dps = 30


def phi(x):
    return (1 + mp.erf(x / mp.sqrt(2))) / 2


def radial_density_at_zero(sigma, w_max):
    z = phi(w_max / sigma) - phi(0)
    return 1 / (sigma * z * mp.sqrt(2 * mp.pi))


def collision_probability(d, r_comb, w_max, sigma=1):
    # P(|c - w| < r_comb) with c = (d, 0), w = r (cos t, sin t),
    # r ~ truncated radial Gaussian, t ~ U[0, 2 pi). Integrate the indicator
    # in polar coordinates by locating the radial interval per angle.
    z = phi(w_max / sigma) - phi(0)

    def cdf(r):
        return (phi(r / sigma) - phi(0)) / z

    def inner(t):
        # |(d,0) - r(cos t, sin t)|^2 < R^2  <=>  r^2 - 2 d r cos t + d^2 - R^2 < 0
        disc = (d * mp.cos(t)) ** 2 - (d * d - r_comb * r_comb)
        if disc <= 0:
            return mp.mpf(0)
        lo = d * mp.cos(t) - mp.sqrt(disc)
        hi = d * mp.cos(t) + mp.sqrt(disc)
        lo = min(max(lo, 0), w_max)
        hi = min(max(hi, 0), w_max)
        return cdf(hi) - cdf(lo)

    # breakpoints where the clamps switch help mpmath's quadrature
    pts = [mp.mpf(0)]
    c = (d * d + w_max * w_max - r_comb * r_comb) / (2 * d * w_max)
    if -1 < c < 1:
        pts.append(mp.acos(c))
    if d > r_comb:
        pts.append(mp.asin(r_comb / d))
    pts.append(mp.pi)
    pts = sorted(set(pts))
    return mp.quad(inner, pts) / mp.pi


if __name__ == "__main__":
    print("density(0; sigma=1, w=0.9) =", mp.nstr(radial_density_at_zero(1, 0.9), 20))
    print("density(0; sigma=1, w=0.15) =", mp.nstr(radial_density_at_zero(1, 0.15), 20))
    print("riccati scalar a=.5 b=1 q=1 r=1 :", mp.nstr((mp.mpf(0.25) + mp.sqrt(mp.mpf(0.0625) + 4)) / 2, 20))
    b = mp.e ** mp.mpf("0.1") - 1
    print("B entry e^0.1-1 =", mp.nstr(b, 20))
    print("riccati road system (Q=I,R=0.1I) diag =", mp.nstr((1 + mp.sqrt(1 + 4 * mp.mpf("0.1") / b**2)) / 2, 20))
    for d in ["2.5", "3.0", "3.2", "3.3", "3.5", "3.65"]:
        print("Pcol(d=%s; R=2.8, w=0.9) =" % d,
              mp.nstr(collision_probability(mp.mpf(d), mp.mpf("2.8"), mp.mpf("0.9")), 15))
