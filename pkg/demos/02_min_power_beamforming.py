"""Exercise the inner minimum-power solvers on fixed effective channels.

The unicast solver serves each user its own stream under SINR targets via
an uplink-downlink duality fixed point; the multicast solver serves one
common stream under per-user SNR targets by candidate enumeration in
span{h_t, h_r}.
"""
import numpy as np

from starsim import (
    multicast_min_power,
    multicast_snrs,
    rate_to_sinr,
    unicast_min_power,
    unicast_sinrs,
)

rng = np.random.default_rng(7)
h_t = rng.standard_normal(2) + 1j * rng.standard_normal(2)
h_r = rng.standard_normal(2) + 1j * rng.standard_normal(2)
sigma2 = 1.0

print("== unicast: independent streams, rates 1.0 and 1.0 bit/s/Hz")
gamma = rate_to_sinr(1.0)
sol = unicast_min_power(h_t, h_r, gamma, gamma, sigma2)
s_t, s_r = unicast_sinrs(h_t, h_r, sol.w_t, sol.w_r, sigma2)
print(f"  minimum power {sol.power_w:.4f} W after {sol.iterations} fixed-point iterations")
print(f"  achieved SINRs: {s_t:.9f}, {s_r:.9f} (both tight at {gamma})")

print("\n== unicast power vs. rate targets")
for rate in (0.5, 1.0, 1.5, 2.0):
    g = rate_to_sinr(rate)
    p = unicast_min_power(h_t, h_r, g, g, sigma2).power_w
    print(f"  rate {rate:.1f} bit/s/Hz -> {p:8.4f} W")

print("\n== multicast: one common stream, rate 2.0 bit/s/Hz")
gamma = rate_to_sinr(2.0)
mc = multicast_min_power(h_t, h_r, gamma, sigma2)
s_t, s_r = multicast_snrs(h_t, h_r, mc.w, sigma2)
print(f"  minimum power {mc.power_w:.4f} W")
print(f"  achieved SNRs: {s_t:.6f}, {s_r:.6f} (target {gamma:.4f};"
      " the binding user is tight)")

print("\n== multicast special cases")
p_same = multicast_min_power([1, 1], [1, 1], 1.0, 1.0).power_w
p_orth = multicast_min_power([1, 0], [0, 1], 1.0, 1.0).power_w
print(f"  identical channels -> matched filter, power {p_same:.3f} W")
print(f"  orthogonal channels -> both constraints tight, power {p_orth:.3f} W")
