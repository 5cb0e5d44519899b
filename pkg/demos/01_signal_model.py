"""Walk through the per-element signal model.

Each surface element splits its incident signal into a transmitted part
sqrt(beta_t)*exp(j*theta_t) and a reflected part sqrt(1-beta_t)*exp(j*theta_r).
This script builds a coefficient set, checks the energy balance, and
composes cascaded channels through a small surface.
"""
import numpy as np

from starsim import StarCoefficients, effective_channel, star_effective_channels

rng = np.random.default_rng(0)
m_elements = 6

coeffs = StarCoefficients(
    beta_t=rng.uniform(0.0, 1.0, m_elements),
    theta_t=rng.uniform(0.0, 2.0 * np.pi, m_elements),
    theta_r=rng.uniform(0.0, 2.0 * np.pi, m_elements),
)

print("per-element energy split (transmitted fraction):")
print(" ", np.round(coeffs.beta_t, 3))
t2 = np.abs(coeffs.transmission_coeffs()) ** 2
r2 = np.abs(coeffs.reflection_coeffs()) ** 2
print("worst |T|^2 + |R|^2 - 1 over elements:", np.max(np.abs(t2 + r2 - 1.0)))
print("(the reflected fraction is derived from the transmitted one, so the")
print(" balance holds by construction, not by optimizer discipline)\n")

# a random two-hop setting: AP with 2 antennas -> surface -> one user per side
G = rng.standard_normal((m_elements, 2)) + 1j * rng.standard_normal((m_elements, 2))
v_t = rng.standard_normal(m_elements) + 1j * rng.standard_normal(m_elements)
v_r = rng.standard_normal(m_elements) + 1j * rng.standard_normal(m_elements)

eff = star_effective_channels(G, v_t, v_r, coeffs)
print("effective transmission-side channel:", np.round(eff.h_t, 3))
print("effective reflection-side channel: ", np.round(eff.h_r, 3))

# a common phase offset on all elements only rotates the cascade
shift = 1.234
h_shifted = effective_channel(G, v_t, coeffs.beta_t, coeffs.theta_t + shift)
rotation = h_shifted / eff.h_t
print("\ncommon phase shift of", shift, "rad rotates the cascade by",
      np.round(np.angle(rotation), 6), "(same on every antenna)")
