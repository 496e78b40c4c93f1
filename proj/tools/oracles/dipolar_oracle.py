"""Independent oracle for the Gaussian dipolar mean-field term.

Evaluates the dipolar energy of an axisymmetric Gaussian density by direct
quadrature of its Fourier-space representation and compares with the
closed form used by the library. Used to freeze golden values in tests.
"""
import mpmath as mp

mp.mp.dps = 40


def dipolar_quadrature(q_rho, q_z):
    # density variances: sigma_rho = q_rho, sigma_z = sqrt(2) q_z
    s_rho2 = mp.mpf(q_rho) ** 2
    s_z2 = 2 * mp.mpf(q_z) ** 2
    f = lambda x: (3 * x * x - 1) / (s_rho2 + (s_z2 - s_rho2) * x * x) ** mp.mpf(1.5)
    return mp.quad(f, [-1, 0, 1]) / (24 * mp.sqrt(mp.pi))


def dipolar_printed(q_rho, q_z):
    qr, qz = mp.mpf(q_rho), mp.mpf(q_z)
    t = qr**2 / (2 * qz**2) - 1
    if t > 0:
        g = mp.atan(mp.sqrt(t)) / mp.sqrt(t)
    else:
        g = mp.atanh(mp.sqrt(-t)) / mp.sqrt(-t)
    num = 1 + qr**2 / qz**2 - 3 * qr**2 * g * mp.sqrt(t if t > 0 else -t) / (qz**2 * 2 * mp.sqrt(t if t > 0 else -t))
    den = 6 * mp.sqrt(2 * mp.pi) * qr**4 * qz * (1 / qz**2 - 2 / qr**2)
    return num / den


def potential_quadrature(q_rho, q_z, gamma_bar, lam, a):
    g_rho = gamma_bar / lam ** (1.0 / 3.0)
    g_z = gamma_bar * lam ** (2.0 / 3.0)
    c = a / (2 * mp.sqrt(2 * mp.pi) * q_rho**2 * q_z)
    return (1 / (2 * q_rho**2) + 2 * g_rho**2 * q_rho**2 + c + 1 / (8 * q_z**2)
            + 2 * g_z**2 * q_z**2 + dipolar_quadrature(q_rho, q_z))


def ground_state_nelder_mead(gamma_bar=3.4e4, lam=6.0, a=0.1):
    """Derivative-free minimization in log coordinates, started near the trap length."""
    import numpy as np
    from scipy.optimize import minimize

    mp.mp.dps = 30
    f = lambda x: float(potential_quadrature(mp.e ** x[0], mp.e ** x[1], gamma_bar, lam, a))
    x0 = np.log([2.0 / np.sqrt(gamma_bar), 0.5 / np.sqrt(gamma_bar)])
    res = minimize(f, x0, method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-12, "maxiter": 4000})
    return np.exp(res.x), res.fun


if __name__ == "__main__":
    (qr, qz), e = ground_state_nelder_mead()
    print("Nelder-Mead ground state", repr(qr), repr(qz), repr(e))
    for qr, qz in [(2, 0.5), (1, 1), (0.3, 2.0), (1.0, 0.1), (1.0, 1 / mp.sqrt(2) * (1 + mp.mpf("1e-3")))]:
        print(qr, qz, mp.nstr(dipolar_quadrature(qr, qz), 20), mp.nstr(dipolar_printed(qr, qz), 20))
