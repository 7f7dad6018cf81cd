"""Independent reference computations used only by the tests."""
import numpy as np
from scipy.integrate import solve_ivp

from nhbattery.core import eval_gain


def reference_dimer(params, t_eval, psi0=(1.0, 0.0), rtol=1e-12, atol=1e-14):
    """Integrate the dimer as four real equations with scipy's DOP853."""

    def rhs(t, y):
        a = complex(y[0], y[1])
        b = complex(y[2], y[3])
        g = eval_gain(params.gain, abs(a))
        da = (-1j * params.omega_a + g) * a - 1j * params.kappa * b
        db = (-1j * params.omega_b - params.gamma) * b - 1j * params.kappa * a
        return [da.real, da.imag, db.real, db.imag]

    a0, b0 = complex(psi0[0]), complex(psi0[1])
    sol = solve_ivp(rhs, (0.0, float(t_eval[-1])), [a0.real, a0.imag, b0.real, b0.imag],
                    method="DOP853", t_eval=t_eval, rtol=rtol, atol=atol)
    y = sol.y
    return y[0] + 1j * y[1], y[2] + 1j * y[3]


def steady_energy(kappa, gamma, g1=3.0, gamma1=0.05, omega0=1.0):
    """E_s from inverting the gain law at g_sat with the eigenmode amplitude ratio."""
    if gamma < kappa:
        return omega0 * (2 * (g1 + gamma1) / (gamma + gamma1) - 1)
    g_sat = kappa ** 2 / gamma
    return omega0 * (kappa / gamma) ** 2 * (2 * (g1 + gamma1) / (g_sat + gamma1) - 1)


def steady_storage(kappa, gamma, g1=3.0, gamma1=0.05, omega0=1.0):
    g_sat = gamma if gamma < kappa else kappa ** 2 / gamma
    return omega0 * (2 * (g1 + gamma1) / (g_sat + gamma1) - 1)


MU0 = 4e-7 * np.pi


def neumann_mutual(a, b, z, n=2048):
    """Mutual inductance of coaxial loops by a double trapezoidal sum of the Neumann integral.

    M = mu0/(4 pi) * oint oint dl1 . dl2 / |r1 - r2|; the integrand is smooth and
    periodic in both angles, so the trapezoidal rule converges geometrically.
    """
    phi = 2 * np.pi * np.arange(n) / n
    total = 0.0
    for chunk in np.array_split(phi, 16):
        d = chunk[:, None] - phi[None, :]
        r = np.sqrt(a * a + b * b + z * z - 2 * a * b * np.cos(d))
        total += np.sum(a * b * np.cos(d) / r)
    return MU0 / (4 * np.pi) * total * (2 * np.pi / n) ** 2


def circuit_modes(cp):
    """Eigenvalues of the linearised circuit state matrix, x = (u_a, u_b, i_a, i_b)."""
    L, M, C = cp.l, cp.m_over_l * cp.l, cp.c
    net = cp.gain_network
    g_a = (net.r_f / net.r_g) / cp.r_b if net is not None else 0.0
    inv = np.linalg.inv(np.array([[L, -M], [-M, L]]))
    A = np.zeros((4, 4))
    A[0, 0] = g_a / C
    A[1, 1] = -1 / (cp.r_b * C)
    A[0, 2] = A[1, 3] = -1 / C
    A[2:, :2] = inv
    lam = np.linalg.eigvals(A)
    return lam[lam.imag > 0]


def char_det(w, g, gamma, kappa, omega0=1.0):
    """det(w I - H) for the dimer Hamiltonian with gain g on A and loss gamma on B."""
    H = np.array([[omega0 + 1j * g, kappa], [kappa, omega0 - 1j * gamma]])
    return abs(np.linalg.det(w * np.eye(2) - H))
