"""Reference values frozen into the unit tests, evaluated in 40-digit arithmetic."""
from mpmath import mp, mpf, e, exp, log, sqrt, cos, pi

mp.dps = 40


def regime(l, c, mu_a, mu_s):
    g = exp(l * (mu_a + mu_s))
    T = l / c
    lhs = l * mu_s * g
    omega = log(T * g * c * mu_s) / T
    E = log(g * mu_s * l * e) / T
    return lhs, omega, E


def infsup(l, mu_a, mu_s):
    s = l * (mu_a + mu_s)
    a0 = 1 + sqrt(2) + s
    b0 = sqrt(2) + (1 + s) * exp(s)
    k = (sqrt(2) * e - 1) / (sqrt(2) * e)
    return a0, b0, k / a0, k / b0


def decay_bound(l, c, mu_a, mu_s, t):
    g = exp(l * (mu_a + mu_s))
    T = l / c
    return e * g * (e * g * l * mu_s) ** (t / T - 1)


def v1_const_box(n_theta, width=1, height=1):
    # f = 1: V0 part |Omega| |S|, derivative part 0, boundary part
    # l * sum over sides of side length * sum_k |nu . theta_k| w_k.
    l = sqrt(width**2 + height**2)
    w = 2 * pi / n_theta
    angles = [(2 * k + 1) * pi / n_theta for k in range(n_theta)]
    sx = sum(abs(cos(a)) for a in angles) * w
    sy = sum(abs(cos(a - pi / 2)) for a in angles) * w
    boundary = l * (2 * height * sx + 2 * width * sy)
    return sqrt(width * height * 2 * pi + boundary)


if __name__ == "__main__":
    print("regime l=1 mu_s=0.1:", *[mp.nstr(v, 17) for v in regime(1, 1, 0, mpf("0.1"))])
    print("regime l=1 mu_s=0.5:", mp.nstr(regime(1, 1, 0, mpf("0.5"))[0], 17))
    print("alpha0 beta0 alpha beta l=1 mu_s=0.1:", *[mp.nstr(v, 17) for v in infsup(1, 0, mpf("0.1"))])
    l = sqrt(2)
    print("weak box lhs:", mp.nstr(regime(l, 1, mpf("0.1"), mpf("0.1"))[0], 17))
    for k in (1, 2, 3, 4):
        print(f"weak box decay_bound({k}T):", mp.nstr(decay_bound(l, 1, mpf("0.1"), mpf("0.1"), k * l), 17))
    print("v1_norm(1) box n_theta=8:", mp.nstr(v1_const_box(8), 17))
    print("v1_norm(1) box n_theta=4:", mp.nstr(v1_const_box(4), 17))
