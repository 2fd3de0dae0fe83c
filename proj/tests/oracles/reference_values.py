"""Reference values frozen into the C++ test suites.

Every number here is computed with mpmath at 40 significant digits, using
closed forms or tanh-sinh quadrature that share no code with the library.
Run: python3 tests/oracles/reference_values.py
"""
import mpmath as mp

mp.mp.dps = 40


def half_line_laplace(m, lam):
    """ln of int_0^inf exp(lam x - x^m / m) dx."""
    x0 = mp.mpf(lam) ** (1 / mp.mpf(m - 1))
    peak = lam * x0 - x0 ** m / m
    f = lambda x: mp.e ** (lam * x - x ** m / m - peak)
    pts = [0, x0 / 2, x0, 2 * x0 + 10, 4 * x0 + 40, mp.inf]
    return peak + mp.log(mp.quad(f, pts))


def gauss_half(a):
    """int_0^inf exp(-a x^2) dx."""
    return mp.sqrt(mp.pi / a) / 2


def main():
    out = {}
    out["ln_sqrt_2pi"] = mp.log(mp.sqrt(2 * mp.pi))
    out["ln_sqrt_pi_over_2"] = mp.log(mp.sqrt(mp.pi / 2))
    out["ln_K_power2_eps05"] = mp.log(gauss_half(mp.mpf("0.25")))
    out["ln_Z_power2_eps05"] = mp.log(gauss_half(mp.mpf("0.375")))
    out["power_log_2_1_at_e"] = mp.e ** 2 / 2
    out["power_log_2_1_grad_at_e2"] = mp.diff(lambda x: x ** 2 * mp.log(x) / 2, mp.e ** 2)
    out["upper_b_l10_e01"] = mp.log(gauss_half(mp.mpf("0.05"))) + mp.mpf(100) / (2 * mp.mpf("0.9"))
    out["upper_c_l10_e01"] = mp.log(gauss_half(mp.mpf("0.095"))) + (10 / mp.mpf("0.9")) ** 2 / 2
    out["oracle_power2_half_l10"] = half_line_laplace(2, 10)
    out["oracle_power4_half_l16"] = half_line_laplace(4, 16)
    out["oracle_power2_half_l50"] = half_line_laplace(2, 50)
    out["lower_u_l10_e001"] = mp.log(2 * mp.sqrt(mp.mpf("1.99"))) + (mp.mpf("9.9")) ** 2 / 2
    out["levelset_l10_e001"] = 2 * mp.sqrt(mp.mpf("1.99"))
    out["ex31_m2_l10_lower"] = mp.log(mp.sqrt(mp.mpf("2.5"))) + 50
    out["ex31_m2_l10_exact"] = mp.log(mp.sqrt(2 * mp.pi)) + 50
    out["ex31_m2_l10_upper"] = mp.mpf("0.5") + mp.log(mp.sqrt(mp.pi)) + mp.log(10) + 50
    out["lambda0_m3"] = 2 * (mp.mpf(1) / 4) ** (mp.mpf(2) / 3)
    out["kbar_d1_m2_e001"] = 10 * mp.sqrt(mp.pi)
    out["chernoff_exact_x3"] = mp.erfc(3 / mp.sqrt(2)) / 2
    out["chernoff_exact_x22"] = (mp.erfc(2 / mp.sqrt(2)) / 2) ** 2
    # best fixed-form upper bound (methods B and C) for power(2), lambda = 10
    def b(e):
        return mp.log(gauss_half(e / 2)) + 50 / (1 - e)
    def c(e):
        return mp.log(gauss_half((1 - (1 - e) ** 2) / 2)) + 50 / (1 - e) ** 2
    eb = mp.findroot(lambda e: mp.diff(b, e), (mp.mpf("0.001"), mp.mpf("0.1")), solver="bisect", tol=1e-25)
    out["best_upper_b_l10_eps"] = eb
    out["best_upper_b_l10"] = b(eb)
    # free-epsilon lower bound, exact interval measure
    def low(e):
        delta = 50 - 50 * (1 - e) ** 2
        return mp.log(2 * mp.sqrt(2 * delta)) + 50 * (1 - e) ** 2
    el = mp.findroot(lambda e: mp.diff(low, e), (mp.mpf("0.001"), mp.mpf("0.1")), solver="bisect", tol=1e-25)
    out["best_lower_l10_eps"] = el
    out["best_lower_l10"] = low(el)
    # V(lambda): sup over kappa of ln U(kappa/100) - kappa + 50
    def v(k):
        e = k / 100
        delta = 50 - 50 * (1 - e) ** 2
        return mp.log(2 * mp.sqrt(2 * delta)) - k + 50
    kv = mp.findroot(lambda k: mp.diff(v, k), (mp.mpf("0.1"), mp.mpf("2")), solver="bisect", tol=1e-25)
    out["v_bound_l10_kappa"] = kv
    out["v_bound_l10"] = v(kv)
    for m in ["1.5", "2", "3", "4"]:
        mm = mp.mpf(m)
        lam = 100
        mp_ = mm / (mm - 1)
        lnI = half_line_laplace(mm, lam)
        ratio = mp.e ** (lnI - mp.mpf(lam) ** mp_ / mp_) * mp.mpf(lam) ** ((mm - 2) / (2 * mm - 2)) / mp.sqrt(2 * mp.pi / (mm - 1))
        out["fedoryuk_ratio_m" + m] = ratio
    for k, val in out.items():
        print(f"{k:32s} {mp.nstr(val, 17)}")


if __name__ == "__main__":
    main()
