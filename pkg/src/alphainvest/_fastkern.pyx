# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loop for the wealth-procedure Monte-Carlo harness.

Specialized to the z-family streams the table experiments use: each test is a
single-sample right-tailed z-test, and the best-power curve comes from a
simple alternative at a standardized shift. The pure-Python twin lives in
alphainvest._purekern; alphainvest.backend picks one at import.
"""
from libc.math cimport erfc, sqrt, log, exp, pow, fabs

cdef double SQRT2 = 1.4142135623730951
cdef double DEPLETION_FLOOR = 1e-12


cdef inline double _phi(double x) nogil:
    return 0.5 * erfc(-x / SQRT2)


cdef double _ndtri(double p) nogil:
    # Wichura's AS241 (PPND16): double-precision normal quantile
    cdef double q, r, num, den
    q = p - 0.5
    if fabs(q) <= 0.425:
        r = 0.180625 - q * q
        num = (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                    6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                  1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
                1.3314166789178437745e2) * r + 3.3871328727963666080e0)
        den = (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                    3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                  5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
                4.2313330701600911252e1) * r + 1.0)
        return q * num / den
    if q < 0:
        r = p
    else:
        r = 1.0 - p
    r = sqrt(-log(r))
    if r <= 5.0:
        r -= 1.6
        num = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                    2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                  3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
                4.63033784615654529590e0) * r + 1.42343711074968357734e0)
        den = (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                    1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                  6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
                2.05319162663775882187e0) * r + 1.0)
    else:
        r -= 5.0
        num = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                    1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                  2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
                5.46378491116411436990e0) * r + 6.65790464350110377720e0)
        den = (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                    1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                  1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                5.99832206555887937690e-1) * r + 1.0)
    if q < 0:
        return -num / den
    return num / den


cdef inline double _rho_bar(double level, double shift) nogil:
    return _phi(shift + _ndtri(level))


cdef double _ero_g(double a, double cost, double shift) nogil:
    return cost / a - cost / _rho_bar(a, shift) - 1.0


cdef int _ero_solve(double cost, double shift, double alpha,
                    double *level_out, double *reward_out) nogil:
    cdef double lower, upper, ratio, prev, x, val, lo, hi, mid, level
    cdef int i
    upper = cost / (1.0 - alpha)
    if upper > 1.0 - 1e-8:
        upper = 1.0 - 1e-8
    lower = 1e-8
    if lower > upper * 1e-6:
        lower = upper * 1e-6
    while _ero_g(lower, cost, shift) < 0.0:
        lower *= 1e-6
        if lower < 1e-300:
            return -1
    ratio = pow(upper / lower, 1.0 / 63.0)
    prev = lower
    lo = -1.0
    hi = -1.0
    x = lower
    for i in range(1, 64):
        x = lower * pow(ratio, i)
        val = _ero_g(x, cost, shift)
        if val <= 0.0:
            lo = prev
            hi = x
            break
        prev = x
    if lo < 0.0:
        return -1
    for i in range(200):
        if hi - lo <= 1e-14 * hi:
            break
        mid = 0.5 * (lo + hi)
        if _ero_g(mid, cost, shift) > 0.0:
            lo = mid
        else:
            hi = mid
    level = 0.5 * (lo + hi)
    level_out[0] = level
    reward_out[0] = cost / level + alpha - 1.0
    return 0


def norm_cdf(double x):
    return _phi(x)


def norm_quantile(double p):
    if not 0.0 < p < 1.0:
        raise ValueError("p must be in (0, 1)")
    return _ndtri(p)


def ero_level_z(double cost, double shift, double alpha):
    """Knee level/reward for a z-test with simple alternative at `shift`."""
    cdef double level, reward
    if _ero_solve(cost, shift, alpha, &level, &reward) != 0:
        raise RuntimeError("no sign change found for the knee equation")
    return level, reward


# kind codes
KIND_ALPHA_SPENDING = 0
KIND_ALPHA_INVESTING = 1
KIND_ASR = 2
KIND_ERO = 3
# scheme codes
SCHEME_CONSTANT = 0
SCHEME_RELATIVE = 1
SCHEME_RELATIVE_FIXED_M = 2


def run_one(int kind, int scheme, double alpha, double eta, double k,
            double omega, double fraction, double stop_threshold, int fixed_m,
            double shift, double[:] p_values, double[:] thetas):
    """Run one realization of a procedure over a z-test stream.

    Returns (tests, true_rejects, false_rejects). `shift` is the standardized
    alternative used for the best-power curve; `thetas` carries the true means
    (0 for true nulls).
    """
    cdef double w0, w, c, level, charge, reward, rho
    cdef int n = p_values.shape[0]
    cdef int j = 0
    cdef int tests = 0, true_rej = 0, false_rej = 0
    cdef bint rejected

    if kind == KIND_ASR:
        w0 = alpha * eta / k
    elif kind == KIND_ALPHA_SPENDING:
        w0 = alpha * eta / (1.0 - alpha)
    else:
        w0 = alpha * eta
    w = w0

    while True:
        if scheme == SCHEME_RELATIVE_FIXED_M:
            if tests >= fixed_m:
                break
        elif scheme == SCHEME_RELATIVE:
            if w < w0 * stop_threshold:
                break
        else:
            if w <= DEPLETION_FLOOR:
                break
        if j >= n:
            raise RuntimeError("stream exhausted before the stopping condition")

        if scheme == SCHEME_CONSTANT:
            c = w0 * fraction
            if c > w:
                c = w
        else:
            c = w * fraction

        if kind == KIND_ALPHA_SPENDING:
            level = c
            charge = c
            reward = 0.0
        elif kind == KIND_ALPHA_INVESTING:
            level = c / (1.0 + c)
            charge = c
            reward = c + omega
        elif kind == KIND_ASR:
            level = c
            charge = c
            rho = _rho_bar(level, shift)
            reward = level / rho + alpha / k
            if reward > 1.0 - (1.0 - alpha) / k:
                reward = 1.0 - (1.0 - alpha) / k
            if reward < 0.0:
                reward = 0.0
        else:
            charge = c
            if _ero_solve(c, shift, alpha, &level, &reward) != 0:
                raise RuntimeError("no sign change found for the knee equation")

        rejected = p_values[j] <= level
        w = w - charge + (reward if rejected else 0.0)
        if w < 0.0:
            w = 0.0
        tests += 1
        if rejected:
            if thetas[j] != 0.0:
                true_rej += 1
            else:
                false_rej += 1
        j += 1

    return tests, true_rej, false_rej
