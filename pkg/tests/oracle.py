"""Arbitrary-precision reference transcription of the multi-core figure of merit.

Written straight from the component definitions, sharing no code with the
package under test. Used to freeze expected values and for randomized
equivalence checks.
"""
import mpmath

mpmath.mp.dps = 50


def oracle_components(fidelity, quality_factor, eps_i, eps_c, n_q_lim,
                      n_q, n_cores, n_q_norm, log_norm=False,
                      weights=(1, 1, 1, 1, 1)):
    F = mpmath.mpf(fidelity)
    nq = mpmath.mpf(n_q)
    if log_norm:
        n_tilde = mpmath.log(nq) / mpmath.log(mpmath.mpf(n_q_norm))
    else:
        n_tilde = nq / mpmath.mpf(n_q_norm)
    j_qb = mpmath.power(2, n_tilde) - 1
    j_qf = mpmath.mpf(quality_factor)
    j_f = 2 - mpmath.power(F, nq)
    n_q_max = n_q_lim * n_cores
    heaviside = 1 if n_q - n_q_max >= 0 else 0
    j_i = 1 + (mpmath.mpf(eps_i) * nq / n_cores) * (heaviside * nq / n_q_max) ** 3
    used = min(-(-n_q // n_q_lim), n_cores)
    j_c = 2 - mpmath.power(1 - mpmath.mpf(eps_c), used)
    w_qb, w_qf, w_f, w_i, w_c = (mpmath.mpf(w) for w in weights)
    gamma = (w_qb * j_qb * w_qf * j_qf) / (w_f * j_f * w_i * j_i * w_c * j_c)
    return {
        "j_qb": j_qb, "j_qf": j_qf, "j_f": j_f, "j_i": j_i, "j_c": j_c,
        "n_used": used, "n_q_max": n_q_max, "gamma": gamma,
    }


def oracle_gamma(*args, **kwargs):
    return oracle_components(*args, **kwargs)["gamma"]
