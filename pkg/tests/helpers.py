"""Brute-force oracles shared by the test modules.

Everything here enumerates outcome sequences directly and weighs them by
the joint sequence probability; nothing imports the analytic law paths it
is used to check.
"""

from fractions import Fraction


def joint_sequence_probability(w1, w2, bits):
    """P(I = i) = w1^k prod_{m: i_m=0} (w2+m-1) / [w]_n for a bit tuple."""
    num = 1.0
    den = 1.0
    w = w1 + w2
    for m, b in enumerate(bits):
        num *= w1 if b else (w2 + m)
        den *= w + m
    return num / den


def enumerate_success_pmf(w1, w2, n):
    """P(S_n = k), k = 0..n, by summing all 2^n sequence probabilities."""
    probs = [0.0] * (n + 1)
    w = w1 + w2
    den = 1.0
    for m in range(n):
        den *= w + m
    for mask in range(1 << n):
        p = 1.0
        k = 0
        for m in range(n):
            if (mask >> m) & 1:
                p *= w1
                k += 1
            else:
                p *= w2 + m
        probs[k] += p / den
    return probs


def enumerate_success_pmf_exact(w1, w2, n):
    """Exact-rational version of enumerate_success_pmf."""
    w1, w2 = Fraction(w1), Fraction(w2)
    w = w1 + w2
    probs = [Fraction(0)] * (n + 1)
    den = Fraction(1)
    for m in range(n):
        den *= w + m
    for mask in range(1 << n):
        p = Fraction(1)
        k = 0
        for m in range(n):
            if (mask >> m) & 1:
                p *= w1
                k += 1
            else:
                p *= w2 + m
        probs[k] += p / den
    return probs


def enumerate_passage_joint(w1, w2, n_top, l):
    """joint[(a, b)] = P(K_{l-1}+ = a, K_l+ = b) for b <= n_top, by full
    enumeration of length-n_top sequences (suffix mass sums out)."""
    joint = {}
    w = w1 + w2
    den = 1.0
    for m in range(n_top):
        den *= w + m
    for mask in range(1 << n_top):
        p = 1.0
        succ = []
        for m in range(n_top):
            if (mask >> m) & 1:
                p *= w1
                succ.append(m + 1)
            else:
                p *= w2 + m
        if len(succ) >= l:
            a = succ[l - 2] if l >= 2 else 0
            b = succ[l - 1]
            joint[(a, b)] = joint.get((a, b), 0.0) + p / den
    return joint
