"""Smoke test for the Python extension: python python/smoke_test.py"""

from fractions import Fraction

import padic_collatz as pc


def main():
    collatz = pc.Params(2, 3)
    assert collatz == pc.Params.collatz()
    assert repr(collatz) == "Params(p=2, q=3)"

    orb = pc.orbit(27, collatz)
    assert orb.cycle == (69, 2)
    assert sorted(orb.cycle_members()) == [1, 2]
    assert pc.step(-1, collatz) == -1
    assert pc.step(Fraction(-1, 3), collatz) == 0

    pre, period, value = pc.phi_exact(1, collatz)
    assert period == [1, 0] and value == Fraction(-1, 3)
    assert pc.phi(-17, collatz, 11) == [1, 1, 1, 1, 0, 1, 1, 1, 0, 0, 0]
    assert pc.phi_inverse_exact([], [2], pc.Params(3, 5)) == -1

    assert len(pc.enumerate_periodic(5, collatz)) == 32
    assert pc.catalan_search(2, 3) == ([(1, 0), (2, 1)], [(1, 1), (3, 2)])

    table = pc.integer_cycle_search(pc.Params(7, 19), -100, -1)
    reps = [c["cycle"]["members"][0] for c in table["cycles"]]
    assert "-5" in reps, reps

    ident = pc.cycle_identity(-17, collatz)
    assert abs(int(ident["denominator"])) == 139

    assert pc.height(-1024, 2) == 11
    assert pc.candidate_test(collatz) and not pc.candidate_test(pc.Params(2, 5))
    drift = pc.mean_drift(collatz, 10)
    assert drift["within_bounds"] and drift["full_enumeration"]

    w = pc.density_approximant(7, 2)
    assert w["w_n"] == "3"
    psi = pc.psi_prime_omega(1, 1, collatz, 10)
    assert [e["k"] for e in psi["entries"]][1:] == [2 * n for n in range(2, 11)]

    assert pc.series_height(3, [1, 2, 0, 1], [1, 1]) == 3
    num, den = pc.series_phi_inverse(2, [], [1])
    assert den and den[0] == 1

    try:
        pc.Params(4, 3)
    except pc.PadicCollatzError:
        pass
    else:
        raise AssertionError("Params(4, 3) accepted")

    print(f"padic_collatz {pc.__version__}: smoke test passed")


if __name__ == "__main__":
    main()
