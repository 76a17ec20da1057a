"""Quick check of the Python bindings. Build first with
`pip install --no-build-isolation ./crates/py`."""

from fractions import Fraction

import eqpsg


def main():
    s = eqpsg.Semigroup([3, 5, 7])
    assert s.frobenius() == 4
    assert s.genus() == 3
    assert s.apery() == [0, 5, 7]
    assert 8 in s and 4 not in s
    assert s.fundamental_gaps() == [4]
    assert eqpsg.Semigroup([2, 3]).betti(1) == 1
    assert s.betti(1, "f2") == s.betti(1, "q")
    assert eqpsg.Semigroup([5, 7]).length_set(35) == [5, 7]

    fam = eqpsg.Family("n+3, n+5, n+7")
    rows = fam.sweep(1, 30, "frobenius,genus,numerical")
    assert len(rows) == 30
    assert rows[1]["generators"] == [[5], [7], [9]]
    assert rows[1]["frobenius"] == 13
    assert rows[0]["frobenius"] is None and rows[0]["numerical"] is False

    genus = [r["genus"] for r in fam.sweep(1, 200, "genus")]
    qp = eqpsg.fit(genus, n_lo=1, pmax=12, dmax=3)
    assert qp.degree == 2
    assert all(isinstance(c, Fraction) for cls in qp.classes for c in cls)
    for n in range(201, 221):
        want = fam.sweep(n, n, "genus")[0]["genus"]
        if want is not None:
            assert qp(n) == want, n
    again = eqpsg.QuasiPolynomial.from_json(qp.to_json())
    assert str(again) == str(qp)

    f = eqpsg.Formula("E z (2*z = n)")
    assert f.eval(n=6, window=10) == (True, True)
    fg = eqpsg.Formula.builtin("fundamental_gap", eqpsg.Family("3, 5, 7"))
    assert fg.define_set(["x"], window=20) == ([[4]], True)

    report = eqpsg.bresinsky(2, 3)
    assert report["lower_bound"] == 6

    try:
        eqpsg.Semigroup([])
    except ValueError:
        pass
    else:
        raise AssertionError("empty generator list accepted")

    print("ok")


if __name__ == "__main__":
    main()
