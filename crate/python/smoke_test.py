"""Smoke test for the Python extension: build it with
`maturin develop -m crates/python/Cargo.toml` (or install the wheel) first."""

from fractions import Fraction as F
import json

import plzig


def main():
    f = plzig.PLMap.minc()
    assert len(f) == 6
    assert f(F(1, 3)) == 1
    assert f.critical_points() == [F(1, 3), F(4, 9), F(5, 9), F(2, 3)]

    f2 = plzig.iterate(f, 2)
    assert f2("7/18") == 0 and f2("11/18") == 1
    assert plzig.compose(f, f) == f2

    assert plzig.zigzag_set(f) == [(F(4, 9), F(5, 9))]
    assert plzig.is_in_zigzag(f, F(1, 2))
    assert not plzig.is_in_zigzag(plzig.PLMap.identity(), F(1, 2))
    assert plzig.is_leo(f) == "yes"
    assert plzig.uniform_n(f, "1/6") == 3

    b = plzig.branch(f, "1/2")
    assert b["domain"] == ["4/9", "5/9"]

    cert = plzig.certify_minc("const:1/2", 10)
    assert cert.passed and cert.stages == 10
    cert.verify()
    assert cert.coordinates() == [F(1, 2)] * 10
    again = plzig.Certificate.from_json(cert.to_json())
    again.verify()
    assert json.loads(again.to_json()) == cert.to_dict()

    gen = plzig.certify_general(f, ([], ["1/2"]), 4)
    assert gen.passed
    assert gen.to_dict()["stabilization"]["a"] == "1/3"

    g = plzig.PLMap([(0, 0), (F(1, 2), 1), (1, 0)])
    assert g(F(1, 4)) == F(1, 2)
    for bad in (lambda: g(0.5), lambda: plzig.certify_minc("const:1/3")):
        try:
            bad()
        except (TypeError, ValueError):
            pass
        else:
            raise AssertionError("expected an error")

    print("python smoke test passed")


if __name__ == "__main__":
    main()
