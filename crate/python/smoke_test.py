"""Smoke test for the growthforge extension module.

Build and install it first, e.g.

    pip install maturin
    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/growthforge-*.whl
"""

import math

import growthforge as gf


def main():
    n2 = gf.Growth.polylog("2")
    n2log = gf.Growth.polylog("2", s=1)
    assert gf.compare(n2, n2log)["relation"] == "STRICTLY_LESS"
    assert gf.compare(n2, n2)["relation"] == "EQUIV"
    assert str(gf.sup_pair(n2, n2log)) == str(n2log)
    assert gf.check_bjp(gf.Growth.table(list(range(1, 33))), horizon=16) == "2"
    assert gf.check_lip(gf.Growth.polylog("1", r="1")) is None
    assert gf.pi_e(n2) == 0.0 and gf.pi_p(n2) == 2.0

    plan = gf.build_plan(n2, horizon=64)
    assert plan.L == 3 and plan.b1 == plan.b2 == 1.0
    assert plan.d[:4] == [1, 4, 9, 16]
    counts = gf.count_words(plan)
    assert len(counts) == 64 and counts[0] == 6
    assert all(a <= b for a, b in zip(counts, counts[1:]))
    report = gf.verify(plan)
    assert report["relation"] == "EQUIV" and report["passed"], report

    assert gf.translation_toy(10) == list(range(2, 12))
    est = gf.estimate("doubling:1024")
    assert abs(est["h"] - math.log(2)) <= 0.1, est
    est = gf.estimate("rotation:16")
    assert est["h"] == 0.0 and est["h_pol"] == 0.0, est

    code, text = gf.run_cli(["growth", "--target", n2.to_json(), "--against", n2log.to_json()])
    assert code == 0 and "STRICTLY_LESS" in text, text
    code, _ = gf.run_cli(["construct", "--target", '{"family":"polylog","t":"3/2"}'])
    assert code == 1

    try:
        gf.Growth.parse("{")
    except ValueError:
        pass
    else:
        raise AssertionError("malformed spec accepted")
    print("smoke test ok")


if __name__ == "__main__":
    main()
