#!/usr/bin/env python3
"""Smoke test for the rsavg_py extension.

Build the module first, then run from the repository root:

    cargo build --release -p rsavg-py
    cp target/release/librsavg_py.so python/rsavg_py.so
    python3 python/smoke.py
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

import rsavg_py  # noqa: E402


def main() -> None:
    # class numbers of small orders
    assert rsavg_py.class_number(-7, 3, 0) == 1
    assert rsavg_py.class_number(-7, 3, 1) == 4
    assert rsavg_py.class_number(-7, 3, 2) == 12
    print("class numbers ok")

    # Salie closed form vs Kloosterman convolution, exact to rounding
    gap = rsavg_py.salie_max_gap(5, 2)
    assert gap < 1e-10, gap
    print(f"salie identity ok (max gap {gap:.3e})")

    # Weierstrass preparation of 3 + 3T + T^3 over Z/3^8
    w = rsavg_py.weierstrass(3, 8, 12, [3, 3, 0, 1])
    assert w.mu == 0 and w.wdeg == 3 and w.reconstruction_exact, repr(w)
    print(f"weierstrass ok: {w!r}")

    # planted zeros at the two conductor-3 characters
    zc = rsavg_py.zero_characters(3, 9, 12, [3, 6, 4, 10, 9, 3], 4)
    assert zc["wdeg"] == 2, zc
    assert zc["vanishing"] == [(1, 1), (1, 2)], zc
    assert zc["indeterminate"] == [], zc
    print(f"zero characters ok: {zc['vanishing']}")

    # single central value; the default member has root number -1
    cv = rsavg_py.lvalue(disc=-7, p=3, alpha=0, beta=0)
    re, im = cv["value"]
    eps_re, _ = cv["root_number"]
    assert abs(complex(re, im)) < 1e-8, cv
    assert abs(eps_re + 1.0) < 1e-8, cv
    print(f"lvalue ok: member {cv['member']} value {re:.3e}{im:+.3e}i")

    # exact average formula matches the direct mean
    rep = rsavg_py.average(disc=-7, p=3, alpha=0, beta=1)
    dre, dim = rep["difference"]
    assert abs(complex(dre, dim)) < 1e-10, rep
    assert rep["salie_certified"], rep
    print(
        f"average ok: family {rep['family_size']}, "
        f"|direct - formula| = {abs(complex(dre, dim)):.3e}"
    )

    print("smoke test passed")


if __name__ == "__main__":
    main()
