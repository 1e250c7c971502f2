"""Smoke test for the gwqed extension. Build first:

    pip install --no-build-isolation ./crates/python
"""
import math

import gwqed


def main():
    jc, jp = gwqed.braided_couplings(0.2 * math.pi, 0.8)
    assert jc > 0 and jp != 0, (jc, jp)
    assert gwqed.braided_couplings(0.2 * math.pi, 0.0)[1] == 0.0

    check = gwqed.slh_check(0.2 * math.pi, 1.2, theta_plus=0.3, theta_minus=1.1)
    assert check["l_r_norm"] < 1e-10 and check["l_l_norm"] < 1e-10, check

    ratios = gwqed.df_ratios(0.8)
    assert len(ratios) == 3

    _, floor = gwqed.m2_min_residual(1.0, 2.0, 1.0)
    assert floor > 1e-3

    chain = gwqed.SpinChain(6, 1.0, 0.5, 2.0)
    ed, bdg = chain.exact_spectrum(), chain.bdg_spectrum()
    assert len(ed) == 64
    assert max(abs(a - b) for a, b in zip(ed, bdg)) < 1e-8

    assert gwqed.SpinChain(16, 1.0, 0.5, 4.0).gap(continuum=True) < 1e-10
    grid = [-8 + 0.1 * (i + 0.5) for i in range(160)]
    _, peaks = gwqed.SpinChain(16, 1.0, 0.5, 2.0).fidelity_scan("delta", grid)
    assert any(abs(p - 4) < 0.15 for p in peaks) and any(abs(p + 4) < 0.15 for p in peaks), peaks

    a1, a2c = gwqed.propagate(0.8, 1.5, 1 + 0j, 0j)
    b1, b2c = gwqed.propagate(0.8, 1.5, 1 + 0j, 0j, rk4=True)
    assert abs(a1 - b1) < 1e-8 and abs(a2c - b2c) < 1e-8

    _, _, regions = gwqed.phase_diagram(1.0, [-8 + 0.2 * i for i in range(81)], [-2 + 0.1 * i for i in range(41)])
    assert regions == 4

    csv = gwqed.run_cli(["interactions", "--scan", "gain"])
    assert "gain,jc,jp" in csv.splitlines()

    try:
        gwqed.SpinChain(7, 1.0, 0.5, 2.0)
    except ValueError:
        pass
    else:
        raise AssertionError("odd chain length accepted")

    print("python smoke test ok")


if __name__ == "__main__":
    main()
