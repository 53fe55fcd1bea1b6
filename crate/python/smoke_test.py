"""Smoke test for the kvinverse_py extension.

Build and install first:
    cd crates/python && maturin build --release -o dist && pip install dist/*.whl
"""
import math

import kvinverse_py as kv


def main():
    mu0, mu1, gamma, delta = kv.physical_params(2.0, 2.0, 1.0, 1.25)
    assert math.isclose(mu0, 1.5) and math.isclose(mu1, 1.0)
    assert math.isclose(gamma, 0.5) and math.isclose(delta, 0.5)

    u0 = kv.Field.preset(2, 8, "mixed")
    phi = kv.Field.preset(2, 8, "probe")
    w = kv.Field.preset(2, 8, "taylor_green")
    assert u0.dim == 2 and u0.n == 8
    assert u0.max_divergence() < 1e-12
    assert len(u0.to_physical()) == 2

    run = kv.run_direct(u0, phi, mu0, mu1, 0.2, 0.01, gamma=gamma, delta=delta, u_inf=w)
    assert len(run["r"]) == 21

    inv = kv.fixed_point_solve(u0, phi, mu0, mu1, 0.01, run["r"], run["rp"], run["rpp"], 0.2, u_inf=w)
    assert inv["converged"]
    err = max(abs(a - b) for a, b in zip(inv["k"], run["kernel"]))
    assert err < 1e-6, err

    res = kv.twin(u0, phi, mu0, mu1, gamma, delta, 0.2, 0.01, u_inf=w, refinement=4)
    assert res["converged"] and res["relative_error"] < 1e-3, res["relative_error"]
    assert all(r < 1.0 for r in res["contraction_ratios"])

    marched = kv.march(u0, phi, mu0, mu1, 0.01, run["r"], run["rp"], run["rpp"], 0.1, 0.2, u_inf=w)
    assert marched["completed"] and marched["windows"] == 2

    shear = kv.Field.preset(2, 8, "shear")
    cellular = kv.Field.preset(2, 8, "cellular")
    report = kv.check_assumptions(shear, cellular, mu0, mu1, 0.01, [0.0] * 4, [0.0] * 4, [0.0] * 4)
    assert [name for name, ok, _ in report if not ok][0] == "A3"
    try:
        kv.twin(shear, cellular, mu0, mu1, gamma, delta, 0.2, 0.01)
    except kv.AssumptionError:
        pass
    else:
        raise AssertionError("expected AssumptionError")

    print("smoke test passed: kernel error %.2e, twin error %.2e" % (err, res["relative_error"]))


if __name__ == "__main__":
    main()
