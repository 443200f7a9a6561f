"""Smoke test for the isocube Python extension.

Build and install first:  pip install --no-build-isolation crates/py
Then run:                 python python/smoke_test.py
"""

import json
import math

import isocube


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    # Profiles and the dimension-free bound.
    assert isocube.lower_bound_profile(0.5) == 1.0
    assert close(isocube.lower_bound_profile(0.25), isocube.SQRT_2PI * isocube.gaussian_profile(0.25), 1e-12)
    assert isocube.exact_profile_2d(0.5) == 1.0
    assert close(isocube.exact_profile_2d(0.1), math.sqrt(math.pi * 0.1), 1e-12)
    grid = [k / 100 for k in range(101)]
    env = isocube.candidate_envelope(3, grid)
    low = isocube.lower_bound_curve(grid)
    assert env.provenance == "candidate" and low.dimension == "inf"
    assert all(c >= l - 1e-12 for c, l in zip(env.values, low.values))
    assert env.concavity_defect() <= 1e-9

    # Candidates and the decomposition identity.
    value, best = isocube.CandidateSpec.best(3, 0.1)
    assert best.family == "vertex_ball" and close(best.perimeter(), value, 1e-12)
    slab = isocube.CandidateSpec.axis_slab(2, 0.3)
    rep = slab.decomposition_check()
    assert abs(rep.margin) < 1e-8, rep
    assert json.loads(rep.to_json())["config"]["check"] == "decomposition"

    # Transport and pointwise inequalities.
    y = isocube.to_cube([0.3, -1.2])
    x = isocube.to_gauss(y)
    assert close(x[0], 0.3, 1e-12) and close(x[1], -1.2, 1e-12)
    assert isocube.boundary_weight([0.0, 2.0], [1.0, 0.0]) == isocube.SQRT_2PI
    assert isocube.jensen_gap([0.6, 0.8], [1.5, -0.5]) >= 0.0
    assert isocube.cs_pointwise([1.0, 2.0], [3.0, -1.0]).holds()
    assert max(isocube.pushforward_ks_test(2, 20000, 1)) < 1.95 / math.sqrt(20000)

    # Exhaustive oracle.
    assert isocube.verify_golden()
    corner = isocube.exhaustive_min(2, 4, 1)
    assert corner.min_perimeter == 0.5 and len(corner.optima) == 4
    assert corner.min_perimeter >= isocube.gaussian_floor(2, 4, 1)

    # Shape optimizer.
    out = isocube.minimize(2, 0.3, grid_n=64)
    assert close(out.field.mean(), 0.3, 1e-9)
    assert close(out.estimate, isocube.exact_profile_2d(0.3), 0.03 * isocube.exact_profile_2d(0.3))
    assert json.loads(out.diagnostics_json)["dimension"] == 2
    back = isocube.PhaseField.from_bytes(out.field.to_bytes())
    assert back.values == out.field.values

    try:
        isocube.minimize(5, 0.3)
    except (ValueError, NotImplementedError, MemoryError):
        pass
    else:
        raise AssertionError("d = 5 should be rejected")

    print("isocube", isocube.__version__, "smoke test passed")


if __name__ == "__main__":
    main()
