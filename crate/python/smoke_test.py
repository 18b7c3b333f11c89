# SPDX-License-Identifier: Apache-2.0
"""Smoke test for the pyfockdecay extension.

Uses an installed module if present, otherwise loads the shared library
from target/release or target/debug (build it with
`cargo build --release -p fockdecay-python`).
"""

import cmath
import math
import pathlib
import shutil
import sys
import tempfile


def load():
    try:
        import pyfockdecay

        return pyfockdecay
    except ImportError:
        pass
    root = pathlib.Path(__file__).resolve().parent.parent
    for profile in ("release", "debug"):
        lib = root / "target" / profile / "libpyfockdecay.so"
        if lib.exists():
            tmp = pathlib.Path(tempfile.mkdtemp())
            shutil.copy(lib, tmp / "pyfockdecay.so")
            sys.path.insert(0, str(tmp))
            import pyfockdecay

            return pyfockdecay
    sys.exit("pyfockdecay not built; run cargo build --release -p fockdecay-python")


def close(a, b, tol):
    assert abs(a - b) <= tol, (a, b)


def main():
    fd = load()

    space = fd.FockSpace([fd.Mode("boson", 0.0, 1.0, cutoff=5)])
    model = fd.DecayModel.unmixed(space)
    n = fd.total_number(space)
    rho = fd.number_state(space, [2])
    times = [0.0, 0.5, 1.0, 2.0]
    for t, state in zip(times, model.evolve_state(rho, times)):
        close(state.expectation(n), 2 * math.exp(-t), 1e-12)
        close(state.trace().real, 1.0, 1e-12)
    ode = model.integrate(rho, times, step=1e-3)
    close(ode[-1].expectation(n), 2 * math.exp(-2.0), 1e-8)
    dist = model.evolve_state(rho, [math.log(2)])[0].occupation_distribution()
    close(dist[(1,)], 0.5, 1e-12)
    assert model.kraus_completeness_defect(1.0, 5) <= 1e-10

    pair = fd.FockSpace([fd.Mode("boson", 0.0, 0.5, 3), fd.Mode("boson", 0.0, 1.5, 3)])
    params = fd.MixingParams(math.pi / 2, 0.0)
    mixed = fd.DecayModel.mixed(pair, params, (0.0, 5.0), (0.5, 1.5))
    start = fd.number_state(pair, [2, 1])
    grid = [0.1 * k for k in range(21)]
    s = mixed.mean_strangeness_trajectory(start, grid)
    for t, v in zip(grid, s):
        close(v, math.exp(-t) * math.cos(5.0 * t), 1e-10)
    obs = fd.flavour_observables(pair, 0.0)
    evolved = mixed.evolve_observable(obs["S"], 0.3)
    close(start.expectation(evolved), s[3], 1e-10)

    v = fd.MixingParams(math.pi / 2, 2 * math.pi, math.pi, 1.5 * math.pi).mixing_matrix()
    h = math.sqrt(0.5)
    for got, want in zip(sum(v, []), [h, h, h, -h]):
        assert cmath.isclose(got, want, abs_tol=1e-15)

    try:
        fd.number_state(space, [9])
    except ValueError:
        pass
    else:
        raise AssertionError("occupation above cutoff accepted")
    try:
        fd.validate_config('{"schema_version": 1}')
    except ValueError as e:
        assert "CONFIG_SCHEMA" in str(e)
    else:
        raise AssertionError("incomplete config accepted")

    print(f"pyfockdecay {fd.__version__} smoke test passed")


if __name__ == "__main__":
    main()
