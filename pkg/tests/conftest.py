import pytest

from roughbound import (BoundaryVector, ScaleConfig, build_scale, neumann_map,
                        sample_fbm)


@pytest.fixture(scope="session")
def neumann_scale():
    return build_scale(ScaleConfig(a=1.0, b=-1.0, K=16, gamma=0.40, delta=0.05))


@pytest.fixture(scope="session")
def dirichlet_scale():
    return build_scale(ScaleConfig(a=1.0, b=-1.0, K=16, bc="dirichlet",
                                   gamma=0.77, delta=0.005))


@pytest.fixture(scope="session")
def driver_small():
    return sample_fbm(0.45, 256, 1.0, seed=7, gamma=0.40)


@pytest.fixture(scope="session")
def lifted_y0(neumann_scale):
    return neumann_map(BoundaryVector(1.0, 0.5), neumann_scale).coeffs


def brute_force_holder(times, values, norms_fn, exponent):
    """Independent pairwise-loop Hoelder seminorm (test oracle)."""
    worst = 0.0
    m = len(times)
    for i in range(m):
        for j in range(i + 1, m):
            worst = max(worst, norms_fn(values[j] - values[i])
                        / (times[j] - times[i]) ** exponent)
    return worst


def brute_force_crp_norm(path, driver):
    """Second implementation of the controlled-path norm, plain double loops."""
    sc = path.space
    g = path.gamma
    a = path.alpha
    times, y, yp, X = path.times, path.y, path.y_prime, driver.X

    def nrm(alpha):
        return lambda row: float(sc.norm(row, alpha))

    total = max(float(sc.norm(y[i], a)) for i in range(len(times)))
    total += max(float(sc.norm(yp[i], a - g)) for i in range(len(times)))
    total += brute_force_holder(times, yp, nrm(a - 2 * g), g)
    for expo, idx in ((g, a - g), (2 * g, a - 2 * g)):
        worst = 0.0
        for i in range(len(times)):
            for j in range(i + 1, len(times)):
                r = y[j] - y[i] - yp[i] * (X[j] - X[i])
                worst = max(worst, float(sc.norm(r, idx))
                            / (times[j] - times[i]) ** expo)
        total += worst
    return total
