"""Shared test utilities: scripted clocks, geometry builders, gradient probes."""

import numpy as np

from svp.learner import LearnerSpec, init_params, loss_and_grads
from svp.rng import SplitMix64, derive_seed


class ScriptClock:
    """Callable returning pre-scripted instants, one per call, in order."""

    def __init__(self, times):
        self.times = [float(t) for t in times]
        self.calls = 0

    def __call__(self) -> float:
        value = self.times[self.calls]
        self.calls += 1
        return value


def three_blob(n, n_test, d, delta, big_radius, noise, seed, pattern=(0, 1, 2, 2, 2)):
    """Two nearby blobs plus one distant heavy blob.

    Class 0 sits at the origin, class 1 at distance ``delta`` along the first
    axis, class 2 far away at (big_radius, big_radius, 0, ...). Labels cycle
    through ``pattern``, so the far blob can be given the majority of points.
    Returns ((x, y), (x_test, y_test)).
    """
    means = np.zeros((3, d))
    means[1, 0] = delta
    means[2, 0] = big_radius
    means[2, 1] = big_radius
    pattern = np.asarray(pattern, dtype=np.int64)
    y = pattern[np.arange(n) % pattern.size]
    x = means[y] + noise * SplitMix64(derive_seed(seed, "train")).normals((n, d))
    y_test = pattern[np.arange(n_test) % pattern.size]
    x_test = means[y_test] + noise * SplitMix64(derive_seed(seed, "test")).normals((n_test, d))
    return (x, y), (x_test, y_test)


def draw_gradient_case(rng, kind, warmup_steps=3, kink_margin=1e-2):
    """Random small instance with warmed-up parameters, safe for numeric probes.

    Returns (params, x, y), or None for rejected instances. MLP instances
    where any hidden pre-activation lies within ``kink_margin`` of zero are
    rejected: a central difference with step 1e-4 would straddle the ReLU
    kink there and measure neither one-sided slope.
    """
    n = 5 + rng.next_below(4)
    d = 2 + rng.next_below(3)
    c = 2 + rng.next_below(2)
    hidden = 4 + rng.next_below(4) if kind == "mlp" else None
    spec = LearnerSpec(kind=kind, epochs=1, learning_rate=0.3, batch_size=4,
                       seed=rng.next_u64(), hidden_units=hidden)
    x = rng.normals((n, d))
    y = np.array([rng.next_below(c) for _ in range(n)], dtype=np.int64)
    params = init_params(spec, d, c)
    for _ in range(warmup_steps):
        _, grads, _ = loss_and_grads(kind, params, x, y)
        for key in grads:
            params[key] -= 0.3 * grads[key]
    if kind == "mlp":
        z1 = x @ params["W1"] + params["b1"]
        if np.abs(z1).min() < kink_margin:
            return None
    return params, x, y


def central_difference(kind, params, x, y, key, idx, h=1e-4):
    def loss_at(v):
        p = {k: arr.copy() for k, arr in params.items()}
        p[key].flat[idx] = v
        return loss_and_grads(kind, p, x, y)[0]

    v0 = params[key].flat[idx]
    return (loss_at(v0 + h) - loss_at(v0 - h)) / (2 * h)


def max_gradient_mismatch(kind, params, x, y):
    """Worst relative gap between analytic and numeric gradient entries."""
    _, grads, _ = loss_and_grads(kind, params, x, y)
    worst = 0.0
    for key, grad in grads.items():
        for idx in range(grad.size):
            numeric = central_difference(kind, params, x, y, key, idx)
            analytic = grad.flat[idx]
            rel = abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-3)
            worst = max(worst, rel)
    return worst
