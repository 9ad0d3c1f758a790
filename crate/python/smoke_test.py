"""Smoke test for the pdrank extension module.

Build and install first, e.g.:

    pip install --no-build-isolation ./crates/python
    python python/smoke_test.py
"""

import json
import math

import pdrank


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    assert close(pdrank.pearson([1, 2, 3, 4], [1, 3, 2, 4]), 0.8, 1e-12)
    assert close(pdrank.pythagorean_from_totals(4100, 4000, 2.4), 0.5148112330331538, 1e-14)

    erf = pdrank.WeightFunction.erf(12.0)
    assert close(erf(12), math.erf(1.0), 1e-15)
    assert erf(-7) == -erf(7)
    assert pdrank.WeightFunction.hard_cap(5)(30) == 5.0

    text = pdrank.synth_csv(seed=11, teams=12, seasons=4)
    assert text == pdrank.synth_csv(seed=11, teams=12, seasons=4)
    data = pdrank.Dataset.from_csv_text(text)
    assert len(data) == 48
    assert len(data.keys()) == len(data.targets()) == 48

    wl = data.correlation(pdrank.Indicator.win_loss())
    tiny = data.correlation(pdrank.Indicator.weighted(pdrank.WeightFunction.tanh(1e-6)))
    assert close(wl, tiny, 1e-9), (wl, tiny)

    sweep = data.sweep_cap(1, 20)
    assert len(sweep.points) == 20
    assert sweep.best[1] == max(r for _, r in sweep.points)
    assert len(data.sweep_soft("exp").points) == 80
    assert len(data.sweep_pythagorean().points) == 91

    rows = data.table1()
    assert [r["indicator"] for r in rows] == [
        "win-loss",
        "point-differential",
        "capped-point-differential",
        "tanh",
        "erf",
        "exp",
        "pythagorean",
    ]

    fit = data.fit_weights(ridge_lambda=1.0, max_iterations=5000)
    assert len(fit.weights) == 81
    learned = data.learned_values(fit)
    r = pdrank.pearson(learned, data.targets())
    assert close(r, fit.final_correlation, 1e-12), (r, fit.final_correlation)
    assert json.loads(fit.to_json())["iterations"] == fit.iterations
    assert pdrank.FitResult.from_json(fit.to_json()).weights == fit.weights

    for bad in (lambda: pdrank.WeightFunction.tanh(0.0), lambda: data.sweep_soft("cosh")):
        try:
            bad()
        except ValueError:
            pass
        else:
            raise AssertionError("expected ValueError")
    try:
        pdrank.pearson([1, 1, 1], [1, 2, 3])
    except ArithmeticError:
        pass
    else:
        raise AssertionError("expected ArithmeticError")

    print(f"ok: {len(data)} team-seasons, best cap {sweep.best[0]:g}, fitted r={fit.final_correlation:.4f}")


if __name__ == "__main__":
    main()
