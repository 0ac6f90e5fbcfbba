"""Acceptance criteria, one test group per numbered criterion.

The terminal summary prints a PASS/FAIL line for each criterion.
"""

import csv
import dataclasses
import filecmp
import io
import math
import time

import numpy as np
import pytest
from scipy.stats import unitary_group

from conftest import chi, pieces
from oracles import friedrichs_oracle, kernel_injective, projected_frame_bounds, random_complex
from fsis.fibers import (dimension_function, fiber_projection, fiber_stack, fiber_window,
                         midpoint_grid)
from fsis.gramian import canonical_parseval, frame_analysis
from fsis.report import run
from fsis.sampling import fd_injectivity, fd_stability
from fsis.scenario import bundled_scenarios, load_scenario
from fsis.subspaces import friedrichs_fiber, intersection_projector_fiber


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


def _table(bundle, prefix):
    name = next(k for k in bundle.tables if k.startswith(prefix))
    return list(csv.DictReader(io.StringIO(bundle.tables[name])))


@pytest.mark.criterion(1, "example angle curve reproduced, verdict NotClosed")
def test_c1_example_angle():
    with Timer() as t:
        bundle = run(load_scenario("example6"))
    rows = _table(bundle, "task1_angle")
    assert len(rows) == 512
    omega = np.array([float(r["omega"]) for r in rows])
    c = np.array([float(r["friedrichs"]) for r in rows])
    np.testing.assert_allclose(c, np.abs(np.cos(2 * np.pi * omega)), rtol=0, atol=1e-8)
    assert abs(c.max() - math.cos(math.pi / 512)) < 1e-8
    assert "Friedrichs cosine (grid max) = 0.99998" in bundle.summary
    assert "verdict: NotClosed" in bundle.summary
    assert bundle.manifest["tolerances"]["close_eps"] == 1e-4
    assert t.elapsed < 5


@pytest.mark.criterion(2, "example fiber data for the supplied complement generators")
def test_c2_example_fibers(example6):
    with Timer() as t:
        X = [example6["phi1"], example6["phi5"]]
        Xp = [example6["phi0"]]
        grid = midpoint_grid(1, 512)
        W = fiber_window(X + Xp)
        A, B = fiber_stack(X, grid, W), fiber_stack(Xp, grid, W)
        G = np.swapaxes(A.conj(), 1, 2) @ A
        Gp = np.swapaxes(B.conj(), 1, 2) @ B
        C = np.swapaxes(B.conj(), 1, 2) @ A
    cos = np.cos(2 * np.pi * grid.nodes[:, 0])
    assert np.abs(G - np.eye(2)).max() < 1e-12
    assert np.abs(Gp - 1).max() < 1e-12
    assert np.abs(C[:, 0, 0] - cos).max() < 1e-12
    assert np.abs(C[:, 0, 1]).max() < 1e-12
    assert t.elapsed < 2


@pytest.mark.criterion(3, "half-interval generator: dimension 1 then 0, no Riesz basis")
@pytest.mark.parametrize("M", [8, 512])
def test_c3_no_riesz(M):
    with Timer() as t:
        g = [chi("phi", "0", "1/2")]
        grid = midpoint_grid(1, M)
        dims = dimension_function(g, grid).values
        fa = frame_analysis(g, grid)
    expected = (grid.nodes[:, 0] < 0.5).astype(int)
    np.testing.assert_array_equal(dims, expected)
    assert fa.frame_lower == 1.0 and fa.bessel_bound == 1.0
    assert fa.is_riesz is False
    assert t.elapsed < 2


@pytest.mark.criterion(4, "finite-dimensional injectivity/stability match oracles")
def test_c4_finite_oracles():
    rng = np.random.default_rng(2024)
    agree = 0
    with Timer() as t:
        for _ in range(200):
            N = int(rng.integers(2, 13))
            d = int(rng.integers(1, 5))
            m = int(rng.integers(1, 9))
            r = int(rng.integers(1, min(N, d) + 1))
            Phi = random_complex(rng, N, r) @ random_complex(rng, r, d)
            Psi = random_complex(rng, N, m)
            if rng.random() < 0.3 and r < N:
                x = Phi @ random_complex(rng, d)
                Psi = Psi - np.outer(x, x.conj() @ Psi) / np.vdot(x, x)
            inj = fd_injectivity(Phi, Psi)
            ref = kernel_injective(Phi, Psi)
            agree += inj == ref
            res = fd_stability(Phi, Psi)
            assert res.stable == ref
            if ref:
                lo, hi = projected_frame_bounds(Phi, Psi)
                assert abs(res.alpha - lo) < 1e-9 * max(1, hi)
                assert abs(res.beta - hi) < 1e-9 * max(1, hi)
    assert agree == 200
    assert t.elapsed < 10


@pytest.mark.criterion(5, "nonzero spectra of G G* and G* G coincide")
def test_c5_spectrum_transfer():
    rng = np.random.default_rng(5)
    with Timer() as t:
        for _ in range(500):
            m, n = rng.integers(1, 9, size=2)
            r = int(rng.integers(1, min(m, n) + 1))
            G = random_complex(rng, m, r) @ random_complex(rng, r, n)
            a = np.linalg.eigvalsh(G @ G.conj().T)
            b = np.linalg.eigvalsh(G.conj().T @ G)
            cut = 1e-8 * a.max()
            a, b = np.sort(a[a > cut]), np.sort(b[b > cut])
            assert len(a) == len(b) == r
            assert np.abs(a - b).max() < 1e-10 * max(1, a.max())
    assert t.elapsed < 5


@pytest.mark.criterion(6, "Friedrichs cosine: pseudo-inverse formula equals principal angles")
def test_c6_friedrichs_two_paths():
    rng = np.random.default_rng(6)
    with Timer() as t:
        for _ in range(500):
            k = int(rng.integers(0, 3))
            a = int(rng.integers(1, 4))
            b = int(rng.integers(1, 4))
            common = random_complex(rng, 8, k)
            U = np.hstack([common, random_complex(rng, 8, a)]) @ random_complex(rng, k + a, k + a)
            V = np.hstack([common, random_complex(rng, 8, b)])
            r = friedrichs_fiber(U, V)
            assert r.cosine is not None
            assert abs(r.cosine - friedrichs_oracle(U, V)) < 1e-9
    assert t.elapsed < 10


def _random_generators(rng, d):
    gens = []
    for j in range(d):
        cuts = sorted(set(rng.integers(0, 13, size=3).tolist()) | {0, 12})
        specs = []
        for lo, hi in zip(cuts, cuts[1:]):
            if rng.random() < 0.25:
                continue
            a, b, f = rng.normal(size=3).round(3)
            specs.append((f"{lo}/4", f"{hi}/4", f"{a} + {b}*exp(2*pi*i*{f}*w)"))
        gens.append(pieces(f"g{j}", *specs) if specs else chi(f"g{j}", "0", "1"))
    return gens


@pytest.mark.criterion(7, "canonical Parseval fibers are projections on the same span")
def test_c7_canonical_parseval():
    rng = np.random.default_rng(7)
    grid = midpoint_grid(1, 64)
    with Timer() as t:
        for _ in range(100):
            gens = _random_generators(rng, int(rng.integers(1, 5)))
            S = fiber_stack(gens, grid)
            T = canonical_parseval(gens, grid, stack=S)
            G = np.swapaxes(T.conj(), 1, 2) @ T
            assert np.linalg.norm(G @ G - G, axis=(1, 2)).max() < 1e-10
            P_new = T @ np.swapaxes(T.conj(), 1, 2)
            for i in range(grid.size):
                assert np.linalg.norm(P_new[i] - fiber_projection(S[i])) < 1e-10
    assert t.elapsed < 10


def _planted_planes(rng, cosine):
    Q = unitary_group.rvs(6, random_state=rng)
    s = math.sqrt(1 - cosine ** 2)
    U = Q[:, [0, 1]] @ random_complex(rng, 2, 2)
    V = np.stack([Q[:, 0], cosine * Q[:, 1] + s * Q[:, 2]], axis=1)
    return fiber_projection(U), fiber_projection(V), np.outer(Q[:, 0], Q[:, 0].conj())


@pytest.mark.criterion(8, "alternating projections: planted intersections, Indeterminate near 1")
def test_c8_alternating_projections():
    rng = np.random.default_rng(8)
    with Timer() as t:
        for _ in range(100):
            P_U, P_V, P = _planted_planes(rng, rng.uniform(0, 0.9))
            res = intersection_projector_fiber(P_U, P_V)
            assert res.converged and res.sweeps <= 10_000
            assert np.abs(res.projector - P).max() < 1e-6
        for _ in range(100):
            cosine = 1 - 10 ** rng.uniform(-10, -6)
            P_U, P_V, P = _planted_planes(rng, cosine)
            res = intersection_projector_fiber(P_U, P_V)
            assert not res.converged and res.projector is None
    assert t.elapsed < 10


@pytest.mark.criterion(9, "sample-count lower bounds are enforced")
def test_c9_lower_bounds():
    rng = np.random.default_rng(9)
    with Timer() as t:
        for _ in range(100):
            N = int(rng.integers(2, 10))
            d = int(rng.integers(2, N + 1))
            Phi = random_complex(rng, N, d)
            Psi = random_complex(rng, N, int(rng.integers(1, d)))
            assert not fd_injectivity(Phi, Psi)
        sc = load_scenario("example6")
        sc = dataclasses.replace(sc, tasks=[t for t in sc.tasks if t["task"] == "analyze-union"])
        bundle = run(sc)
    assert "sampling set size #I = 3" in bundle.summary
    assert "sample-count lower bound = 4" in bundle.summary
    assert "LOWER-BOUND VIOLATION" in bundle.summary
    assert bundle.exit_code == 2
    assert t.elapsed < 2


@pytest.mark.criterion(10, "bundled scenarios produce byte-identical bundles")
@pytest.mark.parametrize("name", ["example6", "no_riesz", "sparse_union"])
def test_c10_determinism(name, tmp_path):
    assert name + ".json" in bundled_scenarios()
    a = run(load_scenario(name), tmp_path / "a")
    b = run(load_scenario(name), tmp_path / "b")
    assert a.summary == b.summary and a.tables == b.tables and a.manifest == b.manifest
    files = sorted(p.name for p in (tmp_path / "a").iterdir())
    match, mismatch, errors = filecmp.cmpfiles(tmp_path / "a", tmp_path / "b", files, shallow=False)
    assert not mismatch and not errors and len(match) == len(files)
