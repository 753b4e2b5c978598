"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line (run with ``pytest tests/test_acceptance.py -v -s``)."""

import json
import time

import numpy as np
import pytest

from tuckervar import (
    DesignPair,
    NnmConfig,
    ScenarioSpec,
    SolverState,
    StdgrConfig,
    build_design,
    error_curve,
    fold,
    grad_partials,
    grad_Q_full,
    fit_panel,
    kronecker,
    make_scenario,
    mode_product,
    nnm_estimate,
    procrustes,
    prox_core,
    psi_value,
    rescale_to_spectral_radius,
    ridge_constant,
    select_ranks,
    simulate,
    svt,
    unfold,
)
from tuckervar.cli import EXIT_OK, main
from tuckervar.storage import write_panel_csv


def _report(name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"\n[{status}] {name}{suffix}")
    assert ok, f"{name}{suffix}"


def random_orthonormal(rng, n, r):
    q, _ = np.linalg.qr(rng.standard_normal((n, r)))
    return q


# ---------------------------------------------------------------------------
# criteria 1 + 2 share the same 20 solver runs


@pytest.fixture(scope="module")
def decrease_runs():
    spec = ScenarioSpec(
        m=15, p=3, ranks=(2, 2, 2), superdiag=(2.0, 2.0),
        noise_scale=0.5, seeds=tuple(range(20)), sample_sizes=(100,),
    )
    results = []
    start = time.time()
    for seed in range(20):
        scenario = make_scenario(spec, seed)
        panel = simulate(scenario.w, 0.25 * np.eye(15), length=103, seed=seed)
        report = fit_panel(panel, 3, StdgrConfig())
        results.append(report.result)
    return results, time.time() - start


def test_criterion_1_sufficient_decrease(decrease_runs):
    results, elapsed = decrease_runs
    ok = True
    worst = -np.inf
    for res in results:
        f = res.objective_trace
        slack = 1e-9 * np.maximum(1.0, np.abs(f[:-1]))
        plain = np.max(f[1:] - f[:-1] - slack)
        margin = res.step_sizes.decrease_margin()
        strengthened = np.max(f[1:] + 0.5 * margin * res.block_change_sq - f[:-1] - slack)
        worst = max(worst, plain, strengthened)
        ok = ok and plain <= 0 and strengthened <= 0 and margin > 0
    ok = ok and elapsed < 60
    _report(
        "criterion 1: per-iteration decrease with quantified margin, 20 runs",
        ok,
        f"worst slackened violation {worst:.3e}, {elapsed:.1f}s",
    )


def test_criterion_2_feasibility(decrease_runs):
    results, _ = decrease_runs
    core_excess = max(np.max(r.core_abs_max_trace) - 1.0 for r in results)
    orth = max(np.max(r.orth_defect_trace) for r in results)
    ok = core_excess <= 1e-12 and orth <= 1e-10
    _report(
        "criterion 2: box and orthonormality feasibility at every iterate",
        ok,
        f"core excess {core_excess:.3e}, orthonormality defect {orth:.3e}",
    )


# ---------------------------------------------------------------------------


def test_criterion_3_gradient_consistency():
    start = time.time()
    h = 1e-6
    worst = 0.0
    for seed in range(5):
        rng = np.random.default_rng(100 + seed)
        m, p, t, ranks = 6, 2, 25, (2, 2, 2)
        design = DesignPair(
            x=rng.standard_normal((t, m * p)), y=rng.standard_normal((t, m))
        )
        cfg = StdgrConfig(ranks=ranks)

        w = rng.standard_normal((m, m, p)) * 0.4
        grad = grad_Q_full(w, design)

        def loss(wv):
            r = design.x @ unfold(wv, 1).T - design.y
            return float(np.sum(r * r)) / (2 * t)

        fd = np.zeros_like(w)
        for idx in np.ndindex(w.shape):
            plus, minus = w.copy(), w.copy()
            plus[idx] += h
            minus[idx] -= h
            fd[idx] = (loss(plus) - loss(minus)) / (2 * h)
        worst = max(worst, np.max(np.abs(fd - grad)) / max(np.max(np.abs(grad)), 1e-12))

        state = SolverState(
            core=rng.uniform(-0.9, 0.9, size=ranks),
            a1=random_orthonormal(rng, m, 2),
            a2=random_orthonormal(rng, m, 2),
            a3=random_orthonormal(rng, p, 2),
            u1=rng.standard_normal((m, 2)),
            u2=rng.standard_normal((m, 2)),
            u3=rng.standard_normal((p, 2)),
        )
        parts = grad_partials(state, design, cfg)
        blocks = list(state.blocks())
        for b, grad_b in enumerate(parts):
            fd_b = np.zeros_like(blocks[b])
            for idx in np.ndindex(blocks[b].shape):
                plus = [arr.copy() for arr in blocks]
                minus = [arr.copy() for arr in blocks]
                plus[b][idx] += h
                minus[b][idx] -= h
                fd_b[idx] = (
                    psi_value(SolverState(*plus), design, cfg)
                    - psi_value(SolverState(*minus), design, cfg)
                ) / (2 * h)
            worst = max(
                worst, np.max(np.abs(fd_b - grad_b)) / max(np.max(np.abs(grad_b)), 1e-12)
            )
    elapsed = time.time() - start
    ok = worst <= 1e-6 and elapsed < 30
    _report(
        "criterion 3: gradients match central finite differences",
        ok,
        f"worst relative error {worst:.3e}, {elapsed:.1f}s",
    )


def test_criterion_4_prox_oracles():
    rng = np.random.default_rng(42)
    tau, c = 0.31, 1.0
    scalars = rng.uniform(-3.0, 3.0, size=10_000)
    grid = np.arange(-c, c + 5e-6, 1e-5)
    penalty = tau * np.abs(grid)
    worst_prox = 0.0
    for chunk in np.array_split(scalars, 250):
        objective = penalty[None, :] + 0.5 * (grid[None, :] - chunk[:, None]) ** 2
        best = grid[np.argmin(objective, axis=1)]
        got = prox_core(chunk.reshape(-1, 1, 1), tau, c).ravel()
        worst_prox = max(worst_prox, float(np.max(np.abs(got - best))))
    prox_ok = worst_prox <= 1e-4

    worst_svt = 0.0
    for _ in range(100):
        mat = rng.standard_normal((3, 3))
        u, s, vt = np.linalg.svd(mat)
        direct = (u * np.maximum(s - 0.4, 0.0)) @ vt
        worst_svt = max(worst_svt, float(np.max(np.abs(svt(mat, 0.4) - direct))))
    svt_ok = worst_svt <= 1e-10

    mat = rng.standard_normal((4, 2))
    best = procrustes(mat)
    target = np.trace(best.T @ mat)
    candidates = np.linalg.qr(rng.standard_normal((10_000, 4, 2)))[0]
    scores = np.einsum("kij,ij->k", candidates, mat)
    procrustes_ok = bool(target >= np.max(scores) - 1e-9)

    ok = prox_ok and svt_ok and procrustes_ok
    _report(
        "criterion 4: proximal maps beat independent search oracles",
        ok,
        f"prox gap {worst_prox:.2e}, svt gap {worst_svt:.2e}, "
        f"polar slack {target - np.max(scores):.2e}",
    )


def test_criterion_5_algebra_identities():
    rng = np.random.default_rng(7)
    ok = True
    for _ in range(25):
        dims = tuple(int(d) for d in rng.integers(1, 6, size=3))
        t = rng.standard_normal(dims)
        for mode in (1, 2, 3):
            ok = ok and np.array_equal(fold(unfold(t, mode), mode, dims), t)
            a = rng.standard_normal((int(rng.integers(1, 6)), dims[mode - 1]))
            gap = np.max(np.abs(unfold(mode_product(t, a, mode), mode) - a @ unfold(t, mode)))
            ok = ok and gap <= 1e-12

    for _ in range(25):
        a, b, d, e = (rng.standard_normal((2, 2)) for _ in range(4))
        gap = np.max(np.abs(kronecker(a, b) @ kronecker(d, e) - kronecker(a @ d, b @ e)))
        ok = ok and gap <= 1e-12

    for _ in range(10):
        qa = random_orthonormal(rng, 5, 3)
        qb = random_orthonormal(rng, 4, 2)
        m = kronecker(qa, qb)
        v = rng.standard_normal(m.shape[1])
        v /= np.linalg.norm(v)
        for _ in range(300):
            v = m.T @ (m @ v)
            v /= np.linalg.norm(v)
        ok = ok and np.sqrt(v @ (m.T @ (m @ v))) <= 1 + 1e-8

    for _ in range(25):
        n1, n2, n3 = (int(d) for d in rng.integers(1, 6, size=3))
        a = rng.standard_normal(n1)
        x = rng.standard_normal((n2, n3))
        t = a[:, None, None] * x[None, :, :]
        ok = ok and np.array_equal(unfold(t, 2), kronecker(x, a[None, :]))
        ok = ok and abs(np.linalg.norm(t) - np.linalg.norm(a) * np.linalg.norm(x)) <= 1e-12

    _report("criterion 5: unfolding, Kronecker and outer-product identities", ok)


def test_criterion_6_rank_selection():
    start = time.time()
    spec = ScenarioSpec(
        m=20, p=4, ranks=(3, 3, 3), superdiag=(2.0, 2.0, 2.0),
        noise_scale=0.1, seeds=tuple(range(10)), sample_sizes=(3000,),
    )
    hits = 0
    for seed in range(10):
        scenario = make_scenario(spec, seed)
        panel = simulate(scenario.w, 0.01 * np.eye(20), length=3004, seed=seed)
        design = build_design(panel, 4)
        estimate = nnm_estimate(design, NnmConfig(max_iter=800))
        ranks = select_ranks(estimate.w, ridge_constant(20, 4, design.n_samples))
        hits += ranks == (3, 3, 3)
    elapsed = time.time() - start
    ok = hits >= 8 and elapsed < 120
    _report(
        "criterion 6: ridge-ratio rank recovery",
        ok,
        f"{hits}/10 seeds, {elapsed:.1f}s",
    )


def test_criterion_7_error_scale_linearity():
    start = time.time()
    m, p, s = 20, 4, 2
    targets = (0.30, 0.3625, 0.425, 0.4875, 0.55)
    sizes = tuple(int(round(4 * s * np.log(m * m * p) / u**2)) for u in targets)
    spec = ScenarioSpec(
        m=m, p=p, ranks=(2, 2, 2), superdiag=(2.0, 2.0),
        factor_style="gaussian-svd", noise_scale=1.0,
        seeds=tuple(range(5)), sample_sizes=sizes,
    )
    rows = [
        r
        for r in error_curve(spec, StdgrConfig(c=2.0, ranks=(2, 2, 2)))
        if r.method == "graph_tucker"
    ]
    xs = np.array([r.upsilon for r in rows])
    ys = np.array([r.mean_error for r in rows])
    corr = float(np.corrcoef(xs, ys)[0, 1])
    elapsed = time.time() - start
    ok = xs.min() < 0.31 and xs.max() > 0.54 and corr >= 0.9 and elapsed < 300
    _report(
        "criterion 7: estimation error grows linearly in the theoretical scale",
        ok,
        f"pearson {corr:.3f} over upsilon in [{xs.min():.3f}, {xs.max():.3f}], {elapsed:.1f}s",
    )


def test_criterion_8_graph_method_comparison():
    start = time.time()
    spec = ScenarioSpec(
        m=30, p=4, ranks=(3, 3, 3), superdiag=(2.0, 2.0, 2.0),
        factor_style="laplacian-eigenvectors", noise_scale=0.5,
        seeds=tuple(range(5)), sample_sizes=(200, 400, 800),
    )
    rows = error_curve(spec, StdgrConfig(c=2.0, ranks=(3, 3, 3)))
    tucker = {r.n_samples: r.mean_error for r in rows if r.method == "graph_tucker"}
    nuclear = {r.n_samples: r.mean_error for r in rows if r.method == "nnm"}
    wins = sum(tucker[t] < nuclear[t] for t in (200, 400, 800))
    ordered = [tucker[t] for t in (200, 400, 800)]
    monotone = all(b <= a for a, b in zip(ordered, ordered[1:]))
    elapsed = time.time() - start
    ok = wins / 3 >= 0.8 and monotone and elapsed < 300
    _report(
        "criterion 8: graph-regularized fit beats the nuclear-norm estimate",
        ok,
        f"wins {wins}/3, errors vs T {['%.3f' % e for e in ordered]}, {elapsed:.1f}s",
    )


# ---------------------------------------------------------------------------
# criteria 9 + 10 drive the command line end to end


@pytest.fixture(scope="module")
def noise_free_cli_setup(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("cli")
    spec = ScenarioSpec(
        m=10, p=2, ranks=(2, 2, 2), superdiag=(1.0, 1.0),
        noise_scale=0.0, seeds=(0,), sample_sizes=(1,),
    )
    scenario = make_scenario(spec, 0)
    w = rescale_to_spectral_radius(scenario.w, 0.999)
    rng = np.random.default_rng(123)
    panel = simulate(
        w, np.zeros((10, 10)), length=300, seed=0, burn_in=0,
        initial=rng.standard_normal((2, 10)),
    )
    panel_path = tmp / "panel.csv"
    write_panel_csv(str(panel_path), panel)
    cfg_path = tmp / "cfg.json"
    cfg_path.write_text(json.dumps({"nnm": {"lambda_nn": 1e-9, "max_iter": 4000, "tol": 1e-14}}))
    fit_args = [
        "fit", "--input", str(panel_path), "--p", "2", "--ranks", "2,2,2",
        "--train-fraction", "0.7", "--beta", "1e-8", "--alpha", "0",
        "--gamma", "0.1", "--c", "5", "--config", str(cfg_path),
    ]
    return tmp, panel_path, fit_args


def test_criterion_9_end_to_end_noise_free(noise_free_cli_setup, capsys):
    tmp, panel_path, fit_args = noise_free_cli_setup
    model = tmp / "model.json"
    fit_code = main(fit_args + ["--output", str(model)])
    capsys.readouterr()
    eval_code = main(
        ["eval", "--model", str(model), "--input", str(panel_path), "--train-fraction", "0.7"]
    )
    value = json.loads(capsys.readouterr().out)["mse"]
    ok = fit_code == EXIT_OK and eval_code == EXIT_OK and value <= 1e-6
    _report(
        "criterion 9: noise-free fit and held-out evaluation through the CLI",
        ok,
        f"test mse {value:.3e}",
    )


def test_criterion_10_determinism(noise_free_cli_setup, capsys):
    tmp, _, fit_args = noise_free_cli_setup
    m1, m2 = tmp / "det1.json", tmp / "det2.json"
    main(fit_args + ["--output", str(m1)])
    main(fit_args + ["--output", str(m2)])
    capsys.readouterr()
    models_equal = m1.read_bytes() == m2.read_bytes()
    diags_equal = (
        (tmp / "det1.json.diagnostics.jsonl").read_bytes()
        == (tmp / "det2.json.diagnostics.jsonl").read_bytes()
    )
    ok = models_equal and diags_equal
    _report(
        "criterion 10: repeated fits produce byte-identical model and diagnostics",
        ok,
        f"model files equal: {models_equal}, diagnostics equal: {diags_equal}",
    )
