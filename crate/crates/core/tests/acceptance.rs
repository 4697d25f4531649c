//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

use std::time::Instant;

use faer::{Mat, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qsoskit::apps::{generate, sample_feasible, table1, Family, Instance, InstanceSpec};
use qsoskit::extract::{extract_minimizer, solve_qsdp};
use qsoskit::pipeline::{realize, run, Method, RunConfig};
use qsoskit::poly::{from_gram, sum_of_moduli};
use qsoskit::qsdp::{QBlock, QConstraint, QEntry, QSDP};
use qsoskit::quaternion::{eig_hermitian, hermitian_part, lambda_embed, x_embed};
use qsoskit::realize::{recover_quaternion, Mode};
use qsoskit::relax::{Graph, RelaxOptions, QPOP};
use qsoskit::sdp::{read_sdpa, solve, write_sdpa};
use qsoskit::words::basis;
use qsoskit::{BasisKind, HermitianQMatrix, QMatrix, Quaternion, SymPoly};

const TOL: f64 = 1e-9;

/// Every (problem, bound) pair solved by the suite, for the sampling check.
#[derive(Default)]
struct Ledger {
    solved: Vec<(String, QPOP, f64)>,
}

impl Ledger {
    fn record(&mut self, label: impl Into<String>, p: &QPOP, bound: f64) {
        self.solved.push((label.into(), p.clone(), bound));
    }
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

fn bound(ledger: &mut Ledger, label: &str, p: &QPOP, method: Method, relax: RelaxOptions) -> f64 {
    bound_at(ledger, label, p, method, relax, TOL)
}

fn bound_at(ledger: &mut Ledger, label: &str, p: &QPOP, method: Method, relax: RelaxOptions, tol: f64) -> f64 {
    let mut cfg = RunConfig::new(relax);
    cfg.tol = tol;
    let r = run(p, method, &cfg).unwrap_or_else(|e| panic!("{label}: {e}"));
    assert!(r.usable(), "{label}: solver status {}", r.status);
    ledger.record(format!("{label} [{}]", method.name()), p, r.bound);
    r.bound
}

fn inst(family: Family, n: usize, seed: u64) -> Instance {
    generate(&InstanceSpec::new(family, n, seed)).unwrap()
}

fn table1_reproduction(ledger: &mut Ledger) -> Outcome {
    let p = table1().qpop;
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut highest = f64::NEG_INFINITY;
    let mut bounds = Vec::new();
    for d in 1..=3 {
        let relax = RelaxOptions::new(d).basis(BasisKind::Mixed);
        let b = bound_at(ledger, &format!("table1 d={d}"), &p, Method::Qsos, relax, qsoskit::sdp::DEFAULT_TOL);
        worst = worst.max((b + 2.82842).abs());
        highest = highest.max(b);
        bounds.push(format!("{b:.5}"));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= 5e-3 && highest <= -2.5,
        format!("bounds [{}], max deviation {worst:.1e}, below -2 by {:.3}, {secs:.1} s", bounds.join(", "), -2.0 - highest),
    )
}

fn rq(rng: &mut ChaCha8Rng) -> Quaternion {
    Quaternion::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

fn random_qsdp(rng: &mut ChaCha8Rng) -> QSDP {
    let nb = rng.random_range(1..=3);
    let dims: Vec<usize> = (0..nb).map(|_| rng.random_range(1..=6)).collect();
    let x0: Vec<HermitianQMatrix> = dims
        .iter()
        .map(|&d| {
            let g = QMatrix::from_fn(d, d, |_, _| rq(rng));
            let pd = g.adjoint().matmul(&g).unwrap().add(&QMatrix::identity(d)).unwrap();
            hermitian_part(&pd).unwrap()
        })
        .collect();
    let entries = |rng: &mut ChaCha8Rng, hermitian: bool| -> Vec<QEntry> {
        let mut es = Vec::new();
        for (b, &d) in dims.iter().enumerate() {
            let m = QMatrix::from_fn(d, d, |_, _| rq(rng));
            let m = if hermitian { hermitian_part(&m).unwrap().into_matrix() } else { m };
            for r in 0..d {
                for c in 0..d {
                    es.push(QEntry { block: b, row: r, col: c, coef: m[(r, c)] });
                }
            }
        }
        es
    };
    let trace: Vec<QEntry> =
        dims.iter().enumerate().flat_map(|(b, &d)| (0..d).map(move |r| QEntry { block: b, row: r, col: r, coef: Quaternion::ONE })).collect();
    let mut constraints = vec![QConstraint { word: None, rhs: QSDP::apply(&trace, &x0), entries: trace }];
    let m = rng.random_range(1..=7);
    for _ in 0..m {
        let hermitian = rng.random_bool(0.5);
        let es = entries(rng, hermitian);
        constraints.push(QConstraint { word: None, rhs: QSDP::apply(&es, &x0), entries: es });
    }
    let objective = entries(rng, true);
    QSDP { blocks: dims.iter().map(|&d| QBlock::plain(d)).collect(), constraints, objective }
}

fn realization_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut gap, mut psd, mut res) = (0.0f64, 0.0f64, 0.0f64);
    let mut ok = true;
    for _ in 0..10 {
        let q = random_qsdp(&mut rng);
        let e = solve_qsdp(q.clone(), Mode::Economical, TOL).unwrap();
        let n = solve_qsdp(q.clone(), Mode::Naive, TOL).unwrap();
        ok &= e.status().is_usable() && n.status().is_usable();
        gap = gap.max((e.bound() - n.bound()).abs() / (1.0 + e.bound().abs()));
        for s in [&e, &n] {
            let h = recover_quaternion(&s.solution, &s.map).unwrap();
            for b in &h {
                psd = psd.max(-eig_hermitian(b, 1e-6).unwrap().values[0]);
            }
            res = res.max(q.residual(&h));
        }
    }
    outcome(
        ok && gap <= 1e-6 && psd <= 1e-6 && res <= 1e-6,
        format!("max relative gap {gap:.1e}, min eigenvalue >= {:.1e}, max residual {res:.1e}", -psd),
    )
}

fn qcqp_equivalence(ledger: &mut Ledger) -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    for family in [Family::Ne1Ball, Family::Ne1Norm, Family::Ne1Quat] {
        for (k, n) in (5..=8).chain(5..=5).enumerate() {
            let p = inst(family, n, 100 + k as u64).qpop;
            let label = format!("{} n={n}", family.name());
            let a = bound(ledger, &label, &p, Method::Qsos, RelaxOptions::new(1));
            let b = bound(ledger, &label, &p, Method::Rsos1, RelaxOptions::new(1));
            worst = worst.max((a - b).abs() / (1.0 + a.abs()));
            count += 1;
        }
    }
    outcome(worst <= 1e-5, format!("{count} instances, max |QSOS - RSOS-1|/(1+|opt|) = {worst:.1e}"))
}

fn lambda_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut quad, mut mult, mut trans, mut spec) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for t in 0..100 {
        let n = 1 + t % 6;
        let h = hermitian_part(&QMatrix::from_fn(n, n, |_, _| rq(&mut rng))).unwrap();
        let v: Vec<Quaternion> = (0..n).map(|_| rq(&mut rng)).collect();
        let l = lambda_embed(h.matrix()).unwrap();
        let x = x_embed(&v);
        let xtlx: f64 = (0..4 * n).map(|r| (0..4 * n).map(|c| x[r] * l[(r, c)] * x[c]).sum::<f64>()).sum();
        quad = quad.max((h.quad_form(&v).unwrap() - xtlx).abs());

        let a = QMatrix::from_fn(n, n, |_, _| rq(&mut rng));
        let b = QMatrix::from_fn(n, n, |_, _| rq(&mut rng));
        let lab = lambda_embed(&a.matmul(&b).unwrap()).unwrap();
        let prod: Mat<f64> = lambda_embed(&a).unwrap() * lambda_embed(&b).unwrap();
        mult = mult.max((&lab - &prod).norm_max());
        let la_t = lambda_embed(&a).unwrap().transpose().to_owned();
        trans = trans.max((&lambda_embed(&a.adjoint()).unwrap() - &la_t).norm_max());

        let real = l.self_adjoint_eigen(Side::Lower).unwrap();
        let s = real.S().column_vector();
        let q = eig_hermitian(&h, 1e-9).unwrap().values;
        let scale = 1.0 + q.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (i, lam) in q.iter().enumerate() {
            for k in 0..4 {
                spec = spec.max((s[4 * i + k] - lam).abs() / scale);
            }
        }
    }
    outcome(
        quad <= 1e-12 && mult <= 1e-12 && trans <= 1e-12 && spec <= 1e-8,
        format!("quadratic form {quad:.1e}, product {mult:.1e}, transpose {trans:.1e}, quadruple spectrum {spec:.1e}"),
    )
}

fn qmmc_tightness(ledger: &mut Ledger) -> Outcome {
    let mut worst = 0.0f64;
    for (k, n) in [3usize, 6, 9, 12, 15].into_iter().enumerate() {
        let i = inst(Family::Qmmc, n, 30 + k as u64);
        let b = bound(ledger, &format!("qmmc n={n}"), &i.qpop, Method::Qsos, RelaxOptions::new(1));
        let oracle = i.meta.oracle.unwrap();
        worst = worst.max((b - oracle).abs() / oracle.abs().max(1.0));
    }
    outcome(worst <= 1e-6, format!("max relative deviation from the eigenvalue oracle {worst:.1e}"))
}

fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut g = Graph::new(n);
    for &(a, b) in edges {
        g.add_edge(a, b);
    }
    g.components().len() == 1
}

fn zero_noise_sync(ledger: &mut Ledger) -> Outcome {
    let mut found = Vec::new();
    let mut seed = 0;
    while found.len() < 3 {
        let n = 5 + found.len() % 2;
        let mut s = InstanceSpec::new(Family::Sync, n, seed);
        s.extra.p = Some(0.4);
        s.extra.noise = Some(0.0);
        let i = generate(&s).unwrap();
        if connected(n, i.meta.edges.as_ref().unwrap()) {
            found.push(i);
        }
        seed += 1;
    }
    let mut ok = true;
    let mut lines = Vec::new();
    for i in &found {
        let e = i.meta.edges.as_ref().unwrap().len() as f64;
        let opts = RelaxOptions::new(1);
        let solved = solve_qsdp(qsoskit::relax::build(&i.qpop, &opts).unwrap(), Mode::Economical, TOL).unwrap();
        ledger.record(format!("sync n={}", i.qpop.n), &i.qpop, solved.bound());
        let x = extract_minimizer(&i.qpop, &solved, 1e-6).unwrap();
        let cert = x.certificate.as_ref();
        let gap = cert.map_or(f64::INFINITY, |c| c.gap.abs());
        let feas = cert.map_or(f64::INFINITY, |c| c.constraint_residuals.iter().fold(0.0, |a: f64, b| a.max(*b)));
        let gauge = cert
            .and_then(|c| c.candidate.as_ref())
            .map_or(f64::INFINITY, |c| qsoskit::extract::gauge_distance(c, i.meta.truth.as_ref().unwrap()));
        let ratio = x.rank_report.second_ratio();
        let pass = (solved.bound() + e).abs() <= 1e-5 * e && ratio <= 1e-6 && gap <= 1e-5 * e && feas <= 1e-5 && gauge <= 1e-4;
        ok &= pass;
        lines.push(format!(
            "n={} |E|={e} bound {:.6} ratio {ratio:.1e}{} gap {gap:.1e} gauge {gauge:.1e}",
            i.qpop.n,
            solved.bound(),
            if x.completed { " on the degree-one block, odd moments completed" } else { "" }
        ));
    }
    outcome(ok, lines.join("; "))
}

fn monotonicity(ledger: &mut Ledger) -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    let cases = [(Family::Ne3Ball, 1), (Family::Ne3Ball, 2), (Family::Ne3Norm, 1), (Family::Ne3Norm, 2), (Family::Ne3Ball, 2)];
    for (k, (f, n)) in cases.into_iter().enumerate() {
        let p = inst(f, n, 50 + k as u64).qpop;
        let label = format!("{} n={n}", f.name());
        let b2 = bound(ledger, &format!("{label} d=2"), &p, Method::Qsos, RelaxOptions::new(2));
        let b3 = bound(ledger, &format!("{label} d=3"), &p, Method::Qsos, RelaxOptions::new(3));
        worst = worst.max((b2 - b3) / (1.0 + b2.abs()));
    }
    outcome(worst <= 1e-6, format!("max (bound(2) - bound(3))/(1+|bound|) = {worst:.1e}"))
}

/// Overlapping windows of four variables with unit-modulus constraints.
fn chain_instance(n: usize, seed: u64) -> QPOP {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = SymPoly::zero(n);
    for start in (0..n - 2).step_by(2) {
        let w: Vec<usize> = (start..(start + 4).min(n)).collect();
        let b = basis(n, 1, BasisKind::VarsOnly, Some(&w));
        let a = Mat::from_fn(b.len(), b.len(), |_, _| rng.random_range(-1.0..1.0));
        let q = HermitianQMatrix::from_real_symmetric(&Mat::from_fn(b.len(), b.len(), |i, j| 0.5 * (a[(i, j)] + a[(j, i)]))).unwrap();
        f = f.add(&from_gram(&b, &q).unwrap()).unwrap();
    }
    let eqs = (0..n).map(|i| sum_of_moduli(n, &[i]).sub(&SymPoly::constant(n, 1.0)).unwrap()).collect();
    QPOP::new(f, vec![], eqs).unwrap()
}

fn sparsity(ledger: &mut Ledger) -> Outcome {
    let mut sep = 0.0f64;
    for seed in 0..3 {
        let p = inst(Family::Ne5, 20, 70 + seed).qpop;
        let d = bound(ledger, "ne5 n=20", &p, Method::Qsos, RelaxOptions::new(1));
        let s = bound(ledger, "ne5 n=20", &p, Method::Sparse, RelaxOptions::new(1));
        sep = sep.max((d - s).abs() / (1.0 + d.abs()));
    }
    let mut over = f64::NEG_INFINITY;
    for (k, n) in [6usize, 8, 10].into_iter().enumerate() {
        let p = chain_instance(n, 80 + k as u64);
        let d = bound(ledger, &format!("chain n={n}"), &p, Method::Qsos, RelaxOptions::new(1));
        let s = bound(ledger, &format!("chain n={n}"), &p, Method::Sparse, RelaxOptions::new(1));
        over = over.max((s - d) / (1.0 + d.abs()));
    }
    outcome(sep <= 1e-5 && over <= 1e-6, format!("separable max relative difference {sep:.1e}; non-separable max excess {over:.1e}"))
}

fn strengthening(ledger: &mut Ledger) -> Outcome {
    let mut ball = f64::NEG_INFINITY;
    let mut norm = 0.0f64;
    for (k, n) in [1usize, 2, 2, 3, 3].into_iter().enumerate() {
        let p = inst(Family::Ne3Ball, n, 90 + k as u64).qpop;
        let a = bound(ledger, &format!("ne3_ball n={n}"), &p, Method::Qsos, RelaxOptions::new(2));
        let b = bound(ledger, &format!("ne3_ball n={n}"), &p, Method::QsosStrengthened, RelaxOptions::new(2));
        ball = ball.max(a - b);
        let p = inst(Family::Ne3Norm, n, 95 + k as u64).qpop;
        let a = bound(ledger, &format!("ne3_norm n={n}"), &p, Method::Qsos, RelaxOptions::new(2));
        let b = bound(ledger, &format!("ne3_norm n={n}"), &p, Method::QsosStrengthened, RelaxOptions::new(2));
        norm = norm.max(rel(a, b));
    }
    outcome(ball <= 1e-7 && norm <= 1e-5, format!("ball: max (plain - strengthened) {ball:.1e}; norm: max relative difference {norm:.1e}"))
}

fn real_gram(ledger: &mut Ledger) -> Outcome {
    let mut worst = 0.0f64;
    let cases = [(Family::Ne1Ball, 3, 1), (Family::Ne1Norm, 2, 1), (Family::Ne3Ball, 2, 2), (Family::Ne3Norm, 2, 2), (Family::Ne3Ball, 1, 2)];
    for (k, (f, n, d)) in cases.into_iter().enumerate() {
        let p = inst(f, n, 110 + k as u64).qpop;
        let label = format!("{} n={n}", f.name());
        let a = bound(ledger, &label, &p, Method::Qsos, RelaxOptions::new(d));
        let b = bound(ledger, &format!("{label} real Gram"), &p, Method::Qsos, RelaxOptions::new(d).real_gram(true));
        worst = worst.max(rel(a, b));
    }
    outcome(worst <= 1e-5, format!("max relative difference {worst:.1e}"))
}

fn sampling(ledger: &Ledger) -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    let mut label = String::new();
    for (k, (name, p, b)) in ledger.solved.iter().enumerate() {
        let xs = match sample_feasible(p, 50, 1000 + k as u64) {
            Ok(xs) => xs,
            Err(e) => return outcome(false, format!("{name}: {e}")),
        };
        for x in xs {
            let slack = (b - p.eval(&x)) / (1.0 + b.abs());
            if slack > worst {
                worst = slack;
                label.clone_from(name);
            }
        }
    }
    outcome(worst <= 1e-5, format!("{} solved problems x 50 samples, max (bound - f(x))/(1+|bound|) = {worst:.1e} ({label})", ledger.solved.len()))
}

fn sdpa_round_trip(ledger: &mut Ledger) -> Outcome {
    let mut sync = InstanceSpec::new(Family::Sync, 4, 5);
    sync.extra.p = Some(0.6);
    let cases: Vec<(&str, Instance, Method, RelaxOptions)> = vec![
        ("table1", table1(), Method::Qsos, RelaxOptions::new(1).basis(BasisKind::Mixed)),
        ("ne1_ball", inst(Family::Ne1Ball, 3, 120), Method::Rsos1, RelaxOptions::new(1)),
        ("ne3_norm", inst(Family::Ne3Norm, 2, 121), Method::QsosStrengthened, RelaxOptions::new(2)),
        ("ne5", inst(Family::Ne5, 10, 122), Method::Sparse, RelaxOptions::new(1)),
        ("sync", generate(&sync).unwrap(), Method::Qsos, RelaxOptions::new(1)),
    ];
    let mut worst = 0.0f64;
    let mut stable = true;
    for (name, i, method, relax) in cases {
        let mut cfg = RunConfig::new(relax);
        cfg.tol = TOL;
        let direct = realize(&i.qpop, method, &cfg).unwrap();
        let text = write_sdpa(&direct, Some(name));
        let back = read_sdpa(&text).unwrap();
        stable &= write_sdpa(&back, Some(name)) == text;
        let a = solve(&direct, TOL);
        let b = solve(&back, TOL);
        ledger.record(format!("{name} via SDPA"), &i.qpop, b.value());
        worst = worst.max((a.value() - b.value()).abs());
    }
    outcome(worst <= 1e-7 && stable, format!("max |direct - reimported| = {worst:.1e}, re-export byte-identical: {stable}"))
}

fn main() {
    let mut ledger = Ledger::default();
    let start = Instant::now();
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    results.push((1, "mixed-basis benchmark at orders 1 to 3", table1_reproduction(&mut ledger)));
    results.push((2, "economical vs naive realization", realization_equivalence()));
    results.push((3, "first-order QCQP: QSOS vs RSOS-1", qcqp_equivalence(&mut ledger)));
    results.push((4, "Lambda-embedding identities", lambda_identities()));
    results.push((5, "QMMC tightness", qmmc_tightness(&mut ledger)));
    results.push((6, "zero-noise synchronization", zero_noise_sync(&mut ledger)));
    results.push((7, "monotonicity in the order", monotonicity(&mut ledger)));
    results.push((8, "sparsity consistency", sparsity(&mut ledger)));
    results.push((9, "strengthening orderings", strengthening(&mut ledger)));
    results.push((10, "real-Gram restriction", real_gram(&mut ledger)));
    results.push((12, "SDPA round trip", sdpa_round_trip(&mut ledger)));
    results.push((11, "lower-bound validity sampling", sampling(&ledger)));
    results.sort_by_key(|r| r.0);
    let mut failed = 0;
    for (k, name, o) in &results {
        println!("{} [{k:>2}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} of {} criteria passed in {:.1} s", results.len() - failed, results.len(), start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
