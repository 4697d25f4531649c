use super::*;
use crate::extract::solve_qsdp;
use crate::poly::sum_of_moduli;
use crate::realize::Mode;
use crate::sdp::solve;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn word(n: usize, signed: &[i64]) -> Word {
    let letters: Vec<Letter> = signed.iter().map(|s| Letter::from_signed(*s).unwrap()).collect();
    normalize(&letters, n)
}

fn poly(n: usize, terms: &[(f64, &[i64])]) -> SymPoly {
    let ws: Vec<(Quaternion, Word)> = terms.iter().map(|(c, s)| (Quaternion::real(*c), word(n, s))).collect();
    SymPoly::from_terms(n, ws.iter().map(|(c, w)| (*c, w))).unwrap()
}

fn table1() -> QPOP {
    let f = poly(2, &[(2.0, &[1, 1]), (2.0, &[2, 2]), (2.0, &[1, 2]), (2.0, &[1, -2])]);
    let g = SymPoly::constant(2, 1.0).sub(&sum_of_moduli(2, &[0, 1])).unwrap();
    QPOP::new(f, vec![g], vec![]).unwrap()
}

fn bound(q: QSDP) -> f64 {
    let s = solve_qsdp(q, Mode::Economical, 1e-8).unwrap();
    assert!(s.status().is_usable(), "{:?}", s.solution.status);
    s.bound()
}

#[test]
fn table1_objective_has_unit_canonical_coefficients() {
    let p = table1();
    for s in [&[1i64, 1][..], &[2, 2], &[1, 2], &[1, -2]] {
        assert_eq!(p.objective.coefficient(&word(2, s)), Quaternion::ONE);
    }
    assert_eq!(p.case_tag, CaseTag::RealCoeff);
    assert_eq!(p.d_min(), 1);
}

#[test]
fn modulus_is_bounded_below_by_zero() {
    let p = QPOP::new(sum_of_moduli(1, &[0]), vec![], vec![]).unwrap();
    let b = bound(build_qsos(&p, &RelaxOptions::new(1)).unwrap());
    assert!(b.abs() < 1e-6, "{b}");
}

#[test]
fn table1_first_order_bound() {
    let q = build_qsos(&table1(), &RelaxOptions::new(1).basis(BasisKind::Mixed)).unwrap();
    let b = bound(q);
    assert!((b + 2.0 * 2f64.sqrt()).abs() < 5e-3, "{b}");
}

#[test]
fn order_below_minimum_is_rejected() {
    let p = QPOP::new(poly(1, &[(1.0, &[1, 1, -1, -1])]), vec![], vec![]).unwrap();
    assert!(matches!(build_qsos(&p, &RelaxOptions::new(1)), Err(Error::InvalidOptions(_))));
}

#[test]
fn unreachable_objective_word_is_a_degree_overflow() {
    // q₁² cannot be written with the q-only basis at order 1.
    let p = QPOP::new(poly(1, &[(1.0, &[-1, -1])]), vec![], vec![]).unwrap();
    assert!(matches!(build_qsos(&p, &RelaxOptions::new(1)), Err(Error::DegreeOverflow(_))));
    assert!(build_qsos(&p, &RelaxOptions::new(1).basis(BasisKind::Mixed)).is_ok());
    let p = QPOP::new(poly(2, &[(1.0, &[1, -2, 1])]), vec![], vec![]).unwrap();
    assert!(matches!(build_qsos(&p, &RelaxOptions::new(2)), Err(Error::DegreeOverflow(_))));
}

#[test]
fn quaternion_constraint_is_refused_unless_overridden() {
    let f = sum_of_moduli(1, &[0]);
    let mut g = SymPoly::constant(1, 1.0);
    g.add_term(Quaternion::I, &word(1, &[1]));
    let p = QPOP::new(f, vec![g], vec![]).unwrap();
    assert_eq!(p.case_tag, CaseTag::Other);
    assert!(matches!(build_qsos(&p, &RelaxOptions::new(1)), Err(Error::Unsupported(_))));
    let mut p = p;
    p.case_override = true;
    assert!(matches!(build_qsos(&p, &RelaxOptions::new(1)), Err(Error::Unsupported(_))));
}

#[test]
fn one_equation_per_canonical_word_and_real_self_adjoint_rhs() {
    let q = build_qsos(&table1(), &RelaxOptions::new(2).basis(BasisKind::Mixed)).unwrap();
    let words: Vec<&Word> = q.constraints.iter().map(|c| c.word.as_ref().unwrap()).collect();
    for w in &words {
        assert_eq!(canonical_rep(w).0, **w);
    }
    assert!(words.windows(2).all(|p| p[0] < p[1]));
    for c in &q.constraints {
        if c.word.as_ref().unwrap().is_self_adjoint() {
            assert_eq!(c.rhs.imag_abs(), 0.0);
        }
    }
}

#[test]
fn builds_are_deterministic() {
    let o = RelaxOptions::new(2).basis(BasisKind::Mixed);
    assert_eq!(build_qsos(&table1(), &o).unwrap(), build_qsos(&table1(), &o).unwrap());
}

#[test]
fn single_clique_sparse_matches_dense() {
    let p = table1();
    let o = RelaxOptions::new(1).basis(BasisKind::Mixed);
    assert_eq!(build_sparse_qsos(&p, &o).unwrap(), build_qsos(&p, &o).unwrap());
}

#[test]
fn csp_graph_examples() {
    let p = QPOP::new(sum_of_moduli(3, &[0, 1, 2]), vec![], vec![]).unwrap();
    assert!(csp_graph(&p).edges().is_empty());
    let g = SymPoly::constant(3, 1.0).sub(&sum_of_moduli(3, &[0, 1, 2])).unwrap();
    let p = QPOP::new(sum_of_moduli(3, &[0]), vec![g], vec![]).unwrap();
    assert_eq!(csp_graph(&p).edges(), vec![(0, 1), (0, 2), (1, 2)]);
}

#[test]
fn constraint_fitting_two_cliques_goes_to_the_first() {
    let g = SymPoly::constant(3, 1.0).sub(&sum_of_moduli(3, &[1])).unwrap();
    let p = QPOP::new(sum_of_moduli(3, &[0]), vec![g], vec![]).unwrap();
    let (ineq, _) = assign_constraints(&[vec![0, 1], vec![1, 2]], &p).unwrap();
    assert_eq!(ineq, vec![vec![0], vec![]]);
}

#[test]
fn strengthened_basis_for_one_variable() {
    let p = QPOP::new(sum_of_moduli(1, &[0]), vec![], vec![]).unwrap();
    let q = build_strengthened(&p, &RelaxOptions::new(1)).unwrap();
    let b = q.blocks.iter().find(|b| b.role == BlockRole::Strengthen(0)).unwrap();
    assert_eq!(b.basis, vec![word(1, &[-1]), word(1, &[-1, 1])]);
    assert_eq!(b.basis[1].alpha(), &[1]);
    assert!(bound(q).abs() < 1e-6);
}

#[test]
fn rsos1_constant_objective() {
    let p = QPOP::new(SymPoly::constant(2, 1.0), vec![], vec![]).unwrap();
    let s = solve(&build_rsos1(&p).unwrap(), 1e-9);
    assert!(s.status.is_usable());
    assert!((s.value() - 1.0).abs() < 1e-6);
}

#[test]
fn quadratic_form_round_trips_through_from_gram() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let n = 3;
    let m = crate::quaternion::QMatrix::from_fn(n + 1, n + 1, |_, _| {
        Quaternion::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let h = crate::quaternion::hermitian_part(&m).unwrap();
    let f = from_gram(&basis(n, 1, BasisKind::VarsOnly, None), &h).unwrap();
    let back = quadratic_form(&f).unwrap();
    assert!(back.matrix().sub(h.matrix()).unwrap().norm() < 1e-12);
}

#[test]
fn real_gram_restriction_refuses_quaternion_data() {
    let mut f = sum_of_moduli(1, &[0]);
    f.add_term(Quaternion::J, &word(1, &[1]));
    let p = QPOP::new(f, vec![], vec![]).unwrap();
    let q = build_qsos(&p, &RelaxOptions::new(1)).unwrap();
    assert!(matches!(real_gram_restrict(&q), Err(Error::NonReal(_))));
    let c = QPOP::new(SymPoly::constant(1, 3.0), vec![], vec![]).unwrap();
    let q = build_qsos(&c, &RelaxOptions::new(1)).unwrap();
    assert!((bound(real_gram_restrict(&q).unwrap()) - 3.0).abs() < 1e-6);
    assert!((bound(q) - 3.0).abs() < 1e-6);
}

#[test]
fn dirac_moments_give_rank_one_moment_matrix() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let n = 2;
    let point: Vec<Quaternion> = (0..n)
        .map(|_| Quaternion::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let opts = RelaxOptions::new(2).basis(BasisKind::Mixed);
    let q = build_qsos(&table1(), &opts).unwrap();
    let words: Vec<Word> = q.constraints.iter().map(|c| c.word.clone().unwrap()).collect();
    let y = Moments::dirac(&point, &words);
    let (m, loc, _) = build_moment_matrices(&y, &table1(), &opts).unwrap();
    let w = basis(n, 2, BasisKind::Mixed, None);
    let v: Vec<Quaternion> = w.iter().map(|x| crate::words::eval_word(x, &point)).collect();
    let vv = crate::quaternion::QMatrix::outer(&v, &v);
    assert!(m.matrix().sub(&vv).unwrap().norm() < 1e-10 * (1.0 + vv.norm()));
    // Localizing matrix of g is g(p)·(sub-basis moment matrix).
    let gp = table1().ineqs[0].eval(&point);
    let w1 = basis(n, 1, BasisKind::Mixed, None);
    let m1 = moment_matrix(&y, &w1).unwrap();
    assert!(loc[0].matrix().sub(&m1.matrix().scale(gp)).unwrap().norm() < 1e-10);
    // L(f) is f(p).
    assert!((y.apply(&table1().objective).unwrap() - table1().eval(&point)).abs() < 1e-10);
}

#[test]
fn dirac_at_origin_is_e11() {
    let opts = RelaxOptions::new(1);
    let p = QPOP::new(sum_of_moduli(2, &[0, 1]), vec![], vec![]).unwrap();
    let q = build_qsos(&p, &opts).unwrap();
    let words: Vec<Word> = q.constraints.iter().map(|c| c.word.clone().unwrap()).collect();
    let y = Moments::dirac(&[Quaternion::ZERO; 2], &words);
    let (m, _, _) = build_moment_matrices(&y, &p, &opts).unwrap();
    assert!(m.matrix().sub(HermitianQMatrix::diag(&[1.0, 0.0, 0.0]).matrix()).unwrap().norm() < 1e-14);
}

#[test]
fn unit_localizer_is_the_sub_moment_matrix() {
    let opts = RelaxOptions::new(2);
    let p = QPOP::new(sum_of_moduli(2, &[0, 1]), vec![SymPoly::constant(2, 1.0)], vec![]).unwrap();
    let q = build_qsos(&p, &opts).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let mut y = Moments::new();
    for c in &q.constraints {
        let u = c.word.as_ref().unwrap();
        y.insert(u, Quaternion::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    }
    let (_, loc, _) = build_moment_matrices(&y, &p, &opts).unwrap();
    let sub = moment_matrix(&y, &basis(2, 2, BasisKind::VarsOnly, None)).unwrap();
    assert!(loc[0].matrix().sub(sub.matrix()).unwrap().norm() < 1e-14);
}

#[test]
fn dual_moments_reproduce_the_bound() {
    let p = table1();
    let opts = RelaxOptions::new(1).basis(BasisKind::Mixed);
    let s = solve_qsdp(build_qsos(&p, &opts).unwrap(), Mode::Economical, 1e-8).unwrap();
    let y = s.moments().unwrap();
    assert!((y.get(&Word::one(2)).unwrap().r - 1.0).abs() < 1e-6);
    assert!((y.apply(&p.objective).unwrap() - s.bound()).abs() < 1e-5);
    let (m, loc, _) = build_moment_matrices(&y, &p, &opts).unwrap();
    assert!(m.is_psd(1e-6).unwrap());
    assert!(loc[0].is_psd(1e-6).unwrap());
    // The moment matrix is the dual slack of the Gram block.
    let z = crate::realize::recover_multipliers(&s.solution.y, &s.map);
    let adj = s.qsdp.adjoint_apply(&z).unwrap();
    assert!(adj[2].matrix().sub(m.matrix()).unwrap().norm() < 1e-9);
}

#[test]
fn bounds_are_valid_on_feasible_samples() {
    let p = table1();
    let b = bound(build_qsos(&p, &RelaxOptions::new(1).basis(BasisKind::Mixed)).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    for _ in 0..50 {
        let mut x: Vec<Quaternion> = (0..2)
            .map(|_| Quaternion::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let r = crate::quaternion::vec_norm(&x);
        if r > 1.0 {
            x = x.iter().map(|q| q.scale(1.0 / r)).collect();
        }
        assert!(p.violation(&x) <= 1e-12);
        assert!(p.eval(&x) >= b - 1e-6 * (1.0 + b.abs()));
    }
}
