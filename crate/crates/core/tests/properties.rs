use std::collections::BTreeMap;

use modclass::algebroid::{blades_of_degree, LieAlgebroid};
use modclass::cli::corpus_file;
use modclass::cli::problem::parse_problem;
use modclass::cli::workspace::build;
use modclass::exterior::{blade_indices, contract, wedge, GradedElement, Role};
use modclass::field::{BaseContext, RatFunc};
use modclass::random;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn ctx2() -> BaseContext {
    BaseContext::new(["x", "y"]).unwrap()
}

/// Rational function p/q in two variables with q nonzero.
fn ratfunc(r: &mut ChaCha8Rng) -> RatFunc {
    let p = random::poly(r, 2, 3);
    let q = random::poly(r, 2, 2);
    if r.gen_bool(0.3) {
        p
    } else {
        &p / &q
    }
}

fn algebroids() -> Vec<LieAlgebroid> {
    let load = |file: &str, name: &str| {
        let ws = build(&parse_problem(corpus_file(file).unwrap()).unwrap()).unwrap();
        (*ws.algebroid(name).unwrap().algebroid).clone()
    };
    vec![
        load("tangent-r2.alg", "TR2"),
        load("aff1.alg", "aff1"),
        load("borel-sl2.alg", "sl2"),
        load("line-anchor.alg", "sl2-line"),
        load("sl3-chain.alg", "sl3"),
    ]
}

fn multivector(r: &mut ChaCha8Rng, rank: usize, degree: usize, vars: usize) -> GradedElement {
    random::form(r, rank, degree, vars, 2).recast(Role::Multivector)
}

/// `i_{E^{j1}∧…∧E^{jp}} = i_{E^{j1}} ∘ … ∘ i_{E^{jp}}` on index lists.
fn contract_oracle(alpha: &GradedElement, q: &GradedElement) -> GradedElement {
    let n = q.rank();
    let mut out = GradedElement::zero(n, q.degree() - alpha.degree(), q.role());
    for (ba, fa) in alpha.blades() {
        for (bq, fq) in q.blades() {
            let mut idx = blade_indices(bq);
            let mut sign = 1i64;
            let mut alive = true;
            for j in blade_indices(ba).into_iter().rev() {
                match idx.iter().position(|&i| i == j) {
                    Some(s) => {
                        if s % 2 == 1 {
                            sign = -sign;
                        }
                        idx.remove(s);
                    }
                    None => {
                        alive = false;
                        break;
                    }
                }
            }
            if alive {
                let c = &(fa * fq) * &RatFunc::from_int(sign);
                let t = GradedElement::term(n, q.role(), &idx, c).unwrap();
                out = out.add(&t).unwrap();
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_axioms(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (a, b, c) = (ratfunc(&mut r), ratfunc(&mut r), ratfunc(&mut r));
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
        if !a.is_zero() {
            prop_assert!((&a * &a.inv().unwrap()).is_one());
        }
    }

    #[test]
    fn derivative_is_a_derivation(seed in any::<u64>(), var in 0usize..2) {
        let mut r = rng(seed);
        let (f, g) = (ratfunc(&mut r), ratfunc(&mut r));
        prop_assert_eq!((&f * &g).partial(var), &(&f.partial(var) * &g) + &(&f * &g.partial(var)));
        if !g.is_zero() {
            let quotient = &(&(&f.partial(var) * &g) - &(&f * &g.partial(var))) / &(&g * &g);
            prop_assert_eq!((&f / &g).partial(var), quotient);
        }
    }

    #[test]
    fn print_then_parse(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = ratfunc(&mut r);
        let ctx = ctx2();
        let text = f.display(&ctx).to_string();
        prop_assert_eq!(ctx.parse(&text).unwrap(), f, "{}", text);
    }

    #[test]
    fn wedge_associative_and_graded(seed in any::<u64>(), p in 0usize..3, q in 0usize..3, s in 0usize..3) {
        let mut r = rng(seed);
        let n = 4;
        let a = random::form(&mut r, n, p, 2, 2);
        let b = random::form(&mut r, n, q, 2, 2);
        let c = random::form(&mut r, n, s, 2, 2);
        let left = wedge(&wedge(&a, &b).unwrap(), &c).unwrap();
        let right = wedge(&a, &wedge(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
        let ab = wedge(&a, &b).unwrap();
        let ba = wedge(&b, &a).unwrap();
        let expected = if p * q % 2 == 1 { ba.neg() } else { ba };
        prop_assert_eq!(ab, expected);
    }

    #[test]
    fn contraction_matches_oracle(seed in any::<u64>(), p in 0usize..4, extra in 0usize..2) {
        let mut r = rng(seed);
        let n = 4;
        let q = (p + extra).min(n);
        let alpha = random::form(&mut r, n, p.min(q), 2, 1);
        let big_q = multivector(&mut r, n, q, 2);
        prop_assert_eq!(contract(&alpha, &big_q).unwrap(), contract_oracle(&alpha, &big_q));
    }

    #[test]
    fn contraction_composes(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = 4;
        let a = random::form(&mut r, n, 1, 2, 1);
        let b = random::form(&mut r, n, 1, 2, 1);
        let big_q = multivector(&mut r, n, 3, 2);
        let ab = wedge(&a, &b).unwrap();
        let nested = contract(&a, &contract(&b, &big_q).unwrap()).unwrap();
        prop_assert_eq!(contract(&ab, &big_q).unwrap(), nested);
    }

    #[test]
    fn differential_squares_to_zero(seed in any::<u64>(), which in 0usize..5, k in 0usize..4) {
        let e = &algebroids()[which];
        let mut r = rng(seed);
        let form = random::form(&mut r, e.rank(), k.min(e.rank()), e.ctx().dim(), 3);
        let dd = e.d(&e.d(&form).unwrap()).unwrap();
        prop_assert!(dd.is_zero(), "{}", dd);
    }

    #[test]
    fn schouten_graded_jacobi(seed in any::<u64>(), which in 0usize..5, dp in 1usize..3, dq in 1usize..3, dr in 0usize..3) {
        let e = &algebroids()[which];
        let (n, m) = (e.rank(), e.ctx().dim());
        let mut r = rng(seed);
        let p = multivector(&mut r, n, dp.min(n), m);
        let q = multivector(&mut r, n, dq.min(n), m);
        let s = multivector(&mut r, n, dr.min(n), m);
        let br = |a: &GradedElement, b: &GradedElement| e.schouten(a, b).unwrap();
        let lhs = br(&p, &br(&q, &s));
        let first = br(&br(&p, &q), &s);
        let second = br(&q, &br(&p, &s));
        let sign_neg = (p.degree() + 1) * (q.degree() + 1) % 2 == 1;
        let rhs = if sign_neg { first.sub(&second) } else { first.add(&second) }.unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().is_zero());
    }
}

#[test]
fn edited_cotangent_structure_functions_fail_validation() {
    let ws = build(&parse_problem(corpus_file("twisted-r4.alg").unwrap()).unwrap()).unwrap();
    let cot = ws.twisted[0].report.structure.cotangent().expect("valid twisted structure");
    let (_, report) = cot.validate();
    assert!(report.is_valid());
    let mut frame_checks = 0;
    for ((i, j), coeffs) in cot.brackets() {
        let mut edited: BTreeMap<(usize, usize), Vec<RatFunc>> = cot.brackets();
        let mut bumped = coeffs.clone();
        bumped[(i + j) % cot.rank()] = &bumped[(i + j) % cot.rank()] + &RatFunc::var(0);
        edited.insert((i, j), bumped);
        let (_, report) = cot.with_brackets(edited).unwrap().validate();
        assert!(!report.is_valid(), "edit of [E{}, E{}] went unnoticed", i + 1, j + 1);
        frame_checks += 1;
    }
    assert!(frame_checks > 0);
}

#[test]
fn blade_enumeration_counts() {
    for n in 0..6 {
        let total: usize = (0..=n).map(|k| blades_of_degree(n, k).len()).sum();
        assert_eq!(total, 1 << n);
    }
}
