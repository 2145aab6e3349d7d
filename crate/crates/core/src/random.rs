//! Seeded random polynomial data for spot checks.

use num_rational::BigRational;
use rand::Rng;

use crate::exterior::{GradedElement, Role};
use crate::field::{Monomial, Poly, RatFunc};

/// Random polynomial in `vars` variables of total degree at most `max_degree`
/// with small integer coefficients. Over a point this is a nonzero constant.
pub fn poly<R: Rng>(rng: &mut R, vars: usize, max_degree: u32) -> RatFunc {
    let terms = rng.gen_range(1..=3);
    let mut out = Poly::zero();
    for _ in 0..terms {
        let mut exps = vec![0u32; vars];
        if vars > 0 {
            let deg = rng.gen_range(0..=max_degree);
            for _ in 0..deg {
                exps[rng.gen_range(0..vars)] += 1;
            }
        }
        let c = loop {
            let c: i64 = rng.gen_range(-3..=3);
            if c != 0 {
                break c;
            }
        };
        out = &out + &Poly::monomial(Monomial::from_exponents(exps), BigRational::from_integer(c.into()));
    }
    if out.is_zero() {
        return RatFunc::one();
    }
    RatFunc::from_poly(out)
}

/// Random section of a rank-`rank` bundle with polynomial coefficients.
pub fn section<R: Rng>(rng: &mut R, rank: usize, vars: usize, max_degree: u32) -> GradedElement {
    let comps: Vec<RatFunc> = (0..rank).map(|_| if rng.gen_bool(0.75) { poly(rng, vars, max_degree) } else { RatFunc::zero() }).collect();
    GradedElement::vector(Role::Multivector, &comps)
}

/// Random form of the given degree with polynomial coefficients.
pub fn form<R: Rng>(rng: &mut R, rank: usize, degree: usize, vars: usize, max_degree: u32) -> GradedElement {
    let blades = crate::algebroid::blades_of_degree(rank, degree);
    GradedElement::from_blades(
        rank,
        degree,
        Role::Form,
        blades.into_iter().filter(|_| rng.gen_bool(0.6)).collect::<Vec<_>>().into_iter().map(|b| (b, poly(rng, vars, max_degree))),
    )
}
