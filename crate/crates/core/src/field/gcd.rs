//! Multivariate polynomial gcd over Q.
//!
//! Recursive content/primitive-part decomposition with a primitive
//! pseudo-remainder sequence in a chosen main variable. Results are monic in
//! the grlex order.

use super::poly::Poly;

/// Monic greatest common divisor of `a` and `b`. `gcd(0, 0) = 0`.
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    if a == b {
        return a.monic();
    }
    if a.is_monomial() {
        return gcd_with_monomial(a, b);
    }
    if b.is_monomial() {
        return gcd_with_monomial(b, a);
    }

    let sa = a.support();
    let sb = b.support();
    if sa & sb == 0 {
        return Poly::one();
    }
    if sa != sb {
        // A common divisor cannot involve variables private to either side, so
        // it divides every coefficient taken over those variables.
        let mut parts = a.coefficients_over(sa & !sb);
        parts.extend(b.coefficients_over(sb & !sa));
        return gcd_many(parts);
    }

    let var = main_variable(a, b, sa);
    let (ca, pa) = split_content(a, var);
    let (cb, pb) = split_content(b, var);
    let content = gcd(&ca, &cb);

    let (mut r0, mut r1) = if pa.degree_in(var) >= pb.degree_in(var) { (pa, pb) } else { (pb, pa) };
    let g = loop {
        let r = r0.pseudo_rem(&r1, var);
        if r.is_zero() {
            break r1;
        }
        if r.degree_in(var) == 0 {
            break Poly::one();
        }
        r0 = r1;
        r1 = split_content(&r, var).1;
    };
    (&content * &g).monic()
}

/// Gcd of a list; stops early once the running gcd is a unit.
pub fn gcd_many<I: IntoIterator<Item = Poly>>(items: I) -> Poly {
    let mut acc = Poly::zero();
    for p in items {
        acc = gcd(&acc, &p);
        if acc.is_one() {
            break;
        }
    }
    acc
}

fn gcd_with_monomial(m: &Poly, other: &Poly) -> Poly {
    let (mono, _) = m.leading_term().expect("nonzero monomial");
    let g = other.terms().fold(mono.clone(), |acc, (k, _)| acc.gcd(k));
    Poly::monomial(g, num_traits::One::one())
}

/// Picks the shared variable of least degree; keeps the remainder sequences short.
fn main_variable(a: &Poly, b: &Poly, support: u64) -> usize {
    (0..64)
        .filter(|i| support & (1u64 << i) != 0)
        .min_by_key(|&i| (a.degree_in(i).max(b.degree_in(i)), i))
        .expect("nonconstant polynomial has a variable")
}

/// `(content, primitive part)` of `p` viewed as univariate in `var`.
fn split_content(p: &Poly, var: usize) -> (Poly, Poly) {
    let content = gcd_many(p.coefficients_in(var));
    if content.is_one() {
        return (content, p.monic());
    }
    let prim = p.div_exact(&content).expect("content divides polynomial");
    (content, prim.monic())
}

/// Lcm of two polynomials, monic.
pub fn lcm(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() || b.is_zero() {
        return Poly::zero();
    }
    let g = gcd(a, b);
    (&a.div_exact(&g).expect("gcd divides") * b).monic()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Poly {
        Poly::var(0)
    }
    fn y() -> Poly {
        Poly::var(1)
    }
    fn z() -> Poly {
        Poly::var(2)
    }
    fn c(n: i64) -> Poly {
        Poly::from_int(n)
    }

    #[test]
    fn univariate() {
        let a = &(&x() * &x()) - &c(1);
        let b = &(&x() * &x()) + &(&(&x() * &c(2)) + &c(1));
        assert_eq!(gcd(&a, &b), &x() + &c(1));
    }

    #[test]
    fn multivariate_common_factor() {
        let f = &(&x() * &y()) + &(&z() + &c(3));
        let g1 = &(&x() - &y()) * &f;
        let g2 = &(&(&z() * &z()) + &x()) * &f;
        assert_eq!(gcd(&g1, &g2), f.monic());
        let f2 = &f * &f;
        assert_eq!(gcd(&(&f2 * &x()), &(&f * &y())), f.monic());
    }

    #[test]
    fn coprime_and_units() {
        assert!(gcd(&(&x() + &y()), &(&x() - &y())).is_one());
        assert!(gcd(&c(6), &x()).is_one());
        assert_eq!(gcd(&Poly::zero(), &(&x() * &c(3))), x());
        assert_eq!(gcd(&(&(&x() * &x()) * &y()), &(&(&x() * &y()) * &y())), &x() * &y());
    }

    #[test]
    fn disjoint_private_variables() {
        let a = &(&x() + &c(1)) * &(&y() + &c(2));
        let b = &(&x() + &c(1)) * &z();
        assert_eq!(gcd(&a, &b), &x() + &c(1));
        let l = lcm(&a, &b);
        assert_eq!(l, (&a * &z()).monic());
    }
}
