//! Fixtures and random admissible polynomials shared by the integration tests.
#![allow(dead_code)]

use gibbsx::linalg::solve;
use gibbsx::poly::{parse_poly, SparsePoly};
use gibbsx::scalar::{int, rat, Field, Rational};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

pub const XYZ: [&str; 3] = ["x", "y", "z"];

pub fn poly(text: &str, d: usize) -> SparsePoly {
    parse_poly(text, &XYZ[..d]).unwrap_or_else(|e| panic!("{text}: {e}"))
}

/// Polynomials with a critical point at the origin, with their dimension.
pub const FIXTURES: [(&str, usize); 11] = [
    ("x^2", 1),
    ("x^4 + x^6", 1),
    ("x^2 + y^4 + x*y^2", 2),
    ("x^4 + y^6 + x^2*y^3", 2),
    ("x^4 + y^6 + x^2*y^3 + x^8", 2),
    ("x^4 + y^10 + x^2*y^4", 2),
    ("(x - y^2)^2 + x^6", 2),
    ("(x + y)^2 + (x - y)^4", 2),
    ("x^2 + y^2 + z^4", 3),
    ("(x + 2*y - 2*z)^2 + (2*x + y + 2*z)^4 + (2*x - 2*y - z)^6", 3),
    ("z^6 + x^4*y^2 + x^2*y^4 - 3*x^2*y^2*z^2", 3),
];

/// Random orthogonal matrix with rational entries (Cayley transform of a
/// small skew matrix).
pub fn cayley<R: Rng>(rng: &mut R, d: usize) -> Vec<Vec<Rational>> {
    let mut s = vec![vec![Rational::zero(); d]; d];
    for i in 0..d {
        for j in i + 1..d {
            let v = int(rng.random_range(-2..=2));
            s[i][j] = v.clone();
            s[j][i] = -v;
        }
    }
    let id = |i: usize, j: usize| if i == j { Rational::one() } else { Rational::zero() };
    let plus: Vec<Vec<Rational>> = (0..d).map(|i| (0..d).map(|j| id(i, j) + s[i][j].clone()).collect()).collect();
    let minus: Vec<Vec<Rational>> = (0..d).map(|i| (0..d).map(|j| id(i, j) - s[i][j].clone()).collect()).collect();
    solve(&plus, &minus).expect("I + S is invertible for skew S")
}

pub fn signed_permutation<R: Rng>(rng: &mut R, d: usize) -> Vec<Vec<Rational>> {
    let mut perm: Vec<usize> = (0..d).collect();
    for i in (1..d).rev() {
        perm.swap(i, rng.random_range(0..=i));
    }
    let mut q = vec![vec![Rational::zero(); d]; d];
    for (i, &p) in perm.iter().enumerate() {
        q[i][p] = if rng.random_bool(0.5) { int(1) } else { int(-1) };
    }
    q
}

/// A random element with its intended block orders, built in coordinates `y`
/// and rotated by `q` into `x` (`y = q^T x`).
pub struct Admissible {
    pub f: SparsePoly,
    /// Order `k_i` of coordinate `y_i` (it carries `y_i^{2 k_i}`).
    pub orders: Vec<u32>,
    pub q: Vec<Vec<Rational>>,
}

fn weight(e: &[u32], orders: &[u32]) -> Rational {
    e.iter().zip(orders).map(|(&m, &k)| rat(m as i64, 2 * k as i64)).sum()
}

/// Even pure powers `c_i y_i^{2 k_i}` (`2 k_i <= 8`, `k_i <= p_max`) plus
/// up to four cross terms of degree at most 8 that keep the chain intact:
/// weight above one, or exactly one when the monomial mixes different orders.
pub fn admissible_in_y<R: Rng>(rng: &mut R, d: usize, p_max: u32) -> (SparsePoly, Vec<u32>) {
    let orders: Vec<u32> = (0..d).map(|_| rng.random_range(1..=p_max.min(4))).collect();
    let mut f = SparsePoly::new(d);
    for (i, &k) in orders.iter().enumerate() {
        let mut e = vec![0u32; d];
        e[i] = 2 * k;
        f.add_term(e, rat(rng.random_range(1..=5), rng.random_range(1..=3)));
    }
    let mut added = 0;
    let mut tries = 0;
    while added < 4 && tries < 200 {
        tries += 1;
        let e: Vec<u32> = (0..d).map(|_| rng.random_range(0..=5)).collect();
        let deg: u32 = e.iter().sum();
        let support = e.iter().filter(|&&m| m > 0).count();
        if !(2..=8).contains(&deg) || support < 2 {
            continue;
        }
        let w = weight(&e, &orders);
        let mixed = {
            let ks: Vec<u32> = e.iter().zip(&orders).filter(|(&m, _)| m > 0).map(|(_, &k)| k).collect();
            ks.iter().any(|&k| k != ks[0])
        };
        if w > int(1) || (w == int(1) && mixed) {
            let c = rat(rng.random_range(-3..=3), rng.random_range(1..=4));
            if !c.is_zero() {
                f.add_term(e, c);
                added += 1;
            }
        }
    }
    (f, orders)
}

/// `f(x) = P(q^T x)`.
pub fn rotate(p: &SparsePoly, q: &[Vec<Rational>]) -> SparsePoly {
    let d = q.len();
    let subs: Vec<SparsePoly> = (0..d)
        .map(|i| {
            let mut s = SparsePoly::new(d);
            for (j, row) in q.iter().enumerate() {
                let mut e = vec![0u32; d];
                e[j] = 1;
                s.add_term(e, row[i].clone());
            }
            s
        })
        .collect();
    p.compose(&subs).expect("dimensions agree")
}

pub fn random_admissible<R: Rng>(rng: &mut R, d: usize, p_max: u32, rotate_by_cayley: bool) -> Admissible {
    let (p, orders) = admissible_in_y(rng, d, p_max);
    let q = if rotate_by_cayley { cayley(rng, d) } else { signed_permutation(rng, d) };
    Admissible { f: rotate(&p, &q), orders, q }
}

/// `g(s^{L alpha_1} h_1, ...) == s^L g(h)` as polynomials in `(h, s)`.
pub fn scaling_identity<C: Field>(g: &SparsePoly<C>, alpha: &[Rational]) -> bool {
    let d = alpha.len();
    let l = alpha.iter().fold(num_bigint::BigInt::one(), |acc, a| acc.lcm(a.denom()));
    let subs: Vec<SparsePoly<C>> = (0..d)
        .map(|j| {
            let mut e = vec![0u32; d + 1];
            e[j] = 1;
            e[d] = (alpha[j].clone() * Rational::from_integer(l.clone())).to_integer().to_u32().unwrap();
            SparsePoly::monomial(e, C::one())
        })
        .collect();
    let lhs = g.clone().with_dim(d).compose(&subs).unwrap();
    let mut se = vec![0u32; d + 1];
    se[d] = l.to_u32().unwrap();
    let rhs = g.clone().with_dim(d + 1) * SparsePoly::monomial(se, C::one());
    lhs == rhs
}
