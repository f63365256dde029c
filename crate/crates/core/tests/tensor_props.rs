mod common;

use gibbsx::poly::SparsePoly;
use gibbsx::scalar::{int, Field, Rational};
use gibbsx::tensor::{canonical_indices, Subspace, SymmetricTensor};
use num_traits::{One, Zero};
use proptest::prelude::*;

type T = SymmetricTensor<Rational>;

fn tensor_from(d: usize, k: usize, vals: &[i64]) -> T {
    let idx = canonical_indices(d, k);
    SymmetricTensor::from_entries(d, k, idx.into_iter().zip(vals.iter().cycle()).map(|(i, &v)| (i.indices().to_vec(), int(v)))).unwrap()
}

fn rvec(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| int(x)).collect()
}

fn scalar_of(t: T) -> Rational {
    t.components()[0].clone()
}

/// `T . u^{(x)i} (x) v^{(x)(k-i)}`.
fn mixed(t: &T, u: &[Rational], v: &[Rational], i: usize) -> Rational {
    let k = t.order();
    let mut vs = vec![u.to_vec(); i];
    vs.extend(std::iter::repeat_n(v.to_vec(), k - i));
    scalar_of(t.apply_partial(&vs).unwrap())
}

fn choose(n: usize, k: usize) -> Rational {
    (0..k).fold(Rational::one(), |acc, i| acc * int((n - i) as i64) / int((i + 1) as i64))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lookup_is_permutation_invariant(
        d in 1usize..=3, k in 1usize..=5,
        vals in prop::collection::vec(-9i64..=9, 1..60),
        raw in prop::collection::vec(0usize..3, 5),
        seed in any::<u64>(),
    ) {
        let t = tensor_from(d, k, &vals);
        let idx: Vec<usize> = raw.iter().take(k).map(|&i| i % d).collect();
        let mut perm = idx.clone();
        // deterministic shuffle from the seed
        let mut s = seed;
        for i in (1..perm.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        prop_assert_eq!(t.get(&idx), t.get(&perm));
    }

    #[test]
    fn newton_multinomial(
        d in 1usize..=3, k in 1usize..=6,
        vals in prop::collection::vec(-5i64..=5, 1..90),
        u in prop::collection::vec(-3i64..=3, 3), v in prop::collection::vec(-3i64..=3, 3),
        a in -3i64..=3, b in -3i64..=3,
    ) {
        let t = tensor_from(d, k, &vals);
        let (u, v) = (rvec(&u[..d]), rvec(&v[..d]));
        let w: Vec<Rational> = u.iter().zip(&v).map(|(x, y)| int(a) * x + int(b) * y).collect();
        let lhs = t.apply_full(&w).unwrap();
        let mut rhs = Rational::zero();
        for i in 0..=k {
            rhs += choose(k, i) * int(a).pow(i as i32) * int(b).pow((k - i) as i32) * mixed(&t, &u, &v, i);
        }
        prop_assert_eq!(lhs, rhs);
    }

    /// A homogeneous form vanishing on a subspace `E` has all mixed
    /// contractions over `E` equal to zero.
    #[test]
    fn null_tensor_on_subspace(
        k in 2usize..=5,
        normal in prop::collection::vec(-2i64..=2, 3),
        coeffs in prop::collection::vec(-3i64..=3, 1..30),
        picks in prop::collection::vec(0usize..2, 5),
    ) {
        prop_assume!(normal.iter().any(|&c| c != 0));
        let d = 3;
        // f = (n . x) q(x) with q of degree k - 1
        let mut lin: SparsePoly = SparsePoly::new(d);
        for (i, &c) in normal.iter().enumerate() {
            let mut e = vec![0; d];
            e[i] = 1;
            lin.add_term(e, int(c));
        }
        let mut q: SparsePoly = SparsePoly::new(d);
        for (idx, &c) in canonical_indices(d, k - 1).iter().zip(coeffs.iter()) {
            let mut e = vec![0u32; d];
            for &i in idx.indices() {
                e[i] += 1;
            }
            q.add_term(e, int(c));
        }
        let f = lin * q;
        let t = f.derivative_tensor(k);
        // E = normal^perp, spanned by two integer vectors
        let n = rvec(&normal);
        let cands = [
            vec![n[1].clone(), -n[0].clone(), int(0)],
            vec![n[2].clone(), int(0), -n[0].clone()],
            vec![int(0), n[2].clone(), -n[1].clone()],
        ];
        let span: Vec<Vec<Rational>> = cands.into_iter().filter(|c| c.iter().any(|x| !x.is_zero())).collect();
        // sampled zeros on E
        for i in 0..span.len() {
            prop_assert!(t.apply_full(&span[i]).unwrap().is_zero());
        }
        let vs: Vec<Vec<Rational>> = picks.iter().take(k).map(|&p| span[p % span.len()].clone()).collect();
        prop_assert!(scalar_of(t.apply_partial(&vs).unwrap()).is_zero());
    }

    #[test]
    fn kernel_is_inside_zero_set(
        half in 1usize..=3,
        coeffs in prop::collection::vec(-4i64..=4, 1..20),
        extra in prop::collection::vec(-3.0f64..3.0, 3),
    ) {
        // a form in x, y only, embedded in R^3, so e3 is in the kernel
        let (d, k) = (3, 2 * half);
        let mut p: SparsePoly = SparsePoly::new(d);
        for (idx, &c) in canonical_indices(2, k).iter().zip(coeffs.iter()) {
            let mut e = vec![0u32; d];
            for &i in idx.indices() {
                e[i] += 1;
            }
            p.add_term(e, int(c));
        }
        let t = p.derivative_tensor(k).map(|c| c.to_f64());
        let scale = t.max_abs().max(1.0);
        let kernel = t.kernel_map_nullspace().unwrap();
        prop_assert!(kernel.dim() >= 1);
        for b in kernel.basis() {
            prop_assert!(t.apply_full(b).unwrap().abs() < 1e-9 * scale);
        }
        let h = kernel.lift(&extra[..kernel.dim()]);
        prop_assert!(t.apply_full(&h).unwrap().abs() < 1e-9 * scale);
    }
}

/// Does every sampled zero of `T . h^k` lie in the kernel of `h -> T . h`?
fn reverse_inclusion_holds(t: &T, zeros: &[Vec<Rational>]) -> bool {
    let kernel: Subspace = t.map(|c| c.to_f64()).kernel_map_nullspace().unwrap();
    zeros
        .iter()
        .filter(|z| t.apply_full(z).unwrap().is_zero())
        .all(|z| kernel.residual(&z.iter().map(|c| c.to_f64()).collect::<Vec<_>>()) < 1e-9)
}

#[test]
fn motzkin_reverse_inclusion_fails() {
    let f = common::poly("z^6 + x^4*y^2 + x^2*y^4 - 3*x^2*y^2*z^2", 3);
    let t = f.derivative_tensor(6);
    assert!(t.kernel_map_nullspace().unwrap().is_zero());
    let zeros = vec![rvec(&[1, 1, 1]), rvec(&[-1, 1, 1]), rvec(&[1, -1, 1]), rvec(&[1, 1, -1])];
    assert!(zeros.iter().all(|z| t.apply_full(z).unwrap().is_zero()));
    assert!(!reverse_inclusion_holds(&t, &zeros));
}

#[test]
fn order_four_counterexample_zero_set_is_not_a_subspace() {
    // ((x - y)(x - z))^2 vanishes on two planes, its kernel map only on their intersection
    let f = common::poly("((x - y)*(x - z))^2", 3);
    let t = f.derivative_tensor(4);
    let kernel: Subspace = t.map(|c| c.to_f64()).kernel_map_nullspace().unwrap();
    assert_eq!(kernel.dim(), 1);
    assert!(kernel.residual(&[1.0, 1.0, 1.0]) < 1e-12);
    assert!(reverse_inclusion_holds(&t, &[rvec(&[1, 1, 1])]));
    let zeros = vec![rvec(&[1, 1, 0]), rvec(&[1, 0, 1]), rvec(&[1, 1, 1])];
    assert!(!reverse_inclusion_holds(&t, &zeros));
}
