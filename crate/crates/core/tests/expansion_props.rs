mod common;

use gibbsx::analysis::check_coercive;
use gibbsx::expansion::{build_g_graded, expand, Expansion, ExpansionResult};
use gibbsx::poly::SparsePoly;
use gibbsx::scalar::{rat, Field, Rational};
use num_traits::Zero;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{cayley, poly, random_admissible, scaling_identity, signed_permutation, FIXTURES};

fn admissible(seed: u64, d: usize, p_max: u32, rotate: bool) -> (SparsePoly, Vec<u32>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = random_admissible(&mut rng, d, p_max, rotate);
    (a.f, a.orders)
}

/// `x_i = sum_j m[i][j] h_j`.
fn linear<C: Field>(m: &[Vec<C>]) -> Vec<SparsePoly<C>> {
    let d = m.len();
    m.iter()
        .map(|row| {
            let mut l = SparsePoly::new(d);
            for (j, c) in row.iter().enumerate() {
                let mut e = vec![0; d];
                e[j] = 1;
                l.add_term(e, c.clone());
            }
            l
        })
        .collect()
}

fn matmul<C: Field>(a: &[Vec<C>], b: &[Vec<C>]) -> Vec<Vec<C>> {
    let n = b[0].len();
    a.iter().map(|row| (0..n).map(|j| row.iter().zip(b).fold(C::zero(), |acc, (x, r)| acc + x.clone() * r[j].clone())).collect()).collect()
}

/// Block-diagonal orthogonal matrix with one random rational block per run of
/// equal entries in `blocks`.
fn block_rotation(seed: u64, blocks: &[usize]) -> Vec<Vec<Rational>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = blocks.len();
    let mut m = vec![vec![Rational::zero(); d]; d];
    let mut start = 0;
    while start < d {
        let end = (start..d).find(|&i| blocks[i] != blocks[start]).unwrap_or(d);
        let n = end - start;
        let q = if seed.is_multiple_of(2) { cayley(&mut rng, n) } else { signed_permutation(&mut rng, n) };
        for i in 0..n {
            for j in 0..n {
                m[start + i][start + j] = q[i][j].clone();
            }
        }
        start = end;
    }
    m
}

/// Another adapted basis `B D` gives `g(D h)`.
fn covariant<C: Field>(f: &SparsePoly<C>, r: &ExpansionResult<C>, dm: &[Vec<C>], tol: f64) -> bool {
    let b2 = matmul(&r.b, dm);
    let (g2, _, _) = build_g_graded(f, &b2, &r.alpha).unwrap();
    let want = r.g.compose(&linear(dm)).unwrap();
    g2.max_coeff_diff(&want) <= tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn graded_and_tensor_constructions_agree(seed in any::<u64>(), d in 1usize..=3, p_max in 1u32..=4) {
        let (f, _) = admissible(seed, d, p_max, seed % 2 == 0);
        match expand(&f, 6).unwrap() {
            Expansion::Exact(r) => prop_assert_eq!(&r.g, &r.g_tensor),
            Expansion::Float(r) => prop_assert!(r.dual_gap() < 1e-9, "gap {}", r.dual_gap()),
        }
    }

    #[test]
    fn no_grade_below_one_survives(seed in any::<u64>(), d in 1usize..=3, p_max in 1u32..=4) {
        let (f, orders) = admissible(seed, d, p_max, seed % 3 == 0);
        let e = expand(&f, 6).unwrap();
        prop_assert!(e.hypothesis_ok());
        let mut want: Vec<Rational> = orders.iter().map(|&k| rat(1, 2 * k as i64)).collect();
        want.sort_by(|x, y| y.cmp(x));
        prop_assert_eq!(e.alpha(), want.as_slice());
    }

    #[test]
    fn g_scales_blockwise(seed in any::<u64>(), d in 1usize..=3, p_max in 1u32..=4) {
        let (f, _) = admissible(seed, d, p_max, seed % 2 == 1);
        let ok = match expand(&f, 6).unwrap() {
            Expansion::Exact(r) => scaling_identity(&r.g, &r.alpha),
            Expansion::Float(r) => scaling_identity(&r.g, &r.alpha),
        };
        prop_assert!(ok);
    }

    #[test]
    fn g_is_covariant_under_block_rotations(seed in any::<u64>(), d in 1usize..=3, p_max in 1u32..=4) {
        let (f, _) = admissible(seed, d, p_max, seed % 4 < 2);
        match expand(&f, 6).unwrap() {
            Expansion::Exact(r) => {
                let dm = block_rotation(seed, &r.blocks);
                prop_assert!(covariant(&f, &r, &dm, 0.0));
            }
            Expansion::Float(r) => {
                let dm: Vec<Vec<f64>> = block_rotation(seed, &r.blocks).iter().map(|row| row.iter().map(Field::to_f64).collect()).collect();
                prop_assert!(covariant(&f.to_f64(), &r, &dm, 1e-9));
            }
        }
    }
}

#[test]
fn g_depends_on_every_block_of_coercive_fixtures() {
    for (text, d) in FIXTURES {
        let e = expand(&poly(text, d), 6).unwrap();
        let coercive = check_coercive(&e.g_f64(), e.alpha()).coercive;
        if e.hypothesis_ok() && coercive {
            assert!(e.nonconstancy().iter().all(|&b| b), "{text}: {:?}", e.nonconstancy());
        }
    }
}

#[test]
fn covariance_on_rotated_fixture() {
    // E_1 is a plane here, so the block rotation genuinely mixes two columns
    let f = poly("x^2 + y^2 + (x - y)^2 + z^4 + x*z^2", 3);
    let Expansion::Exact(r) = expand(&f, 6).unwrap() else { panic!("expected an exact basis") };
    for seed in 0..8 {
        let dm = block_rotation(seed, &r.blocks);
        assert!(covariant(&f, &r, &dm, 0.0));
    }
}
