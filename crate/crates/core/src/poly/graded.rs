//! Anisotropic substitution `x = B (t^alpha * h)` graded by the power of `t`.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use super::{PolyError, SparsePoly};
use crate::linalg;
use crate::scalar::{fraction_string, Field, Rational};

/// Polynomials in `h` keyed by their exact `t`-exponent.
#[derive(Clone)]
pub struct GradedExpansion<C = Rational> {
    grades: BTreeMap<Rational, SparsePoly<C>>,
}

impl<C: std::fmt::Debug> std::fmt::Debug for GradedExpansion<C> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_map().entries(self.grades.iter().map(|(a, q)| (fraction_string(a), q))).finish()
    }
}

impl<C: PartialEq> PartialEq for GradedExpansion<C> {
    fn eq(&self, other: &Self) -> bool {
        self.grades == other.grades
    }
}

impl<C: Field> GradedExpansion<C> {
    /// Split `p(h)` by the weight `sum_j alpha_j e_j` of each monomial.
    pub fn from_weights(p: &SparsePoly<C>, alpha: &[Rational]) -> Self {
        let mut grades: BTreeMap<Rational, SparsePoly<C>> = BTreeMap::new();
        for (e, c) in p.terms() {
            let w = e.iter().zip(alpha).fold(Rational::zero(), |acc, (&k, a)| acc + a * Rational::from_integer(k.into()));
            grades.entry(w).or_insert_with(|| SparsePoly::new(p.dim())).add_term(e.clone(), c.clone());
        }
        grades.retain(|_, q| !q.is_zero());
        GradedExpansion { grades }
    }

    pub fn grades(&self) -> &BTreeMap<Rational, SparsePoly<C>> {
        &self.grades
    }

    pub fn grade(&self, a: &Rational) -> Option<&SparsePoly<C>> {
        self.grades.get(a)
    }

    /// The grade-`a` polynomial, or zero.
    pub fn grade_or_zero(&self, a: &Rational) -> SparsePoly<C> {
        self.grades.get(a).cloned().unwrap_or_else(SparsePoly::zero)
    }

    /// Grades strictly below `a`.
    pub fn below(&self, a: &Rational) -> impl Iterator<Item = (&Rational, &SparsePoly<C>)> {
        self.grades.range(..a.clone())
    }

    /// Smallest grade strictly above `a`.
    pub fn next_above(&self, a: &Rational) -> Option<&Rational> {
        use std::ops::Bound::{Excluded, Unbounded};
        self.grades.range((Excluded(a.clone()), Unbounded)).next().map(|(k, _)| k)
    }

    /// `sum_a t^a grade_a(h)`.
    pub fn eval(&self, t: f64, h: &[f64]) -> f64 {
        self.grades.iter().map(|(a, q)| t.powf(Field::to_f64(a)) * q.eval_f64(h)).sum()
    }

    /// Exponents as fraction strings, ascending.
    pub fn exponent_strings(&self) -> Vec<String> {
        self.grades.keys().map(fraction_string).collect()
    }
}

/// Expand `f(B (t^alpha * h))` and collect terms by total `t`-exponent.
///
/// `b` is the `d x d` matrix with `b[i][j]` the `i`-th entry of column `j`.
/// `f` must vanish at the origin and `b` must be orthogonal (exactly for
/// rational coefficients, within `1e-12` otherwise).
///
/// ```
/// use gibbsx::poly::{graded_substitute, parse_poly};
/// use gibbsx::scalar::{int, rat};
/// let f = parse_poly("x^4 + y^10 + x^2*y^4", &["x", "y"]).unwrap();
/// let id = vec![vec![int(1), int(0)], vec![int(0), int(1)]];
/// let g = graded_substitute(&f, &id, &[rat(1, 4), rat(1, 10)]).unwrap();
/// assert_eq!(g.exponent_strings(), ["9/10", "1"]);
/// ```
pub fn graded_substitute<C: Field>(f: &SparsePoly<C>, b: &[Vec<C>], alpha: &[Rational]) -> Result<GradedExpansion<C>, PolyError> {
    let d = f.dim();
    if b.len() != d || b.iter().any(|r| r.len() != d) {
        return Err(PolyError::DimensionMismatch { expected: d, got: b.len() });
    }
    if alpha.len() != d {
        return Err(PolyError::DimensionMismatch { expected: d, got: alpha.len() });
    }
    let half = Rational::new(1.into(), 2.into());
    if let Some(a) = alpha.iter().find(|a| !a.is_positive() || **a > half) {
        return Err(PolyError::BadWeight(fraction_string(a)));
    }
    if !f.constant_term().is_zero() {
        return Err(PolyError::NonzeroConstant);
    }
    let (defect, exact) = linalg::orthogonality_defect(b);
    if (C::EXACT && !exact) || defect > 1e-12 {
        return Err(PolyError::NotOrthogonal(defect));
    }
    let p = f.compose(&linear_forms(b))?;
    Ok(GradedExpansion::from_weights(&p, alpha))
}

/// `x_i = sum_j b[i][j] h_j` as polynomials in `h`.
pub(crate) fn linear_forms<C: Field>(b: &[Vec<C>]) -> Vec<SparsePoly<C>> {
    let d = b.len();
    b.iter()
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_poly;
    use crate::scalar::{int, rat};

    fn id(d: usize) -> Vec<Vec<Rational>> {
        (0..d).map(|i| (0..d).map(|j| int((i == j) as i64)).collect()).collect()
    }

    #[test]
    fn single_grade_fixture() {
        let f = parse_poly("x^2 + y^4 + x*y^2", &["x", "y"]).unwrap();
        let g = graded_substitute(&f, &id(2), &[rat(1, 2), rat(1, 4)]).unwrap();
        assert_eq!(g.grades().len(), 1);
        assert_eq!(g.grade(&int(1)), Some(&f));
    }

    #[test]
    fn counterexample_grades() {
        let f = parse_poly("x^4 + y^10 + x^2*y^4", &["x", "y"]).unwrap();
        let g = graded_substitute(&f, &id(2), &[rat(1, 4), rat(1, 10)]).unwrap();
        assert_eq!(g.grade(&rat(9, 10)), Some(&parse_poly("x^2*y^4", &["x", "y"]).unwrap()));
        assert_eq!(g.grade(&int(1)), Some(&parse_poly("x^4 + y^10", &["x", "y"]).unwrap()));
        assert_eq!(g.below(&int(1)).count(), 1);
    }

    #[test]
    fn sextic_grade() {
        let f = parse_poly("x^6", &["x"]).unwrap();
        let g = graded_substitute(&f, &id(1), &[rat(1, 2)]).unwrap();
        assert_eq!(g.exponent_strings(), ["3"]);
    }

    #[test]
    fn rejects_bad_inputs() {
        let f = parse_poly("1 + x^2", &["x"]).unwrap();
        assert_eq!(graded_substitute(&f, &id(1), &[rat(1, 2)]), Err(PolyError::NonzeroConstant));
        let f = parse_poly("x^2 + y^2", &["x", "y"]).unwrap();
        let skew = vec![vec![int(1), int(1)], vec![int(0), int(1)]];
        assert!(matches!(graded_substitute(&f, &skew, &[rat(1, 2), rat(1, 2)]), Err(PolyError::NotOrthogonal(_))));
        assert!(matches!(graded_substitute(&f, &id(2), &[rat(1, 2), int(1)]), Err(PolyError::BadWeight(_))));
    }

    #[test]
    fn rotated_basis_grades() {
        // f = (x+y)^2 + (x-y)^4 with B = [[1,1],[1,-1]]/sqrt 2
        let f = parse_poly("(x+y)^2 + (x-y)^4", &["x", "y"]).unwrap().to_f64();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let b = vec![vec![s, s], vec![s, -s]];
        let g = graded_substitute(&f, &b, &[rat(1, 2), rat(1, 4)]).unwrap();
        let g1 = g.grade(&int(1)).unwrap().prune(1e-12);
        assert!((g1.coeff(&[2, 0]) - 2.0).abs() < 1e-12);
        assert!((g1.coeff(&[0, 4]) - 4.0).abs() < 1e-12);
        assert_eq!(g1.num_terms(), 2);
    }
}
