//! Flat `f64` evaluator for hot loops (quadrature, line searches).

use super::SparsePoly;
use crate::scalar::Field;

/// A polynomial flattened to `(coefficient, exponents)` rows.
#[derive(Debug, Clone)]
pub struct CompiledPoly {
    dim: usize,
    max_exp: Vec<u32>,
    terms: Vec<(f64, Vec<u32>)>,
}

impl CompiledPoly {
    pub fn new<C: Field>(p: &SparsePoly<C>) -> Self {
        let dim = p.dim();
        let terms: Vec<(f64, Vec<u32>)> = p.terms().map(|(e, c)| (c.to_f64(), e.clone())).collect();
        let mut max_exp = vec![0; dim];
        for (_, e) in &terms {
            for (m, &k) in max_exp.iter_mut().zip(e) {
                *m = (*m).max(k);
            }
        }
        CompiledPoly { dim, max_exp, terms }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn powers(&self, x: &[f64]) -> Vec<Vec<f64>> {
        x.iter()
            .zip(&self.max_exp)
            .map(|(&xi, &m)| {
                let mut v = Vec::with_capacity(m as usize + 1);
                let mut acc = 1.0;
                v.push(acc);
                for _ in 0..m {
                    acc *= xi;
                    v.push(acc);
                }
                v
            })
            .collect()
    }

    /// Panics if `x` is shorter than the polynomial's dimension.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let pw = self.powers(&x[..self.dim]);
        self.terms.iter().map(|(c, e)| e.iter().enumerate().fold(*c, |acc, (i, &k)| acc * pw[i][k as usize])).sum()
    }

    /// Value and gradient.
    pub fn eval_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let pw = self.powers(&x[..self.dim]);
        let mut val = 0.0;
        let mut grad = vec![0.0; self.dim];
        for (c, e) in &self.terms {
            val += e.iter().enumerate().fold(*c, |acc, (i, &k)| acc * pw[i][k as usize]);
            for (j, g) in grad.iter_mut().enumerate() {
                if e[j] == 0 {
                    continue;
                }
                let mut m = *c * e[j] as f64;
                for (i, &k) in e.iter().enumerate() {
                    let k = if i == j { k - 1 } else { k };
                    m *= pw[i][k as usize];
                }
                *g += m;
            }
        }
        (val, grad)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_poly;

    #[test]
    fn matches_generic_eval() {
        let f = parse_poly("x^3*y - 2*y^2 + 1/2*x", &["x", "y"]).unwrap();
        let c = CompiledPoly::new(&f);
        let x = [0.7, -1.3];
        assert!((c.eval(&x) - f.eval_f64(&x)).abs() < 1e-14);
        let (v, g) = c.eval_grad(&x);
        assert!((v - f.eval_f64(&x)).abs() < 1e-14);
        assert!((g[0] - f.derivative(0).eval_f64(&x)).abs() < 1e-14);
        assert!((g[1] - f.derivative(1).eval_f64(&x)).abs() < 1e-14);
    }
}
