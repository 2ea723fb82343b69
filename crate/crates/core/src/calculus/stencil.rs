//! Finite-difference stencils for non-periodic axes.

/// Fornberg's recursion: weights for the `m`-th derivative at `x0` from the
/// given nodes. Returns one weight per node.
pub fn fornberg_weights(x0: f64, nodes: &[f64], m: usize) -> Vec<f64> {
    let n = nodes.len();
    // c[j][k]: weight of node j for the k-th derivative
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}

/// First-derivative stencil of a fixed order on `n` equispaced points with unit spacing.
///
/// Interior points use the centered `order + 1` point stencil; points closer
/// than `order / 2` to an end use a shifted window of the same width, which
/// keeps the formal order but with larger error constants.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstDerivativeStencil {
    pub order: usize,
    /// Per grid index: first node index of the window and its weights.
    rows: Vec<(usize, Vec<f64>)>,
}

impl FirstDerivativeStencil {
    pub fn new(n: usize, order: usize) -> Self {
        let width = (order + 1).min(n);
        let half = order / 2;
        let rows = (0..n)
            .map(|i| {
                let start = i.saturating_sub(half).min(n - width);
                let nodes: Vec<f64> = (start..start + width).map(|k| k as f64).collect();
                (start, fornberg_weights(i as f64, &nodes, 1))
            })
            .collect();
        Self { order, rows }
    }

    /// Applies the stencil to `line` with grid spacing `h`. Weights are real,
    /// so the operator commutes with complex conjugation exactly.
    pub fn apply(&self, line: &[num_complex::Complex64], h: f64, out: &mut [num_complex::Complex64]) {
        for (o, (start, w)) in out.iter_mut().zip(&self.rows) {
            let mut acc = num_complex::Complex64::new(0.0, 0.0);
            for (k, wk) in w.iter().enumerate() {
                acc += line[start + k] * *wk;
            }
            *o = acc / h;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centered_sixth_order_weights() {
        let nodes: Vec<f64> = (-3..=3).map(|k| k as f64).collect();
        let w = fornberg_weights(0.0, &nodes, 1);
        let expected = [
            -1.0 / 60.0,
            3.0 / 20.0,
            -3.0 / 4.0,
            0.0,
            3.0 / 4.0,
            -3.0 / 20.0,
            1.0 / 60.0,
        ];
        for (a, b) in w.iter().zip(expected) {
            assert!((a - b).abs() < 1e-14, "{a} vs {b}");
        }
    }

    #[test]
    fn one_sided_stencils_are_exact_on_degree_six_polynomials() {
        use num_complex::Complex64;
        let n = 20;
        let s = FirstDerivativeStencil::new(n, 6);
        let h = 0.1;
        let line: Vec<Complex64> = (0..n)
            .map(|i| {
                let x = i as f64 * h;
                Complex64::new(x.powi(6) - 2.0 * x.powi(3), x)
            })
            .collect();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        s.apply(&line, h, &mut out);
        for (i, d) in out.iter().enumerate() {
            let x = i as f64 * h;
            let exact = 6.0 * x.powi(5) - 6.0 * x.powi(2);
            assert!((d.re - exact).abs() < 1e-9, "i={i}: {} vs {exact}", d.re);
            assert!((d.im - 1.0).abs() < 1e-10);
        }
    }
}
