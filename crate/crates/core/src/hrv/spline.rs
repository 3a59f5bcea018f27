use crate::scalar::{lit, Scalar};

/// Natural cubic spline through strictly ascending knots.
pub(crate) struct CubicSpline<T> {
    x: Vec<T>,
    y: Vec<T>,
    m: Vec<T>,
}

impl<T: Scalar> CubicSpline<T> {
    pub(crate) fn new(x: &[T], y: &[T]) -> Self {
        let n = x.len();
        let mut m = vec![T::zero(); n];
        if n > 2 {
            // tridiagonal system for the interior second derivatives
            let two = lit::<T>(2.0);
            let six = lit::<T>(6.0);
            let k = n - 2;
            let mut diag = vec![T::zero(); k];
            let mut upper = vec![T::zero(); k];
            let mut rhs = vec![T::zero(); k];
            for i in 0..k {
                let h0 = x[i + 1] - x[i];
                let h1 = x[i + 2] - x[i + 1];
                diag[i] = two * (h0 + h1);
                upper[i] = h1;
                rhs[i] = six * ((y[i + 2] - y[i + 1]) / h1 - (y[i + 1] - y[i]) / h0);
            }
            for i in 1..k {
                let lower = x[i + 1] - x[i];
                let w = lower / diag[i - 1];
                diag[i] = diag[i] - w * upper[i - 1];
                rhs[i] = rhs[i] - w * rhs[i - 1];
            }
            m[k] = rhs[k - 1] / diag[k - 1];
            for i in (0..k - 1).rev() {
                m[i + 1] = (rhs[i] - upper[i] * m[i + 2]) / diag[i];
            }
        }
        Self {
            x: x.to_vec(),
            y: y.to_vec(),
            m,
        }
    }

    #[cfg(test)]
    pub(crate) fn eval(&self, t: T) -> T {
        let n = self.x.len();
        let seg = match self.x.iter().position(|&xi| xi > t) {
            Some(0) => 0,
            Some(p) => p - 1,
            None => n - 2,
        };
        let (x0, x1) = (self.x[seg], self.x[seg + 1]);
        let h = x1 - x0;
        let a = (x1 - t) / h;
        let b = (t - x0) / h;
        let six = lit::<T>(6.0);
        a * self.y[seg]
            + b * self.y[seg + 1]
            + ((a * a * a - a) * self.m[seg] + (b * b * b - b) * self.m[seg + 1]) * h * h / six
    }

    /// Evaluates on an ascending grid in a single sweep.
    pub(crate) fn eval_sorted(&self, ts: &[T]) -> Vec<T> {
        let n = self.x.len();
        let mut seg = 0;
        let six = lit::<T>(6.0);
        ts.iter()
            .map(|&t| {
                while seg + 2 < n && self.x[seg + 1] <= t {
                    seg += 1;
                }
                let (x0, x1) = (self.x[seg], self.x[seg + 1]);
                let h = x1 - x0;
                let a = (x1 - t) / h;
                let b = (t - x0) / h;
                a * self.y[seg]
                    + b * self.y[seg + 1]
                    + ((a * a * a - a) * self.m[seg] + (b * b * b - b) * self.m[seg + 1]) * h * h
                        / six
            })
            .collect()
    }
}
