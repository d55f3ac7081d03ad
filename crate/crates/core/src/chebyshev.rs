//! `exp(-i h H) psi` for a Hermitian tridiagonal `H` by Chebyshev expansion.

use num_complex::Complex64;

/// Hermitian tridiagonal matrix: real diagonal, upper off-diagonal
/// `H[i][i+1] = upper[i]`, lower is the conjugate.
pub(crate) struct Tridiagonal<'a> {
    pub diag: &'a [f64],
    pub upper: &'a [Complex64],
}

impl Tridiagonal<'_> {
    /// Gershgorin interval containing the spectrum.
    fn bounds(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.upper[i - 1].norm();
            }
            if i + 1 < n {
                r += self.upper[i].norm();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// `out = ((H - center) / half) x`
    #[inline]
    fn apply_scaled(&self, center: f64, inv_half: f64, x: &[Complex64], out: &mut [Complex64]) {
        let n = x.len();
        for i in 0..n {
            let mut acc = x[i] * (self.diag[i] - center);
            if i > 0 {
                acc += self.upper[i - 1].conj() * x[i - 1];
            }
            if i + 1 < n {
                acc += self.upper[i] * x[i + 1];
            }
            out[i] = acc * inv_half;
        }
    }
}

/// Scratch space reused across steps.
#[derive(Default)]
pub(crate) struct Workspace {
    prev: Vec<Complex64>,
    curr: Vec<Complex64>,
    next: Vec<Complex64>,
    acc: Vec<Complex64>,
    bessel: Vec<f64>,
}

/// Bessel functions `J_0(x) ..= J_{n}(x)` by Miller's backward recurrence,
/// normalized with `J_0 + 2 sum J_{2k} = 1`. Entries below ~1e-300 are zero.
pub(crate) fn bessel_j_sequence(x: f64, n: usize, out: &mut Vec<f64>) {
    out.clear();
    out.resize(n + 1, 0.0);
    if x == 0.0 {
        out[0] = 1.0;
        return;
    }
    // start well above both n and x
    let start = n.max(x as usize) + 30 + (x.sqrt() as usize) * 4;
    let mut j_next = 0.0f64;
    let mut j_curr = 1e-300f64;
    let mut norm = 0.0f64;
    for k in (1..=start).rev() {
        let j_prev = 2.0 * k as f64 / x * j_curr - j_next;
        j_next = j_curr;
        j_curr = j_prev;
        // j_curr now holds J_{k-1}
        let idx = k - 1;
        if idx <= n {
            out[idx] = j_curr;
        }
        if idx % 2 == 0 {
            norm += if idx == 0 { j_curr } else { 2.0 * j_curr };
        }
        if j_curr.abs() > 1e250 {
            let s = 1e-250;
            j_curr *= s;
            j_next *= s;
            norm *= s;
            for v in out.iter_mut() {
                *v *= s;
            }
        }
    }
    for v in out.iter_mut() {
        *v /= norm;
    }
}

/// In-place `psi <- exp(-i h H) psi`.
pub(crate) fn propagate(h_mat: &Tridiagonal, dt: f64, psi: &mut [Complex64], ws: &mut Workspace) {
    let n = psi.len();
    let (lo, hi) = h_mat.bounds();
    let center = 0.5 * (hi + lo);
    let half = (0.5 * (hi - lo)).max(1e-300) * (1.0 + 1e-12);
    let x = dt * half;

    // enough terms for |J_k(x)| to fall below double precision
    let kmax = (x + 10.0 * x.cbrt() + 30.0).ceil() as usize;
    bessel_j_sequence(x, kmax, &mut ws.bessel);
    let last = ws
        .bessel
        .iter()
        .rposition(|b| b.abs() > 1e-17)
        .unwrap_or(0)
        .max(1);

    ws.prev.clear();
    ws.prev.extend_from_slice(psi);
    ws.curr.resize(n, Complex64::default());
    ws.next.resize(n, Complex64::default());
    ws.acc.clear();
    ws.acc.extend(psi.iter().map(|p| p * ws.bessel[0]));

    let inv_half = 1.0 / half;
    h_mat.apply_scaled(center, inv_half, &ws.prev, &mut ws.curr);
    // (-i)^k
    let phases = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, -1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, 1.0),
    ];
    let c1 = phases[1] * (2.0 * ws.bessel[1]);
    for (a, c) in ws.acc.iter_mut().zip(&ws.curr) {
        *a += c * c1;
    }
    for k in 2..=last {
        h_mat.apply_scaled(center, inv_half, &ws.curr, &mut ws.next);
        let ck = phases[k % 4] * (2.0 * ws.bessel[k]);
        for i in 0..n {
            let t = 2.0 * ws.next[i] - ws.prev[i];
            ws.next[i] = t;
            ws.acc[i] += t * ck;
        }
        std::mem::swap(&mut ws.prev, &mut ws.curr);
        std::mem::swap(&mut ws.curr, &mut ws.next);
    }
    let global = Complex64::from_polar(1.0, -dt * center);
    for (p, a) in psi.iter_mut().zip(&ws.acc) {
        *p = a * global;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn bessel_reference_values() {
        let mut b = Vec::new();
        bessel_j_sequence(1.0, 5, &mut b);
        assert_abs_diff_eq!(b[0], 0.765_197_686_557_966_6, epsilon = 1e-15);
        assert_abs_diff_eq!(b[1], 0.440_050_585_744_933_5, epsilon = 1e-15);
        assert_abs_diff_eq!(b[2], 0.114_903_484_931_900_5, epsilon = 1e-15);
        bessel_j_sequence(50.0, 80, &mut b);
        assert_abs_diff_eq!(b[0], 0.055_812_327_669_251_8, epsilon = 1e-14);
        assert_abs_diff_eq!(b[10], -0.113_847_849_149_469_38, epsilon = 1e-14);
        bessel_j_sequence(700.0, 800, &mut b);
        let s: f64 = b[0] + 2.0 * b.iter().skip(2).step_by(2).sum::<f64>();
        assert_abs_diff_eq!(s, 1.0, epsilon = 1e-13);
        bessel_j_sequence(0.0, 3, &mut b);
        assert_eq!(b, vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn matches_dense_exponential() {
        let n = 7;
        let diag: Vec<f64> = (0..n).map(|j| (j * (j + 1)) as f64).collect();
        let upper: Vec<Complex64> = (0..n - 1)
            .map(|i| Complex64::new(-1.7 * (i as f64 + 1.0).sqrt(), 0.3 * i as f64))
            .collect();
        let mut dense = DMatrix::<Complex64>::zeros(n, n);
        for i in 0..n {
            dense[(i, i)] = diag[i].into();
        }
        for i in 0..n - 1 {
            dense[(i, i + 1)] = upper[i];
            dense[(i + 1, i)] = upper[i].conj();
        }
        let psi0: Vec<Complex64> = (0..n).map(|i| Complex64::new(1.0 / (1.0 + i as f64), 0.1 * i as f64)).collect();
        let dt = 0.37;
        // dense reference by scaling and squaring a Taylor series
        let steps = 1 << 12;
        let a = dense * Complex64::new(0.0, -dt / steps as f64);
        let mut e = DMatrix::<Complex64>::identity(n, n);
        let mut term = DMatrix::<Complex64>::identity(n, n);
        for k in 1..20 {
            term = &term * &a / Complex64::from(k as f64);
            e += &term;
        }
        for _ in 0..12 {
            e = &e * &e;
        }
        let expected = e * DVector::from_vec(psi0.clone());

        let mut psi = psi0;
        let mut ws = Workspace::default();
        propagate(&Tridiagonal { diag: &diag, upper: &upper }, dt, &mut psi, &mut ws);
        for i in 0..n {
            assert_abs_diff_eq!(psi[i].re, expected[i].re, epsilon = 1e-11);
            assert_abs_diff_eq!(psi[i].im, expected[i].im, epsilon = 1e-11);
        }
    }
}
