//! Truncated `|J, M>` basis at fixed `M`, the rotor operators in that basis,
//! and the orientation observable.
//!
//! In reduced units the Hamiltonian is `J^2 - A f(tau) cos(theta)`. `J^2` is
//! diagonal with entries `J(J+1)`; `cos(theta)` only couples `J` to `J +/- 1`
//! at the same `M`, so every operator here is real symmetric tridiagonal.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// `<J+1, M| cos(theta) |J, M>`.
pub fn cos_theta_coupling(j: u32, m: i32) -> Result<f64> {
    if m.unsigned_abs() > j {
        return Err(Error::Precondition(format!(
            "cos(theta) coupling needs |M| <= J, got J = {j}, M = {m}"
        )));
    }
    Ok(coupling_unchecked(j, m.unsigned_abs()))
}

#[inline]
fn coupling_unchecked(j: u32, m: u32) -> f64 {
    let j = j as f64;
    let m = m as f64;
    (((j + 1.0) * (j + 1.0) - m * m) / ((2.0 * j + 1.0) * (2.0 * j + 3.0))).sqrt()
}

/// Fixed `M` and a truncation level `Jmax >= |M|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisSpec {
    pub m: i32,
    pub jmax: u32,
}

impl BasisSpec {
    pub fn new(m: i32, jmax: u32) -> Result<Self> {
        if jmax < m.unsigned_abs() {
            return Err(Error::Precondition(format!(
                "basis needs Jmax >= |M|, got Jmax = {jmax}, M = {m}"
            )));
        }
        Ok(BasisSpec { m, jmax })
    }

    /// Lowest `J` in the basis.
    pub fn jmin(&self) -> u32 {
        self.m.unsigned_abs()
    }

    pub fn dim(&self) -> usize {
        (self.jmax - self.jmin() + 1) as usize
    }

    /// Index of `J` in the amplitude vector.
    pub fn index(&self, j: u32) -> Option<usize> {
        (j >= self.jmin() && j <= self.jmax).then(|| (j - self.jmin()) as usize)
    }

    pub fn j_of(&self, index: usize) -> u32 {
        self.jmin() + index as u32
    }
}

/// Diagonal `J(J+1)` and the off-diagonal couplings `C(J, M)`, `J -> J+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct RotorOperators {
    pub basis: BasisSpec,
    pub kinetic: Vec<f64>,
    pub coupling: Vec<f64>,
}

impl RotorOperators {
    pub fn new(basis: BasisSpec) -> Self {
        let m = basis.jmin();
        let kinetic = (basis.jmin()..=basis.jmax)
            .map(|j| (j as f64) * (j as f64 + 1.0))
            .collect();
        let coupling = (basis.jmin()..basis.jmax)
            .map(|j| coupling_unchecked(j, m))
            .collect();
        RotorOperators {
            basis,
            kinetic,
            coupling,
        }
    }

    pub fn dim(&self) -> usize {
        self.kinetic.len()
    }

    /// `out = (J^2 - field_value cos(theta)) psi`.
    pub fn apply_into(&self, field_value: f64, psi: &[Complex64], out: &mut [Complex64]) {
        let n = self.dim();
        debug_assert_eq!(psi.len(), n);
        debug_assert_eq!(out.len(), n);
        for i in 0..n {
            let mut acc = psi[i] * self.kinetic[i];
            if i > 0 {
                acc -= psi[i - 1] * (field_value * self.coupling[i - 1]);
            }
            if i + 1 < n {
                acc -= psi[i + 1] * (field_value * self.coupling[i]);
            }
            out[i] = acc;
        }
    }

    /// `<psi| cos(theta) |psi>` for an amplitude vector in this basis.
    pub fn cos_theta(&self, psi: &[Complex64]) -> f64 {
        psi.windows(2)
            .zip(&self.coupling)
            .map(|(w, &c)| 2.0 * (w[0].conj() * w[1]).re * c)
            .sum()
    }
}

/// Amplitudes `a_J` for `J = |M| ..= Jmax`.
#[derive(Debug, Clone, PartialEq)]
pub struct RotorState {
    pub basis: BasisSpec,
    pub amplitudes: Vec<Complex64>,
}

impl RotorState {
    /// The basis state `|J, M>`.
    pub fn basis_state(basis: BasisSpec, j: u32) -> Result<Self> {
        let idx = basis.index(j).ok_or_else(|| {
            Error::Precondition(format!(
                "J = {j} outside basis [{}, {}]",
                basis.jmin(),
                basis.jmax
            ))
        })?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); basis.dim()];
        amplitudes[idx] = Complex64::new(1.0, 0.0);
        Ok(RotorState { basis, amplitudes })
    }

    pub fn from_amplitudes(basis: BasisSpec, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::Precondition(format!(
                "expected {} amplitudes, got {}",
                basis.dim(),
                amplitudes.len()
            )));
        }
        Ok(RotorState { basis, amplitudes })
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Population in the two highest retained levels.
    pub fn top_population(&self) -> f64 {
        self.amplitudes.iter().rev().take(2).map(|a| a.norm_sqr()).sum()
    }

    pub fn expectation_cos_theta(&self) -> f64 {
        let m = self.basis.jmin();
        self.amplitudes
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let c = coupling_unchecked(self.basis.j_of(i), m);
                2.0 * (w[0].conj() * w[1]).re * c
            })
            .sum()
    }

    /// `(J^2 - field_value cos(theta)) |psi>` as a plain amplitude vector.
    pub fn apply_hamiltonian(&self, field_value: f64) -> Vec<Complex64> {
        let ops = RotorOperators::new(self.basis);
        let mut out = vec![Complex64::new(0.0, 0.0); self.amplitudes.len()];
        ops.apply_into(field_value, &self.amplitudes, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::{DMatrix, DVector};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Normalized associated Legendre function by upward recurrence; test-only
    /// oracle for the coupling.
    fn legendre_normalized(l: u32, m: u32, x: f64) -> f64 {
        let mut pmm = 1.0;
        let s = (1.0 - x * x).sqrt();
        for k in 1..=m {
            pmm *= -((2 * k - 1) as f64) * s;
        }
        let norm = |l: u32| {
            let mut ratio = 1.0;
            for k in (l - m + 1)..=(l + m) {
                ratio *= k as f64;
            }
            ((2 * l + 1) as f64 / 2.0 / ratio).sqrt()
        };
        if l == m {
            return pmm * norm(l);
        }
        let mut pm1 = x * (2 * m + 1) as f64 * pmm;
        let mut p_prev = pmm;
        for ll in (m + 2)..=l {
            let p = (x * (2 * ll - 1) as f64 * pm1 - (ll + m - 1) as f64 * p_prev) / (ll - m) as f64;
            p_prev = pm1;
            pm1 = p;
        }
        pm1 * norm(l)
    }

    fn coupling_by_quadrature(j: u32, m: u32) -> f64 {
        // composite Simpson on x = cos(theta) in [-1, 1]
        let n = 20_000;
        let h = 2.0 / n as f64;
        let f = |x: f64| legendre_normalized(j, m, x) * x * legendre_normalized(j + 1, m, x);
        let mut s = f(-1.0) + f(1.0);
        for k in 1..n {
            let x = -1.0 + k as f64 * h;
            s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(x);
        }
        (s * h / 3.0).abs()
    }

    #[test]
    fn coupling_values() {
        assert_abs_diff_eq!(cos_theta_coupling(0, 0).unwrap(), 1.0 / 3f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(cos_theta_coupling(1, 0).unwrap(), 2.0 / 15f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(cos_theta_coupling(1, 1).unwrap(), 1.0 / 5f64.sqrt(), epsilon = 1e-15);
        assert!(cos_theta_coupling(0, 1).is_err());
    }

    #[test]
    fn coupling_matches_quadrature() {
        for (j, m) in [(0, 0), (1, 0), (1, 1), (4, 2), (7, 0), (6, 6)] {
            let q = coupling_by_quadrature(j, m);
            assert_abs_diff_eq!(cos_theta_coupling(j, m as i32).unwrap(), q, epsilon = 1e-9);
        }
    }

    #[test]
    fn coupling_limits() {
        for j in 0..50u32 {
            let cjj = cos_theta_coupling(j, j as i32).unwrap();
            assert_abs_diff_eq!(cjj, 1.0 / ((2 * j + 3) as f64).sqrt(), epsilon = 1e-15);
            let c = cos_theta_coupling(j, 0).unwrap();
            assert!(c > 0.5 && c < 1.0);
            assert!(cos_theta_coupling(j + 1, 0).unwrap() < c);
        }
        assert_abs_diff_eq!(cos_theta_coupling(100_000, 0).unwrap(), 0.5, epsilon = 1e-5);
    }

    #[test]
    fn basis_states_have_no_orientation() {
        let basis = BasisSpec::new(0, 10).unwrap();
        for j in 0..=10 {
            assert_eq!(RotorState::basis_state(basis, j).unwrap().expectation_cos_theta(), 0.0);
        }
    }

    #[test]
    fn superpositions() {
        let basis = BasisSpec::new(0, 3).unwrap();
        let s = 0.5f64.sqrt();
        let plus = RotorState::from_amplitudes(basis, vec![c(s, 0.0), c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        let minus = RotorState::from_amplitudes(basis, vec![c(s, 0.0), c(-s, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_abs_diff_eq!(plus.expectation_cos_theta(), 1.0 / 3f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(minus.expectation_cos_theta(), -1.0 / 3f64.sqrt(), epsilon = 1e-15);
        // dense quadratic form
        let ops = RotorOperators::new(basis);
        let dense = dense_matrix(&ops, 0.0, -1.0);
        let v = DVector::from_vec(plus.amplitudes.clone());
        let q = (v.adjoint() * dense * &v)[(0, 0)];
        assert_abs_diff_eq!(q.re, plus.expectation_cos_theta(), epsilon = 1e-15);
    }

    #[test]
    fn kinetic_eigenstate() {
        let basis = BasisSpec::new(1, 6).unwrap();
        let s = RotorState::basis_state(basis, 4).unwrap();
        let h = s.apply_hamiltonian(0.0);
        assert_eq!(h[3], c(20.0, 0.0));
        assert!(h.iter().enumerate().all(|(i, z)| i == 3 || z.norm() == 0.0));
    }

    #[test]
    fn basis_bounds() {
        assert!(BasisSpec::new(3, 2).is_err());
        let b = BasisSpec::new(-2, 5).unwrap();
        assert_eq!(b.dim(), 4);
        assert_eq!(b.index(2), Some(0));
        assert_eq!(b.index(6), None);
        assert!(RotorState::basis_state(b, 1).is_err());
    }

    /// `kin_scale * J^2 - field_value * cos(theta)` as a dense complex matrix.
    fn dense_matrix(ops: &RotorOperators, kin_scale: f64, field_value: f64) -> DMatrix<Complex64> {
        let n = ops.dim();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = c(kin_scale * ops.kinetic[i], 0.0);
        }
        for i in 0..n - 1 {
            m[(i, i + 1)] = c(-field_value * ops.coupling[i], 0.0);
            m[(i + 1, i)] = c(-field_value * ops.coupling[i], 0.0);
        }
        m
    }

    fn state_strategy(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n).prop_map(|v| {
            let mut z: Vec<Complex64> = v.into_iter().map(|(a, b)| c(a, b)).collect();
            let norm = z.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt().max(1e-12);
            z.iter_mut().for_each(|a| *a /= norm);
            z
        })
    }

    proptest! {
        #[test]
        fn tridiagonal_matches_dense(m in 0i32..3, jmax in 3u32..9, g in -50.0f64..50.0, seed in state_strategy(10)) {
            let basis = BasisSpec::new(m, jmax).unwrap();
            let n = basis.dim();
            let psi = RotorState::from_amplitudes(basis, seed[..n].to_vec()).unwrap();
            let fast = psi.apply_hamiltonian(g);
            let dense = dense_matrix(&RotorOperators::new(basis), 1.0, g) * DVector::from_vec(psi.amplitudes.clone());
            for i in 0..n {
                prop_assert!((fast[i] - dense[i]).norm() <= 1e-13 * (1.0 + dense[i].norm()));
            }
        }

        #[test]
        fn hamiltonian_is_hermitian(g in -20.0f64..20.0, a in state_strategy(9), b in state_strategy(9)) {
            let basis = BasisSpec::new(0, 8).unwrap();
            let ops = RotorOperators::new(basis);
            let mut ha = vec![c(0.0, 0.0); 9];
            let mut hb = vec![c(0.0, 0.0); 9];
            ops.apply_into(g, &a, &mut ha);
            ops.apply_into(g, &b, &mut hb);
            let lhs: Complex64 = b.iter().zip(&ha).map(|(x, y)| x.conj() * y).sum();
            let rhs: Complex64 = a.iter().zip(&hb).map(|(x, y)| x.conj() * y).sum();
            prop_assert!((lhs - rhs.conj()).norm() <= 1e-13 * (1.0 + lhs.norm()));
        }

        #[test]
        fn orientation_is_bounded(m in 0i32..5, psi in state_strategy(40)) {
            let basis = BasisSpec::new(m, m as u32 + 39).unwrap();
            let s = RotorState::from_amplitudes(basis, psi).unwrap();
            let v = s.expectation_cos_theta();
            prop_assert!(v.abs() <= 1.0);
            let ops = RotorOperators::new(basis);
            prop_assert!((ops.cos_theta(&s.amplitudes) - v).abs() < 1e-15);
        }
    }
}
