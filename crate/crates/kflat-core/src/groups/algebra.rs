//! Word-length-filtered group-algebra elements, matrices over them, and
//! mapping-cone elements (a, b_s) with b_0 = phi(a).

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::word::{GroupHom, GroupSpec, NormalForm};
use crate::error::{KflatError, Result};

const COEFF_TOL: f64 = 1e-15;

/// Element of C[Γ] with support stored on normal forms.
#[derive(Clone, Debug, PartialEq)]
pub struct GAElement {
    pub group: GroupSpec,
    pub support: BTreeMap<NormalForm, Complex64>,
}

impl GAElement {
    pub fn zero(group: GroupSpec) -> Self {
        GAElement { group, support: BTreeMap::new() }
    }

    pub fn unit(group: GroupSpec) -> Self {
        Self::monomial(group, NormalForm::identity(), Complex64::new(1.0, 0.0))
    }

    pub fn monomial(group: GroupSpec, nf: NormalForm, c: Complex64) -> Self {
        let mut support = BTreeMap::new();
        if c.norm() > COEFF_TOL {
            support.insert(nf, c);
        }
        GAElement { group, support }
    }

    pub fn propagation(&self) -> usize {
        self.support.keys().map(|nf| nf.length()).max().unwrap_or(0)
    }

    /// l1 norm of the coefficients; dominates the C*-norm.
    pub fn l1_norm(&self) -> f64 {
        self.support.values().map(|c| c.norm()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_empty()
    }

    pub fn add_assign_term(&mut self, nf: NormalForm, c: Complex64) {
        if c.norm() <= COEFF_TOL && !self.support.contains_key(&nf) {
            return;
        }
        let entry = self.support.entry(nf.clone()).or_insert(Complex64::new(0.0, 0.0));
        *entry += c;
        if entry.norm() <= COEFF_TOL {
            self.support.remove(&nf);
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.group != other.group {
            return Err(KflatError::GroupMismatch);
        }
        let mut out = self.clone();
        for (nf, &c) in &other.support {
            out.add_assign_term(nf.clone(), c);
        }
        Ok(out)
    }

    pub fn scale(&self, z: Complex64) -> Self {
        let mut out = Self::zero(self.group.clone());
        for (nf, &c) in &self.support {
            let v = c * z;
            if v.norm() > COEFF_TOL {
                out.support.insert(nf.clone(), v);
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.group != other.group {
            return Err(KflatError::GroupMismatch);
        }
        let mut out = Self::zero(self.group.clone());
        for (a, &ca) in &self.support {
            for (b, &cb) in &other.support {
                out.add_assign_term(self.group.mul_nf(a, b), ca * cb);
            }
        }
        Ok(out)
    }

    /// Adjoint: coefficient c at gamma becomes conj(c) at gamma^{-1}.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero(self.group.clone());
        for (nf, &c) in &self.support {
            out.add_assign_term(self.group.inv_nf(nf), c.conj());
        }
        out
    }
}

/// Matrix with group-algebra entries.
#[derive(Clone, Debug)]
pub struct GAMatrix {
    pub group: GroupSpec,
    pub rows: usize,
    pub cols: usize,
    entries: Vec<GAElement>,
}

impl GAMatrix {
    pub fn zeros(group: GroupSpec, rows: usize, cols: usize) -> Self {
        let entries = vec![GAElement::zero(group.clone()); rows * cols];
        GAMatrix { group, rows, cols, entries }
    }

    pub fn identity(group: GroupSpec, n: usize) -> Self {
        let mut m = Self::zeros(group.clone(), n, n);
        for i in 0..n {
            *m.entry_mut(i, i) = GAElement::unit(group.clone());
        }
        m
    }

    pub fn entry(&self, i: usize, j: usize) -> &GAElement {
        &self.entries[i * self.cols + j]
    }

    pub fn entry_mut(&mut self, i: usize, j: usize) -> &mut GAElement {
        &mut self.entries[i * self.cols + j]
    }

    pub fn propagation(&self) -> usize {
        self.entries.iter().map(|e| e.propagation()).max().unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.shape_check(other)?;
        let mut out = self.clone();
        for (e, o) in out.entries.iter_mut().zip(&other.entries) {
            *e = e.add(o)?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.shape_check(other)?;
        let mut out = self.clone();
        for (e, o) in out.entries.iter_mut().zip(&other.entries) {
            *e = e.add(&o.scale(Complex64::new(-1.0, 0.0)))?;
        }
        Ok(out)
    }

    pub fn scale(&self, z: Complex64) -> Self {
        let mut out = self.clone();
        for e in out.entries.iter_mut() {
            *e = e.scale(z);
        }
        out
    }

    fn shape_check(&self, other: &Self) -> Result<()> {
        if self.group != other.group {
            return Err(KflatError::GroupMismatch);
        }
        if self.rows != other.rows || self.cols != other.cols {
            return Err(KflatError::ShapeMismatch {
                r1: self.rows,
                c1: self.cols,
                r2: other.rows,
                c2: other.cols,
            });
        }
        Ok(())
    }

    /// Matrix product; propagation is subadditive.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.group != other.group {
            return Err(KflatError::GroupMismatch);
        }
        if self.cols != other.rows {
            return Err(KflatError::ShapeMismatch {
                r1: self.rows,
                c1: self.cols,
                r2: other.rows,
                c2: other.cols,
            });
        }
        let mut out = Self::zeros(self.group.clone(), self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.entry(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.entry(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let prod = a.mul(b)?;
                    let tgt = out.entry_mut(i, j);
                    *tgt = tgt.add(&prod)?;
                }
            }
        }
        Ok(out)
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.group.clone(), self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                *out.entry_mut(j, i) = self.entry(i, j).adjoint();
            }
        }
        out
    }

    /// Coefficientwise pushforward through a homomorphism.
    pub fn map_hom(&self, phi: &GroupHom) -> Result<Self> {
        if phi.source != self.group {
            return Err(KflatError::GroupMismatch);
        }
        let mut out = Self::zeros(phi.target.clone(), self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let tgt = out.entry_mut(i, j);
                for (nf, &c) in &self.entry(i, j).support {
                    tgt.add_assign_term(phi.apply(nf), c);
                }
            }
        }
        Ok(out)
    }

    /// Max l1 norm over rows: a cheap upper bound for the operator norm
    /// used in multiplicativity bound checks.
    pub fn l1_bound(&self) -> f64 {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.entry(i, j).l1_norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_entry_dev(&self, other: &Self) -> Result<f64> {
        self.shape_check(other)?;
        let mut worst = 0.0_f64;
        for (e, o) in self.entries.iter().zip(&other.entries) {
            let diff = e.add(&o.scale(Complex64::new(-1.0, 0.0)))?;
            worst = worst.max(diff.l1_norm());
        }
        Ok(worst)
    }
}

/// Mapping-cone element: (a, sampled path b_s) with b_0 = phi(a) exactly.
#[derive(Clone, Debug)]
pub struct MCElement {
    pub hom: GroupHom,
    pub a: GAMatrix,
    /// uniform s-grid on [0,1): b_path[k] at s = k / len
    pub b_path: Vec<GAMatrix>,
}

impl MCElement {
    pub fn new(hom: GroupHom, a: GAMatrix, b_path: Vec<GAMatrix>) -> Result<Self> {
        if a.group != hom.source {
            return Err(KflatError::GroupMismatch);
        }
        if b_path.is_empty() {
            return Err(KflatError::Invalid("mapping-cone path must be sampled".into()));
        }
        for b in &b_path {
            if b.group != hom.target {
                return Err(KflatError::GroupMismatch);
            }
        }
        let pushed = a.map_hom(&hom)?;
        let dev = pushed.max_entry_dev(&b_path[0])?;
        if dev > 1e-12 {
            return Err(KflatError::Invalid(format!(
                "mapping-cone boundary mismatch: phi(a) vs b_0 deviates by {dev:.3e}"
            )));
        }
        Ok(MCElement { hom, a, b_path })
    }

    pub fn filtration(&self) -> usize {
        self.a
            .propagation()
            .max(self.b_path.iter().map(|b| b.propagation()).max().unwrap_or(0))
    }

    pub fn s_samples(&self) -> usize {
        self.b_path.len()
    }

    /// Pointwise product (a, b_s)(a', b'_s) = (a a', b_s b'_s); the boundary
    /// compatibility is preserved exactly.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.b_path.len() != other.b_path.len() {
            return Err(KflatError::Invalid("mapping-cone sample grids differ".into()));
        }
        let a = self.a.mul(&other.a)?;
        let b_path = self
            .b_path
            .iter()
            .zip(&other.b_path)
            .map(|(x, y)| x.mul(y))
            .collect::<Result<Vec<_>>>()?;
        MCElement::new(self.hom.clone(), a, b_path)
    }

    pub fn adjoint(&self) -> Result<Self> {
        MCElement::new(
            self.hom.clone(),
            self.a.adjoint(),
            self.b_path.iter().map(|b| b.adjoint()).collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::word::Word;

    fn z2() -> GroupSpec {
        GroupSpec::FreeAbelian { rank: 2 }
    }

    fn mono(g: &GroupSpec, letters: &[i32]) -> GAElement {
        GAElement::monomial(
            g.clone(),
            g.normal_form(&Word::new(letters.to_vec())),
            Complex64::new(1.0, 0.0),
        )
    }

    #[test]
    fn unit_times_inverse() {
        let g = z2();
        let ua = mono(&g, &[1]);
        let uainv = mono(&g, &[-1]);
        let prod = ua.mul(&uainv).unwrap();
        assert_eq!(prod, GAElement::unit(g));
    }

    #[test]
    fn abelian_product_and_propagation() {
        let g = z2();
        let x = mono(&g, &[1]).add(&mono(&g, &[2])).unwrap();
        let y = mono(&g, &[2]);
        let xy = x.mul(&y).unwrap();
        assert_eq!(xy.support.len(), 2);
        assert_eq!(xy.propagation(), 2);
    }

    #[test]
    fn adjoint_antimultiplicative() {
        let g = z2();
        let x = mono(&g, &[1, 2]).scale(Complex64::new(0.5, 0.25));
        let y = mono(&g, &[-2]).add(&mono(&g, &[1])).unwrap();
        let lhs = x.mul(&y).unwrap().adjoint();
        let rhs = y.adjoint().mul(&x.adjoint()).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn map_hom_examples() {
        // phi: Z -> trivial
        let z = GroupSpec::Free { rank: 1 };
        let phi = GroupHom::to_trivial(z.clone());
        let m = GAMatrix::identity(z.clone(), 1);
        let out = m.map_hom(&phi).unwrap();
        assert_eq!(out.entry(0, 0), &GAElement::unit(GroupSpec::Trivial));
        // identity hom
        let idm = GroupHom::identity(z2());
        let x = GAMatrix::identity(z2(), 2);
        let out2 = x.map_hom(&idm).unwrap();
        assert_eq!(out2.entry(0, 0), x.entry(0, 0));
    }

    #[test]
    fn mc_boundary_compatibility() {
        let z = GroupSpec::Free { rank: 1 };
        let phi = GroupHom::to_trivial(z.clone());
        let a = GAMatrix::identity(z.clone(), 1);
        let b0 = GAMatrix::identity(GroupSpec::Trivial, 1);
        let mc = MCElement::new(phi.clone(), a.clone(), vec![b0; 4]).unwrap();
        assert_eq!(mc.filtration(), 0);
        // mismatched boundary rejected
        let bad = GAMatrix::zeros(GroupSpec::Trivial, 1, 1);
        assert!(MCElement::new(phi, a, vec![bad]).is_err());
    }
}
