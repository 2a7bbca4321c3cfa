//! Stably relative quasi-representations, the mapping-cone almost
//! homomorphism, and finite-rank compression.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::rep::QuasiRep;
use crate::error::{KflatError, Result};
use crate::groups::{GAMatrix, GroupHom, MCElement, NormalForm};
use crate::numerics::{polar_correct, polar_unitary, spec_fun, unitary_log, CMatrix};

/// The quadruple (pi1, pi2, pi0, u) with u an approximate intertwiner
/// between pi1 o phi (+) pi0 and pi2 o phi (+) pi0.
#[derive(Clone, Debug)]
pub struct RelativeQuasiRep {
    pub pi1: QuasiRep,
    pub pi2: QuasiRep,
    pub pi0: QuasiRep,
    pub u: CMatrix,
    pub phi: GroupHom,
}

impl RelativeQuasiRep {
    pub fn new(
        pi1: QuasiRep,
        pi2: QuasiRep,
        pi0: QuasiRep,
        u: CMatrix,
        phi: GroupHom,
    ) -> Result<Self> {
        if pi1.dim != pi2.dim {
            return Err(KflatError::DimMismatch { left: pi1.dim, right: pi2.dim });
        }
        if pi1.group != pi2.group || pi1.group != phi.target || pi0.group != phi.source {
            return Err(KflatError::GroupMismatch);
        }
        let d = pi1.dim + pi0.dim;
        if u.rows() != d || u.cols() != d {
            return Err(KflatError::DimMismatch { left: u.rows(), right: d });
        }
        let udef = u.unitary_defect();
        if udef > 1e-9 {
            return Err(KflatError::Invalid(format!("u is not unitary (defect {udef:.3e})")));
        }
        Ok(RelativeQuasiRep { pi1, pi2, pi0, u, phi })
    }

    pub fn dim_p(&self) -> usize {
        self.pi1.dim
    }

    pub fn dim_q(&self) -> usize {
        self.pi0.dim
    }

    /// diag(pi_i(phi(lambda)), pi0(lambda)) on P (+) Q.
    pub fn joint_image(&self, which: u8, lam: &NormalForm) -> CMatrix {
        let g = self.phi.apply(lam);
        let top = if which == 1 { self.pi1.eval(&g) } else { self.pi2.eval(&g) };
        top.direct_sum(&self.pi0.eval(lam))
    }

    /// max over the word set of || u (pi1 phi (+) pi0)(lam) u* - (pi2 phi (+) pi0)(lam) ||.
    pub fn intertwiner_defect(&self, lambda_words: &[NormalForm]) -> f64 {
        let mut worst = 0.0_f64;
        for lam in lambda_words {
            let lhs = self.u.mul(&self.joint_image(1, lam)).mul(&self.u.adjoint());
            worst = worst.max(lhs.sub(&self.joint_image(2, lam)).op_norm());
        }
        worst
    }

    /// Overall defect: the max of the component defects and the intertwiner
    /// defect on the given word sets.
    pub fn defect(&self, gamma_words: &[NormalForm], lambda_words: &[NormalForm]) -> f64 {
        self.pi1
            .defect(gamma_words)
            .max(self.pi2.defect(gamma_words))
            .max(self.pi0.defect(lambda_words))
            .max(self.intertwiner_defect(lambda_words))
    }

    pub fn distance(
        &self,
        other: &RelativeQuasiRep,
        gamma_words: &[NormalForm],
        lambda_words: &[NormalForm],
    ) -> Result<f64> {
        Ok(self
            .pi1
            .distance(&other.pi1, gamma_words)?
            .max(self.pi2.distance(&other.pi2, gamma_words)?)
            .max(self.pi0.distance(&other.pi0, lambda_words)?)
            .max(self.u.sub(&other.u).op_norm()))
    }

    /// Block direct sum, reordered so P-parts and Q-parts stay grouped.
    pub fn direct_sum(&self, other: &RelativeQuasiRep) -> Result<RelativeQuasiRep> {
        let (p1, q1) = (self.dim_p(), self.dim_q());
        let (p2, q2) = (other.dim_p(), other.dim_q());
        let pi1 = self.pi1.direct_sum(&other.pi1)?;
        let pi2 = self.pi2.direct_sum(&other.pi2)?;
        let pi0 = self.pi0.direct_sum(&other.pi0)?;
        // permutation from (P1+Q1)+(P2+Q2) to (P1+P2)+(Q1+Q2)
        let d = p1 + q1 + p2 + q2;
        let mut perm = CMatrix::zeros(d, d);
        let src_of_dst: Vec<usize> = (0..p1)
            .map(|i| i)
            .chain((0..p2).map(|i| p1 + q1 + i))
            .chain((0..q1).map(|i| p1 + i))
            .chain((0..q2).map(|i| p1 + q1 + p2 + i))
            .collect();
        for (dst, &src) in src_of_dst.iter().enumerate() {
            perm.set(dst, src, Complex64::new(1.0, 0.0));
        }
        let u_block = self.u.direct_sum(&other.u);
        let u = perm.mul(&u_block).mul(&perm.adjoint());
        RelativeQuasiRep::new(pi1, pi2, pi0, u, self.phi.clone())
    }
}

/// Output of the mapping-cone almost-homomorphism: per s-sample, the pair
/// of first- and second-component images in the doubled blocks.
#[derive(Clone, Debug)]
pub struct MappingConeSamples {
    /// s-grid over [-1, 1): the a-branch covers [-1, 0], the b-branch (0, 1)
    pub s_grid: Vec<f64>,
    pub pairs: Vec<(CMatrix, CMatrix)>,
    /// index of the s = 0 sample (end of the a-branch)
    pub boundary_index: usize,
}

/// The path ubar_s = exp((2 - s) log diag(u, u*)) and the word images
/// entering the mapping-cone almost homomorphism.
pub struct MappingConeEngine {
    rep: RelativeQuasiRep,
    ubar1: CMatrix,
    /// Hermitian generator K with ubar_1 = exp(iK)
    generator: CMatrix,
}

impl MappingConeEngine {
    pub fn new(rep: &RelativeQuasiRep, lambda_ball: &[NormalForm]) -> Result<Self> {
        let eps = rep.intertwiner_defect(lambda_ball);
        if eps >= 1.0 {
            // the interpolated path is no longer invertible beyond this
            return Err(KflatError::DefectTooLarge { defect: eps, threshold: 1.0 });
        }
        let ubar1 = rep.u.direct_sum(&rep.u.adjoint());
        let l = unitary_log(&ubar1)?;
        let generator = l.scale(Complex64::new(0.0, -1.0));
        Ok(MappingConeEngine { rep: rep.clone(), ubar1, generator })
    }

    /// ubar at path parameter s2 in [1, 2]; ubar_1 = diag(u, u*), ubar_2 = 1.
    pub fn ubar(&self, s2: f64) -> Result<CMatrix> {
        spec_fun(&self.generator, |t| Complex64::from_polar(1.0, (2.0 - s2) * t))
    }

    fn doubled_block(&self, which: u8, lam: &NormalForm) -> CMatrix {
        let d = self.rep.dim_p() + self.rep.dim_q();
        self.rep.joint_image(which, lam).direct_sum(&CMatrix::identity(d))
    }

    /// pi-tilde_{1,s2}(lam): polar-corrected interpolation between
    /// diag(pi1 phi, pi0, 1) and Ad(ubar_1*) diag(pi2 phi, pi0, 1).
    pub fn pi_tilde_1(&self, s2: f64, lam: &NormalForm) -> Result<CMatrix> {
        let b1 = self.doubled_block(1, lam);
        let b2c = self.ubar1.adjoint().mul(&self.doubled_block(2, lam)).mul(&self.ubar1);
        let raw = b1.scale(Complex64::new(s2 - 1.0, 0.0)).add(&b2c.scale(Complex64::new(2.0 - s2, 0.0)));
        polar_correct(&raw, 1e-6)
    }

    /// pi-tilde_{2,s2}(lam) = Ad(ubar_s*) diag(pi2 phi, pi0, 1).
    pub fn pi_tilde_2(&self, s2: f64, lam: &NormalForm) -> Result<CMatrix> {
        let us = self.ubar(s2)?;
        Ok(us.adjoint().mul(&self.doubled_block(2, lam)).mul(&us))
    }

    /// Linear extension of lam -> images over a Lambda group-algebra matrix.
    fn extend(&self, x: &GAMatrix, image: &BTreeMap<NormalForm, CMatrix>, dim: usize) -> CMatrix {
        let mut out = CMatrix::zeros(x.rows * dim, x.cols * dim);
        for i in 0..x.rows {
            for j in 0..x.cols {
                let mut block = CMatrix::zeros(dim, dim);
                for (nf, &c) in &x.entry(i, j).support {
                    block = block.add(&image[nf].scale(c));
                }
                out.set_block(i * dim, j * dim, &block);
            }
        }
        out
    }

    /// Both a-branch legs at path parameter s2, applied to a Lambda matrix.
    pub fn apply_a_branch(&self, a: &GAMatrix, s2: f64) -> Result<(CMatrix, CMatrix)> {
        let dim = 2 * (self.rep.dim_p() + self.rep.dim_q());
        let mut img1 = BTreeMap::new();
        let mut img2 = BTreeMap::new();
        for i in 0..a.rows {
            for j in 0..a.cols {
                for nf in a.entry(i, j).support.keys() {
                    if !img1.contains_key(nf) {
                        img1.insert(nf.clone(), self.pi_tilde_1(s2, nf)?);
                        img2.insert(nf.clone(), self.pi_tilde_2(s2, nf)?);
                    }
                }
            }
        }
        Ok((self.extend(a, &img1, dim), self.extend(a, &img2, dim)))
    }

    /// b-branch doubled blocks diag(pi_i(b_s), pi0(a), eps(a) 1), where eps
    /// is the trivial-representation evaluation of the a-part.
    pub fn apply_b_branch(&self, a: &GAMatrix, b: &GAMatrix, budget: usize) -> Result<(CMatrix, CMatrix)> {
        let p = self.rep.dim_p();
        let q = self.rep.dim_q();
        let d2 = 2 * (p + q);
        let top1 = self.rep.pi1.apply_ga(b, budget)?;
        let top2 = self.rep.pi2.apply_ga(b, budget)?;
        let mid = self.rep.pi0.apply_ga_local(a)?;
        let scalar = trivial_eval(a);
        let stab = scalar.kron(&CMatrix::identity(p + q));
        let assemble = |top: &CMatrix| -> CMatrix {
            let rows = a.rows;
            let mut out = CMatrix::zeros(rows * d2, rows * d2);
            for i in 0..rows {
                for j in 0..rows {
                    out.set_block(i * d2, j * d2, &top.submatrix(i * p, j * p, p, p));
                    out.set_block(
                        i * d2 + p,
                        j * d2 + p,
                        &mid.submatrix(i * q, j * q, q, q),
                    );
                    out.set_block(
                        i * d2 + p + q,
                        j * d2 + p + q,
                        &stab.submatrix(i * (p + q), j * (p + q), p + q, p + q),
                    );
                }
            }
            out
        };
        Ok((assemble(&top1), assemble(&top2)))
    }

    /// The sampled pi-bar image of a mapping-cone element.
    pub fn apply(&self, m: &MCElement, budget: usize) -> Result<MappingConeSamples> {
        let prop = m.filtration();
        if prop > budget {
            return Err(KflatError::PropagationExceeded { actual: prop, budget });
        }
        let l = m.s_samples();
        let mut s_grid = Vec::new();
        let mut pairs = Vec::new();
        // a-branch: s in [-1, 0], i.e. s2 = 2 + s in [1, 2]
        for k in 0..=l {
            let s = -1.0 + k as f64 / l as f64;
            let (w1, w2) = self.apply_a_branch(&m.a, 2.0 + s)?;
            s_grid.push(s);
            pairs.push((w1, w2));
        }
        let boundary_index = l;
        // b-branch: s in (0, 1) on the element's own grid
        for k in 1..l {
            let s = k as f64 / l as f64;
            let (w1, w2) = self.apply_b_branch(&m.a, &m.b_path[k], budget)?;
            s_grid.push(s);
            pairs.push((w1, w2));
        }
        Ok(MappingConeSamples { s_grid, pairs, boundary_index })
    }
}

fn trivial_eval(a: &GAMatrix) -> CMatrix {
    CMatrix::from_fn(a.rows, a.cols, |i, j| {
        a.entry(i, j).support.values().sum::<Complex64>()
    })
}

impl QuasiRep {
    /// apply_ga without a propagation budget (used on the Lambda side where
    /// the element's own filtration is the budget).
    pub fn apply_ga_local(&self, x: &GAMatrix) -> Result<CMatrix> {
        self.apply_ga(x, x.propagation())
    }
}

fn frame_of_projection(e: &CMatrix) -> Result<CMatrix> {
    let n = e.rows();
    if e.sub(&CMatrix::identity(n)).op_norm() < 1e-12 {
        return Ok(CMatrix::identity(n));
    }
    let pd = e.mul(e).sub(e).op_norm();
    if pd > 1e-9 {
        return Err(KflatError::Invalid(format!("compression by a non-projection ({pd:.3e})")));
    }
    let spec = crate::numerics::hermitian_eigen(e)?;
    let cols: Vec<usize> = (0..n).filter(|&i| spec.eigenvalues[i] > 0.5).collect();
    let mut v = CMatrix::zeros(n, cols.len());
    for (jj, &j) in cols.iter().enumerate() {
        for i in 0..n {
            v.set(i, jj, spec.eigenvectors.get(i, j));
        }
    }
    Ok(v)
}

/// Finite-rank compression of a stably relative representation by the
/// projections e (on the Gamma side) and f (on the Lambda side): compressed
/// generator images are polar-corrected on the ranges, and the intertwiner
/// becomes the unitary part of (e+f) u (e+f).
pub fn compress(
    pi1: &QuasiRep,
    pi2: &QuasiRep,
    pi0: &QuasiRep,
    u: &CMatrix,
    e: &CMatrix,
    f: &CMatrix,
    phi: &GroupHom,
) -> Result<RelativeQuasiRep> {
    let ve = frame_of_projection(e)?;
    let vf = frame_of_projection(f)?;
    let compress_rep = |rep: &QuasiRep, v: &CMatrix| -> Result<QuasiRep> {
        let imgs = rep
            .images
            .iter()
            .filter(|(s, _)| **s > 0)
            .map(|(&s, m)| {
                let c = v.adjoint().mul(m).mul(v);
                polar_unitary(&c, 1e-8).map(|uu| (s, uu))
            })
            .collect::<Result<Vec<_>>>()?;
        QuasiRep::new(rep.group.clone(), v.cols(), imgs)
    };
    let c1 = compress_rep(pi1, &ve)?;
    let c2 = compress_rep(pi2, &ve)?;
    let c0 = compress_rep(pi0, &vf)?;
    let vef = ve.direct_sum(&vf);
    let cu = vef.adjoint().mul(u).mul(&vef);
    // singular-value guard on the range
    let smin = crate::numerics::polar::sigma_min(&cu)?;
    if smin <= 0.5 {
        return Err(KflatError::SingularCompression { sigma: smin });
    }
    let cu = polar_unitary(&cu, 1e-12)?;
    RelativeQuasiRep::new(c1, c2, c0, cu, phi.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{GAElement, GroupSpec, Word};
    use crate::numerics::ONE;
    use crate::quasirep::rep::clock_shift;

    /// The built-in disk scenario data: Gamma trivial, Lambda = Z,
    /// pi0 = clock, u = 1 (+) shift^k.
    pub fn disk_rep(n: usize, shift_power: usize) -> RelativeQuasiRep {
        let gamma = GroupSpec::Trivial;
        let lambda = GroupSpec::FreeAbelian { rank: 1 };
        let phi = GroupHom::to_trivial(lambda.clone());
        let pi1 = QuasiRep::trivial(gamma.clone(), 1);
        let pi2 = QuasiRep::trivial(gamma, 1);
        let (c, s) = clock_shift(n);
        let pi0 = QuasiRep::new(lambda, n, vec![(1, c)]).unwrap();
        let mut sk = CMatrix::identity(n);
        for _ in 0..shift_power {
            sk = sk.mul(&s);
        }
        let u = CMatrix::identity(1).direct_sum(&sk);
        RelativeQuasiRep::new(pi1, pi2, pi0, u, phi).unwrap()
    }

    fn lambda_ball(r: usize) -> Vec<NormalForm> {
        GroupSpec::FreeAbelian { rank: 1 }.ball(r)
    }

    #[test]
    fn disk_intertwiner_defect_oracle() {
        for n in [8usize, 16] {
            let rep = disk_rep(n, 1);
            let eps = rep.intertwiner_defect(&lambda_ball(1));
            let expected = 2.0 * (std::f64::consts::PI / n as f64).sin();
            assert!((eps - expected).abs() < 1e-10, "n={n}: {eps} vs {expected}");
        }
    }

    #[test]
    fn exact_unitary_equivalence_has_zero_defect() {
        let rep = disk_rep(8, 0); // u = identity intertwines exactly
        assert!(rep.intertwiner_defect(&lambda_ball(2)) < 1e-12);
    }

    fn disk_mc_element(rep: &RelativeQuasiRep, samples: usize) -> MCElement {
        // m = (u_lambda, phi-path): a = u_lambda, b_s = constant phi(a)
        let lambda = rep.pi0.group.clone();
        let mut a = GAMatrix::zeros(lambda.clone(), 1, 1);
        *a.entry_mut(0, 0) = GAElement::monomial(
            lambda.clone(),
            lambda.normal_form(&Word::gen(1)),
            ONE,
        );
        let b0 = a.map_hom(&rep.phi).unwrap();
        MCElement::new(rep.phi.clone(), a, vec![b0; samples]).unwrap()
    }

    #[test]
    fn exact_rep_gives_exact_star_homomorphism_samples() {
        let rep = disk_rep(8, 0);
        let engine = MappingConeEngine::new(&rep, &lambda_ball(2)).unwrap();
        let m = disk_mc_element(&rep, 8);
        let m2 = m.mul(&m).unwrap();
        let out1 = engine.apply(&m, 2).unwrap();
        let out2 = engine.apply(&m2, 4).unwrap();
        for (k, s) in out1.s_grid.iter().enumerate() {
            let _ = s;
            let (w1, w2) = &out1.pairs[k];
            let (p1, p2) = &out2.pairs[k];
            assert!(w1.mul(w1).sub(p1).op_norm() < 1e-8);
            assert!(w2.mul(w2).sub(p2).op_norm() < 1e-8);
        }
    }

    #[test]
    fn path_proximity_bound_3eps() {
        // || pi-tilde_{1,s}(lam) - pi-tilde_{1,2}(lam) || <= 3 eps
        let n = 8;
        let rep = disk_rep(n, 1);
        let eps = rep.intertwiner_defect(&lambda_ball(1));
        let engine = MappingConeEngine::new(&rep, &lambda_ball(1)).unwrap();
        let lam = rep.pi0.group.normal_form(&Word::gen(1));
        let fixed = engine.pi_tilde_1(2.0, &lam).unwrap();
        for k in 0..=10 {
            let s2 = 1.0 + k as f64 / 10.0;
            let moved = engine.pi_tilde_1(s2, &lam).unwrap();
            let d = moved.sub(&fixed).op_norm();
            assert!(d <= 3.0 * eps + 1e-9, "s2={s2}: {d} vs 3eps={}", 3.0 * eps);
        }
    }

    #[test]
    fn multiplicativity_bound_lem_relqhom() {
        // product test of propagation 1: defect <= 10 |G^1|^2 eps ||x|| ||y||
        let n = 8;
        let rep = disk_rep(n, 1);
        let ball = lambda_ball(1);
        let eps = rep.defect(&GroupSpec::Trivial.ball(1), &ball);
        let engine = MappingConeEngine::new(&rep, &ball).unwrap();
        let m = disk_mc_element(&rep, 8);
        let m2 = m.mul(&m).unwrap();
        let out1 = engine.apply(&m, 1).unwrap();
        let out2 = engine.apply(&m2, 2).unwrap();
        let bound = 10.0 * (ball.len() as f64).powi(2) * eps; // ||x|| = ||y|| = 1
        for k in 0..out1.pairs.len() {
            let (w1, w2) = &out1.pairs[k];
            let (p1, p2) = &out2.pairs[k];
            assert!(w1.mul(w1).sub(p1).op_norm() <= bound);
            assert!(w2.mul(w2).sub(p2).op_norm() <= bound);
        }
    }

    #[test]
    fn boundary_samples_match_through_compatibility() {
        let rep = disk_rep(8, 1);
        let engine = MappingConeEngine::new(&rep, &lambda_ball(1)).unwrap();
        let m = disk_mc_element(&rep, 16);
        let out = engine.apply(&m, 1).unwrap();
        let bi = out.boundary_index;
        // s = 0 from the a-branch vs the first b-branch sample
        let (a1, a2) = &out.pairs[bi];
        let (b1, b2) = &out.pairs[bi + 1];
        // the b-path here is constant, so the only gap is the pi-tilde motion
        // over one s-step (the path-sampling modulus)
        let step = 1.0 / 16.0;
        let eps = rep.intertwiner_defect(&lambda_ball(1));
        let modulus = 6.0 * eps * step + 1e-9;
        assert!(a1.sub(b1).op_norm() <= modulus.max(3.0 * eps));
        assert!(a2.sub(b2).op_norm() <= modulus.max(3.0 * eps));
    }

    #[test]
    fn compress_identity_projections_returns_input() {
        let rep = disk_rep(8, 1);
        let e = CMatrix::identity(1);
        let f = CMatrix::identity(8);
        let out = compress(&rep.pi1, &rep.pi2, &rep.pi0, &rep.u, &e, &f, &rep.phi).unwrap();
        assert!(out.u.sub(&rep.u).op_norm() < 1e-12);
        assert!(out.pi0.distance(&rep.pi0, &lambda_ball(1)).unwrap() < 1e-12);
    }

    #[test]
    fn compress_bounds_random_instances() {
        // random block-diagonal-plus-delta instances: all defects (the
        // commutators with e, f and the intertwining defect of u) are
        // delta-scale, and the compression estimates hold at eps = their max
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let n = 8;
        let delta = 1e-3;
        let lam1 = lambda_ball(1);
        let gam1 = GroupSpec::Trivial.ball(1);
        for _ in 0..5 {
            let base = disk_rep(n, 0);
            // u = 1 (+) diagonal unitary (exact intertwiner), delta-perturbed
            let mut rand_phase = |_: usize, _: usize| {
                Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * rng.gen::<f64>())
            };
            let mut diag_u = CMatrix::identity(1 + n);
            for i in 1..=n {
                let ph = rand_phase(i, i);
                diag_u.set(i, i, ph);
            }
            let pert = CMatrix::from_fn(1 + n, 1 + n, |_, _| {
                Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            });
            let u_raw = diag_u.add(&pert.scale(Complex64::new(
                delta / pert.op_norm().max(1e-12),
                0.0,
            )));
            let u = crate::numerics::polar_unitary(&u_raw, 1e-10).unwrap();
            let rep =
                RelativeQuasiRep::new(base.pi1.clone(), base.pi2.clone(), base.pi0.clone(), u, base.phi.clone())
                    .unwrap();
            // f: half-rank block projection plus delta, rounded back
            let f0 = CMatrix::from_fn(n, n, |i, j| {
                if i == j && i < n / 2 {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            });
            let pert2 = CMatrix::from_fn(n, n, |_, _| {
                Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            });
            let h = pert2.add(&pert2.adjoint()).scale(Complex64::new(
                delta / pert2.op_norm().max(1e-12),
                0.0,
            ));
            let f = crate::numerics::spectral_projection_above(&f0.add(&h), 0.5).unwrap();
            let e = CMatrix::identity(1);
            let eps_in = {
                let mut worst = rep.intertwiner_defect(&lam1);
                for lam in &lam1 {
                    let img = rep.pi0.eval(lam);
                    worst = worst.max(img.mul(&f).sub(&f.mul(&img)).op_norm());
                }
                let ef = e.direct_sum(&f);
                worst = worst.max(rep.u.mul(&ef).sub(&ef.mul(&rep.u)).op_norm());
                worst
            };
            let out = compress(&rep.pi1, &rep.pi2, &rep.pi0, &rep.u, &e, &f, &rep.phi).unwrap();
            // (i)-(iii) of the compression estimates
            assert!(out.pi0.defect(&lam1) <= 2.0 * eps_in + 1e-9);
            assert!(out.pi1.defect(&gam1) <= 2.0 * eps_in + 1e-9);
            assert!(out.intertwiner_defect(&lam1) <= 5.0 * eps_in + 1e-9);
        }
    }

    #[test]
    fn compress_exact_inputs_exact_outputs() {
        let rep = disk_rep(8, 0);
        // e, f commuting exactly with everything: scalar blocks
        let f = CMatrix::identity(8);
        let e = CMatrix::identity(1);
        let out = compress(&rep.pi1, &rep.pi2, &rep.pi0, &rep.u, &e, &f, &rep.phi).unwrap();
        assert!(out.defect(&GroupSpec::Trivial.ball(1), &lambda_ball(1)) <= 1e-8);
    }

    #[test]
    fn direct_sum_defect_is_max() {
        let a = disk_rep(8, 1);
        let b = disk_rep(8, 0);
        let sum = a.direct_sum(&b).unwrap();
        let lam = lambda_ball(1);
        let da = a.intertwiner_defect(&lam);
        let db = b.intertwiner_defect(&lam);
        let ds = sum.intertwiner_defect(&lam);
        assert!((ds - da.max(db)).abs() < 1e-10);
    }
}
