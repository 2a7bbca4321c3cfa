//! Group descriptors, words and normal forms.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{KflatError, Result};

/// Group kind. Generators are the symbols 1..=rank with formal inverses
/// -1..=-rank; 0 is never a letter. The generating set 𝒢 always contains
/// the identity and is closed under inversion.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GroupSpec {
    Trivial,
    Free { rank: usize },
    FreeAbelian { rank: usize },
}

impl GroupSpec {
    pub fn rank(&self) -> usize {
        match self {
            GroupSpec::Trivial => 0,
            GroupSpec::Free { rank } | GroupSpec::FreeAbelian { rank } => *rank,
        }
    }

    /// Generator symbols including the identity (0 stands for e here) and
    /// inverses, the set 𝒢.
    pub fn generating_set(&self) -> Vec<i32> {
        let r = self.rank() as i32;
        let mut g = vec![0];
        for k in 1..=r {
            g.push(k);
            g.push(-k);
        }
        g
    }

    pub fn check_symbol(&self, s: i32) -> Result<()> {
        if s == 0 || s.unsigned_abs() as usize <= self.rank() {
            Ok(())
        } else {
            Err(KflatError::UnknownGenerator { symbol: s, rank: self.rank() })
        }
    }

    /// Closed ball 𝒢^r = all products of r generators (𝒢 contains e, so this
    /// is every element of length <= r), as a set of normal forms.
    pub fn ball(&self, r: usize) -> Vec<NormalForm> {
        assert!(r >= 1, "ball radius must be >= 1");
        let mut set: BTreeSet<NormalForm> = BTreeSet::new();
        set.insert(self.normal_form(&Word::identity()));
        for _ in 0..r {
            let mut next = set.clone();
            for w in &set {
                for s in self.generating_set() {
                    if s == 0 {
                        continue;
                    }
                    let mut letters = w.letters().to_vec();
                    letters.push(s);
                    next.insert(self.normal_form(&Word::new(letters)));
                }
            }
            set = next;
        }
        set.into_iter().collect()
    }

    /// Canonical form of a word in this group.
    pub fn normal_form(&self, w: &Word) -> NormalForm {
        match self {
            GroupSpec::Trivial => NormalForm(Vec::new()),
            GroupSpec::Free { .. } => {
                let mut stack: Vec<i32> = Vec::with_capacity(w.0.len());
                for &s in &w.0 {
                    if s == 0 {
                        continue;
                    }
                    if let Some(&top) = stack.last() {
                        if top == -s {
                            stack.pop();
                            continue;
                        }
                    }
                    stack.push(s);
                }
                NormalForm(stack)
            }
            GroupSpec::FreeAbelian { rank } => {
                let mut exp = vec![0i64; *rank];
                for &s in &w.0 {
                    if s == 0 {
                        continue;
                    }
                    let k = s.unsigned_abs() as usize - 1;
                    exp[k] += if s > 0 { 1 } else { -1 };
                }
                // canonical letters: generator order, powers expanded
                let mut letters = Vec::new();
                for (k, &e) in exp.iter().enumerate() {
                    let s = (k + 1) as i32;
                    for _ in 0..e.abs() {
                        letters.push(if e > 0 { s } else { -s });
                    }
                }
                NormalForm(letters)
            }
        }
    }

    pub fn nf_check(&self, w: &Word) -> Result<NormalForm> {
        for &s in &w.0 {
            self.check_symbol(s)?;
        }
        Ok(self.normal_form(w))
    }

    pub fn mul_nf(&self, a: &NormalForm, b: &NormalForm) -> NormalForm {
        let mut letters = a.0.clone();
        letters.extend_from_slice(&b.0);
        self.normal_form(&Word::new(letters))
    }

    pub fn inv_nf(&self, a: &NormalForm) -> NormalForm {
        let letters: Vec<i32> = a.0.iter().rev().map(|&s| -s).collect();
        self.normal_form(&Word::new(letters))
    }
}

/// A word in the generators: a sequence of signed symbols (0 = identity).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Word(pub Vec<i32>);

impl Word {
    pub fn new(letters: Vec<i32>) -> Self {
        Word(letters)
    }

    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn gen(k: i32) -> Self {
        Word(vec![k])
    }

    pub fn letters(&self) -> &[i32] {
        &self.0
    }
}

/// A canonical representative. Ordered so group-algebra supports can live in
/// BTreeMaps with deterministic iteration.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NormalForm(pub Vec<i32>);

impl NormalForm {
    pub fn identity() -> Self {
        NormalForm(Vec::new())
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    /// Word length under the normal form.
    pub fn length(&self) -> usize {
        self.0.len()
    }

    pub fn letters(&self) -> &[i32] {
        &self.0
    }

    pub fn as_word(&self) -> Word {
        Word(self.0.clone())
    }

    /// Exponent vector for free-abelian normal forms.
    pub fn exponents(&self, rank: usize) -> Vec<i64> {
        let mut exp = vec![0i64; rank];
        for &s in &self.0 {
            let k = s.unsigned_abs() as usize - 1;
            exp[k] += if s > 0 { 1 } else { -1 };
        }
        exp
    }
}

/// Homomorphism given by generator images; well-defined on the supported
/// kinds (checked on the defining relations for free-abelian targets).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupHom {
    pub source: GroupSpec,
    pub target: GroupSpec,
    /// image of generator k (1-based) as a word in the target
    pub images: Vec<Word>,
}

impl GroupHom {
    pub fn new(source: GroupSpec, target: GroupSpec, images: Vec<Word>) -> Result<Self> {
        if images.len() != source.rank() {
            return Err(KflatError::Invalid(format!(
                "homomorphism needs {} generator images, got {}",
                source.rank(),
                images.len()
            )));
        }
        for w in &images {
            for &s in w.letters() {
                target.check_symbol(s)?;
            }
        }
        Ok(GroupHom { source, target, images })
    }

    pub fn identity(g: GroupSpec) -> Self {
        let images = (1..=g.rank() as i32).map(Word::gen).collect();
        GroupHom { source: g.clone(), target: g, images }
    }

    pub fn to_trivial(source: GroupSpec) -> Self {
        let images = (0..source.rank()).map(|_| Word::identity()).collect();
        GroupHom { source, target: GroupSpec::Trivial, images }
    }

    /// Pushforward of a normal form through the homomorphism.
    pub fn apply(&self, nf: &NormalForm) -> NormalForm {
        let mut letters = Vec::new();
        for &s in nf.letters() {
            let k = s.unsigned_abs() as usize - 1;
            let img = &self.images[k];
            if s > 0 {
                letters.extend_from_slice(img.letters());
            } else {
                letters.extend(img.letters().iter().rev().map(|&t| -t));
            }
        }
        self.target.normal_form(&Word::new(letters))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_reduction() {
        let g = GroupSpec::Free { rank: 2 };
        // a a^-1 b -> b
        let nf = g.normal_form(&Word::new(vec![1, -1, 2]));
        assert_eq!(nf.letters(), &[2]);
        // idempotent
        assert_eq!(g.normal_form(&nf.as_word()), nf);
    }

    #[test]
    fn abelian_normal_form() {
        let g = GroupSpec::FreeAbelian { rank: 2 };
        // a b a^-1 b -> b^2
        let nf = g.normal_form(&Word::new(vec![1, 2, -1, 2]));
        assert_eq!(nf.letters(), &[2, 2]);
        assert_eq!(nf.length(), 2);
    }

    #[test]
    fn trivial_group_collapses() {
        let g = GroupSpec::Trivial;
        let nf = g.normal_form(&Word::new(vec![]));
        assert!(nf.is_identity());
    }

    #[test]
    fn ball_sizes_z2() {
        let g = GroupSpec::FreeAbelian { rank: 2 };
        assert_eq!(g.ball(1).len(), 5);
        // lattice diamond |i| + |j| <= 3 has 25 points
        assert_eq!(g.ball(3).len(), 25);
    }

    #[test]
    fn ball_trivial() {
        let g = GroupSpec::Trivial;
        assert_eq!(g.ball(4).len(), 1);
    }

    #[test]
    fn ball_free_enumeration_oracle() {
        // free rank 1 = Z: ball r has 2r+1 elements
        let g = GroupSpec::Free { rank: 1 };
        assert_eq!(g.ball(2).len(), 5);
        // free rank 2: 1 + sum_{k=1..r} 4*3^(k-1)
        let g2 = GroupSpec::Free { rank: 2 };
        assert_eq!(g2.ball(1).len(), 5);
        assert_eq!(g2.ball(2).len(), 17);
    }

    #[test]
    fn length_subadditive() {
        let g = GroupSpec::FreeAbelian { rank: 2 };
        let a = g.normal_form(&Word::new(vec![1, 1, 2]));
        let b = g.normal_form(&Word::new(vec![-1, 2, 2]));
        let ab = g.mul_nf(&a, &b);
        assert!(ab.length() <= a.length() + b.length());
    }

    #[test]
    fn hom_generator_image() {
        // phi: Z -> Z^2, lambda |-> a ; u_{lambda^2} -> u_{a^2}
        let phi = GroupHom::new(
            GroupSpec::Free { rank: 1 },
            GroupSpec::FreeAbelian { rank: 2 },
            vec![Word::gen(1)],
        )
        .unwrap();
        let lam2 = GroupSpec::Free { rank: 1 }.normal_form(&Word::new(vec![1, 1]));
        assert_eq!(phi.apply(&lam2).letters(), &[1, 1]);
    }
}
