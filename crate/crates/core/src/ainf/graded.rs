//! Graded bases, homogeneous elements and dense multilinear maps.

use serde::{Deserialize, Serialize};

use super::AinfError;
use crate::C64;

/// `(-1)^e`.
pub fn sign(e: i64) -> f64 {
    if e.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisLabel {
    pub name: String,
    pub degree: i32,
}

/// Ordered list of named basis vectors with integer degrees.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<BasisLabel>", into = "Vec<BasisLabel>")]
pub struct GradedBasis {
    labels: Vec<BasisLabel>,
}

impl TryFrom<Vec<BasisLabel>> for GradedBasis {
    type Error = AinfError;

    fn try_from(labels: Vec<BasisLabel>) -> Result<Self, AinfError> {
        GradedBasis::new(labels)
    }
}

impl From<GradedBasis> for Vec<BasisLabel> {
    fn from(b: GradedBasis) -> Self {
        b.labels
    }
}

impl GradedBasis {
    pub fn new(labels: Vec<BasisLabel>) -> Result<Self, AinfError> {
        let mut names: Vec<&str> = labels.iter().map(|l| l.name.as_str()).collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(AinfError::DuplicateLabel(w[0].to_string()));
        }
        Ok(Self { labels })
    }

    /// Basis `prefix0, prefix1, ...` with the given degrees.
    pub fn from_degrees(prefix: &str, degrees: &[i32]) -> Self {
        let labels = degrees
            .iter()
            .enumerate()
            .map(|(i, &degree)| BasisLabel {
                name: format!("{prefix}{i}"),
                degree,
            })
            .collect();
        Self { labels }
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[BasisLabel] {
        &self.labels
    }

    pub fn degree(&self, i: usize) -> i32 {
        self.labels[i].degree
    }

    pub fn degrees(&self) -> Vec<i32> {
        self.labels.iter().map(|l| l.degree).collect()
    }

    /// `deg mod 2` as 0 or 1.
    pub fn parity(&self, i: usize) -> i64 {
        i64::from(self.labels[i].degree).rem_euclid(2)
    }

    pub fn indices_of_degree(&self, d: i32) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.degree(i) == d).collect()
    }

    /// Distinct degrees in increasing order.
    pub fn distinct_degrees(&self) -> Vec<i32> {
        let mut d = self.degrees();
        d.sort_unstable();
        d.dedup();
        d
    }
}

/// Coefficient vector over a graded basis.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedElement {
    pub coefficients: Vec<C64>,
    pub homogeneous_degree: Option<i32>,
}

impl GradedElement {
    /// Coefficients below this magnitude are ignored when inferring degrees.
    pub const SUPPORT_TOL: f64 = 1e-14;

    /// Builds an element and records its degree when it is homogeneous and nonzero.
    pub fn new(basis: &GradedBasis, coefficients: Vec<C64>) -> Result<Self, AinfError> {
        if coefficients.len() != basis.dim() {
            return Err(AinfError::DimensionMismatch {
                expected: basis.dim(),
                found: coefficients.len(),
            });
        }
        let homogeneous_degree = homogeneous_degree(basis, &coefficients);
        Ok(Self {
            coefficients,
            homogeneous_degree,
        })
    }

    /// Builds an element that must be homogeneous of degree `degree`.
    pub fn homogeneous(
        basis: &GradedBasis,
        coefficients: Vec<C64>,
        degree: i32,
    ) -> Result<Self, AinfError> {
        let e = Self::new(basis, coefficients)?;
        match e.homogeneous_degree {
            Some(d) if d != degree => Err(AinfError::NotHomogeneous),
            None if support(&e.coefficients).next().is_some() => Err(AinfError::NotHomogeneous),
            _ => Ok(Self {
                homogeneous_degree: Some(degree),
                ..e
            }),
        }
    }

    pub fn basis_vector(basis: &GradedBasis, i: usize) -> Self {
        let mut coefficients = vec![C64::new(0.0, 0.0); basis.dim()];
        coefficients[i] = C64::new(1.0, 0.0);
        Self {
            coefficients,
            homogeneous_degree: Some(basis.degree(i)),
        }
    }

    pub fn parity(&self) -> Option<i64> {
        self.homogeneous_degree.map(|d| i64::from(d).rem_euclid(2))
    }
}

fn support(c: &[C64]) -> impl Iterator<Item = usize> + '_ {
    c.iter()
        .enumerate()
        .filter(|(_, z)| z.norm() > GradedElement::SUPPORT_TOL)
        .map(|(i, _)| i)
}

fn homogeneous_degree(basis: &GradedBasis, c: &[C64]) -> Option<i32> {
    let mut deg = None;
    for i in support(c) {
        match deg {
            None => deg = Some(basis.degree(i)),
            Some(d) if d != basis.degree(i) => return None,
            _ => {}
        }
    }
    deg
}

/// Dense multilinear map `V^{⊗arity} -> W` stored with the output index
/// fastest: entry `(i_1, ..., i_k; o)` lives at
/// `((i_1 * n + i_2) * n + ... + i_k) * out_dim + o`.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiLinear {
    arity: usize,
    in_dim: usize,
    out_dim: usize,
    data: Vec<C64>,
}

impl MultiLinear {
    pub fn zeros(arity: usize, in_dim: usize, out_dim: usize) -> Self {
        let len = in_dim.pow(arity as u32) * out_dim;
        Self {
            arity,
            in_dim,
            out_dim,
            data: vec![C64::new(0.0, 0.0); len],
        }
    }

    /// Builds a map from a closure evaluated on every input tuple.
    pub fn from_fn(
        arity: usize,
        in_dim: usize,
        out_dim: usize,
        mut f: impl FnMut(&[usize]) -> Vec<C64>,
    ) -> Self {
        let mut m = Self::zeros(arity, in_dim, out_dim);
        for flat in 0..m.num_tuples() {
            let idx = m.unflatten(flat);
            let v = f(&idx);
            assert_eq!(v.len(), out_dim, "closure returned wrong output length");
            m.data[flat * out_dim..(flat + 1) * out_dim].copy_from_slice(&v);
        }
        m
    }

    pub fn from_raw(arity: usize, in_dim: usize, out_dim: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), in_dim.pow(arity as u32) * out_dim);
        Self {
            arity,
            in_dim,
            out_dim,
            data,
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn num_tuples(&self) -> usize {
        self.in_dim.pow(self.arity as u32)
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.arity);
        idx.iter().fold(0, |acc, &i| acc * self.in_dim + i)
    }

    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.arity];
        for slot in idx.iter_mut().rev() {
            *slot = flat % self.in_dim;
            flat /= self.in_dim;
        }
        idx
    }

    /// Output vector on a tuple of basis vectors.
    pub fn slot(&self, idx: &[usize]) -> &[C64] {
        let f = self.flatten(idx);
        &self.data[f * self.out_dim..(f + 1) * self.out_dim]
    }

    pub fn slot_mut(&mut self, idx: &[usize]) -> &mut [C64] {
        let f = self.flatten(idx);
        &mut self.data[f * self.out_dim..(f + 1) * self.out_dim]
    }

    pub fn get(&self, idx: &[usize], out: usize) -> C64 {
        self.slot(idx)[out]
    }

    pub fn set(&mut self, idx: &[usize], out: usize, value: C64) {
        self.slot_mut(idx)[out] = value;
    }

    /// Evaluates on arbitrary input vectors by contracting one slot at a time.
    pub fn apply(&self, args: &[&[C64]]) -> Vec<C64> {
        assert_eq!(args.len(), self.arity, "wrong number of arguments");
        let mut cur: Vec<C64> = self.data.clone();
        let mut block = self.data.len();
        for a in args {
            assert_eq!(a.len(), self.in_dim, "argument has wrong dimension");
            block /= self.in_dim;
            let mut next = vec![C64::new(0.0, 0.0); block];
            for (i, &ai) in a.iter().enumerate() {
                if ai.re == 0.0 && ai.im == 0.0 {
                    continue;
                }
                let src = &cur[i * block..(i + 1) * block];
                for (n, s) in next.iter_mut().zip(src) {
                    *n += ai * s;
                }
            }
            cur = next;
        }
        cur
    }

    /// Evaluates with one generic vector at `pos` and basis vectors elsewhere.
    pub fn apply_mixed(&self, basis_idx: &[usize], pos: usize, v: &[C64]) -> Vec<C64> {
        debug_assert_eq!(basis_idx.len() + 1, self.arity);
        let mut out = vec![C64::new(0.0, 0.0); self.out_dim];
        let mut idx = Vec::with_capacity(self.arity);
        idx.extend_from_slice(&basis_idx[..pos]);
        idx.push(0);
        idx.extend_from_slice(&basis_idx[pos..]);
        for (c, &vc) in v.iter().enumerate() {
            if vc.re == 0.0 && vc.im == 0.0 {
                continue;
            }
            idx[pos] = c;
            for (o, s) in out.iter_mut().zip(self.slot(&idx)) {
                *o += vc * s;
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        crate::linalg::max_abs_slice(&self.data)
    }

    /// Max-norm of the difference; `None` when shapes differ.
    pub fn distance(&self, other: &Self) -> Option<f64> {
        if self.arity != other.arity || self.in_dim != other.in_dim || self.out_dim != other.out_dim
        {
            return None;
        }
        Some(
            self.data
                .iter()
                .zip(&other.data)
                .fold(0.0, |acc, (a, b)| acc.max((a - b).norm())),
        )
    }

    /// Largest entry violating the degree rule
    /// `deg(out) = Σ deg(in) + shift`.
    pub fn degree_violation(&self, source: &GradedBasis, target: &GradedBasis, shift: i32) -> f64 {
        let mut worst = 0.0_f64;
        for flat in 0..self.num_tuples() {
            let idx = self.unflatten(flat);
            let d: i32 = idx.iter().map(|&i| source.degree(i)).sum::<i32>() + shift;
            for (o, z) in self.slot(&idx).iter().enumerate() {
                if target.degree(o) != d {
                    worst = worst.max(z.norm());
                }
            }
        }
        worst
    }
}
