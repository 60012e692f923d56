//! Vectors and square matrices whose entries are [`BiJet`]s sharing one base
//! point and order.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::jet::{BiJet, Wirtinger};

type C64 = Complex64;

#[derive(Clone, Debug, PartialEq)]
pub struct JetVector {
    entries: Vec<BiJet>,
}

impl JetVector {
    pub fn new(entries: Vec<BiJet>) -> Result<Self> {
        let first = entries
            .first()
            .ok_or_else(|| CoreError::InvalidInput("empty jet vector".into()))?;
        let (base, order) = (first.base(), first.order());
        if entries.iter().any(|e| e.base() != base || e.order() != order) {
            return Err(CoreError::ShapeMismatch("jet vector entries disagree".into()));
        }
        Ok(JetVector { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn base(&self) -> C64 {
        self.entries[0].base()
    }

    pub fn order(&self) -> usize {
        self.entries[0].order()
    }

    pub fn entries(&self) -> &[BiJet] {
        &self.entries
    }

    pub fn get(&self, i: usize) -> &BiJet {
        &self.entries[i]
    }

    pub fn value(&self) -> DVector<C64> {
        DVector::from_iterator(self.len(), self.entries.iter().map(BiJet::value))
    }

    pub fn deriv(&self, which: Wirtinger) -> Result<JetVector> {
        Ok(JetVector {
            entries: self.entries.iter().map(|e| e.deriv(which)).collect::<Result<_>>()?,
        })
    }

    /// Componentwise complex conjugate function.
    pub fn conj(&self) -> JetVector {
        JetVector { entries: self.entries.iter().map(BiJet::conj).collect() }
    }

    pub fn truncated(&self, order: usize) -> JetVector {
        JetVector { entries: self.entries.iter().map(|e| e.truncated(order)).collect() }
    }

    pub fn scale(&self, s: &BiJet) -> JetVector {
        JetVector { entries: self.entries.iter().map(|e| e * s).collect() }
    }

    pub fn sub(&self, other: &JetVector) -> JetVector {
        JetVector { entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect() }
    }

    /// Hermitian product `self† · other` as a jet.
    pub fn dot(&self, other: &JetVector) -> BiJet {
        let mut it = self.entries.iter().zip(&other.entries).map(|(a, b)| &a.conj() * b);
        let first = it.next().expect("non-empty");
        it.fold(first, |acc, t| &acc + &t)
    }

    /// `v†v` as a jet.
    pub fn norm_sqr(&self) -> BiJet {
        self.dot(self)
    }

    /// Outer product `self ⊗ other†`.
    pub fn outer(&self, other: &JetVector) -> JetMatrix {
        let n = self.len();
        let conj: Vec<BiJet> = other.entries.iter().map(BiJet::conj).collect();
        let mut entries = Vec::with_capacity(n * n);
        for a in &self.entries {
            for b in &conj {
                entries.push(a * b);
            }
        }
        JetMatrix { n, entries }
    }

    /// Largest coefficient modulus over all entries.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(BiJet::max_abs).fold(0.0, f64::max)
    }
}

/// Square matrix of jets, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct JetMatrix {
    n: usize,
    entries: Vec<BiJet>,
}

impl JetMatrix {
    pub fn identity(n: usize, base: C64, order: usize) -> Self {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(BiJet::constant(if i == j { one } else { zero }, base, order));
            }
        }
        JetMatrix { n, entries }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn base(&self) -> C64 {
        self.entries[0].base()
    }

    pub fn order(&self) -> usize {
        self.entries[0].order()
    }

    pub fn get(&self, i: usize, j: usize) -> &BiJet {
        &self.entries[i * self.n + j]
    }

    fn map(&self, f: impl Fn(&BiJet) -> BiJet) -> JetMatrix {
        JetMatrix { n: self.n, entries: self.entries.iter().map(f).collect() }
    }

    fn zip(&self, other: &JetMatrix, f: impl Fn(&BiJet, &BiJet) -> BiJet) -> JetMatrix {
        assert_eq!(self.n, other.n, "matrix dimension mismatch");
        JetMatrix { n: self.n, entries: self.entries.iter().zip(&other.entries).map(|(a, b)| f(a, b)).collect() }
    }

    pub fn add(&self, other: &JetMatrix) -> JetMatrix {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &JetMatrix) -> JetMatrix {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, s: C64) -> JetMatrix {
        self.map(|a| a.scale(s))
    }

    pub fn scale_jet(&self, s: &BiJet) -> JetMatrix {
        self.map(|a| a * s)
    }

    pub fn mul(&self, other: &JetMatrix) -> JetMatrix {
        let n = self.n;
        assert_eq!(n, other.n, "matrix dimension mismatch");
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = self.get(i, 0) * other.get(0, j);
                for k in 1..n {
                    acc = &acc + &(self.get(i, k) * other.get(k, j));
                }
                entries.push(acc);
            }
        }
        JetMatrix { n, entries }
    }

    /// `[A, B] = AB - BA`.
    pub fn commutator(&self, other: &JetMatrix) -> JetMatrix {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn deriv(&self, which: Wirtinger) -> Result<JetMatrix> {
        Ok(JetMatrix {
            n: self.n,
            entries: self.entries.iter().map(|e| e.deriv(which)).collect::<Result<_>>()?,
        })
    }

    /// Conjugate transpose as a matrix function.
    pub fn dagger(&self) -> JetMatrix {
        let n = self.n;
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(self.get(j, i).conj());
            }
        }
        JetMatrix { n, entries }
    }

    pub fn trace(&self) -> BiJet {
        let mut acc = self.get(0, 0).clone();
        for i in 1..self.n {
            acc = &acc + self.get(i, i);
        }
        acc
    }

    pub fn truncated(&self, order: usize) -> JetMatrix {
        self.map(|a| a.truncated(order))
    }

    pub fn value(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j).value())
    }

    pub fn matrix_vector(&self, v: &JetVector) -> JetVector {
        let n = self.n;
        let entries = (0..n)
            .map(|i| {
                let mut acc = self.get(i, 0) * v.get(0);
                for k in 1..n {
                    acc = &acc + &(self.get(i, k) * v.get(k));
                }
                acc
            })
            .collect();
        JetVector { entries }
    }
}

/// `tr(A B)` evaluated at the base point without forming the full product.
pub fn trace_product_value(a: &DMatrix<C64>, b: &DMatrix<C64>) -> C64 {
    let n = a.nrows();
    let mut s = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            s += a[(i, k)] * b[(k, i)];
        }
    }
    s
}
