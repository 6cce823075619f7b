use nalgebra::DVector;

use super::{CMat, C64};

/// Hilbert-Schmidt orthonormal basis of the traceless Hermitian matrices
/// (normalised generalised Gell-Mann matrices).
#[derive(Clone, Debug)]
pub struct TracelessBasis {
    dim: usize,
    elements: Vec<CMat>,
}

impl TracelessBasis {
    pub fn new(d: usize) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut elements = Vec::with_capacity(d * d - 1);
        for j in 0..d {
            for k in (j + 1)..d {
                let mut sym = CMat::zeros(d, d);
                sym[(j, k)] = C64::new(s, 0.0);
                sym[(k, j)] = C64::new(s, 0.0);
                elements.push(sym);
                let mut anti = CMat::zeros(d, d);
                anti[(j, k)] = C64::new(0.0, -s);
                anti[(k, j)] = C64::new(0.0, s);
                elements.push(anti);
            }
        }
        for l in 1..d {
            let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
            let mut diag = CMat::zeros(d, d);
            for i in 0..l {
                diag[(i, i)] = C64::new(norm, 0.0);
            }
            diag[(l, l)] = C64::new(-(l as f64) * norm, 0.0);
            elements.push(diag);
        }
        Self { dim: d, elements }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of elements, `d^2 - 1`.
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[CMat] {
        &self.elements
    }

    /// Real coordinates `Re Tr(B_b X)`; for traceless Hermitian `X` these
    /// reproduce `X` exactly.
    pub fn coords(&self, x: &CMat) -> DVector<f64> {
        DVector::from_iterator(self.len(), self.elements.iter().map(|b| super::hs_inner(b, x).re))
    }

    pub fn from_coords(&self, c: &[f64]) -> CMat {
        let mut out = CMat::zeros(self.dim, self.dim);
        for (b, &w) in self.elements.iter().zip(c) {
            out += b.scale(w);
        }
        out
    }

    /// `I/d + sum_b c_b B_b`: the unit-trace matrix with these coordinates.
    pub fn state_from_coords(&self, c: &[f64]) -> CMat {
        let mut out = self.from_coords(c);
        for i in 0..self.dim {
            out[(i, i)] += C64::new(1.0 / self.dim as f64, 0.0);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{frobenius, hs_inner, random_traceless_hermitian, seeded_rng};

    #[test]
    fn orthonormal_and_traceless() {
        for d in 2..=5 {
            let basis = TracelessBasis::new(d);
            assert_eq!(basis.len(), d * d - 1);
            for (i, a) in basis.elements().iter().enumerate() {
                assert!(a.trace().norm() < 1e-15);
                assert!(frobenius(&(a - a.adjoint())) < 1e-15);
                for (j, b) in basis.elements().iter().enumerate() {
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!((hs_inner(a, b) - C64::new(expected, 0.0)).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn coordinates_round_trip() {
        let mut rng = seeded_rng(2);
        let basis = TracelessBasis::new(3);
        let x = random_traceless_hermitian(3, &mut rng);
        let back = basis.from_coords(basis.coords(&x).as_slice());
        assert!(frobenius(&(x - back)) < 1e-14);
    }
}
