//! Dense operator algebra on multi-qubit Hilbert spaces.
//!
//! Site 0 is the leftmost tensor factor. On each site the basis is
//! `|e>` (index 0, sigma_z = +1) followed by `|g>` (index 1, sigma_z = -1),
//! so `sigma_+ = |e><g|` is the upper off-diagonal element.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest number of qubits a dense operator may span (4096 x 4096).
pub const MAX_SITES: usize = 12;

/// Tolerance used by [`Operator::is_hermitian`].
pub const HERMITIAN_TOL: f64 = 1e-12;

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PauliKind {
    X,
    Y,
    Z,
    Plus,
    Minus,
}

/// How the ladder operators relate to sigma_x and sigma_y.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LadderConvention {
    /// sigma_pm = (sigma_x +- i sigma_y) / 2
    #[default]
    Standard,
    /// sigma_pm = sigma_x +- i sigma_y, twice the standard operators.
    Rotated,
}

/// A square complex matrix acting on `log2(dim)` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    m: DMatrix<C64>,
}

impl Operator {
    pub fn from_matrix(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                left: m.nrows(),
                right: m.ncols(),
            });
        }
        if !m.nrows().is_power_of_two() {
            return Err(Error::NotPowerOfTwo(m.nrows()));
        }
        Ok(Self { m })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            m: DMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            m: DMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn n_sites(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.m
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.m[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self {
            m: self.m.adjoint(),
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { m: &self.m * c }
    }

    pub fn scale_re(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    pub fn kron(&self, other: &Operator) -> Self {
        Self {
            m: self.m.kronecker(&other.m),
        }
    }

    /// `AB - BA`.
    pub fn commutator(&self, other: &Operator) -> Self {
        &(self * other) - &(other * self)
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Spectral norm (largest singular value).
    pub fn op_norm(&self) -> f64 {
        if self.max_abs() == 0.0 {
            return 0.0;
        }
        self.m
            .clone()
            .singular_values()
            .iter()
            .cloned()
            .fold(0.0, f64::max)
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        (&self.m - self.m.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_deviation() < HERMITIAN_TOL
    }

    /// Hermitian part `(X + X^dagger)/2`.
    pub fn hermitian_part(&self) -> Self {
        Self {
            m: (&self.m + self.m.adjoint()) * C64::new(0.5, 0.0),
        }
    }

    /// `Im(X) = (X - X^dagger) / 2i`.
    pub fn im_part(&self) -> Self {
        Self {
            m: (&self.m - self.m.adjoint()) * C64::new(0.0, -0.5),
        }
    }

    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        (&self.m - &other.m)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Ascending eigenvalues and the matching eigenvectors as columns.
    pub fn eigh(&self) -> Result<(Vec<f64>, DMatrix<C64>)> {
        let dev = self.hermiticity_deviation();
        if dev >= HERMITIAN_TOL.max(1e-12 * self.max_abs()) {
            return Err(Error::NotHermitian(dev));
        }
        let eig = SymmetricEigen::new(self.hermitian_part().m);
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(self.dim(), self.dim(), |r, c| {
            eig.eigenvectors[(r, order[c])]
        });
        Ok((values, vectors))
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(self.eigh()?.0)
    }
}

impl<'a> Add<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn add(self, rhs: &'a Operator) -> Operator {
        Operator { m: &self.m + &rhs.m }
    }
}

impl<'a> Sub<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn sub(self, rhs: &'a Operator) -> Operator {
        Operator { m: &self.m - &rhs.m }
    }
}

impl<'a> Mul<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn mul(self, rhs: &'a Operator) -> Operator {
        Operator { m: &self.m * &rhs.m }
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        Operator { m: -&self.m }
    }
}

fn single_site(kind: PauliKind, convention: LadderConvention) -> DMatrix<C64> {
    let ladder_scale = match convention {
        LadderConvention::Standard => 1.0,
        LadderConvention::Rotated => 2.0,
    };
    let entries = match kind {
        PauliKind::X => [ZERO, ONE, ONE, ZERO],
        PauliKind::Y => [ZERO, -I, I, ZERO],
        PauliKind::Z => [ONE, ZERO, ZERO, -ONE],
        PauliKind::Plus => [ZERO, ONE * ladder_scale, ZERO, ZERO],
        PauliKind::Minus => [ZERO, ZERO, ONE * ladder_scale, ZERO],
    };
    DMatrix::from_row_slice(2, 2, &entries)
}

/// Single-site Pauli or ladder operator embedded in `n_sites` qubits.
pub fn pauli(kind: PauliKind, site: usize, n_sites: usize) -> Result<Operator> {
    pauli_with(kind, site, n_sites, LadderConvention::Standard)
}

pub fn pauli_with(
    kind: PauliKind,
    site: usize,
    n_sites: usize,
    convention: LadderConvention,
) -> Result<Operator> {
    check_sites(n_sites)?;
    if site >= n_sites {
        return Err(Error::SiteOutOfRange { site, n_sites });
    }
    let left = DMatrix::<C64>::identity(1 << site, 1 << site);
    let right_sites = n_sites - site - 1;
    let right = DMatrix::<C64>::identity(1 << right_sites, 1 << right_sites);
    let m = left
        .kronecker(&single_site(kind, convention))
        .kronecker(&right);
    Ok(Operator { m })
}

pub(crate) fn check_sites(n_sites: usize) -> Result<()> {
    if n_sites > MAX_SITES {
        return Err(Error::TooManySites {
            n: n_sites,
            max: MAX_SITES,
        });
    }
    if n_sites == 0 {
        return Err(Error::SiteOutOfRange { site: 0, n_sites });
    }
    Ok(())
}

/// `||O - O^dagger||_max < 1e-12`.
pub fn hermitize_check(op: &Operator) -> bool {
    op.is_hermitian()
}

/// Hermitian eigendecomposition with ascending eigenvalues.
pub fn eig_herm(op: &Operator) -> Result<(Vec<f64>, DMatrix<C64>)> {
    op.eigh()
}
