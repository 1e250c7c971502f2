//! Anisotropic XY chain of giant atoms: dense exact diagonalization,
//! Jordan-Wigner quadratic form, Bogoliubov modes and the excitation gap.
//!
//! Basis convention matches [`crate::quantum_ops`]: site 0 is the leftmost
//! tensor factor, bit value 0 is the excited state (`sigma_z = +1`).
//! Fermions count the ground-state sites, so `sigma_z = 1 - 2 n`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::dfree::golden_min;
use crate::error::{Error, Result};
use crate::quantum_ops::{LadderConvention, Operator, C64, MAX_SITES};

/// Points in the continuum momentum grid.
pub const CONTINUUM_POINTS: usize = 10_000;

/// Fermion-number parity, equivalently the eigenvalue of `prod sigma_z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Parity {
    #[default]
    Even,
    Odd,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }

    pub fn of_count(count: usize) -> Self {
        if count % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Boundary {
    #[default]
    Open,
    Periodic,
}

/// Uniform couplings of a translation-invariant chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct XyParams {
    pub jc: f64,
    pub jp: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpinChainSpec {
    pub n: usize,
    pub jc: f64,
    pub jp: f64,
    /// One detuning per site.
    pub delta: Vec<f64>,
    pub parity: Parity,
}

impl SpinChainSpec {
    pub fn new(n: usize, jc: f64, jp: f64, delta: f64) -> Result<Self> {
        Self::with_deltas(jc, jp, vec![delta; n])
    }

    pub fn with_deltas(jc: f64, jp: f64, delta: Vec<f64>) -> Result<Self> {
        let n = delta.len();
        if n < 2 || n % 2 != 0 {
            return Err(Error::Geometry(format!("chain length must be even and at least 2, got {n}")));
        }
        for (name, v) in [("jc", jc), ("jp", jp)] {
            if !v.is_finite() {
                return Err(Error::out_of_range(name, v, "finite reals"));
            }
        }
        if let Some(&d) = delta.iter().find(|d| !d.is_finite()) {
            return Err(Error::out_of_range("delta", d, "finite reals"));
        }
        Ok(Self {
            n,
            jc,
            jp,
            delta,
            parity: Parity::Even,
        })
    }

    pub fn with_parity(mut self, parity: Parity) -> Self {
        self.parity = parity;
        self
    }

    pub fn is_uniform(&self) -> bool {
        self.delta.iter().all(|&d| d == self.delta[0])
    }

    /// Couplings for the momentum-space treatment; rejects site-dependent
    /// detunings.
    pub fn params(&self) -> Result<XyParams> {
        if !self.is_uniform() {
            return Err(Error::Geometry("momentum-space treatment needs a uniform detuning".into()));
        }
        Ok(XyParams {
            jc: self.jc,
            jp: self.jp,
            delta: self.delta[0],
        })
    }

    fn bonds(&self, boundary: Boundary) -> Vec<(usize, usize)> {
        let mut b: Vec<_> = (0..self.n - 1).map(|s| (s, s + 1)).collect();
        if boundary == Boundary::Periodic {
            b.push((self.n - 1, 0));
        }
        b
    }
}

fn bit(n: usize, site: usize) -> usize {
    1 << (n - 1 - site)
}

/// Real matrix of `2 sum[(Jp+Jc) XX + (Jc-Jp) YY] + sum Delta_n Z` in the
/// computational basis.
pub(crate) fn xy_matrix(spec: &SpinChainSpec, boundary: Boundary) -> Result<DMatrix<f64>> {
    let n = spec.n;
    if n > MAX_SITES {
        return Err(Error::TooManySites { n, max: MAX_SITES });
    }
    let dim = 1 << n;
    let mut h = DMatrix::zeros(dim, dim);
    let bonds = spec.bonds(boundary);
    for idx in 0..dim {
        h[(idx, idx)] = (0..n)
            .map(|s| if idx & bit(n, s) == 0 { spec.delta[s] } else { -spec.delta[s] })
            .sum();
        for &(s, t) in &bonds {
            let (bs, bt) = (bit(n, s), bit(n, t));
            let same = (idx & bs == 0) == (idx & bt == 0);
            // XX and YY both flip the pair; YY carries -1 on equal bits
            let amp = if same { 4.0 * spec.jp } else { 4.0 * spec.jc };
            h[(idx ^ bs ^ bt, idx)] += amp;
        }
    }
    Ok(h)
}

pub fn build_xy_hamiltonian(spec: &SpinChainSpec, boundary: Boundary) -> Result<Operator> {
    let m = xy_matrix(spec, boundary)?;
    Operator::from_matrix(m.map(|x| C64::new(x, 0.0)))
}

/// Basis indices with the given `prod sigma_z` parity.
pub fn sector_indices(n: usize, parity: Parity) -> Vec<usize> {
    (0..1usize << n)
        .filter(|i| Parity::of_count(i.count_ones() as usize) == parity)
        .collect()
}

/// Exact spectrum, optionally restricted to one parity sector.
pub fn exact_spectrum(
    spec: &SpinChainSpec,
    boundary: Boundary,
    sector: Option<Parity>,
) -> Result<Vec<f64>> {
    let h = xy_matrix(spec, boundary)?;
    let h = match sector {
        None => h,
        Some(p) => {
            let idx = sector_indices(spec.n, p);
            DMatrix::from_fn(idx.len(), idx.len(), |r, c| h[(idx[r], idx[c])])
        }
    };
    let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Ground state of one parity sector, embedded in the full `2^N` space.
pub fn exact_sector_ground_state(
    spec: &SpinChainSpec,
    boundary: Boundary,
    parity: Parity,
) -> Result<(f64, Vec<f64>)> {
    let h = xy_matrix(spec, boundary)?;
    let idx = sector_indices(spec.n, parity);
    let sub = DMatrix::from_fn(idx.len(), idx.len(), |r, c| h[(idx[r], idx[c])]);
    let eig = SymmetricEigen::new(sub);
    let (k, e0) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| Error::Numerical("empty sector".into()))?;
    let mut psi = vec![0.0; 1 << spec.n];
    for (r, &i) in idx.iter().enumerate() {
        psi[i] = eig.eigenvectors[(r, k)];
    }
    Ok((e0, psi))
}

/// `H = sum A_ij c_i^dag c_j + 1/2 sum (B_ij c_i^dag c_j^dag + h.c.) + constant`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    pub hopping: DMatrix<f64>,
    pub pairing: DMatrix<f64>,
    pub constant: f64,
}

/// Multiplier on the fermionic couplings. The standard ladder operators
/// reproduce the spin Hamiltonian exactly; the rotated ones give the
/// literal fermionic form with unit prefactors.
pub fn coupling_scale(convention: LadderConvention) -> f64 {
    match convention {
        LadderConvention::Standard => 4.0,
        LadderConvention::Rotated => 1.0,
    }
}

/// `-sum Delta_n (2 n_n - 1) + s sum (Jc c_{n+1}^dag c_n - Jp c_{n+1}^dag c_n^dag + h.c.)`,
/// with the periodic bond multiplied by `-(-1)^{N_f}` for the parity sector
/// in `spec`.
pub fn jw_quadratic_form(
    spec: &SpinChainSpec,
    boundary: Boundary,
    convention: LadderConvention,
) -> QuadraticForm {
    let n = spec.n;
    let s = coupling_scale(convention);
    let mut a = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        n,
        spec.delta.iter().map(|d| -2.0 * d),
    ));
    let mut b = DMatrix::zeros(n, n);
    for (i, j) in spec.bonds(boundary) {
        // bond (i, j) reads c_j^dag c_i; the wrap-around one picks up the sign
        let w = if i + 1 == n { -spec.parity.sign() } else { 1.0 };
        a[(j, i)] += w * s * spec.jc;
        a[(i, j)] += w * s * spec.jc;
        b[(j, i)] -= w * s * spec.jp;
        b[(i, j)] += w * s * spec.jp;
    }
    QuadraticForm {
        hopping: a,
        pairing: b,
        constant: spec.delta.iter().sum(),
    }
}

impl QuadraticForm {
    pub fn n_modes(&self) -> usize {
        self.hopping.nrows()
    }

    pub fn bdg_matrix(&self) -> DMatrix<f64> {
        let n = self.n_modes();
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(&self.hopping);
        m.view_mut((0, n), (n, n)).copy_from(&self.pairing);
        m.view_mut((n, 0), (n, n)).copy_from(&(-&self.pairing));
        m.view_mut((n, n), (n, n)).copy_from(&(-&self.hopping));
        m
    }

    /// Non-negative quasiparticle energies, ascending.
    pub fn quasiparticle_energies(&self) -> Vec<f64> {
        let n = self.n_modes();
        let mut ev: Vec<f64> = SymmetricEigen::new(self.bdg_matrix())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev[n..].iter().map(|e| e.max(0.0)).collect()
    }

    /// Energy of the quasiparticle vacuum.
    pub fn vacuum_energy(&self, eps: &[f64]) -> f64 {
        self.constant + 0.5 * (self.hopping.trace() - eps.iter().sum::<f64>())
    }

    /// Fermion parity of the quasiparticle vacuum, from the sign of
    /// `det(A + B)`.
    pub fn vacuum_parity(&self) -> Parity {
        if (&self.hopping + &self.pairing).determinant() >= 0.0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    /// All many-body levels, optionally keeping one fermion parity.
    pub fn many_body_spectrum(&self, sector: Option<Parity>) -> Result<Vec<f64>> {
        let n = self.n_modes();
        if n > 20 {
            return Err(Error::TooManySites { n, max: 20 });
        }
        let eps = self.quasiparticle_energies();
        let e0 = self.vacuum_energy(&eps);
        let vac = self.vacuum_parity();
        let mut out: Vec<f64> = (0..1usize << n)
            .filter(|mask| {
                sector.is_none_or(|p| {
                    let flips = Parity::of_count(mask.count_ones() as usize);
                    (vac.sign() * flips.sign()) == p.sign()
                })
            })
            .map(|mask| {
                e0 + (0..n)
                    .filter(|j| mask & (1 << j) != 0)
                    .map(|j| eps[j])
                    .sum::<f64>()
            })
            .collect();
        out.sort_by(f64::total_cmp);
        Ok(out)
    }

    /// Lowest level with the requested fermion parity.
    pub fn sector_ground_energy(&self, parity: Parity) -> f64 {
        let eps = self.quasiparticle_energies();
        let e0 = self.vacuum_energy(&eps);
        if self.vacuum_parity() == parity {
            e0
        } else {
            e0 + eps[0]
        }
    }
}

/// Ground energies of both sectors of the periodic chain and the lower one.
pub fn ground_sector(spec: &SpinChainSpec, convention: LadderConvention) -> (Parity, f64, f64) {
    let even = jw_quadratic_form(&spec.clone().with_parity(Parity::Even), Boundary::Periodic, convention)
        .sector_ground_energy(Parity::Even);
    let odd = jw_quadratic_form(&spec.clone().with_parity(Parity::Odd), Boundary::Periodic, convention)
        .sector_ground_energy(Parity::Odd);
    let p = if odd < even { Parity::Odd } else { Parity::Even };
    (p, even, odd)
}

/// Momenta `k > 0` that pair with `-k`: `(2m+1) pi / N` in the even sector,
/// `2 m pi / N` without `0` and `pi` in the odd one.
pub fn paired_momenta(n: usize, parity: Parity) -> Vec<f64> {
    let nf = n as f64;
    match parity {
        Parity::Even => (0..n / 2).map(|m| (2 * m + 1) as f64 * PI / nf).collect(),
        Parity::Odd => (1..n / 2).map(|m| (2 * m) as f64 * PI / nf).collect(),
    }
}

/// Every allowed momentum in `[0, pi]`, including the unpaired `0` and `pi`
/// of the odd sector.
pub fn allowed_momenta(n: usize, parity: Parity) -> Vec<f64> {
    let mut k = paired_momenta(n, parity);
    if parity == Parity::Odd {
        k.insert(0, 0.0);
        k.push(PI);
    }
    k
}

impl XyParams {
    /// `eps_k = 2 sqrt(Delta^2 + 8(Jp^2+Jc^2) - 8 Delta Jc cos k - 8(Jp^2-Jc^2) cos 2k)`,
    /// evaluated through the equivalent sum of squares
    /// `(Delta - 4 Jc cos k)^2 + 16 Jp^2 sin^2 k`, which keeps full relative
    /// accuracy where the gap closes.
    pub fn dispersion_paper(&self, k: f64) -> Result<f64> {
        let XyParams { jc, jp, delta } = *self;
        let e = 2.0 * (delta - 4.0 * jc * k.cos()).hypot(4.0 * jp * k.sin());
        if !e.is_finite() {
            return Err(Error::Numerical(format!("non-finite dispersion at k = {k}")));
        }
        Ok(e)
    }

    /// The printed radicand, expanded; loses accuracy near gap closing.
    pub fn dispersion_paper_expanded(&self, k: f64) -> f64 {
        let XyParams { jc, jp, delta } = *self;
        let rhs = delta * delta + 8.0 * (jp * jp + jc * jc)
            - 8.0 * delta * jc * k.cos()
            - 8.0 * (jp * jp - jc * jc) * (2.0 * k).cos();
        2.0 * rhs.max(0.0).sqrt()
    }

    /// Normal part of a `(k, -k)` block in the standard convention.
    pub fn xi(&self, k: f64) -> f64 {
        8.0 * self.jc * k.cos() - 2.0 * self.delta
    }

    /// Anomalous amplitude of a `(k, -k)` block in the standard convention.
    pub fn pairing_amplitude(&self, k: f64) -> f64 {
        8.0 * self.jp * k.sin()
    }

    /// Quasiparticle energy from the standard Bogoliubov block, written in
    /// a form free of cancellation.
    pub fn dispersion_bdg(&self, k: f64) -> f64 {
        self.xi(k).hypot(self.pairing_amplitude(k))
    }

    /// Angle from `tan 2 theta = -Jp sin k / (Jc cos k + Delta)`, principal
    /// branch in `(-pi/4, pi/4]`.
    pub fn bogoliubov_angle(&self, k: f64) -> f64 {
        let num = -self.jp * k.sin();
        let den = self.jc * k.cos() + self.delta;
        if num == 0.0 {
            return 0.0;
        }
        if den == 0.0 {
            return if num > 0.0 { PI / 4.0 } else { -PI / 4.0 };
        }
        let theta = 0.5 * (num / den).atan();
        if theta == -PI / 4.0 { PI / 4.0 } else { theta }
    }

    /// Angle of the `(k, -k)` ground state `cos theta |0> + i sin theta |k,-k>`
    /// that diagonalizes the standard block, continuous across `xi = 0`.
    pub fn bogoliubov_angle_bdg(&self, k: f64) -> f64 {
        0.5 * (-self.pairing_amplitude(k)).atan2(self.xi(k))
    }

    /// Coefficients of the momentum-space block as printed:
    /// `(16 Jc cos k - 2 Delta, -8 Jp sin k)`.
    pub fn momentum_hamiltonian_coeffs(&self, k: f64) -> (f64, f64) {
        (16.0 * self.jc * k.cos() - 2.0 * self.delta, -8.0 * self.jp * k.sin())
    }

    /// Minimum of the printed dispersion over the given momenta.
    pub fn gap_on(&self, ks: &[f64]) -> Result<f64> {
        ks.iter()
            .map(|&k| self.dispersion_paper(k))
            .try_fold(f64::INFINITY, |m, e| e.map(|e| m.min(e)))
    }

    /// Minimum over `[0, pi]`: dense grid, then golden-section refinement
    /// around the best grid point.
    pub fn continuum_gap(&self) -> Result<f64> {
        let h = PI / (CONTINUUM_POINTS - 1) as f64;
        let mut best = (0usize, f64::INFINITY);
        for i in 0..CONTINUUM_POINTS {
            let e = self.dispersion_paper(i as f64 * h)?;
            if e < best.1 {
                best = (i, e);
            }
        }
        let lo = (best.0 as f64 - 1.0).max(0.0) * h;
        let hi = ((best.0 + 1) as f64 * h).min(PI);
        let f = |k: f64| self.dispersion_paper(k).unwrap_or(f64::INFINITY);
        let k = golden_min(f, lo, hi, 1e-12);
        Ok(best.1.min(f(k)))
    }
}

/// Which momenta the gap is taken over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum KGrid {
    /// The `N` momenta allowed in the spec's parity sector.
    Quantized,
    Continuum,
}

pub fn dispersion_paper(k: f64, spec: &SpinChainSpec) -> Result<f64> {
    spec.params()?.dispersion_paper(k)
}

pub fn bogoliubov_angle(k: f64, spec: &SpinChainSpec) -> Result<f64> {
    Ok(spec.params()?.bogoliubov_angle(k))
}

pub fn bogoliubov_angle_bdg(k: f64, spec: &SpinChainSpec) -> Result<f64> {
    Ok(spec.params()?.bogoliubov_angle_bdg(k))
}

pub fn momentum_hamiltonian_coeffs(k: f64, spec: &SpinChainSpec) -> Result<(f64, f64)> {
    Ok(spec.params()?.momentum_hamiltonian_coeffs(k))
}

pub fn energy_gap(spec: &SpinChainSpec, grid: KGrid) -> Result<f64> {
    let p = spec.params()?;
    match grid {
        KGrid::Quantized => p.gap_on(&allowed_momenta(spec.n, spec.parity)),
        KGrid::Continuum => p.continuum_gap(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BogoliubovMode {
    pub k: f64,
    pub theta_k: f64,
    pub eps_k: f64,
}

/// Modes on the paired momenta of the spec's sector, with the printed
/// angle and dispersion.
pub fn bogoliubov_modes(spec: &SpinChainSpec) -> Result<Vec<BogoliubovMode>> {
    let p = spec.params()?;
    paired_momenta(spec.n, spec.parity)
        .into_iter()
        .map(|k| {
            Ok(BogoliubovMode {
                k,
                theta_k: p.bogoliubov_angle(k),
                eps_k: p.dispersion_paper(k)?,
            })
        })
        .collect()
}

/// How the printed momentum-space forms compare with the Bogoliubov
/// treatment derived from the spin Hamiltonian.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConventionReport {
    /// Largest `|eps_printed - eps_standard|` relative to `eps_standard`.
    pub standard_vs_printed: f64,
    /// Range of `eps_rotated / eps_printed` over the sampled momenta.
    pub rotated_ratio: (f64, f64),
    /// Range of the eigenvalue of the printed momentum block over
    /// `eps_printed`.
    pub printed_block_ratio: (f64, f64),
    /// Largest `|theta_printed - theta_bdg|` over the sampled momenta.
    pub angle_mismatch: f64,
}

pub fn convention_report(p: XyParams, samples: usize) -> Result<ConventionReport> {
    let rotated = XyParams { jc: p.jc / 4.0, jp: p.jp / 4.0, delta: p.delta };
    let mut rep = ConventionReport {
        standard_vs_printed: 0.0,
        rotated_ratio: (f64::INFINITY, f64::NEG_INFINITY),
        printed_block_ratio: (f64::INFINITY, f64::NEG_INFINITY),
        angle_mismatch: 0.0,
    };
    let widen = |r: &mut (f64, f64), x: f64| {
        r.0 = r.0.min(x);
        r.1 = r.1.max(x);
    };
    for i in 1..samples {
        let k = PI * i as f64 / samples as f64;
        let printed = p.dispersion_paper(k)?;
        let standard = p.dispersion_bdg(k);
        if standard > 1e-9 {
            rep.standard_vs_printed = rep.standard_vs_printed.max((printed - standard).abs() / standard);
        }
        if printed > 1e-9 {
            widen(&mut rep.rotated_ratio, rotated.dispersion_bdg(k) / printed);
            let (d, o) = p.momentum_hamiltonian_coeffs(k);
            widen(&mut rep.printed_block_ratio, d.hypot(o) / printed);
        }
        rep.angle_mismatch = rep
            .angle_mismatch
            .max((p.bogoliubov_angle(k) - p.bogoliubov_angle_bdg(k)).abs());
    }
    Ok(rep)
}

/// Continuum gap over a `(Delta, Jp)` grid, rows indexed by `delta`.
pub fn gap_map(jc: f64, deltas: &[f64], jps: &[f64]) -> Result<Vec<Vec<f64>>> {
    deltas
        .par_iter()
        .map(|&delta| {
            jps.iter()
                .map(|&jp| XyParams { jc, jp, delta }.continuum_gap())
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum_ops::{pauli, PauliKind};
    use crate::scan::linspace;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn spec(n: usize, jc: f64, jp: f64, d: f64) -> SpinChainSpec {
        SpinChainSpec::new(n, jc, jp, d).unwrap()
    }

    fn assert_spectra_eq(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < tol, "{x} vs {y}");
        }
    }

    /// The chain Hamiltonian assembled from Kronecker products.
    fn pauli_sum(s: &SpinChainSpec, boundary: Boundary) -> Operator {
        let n = s.n;
        let p = |k, i| pauli(k, i, n).unwrap();
        let mut h = Operator::zeros(1 << n);
        for (i, j) in s.bonds(boundary) {
            let xx = &p(PauliKind::X, i) * &p(PauliKind::X, j);
            let yy = &p(PauliKind::Y, i) * &p(PauliKind::Y, j);
            h = &h + &(&xx.scale_re(2.0 * (s.jp + s.jc)) + &yy.scale_re(2.0 * (s.jc - s.jp)));
        }
        for i in 0..n {
            h = &h + &p(PauliKind::Z, i).scale_re(s.delta[i]);
        }
        h
    }

    #[test]
    fn bit_construction_matches_pauli_products() {
        let s = SpinChainSpec::with_deltas(0.7, -0.3, vec![0.4, 1.1, -0.2, 0.9]).unwrap();
        for b in [Boundary::Open, Boundary::Periodic] {
            let h = build_xy_hamiltonian(&s, b).unwrap();
            assert!(h.max_abs_diff(&pauli_sum(&s, b)) < 1e-14);
        }
    }

    #[test]
    fn uncoupled_pair_is_diagonal() {
        let h = build_xy_hamiltonian(&spec(2, 0.0, 0.0, 1.0), Boundary::Open).unwrap();
        let want = [2.0, 0.0, 0.0, -2.0];
        for r in 0..4 {
            for c in 0..4 {
                let w = if r == c { want[r] } else { 0.0 };
                assert_eq!(h.get(r, c), C64::new(w, 0.0));
            }
        }
    }

    #[test]
    fn pure_exchange_spectrum_is_symmetric() {
        let ev = exact_spectrum(&spec(2, 0.8, 0.0, 0.0), Boundary::Open, None).unwrap();
        for (a, b) in ev.iter().zip(ev.iter().rev()) {
            assert_abs_diff_eq!(*a, -*b, epsilon = 1e-12);
        }
    }

    #[test]
    fn too_many_sites_rejected() {
        let s = spec(14, 1.0, 0.5, 2.0);
        assert!(matches!(xy_matrix(&s, Boundary::Open), Err(Error::TooManySites { .. })));
        assert!(SpinChainSpec::new(5, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn pairing_matrix_antisymmetric_and_vanishes_without_jp() {
        let s = spec(6, 1.0, 0.5, 2.0);
        for b in [Boundary::Open, Boundary::Periodic] {
            let q = jw_quadratic_form(&s, b, LadderConvention::Rotated);
            assert!((&q.pairing + q.pairing.transpose()).amax() < 1e-12);
            assert!((&q.hopping - q.hopping.transpose()).amax() < 1e-12);
        }
        let q = jw_quadratic_form(&spec(6, 1.0, 0.0, 2.0), Boundary::Periodic, LadderConvention::Standard);
        assert_eq!(q.pairing.amax(), 0.0);
    }

    #[test]
    fn ground_energy_matches_free_fermions_n8() {
        let s = spec(8, 1.0, 0.5, 2.0);
        let ed = exact_spectrum(&s, Boundary::Open, None).unwrap()[0];
        let q = jw_quadratic_form(&s, Boundary::Open, LadderConvention::Standard);
        let eps = q.quasiparticle_energies();
        assert_abs_diff_eq!(ed, q.vacuum_energy(&eps), epsilon = 1e-8);
    }

    #[test]
    fn open_chain_full_spectrum_matches() {
        for n in [4, 6, 8] {
            let s = SpinChainSpec::with_deltas(1.0, 0.5, (0..n).map(|i| 2.0 + 0.1 * i as f64).collect()).unwrap();
            let ed = exact_spectrum(&s, Boundary::Open, None).unwrap();
            let q = jw_quadratic_form(&s, Boundary::Open, LadderConvention::Standard);
            assert_spectra_eq(&ed, &q.many_body_spectrum(None).unwrap(), 1e-8);
        }
    }

    #[test]
    fn periodic_sector_spectra_match() {
        for n in [4, 6, 8] {
            for (jc, jp, d) in [(1.0, 0.5, 2.0), (1.0, -0.3, 5.0), (0.6, 0.9, -1.3)] {
                for p in [Parity::Even, Parity::Odd] {
                    let s = spec(n, jc, jp, d).with_parity(p);
                    let ed = exact_spectrum(&s, Boundary::Periodic, Some(p)).unwrap();
                    let q = jw_quadratic_form(&s, Boundary::Periodic, LadderConvention::Standard);
                    assert_spectra_eq(&ed, &q.many_body_spectrum(Some(p)).unwrap(), 1e-8);
                }
            }
        }
    }

    #[test]
    fn rotated_form_is_the_chain_with_quartered_couplings() {
        let s = spec(6, 1.0, 0.5, 2.0);
        let quarter = spec(6, 0.25, 0.125, 2.0);
        let ed = exact_spectrum(&quarter, Boundary::Open, None).unwrap();
        let q = jw_quadratic_form(&s, Boundary::Open, LadderConvention::Rotated);
        assert_spectra_eq(&ed, &q.many_body_spectrum(None).unwrap(), 1e-8);
    }

    #[test]
    fn sector_ground_energies_match_exact() {
        let s = spec(6, 1.0, 0.5, 2.0);
        let (_, even, odd) = ground_sector(&s, LadderConvention::Standard);
        let e = exact_spectrum(&s, Boundary::Periodic, Some(Parity::Even)).unwrap()[0];
        let o = exact_spectrum(&s, Boundary::Periodic, Some(Parity::Odd)).unwrap()[0];
        assert_abs_diff_eq!(even, e, epsilon = 1e-9);
        assert_abs_diff_eq!(odd, o, epsilon = 1e-9);
    }

    #[test]
    fn momenta_quantization() {
        let e = paired_momenta(4, Parity::Even);
        assert_spectra_eq(&e, &[PI / 4.0, 3.0 * PI / 4.0], 1e-15);
        let o = allowed_momenta(4, Parity::Odd);
        assert_spectra_eq(&o, &[0.0, PI / 2.0, PI], 1e-15);
    }

    #[test]
    fn dispersion_collapses_without_pairing() {
        let p = XyParams { jc: 1.3, jp: 0.0, delta: 0.7 };
        for i in 0..=50 {
            let k = PI * i as f64 / 50.0;
            let want = 2.0 * (4.0 * p.jc * k.cos() - p.delta).abs();
            assert_abs_diff_eq!(p.dispersion_paper(k).unwrap(), want, epsilon = 1e-12);
        }
    }

    #[test]
    fn dispersion_at_zone_edges() {
        let p = XyParams { jc: 1.0, jp: 0.8, delta: 2.5 };
        assert_abs_diff_eq!(p.dispersion_paper(0.0).unwrap(), 2.0 * (2.5f64 - 4.0).abs(), epsilon = 1e-12);
        assert_abs_diff_eq!(p.dispersion_paper(PI).unwrap(), 2.0 * (2.5f64 + 4.0).abs(), epsilon = 1e-12);
    }

    #[test]
    fn printed_and_standard_dispersions_agree() {
        let rep = convention_report(XyParams { jc: 1.0, jp: 0.5, delta: 2.0 }, 200).unwrap();
        assert!(rep.standard_vs_printed < 1e-12, "{rep:?}");
        assert!(rep.rotated_ratio.0 < 0.9);
        assert!(rep.printed_block_ratio.1 > 1.1);
    }

    #[test]
    fn factored_dispersion_matches_expanded_form() {
        for (jc, jp, delta) in [(1.0, 0.5, 2.0), (0.7, -1.3, -5.0), (1.0, 0.0, 4.0)] {
            let p = XyParams { jc, jp, delta };
            for k in linspace(0.0, PI, 37) {
                let scale = 2.0 * (delta.abs() + 4.0 * (jc.abs() + jp.abs()));
                assert_abs_diff_eq!(p.dispersion_paper(k).unwrap(), p.dispersion_paper_expanded(k), epsilon = 1e-6 * scale);
            }
        }
        // away from the closing points the two agree to rounding
        let p = XyParams { jc: 1.0, jp: 0.5, delta: 2.0 };
        assert_abs_diff_eq!(p.dispersion_paper(1.0).unwrap(), p.dispersion_paper_expanded(1.0), epsilon = 1e-12);
    }

    #[test]
    fn angle_examples() {
        let p = XyParams { jc: 1.0, jp: 0.5, delta: 2.0 };
        assert_abs_diff_eq!(p.bogoliubov_angle(PI / 2.0), 0.5 * (-0.25f64).atan(), epsilon = 1e-15);
        assert_eq!(p.bogoliubov_angle(0.0), 0.0);
        assert_abs_diff_eq!(p.bogoliubov_angle(PI), 0.0, epsilon = 1e-15);
        let q = XyParams { jp: 0.0, ..p };
        assert!((0..20).all(|i| q.bogoliubov_angle(i as f64 * 0.15) == 0.0));
    }

    #[test]
    fn bdg_angle_diagonalizes_block() {
        let p = XyParams { jc: 1.0, jp: 0.5, delta: 2.0 };
        for i in 1..20 {
            let k = PI * i as f64 / 20.0;
            let t = p.bogoliubov_angle_bdg(k);
            let (xi, d) = (p.xi(k), p.pairing_amplitude(k));
            // residual of the block [[-xi, d], [d, xi]] acting on (cos, sin)
            let r0 = -xi * t.cos() + d * t.sin() + p.dispersion_bdg(k) * t.cos();
            let r1 = d * t.cos() + xi * t.sin() + p.dispersion_bdg(k) * t.sin();
            assert!(r0.abs() < 1e-12 && r1.abs() < 1e-12);
        }
    }

    #[test]
    fn printed_coefficients() {
        let p = XyParams { jc: 1.0, jp: 0.0, delta: 2.0 };
        let (d, o) = p.momentum_hamiltonian_coeffs(PI / 2.0);
        assert_abs_diff_eq!(d, -4.0, epsilon = 1e-12);
        assert_eq!(o, 0.0);
    }

    #[test]
    fn gap_examples() {
        let s = spec(16, 1.0, 0.5, 4.0);
        assert!(energy_gap(&s, KGrid::Continuum).unwrap() < 1e-6);
        assert!(dispersion_paper(0.0, &s).unwrap() < 1e-6);
        let s = spec(16, 1.0, 0.0, 2.0);
        assert!(energy_gap(&s, KGrid::Continuum).unwrap() < 1e-6);
        assert!(energy_gap(&s, KGrid::Quantized).unwrap() > 0.1);
        for jp in [-1.0, -0.2, 0.05, 0.6] {
            assert!(energy_gap(&spec(16, 1.0, jp, 2.0), KGrid::Continuum).unwrap() > 1e-3);
        }
    }

    #[test]
    fn gap_closing_loci() {
        let jc = 1.0;
        for jp in [-1.5, -0.5, 0.3, 1.2] {
            for d in [-4.0, 4.0] {
                assert!(XyParams { jc, jp, delta: d }.continuum_gap().unwrap() < 1e-6);
            }
        }
        for d in [-3.5, -1.0, 0.0, 2.2, 3.9] {
            assert!(XyParams { jc, jp: 0.0, delta: d }.continuum_gap().unwrap() < 1e-6);
        }
        for d in [-7.0, -4.5, -2.0, 1.0, 4.5, 7.0] {
            for jp in [-1.0, -0.1, 0.1, 1.0] {
                assert!(XyParams { jc, jp, delta: d }.continuum_gap().unwrap() > 1e-3, "{d} {jp}");
            }
        }
    }

    #[test]
    fn per_site_detuning_blocks_momentum_ops() {
        let s = SpinChainSpec::with_deltas(1.0, 0.5, vec![1.0, 2.0]).unwrap();
        assert!(dispersion_paper(0.3, &s).is_err());
        assert!(build_xy_hamiltonian(&s, Boundary::Open).is_ok());
    }

    proptest! {
        #[test]
        fn dispersion_even_in_k(k in 0.0..PI, jc in -2.0..2.0f64, jp in -2.0..2.0f64, d in -8.0..8.0f64) {
            let p = XyParams { jc, jp, delta: d };
            prop_assert!((p.dispersion_paper(k).unwrap() - p.dispersion_paper(-k).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn printed_angle_relation(k in 0.01..3.13f64, jc in -2.0..2.0f64, jp in -2.0..2.0f64, d in -8.0..8.0f64) {
            let p = XyParams { jc, jp, delta: d };
            let t = p.bogoliubov_angle(k);
            prop_assume!((jc * k.cos() + d).abs() > 1e-6);
            let resid = (2.0 * t).tan() * (jc * k.cos() + d) + jp * k.sin();
            prop_assert!(resid.abs() < 1e-10 * (1.0 + jp.abs()));
            prop_assert!(t > -PI / 4.0 && t <= PI / 4.0);
        }
    }
}
