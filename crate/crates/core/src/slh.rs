//! SLH triplets for giant atoms in a bidirectional parametric waveguide.
//!
//! Each coupling point contributes a jump operator dressed by the local
//! squeezing of the right- or left-moving field. Points are cascaded with
//! the series product in propagation order, with free-propagation phase
//! triplets between neighbouring points.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum_ops::{check_sites, pauli, Operator, PauliKind, C64, I, ONE};
use crate::waveguide::{squeeze_coeffs, Direction, WaveguideConfig};

/// Tolerance on `|S| = 1`.
pub const UNITARITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingPoint {
    /// Position in phase units.
    pub z: f64,
    /// Coupling strength g(z).
    pub g: f64,
}

impl CouplingPoint {
    pub fn new(z: f64, g: f64) -> Self {
        Self { z, g }
    }

    /// Relaxation rate `sqrt(2 pi g^2)` (group velocity 1).
    pub fn gamma(&self) -> f64 {
        (2.0 * PI * self.g * self.g).sqrt()
    }
}

/// An emitter coupled to the waveguide at several points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GiantAtom {
    pub detuning: f64,
    points: Vec<CouplingPoint>,
}

impl GiantAtom {
    pub fn new(detuning: f64, points: Vec<CouplingPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Geometry("a giant atom needs at least one coupling point".into()));
        }
        if points.windows(2).any(|w| !(w[1].z > w[0].z)) {
            return Err(Error::Geometry("coupling points must be strictly increasing in z".into()));
        }
        if let Some(p) = points.iter().find(|p| !(p.g >= 0.0)) {
            return Err(Error::out_of_range("g", p.g, "[0, inf)"));
        }
        Ok(Self { detuning, points })
    }

    pub fn points(&self) -> &[CouplingPoint] {
        &self.points
    }

    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    pub fn first_z(&self) -> f64 {
        self.points[0].z
    }

    pub fn last_z(&self) -> f64 {
        self.points[self.points.len() - 1].z
    }

    pub fn with_detuning(mut self, detuning: f64) -> Self {
        self.detuning = detuning;
        self
    }

    /// Rigid shift of all coupling points.
    pub fn translated(&self, dz: f64) -> Self {
        Self {
            detuning: self.detuning,
            points: self
                .points
                .iter()
                .map(|p| CouplingPoint::new(p.z + dz, p.g))
                .collect(),
        }
    }
}

/// `(S, L, H)` with a diagonal scattering matrix, one jump operator per
/// channel.
#[derive(Debug, Clone, PartialEq)]
pub struct SlhTriplet {
    pub scattering: Vec<C64>,
    pub jumps: Vec<Operator>,
    pub hamiltonian: Operator,
}

impl SlhTriplet {
    pub fn new(scattering: C64, jump: Operator, hamiltonian: Operator) -> Result<Self> {
        if jump.dim() != hamiltonian.dim() {
            return Err(Error::DimensionMismatch {
                left: jump.dim(),
                right: hamiltonian.dim(),
            });
        }
        if (scattering.norm() - 1.0).abs() > UNITARITY_TOL {
            return Err(Error::out_of_range("|S|", scattering.norm(), "{1}"));
        }
        if !hamiltonian.is_hermitian() {
            return Err(Error::NotHermitian(hamiltonian.hermiticity_deviation()));
        }
        Ok(Self {
            scattering: vec![scattering],
            jumps: vec![jump],
            hamiltonian,
        })
    }

    /// `(1, 0, 0)` on a `dim`-dimensional space.
    pub fn identity(dim: usize) -> Self {
        phase_triplet(0.0, dim)
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn channels(&self) -> usize {
        self.scattering.len()
    }

    /// The scattering phase of a single-channel triplet.
    pub fn scalar_scattering(&self) -> C64 {
        self.scattering[0]
    }

    pub fn jump(&self) -> &Operator {
        &self.jumps[0]
    }
}

/// Free propagation over a phase `phi`: `(e^{i phi}, 0, 0)`.
pub fn phase_triplet(phi: f64, dim: usize) -> SlhTriplet {
    SlhTriplet {
        scattering: vec![C64::from_polar(1.0, phi)],
        jumps: vec![Operator::zeros(dim)],
        hamiltonian: Operator::zeros(dim),
    }
}

/// Feeds the output of `upstream` into `downstream`:
/// `S = S2 S1`, `L = L2 + S2 L1`, `H = H1 + H2 + Im(L2^dagger S2 L1)`.
pub fn series_product(downstream: &SlhTriplet, upstream: &SlhTriplet) -> Result<SlhTriplet> {
    if downstream.dim() != upstream.dim() {
        return Err(Error::DimensionMismatch {
            left: downstream.dim(),
            right: upstream.dim(),
        });
    }
    if downstream.channels() != 1 || upstream.channels() != 1 {
        return Err(Error::DimensionMismatch {
            left: downstream.channels(),
            right: upstream.channels(),
        });
    }
    let s2 = downstream.scalar_scattering();
    let s1 = upstream.scalar_scattering();
    let l1 = upstream.jump();
    let l2 = downstream.jump();
    let jump = l2 + &l1.scale(s2);
    let cross = (&l2.adjoint() * l1).scale(s2).im_part();
    let hamiltonian = &(&upstream.hamiltonian + &downstream.hamiltonian) + &cross;
    Ok(SlhTriplet {
        scattering: vec![s2 * s1],
        jumps: vec![jump],
        hamiltonian,
    })
}

/// Stacks independent channels: block-diagonal scattering, concatenated
/// jumps, summed Hamiltonians.
pub fn concatenate(right: &SlhTriplet, left: &SlhTriplet) -> Result<SlhTriplet> {
    if right.dim() != left.dim() {
        return Err(Error::DimensionMismatch {
            left: right.dim(),
            right: left.dim(),
        });
    }
    let mut scattering = right.scattering.clone();
    scattering.extend_from_slice(&left.scattering);
    let mut jumps = right.jumps.clone();
    jumps.extend(left.jumps.iter().cloned());
    Ok(SlhTriplet {
        scattering,
        jumps,
        hamiltonian: &right.hamiltonian + &left.hamiltonian,
    })
}

fn jump_op(
    atom_index: usize,
    z: f64,
    cfg: &WaveguideConfig,
    n_atoms: usize,
    direction: Direction,
) -> Result<Operator> {
    let sc = squeeze_coeffs(cfg, z, direction)?;
    let lower = pauli(PauliKind::Minus, atom_index, n_atoms)?;
    let raise = pauli(PauliKind::Plus, atom_index, n_atoms)?;
    let carrier = match direction {
        Direction::Right => C64::from_polar(1.0, 2.0 * z),
        Direction::Left => C64::from_polar(1.0, -2.0 * z),
    };
    Ok(&lower.scale_re(sc.c) + &raise.scale(sc.s * carrier))
}

/// Squeezed jump operator of a coupling point seen by the right-moving field.
pub fn jump_op_right(
    atom_index: usize,
    point: &CouplingPoint,
    cfg: &WaveguideConfig,
    n_atoms: usize,
) -> Result<Operator> {
    jump_op(atom_index, point.z, cfg, n_atoms, Direction::Right)
}

/// Squeezed jump operator of a coupling point seen by the left-moving field.
pub fn jump_op_left(
    atom_index: usize,
    point: &CouplingPoint,
    cfg: &WaveguideConfig,
    n_atoms: usize,
) -> Result<Operator> {
    jump_op(atom_index, point.z, cfg, n_atoms, Direction::Left)
}

/// Whether the cascade must see the points of two atoms alternate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ordering {
    /// Exactly two atoms with interleaved points a1 b1 a2 b2 ...
    Braided,
    /// Any arrangement with distinct positions.
    Free,
}

#[derive(Debug, Clone, Copy)]
struct Site {
    z: f64,
    atom: usize,
    point: usize,
}

fn sorted_sites(atoms: &[GiantAtom], ordering: Ordering) -> Result<Vec<Site>> {
    if atoms.is_empty() {
        return Err(Error::Geometry("no atoms".into()));
    }
    check_sites(atoms.len())?;
    let mut sites: Vec<Site> = atoms
        .iter()
        .enumerate()
        .flat_map(|(atom, a)| {
            a.points()
                .iter()
                .enumerate()
                .map(move |(point, p)| Site { z: p.z, atom, point })
        })
        .collect();
    sites.sort_by(|x, y| x.z.total_cmp(&y.z));
    if sites.windows(2).any(|w| w[0].z == w[1].z) {
        return Err(Error::Geometry("coincident coupling points".into()));
    }
    if ordering == Ordering::Braided {
        if atoms.len() != 2 || atoms[0].n_points() != atoms[1].n_points() {
            return Err(Error::Geometry(
                "braided ordering needs two atoms with equal point counts".into(),
            ));
        }
        if sites.iter().enumerate().any(|(k, s)| s.atom != k % 2) {
            return Err(Error::Geometry(
                "coupling points are not interleaved as a1 b1 a2 b2 ...".into(),
            ));
        }
    }
    Ok(sites)
}

fn point_triplet(
    atoms: &[GiantAtom],
    site: &Site,
    cfg: &WaveguideConfig,
    direction: Direction,
) -> Result<SlhTriplet> {
    let n = atoms.len();
    let p = &atoms[site.atom].points()[site.point];
    let s = jump_op(site.atom, p.z, cfg, n, direction)?;
    let jump = s.scale_re((0.5 * p.gamma()).sqrt());
    // the atom's bare energy rides on its first right-moving element
    let hamiltonian = if direction == Direction::Right && site.point == 0 {
        pauli(PauliKind::Z, site.atom, n)?.scale_re(0.5 * atoms[site.atom].detuning)
    } else {
        Operator::zeros(1 << n)
    };
    Ok(SlhTriplet {
        scattering: vec![ONE],
        jumps: vec![jump],
        hamiltonian,
    })
}

fn cascade(
    atoms: &[GiantAtom],
    cfg: &WaveguideConfig,
    ordering: Ordering,
    direction: Direction,
) -> Result<SlhTriplet> {
    let mut sites = sorted_sites(atoms, ordering)?;
    if direction == Direction::Left {
        sites.reverse();
    }
    let dim = 1 << atoms.len();
    let mut total = point_triplet(atoms, &sites[0], cfg, direction)?;
    for pair in sites.windows(2) {
        let phase = phase_triplet((pair[1].z - pair[0].z).abs(), dim);
        let next = point_triplet(atoms, &pair[1], cfg, direction)?;
        total = series_product(&next, &series_product(&phase, &total)?)?;
    }
    Ok(total)
}

/// Right-moving cascade over all coupling points in increasing z.
pub fn cascade_right(
    atoms: &[GiantAtom],
    cfg: &WaveguideConfig,
    ordering: Ordering,
) -> Result<SlhTriplet> {
    cascade(atoms, cfg, ordering, Direction::Right)
}

/// Left-moving cascade over all coupling points in decreasing z.
pub fn cascade_left(
    atoms: &[GiantAtom],
    cfg: &WaveguideConfig,
    ordering: Ordering,
) -> Result<SlhTriplet> {
    cascade(atoms, cfg, ordering, Direction::Left)
}

/// Both directions, concatenated.
pub fn cascade_total(
    atoms: &[GiantAtom],
    cfg: &WaveguideConfig,
    ordering: Ordering,
) -> Result<SlhTriplet> {
    concatenate(
        &cascade_right(atoms, cfg, ordering)?,
        &cascade_left(atoms, cfg, ordering)?,
    )
}

/// Collective jump operator as a phase-weighted sum over every coupling
/// point, written without the series product. Right-moving phases are
/// referenced to the first point, left-moving ones to the last, and the
/// total propagation phase multiplies the sum.
pub fn direct_jump_sum(
    atoms: &[GiantAtom],
    cfg: &WaveguideConfig,
    direction: Direction,
) -> Result<Operator> {
    let sites = sorted_sites(atoms, Ordering::Free)?;
    let z_first = sites[0].z;
    let z_last = sites[sites.len() - 1].z;
    let overall = C64::from_polar(1.0, z_last - z_first);
    let mut sum = Operator::zeros(1 << atoms.len());
    for s in &sites {
        let p = &atoms[s.atom].points()[s.point];
        let phase = match direction {
            Direction::Right => p.z - z_first,
            Direction::Left => z_last - p.z,
        };
        let op = jump_op(s.atom, p.z, cfg, atoms.len(), direction)?;
        let w = overall * C64::from_polar((0.5 * p.gamma()).sqrt(), -phase);
        sum = &sum + &op.scale(w);
    }
    Ok(sum)
}

/// Pair-interaction part of one direction's cascaded Hamiltonian for two
/// atoms, summed point by point in closed form (exchange dressed by
/// `cosh`, pairing by `sinh`), plus the atoms' bare energies on the
/// right-moving part.
pub fn closed_form_direction_hamiltonian(
    a: &GiantAtom,
    b: &GiantAtom,
    cfg: &WaveguideConfig,
    direction: Direction,
) -> Result<Operator> {
    let sp_a = pauli(PauliKind::Plus, 0, 2)?;
    let sm_a = pauli(PauliKind::Minus, 0, 2)?;
    let sp_b = pauli(PauliKind::Plus, 1, 2)?;
    let mut exchange = C64::new(0.0, 0.0); // coefficient of sigma_+^b sigma_-^a
    let mut pairing = C64::new(0.0, 0.0); // coefficient of sigma_+^a sigma_+^b
    let g = cfg.gain;
    for pa in a.points() {
        for pb in b.points() {
            let dz = pb.z - pa.z;
            let sgn = sign(dz);
            let w = (pa.gamma() * pb.gamma()).sqrt();
            let ch = (0.5 * g * dz).cosh();
            let sh = (0.5 * g * dz).sinh();
            match direction {
                Direction::Right => {
                    exchange += sgn * w / (4.0 * I) * C64::from_polar(ch, dz);
                    pairing += sgn * w / 4.0
                        * C64::from_polar(sh, cfg.pump_phase_right + pa.z + pb.z);
                }
                Direction::Left => {
                    // the left-moving field carries the conjugate exchange phase
                    exchange += (sgn * w / (4.0 * I) * C64::from_polar(ch, dz)).conj();
                    pairing += sgn * w / 4.0
                        * C64::from_polar(sh, cfg.pump_phase_left - pa.z - pb.z);
                }
            }
        }
    }
    let ex = (&sp_b * &sm_a).scale(exchange);
    let pr = (&sp_a * &sp_b).scale(pairing);
    let mut h = &(&ex + &ex.adjoint()) + &(&pr + &pr.adjoint());
    if direction == Direction::Right {
        let za = pauli(PauliKind::Z, 0, 2)?.scale_re(0.5 * a.detuning);
        let zb = pauli(PauliKind::Z, 1, 2)?.scale_re(0.5 * b.detuning);
        h = &h + &(&za + &zb);
    }
    Ok(h)
}

pub(crate) fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Rotates every atom's raising operator, `sigma_+ -> e^{-i phi} sigma_+`,
/// by conjugating with a diagonal unitary.
pub fn rotate_raising_phase(op: &Operator, phi: f64) -> Operator {
    let n = op.n_sites();
    let excitations = |idx: usize| (n - (idx.count_ones() as usize)) as f64;
    let m = nalgebra::DMatrix::from_fn(op.dim(), op.dim(), |r, c| {
        op.get(r, c) * C64::from_polar(1.0, -phi * (excitations(r) - excitations(c)))
    });
    Operator::from_matrix(m).expect("same dimension")
}

/// Gauge that removes the common pump phase: each raising operator picks up
/// `e^{-i theta_+/4}`, so the two-atom pairing term rotates by
/// `e^{-i theta_+/2}`.
pub fn gauge_transform(op: &Operator, theta_plus: f64) -> Operator {
    rotate_raising_phase(op, 0.25 * theta_plus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cfg(g: f64) -> WaveguideConfig {
        WaveguideConfig::new(g, 4.0 * PI).unwrap()
    }

    fn atom(points: &[(f64, f64)]) -> GiantAtom {
        GiantAtom::new(
            0.0,
            points.iter().map(|&(z, g)| CouplingPoint::new(z, g)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn jump_without_gain_is_lowering() {
        let p = CouplingPoint::new(1.3, 1.0);
        let s = jump_op_right(1, &p, &cfg(0.0), 2).unwrap();
        let sm = pauli(PauliKind::Minus, 1, 2).unwrap();
        assert_eq!(s.max_abs_diff(&sm), 0.0);
        let s = jump_op_left(1, &p, &cfg(0.0), 2).unwrap();
        assert_eq!(s.max_abs_diff(&sm), 0.0);
    }

    #[test]
    fn jump_at_field_start_points() {
        let c = cfg(0.8);
        let sm = pauli(PauliKind::Minus, 0, 1).unwrap();
        let right = jump_op_right(0, &CouplingPoint::new(0.0, 1.0), &c, 1).unwrap();
        assert!(right.max_abs_diff(&sm) < 1e-15);
        let left = jump_op_left(0, &CouplingPoint::new(c.length, 1.0), &c, 1).unwrap();
        assert!(left.max_abs_diff(&sm) < 1e-15);
    }

    #[test]
    fn jump_right_generic_coefficients() {
        let s = jump_op_right(0, &CouplingPoint::new(PI, 1.0), &cfg(0.8), 1).unwrap();
        let x = 0.4 * PI;
        assert_abs_diff_eq!(s.get(1, 0).re, x.cosh(), epsilon = 1e-14);
        assert_abs_diff_eq!(s.get(1, 0).re, 1.8991, epsilon = 1e-4);
        let expected = -I * x.sinh() * C64::from_polar(1.0, 2.0 * PI);
        assert!((s.get(0, 1) - expected).norm() < 1e-13);
        assert_abs_diff_eq!(s.get(1, 0).norm_sqr() - s.get(0, 1).norm_sqr(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn jump_left_generic_coefficients() {
        let c = cfg(0.8).with_pump_phases(0.0, PI / 2.0);
        let s = jump_op_left(0, &CouplingPoint::new(PI, 1.0), &c, 1).unwrap();
        let x = 1.2 * PI;
        assert_abs_diff_eq!(s.get(1, 0).re, x.cosh(), epsilon = 1e-12);
        let expected = -I * C64::from_polar(x.sinh(), PI / 2.0 - 2.0 * PI);
        assert!((s.get(0, 1) - expected).norm() < 1e-11);
    }

    #[test]
    fn jump_outside_waveguide_rejected() {
        let c = cfg(0.8);
        assert!(jump_op_right(0, &CouplingPoint::new(-0.1, 1.0), &c, 1).is_err());
        assert!(jump_op_left(0, &CouplingPoint::new(20.0, 1.0), &c, 1).is_err());
    }

    #[test]
    fn phase_triplets_compose_additively() {
        let t = series_product(&phase_triplet(0.3, 2), &phase_triplet(1.1, 2)).unwrap();
        assert!((t.scalar_scattering() - C64::from_polar(1.0, 1.4)).norm() < 1e-15);
        assert_eq!(t.jump().max_abs(), 0.0);
        assert_eq!(t.hamiltonian.max_abs(), 0.0);
        assert_eq!(phase_triplet(0.0, 2), SlhTriplet::identity(2));
        assert!((phase_triplet(PI, 2).scalar_scattering() + ONE).norm() < 1e-15);
        let phi1 = 0.2 * PI;
        let s = phase_triplet(phi1, 2).scalar_scattering()
            * phase_triplet(PI - phi1, 2).scalar_scattering();
        assert!((s + ONE).norm() < 1e-15);
    }

    #[test]
    fn identity_is_neutral() {
        let l = pauli(PauliKind::Minus, 0, 2).unwrap().scale(C64::new(0.3, 0.1));
        let h = pauli(PauliKind::Z, 1, 2).unwrap();
        let g = SlhTriplet::new(C64::from_polar(1.0, 0.4), l, h).unwrap();
        let left = series_product(&SlhTriplet::identity(4), &g).unwrap();
        let right = series_product(&g, &SlhTriplet::identity(4)).unwrap();
        for t in [left, right] {
            assert!((t.scalar_scattering() - g.scalar_scattering()).norm() < 1e-15);
            assert!(t.jump().max_abs_diff(g.jump()) < 1e-15);
            assert!(t.hamiltonian.max_abs_diff(&g.hamiltonian) < 1e-15);
        }
    }

    #[test]
    fn series_product_dimension_mismatch() {
        assert!(matches!(
            series_product(&phase_triplet(0.0, 2), &phase_triplet(0.0, 4)),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(concatenate(&phase_triplet(0.0, 2), &phase_triplet(0.0, 4)).is_err());
    }

    #[test]
    fn concatenation_stacks_channels() {
        let l = pauli(PauliKind::Minus, 0, 2).unwrap();
        let h = pauli(PauliKind::X, 1, 2).unwrap();
        let r = SlhTriplet::new(ONE, l, h).unwrap();
        let zero_left = SlhTriplet::identity(4);
        let t = concatenate(&r, &zero_left).unwrap();
        assert_eq!(t.channels(), 2);
        assert_eq!(t.jumps.len(), r.jumps.len() + zero_left.jumps.len());
        assert_eq!(t.jumps[0], r.jumps[0]);
        assert_eq!(t.jumps[1].max_abs(), 0.0);
        assert_eq!(t.hamiltonian, r.hamiltonian);
        assert!(t.hamiltonian.is_hermitian());
    }

    #[test]
    fn small_atom_without_gain() {
        let a = atom(&[(1.0, 0.7)]).with_detuning(1.5);
        let c = cfg(0.0);
        let right = cascade_right(&[a.clone()], &c, Ordering::Free).unwrap();
        let sm = pauli(PauliKind::Minus, 0, 1).unwrap();
        let rate = CouplingPoint::new(1.0, 0.7).gamma();
        assert!(right.jump().max_abs_diff(&sm.scale_re((rate / 2.0).sqrt())) < 1e-15);
        let hz = pauli(PauliKind::Z, 0, 1).unwrap().scale_re(0.75);
        assert!(right.hamiltonian.max_abs_diff(&hz) < 1e-15);
        let left = cascade_left(&[a], &c, Ordering::Free).unwrap();
        assert!(left.jump().max_abs_diff(&sm.scale_re((rate / 2.0).sqrt())) < 1e-15);
    }

    #[test]
    fn two_small_atoms_without_gain_exchange_as_sin() {
        // standard waveguide exchange: the sum of both directions gives
        // sqrt(gamma_a gamma_b)/2 sin(phi) on sigma_+^a sigma_-^b
        let c = cfg(0.0);
        for phi in [0.3, 1.0, 2.5] {
            let a = atom(&[(1.0, 0.5)]);
            let b = atom(&[(1.0 + phi, 0.8)]);
            let t = cascade_total(&[a, b], &c, Ordering::Free).unwrap();
            let w = (CouplingPoint::new(0.0, 0.5).gamma() * CouplingPoint::new(0.0, 0.8).gamma()).sqrt();
            // |e g> is index 1 (a excited), |g e> index 2
            let coeff = t.hamiltonian.get(1, 2);
            assert_abs_diff_eq!(coeff.re, 0.5 * w * phi.sin(), epsilon = 1e-14);
            assert_abs_diff_eq!(coeff.im, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn cascade_matches_closed_form_for_single_points() {
        let c = cfg(0.9).with_pump_phases(0.4, -1.1);
        let a = atom(&[(1.0, 0.5)]).with_detuning(0.3);
        let b = atom(&[(2.3, 0.8)]).with_detuning(-0.7);
        let right = cascade_right(&[a.clone(), b.clone()], &c, Ordering::Free).unwrap();
        let closed = closed_form_direction_hamiltonian(&a, &b, &c, Direction::Right).unwrap();
        assert!(right.hamiltonian.max_abs_diff(&closed) < 1e-13);
        let left = cascade_left(&[a.clone(), b.clone()], &c, Ordering::Free).unwrap();
        let closed = closed_form_direction_hamiltonian(&a, &b, &c, Direction::Left).unwrap();
        // the left-moving dressing cancels products of cosh(G(L-z)/2) ~ 1e2
        assert!(left.hamiltonian.max_abs_diff(&closed) < 1e-11);
    }

    #[test]
    fn cascaded_jump_equals_direct_sum() {
        let c = cfg(0.8).with_pump_phases(0.3, 1.2);
        let a = atom(&[(0.5, 0.4), (0.5 + PI, 1.3), (0.5 + 2.0 * PI, 0.4)]);
        let b = atom(&[(1.1, 0.6), (1.1 + PI, 0.9), (1.1 + 2.0 * PI, 0.2)]);
        let atoms = [a, b];
        let r = cascade_right(&atoms, &c, Ordering::Braided).unwrap();
        let direct = direct_jump_sum(&atoms, &c, Direction::Right).unwrap();
        assert!(r.jump().max_abs_diff(&direct) < 1e-12);
        let l = cascade_left(&atoms, &c, Ordering::Braided).unwrap();
        let direct = direct_jump_sum(&atoms, &c, Direction::Left).unwrap();
        assert!(l.jump().max_abs_diff(&direct) < 1e-12);
        // S_R = e^{i[M phi1 + (M-1) phi2]}
        let (phi1, phi2) = (0.6, PI - 0.6);
        let expected = C64::from_polar(1.0, 3.0 * phi1 + 2.0 * phi2);
        assert!((r.scalar_scattering() - expected).norm() < 1e-12);
        assert!((l.scalar_scattering() - expected).norm() < 1e-12);
    }

    #[test]
    fn braided_order_is_enforced() {
        let c = cfg(0.5);
        let a = atom(&[(0.5, 1.0), (0.5 + PI, 1.0)]);
        let b = atom(&[(4.0, 1.0), (5.0, 1.0)]);
        let r = cascade_right(&[a.clone(), b.clone()], &c, Ordering::Braided);
        assert!(matches!(r, Err(Error::Geometry(_))));
        assert!(cascade_right(&[a, b], &c, Ordering::Free).is_ok());
    }

    #[test]
    fn no_pairing_without_gain() {
        let c = cfg(0.0).with_pump_phases(0.7, 0.2);
        let a = atom(&[(0.5, 0.4), (0.5 + PI, 1.3), (0.5 + 2.0 * PI, 0.4)]);
        let b = atom(&[(1.1, 0.6), (1.1 + PI, 0.9), (1.1 + 2.0 * PI, 0.2)]);
        let t = cascade_total(&[a, b], &c, Ordering::Braided).unwrap();
        // <ee|H|gg> is the sigma_+ sigma_+ coefficient
        assert!(t.hamiltonian.get(0, 3).norm() < 1e-14);
    }

    #[test]
    fn mirror_geometry_balances_directions() {
        let c = cfg(0.7).with_pump_phases(0.4, 0.4);
        let len = c.length;
        let a = atom(&[(2.0, 0.5), (2.0 + PI, 1.0), (2.0 + 2.0 * PI, 0.5)]);
        // mirror image of a about L/2, as the second atom
        let b = atom(&[
            (len - 2.0 - 2.0 * PI, 0.5),
            (len - 2.0 - PI, 1.0),
            (len - 2.0, 0.5),
        ]);
        let atoms = [a, b];
        let r = cascade_right(&atoms, &c, Ordering::Free).unwrap();
        let l = cascade_left(&atoms, &c, Ordering::Free).unwrap();
        assert_abs_diff_eq!(r.hamiltonian.op_norm(), l.hamiltonian.op_norm(), epsilon = 1e-10);
    }

    #[test]
    fn gauge_rotates_pairing_only() {
        let x = pauli(PauliKind::Plus, 0, 2).unwrap();
        let y = pauli(PauliKind::Plus, 1, 2).unwrap();
        let ym = pauli(PauliKind::Minus, 1, 2).unwrap();
        let pairing = &x * &y;
        let exchange = &x * &ym;
        let g = gauge_transform(&pairing, 1.2);
        assert!(g.max_abs_diff(&pairing.scale(C64::from_polar(1.0, -0.6))) < 1e-15);
        assert!(gauge_transform(&exchange, 1.2).max_abs_diff(&exchange) < 1e-15);
    }
}
