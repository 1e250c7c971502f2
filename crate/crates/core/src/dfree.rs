//! Decoherence-free coupling profiles.
//!
//! A giant atom whose points are spaced by pi stops emitting into both
//! directions when the alternating sums of `sqrt(g_i) cosh(G z_i/2)` and
//! `sqrt(g_i) sinh(G z_i/2)` both vanish. Two points can never satisfy
//! both; three points can, with the middle coupling enhanced by
//! `4 cosh^2(G d/2)`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quantum_ops::C64;
use crate::slh::{CouplingPoint, GiantAtom};

/// Reference coupling for which `sqrt(pi g / 2) = 1`.
pub const G_REF: f64 = 2.0 / PI;

/// Largest g-ratio searched when minimizing the two-point residual.
pub const M2_RATIO_MAX: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DfProfile {
    pub spacing: f64,
    /// `g_i / g_M`.
    pub ratios: Vec<f64>,
    pub gain: f64,
    pub residual_cosh: C64,
    pub residual_sinh: C64,
}

impl DfProfile {
    pub fn middle_ratio(&self) -> f64 {
        self.ratios[self.ratios.len() / 2]
    }

    /// A giant atom with this profile starting at `base`, with couplings
    /// `g_ref * ratio`.
    pub fn atom(&self, base: f64, g_ref: f64, detuning: f64) -> Result<GiantAtom> {
        let points = self
            .ratios
            .iter()
            .enumerate()
            .map(|(i, r)| CouplingPoint::new(base + i as f64 * self.spacing, g_ref * r))
            .collect();
        GiantAtom::new(detuning, points)
    }
}

/// Three-point profile `[1, 4 cosh^2(G d/2), 1]`.
pub fn df_ratios_m3(gain: f64, spacing: f64) -> Result<DfProfile> {
    if !(spacing > 0.0) {
        return Err(Error::out_of_range("d", spacing, "(0, inf)"));
    }
    if !(gain >= 0.0) {
        return Err(Error::out_of_range("G", gain, "[0, inf)"));
    }
    let c = (0.5 * gain * spacing).cosh();
    let ratios = vec![1.0, 4.0 * c * c, 1.0];
    let mut profile = DfProfile {
        spacing,
        ratios,
        gain,
        residual_cosh: C64::new(0.0, 0.0),
        residual_sinh: C64::new(0.0, 0.0),
    };
    let (rc, rs) = residual_check(&profile.atom(0.0, 1.0, 0.0)?, gain);
    profile.residual_cosh = rc;
    profile.residual_sinh = rs;
    Ok(profile)
}

/// `sum_i sqrt(g_i) e^{i (M-i) pi} cosh(G z_i / 2)` and its sinh analogue.
pub fn residual_check(atom: &GiantAtom, gain: f64) -> (C64, C64) {
    let m = atom.n_points();
    let mut rc = C64::new(0.0, 0.0);
    let mut rs = C64::new(0.0, 0.0);
    for (idx, p) in atom.points().iter().enumerate() {
        let i = idx + 1;
        let w = C64::from_polar(p.g.sqrt(), (m - i) as f64 * PI);
        let x = 0.5 * gain * p.z;
        rc += w * x.cosh();
        rs += w * x.sinh();
    }
    (rc, rs)
}

/// Residuals divided by the sum of term magnitudes, so atoms far along an
/// amplifying waveguide are judged on the same scale.
pub fn relative_residual(atom: &GiantAtom, gain: f64) -> f64 {
    let (rc, rs) = residual_check(atom, gain);
    let scale: f64 = atom
        .points()
        .iter()
        .map(|p| p.g.sqrt() * (0.5 * gain * p.z).cosh())
        .sum();
    rc.norm().max(rs.norm()) / scale.max(f64::MIN_POSITIVE)
}

fn check_m2(z1: f64, z2: f64, gain: f64) -> Result<()> {
    if z1 == z2 {
        return Err(Error::Degenerate("coincident coupling points".into()));
    }
    if gain == 0.0 {
        return Err(Error::Degenerate(
            "without gain the cosh and sinh conditions coincide".into(),
        ));
    }
    if !(gain > 0.0) {
        return Err(Error::out_of_range("G", gain, "(0, inf)"));
    }
    Ok(())
}

/// Gap between the g-ratios demanded by the cosh and sinh cancellation
/// conditions for two points. Strictly positive whenever `z1 != z2`;
/// infinite when a point sits at the right-moving field's origin.
pub fn prove_m2_infeasible(z1: f64, z2: f64, gain: f64) -> Result<f64> {
    check_m2(z1, z2, gain)?;
    let (c1, c2) = ((0.5 * gain * z1).cosh(), (0.5 * gain * z2).cosh());
    let (s1, s2) = ((0.5 * gain * z1).sinh(), (0.5 * gain * z2).sinh());
    if s1 == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(((c2 * c2) / (c1 * c1) - (s2 * s2) / (s1 * s1)).abs())
}

/// Worst of the two residuals for two points with `g(z2) = 1` and
/// `g(z1) = ratio`.
pub fn m2_residual(z1: f64, z2: f64, gain: f64, ratio: f64) -> f64 {
    let atom_like = |r: f64| {
        let s = r.sqrt();
        let (x1, x2) = (0.5 * gain * z1, 0.5 * gain * z2);
        ((-s * x1.cosh() + x2.cosh()).abs(), (-s * x1.sinh() + x2.sinh()).abs())
    };
    let (a, b) = atom_like(ratio);
    a.max(b)
}

/// Minimum of [`m2_residual`] over `ratio` in `(0, ratio_max]`.
///
/// The residual is convex in `sqrt(ratio)`, so a golden-section search on
/// that variable finds the global minimum.
pub fn m2_min_residual(z1: f64, z2: f64, gain: f64, ratio_max: f64) -> Result<(f64, f64)> {
    check_m2(z1, z2, gain)?;
    let f = |s: f64| m2_residual(z1, z2, gain, s * s);
    let s = golden_min(f, 0.0, ratio_max.sqrt(), 1e-14);
    Ok((s * s, f(s)))
}

pub(crate) fn golden_min<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> f64 {
    let inv_phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        if b - a <= f64::EPSILON * (a.abs() + b.abs()) {
            break;
        }
    }
    let mid = 0.5 * (a + b);
    [a, b, mid]
        .into_iter()
        .min_by(|x, y| f(*x).total_cmp(&f(*y)))
        .unwrap()
}

/// Two three-point atoms spaced by pi, the second shifted by `d_s`, so the
/// points interleave as a1 b1 a2 b2 a3 b3.
pub fn build_braided_pair(d_s: f64, gain: f64, base: f64) -> Result<(GiantAtom, GiantAtom)> {
    if !(d_s > 0.0 && d_s < PI) {
        return Err(Error::out_of_range("d_s", d_s, "(0, pi)"));
    }
    let profile = df_ratios_m3(gain, PI)?;
    Ok((
        profile.atom(base, G_REF, 0.0)?,
        profile.atom(base + d_s, G_REF, 0.0)?,
    ))
}

/// Offset between consecutive chain atoms. Neighbours overlap while
/// next-nearest neighbours are disjoint, and every gap between adjacent
/// points of a neighbouring pair alternates between `d_s` and `pi - d_s`.
pub fn chain_offset(d_s: f64) -> f64 {
    PI + d_s
}

/// `n` decoherence-free atoms, atom `k` starting at `k * (pi + d_s)`.
pub fn build_braided_chain(n: usize, d_s: f64, gain: f64) -> Result<Vec<GiantAtom>> {
    if n < 2 {
        return Err(Error::Geometry(format!("a chain needs at least two atoms, got {n}")));
    }
    if !(d_s > 0.0 && d_s < PI) {
        return Err(Error::out_of_range("d_s", d_s, "(0, pi)"));
    }
    let profile = df_ratios_m3(gain, PI)?;
    let offset = chain_offset(d_s);
    let atoms = (0..n)
        .map(|k| profile.atom(k as f64 * offset, G_REF, 0.0))
        .collect::<Result<Vec<_>>>()?;
    check_chain_geometry(&atoms)?;
    Ok(atoms)
}

/// Nearest neighbours must overlap, next-nearest (and further) must not.
pub fn check_chain_geometry(atoms: &[GiantAtom]) -> Result<()> {
    for (i, a) in atoms.iter().enumerate() {
        for (j, b) in atoms.iter().enumerate().skip(i + 1) {
            let overlap = b.first_z() < a.last_z() && a.first_z() < b.last_z();
            if j == i + 1 && !overlap {
                return Err(Error::Geometry(format!("atoms {i} and {j} do not overlap")));
            }
            if j > i + 1 && overlap {
                return Err(Error::Geometry(format!(
                    "atoms {i} and {j} overlap beyond nearest neighbours"
                )));
            }
        }
    }
    Ok(())
}
