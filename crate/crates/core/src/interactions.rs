//! Effective exchange and pairing between two giant atoms, and the sweeps
//! over gain, pump phase difference and atomic spacing.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::dfree::{build_braided_pair, df_ratios_m3, G_REF};
use crate::error::{Error, Result};
use crate::quantum_ops::{pauli, Operator, PauliKind};
use crate::scan::{bracketed_roots, ScanResult};
use crate::slh::{sign, GiantAtom};
use crate::waveguide::WaveguideConfig;

/// Tolerance on spacing roots.
pub const ROOT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectivePair {
    pub jc: f64,
    /// Real once the common pump phase is gauged away.
    pub jp: f64,
    pub delta_a: f64,
    pub delta_b: f64,
    pub theta_minus: f64,
    pub gain: f64,
}

impl EffectivePair {
    pub fn from_atoms(a: &GiantAtom, b: &GiantAtom, cfg: &WaveguideConfig) -> Self {
        Self {
            jc: compute_jc(a, b, cfg),
            jp: compute_jp(a, b, cfg),
            delta_a: a.detuning,
            delta_b: b.detuning,
            theta_minus: cfg.theta_minus(),
            gain: cfg.gain,
        }
    }
}

fn pair_weight(ga: f64, gb: f64) -> f64 {
    (PI * ga * gb / 2.0).sqrt()
}

pub fn compute_jc(a: &GiantAtom, b: &GiantAtom, cfg: &WaveguideConfig) -> f64 {
    let mut jc = 0.0;
    for pa in a.points() {
        for pb in b.points() {
            let dz = pb.z - pa.z;
            jc += pair_weight(pa.g, pb.g) * dz.abs().sin() * (0.5 * cfg.gain * dz).cosh();
        }
    }
    jc
}

pub fn compute_jp(a: &GiantAtom, b: &GiantAtom, cfg: &WaveguideConfig) -> f64 {
    let half_tm = 0.5 * cfg.theta_minus();
    let mut jp = 0.0;
    for pa in a.points() {
        for pb in b.points() {
            let dz = pb.z - pa.z;
            jp += pair_weight(pa.g, pb.g)
                * sign(dz)
                * (half_tm + pa.z + pb.z).cos()
                * (0.5 * cfg.gain * dz).sinh();
        }
    }
    jp
}

/// Two-atom Hamiltonian with atom `a` on site 0.
pub fn effective_hamiltonian(pair: &EffectivePair) -> Operator {
    let op = |k, s| pauli(k, s, 2).expect("two sites");
    let za = op(PauliKind::Z, 0).scale_re(0.5 * pair.delta_a);
    let zb = op(PauliKind::Z, 1).scale_re(0.5 * pair.delta_b);
    let sp_a = op(PauliKind::Plus, 0);
    let sp_b = op(PauliKind::Plus, 1);
    let sm_b = op(PauliKind::Minus, 1);
    let coupling = &(&sp_a * &sp_b).scale_re(pair.jp) + &(&sp_a * &sm_b).scale_re(pair.jc);
    &(&za + &zb) + &(&coupling + &coupling.adjoint())
}

/// Where a braided pair sits along the waveguide.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Placement {
    /// First point of atom `a` at this position.
    Base(f64),
    /// Pair centred on the middle of the waveguide.
    Centered,
}

impl Default for Placement {
    fn default() -> Self {
        Placement::Base(0.0)
    }
}

/// Geometry and pump settings shared by the scans.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairSetup {
    pub placement: Placement,
    pub theta_plus: f64,
    pub length: f64,
}

impl Default for PairSetup {
    fn default() -> Self {
        Self {
            placement: Placement::default(),
            theta_plus: 0.0,
            length: 4.0 * PI,
        }
    }
}

impl PairSetup {
    /// Base position of atom `a` for a pair of total span `span`.
    pub fn base(&self, span: f64) -> Result<f64> {
        let base = match self.placement {
            Placement::Base(b) => b,
            Placement::Centered => 0.5 * (self.length - span),
        };
        if base < 0.0 || base + span > self.length {
            return Err(Error::Geometry(format!(
                "pair spanning [{base}, {}] does not fit in [0, {}]",
                base + span,
                self.length
            )));
        }
        Ok(base)
    }

    pub fn config(&self, gain: f64, theta_minus: f64) -> Result<WaveguideConfig> {
        let cfg = WaveguideConfig::new(gain, self.length)?
            .with_phase_sum_diff(self.theta_plus, theta_minus);
        cfg.validate()?;
        Ok(cfg)
    }

    /// Braided pair for `0 < d_s < pi`.
    pub fn braided_pair(&self, d_s: f64, gain: f64) -> Result<(GiantAtom, GiantAtom)> {
        build_braided_pair(d_s, gain, self.base(2.0 * PI + d_s)?)
    }

    /// Pair with the second atom shifted by `d_s`. Spacings at or beyond
    /// pi give separate atoms; beyond 2pi they no longer overlap. At
    /// multiples of pi some points coincide, which the closed forms handle
    /// but the cascade does not.
    pub fn shifted_pair(&self, d_s: f64, gain: f64) -> Result<(GiantAtom, GiantAtom)> {
        if d_s > 0.0 && d_s < PI {
            return self.braided_pair(d_s, gain);
        }
        if !(d_s > 0.0) {
            return Err(Error::out_of_range("d_s", d_s, "(0, inf)"));
        }
        let profile = df_ratios_m3(gain, PI)?;
        let base = self.base(2.0 * PI + d_s)?;
        Ok((
            profile.atom(base, G_REF, 0.0)?,
            profile.atom(base + d_s, G_REF, 0.0)?,
        ))
    }

    pub fn pair(&self, d_s: f64, gain: f64, theta_minus: f64) -> Result<EffectivePair> {
        let (a, b) = self.shifted_pair(d_s, gain)?;
        let cfg = self.config(gain, theta_minus)?;
        Ok(EffectivePair::from_atoms(&a, &b, &cfg))
    }
}

fn run_rows<F>(xs: &[f64], row: F, header: &[&str]) -> Result<ScanResult>
where
    F: Fn(f64) -> Result<Vec<f64>> + Sync,
{
    let rows = xs.par_iter().map(|&x| row(x)).collect::<Result<Vec<_>>>()?;
    let mut out = ScanResult::new(header);
    for r in rows {
        out.push(r)?;
    }
    Ok(out)
}

/// Columns `gain,jc,jp`.
pub fn scan_vs_gain(
    d_s: f64,
    theta_minus: f64,
    gains: &[f64],
    setup: &PairSetup,
) -> Result<ScanResult> {
    let out = run_rows(
        gains,
        |g| {
            let p = setup.pair(d_s, g, theta_minus)?;
            Ok(vec![g, p.jc, p.jp])
        },
        &["gain", "jc", "jp"],
    )?;
    Ok(out.with_meta("d_s", d_s).with_meta("theta_minus", theta_minus))
}

/// Columns `theta_minus,jc,jp`.
pub fn scan_vs_theta(
    d_s: f64,
    gain: f64,
    thetas: &[f64],
    setup: &PairSetup,
) -> Result<ScanResult> {
    let (a, b) = setup.shifted_pair(d_s, gain)?;
    let out = run_rows(
        thetas,
        |t| {
            let cfg = setup.config(gain, t)?;
            Ok(vec![t, compute_jc(&a, &b, &cfg), compute_jp(&a, &b, &cfg)])
        },
        &["theta_minus", "jc", "jp"],
    )?;
    Ok(out.with_meta("d_s", d_s).with_meta("gain", gain))
}

/// Spacing sweep with the ratio column and the located sign changes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparationScan {
    /// Columns `d_s,jc,jp,jp_over_jc`; the ratio is NaN where `jc == 0`.
    pub table: ScanResult,
    pub jp_roots: Vec<f64>,
    pub jc_roots: Vec<f64>,
}

pub fn scan_vs_separation(
    gain: f64,
    theta_minus: f64,
    spacings: &[f64],
    setup: &PairSetup,
) -> Result<SeparationScan> {
    let table = run_rows(
        spacings,
        |d| {
            let p = setup.pair(d, gain, theta_minus)?;
            let ratio = if p.jc == 0.0 { f64::NAN } else { p.jp / p.jc };
            Ok(vec![d, p.jc, p.jp, ratio])
        },
        &["d_s", "jc", "jp", "jp_over_jc"],
    )?;
    // roots are only sought within stretches where the geometry is smooth
    let mut jp_roots = Vec::new();
    let mut jc_roots = Vec::new();
    for segment in smooth_segments(spacings) {
        let eval = |d: f64| setup.pair(d, gain, theta_minus);
        jp_roots.extend(bracketed_roots(
            &segment,
            |d| eval(d).map(|p| p.jp).unwrap_or(f64::NAN),
            ROOT_TOL,
        ));
        jc_roots.extend(bracketed_roots(
            &segment,
            |d| eval(d).map(|p| p.jc).unwrap_or(f64::NAN),
            ROOT_TOL,
        ));
    }
    // Jc touches zero without changing sign where every separation is a
    // multiple of pi
    if let (Some(lo), Some(hi)) = (
        spacings.iter().copied().reduce(f64::min),
        spacings.iter().copied().reduce(f64::max),
    ) {
        let mut k = (lo / PI).ceil().max(1.0);
        while k * PI <= hi {
            let d = k * PI;
            let p = setup.pair(d, gain, theta_minus)?;
            if p.jc.abs() <= ROOT_TOL && !jc_roots.iter().any(|r| (r - d).abs() < 1e-8) {
                jc_roots.push(d);
            }
            k += 1.0;
        }
        jc_roots.sort_by(f64::total_cmp);
    }
    let table = table
        .with_meta("gain", gain)
        .with_meta("theta_minus", theta_minus)
        .with_meta("jp_roots", join(&jp_roots))
        .with_meta("jc_roots", join(&jc_roots));
    Ok(SeparationScan {
        table,
        jp_roots,
        jc_roots,
    })
}

/// Splits a spacing grid wherever it crosses a multiple of pi, since the
/// point ordering (and the coupling profile's meaning) changes there.
fn smooth_segments(spacings: &[f64]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    let mut current: Vec<f64> = Vec::new();
    let mut last_cell = None;
    for &d in spacings {
        let cell = (d / PI).floor() as i64;
        if last_cell.is_some_and(|c| c != cell) && !current.is_empty() {
            out.push(std::mem::take(&mut current));
        }
        last_cell = Some(cell);
        current.push(d);
    }
    if !current.is_empty() {
        out.push(current);
    }
    out
}

fn join(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|&x| crate::scan::fmt_sig(x)).collect();
    format!("[{}]", parts.join(" "))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scan::linspace;
    use crate::slh::{cascade_left, cascade_right, gauge_transform, CouplingPoint, Ordering};
    use approx::assert_abs_diff_eq;

    fn single(z: f64) -> GiantAtom {
        GiantAtom::new(0.0, vec![CouplingPoint::new(z, G_REF)]).unwrap()
    }

    fn cfg(g: f64, tm: f64) -> WaveguideConfig {
        PairSetup::default().config(g, tm).unwrap()
    }

    #[test]
    fn single_points_separated_by_pi_do_not_exchange() {
        let c = cfg(0.8, 0.0);
        assert_abs_diff_eq!(compute_jc(&single(0.5), &single(0.5 + PI), &c), 0.0, epsilon = 1e-15);
        assert_eq!(compute_jc(&single(0.5), &single(0.5), &c), 0.0);
    }

    #[test]
    fn no_pairing_without_gain() {
        let (a, b) = build_braided_pair(0.2 * PI, 0.0, 0.3).unwrap();
        assert_eq!(compute_jp(&a, &b, &cfg(0.0, 0.7)), 0.0);
        assert!(compute_jc(&a, &b, &cfg(0.0, 0.7)).abs() > 0.1);
    }

    #[test]
    fn pairing_has_period_four_pi_in_theta_minus() {
        let (a, b) = build_braided_pair(0.2 * PI, 0.8, 0.0).unwrap();
        for t in [0.0, 0.4, 2.0] {
            let x = compute_jp(&a, &b, &cfg(0.8, t));
            let y = compute_jp(&a, &b, &cfg(0.8, t + 4.0 * PI));
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn hamiltonian_without_coupling_is_diagonal() {
        let p = EffectivePair { jc: 0.0, jp: 0.0, delta_a: 1.0, delta_b: 0.4, theta_minus: 0.0, gain: 0.0 };
        let h = effective_hamiltonian(&p);
        let expected = [0.7, 0.3, -0.3, -0.7];
        for r in 0..4 {
            for c in 0..4 {
                let want = if r == c { expected[r] } else { 0.0 };
                assert_abs_diff_eq!(h.get(r, c).re, want, epsilon = 1e-15);
                assert_abs_diff_eq!(h.get(r, c).im, 0.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn exchange_splits_single_excitation_doublet() {
        let p = EffectivePair { jc: 0.37, jp: 0.0, delta_a: 1.0, delta_b: 1.0, theta_minus: 0.0, gain: 0.0 };
        let ev = effective_hamiltonian(&p).eigenvalues().unwrap();
        // single-excitation levels sit at 0 +- Jc
        assert_abs_diff_eq!(ev[2] - ev[1], 2.0 * 0.37, epsilon = 1e-12);
    }

    fn cascade_check(d_s: f64, g: f64, tp: f64, tm: f64, base: f64) -> f64 {
        let setup = PairSetup { placement: Placement::Base(base), theta_plus: tp, length: 4.0 * PI };
        let (a, b) = setup.braided_pair(d_s, g).unwrap();
        let cfg = setup.config(g, tm).unwrap();
        let atoms = [a.clone(), b.clone()];
        let hr = cascade_right(&atoms, &cfg, Ordering::Braided).unwrap().hamiltonian;
        let hl = cascade_left(&atoms, &cfg, Ordering::Braided).unwrap().hamiltonian;
        let h = gauge_transform(&(&hr + &hl), cfg.theta_plus());
        let closed = effective_hamiltonian(&EffectivePair::from_atoms(&a, &b, &cfg));
        // entries reach O(10) at large gain, so compare relative to the largest
        h.max_abs_diff(&closed) / closed.max_abs().max(1.0)
    }

    #[test]
    fn closed_form_matches_cascade_at_fig_setting() {
        assert!(cascade_check(0.2 * PI, 0.8, 0.0, 0.0, 0.0) < 1e-10);
    }

    #[test]
    fn closed_form_matches_cascade_with_pump_phases() {
        assert!(cascade_check(0.37 * PI, 1.3, 0.9, -1.7, 0.4) < 1e-10);
    }

    #[test]
    fn gain_scan_grows() {
        let s = scan_vs_gain(0.2 * PI, 0.0, &linspace(0.0, 2.0, 21), &PairSetup::default()).unwrap();
        let jc = s.column("jc").unwrap();
        let jp = s.column("jp").unwrap();
        assert_eq!(jp[0], 0.0);
        assert!(jc[20].abs() > jc[0].abs());
        assert!(jp[20].abs() > jp[1].abs());
    }

    #[test]
    fn theta_scan_leaves_exchange_alone() {
        let s = scan_vs_theta(0.2 * PI, 0.8, &linspace(0.0, 4.0 * PI, 81), &PairSetup::default()).unwrap();
        let jc = s.column("jc").unwrap();
        let jp = s.column("jp").unwrap();
        assert!(jc.iter().all(|&x| (x - jc[0]).abs() < 1e-12));
        assert_abs_diff_eq!(jp[0], jp[80], epsilon = 1e-12);
    }

    #[test]
    fn disjoint_atoms_are_silent() {
        let setup = PairSetup { length: 6.0 * PI, ..PairSetup::default() };
        for d in [2.0 * PI + 0.1, 2.5 * PI, 3.7 * PI] {
            let p = setup.pair(d, 1.2, 0.3).unwrap();
            assert!(p.jc.abs() < 1e-10 && p.jp.abs() < 1e-10, "{d}: {p:?}");
        }
    }

    #[test]
    fn spacing_scan_markers() {
        let grid = linspace(0.01, PI, 200);
        let s = scan_vs_separation(0.8, 0.0, &grid, &PairSetup::default()).unwrap();
        assert!(s.jp_roots.iter().any(|&r| r > 0.0 && r < PI));
        assert_eq!(s.jc_roots.len(), 1);
        assert_abs_diff_eq!(s.jc_roots[0], PI, epsilon = 1e-12);
        for &r in &s.jp_roots {
            let p = PairSetup::default().pair(r, 0.8, 0.0).unwrap();
            assert!(p.jp.abs() < 1e-8, "{r}: {}", p.jp);
        }
        let ratio = s.table.column("jp_over_jc").unwrap();
        assert!(ratio[..199].iter().all(|x| x.is_finite()));
    }

    #[test]
    fn chain_couples_nearest_neighbours_only() {
        let atoms = crate::dfree::build_braided_chain(4, 0.2 * PI, 0.8).unwrap();
        let c = WaveguideConfig::new(0.8, 20.0 * PI).unwrap();
        for i in 0..4 {
            for j in i + 1..4 {
                let p = EffectivePair::from_atoms(&atoms[i], &atoms[j], &c);
                if j == i + 1 {
                    assert!(p.jc.abs() > 0.1, "{i}{j}: {p:?}");
                } else {
                    assert!(p.jc.abs() < 1e-10 && p.jp.abs() < 1e-10, "{i}{j}: {p:?}");
                }
            }
        }
    }

    #[test]
    fn centered_pair_fits_inside_guide() {
        let setup = PairSetup { placement: Placement::Centered, ..PairSetup::default() };
        let (a, b) = setup.braided_pair(0.2 * PI, 0.8).unwrap();
        assert_abs_diff_eq!(a.first_z() + b.last_z(), 4.0 * PI, epsilon = 1e-12);
    }

    #[test]
    fn segments_split_at_multiples_of_pi() {
        let s = smooth_segments(&[0.5, 1.0, 3.0, 3.5, 6.0, 7.0]);
        assert_eq!(s, vec![vec![0.5, 1.0, 3.0], vec![3.5, 6.0], vec![7.0]]);
    }
}
