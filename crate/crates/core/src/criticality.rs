//! Ground-state fidelity, fidelity susceptibility and the gap-based phase
//! diagram of the XY chain.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quantum_ops::LadderConvention;
use crate::scan::ScanResult;
use crate::spinchain::{gap_map, ground_sector, paired_momenta, Parity, SpinChainSpec, XyParams};

pub const DEFAULT_DELTA_H: f64 = 0.01;
pub const DEFAULT_GAP_THRESHOLD: f64 = 1e-3;

/// The coupling varied in a fidelity scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ScanParam {
    Delta,
    Jp,
}

impl ScanParam {
    pub fn name(self) -> &'static str {
        match self {
            ScanParam::Delta => "delta",
            ScanParam::Jp => "jp",
        }
    }

    fn set(self, p: XyParams, h: f64) -> XyParams {
        match self {
            ScanParam::Delta => XyParams { delta: h, ..p },
            ScanParam::Jp => XyParams { jp: h, ..p },
        }
    }

    fn set_spec(self, spec: &SpinChainSpec, h: f64) -> Result<SpinChainSpec> {
        let mut s = spec.clone();
        match self {
            ScanParam::Delta => s.delta = vec![h; s.n],
            ScanParam::Jp => s.jp = h,
        }
        s.params()?;
        Ok(s)
    }
}

fn check_dh(dh: f64) -> Result<()> {
    if !(dh >= 0.0 && dh.is_finite()) {
        return Err(Error::out_of_range("dh", dh, "[0, inf)"));
    }
    Ok(())
}

/// Overlap of the even-sector ground states at `h` and `h + dh`, as a
/// product over paired momenta of `|cos(theta_k - theta_k')|`.
pub fn ground_fidelity(spec: &SpinChainSpec, param: ScanParam, h: f64, dh: f64) -> Result<f64> {
    check_dh(dh)?;
    let p = spec.params()?;
    let (a, b) = (param.set(p, h), param.set(p, h + dh));
    Ok(paired_momenta(spec.n, Parity::Even)
        .iter()
        .map(|&k| (a.bogoliubov_angle_bdg(k) - b.bogoliubov_angle_bdg(k)).cos().abs())
        .product::<f64>()
        .min(1.0))
}

/// As [`ground_fidelity`], but first locates the true ground sector at both
/// ends and refuses to compare across sectors.
pub fn ground_fidelity_checked(
    spec: &SpinChainSpec,
    param: ScanParam,
    h: f64,
    dh: f64,
) -> Result<f64> {
    check_dh(dh)?;
    let at_h = ground_sector(&param.set_spec(spec, h)?, LadderConvention::Standard).0;
    let at_h_plus = ground_sector(&param.set_spec(spec, h + dh)?, LadderConvention::Standard).0;
    if at_h != at_h_plus {
        return Err(Error::SectorMismatch { at_h, at_h_plus });
    }
    if at_h == Parity::Odd {
        return Err(Error::Degenerate(
            "ground state lies in the odd sector, where the product formula does not apply".into(),
        ));
    }
    ground_fidelity(spec, param, h, dh)
}

/// `-2 ln F / dh^2`; infinite when the two ground states are orthogonal.
pub fn fidelity_susceptibility(
    spec: &SpinChainSpec,
    param: ScanParam,
    h: f64,
    dh: f64,
) -> Result<f64> {
    if !(dh > 0.0) {
        return Err(Error::out_of_range("dh", dh, "(0, inf)"));
    }
    let f = ground_fidelity(spec, param, h, dh)?;
    Ok(chi_from_fidelity(f, dh))
}

fn chi_from_fidelity(f: f64, dh: f64) -> f64 {
    if f <= 0.0 {
        f64::INFINITY
    } else {
        (-2.0 * f.ln() / (dh * dh)).max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FidelityScan {
    pub param: ScanParam,
    pub grid: Vec<f64>,
    pub delta_h: f64,
    pub fidelity: Vec<f64>,
    pub chi: Vec<f64>,
    pub peaks: Vec<f64>,
}

impl FidelityScan {
    pub fn to_table(&self) -> ScanResult {
        let mut t = ScanResult::new(&["h", "F", "chi_F"]);
        for i in 0..self.grid.len() {
            t.push(vec![self.grid[i], self.fidelity[i], self.chi[i]])
                .expect("three columns");
        }
        let peaks: Vec<String> = self.peaks.iter().map(|&x| crate::scan::fmt_sig(x)).collect();
        t.with_meta("param", self.param.name())
            .with_meta("delta_h", self.delta_h)
            .with_meta("peaks", format!("[{}]", peaks.join(" ")))
    }
}

pub fn fidelity_scan(
    spec: &SpinChainSpec,
    param: ScanParam,
    grid: &[f64],
    dh: f64,
) -> Result<FidelityScan> {
    if !(dh > 0.0) {
        return Err(Error::out_of_range("dh", dh, "(0, inf)"));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Geometry("scan grid must be strictly increasing".into()));
    }
    let fidelity = grid
        .par_iter()
        .map(|&h| ground_fidelity(spec, param, h, dh))
        .collect::<Result<Vec<_>>>()?;
    let chi: Vec<f64> = fidelity.iter().map(|&f| chi_from_fidelity(f, dh)).collect();
    let peaks = find_peaks(grid, &chi);
    Ok(FidelityScan {
        param,
        grid: grid.to_vec(),
        delta_h: dh,
        fidelity,
        chi,
        peaks,
    })
}

/// Strict interior local maxima, each moved to the vertex of the parabola
/// through it and its two neighbours.
pub fn find_peaks(grid: &[f64], values: &[f64]) -> Vec<f64> {
    let n = grid.len().min(values.len());
    let mut out = Vec::new();
    for i in 1..n.saturating_sub(1) {
        let (y0, y1, y2) = (values[i - 1], values[i], values[i + 1]);
        if !(y1 > y0 && y1 > y2) {
            continue;
        }
        let (x0, x1, x2) = (grid[i - 1], grid[i], grid[i + 1]);
        let d0 = (y1 - y0) / (x1 - x0);
        let d1 = (y2 - y1) / (x2 - x1);
        let curvature = (d1 - d0) / (x2 - x0);
        let x = if y1.is_finite() && curvature < 0.0 {
            (0.5 * (x0 + x1) - d0 / (2.0 * curvature)).clamp(x0, x2)
        } else {
            x1
        };
        out.push(x);
    }
    out
}

/// Phase labels: 0 on a gap-closing line, 1 for `Delta > 4|Jc|`, 2 for
/// `Delta < -4|Jc|`, 3 and 4 for the inner region with `Jp > 0` and
/// `Jp < 0`.
pub fn analytic_label(jc: f64, delta: f64, jp: f64) -> u8 {
    let edge = 4.0 * jc.abs();
    let tol = 1e-12 * edge.max(1.0);
    if (delta.abs() - edge).abs() <= tol {
        0
    } else if delta > edge {
        1
    } else if delta < -edge {
        2
    } else if jp > 0.0 {
        3
    } else if jp < 0.0 {
        4
    } else {
        0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseDiagram {
    pub delta_grid: Vec<f64>,
    pub jp_grid: Vec<f64>,
    /// `gap[i][j]` at `(delta_grid[i], jp_grid[j])`.
    pub gap: Vec<Vec<f64>>,
    pub phase_label: Vec<Vec<u8>>,
    /// Connected regions of `gap > threshold`.
    pub regions: usize,
    /// Every gapped region carries one label and every label one region,
    /// and no analytic boundary point is gapped.
    pub consistent: bool,
}

impl PhaseDiagram {
    pub fn to_table(&self) -> ScanResult {
        let mut t = ScanResult::new(&["delta", "jp", "gap", "label"]);
        for (i, &d) in self.delta_grid.iter().enumerate() {
            for (j, &jp) in self.jp_grid.iter().enumerate() {
                t.push(vec![d, jp, self.gap[i][j], self.phase_label[i][j] as f64])
                    .expect("four columns");
            }
        }
        t.with_meta("regions", self.regions)
            .with_meta("consistent", self.consistent)
    }
}

pub fn phase_diagram(
    jc: f64,
    deltas: &[f64],
    jps: &[f64],
    gap_threshold: f64,
) -> Result<PhaseDiagram> {
    if !(gap_threshold > 0.0) {
        return Err(Error::out_of_range("gap_threshold", gap_threshold, "(0, inf)"));
    }
    let gap = gap_map(jc, deltas, jps)?;
    let phase_label: Vec<Vec<u8>> = deltas
        .iter()
        .map(|&d| jps.iter().map(|&jp| analytic_label(jc, d, jp)).collect())
        .collect();
    let (components, regions) = connected_components(&gap, gap_threshold);

    let mut consistent = true;
    let mut label_of_region = vec![None; regions];
    let mut region_of_label = [None; 5];
    for i in 0..deltas.len() {
        for j in 0..jps.len() {
            let label = phase_label[i][j];
            match components[i][j] {
                None => {}
                Some(_) if label == 0 => consistent = false,
                Some(r) => {
                    if *label_of_region[r].get_or_insert(label) != label
                        || *region_of_label[label as usize].get_or_insert(r) != r
                    {
                        consistent = false;
                    }
                }
            }
        }
    }
    Ok(PhaseDiagram {
        delta_grid: deltas.to_vec(),
        jp_grid: jps.to_vec(),
        gap,
        phase_label,
        regions,
        consistent,
    })
}

/// Four-neighbour flood fill of the cells above `threshold`.
fn connected_components(gap: &[Vec<f64>], threshold: f64) -> (Vec<Vec<Option<usize>>>, usize) {
    let rows = gap.len();
    let cols = gap.first().map_or(0, |r| r.len());
    let mut comp = vec![vec![None; cols]; rows];
    let mut count = 0;
    for i0 in 0..rows {
        for j0 in 0..cols {
            if comp[i0][j0].is_some() || !(gap[i0][j0] > threshold) {
                continue;
            }
            let mut stack = vec![(i0, j0)];
            comp[i0][j0] = Some(count);
            while let Some((i, j)) = stack.pop() {
                let neighbours = [
                    (i.wrapping_sub(1), j),
                    (i + 1, j),
                    (i, j.wrapping_sub(1)),
                    (i, j + 1),
                ];
                for (a, b) in neighbours {
                    if a < rows && b < cols && comp[a][b].is_none() && gap[a][b] > threshold {
                        comp[a][b] = Some(count);
                        stack.push((a, b));
                    }
                }
            }
            count += 1;
        }
    }
    (comp, count)
}
