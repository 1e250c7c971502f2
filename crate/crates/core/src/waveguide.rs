//! Field propagation in the chi(2) parametric waveguide.
//!
//! Positions are measured in phase units (k0 = 1, group velocity 1), so
//! a coupling-point spacing of pi is half a wavelength.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum_ops::{C64, I};

/// Default RK4 step in phase units.
pub const DEFAULT_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveguideConfig {
    /// Parametric gain per unit length.
    pub gain: f64,
    pub pump_phase_right: f64,
    pub pump_phase_left: f64,
    pub length: f64,
    pub loss1: f64,
    pub loss2: f64,
    /// Phase mismatch k1 + k2 - 2 k0.
    pub delta_k: f64,
}

impl WaveguideConfig {
    /// Lossless, phase-matched waveguide with zero pump phases.
    pub fn new(gain: f64, length: f64) -> Result<Self> {
        let cfg = Self {
            gain,
            pump_phase_right: 0.0,
            pump_phase_left: 0.0,
            length,
            loss1: 0.0,
            loss2: 0.0,
            delta_k: 0.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_pump_phases(mut self, right: f64, left: f64) -> Self {
        self.pump_phase_right = right;
        self.pump_phase_left = left;
        self
    }

    /// Sets the pump phases from theta_+ and theta_-.
    pub fn with_phase_sum_diff(self, theta_plus: f64, theta_minus: f64) -> Self {
        self.with_pump_phases(
            0.5 * (theta_plus + theta_minus),
            0.5 * (theta_plus - theta_minus),
        )
    }

    pub fn with_loss(mut self, loss1: f64, loss2: f64) -> Self {
        self.loss1 = loss1;
        self.loss2 = loss2;
        self
    }

    pub fn with_delta_k(mut self, delta_k: f64) -> Self {
        self.delta_k = delta_k;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0) {
            return Err(Error::out_of_range("length", self.length, "(0, inf)"));
        }
        if !(self.gain >= 0.0) {
            return Err(Error::out_of_range("gain", self.gain, "[0, inf)"));
        }
        if !(self.loss1 >= 0.0 && self.loss2 >= 0.0) {
            return Err(Error::out_of_range(
                "loss",
                self.loss1.min(self.loss2),
                "[0, inf)",
            ));
        }
        Ok(())
    }

    pub fn theta_plus(&self) -> f64 {
        self.pump_phase_right + self.pump_phase_left
    }

    pub fn theta_minus(&self) -> f64 {
        self.pump_phase_right - self.pump_phase_left
    }

    pub(crate) fn check_position(&self, z: f64) -> Result<()> {
        if z < 0.0 || z > self.length {
            return Err(Error::out_of_range("z", z, "[0, L]"));
        }
        Ok(())
    }
}

/// Amplitudes of mode k1 and of the conjugated mode k2 at position `z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeAmplitudes {
    pub a1: C64,
    pub a2_conj: C64,
    pub z: f64,
}

impl ModeAmplitudes {
    pub fn new(a1: C64, a2_conj: C64) -> Self {
        Self { a1, a2_conj, z: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Right,
    Left,
}

/// Bogoliubov dressing `cosh(G d/2)` and `-i e^{i theta} sinh(G d/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeCoeffs {
    pub c: f64,
    pub s: C64,
    pub d: f64,
}

impl SqueezeCoeffs {
    pub fn from_distance(gain: f64, theta: f64, d: f64) -> Self {
        let x = 0.5 * gain * d;
        Self {
            c: x.cosh(),
            s: -I * C64::from_polar(x.sinh(), theta),
            d,
        }
    }

    /// `c^2 - |s|^2`, identically one.
    pub fn bogoliubov_norm(&self) -> f64 {
        self.c * self.c - self.s.norm_sqr()
    }
}

pub fn squeeze_coeffs(cfg: &WaveguideConfig, z: f64, direction: Direction) -> Result<SqueezeCoeffs> {
    cfg.check_position(z)?;
    let (d, theta) = match direction {
        Direction::Right => (z, cfg.pump_phase_right),
        Direction::Left => (cfg.length - z, cfg.pump_phase_left),
    };
    Ok(SqueezeCoeffs::from_distance(cfg.gain, theta, d))
}

/// `(cosh(b z), sinh(b z)/b)` for real `b^2`, continued to `cos`/`sin`
/// when `b^2 < 0`.
fn hyperbolic_pair(b_sq: f64, z: f64) -> (f64, f64) {
    if b_sq > 0.0 {
        let b = b_sq.sqrt();
        ((b * z).cosh(), (b * z).sinh() / b)
    } else if b_sq < 0.0 {
        let b = (-b_sq).sqrt();
        ((b * z).cos(), (b * z).sin() / b)
    } else {
        (1.0, z)
    }
}

/// Closed-form lossless solution of the coupled-wave equations.
///
/// The pump phase of the right-moving pump enters as the phase of the gain.
pub fn propagate_analytic(
    cfg: &WaveguideConfig,
    init: &ModeAmplitudes,
    z: f64,
) -> Result<ModeAmplitudes> {
    if cfg.loss1 != 0.0 || cfg.loss2 != 0.0 {
        return Err(Error::out_of_range(
            "loss",
            cfg.loss1.max(cfg.loss2),
            "{0} for the closed-form solution",
        ));
    }
    let g = cfg.gain;
    let dk = cfg.delta_k;
    let dz = z - init.z;
    let (ch, sh_over_b) = hyperbolic_pair(0.25 * (g * g - dk * dk), dz);
    let pump = C64::from_polar(1.0, cfg.pump_phase_right);
    // rotating-frame amplitudes u = a1 e^{i dk z/2}, v = a2* e^{-i dk z/2}
    let u0 = init.a1 * C64::from_polar(1.0, 0.5 * dk * init.z);
    let v0 = init.a2_conj * C64::from_polar(1.0, -0.5 * dk * init.z);
    let u = u0 * (ch + I * (0.5 * dk * sh_over_b)) - I * (0.5 * g * sh_over_b) * pump * v0;
    let v = v0 * (ch - I * (0.5 * dk * sh_over_b)) + I * (0.5 * g * sh_over_b) * pump.conj() * u0;
    Ok(ModeAmplitudes {
        a1: u * C64::from_polar(1.0, -0.5 * dk * z),
        a2_conj: v * C64::from_polar(1.0, 0.5 * dk * z),
        z,
    })
}

fn coupled_wave_rhs(cfg: &WaveguideConfig, z: f64, a1: C64, a2c: C64) -> (C64, C64) {
    let pump = C64::from_polar(0.5 * cfg.gain, cfg.pump_phase_right);
    let mismatch = C64::from_polar(1.0, cfg.delta_k * z);
    let d1 = -0.5 * cfg.loss1 * a1 - I * pump * a2c * mismatch.conj();
    let d2 = -0.5 * cfg.loss2 * a2c + I * pump.conj() * a1 * mismatch;
    (d1, d2)
}

/// Fixed-step RK4 integration of the coupled-wave equations, including
/// loss and phase mismatch. The step is shrunk so the last step lands on
/// `z_end`.
pub fn integrate_coupled_wave(
    cfg: &WaveguideConfig,
    init: &ModeAmplitudes,
    z_end: f64,
    step: f64,
) -> Result<ModeAmplitudes> {
    if !(step > 0.0) {
        return Err(Error::out_of_range("step", step, "(0, inf)"));
    }
    if z_end < init.z {
        return Err(Error::out_of_range("z_end", z_end, "[z_start, inf)"));
    }
    let span = z_end - init.z;
    let n = (span / step).ceil().max(1.0) as usize;
    let h = span / n as f64;
    let (mut a1, mut a2) = (init.a1, init.a2_conj);
    let mut z = init.z;
    for _ in 0..n {
        let (k1a, k1b) = coupled_wave_rhs(cfg, z, a1, a2);
        let (k2a, k2b) = coupled_wave_rhs(cfg, z + 0.5 * h, a1 + 0.5 * h * k1a, a2 + 0.5 * h * k1b);
        let (k3a, k3b) = coupled_wave_rhs(cfg, z + 0.5 * h, a1 + 0.5 * h * k2a, a2 + 0.5 * h * k2b);
        let (k4a, k4b) = coupled_wave_rhs(cfg, z + h, a1 + h * k3a, a2 + h * k3b);
        a1 += h / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
        a2 += h / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
        z += h;
    }
    Ok(ModeAmplitudes {
        a1,
        a2_conj: a2,
        z: z_end,
    })
}

/// Transmon-waveguide coupling `(C_J^g / C_Sigma) sqrt(omega_k / C_W)`
/// in units with hbar = e = 1.
pub fn transmon_coupling(cjg_over_csigma: f64, omega_k: f64, c_w: f64) -> Result<f64> {
    if !(cjg_over_csigma >= 0.0) {
        return Err(Error::out_of_range("C_J^g/C_Sigma", cjg_over_csigma, "[0, inf)"));
    }
    if !(omega_k > 0.0) {
        return Err(Error::out_of_range("omega_k", omega_k, "(0, inf)"));
    }
    if !(c_w > 0.0) {
        return Err(Error::out_of_range("C_W", c_w, "(0, inf)"));
    }
    Ok(cjg_over_csigma * (omega_k / c_w).sqrt())
}

/// Coupled-mode coefficients of a Josephson traveling-wave amplifier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JtwpaParams {
    pub kappa_s: C64,
    pub kappa_i: C64,
    pub alpha_p: C64,
    pub alpha_s: C64,
    pub alpha_i: C64,
    pub delta_kl: f64,
}

impl JtwpaParams {
    /// The phase-modulation shifts must combine into a real total
    /// mismatch, otherwise the amplitudes do not obey a constant-coefficient
    /// linear system.
    pub fn new(
        kappa_s: C64,
        kappa_i: C64,
        alpha_p: C64,
        alpha_s: C64,
        alpha_i: C64,
        delta_kl: f64,
    ) -> Result<Self> {
        let p = Self {
            kappa_s,
            kappa_i,
            alpha_p,
            alpha_s,
            alpha_i,
            delta_kl,
        };
        let dk = p.total_mismatch_complex();
        if dk.im.abs() > 1e-12 * (1.0 + dk.re.abs()) {
            return Err(Error::out_of_range(
                "Im(total mismatch)",
                dk.im,
                "{0}",
            ));
        }
        Ok(p)
    }

    fn total_mismatch_complex(&self) -> C64 {
        self.delta_kl + 2.0 * self.alpha_p - self.alpha_s - self.alpha_i
    }

    /// `dk_L + 2 alpha_p - alpha_s - alpha_i`.
    pub fn total_mismatch(&self) -> f64 {
        self.total_mismatch_complex().re
    }

    /// `b^2 = kappa_s kappa_i^* - (dk/2)^2`.
    pub fn gain_sq(&self) -> C64 {
        let half = 0.5 * self.total_mismatch();
        self.kappa_s * self.kappa_i.conj() - half * half
    }

    pub fn gain_coefficient(&self) -> C64 {
        self.gain_sq().sqrt()
    }
}

/// Circuit-level inputs from which the JTWPA coefficients are computed.
/// All quantities are opaque numbers in normalized units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JtwpaCircuit {
    pub cell_length: f64,
    pub inductance: f64,
    pub k_p: f64,
    pub k_s: f64,
    pub k_i: f64,
    pub omega_p: f64,
    pub omega_s: f64,
    pub omega_i: f64,
    pub z2_p: C64,
    pub z2_s: C64,
    pub z2_i: C64,
    pub z_char: C64,
    pub pump_current_ratio: f64,
    pub delta_kl: f64,
}

impl JtwpaCircuit {
    pub fn params(&self) -> Result<JtwpaParams> {
        let a2 = self.cell_length * self.cell_length;
        let l = self.inductance;
        if !(l > 0.0) {
            return Err(Error::out_of_range("inductance", l, "(0, inf)"));
        }
        let kappa = a2 * self.k_p * self.k_p * self.z_char.norm_sqr()
            / (16.0 * l * l * self.omega_p * self.omega_p)
            * self.pump_current_ratio.powi(2);
        let alpha = |k: f64, z2: C64, omega: f64, scale: f64| {
            scale * kappa * k.powi(3) * a2 * I * z2 / (l * omega)
        };
        let ks_ki = self.k_s * self.k_i;
        let kappa_s = kappa * (2.0 * self.k_p - self.k_i) * ks_ki * I * self.z2_s * a2 / (l * self.omega_s);
        let kappa_i = kappa * (2.0 * self.k_p - self.k_s) * ks_ki * I * self.z2_i * a2 / (l * self.omega_i);
        JtwpaParams::new(
            kappa_s,
            kappa_i,
            alpha(self.k_p, self.z2_p, self.omega_p, 1.0),
            alpha(self.k_s, self.z2_s, self.omega_s, 2.0),
            alpha(self.k_i, self.z2_i, self.omega_i, 2.0),
            self.delta_kl,
        )
    }
}

fn complex_hyperbolic_pair(b: C64, x: f64) -> (C64, C64) {
    if b.norm() < 1e-300 {
        return (C64::new(1.0, 0.0), C64::new(x, 0.0));
    }
    ((b * x).cosh(), (b * x).sinh() / b)
}

/// Closed-form signal and idler amplitudes at position `x`.
///
/// The idler uses the conjugate gain coefficient; both coincide whenever
/// `kappa_s kappa_i^*` is real.
pub fn jtwpa_solution(p: &JtwpaParams, a_s0: C64, a_i0: C64, x: f64) -> (C64, C64) {
    let dk = p.total_mismatch();
    let b = p.gain_coefficient();
    let carrier = C64::from_polar(1.0, 0.5 * dk * x);
    let (ch_s, sh_s) = complex_hyperbolic_pair(b, x);
    let (ch_i, sh_i) = complex_hyperbolic_pair(b.conj(), x);
    let a_s = (a_s0 * (ch_s - I * (0.5 * dk) * sh_s) + I * p.kappa_s * a_i0.conj() * sh_s) * carrier;
    let a_i = (a_i0 * (ch_i - I * (0.5 * dk) * sh_i) + I * p.kappa_i * a_s0.conj() * sh_i) * carrier;
    (a_s, a_i)
}

/// Residuals of the signal/idler equations, `a' - i kappa a_other^* e^{i dk x}`.
pub fn jtwpa_ode_rhs(p: &JtwpaParams, a_s: C64, a_i: C64, x: f64) -> (C64, C64) {
    let phase = C64::from_polar(1.0, p.total_mismatch() * x);
    (
        I * p.kappa_s * a_i.conj() * phase,
        I * p.kappa_i * a_s.conj() * phase,
    )
}
