//! Two coupled spin-1 clusters under a swept field: the 9×9 model, its
//! three-level avoided-crossing reduction, one-phonon rates and the
//! population rate equations that produce hysteresis.
//!
//! Populations of the three levels `N ∈ {+, 0, −}` are carried as
//! `x = ρ₊₊ − ρ₋₋` and `ρ₀₀`; the trace fixes the rest.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin_ops::{c, cross_component, hermitian_eig, spin_one, Axis, OperatorMatrix, StateVector, VectorOperator};

/// Population excursion tolerated before a step is declared unstable.
pub const INSTABILITY_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RateParams {
    #[serde(rename = "A")]
    pub a: f64,
    pub inv_temp: f64,
    pub gamma: f64,
    pub delta_gap: f64,
}

impl Default for RateParams {
    fn default() -> Self {
        Self { a: 1.0, inv_temp: 1.0, gamma: 1.0, delta_gap: 0.1 }
    }
}

impl RateParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(Error::InvalidParameter(format!("A = {} must be positive", self.a)));
        }
        if !(self.inv_temp > 0.0 && self.inv_temp.is_finite()) {
            return Err(Error::InvalidParameter(format!("inv_temp = {} must be positive", self.inv_temp)));
        }
        if !(self.gamma.is_finite() && self.gamma != 0.0) {
            return Err(Error::InvalidParameter(format!("gamma = {} must be finite and nonzero", self.gamma)));
        }
        if !(self.delta_gap >= 0.0 && self.delta_gap.is_finite()) {
            return Err(Error::InvalidParameter(format!("delta_gap = {} must be nonnegative", self.delta_gap)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    /// `B₀ sin(ωt)`.
    Sinusoid,
    /// `B₀ + ω(t − t_start)`.
    LinearRamp,
    /// `B₀`.
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldProfile {
    pub kind: ProfileKind,
    pub amplitude: f64,
    pub angular_rate: f64,
    pub t_start: f64,
    pub t_end: f64,
}

impl Default for FieldProfile {
    fn default() -> Self {
        Self::sinusoid(10.0, 1.0, 0.0, 2.0 * PI)
    }
}

impl FieldProfile {
    pub fn sinusoid(amplitude: f64, angular_rate: f64, t_start: f64, t_end: f64) -> Self {
        Self { kind: ProfileKind::Sinusoid, amplitude, angular_rate, t_start, t_end }
    }

    pub fn linear_ramp(start: f64, rate: f64, t_start: f64, t_end: f64) -> Self {
        Self { kind: ProfileKind::LinearRamp, amplitude: start, angular_rate: rate, t_start, t_end }
    }

    pub fn constant(b: f64, t_start: f64, t_end: f64) -> Self {
        Self { kind: ProfileKind::Constant, amplitude: b, angular_rate: 0.0, t_start, t_end }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.amplitude, self.angular_rate, self.t_start, self.t_end].iter().all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("field profile has non-finite entries".into()));
        }
        if self.t_end <= self.t_start {
            return Err(Error::InvalidParameter(format!(
                "t_end = {} must exceed t_start = {}",
                self.t_end, self.t_start
            )));
        }
        Ok(())
    }

    pub fn field(&self, t: f64) -> f64 {
        match self.kind {
            ProfileKind::Sinusoid => self.amplitude * (self.angular_rate * t).sin(),
            ProfileKind::LinearRamp => self.amplitude + self.angular_rate * (t - self.t_start),
            ProfileKind::Constant => self.amplitude,
        }
    }
}

/// `ℋ = γB(S_Az + S_A'z) + Δ(S_A × S_A')_y` on the 3⊗3 space.
pub fn coupled_spin1_hamiltonian(b: f64, delta_gap: f64, gamma: f64) -> Result<OperatorMatrix> {
    let id = OperatorMatrix::identity(3);
    let left = |axis| spin_one(axis).kron(&id);
    let right = |axis| id.kron(&spin_one(axis));
    let sa = VectorOperator::new(left(Axis::X), left(Axis::Y), left(Axis::Z))?;
    let sb = VectorOperator::new(right(Axis::X), right(Axis::Y), right(Axis::Z))?;
    let zeeman = (&sa.z + &sb.z).scale(gamma * b);
    Ok(zeeman + cross_component(&sa, &sb, Axis::Y)?.scale(delta_gap))
}

/// Level labels of the 9×9 model in report order.
pub const COUPLED_LABELS: [&str; 9] = ["E2,0", "E1,0", "E0,0", "E2,+1", "E2,-1", "E2,+2", "E2,-2", "E1,+1", "E1,-1"];

/// Printed closed forms for the nine levels. `corrected_radical` selects
/// `30γ²B²Δ²` instead of `30γ²B²` under the inner square root. `None`
/// marks a negative radicand.
pub fn printed_coupled_levels(b: f64, delta_gap: f64, gamma: f64, corrected_radical: bool) -> [Option<f64>; 9] {
    let gb2 = (gamma * b).powi(2);
    let d2 = delta_gap * delta_gap;
    let e21 = (gb2 + d2).sqrt();
    let middle = if corrected_radical { 30.0 * gb2 * d2 } else { 30.0 * gb2 };
    let inner = (9.0 * gb2 * gb2 + middle + d2 * d2).sqrt();
    let outer = |sign: f64| {
        let r = 5.0 * gb2 + 3.0 * d2 + sign * inner;
        (r >= 0.0).then(|| (r / 2.0).sqrt())
    };
    let e22 = outer(1.0);
    let e11 = outer(-1.0);
    [Some(0.0), Some(0.0), Some(0.0), Some(e21), Some(-e21), e22, e22.map(|x| -x), e11, e11.map(|x| -x)]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelComparisonRow {
    pub b: f64,
    pub label: String,
    pub printed_verbatim: Option<f64>,
    pub printed_corrected: Option<f64>,
    /// Distance to the nearest numeric eigenvalue.
    pub discrepancy_verbatim: Option<f64>,
    pub discrepancy_corrected: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelComparisonReport {
    pub delta_gap: f64,
    pub gamma: f64,
    pub b_grid: Vec<f64>,
    /// Ascending eigenvalues at each grid point.
    pub numeric: Vec<Vec<f64>>,
    pub rows: Vec<LevelComparisonRow>,
    /// Largest discrepancy per label over the grid, verbatim reading.
    pub max_discrepancy_verbatim: Vec<(String, Option<f64>)>,
    pub max_discrepancy_corrected: Vec<(String, Option<f64>)>,
}

fn nearest(values: &[f64], x: f64) -> f64 {
    values.iter().map(|v| (v - x).abs()).fold(f64::INFINITY, f64::min)
}

/// Compares the nine printed level formulas with exact diagonalization.
/// The three zero levels and `E₂,±₁` are asserted to `1e-9`; the others
/// are only reported.
pub fn coupled_levels_report(b_grid: &[f64], delta_gap: f64, gamma: f64) -> Result<LevelComparisonReport> {
    if b_grid.is_empty() {
        return Err(Error::InvalidParameter("empty field grid".into()));
    }
    if b_grid.iter().chain([&delta_gap, &gamma]).any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("non-finite field, gap or gamma".into()));
    }
    let mut numeric = Vec::with_capacity(b_grid.len());
    let mut rows = Vec::new();
    let mut worst_v = [Some(0.0f64); 9];
    let mut worst_c = [Some(0.0f64); 9];
    for &b in b_grid {
        let h = coupled_spin1_hamiltonian(b, delta_gap, gamma)?;
        let spec = hermitian_eig(&h)?;
        let ev = spec.eigenvalues.clone();
        let zeros = ev.iter().filter(|x| x.abs() < 1e-9).count();
        if zeros < 3 {
            return Err(Error::NumericalCheck(format!("only {zeros} zero levels at B = {b}")));
        }
        let verbatim = printed_coupled_levels(b, delta_gap, gamma, false);
        let corrected = printed_coupled_levels(b, delta_gap, gamma, true);
        for k in 0..9 {
            let dv = verbatim[k].map(|x| nearest(&ev, x));
            let dc = corrected[k].map(|x| nearest(&ev, x));
            if (3..5).contains(&k) && dv.is_none_or(|d| d > 1e-9) {
                return Err(Error::NumericalCheck(format!("{} disagrees with numerics at B = {b}", COUPLED_LABELS[k])));
            }
            worst_v[k] = match (worst_v[k], dv) {
                (Some(w), Some(d)) => Some(w.max(d)),
                _ => None,
            };
            worst_c[k] = match (worst_c[k], dc) {
                (Some(w), Some(d)) => Some(w.max(d)),
                _ => None,
            };
            rows.push(LevelComparisonRow {
                b,
                label: COUPLED_LABELS[k].to_string(),
                printed_verbatim: verbatim[k],
                printed_corrected: corrected[k],
                discrepancy_verbatim: dv,
                discrepancy_corrected: dc,
            });
        }
        numeric.push(ev);
    }
    let label = |w: [Option<f64>; 9]| COUPLED_LABELS.iter().zip(w).map(|(l, d)| (l.to_string(), d)).collect();
    Ok(LevelComparisonReport {
        delta_gap,
        gamma,
        b_grid: b_grid.to_vec(),
        numeric,
        rows,
        max_discrepancy_verbatim: label(worst_v),
        max_discrepancy_corrected: label(worst_c),
    })
}

pub const LEVELS_HEADER: &str = "B,label,printed_verbatim,printed_corrected,discrepancy_verbatim,discrepancy_corrected";

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NaN".to_string(), |v| format!("{v:.16e}"))
}

pub fn levels_report_csv(report: &LevelComparisonReport) -> String {
    let mut s = String::from(LEVELS_HEADER);
    s.push('\n');
    for r in &report.rows {
        let _ = writeln!(
            s,
            // labels carry a comma, so they are quoted
            "{:.16e},\"{}\",{},{},{},{}",
            r.b,
            r.label,
            opt(r.printed_verbatim),
            opt(r.printed_corrected),
            opt(r.discrepancy_verbatim),
            opt(r.discrepancy_corrected)
        );
    }
    s
}

/// The three nearest levels near zero field.
#[derive(Debug, Clone, PartialEq)]
pub struct LzsSystem {
    pub matrix: OperatorMatrix,
    pub beta: f64,
    pub cos_beta: f64,
    /// `(E₋, E₀, E₊)`.
    pub eigenvalues: [f64; 3],
    /// Closed-form eigenvectors in the order `E₊, E₀, E₋`.
    pub eigenvectors: [StateVector; 3],
}

pub fn lzs_three_level(b: f64, delta_gap: f64) -> Result<LzsSystem> {
    if b == 0.0 && delta_gap == 0.0 {
        return Err(Error::DegenerateAngle);
    }
    if !b.is_finite() || !delta_gap.is_finite() {
        return Err(Error::InvalidParameter("non-finite field or gap".into()));
    }
    let off = delta_gap / 2f64.sqrt();
    let matrix = OperatorMatrix::from_real_rows(3, &[b, off, 0.0, off, 0.0, off, 0.0, off, -b])?;
    let r = b.hypot(delta_gap);
    let beta = delta_gap.atan2(b);
    let (sb, cb) = beta.sin_cos();
    let h = 2f64.sqrt();
    let vec3 = |a: f64, m: f64, z: f64| StateVector::from_vec(vec![c(a), c(m), c(z)]);
    Ok(LzsSystem {
        matrix,
        beta,
        cos_beta: cb,
        eigenvalues: [-r, 0.0, r],
        eigenvectors: [
            vec3((1.0 + cb) / 2.0, sb / h, (1.0 - cb) / 2.0),
            vec3(-sb / h, cb, sb / h),
            vec3((1.0 - cb) / 2.0, -sb / h, (1.0 + cb) / 2.0),
        ],
    })
}

impl LzsSystem {
    /// Largest `|Hv − Ev|` over the closed-form pairs together with the
    /// largest deviation of their Gram matrix from the identity.
    pub fn residual(&self) -> f64 {
        let energies = [self.eigenvalues[2], self.eigenvalues[1], self.eigenvalues[0]];
        let mut worst = 0.0f64;
        for (v, e) in self.eigenvectors.iter().zip(energies) {
            worst = worst.max((self.matrix.apply(v) - v.scale(e)).norm());
        }
        for (i, a) in self.eigenvectors.iter().enumerate() {
            for (j, b) in self.eigenvectors.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((a.dotc(b).re - want).abs());
            }
        }
        worst
    }
}

/// `W(δ) = Aδ³/(1 − e^{−βδ})`, continuous at `δ = 0`.
pub fn transition_rate(a: f64, inv_temp: f64, delta: f64) -> Result<f64> {
    if !(a > 0.0) || !(inv_temp > 0.0) {
        return Err(Error::InvalidParameter(format!("A = {a} and inv_temp = {inv_temp} must be positive")));
    }
    Ok(rate(a, inv_temp, delta))
}

fn rate(a: f64, inv_temp: f64, delta: f64) -> f64 {
    if delta == 0.0 {
        return 0.0;
    }
    let w = a * delta.powi(3) / -(-inv_temp * delta).exp_m1();
    // Deep uphill the denominator overflows and w is already ~0.
    if w.is_nan() {
        0.0
    } else {
        w
    }
}

/// `W_{NN'}`, the rate from level `N` to level `N'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rates {
    pub w_p0: f64,
    pub w_m0: f64,
    pub w_0p: f64,
    pub w_0m: f64,
    pub w_pm: f64,
    pub w_mp: f64,
}

impl Rates {
    /// Rates between levels with energies `(E₊, E₀, E₋)`.
    pub fn from_energies(energies: (f64, f64, f64), a: f64, inv_temp: f64) -> Self {
        let (ep, e0, em) = energies;
        let w = |from: f64, to: f64| rate(a, inv_temp, from - to);
        Self { w_p0: w(ep, e0), w_m0: w(em, e0), w_0p: w(e0, ep), w_0m: w(e0, em), w_pm: w(ep, em), w_mp: w(em, ep) }
    }

    fn all(&self) -> [f64; 6] {
        [self.w_p0, self.w_m0, self.w_0p, self.w_0m, self.w_pm, self.w_mp]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientMode {
    /// Reduction of the master equation.
    #[default]
    Derived,
    /// The printed list, which differs in `C₁` by `W₊₀`.
    PaperVerbatim,
}

/// `d/dt (x, ρ₀₀) = [[C₁, C₂], [C₃, C₄]] (x, ρ₀₀) + (E, F)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateCoefficients {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub e: f64,
    pub f: f64,
}

impl RateCoefficients {
    pub fn derivative(&self, x: f64, rho00: f64) -> (f64, f64) {
        (self.c1 * x + self.c2 * rho00 + self.e, self.c3 * x + self.c4 * rho00 + self.f)
    }
}

pub fn rate_matrix_coefficients(w: &Rates, mode: CoefficientMode) -> Result<RateCoefficients> {
    if let Some(bad) = w.all().iter().find(|x| !(**x >= 0.0)) {
        return Err(Error::InvalidParameter(format!("rate {bad} is negative or NaN")));
    }
    Ok(coefficients(w, mode))
}

fn coefficients(w: &Rates, mode: CoefficientMode) -> RateCoefficients {
    let c1 = match mode {
        CoefficientMode::Derived => -0.5 * (w.w_p0 + w.w_m0) - w.w_pm - w.w_mp,
        CoefficientMode::PaperVerbatim => -0.5 * (w.w_m0 - w.w_p0) - w.w_mp - w.w_pm,
    };
    RateCoefficients {
        c1,
        c2: 0.5 * (w.w_p0 - w.w_m0) + w.w_0p - w.w_0m + w.w_pm - w.w_mp,
        c3: 0.5 * (w.w_p0 - w.w_m0),
        c4: -0.5 * (w.w_p0 + w.w_m0 + 2.0 * w.w_0p + 2.0 * w.w_0m),
        e: 0.5 * (w.w_m0 - w.w_p0) + w.w_mp - w.w_pm,
        f: 0.5 * (w.w_p0 + w.w_m0),
    }
}

/// Boltzmann weights over `(E₊, E₀, E₋)`.
fn boltzmann(energies: (f64, f64, f64), inv_temp: f64) -> (f64, f64, f64) {
    let (ep, e0, em) = energies;
    let lowest = ep.min(e0).min(em);
    let w = |e: f64| (-inv_temp * (e - lowest)).exp();
    let (p, z, m) = (w(ep), w(e0), w(em));
    let s = p + z + m;
    (p / s, z / s, m / s)
}

/// Equilibrium `(ρ₊₊, ρ₀₀, ρ₋₋)` for `E_N = γBN`.
pub fn equilibrium_populations(b: f64, params: &RateParams) -> Result<(f64, f64, f64)> {
    params.validate()?;
    let e = params.gamma * b;
    Ok(boltzmann((e, 0.0, -e), params.inv_temp))
}

/// Norm of the rate-equation derivative at the Boltzmann populations for a
/// constant field.
pub fn stationarity_residual(b: f64, params: &RateParams, mode: CoefficientMode) -> Result<f64> {
    let (p, z, m) = equilibrium_populations(b, params)?;
    let e = params.gamma * b;
    let coeff = coefficients(&Rates::from_energies((e, 0.0, -e), params.a, params.inv_temp), mode);
    let (dx, dz) = coeff.derivative(p - m, z);
    Ok(dx.hypot(dz))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LzsMode {
    /// Diabatic Zeeman levels `E_N = γBN`.
    #[default]
    Off,
    /// Adiabatic levels `E_N = N√(γ²B² + Δ²)`, `M = γ cosβ · n`.
    Adiabatic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum InitialCondition {
    /// Boltzmann populations at `B(t_start)` of the integrated levels.
    #[default]
    Equilibrium,
    /// Everything in `N = +`.
    PolarizedUp,
    /// `n = ρ₋₋ − ρ₊₊` and `ρ₀₀`.
    Explicit { n0: f64, rho00: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub b: f64,
    pub m_norm: f64,
    pub rho00: f64,
    pub n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub rows: Vec<TrajectoryRow>,
}

pub const TRAJECTORY_HEADER: &str = "t,B,M_norm,rho00,n";

impl Trajectory {
    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(100 * (self.rows.len() + 1));
        s.push_str(TRAJECTORY_HEADER);
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(s, "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", r.t, r.b, r.m_norm, r.rho00, r.n);
        }
        s
    }

    pub fn max_abs_m(&self) -> f64 {
        self.rows.iter().map(|r| r.m_norm.abs()).fold(0.0, f64::max)
    }

    /// `|∮ M dB|` by the trapezoid rule along the trajectory.
    pub fn loop_area(&self) -> f64 {
        self.rows.windows(2).map(|w| 0.5 * (w[0].m_norm + w[1].m_norm) * (w[1].b - w[0].b)).sum::<f64>().abs()
    }

    pub fn last(&self) -> &TrajectoryRow {
        self.rows.last().expect("trajectories always hold the initial row")
    }
}

fn level_energies(b: f64, params: &RateParams, mode: LzsMode) -> (f64, f64, f64) {
    let e = match mode {
        LzsMode::Off => params.gamma * b,
        LzsMode::Adiabatic => (params.gamma * b).hypot(params.delta_gap),
    };
    (e, 0.0, -e)
}

/// `cosβ = γB/√(γ²B² + Δ²)`, taken as 1 when both vanish.
fn cos_beta(b: f64, params: &RateParams) -> f64 {
    let gb = params.gamma * b;
    let r = gb.hypot(params.delta_gap);
    if r == 0.0 {
        1.0
    } else {
        gb / r
    }
}

/// Fixed-step RK4 integration of the population equations over the
/// profile window, sampled every step.
pub fn integrate_magnetization(
    params: &RateParams,
    profile: &FieldProfile,
    init: InitialCondition,
    n_steps: usize,
    lzs_mode: LzsMode,
    coeff_mode: CoefficientMode,
) -> Result<Trajectory> {
    params.validate()?;
    profile.validate()?;
    if n_steps < 10 {
        return Err(Error::InvalidParameter(format!("n_steps = {n_steps}, need at least 10")));
    }
    let (mut x, mut z) = match init {
        InitialCondition::Equilibrium => {
            let (p, z, m) =
                boltzmann(level_energies(profile.field(profile.t_start), params, lzs_mode), params.inv_temp);
            (p - m, z)
        }
        InitialCondition::PolarizedUp => (1.0, 0.0),
        InitialCondition::Explicit { n0, rho00 } => {
            let x = -n0;
            let p = 0.5 * (1.0 - rho00 + x);
            let m = 0.5 * (1.0 - rho00 - x);
            if ![p, rho00, m].iter().all(|v| v.is_finite() && (-1e-12..=1.0 + 1e-12).contains(v)) {
                return Err(Error::InvalidParameter(format!(
                    "initial state n0 = {n0}, rho00 = {rho00} is not a population vector"
                )));
            }
            (x, rho00)
        }
    };

    let deriv = |t: f64, x: f64, z: f64| {
        let b = profile.field(t);
        let w = Rates::from_energies(level_energies(b, params, lzs_mode), params.a, params.inv_temp);
        coefficients(&w, coeff_mode).derivative(x, z)
    };
    let row = |t: f64, x: f64, z: f64| {
        let b = profile.field(t);
        let n = -x;
        let m_norm = match lzs_mode {
            LzsMode::Off => params.gamma.signum() * n,
            LzsMode::Adiabatic => params.gamma.signum() * cos_beta(b, params) * n,
        };
        TrajectoryRow { t, b, m_norm, rho00: z, n }
    };

    let h = (profile.t_end - profile.t_start) / n_steps as f64;
    let mut rows = Vec::with_capacity(n_steps + 1);
    rows.push(row(profile.t_start, x, z));
    for k in 0..n_steps {
        let t = profile.t_start + h * k as f64;
        let (k1x, k1z) = deriv(t, x, z);
        let (k2x, k2z) = deriv(t + h / 2.0, x + h / 2.0 * k1x, z + h / 2.0 * k1z);
        let (k3x, k3z) = deriv(t + h / 2.0, x + h / 2.0 * k2x, z + h / 2.0 * k2z);
        let (k4x, k4z) = deriv(t + h, x + h * k3x, z + h * k3z);
        x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        z += h / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);
        let t_next = if k + 1 == n_steps { profile.t_end } else { profile.t_start + h * (k + 1) as f64 };
        let p = 0.5 * (1.0 - z + x);
        let m = 0.5 * (1.0 - z - x);
        let ok = [p, z, m].iter().all(|v| v.is_finite() && *v >= -INSTABILITY_EPS && *v <= 1.0 + INSTABILITY_EPS);
        if !ok {
            return Err(Error::Unstable {
                t: t_next,
                detail: format!("populations ({p:.3e}, {z:.3e}, {m:.3e}) left [0, 1]"),
            });
        }
        rows.push(row(t_next, x, z));
    }
    Ok(Trajectory { rows })
}

/// Largest `|ρ₀₀|` difference between the diabatic and adiabatic runs of
/// the same profile.
pub fn rho00_mode_difference(params: &RateParams, profile: &FieldProfile, n_steps: usize) -> Result<f64> {
    let off = integrate_magnetization(
        params,
        profile,
        InitialCondition::Equilibrium,
        n_steps,
        LzsMode::Off,
        CoefficientMode::Derived,
    )?;
    let adi = integrate_magnetization(
        params,
        profile,
        InitialCondition::Equilibrium,
        n_steps,
        LzsMode::Adiabatic,
        CoefficientMode::Derived,
    )?;
    Ok(off.rows.iter().zip(&adi.rows).map(|(a, b)| (a.rho00 - b.rho00).abs()).fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HysteresisMetrics {
    pub max_abs_m: f64,
    pub area: f64,
    /// `|M(t_end + P) − M(t_end)|` after one more period `P`.
    pub closure_gap: f64,
    pub rho00_closure_gap: f64,
    /// Change in `max|M|` when the step count is doubled.
    pub step_halving_change: f64,
}

/// Loop metrics for a periodic profile whose window is one period.
pub fn hysteresis_metrics(
    params: &RateParams,
    profile: &FieldProfile,
    n_steps: usize,
    lzs_mode: LzsMode,
) -> Result<HysteresisMetrics> {
    let run = |p: &FieldProfile, steps| {
        integrate_magnetization(params, p, InitialCondition::Equilibrium, steps, lzs_mode, CoefficientMode::Derived)
    };
    let one = run(profile, n_steps)?;
    let fine = run(profile, 2 * n_steps)?;
    let period = profile.t_end - profile.t_start;
    let two = run(&FieldProfile { t_end: profile.t_end + period, ..*profile }, 2 * n_steps)?;
    let mid = &two.rows[n_steps];
    let end = two.last();
    Ok(HysteresisMetrics {
        max_abs_m: one.max_abs_m(),
        area: one.loop_area(),
        closure_gap: (end.m_norm - mid.m_norm).abs(),
        rho00_closure_gap: (end.rho00 - mid.rho00).abs(),
        step_halving_change: (one.max_abs_m() - fine.max_abs_m()).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    #[test]
    fn zeeman_limit_of_coupled_model() {
        let h = coupled_spin1_hamiltonian(0.7, 0.0, 1.0).unwrap();
        let ev = hermitian_eig(&h).unwrap().eigenvalues;
        let want = [-2.0, -1.0, -1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 2.0];
        for (a, b) in ev.iter().zip(want) {
            assert_abs_diff_eq!(*a, 0.7 * b, epsilon = 1e-12);
        }
        assert!(h.is_hermitian(1e-14));
    }

    #[test]
    fn coupled_model_zero_levels_and_gap() {
        let ev = hermitian_eig(&coupled_spin1_hamiltonian(0.0, 1.0, 1.0).unwrap()).unwrap().eigenvalues;
        assert!(ev.iter().filter(|x| x.abs() < 1e-10).count() >= 3);
        let ev = hermitian_eig(&coupled_spin1_hamiltonian(1.0, 0.1, 1.0).unwrap()).unwrap().eigenvalues;
        let e = (1.0f64 + 0.01).sqrt();
        assert!(nearest(&ev, e) < 1e-10 && nearest(&ev, -e) < 1e-10);
    }

    #[test]
    fn corrected_radical_matches_numerics_and_verbatim_does_not() {
        let report = coupled_levels_report(&[0.3, 1.0, 2.0], 0.5, 1.0).unwrap();
        for (_, d) in &report.max_discrepancy_corrected {
            assert!(d.unwrap() < 1e-9);
        }
        let e22 = &report.max_discrepancy_verbatim[5];
        assert!(e22.1.is_none_or(|d| d > 1e-3));
        let csv = levels_report_csv(&report);
        assert!(csv.starts_with(LEVELS_HEADER));
        assert!(csv.lines().nth(1).unwrap().contains(",\"E2,0\","));
        assert_eq!(csv.lines().count(), 1 + 27);
    }

    #[test]
    fn lzs_examples() {
        let s = lzs_three_level(0.0, 1.0).unwrap();
        assert_abs_diff_eq!(s.beta, PI / 2.0, epsilon = 1e-15);
        let s = lzs_three_level(3.0, 4.0).unwrap();
        assert_eq!(s.eigenvalues, [-5.0, 0.0, 5.0]);
        assert_abs_diff_eq!(s.cos_beta, 0.6, epsilon = 1e-15);
        assert!(s.residual() < 1e-12);
        let s = lzs_three_level(10.0, 0.01).unwrap();
        assert_abs_diff_eq!(s.cos_beta, 0.9999995, epsilon = 1e-9);
        assert_eq!(lzs_three_level(0.0, 0.0).unwrap_err(), Error::DegenerateAngle);
    }

    #[test]
    fn rate_examples() {
        assert_eq!(transition_rate(1.0, 1.0, 0.0).unwrap(), 0.0);
        assert_relative_eq!(transition_rate(1.0, 1.0, 1.0).unwrap(), 1.0 / (1.0 - (-1f64).exp()), max_relative = 1e-15);
        let down = transition_rate(1.0, 1.0, 1.0).unwrap();
        let up = transition_rate(1.0, 1.0, -1.0).unwrap();
        assert_relative_eq!(up, 0.5819767068693265, max_relative = 1e-14);
        assert_relative_eq!(down / up, std::f64::consts::E, max_relative = 1e-14);
        assert!(transition_rate(0.0, 1.0, 1.0).is_err());
        assert!(transition_rate(1.0, -1.0, 1.0).is_err());
        assert_eq!(transition_rate(1.0, 1.0, -1e4).unwrap(), 0.0);
    }

    #[test]
    fn coefficient_examples() {
        let w = 0.7;
        let equal = Rates { w_p0: w, w_m0: w, w_0p: w, w_0m: w, w_pm: w, w_mp: w };
        let c = rate_matrix_coefficients(&equal, CoefficientMode::Derived).unwrap();
        assert_abs_diff_eq!(c.c1, -3.0 * w, epsilon = 1e-15);
        assert_abs_diff_eq!(c.c4, -3.0 * w, epsilon = 1e-15);
        assert_eq!((c.c2, c.c3, c.e), (0.0, 0.0, 0.0));
        assert_abs_diff_eq!(c.f, w);
        let zero = Rates { w_p0: 0.0, w_m0: 0.0, w_0p: 0.0, w_0m: 0.0, w_pm: 0.0, w_mp: 0.0 };
        let c = rate_matrix_coefficients(&zero, CoefficientMode::PaperVerbatim).unwrap();
        assert_eq!([c.c1, c.c2, c.c3, c.c4, c.e, c.f], [0.0; 6]);
        let bad = Rates { w_p0: -1.0, ..zero };
        assert!(rate_matrix_coefficients(&bad, CoefficientMode::Derived).is_err());
    }

    #[test]
    fn equilibrium_examples() {
        let p = RateParams::default();
        let (a, b, c) = equilibrium_populations(0.0, &p).unwrap();
        assert_abs_diff_eq!(a, 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b, 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c, 1.0 / 3.0, epsilon = 1e-15);
        let (a, b, c) = equilibrium_populations(1.0, &p).unwrap();
        assert_abs_diff_eq!(a, 0.0900305731703805, epsilon = 1e-12);
        assert_abs_diff_eq!(b, 0.2447284710547976, epsilon = 1e-12);
        assert_abs_diff_eq!(c, 0.6652409557748219, epsilon = 1e-12);
        let cold = RateParams { inv_temp: 1e3, ..p };
        let (a, b, c) = equilibrium_populations(1.0, &cold).unwrap();
        assert!(a < 1e-300 && b < 1e-300 && (c - 1.0).abs() < 1e-15);
    }

    #[test]
    fn constant_field_relaxes_to_boltzmann() {
        let p = RateParams::default();
        let prof = FieldProfile::constant(0.8, 0.0, 40.0);
        let traj = integrate_magnetization(
            &p,
            &prof,
            InitialCondition::PolarizedUp,
            4000,
            LzsMode::Off,
            CoefficientMode::Derived,
        )
        .unwrap();
        let (a, _, c) = equilibrium_populations(0.8, &p).unwrap();
        assert_abs_diff_eq!(traj.last().m_norm, -(a - c), epsilon = 1e-6);
    }

    #[test]
    fn zero_field_freezes_diabatic_but_relaxes_adiabatic() {
        let p = RateParams::default();
        let prof = FieldProfile::constant(0.0, 0.0, 50.0);
        let frozen = integrate_magnetization(
            &p,
            &prof,
            InitialCondition::PolarizedUp,
            100,
            LzsMode::Off,
            CoefficientMode::Derived,
        )
        .unwrap();
        assert_eq!(frozen.last().m_norm, -1.0);
        let p = RateParams { delta_gap: 1.0, ..p };
        let relaxed = integrate_magnetization(
            &p,
            &prof,
            InitialCondition::PolarizedUp,
            2000,
            LzsMode::Adiabatic,
            CoefficientMode::Derived,
        )
        .unwrap();
        assert!(relaxed.last().m_norm.abs() < 1e-6);
    }

    #[test]
    fn sinusoid_gives_a_loop() {
        let p = RateParams::default();
        let m = hysteresis_metrics(&p, &FieldProfile::default(), 50_000, LzsMode::Off).unwrap();
        assert!(m.max_abs_m <= 1.0);
        assert!(m.area > 0.01);
        assert!(m.closure_gap < 1e-3);
    }

    #[test]
    fn adiabatic_matches_diabatic_without_gap() {
        let p = RateParams { delta_gap: 0.0, ..RateParams::default() };
        let prof = FieldProfile::linear_ramp(0.1, 0.5, 0.0, 6.0);
        let run = |mode| {
            integrate_magnetization(&p, &prof, InitialCondition::Equilibrium, 600, mode, CoefficientMode::Derived)
                .unwrap()
        };
        let (off, adi) = (run(LzsMode::Off), run(LzsMode::Adiabatic));
        for (a, b) in off.rows.iter().zip(&adi.rows) {
            assert!((a.m_norm - b.m_norm).abs() < 1e-8);
        }
    }

    #[test]
    fn input_validation() {
        let p = RateParams::default();
        let prof = FieldProfile::default();
        let go = |p: &RateParams, prof: &FieldProfile, init, steps| {
            integrate_magnetization(p, prof, init, steps, LzsMode::Off, CoefficientMode::Derived)
        };
        assert!(go(&p, &prof, InitialCondition::Equilibrium, 5).is_err());
        assert!(go(&RateParams { a: 0.0, ..p }, &prof, InitialCondition::Equilibrium, 100).is_err());
        assert!(go(&p, &FieldProfile { t_end: -1.0, ..prof }, InitialCondition::Equilibrium, 100).is_err());
        assert!(go(&p, &prof, InitialCondition::Explicit { n0: 0.9, rho00: 0.5 }, 100).is_err());
        let gentle = FieldProfile::sinusoid(1.0, 1.0, 0.0, 1.0);
        let csv = go(&p, &gentle, InitialCondition::Explicit { n0: 0.2, rho00: 0.3 }, 10).unwrap().to_csv();
        assert!(csv.starts_with("t,B,M_norm,rho00,n\n"));
        assert_eq!(csv.lines().count(), 12);
    }

    #[test]
    fn coarse_steps_are_flagged_unstable() {
        let p = RateParams { a: 50.0, ..RateParams::default() };
        let err = integrate_magnetization(
            &p,
            &FieldProfile::default(),
            InitialCondition::Equilibrium,
            10,
            LzsMode::Off,
            CoefficientMode::Derived,
        )
        .unwrap_err();
        assert!(err.is_numerical());
    }

    proptest! {
        #[test]
        fn detailed_balance(delta in 0.01f64..20.0, beta in 0.05f64..3.0, a in 0.1f64..5.0) {
            let down = transition_rate(a, beta, delta).unwrap();
            let up = transition_rate(a, beta, -delta).unwrap();
            prop_assume!(up > 1e-250);
            let ratio = down / up;
            prop_assert!(((ratio - (beta * delta).exp()) / ratio).abs() < 1e-12);
        }

        #[test]
        fn boltzmann_is_stationary(b in -5.0f64..5.0, beta in 0.1f64..3.0) {
            let p = RateParams { inv_temp: beta, ..RateParams::default() };
            prop_assert!(stationarity_residual(b, &p, CoefficientMode::Derived).unwrap() < 1e-10);
        }

        #[test]
        fn modes_differ_only_in_c1(r in prop::collection::vec(0.0f64..3.0, 6)) {
            let w = Rates { w_p0: r[0], w_m0: r[1], w_0p: r[2], w_0m: r[3], w_pm: r[4], w_mp: r[5] };
            let d = rate_matrix_coefficients(&w, CoefficientMode::Derived).unwrap();
            let v = rate_matrix_coefficients(&w, CoefficientMode::PaperVerbatim).unwrap();
            prop_assert!((v.c1 - d.c1 - w.w_p0).abs() < 1e-12);
            prop_assert_eq!((d.c2, d.c3, d.c4, d.e, d.f), (v.c2, v.c3, v.c4, v.e, v.f));
        }

        #[test]
        fn lzs_closed_form_eigenpairs(b in -10.0f64..10.0, delta in 0.0f64..5.0) {
            prop_assume!(b.abs() + delta > 1e-3);
            let s = lzs_three_level(b, delta).unwrap();
            prop_assert!(s.residual() < 1e-10);
            let ev = hermitian_eig(&s.matrix).unwrap().eigenvalues;
            for (x, y) in ev.iter().zip(s.eigenvalues) {
                prop_assert!((x - y).abs() < 1e-10);
            }
        }
    }
}
