//! Local decoherence channels: Kraus application, phase damping,
//! non-Markovian amplitude decay and the random-external-field map.
//!
//! Single-qubit matrices are written with the excited level first, matching
//! the level ordering of [`crate::states`].

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};
use crate::numerics::{kron22, tol, CMat2, CMat4, C64};
use crate::states::{BellEigenvalues, DensityMatrix};

/// Trace-preserving set of single-qubit Kraus operators.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausSet {
    ops: Vec<CMat2>,
}

impl KrausSet {
    pub fn new(ops: Vec<CMat2>) -> Result<Self> {
        if ops.is_empty() {
            return Err(Error::validation("empty Kraus set"));
        }
        let sum = ops
            .iter()
            .fold(CMat2::zeros(), |acc, k| acc + k.adjoint() * *k);
        let deviation = sum.max_abs_diff(&CMat2::identity());
        if !(deviation <= tol::KRAUS) {
            return Err(Error::NotTracePreserving { deviation });
        }
        Ok(Self { ops })
    }

    pub fn identity() -> Self {
        Self {
            ops: vec![CMat2::identity()],
        }
    }

    pub fn ops(&self) -> &[CMat2] {
        &self.ops
    }
}

/// `Σᵢⱼ (Kᵢ ⊗ Kⱼ) ρ (Kᵢ ⊗ Kⱼ)†`.
pub fn apply_local_kraus(rho: &DensityMatrix, set_a: &KrausSet, set_b: &KrausSet) -> Result<DensityMatrix> {
    let m = rho.matrix();
    let mut out = CMat4::zeros();
    for ka in set_a.ops() {
        for kb in set_b.ops() {
            let k = kron22(ka, kb);
            out = out + k * *m * k.adjoint();
        }
    }
    DensityMatrix::new(out)
}

/// `K₀ = diag(1, √(1−p))`, `K₁ = diag(0, √p)`.
pub fn phase_damping_set(p: f64) -> Result<KrausSet> {
    check_range("p", p, 0.0, 1.0, "[0, 1]")?;
    let k0 = CMat2::from_real([[1.0, 0.0], [0.0, (1.0 - p).sqrt()]]);
    let k1 = CMat2::from_real([[0.0, 0.0], [0.0, p.sqrt()]]);
    KrausSet::new(vec![k0, k1])
}

/// Lorentzian-reservoir parameters: spectral width `lam` and Markovian decay
/// rate `gam`. Only the oscillatory regime `lam < 2·gam` is supported.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonMarkovParams {
    pub lam: f64,
    pub gam: f64,
}

impl NonMarkovParams {
    pub fn new(lam: f64, gam: f64) -> Result<Self> {
        if !(lam > 0.0 && lam.is_finite()) {
            return Err(Error::OutOfRange {
                name: "lambda",
                value: lam,
                range: "(0, inf)",
            });
        }
        if !(gam > 0.0 && gam.is_finite()) {
            return Err(Error::OutOfRange {
                name: "gamma",
                value: gam,
                range: "(0, inf)",
            });
        }
        if lam >= 2.0 * gam {
            return Err(Error::Overdamped { lam, gam });
        }
        Ok(Self { lam, gam })
    }

    /// Unit decay rate, so that times are measured in `Γt`.
    pub fn from_ratio(lam_over_gamma: f64) -> Result<Self> {
        Self::new(lam_over_gamma, 1.0)
    }

    /// `d = √(2Γλ − λ²)`.
    pub fn d(&self) -> f64 {
        (2.0 * self.gam * self.lam - self.lam * self.lam).sqrt()
    }
}

/// Excited-state survival `P_t = e^{−λt} [cos(dt/2) + (λ/d) sin(dt/2)]²`.
pub fn p_kernel(t: f64, prm: &NonMarkovParams) -> Result<f64> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::OutOfRange {
            name: "t",
            value: t,
            range: "[0, inf)",
        });
    }
    let d = prm.d();
    let (s, c) = (0.5 * d * t).sin_cos();
    let amp = c + prm.lam / d * s;
    Ok((-prm.lam * t).exp() * amp * amp)
}

/// The first `n_max` zeros `tₙ = 2[nπ − arctan(d/λ)]/d` of [`p_kernel`].
pub fn pt_zeros(prm: &NonMarkovParams, n_max: usize) -> Result<Vec<f64>> {
    if n_max == 0 {
        return Err(Error::validation("n_max must be at least 1"));
    }
    let d = prm.d();
    let phase = (d / prm.lam).atan();
    Ok((1..=n_max).map(|n| 2.0 * (n as f64 * PI - phase) / d).collect())
}

/// Amplitude decay with survival probability `P`:
/// `K₀ = diag(√P, 1)`, `K₁ = √(1−P) |g⟩⟨e|`.
pub fn amplitude_decay_set(p: f64) -> Result<KrausSet> {
    check_range("P", p, 0.0, 1.0, "[0, 1]")?;
    let k0 = CMat2::from_real([[p.sqrt(), 0.0], [0.0, 1.0]]);
    let k1 = CMat2::from_real([[0.0, 0.0], [(1.0 - p).sqrt(), 0.0]]);
    KrausSet::new(vec![k0, k1])
}

/// `[[cos gt, −e^{−iφ} sin gt], [e^{iφ} sin gt, cos gt]]` for a dephaser
/// phase `φ ∈ {0, π}`.
pub fn random_field_unitary(phi: f64, gt: f64) -> Result<CMat2> {
    if !(phi.abs() <= tol::HERMITIAN || (phi - PI).abs() <= tol::HERMITIAN) {
        return Err(Error::validation(format!("dephaser phase {phi} is neither 0 nor pi")));
    }
    if !gt.is_finite() {
        return Err(Error::validation("gt must be finite"));
    }
    // e^{±iπ} is exactly −1; avoid the 1e−16 imaginary residue of cis(π).
    let sign = if phi.abs() <= tol::HERMITIAN { 1.0 } else { -1.0 };
    let (s, c) = gt.sin_cos();
    Ok(CMat2([
        [C64::new(c, 0.0), C64::new(-sign * s, 0.0)],
        [C64::new(sign * s, 0.0), C64::new(c, 0.0)],
    ]))
}

/// `f(t) = sin²(2gt)/2`.
pub fn random_field_f(gt: f64) -> f64 {
    0.5 * (2.0 * gt).sin().powi(2)
}

/// `¼ Σᵢⱼ (Uᵢ ⊗ Uⱼ) ρ (Uᵢ ⊗ Uⱼ)†` over the two dephaser phases per qubit.
pub fn random_field_apply(rho: &DensityMatrix, gt: f64) -> Result<DensityMatrix> {
    let us = [random_field_unitary(0.0, gt)?, random_field_unitary(PI, gt)?];
    let m = rho.matrix();
    let mut out = CMat4::zeros();
    for ua in &us {
        for ub in &us {
            let u = kron22(ua, ub);
            out = out + u * *m * u.adjoint();
        }
    }
    DensityMatrix::new(out.scale_re(0.25))
}

/// Bell-weight update `λ_β^±(t) = λ_β^±(0)[1 − f] + λ_β′^∓(0) f` with `β ≠ β′`:
/// weight flows between `Ψ⁺ ↔ Φ⁻` and `Ψ⁻ ↔ Φ⁺`.
pub fn random_field_bell_update(l: &BellEigenvalues, f: f64) -> Result<BellEigenvalues> {
    check_range("f", f, 0.0, 0.5, "[0, 1/2]")?;
    let g = 1.0 - f;
    Ok(BellEigenvalues {
        psi_plus: l.psi_plus * g + l.phi_minus * f,
        psi_minus: l.psi_minus * g + l.phi_plus * f,
        phi_plus: l.phi_plus * g + l.psi_minus * f,
        phi_minus: l.phi_minus * g + l.psi_plus * f,
    })
}

/// A channel family together with its rates. Every channel is driven by one
/// dimensionless parameter: `p` for phase damping, `Γt` for the
/// non-Markovian decay and `gt` for the random field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Channel {
    PhaseDamping,
    AmplitudeNonMarkov(NonMarkovParams),
    RandomField { g: f64 },
}

impl Channel {
    /// Converts a raw time into the channel's dimensionless parameter.
    pub fn to_dimensionless(&self, t: f64) -> f64 {
        match self {
            Channel::PhaseDamping => t,
            Channel::AmplitudeNonMarkov(prm) => prm.gam * t,
            Channel::RandomField { g } => g * t,
        }
    }

    /// Name of the dimensionless parameter.
    pub fn parameter_name(&self) -> &'static str {
        match self {
            Channel::PhaseDamping => "p",
            Channel::AmplitudeNonMarkov(_) => "Gamma_t",
            Channel::RandomField { .. } => "gt",
        }
    }

    /// Kernel at parameter `s`: `1 − p`, `P_t` or `f`.
    pub fn kernel(&self, s: f64) -> Result<f64> {
        match self {
            Channel::PhaseDamping => {
                check_range("p", s, 0.0, 1.0, "[0, 1]")?;
                Ok(1.0 - s)
            }
            Channel::AmplitudeNonMarkov(prm) => p_kernel(s / prm.gam, prm),
            Channel::RandomField { .. } => {
                if !s.is_finite() {
                    return Err(Error::validation("gt must be finite"));
                }
                Ok(random_field_f(s))
            }
        }
    }

    /// Applies the channel at parameter `s` to both qubits.
    pub fn apply(&self, rho: &DensityMatrix, s: f64) -> Result<DensityMatrix> {
        match self {
            Channel::PhaseDamping => {
                let set = phase_damping_set(s)?;
                apply_local_kraus(rho, &set, &set)
            }
            Channel::AmplitudeNonMarkov(prm) => {
                let set = amplitude_decay_set(p_kernel(s / prm.gam, prm)?.clamp(0.0, 1.0))?;
                apply_local_kraus(rho, &set, &set)
            }
            Channel::RandomField { .. } => random_field_apply(rho, s),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    PhaseDamping,
    AmplitudeNonmarkov,
    RandomField,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelParameters {
    /// Single damping strength, used when no grid is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lam_over_gamma: Option<f64>,
    /// Decay rate Γ; defaults to 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Field coupling; defaults to 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeUnits {
    /// Grid values are `p`, `Γt` or `gt` directly.
    #[default]
    Dimensionless,
    /// Grid values are raw times, scaled by the channel rate.
    Raw,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub units: TimeUnits,
}

/// JSON description of a channel and its parameter grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub channel: ChannelKind,
    #[serde(default)]
    pub parameters: ChannelParameters,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
}

impl ChannelSpec {
    pub fn build(&self) -> Result<Channel> {
        let prm = &self.parameters;
        let positive = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(Error::OutOfRange {
                    name,
                    value: v,
                    range: "(0, inf)",
                })
            }
        };
        match self.channel {
            ChannelKind::PhaseDamping => {
                if let Some(p) = prm.p {
                    check_range("p", p, 0.0, 1.0, "[0, 1]")?;
                }
                Ok(Channel::PhaseDamping)
            }
            ChannelKind::AmplitudeNonmarkov => {
                let ratio = prm
                    .lam_over_gamma
                    .ok_or_else(|| Error::validation("amplitude_nonmarkov needs `lam_over_gamma`"))?;
                let gam = positive("gamma", prm.gamma.unwrap_or(1.0))?;
                let ratio = positive("lam_over_gamma", ratio)?;
                Ok(Channel::AmplitudeNonMarkov(NonMarkovParams::new(ratio * gam, gam)?))
            }
            ChannelKind::RandomField => Ok(Channel::RandomField {
                g: positive("g", prm.g.unwrap_or(1.0))?,
            }),
        }
    }

    /// The explicit grid in dimensionless units, `[p]` for a single phase
    /// damping strength, or `None` when the default grid applies.
    pub fn explicit_grid(&self, channel: &Channel) -> Result<Option<Vec<f64>>> {
        match (&self.grid, self.parameters.p) {
            (Some(g), _) => {
                let raw = linspace(g.start, g.stop, g.points)?;
                Ok(Some(match g.units {
                    TimeUnits::Dimensionless => raw,
                    TimeUnits::Raw => raw.into_iter().map(|t| channel.to_dimensionless(t)).collect(),
                }))
            }
            (None, Some(p)) if self.channel == ChannelKind::PhaseDamping => Ok(Some(vec![p])),
            _ => Ok(None),
        }
    }
}

/// `points` evenly spaced values from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, points: usize) -> Result<Vec<f64>> {
    if !(start.is_finite() && stop.is_finite()) {
        return Err(Error::validation("grid bounds must be finite"));
    }
    match points {
        0 => Err(Error::validation("grid needs at least one point")),
        1 => Ok(vec![start]),
        _ if stop <= start => Err(Error::validation("grid stop must exceed start")),
        _ => {
            let n = (points - 1) as f64;
            let mut v: Vec<f64> = (0..points)
                .map(|i| start + (stop - start) * (i as f64 / n))
                .collect();
            v[points - 1] = stop;
            Ok(v)
        }
    }
}
