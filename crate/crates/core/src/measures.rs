//! Correlation quantifiers: maximal CHSH violation, geometric discord and
//! concurrence, in their general and closed forms, plus the analytic
//! corridors that relate them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};
use crate::numerics::{dot3, eig_sym3, mat3_frobenius_sq, mat3_mul, mat3_transpose, mat3_vec, max_eig_k, norm3, tol, Vec3};
use crate::states::{is_physical_bell, to_bloch, BellEigenvalues, BlochForm, DensityMatrix, XState};

/// Four unit measurement directions of a CHSH experiment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasurementSettings {
    pub a: Vec3,
    pub a_prime: Vec3,
    pub b: Vec3,
    pub b_prime: Vec3,
}

impl MeasurementSettings {
    pub fn new(a: Vec3, a_prime: Vec3, b: Vec3, b_prime: Vec3) -> Result<Self> {
        for (name, v) in [("a", a), ("a'", a_prime), ("b", b), ("b'", b_prime)] {
            let n = norm3(&v);
            if !n.is_finite() || (n - 1.0).abs() > tol::UNIT_NORM {
                return Err(Error::validation(format!("setting {name} has norm {n}, expected 1")));
            }
        }
        Ok(Self { a, a_prime, b, b_prime })
    }
}

/// Everything the CLI and trajectories report about one state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    #[serde(rename = "B")]
    pub b: f64,
    pub m_rho: f64,
    #[serde(flatten)]
    pub u: Eigs3,
    #[serde(rename = "D_G")]
    pub d_g: f64,
    pub k_max: f64,
    #[serde(rename = "C")]
    pub c: Option<f64>,
}

/// Sorted eigenvalues of `TᵀT`, serialised as `u1, u2, u3`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Eigs3 {
    pub u1: f64,
    pub u2: f64,
    pub u3: f64,
}

impl Eigs3 {
    pub fn as_array(&self) -> [f64; 3] {
        [self.u1, self.u2, self.u3]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChshMax {
    pub b: f64,
    pub m_rho: f64,
    /// Eigenvalues of `TᵀT`, descending.
    pub u: [f64; 3],
}

/// Maximal CHSH value `2√(u₁ + u₂)` from the two largest eigenvalues of `TᵀT`.
pub fn chsh_max(b: &BlochForm) -> ChshMax {
    let u_mat = mat3_mul(&mat3_transpose(&b.t), &b.t);
    let u = eig_sym3(&u_mat).expect("TᵀT is symmetric");
    let m_rho = (u[0] + u[1]).max(0.0);
    ChshMax {
        b: 2.0 * m_rho.sqrt(),
        m_rho,
        u,
    }
}

/// `|aᵀT(b + b′) + a′ᵀT(b − b′)|`.
pub fn chsh_value(b: &BlochForm, s: &MeasurementSettings) -> f64 {
    let sum = [s.b[0] + s.b_prime[0], s.b[1] + s.b_prime[1], s.b[2] + s.b_prime[2]];
    let diff = [s.b[0] - s.b_prime[0], s.b[1] - s.b_prime[1], s.b[2] - s.b_prime[2]];
    (dot3(&s.a, &mat3_vec(&b.t, &sum)) + dot3(&s.a_prime, &mat3_vec(&b.t, &diff))).abs()
}

const BRUTE_FORCE_SEED: u64 = 0x5eed_c454;
const GOLDEN: f64 = 0.618_033_988_749_894_9;
const SCAN_POINTS: usize = 16;

fn direction(theta: f64, phi: f64) -> Vec3 {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [st * cp, st * sp, ct]
}

/// Numerical maximum of [`chsh_value`] over all settings.
///
/// Coordinate ascent over the eight polar/azimuthal angles with a coarse scan
/// followed by golden-section refinement on each coordinate, restarted
/// `restarts` times from angles drawn on a fixed seed schedule. Independent
/// of the eigenvalue route of [`chsh_max`].
pub fn chsh_brute_force(b: &BlochForm, restarts: usize) -> f64 {
    let restarts = restarts.max(1);
    let t = b.t;
    let tt = mat3_transpose(&t);
    let mut best = 0.0f64;
    for k in 0..restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(BRUTE_FORCE_SEED ^ (k as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let mut ang = [0.0f64; 8];
        for (i, a) in ang.iter_mut().enumerate() {
            *a = if i % 2 == 0 {
                rng.gen_range(0.0..std::f64::consts::PI)
            } else {
                rng.gen_range(0.0..std::f64::consts::TAU)
            };
        }
        best = best.max(coordinate_ascent(&t, &tt, &mut ang));
    }
    best
}

/// Signed CHSH combination; flipping `a` and `a′` flips its sign, so its
/// maximum is the maximum of the absolute value.
fn coordinate_ascent(t: &[[f64; 3]; 3], tt: &[[f64; 3]; 3], ang: &mut [f64; 8]) -> f64 {
    let vecs = |ang: &[f64; 8]| -> [Vec3; 4] {
        [
            direction(ang[0], ang[1]),
            direction(ang[2], ang[3]),
            direction(ang[4], ang[5]),
            direction(ang[6], ang[7]),
        ]
    };
    let objective = |v: &[Vec3; 4]| {
        let [a, ap, bb, bp] = v;
        let sum = [bb[0] + bp[0], bb[1] + bp[1], bb[2] + bp[2]];
        let diff = [bb[0] - bp[0], bb[1] - bp[1], bb[2] - bp[2]];
        dot3(a, &mat3_vec(t, &sum)) + dot3(ap, &mat3_vec(t, &diff))
    };
    let mut value = objective(&vecs(ang));
    for _sweep in 0..400 {
        let start = value;
        for coord in 0..8 {
            let v = vecs(ang);
            let which = coord / 2;
            // The objective is linear in the vector being varied: w·v + rest.
            let (w, rest) = match which {
                0 => {
                    let sum = [v[2][0] + v[3][0], v[2][1] + v[3][1], v[2][2] + v[3][2]];
                    let diff = [v[2][0] - v[3][0], v[2][1] - v[3][1], v[2][2] - v[3][2]];
                    (mat3_vec(t, &sum), dot3(&v[1], &mat3_vec(t, &diff)))
                }
                1 => {
                    let sum = [v[2][0] + v[3][0], v[2][1] + v[3][1], v[2][2] + v[3][2]];
                    let diff = [v[2][0] - v[3][0], v[2][1] - v[3][1], v[2][2] - v[3][2]];
                    (mat3_vec(t, &diff), dot3(&v[0], &mat3_vec(t, &sum)))
                }
                2 => {
                    let ta = mat3_vec(tt, &v[0]);
                    let tap = mat3_vec(tt, &v[1]);
                    let w = [ta[0] + tap[0], ta[1] + tap[1], ta[2] + tap[2]];
                    let r = dot3(&[ta[0] - tap[0], ta[1] - tap[1], ta[2] - tap[2]], &v[3]);
                    (w, r)
                }
                _ => {
                    let ta = mat3_vec(tt, &v[0]);
                    let tap = mat3_vec(tt, &v[1]);
                    let w = [ta[0] - tap[0], ta[1] - tap[1], ta[2] - tap[2]];
                    let r = dot3(&[ta[0] + tap[0], ta[1] + tap[1], ta[2] + tap[2]], &v[2]);
                    (w, r)
                }
            };
            let (theta_i, phi_i) = (2 * which, 2 * which + 1);
            let is_theta = coord % 2 == 0;
            let f = |x: f64| {
                let d = if is_theta {
                    direction(x, ang[phi_i])
                } else {
                    direction(ang[theta_i], x)
                };
                dot3(&w, &d) + rest
            };
            let x0 = ang[coord];
            let step = std::f64::consts::TAU / SCAN_POINTS as f64;
            let (mut bx, mut bf) = (x0, f(x0));
            for i in 1..SCAN_POINTS {
                let x = x0 + step * i as f64;
                let fx = f(x);
                if fx > bf {
                    bx = x;
                    bf = fx;
                }
            }
            let (xg, fg) = golden_max(&f, bx - step, bx + step);
            if fg > bf {
                bx = xg;
                bf = fg;
            }
            if bf >= value {
                ang[coord] = bx.rem_euclid(std::f64::consts::TAU);
                value = bf;
            }
        }
        if value - start <= 1e-15 {
            break;
        }
    }
    value
}

fn golden_max(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > 1e-10 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Discord {
    pub d_g: f64,
    pub k_max: f64,
}

/// `D_G = ¼(‖x‖² + Tr(TᵀT) − k_max)`, with `k_max` the top eigenvalue of
/// `x xᵀ + T Tᵀ`. Cancellation noise below zero is clamped.
pub fn geometric_discord(b: &BlochForm) -> Discord {
    let k_max = max_eig_k(&b.x, &b.t);
    let d = 0.25 * (dot3(&b.x, &b.x) + mat3_frobenius_sq(&b.t) - k_max);
    Discord {
        d_g: d.max(0.0),
        k_max,
    }
}

fn physical_triple(c: [f64; 3]) -> Result<[f64; 3]> {
    let check = is_physical_bell(c);
    if check.physical && c.iter().all(|v| v.is_finite()) {
        Ok(c)
    } else {
        Err(Error::UnphysicalBell {
            c,
            reason: format!("negative Bell weights {:?}", check.negative),
        })
    }
}

fn pair_sums(c: [f64; 3]) -> [f64; 3] {
    let sq = c.map(|v| v * v);
    [sq[0] + sq[1], sq[1] + sq[2], sq[2] + sq[0]]
}

/// `2√max{c₁²+c₂², c₂²+c₃², c₃²+c₁²}`.
pub fn chsh_max_bell(c: [f64; 3]) -> Result<f64> {
    let c = physical_triple(c)?;
    let m = pair_sums(c).into_iter().fold(f64::NEG_INFINITY, f64::max);
    Ok(2.0 * m.sqrt())
}

/// `¼ min{c₁²+c₂², c₂²+c₃², c₃²+c₁²}`.
pub fn discord_bell(c: [f64; 3]) -> Result<f64> {
    let c = physical_triple(c)?;
    Ok(0.25 * pair_sums(c).into_iter().fold(f64::INFINITY, f64::min))
}

/// `2√2 √((λ₁ − λ₄)² + (λ₂ − λ₃)²)` with the weights sorted descending.
pub fn chsh_max_bell_eigs(l: &BellEigenvalues) -> f64 {
    let [l1, l2, l3, l4] = l.sorted_desc();
    2.0 * std::f64::consts::SQRT_2 * ((l1 - l4).powi(2) + (l2 - l3).powi(2)).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XMeasures {
    pub b: f64,
    pub d_g: f64,
}

/// Closed-form CHSH maximum and discord of an X state.
pub fn measures_x(x: &XState) -> XMeasures {
    let (o14, o23) = (x.o14().abs(), x.o23().abs());
    let p = x.bloch();
    let u1 = 4.0 * (o14 + o23).powi(2);
    let u2 = 4.0 * (o14 - o23).powi(2);
    let u3 = p.c3 * p.c3;
    let b = (2.0 * (u1 + u2).sqrt()).max(2.0 * (u1 + u3).sqrt());
    let (c1s, c2s, c3s, ms) = (p.c1 * p.c1, p.c2 * p.c2, p.c3 * p.c3, p.m * p.m);
    let d = 0.25 * (c1s + c2s + c3s + ms - c1s.max(c2s).max(c3s + ms));
    XMeasures { b, d_g: d.max(0.0) }
}

/// `C = 2 max{0, |ρ₁₄| − √(ρ₂₂ρ₃₃), |ρ₂₃| − √(ρ₁₁ρ₄₄)}`.
pub fn concurrence_x(x: &XState) -> f64 {
    let [d11, d22, d33, d44] = x.diag();
    let a = x.o14().abs() - (d22 * d33).max(0.0).sqrt();
    let b = x.o23().abs() - (d11 * d44).max(0.0).sqrt();
    2.0 * a.max(b).max(0.0)
}

/// Concurrence of an X-structured state (complex coherences allowed);
/// `None` for states without X structure.
pub fn concurrence(rho: &DensityMatrix) -> Option<f64> {
    let x = rho.x_blocks()?;
    let [d11, d22, d33, d44] = x.diag;
    let a = x.rho14.norm() - (d22 * d33).max(0.0).sqrt();
    let b = x.rho23.norm() - (d11 * d44).max(0.0).sqrt();
    Some(2.0 * a.max(b).max(0.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Corridor {
    pub lo: f64,
    pub hi: f64,
}

impl Corridor {
    pub fn contains(&self, b: f64, slack: f64) -> bool {
        b >= self.lo - slack && b <= self.hi + slack
    }
}

/// `4√D_G ≤ B ≤ 2√(1 + 2D_G)` for Bell-diagonal states.
pub fn discord_corridor(d_g: f64) -> Result<Corridor> {
    check_range("D_G", d_g, 0.0, 0.5, "[0, 1/2]")?;
    Ok(Corridor {
        lo: 4.0 * d_g.sqrt(),
        hi: 2.0 * (1.0 + 2.0 * d_g).sqrt(),
    })
}

/// `2√2(2C + 1)/3 ≤ B ≤ 2√(1 + C²)` for entangled Bell-diagonal states.
pub fn vw_corridor(c: f64) -> Result<Corridor> {
    check_range("C", c, 0.0, 1.0, "[0, 1]")?;
    Ok(Corridor {
        lo: 2.0 * std::f64::consts::SQRT_2 * (2.0 * c + 1.0) / 3.0,
        hi: 2.0 * (1.0 + c * c).sqrt(),
    })
}

pub fn bloch_report(b: &BlochForm, c: Option<f64>) -> CorrelationReport {
    let chsh = chsh_max(b);
    let disc = geometric_discord(b);
    CorrelationReport {
        b: chsh.b,
        m_rho: chsh.m_rho,
        u: Eigs3 {
            u1: chsh.u[0],
            u2: chsh.u[1],
            u3: chsh.u[2],
        },
        d_g: disc.d_g,
        k_max: disc.k_max,
        c,
    }
}

/// Full report through the general Bloch-form route.
pub fn correlation_report(rho: &DensityMatrix) -> CorrelationReport {
    bloch_report(&to_bloch(rho), concurrence(rho))
}
