//! Monte Carlo scan of the B–D_G plane over Bell-diagonal states.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::measures::{bloch_report, concurrence_x, discord_corridor, vw_corridor};
use crate::numerics::fmt_sig12;
use crate::states::sample_bell_diagonal;

/// Samples per independently seeded chunk. Chunk `k` draws from stream `k`
/// of the seed, so output does not depend on the worker count.
const CHUNK: usize = 4096;
const BINS: usize = 20;
const SLACK: f64 = 1e-10;
const CURVE_POINTS: usize = 101;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CloudPoint {
    pub d_g: f64,
    pub b: f64,
    pub c: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Bin {
    pub d_lo: f64,
    pub d_hi: f64,
    pub count: usize,
    pub b_min: Option<f64>,
    pub b_max: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanSummary {
    pub samples: usize,
    pub seed: u64,
    pub slack: f64,
    pub violations_lower: usize,
    pub violations_upper: usize,
    pub violations: usize,
    /// Largest `4√D_G − B`; non-positive when the lower bound holds.
    pub worst_lower_gap: f64,
    /// Largest `B − 2√(1 + 2D_G)`.
    pub worst_upper_gap: f64,
    pub entangled: usize,
    pub vw_violations: usize,
    pub bins: Vec<Bin>,
}

fn sample_chunk(seed: u64, chunk: usize, len: usize) -> Vec<CloudPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    (0..len)
        .map(|_| {
            let s = sample_bell_diagonal(&mut rng);
            let c = concurrence_x(&s.x_state());
            let r = bloch_report(&s.bloch(), Some(c));
            CloudPoint { d_g: r.d_g, b: r.b, c }
        })
        .collect()
}

/// Samples `n` Bell-diagonal states and checks `4√D_G ≤ B ≤ 2√(1+2D_G)` and,
/// for entangled samples, `2√2(2C+1)/3 ≤ B ≤ 2√(1+C²)`.
pub fn bounds_scan(n: usize, seed: u64) -> (ScanSummary, Vec<CloudPoint>) {
    let chunks = n.div_ceil(CHUNK);
    let cloud: Vec<CloudPoint> = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|k| sample_chunk(seed, k, CHUNK.min(n - k * CHUNK)))
        .collect();

    let mut bins: Vec<Bin> = (0..BINS)
        .map(|i| Bin {
            d_lo: 0.5 * i as f64 / BINS as f64,
            d_hi: 0.5 * (i + 1) as f64 / BINS as f64,
            count: 0,
            b_min: None,
            b_max: None,
        })
        .collect();
    let mut s = ScanSummary {
        samples: n,
        seed,
        slack: SLACK,
        violations_lower: 0,
        violations_upper: 0,
        violations: 0,
        worst_lower_gap: f64::NEG_INFINITY,
        worst_upper_gap: f64::NEG_INFINITY,
        entangled: 0,
        vw_violations: 0,
        bins: Vec::new(),
    };
    for p in &cloud {
        let d = p.d_g.min(0.5);
        let cor = discord_corridor(d).expect("discord of a Bell-diagonal state lies in [0, 1/2]");
        let lo_gap = cor.lo - p.b;
        let hi_gap = p.b - cor.hi;
        s.worst_lower_gap = s.worst_lower_gap.max(lo_gap);
        s.worst_upper_gap = s.worst_upper_gap.max(hi_gap);
        let (bad_lo, bad_hi) = (lo_gap > SLACK, hi_gap > SLACK);
        s.violations_lower += bad_lo as usize;
        s.violations_upper += bad_hi as usize;
        s.violations += (bad_lo || bad_hi) as usize;
        if p.c > 0.0 {
            s.entangled += 1;
            let vw = vw_corridor(p.c.min(1.0)).expect("concurrence lies in [0, 1]");
            if !vw.contains(p.b, SLACK) {
                s.vw_violations += 1;
            }
        }
        let k = ((d / 0.5 * BINS as f64) as usize).min(BINS - 1);
        let bin = &mut bins[k];
        bin.count += 1;
        bin.b_min = Some(bin.b_min.map_or(p.b, |v| v.min(p.b)));
        bin.b_max = Some(bin.b_max.map_or(p.b, |v| v.max(p.b)));
    }
    s.bins = bins;
    (s, cloud)
}

/// Lower and upper corridor curves over `D_G ∈ [0, ½]`.
pub fn boundary_curves() -> Vec<(&'static str, f64, f64)> {
    let mut v = Vec::with_capacity(2 * CURVE_POINTS);
    for (name, upper) in [("lower", false), ("upper", true)] {
        for i in 0..CURVE_POINTS {
            let d = 0.5 * i as f64 / (CURVE_POINTS - 1) as f64;
            let c = discord_corridor(d).expect("d in range");
            v.push((name, d, if upper { c.hi } else { c.lo }));
        }
    }
    v
}

/// `series,D_G,B` rows: the sampled cloud followed by both boundary curves.
pub fn cloud_csv(cloud: &[CloudPoint]) -> String {
    let mut out = String::with_capacity(40 * (cloud.len() + 2 * CURVE_POINTS));
    out.push_str("series,D_G,B\n");
    for p in cloud {
        out.push_str(&format!("cloud,{},{}\n", fmt_sig12(p.d_g), fmt_sig12(p.b)));
    }
    for (name, d, b) in boundary_curves() {
        out.push_str(&format!("{name},{},{}\n", fmt_sig12(d), fmt_sig12(b)));
    }
    out
}
