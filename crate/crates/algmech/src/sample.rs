//! Deterministic seeded sampling of chart boxes.
//!
//! Verification sweeps need reproducible point sets, so sampling uses a
//! low-discrepancy additive recurrence (the R2 sequence) with a seed-derived
//! offset instead of a platform-dependent RNG.

/// SplitMix64 step; the de-facto standard seeding mixer.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Uniform f64 in [0, 1) from a u64.
pub fn unit_f64(bits: u64) -> f64 {
    (bits >> 11) as f64 / (1u64 << 53) as f64
}

/// Axis-aligned sampling region of a chart.
#[derive(Debug, Clone)]
pub struct ChartBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl ChartBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        assert_eq!(lo.len(), hi.len());
        ChartBox { lo, hi }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }
}

/// Quasi-random point stream inside a box.
pub struct BoxSampler {
    bx: ChartBox,
    alphas: Vec<f64>,
    offsets: Vec<f64>,
    k: u64,
}

impl BoxSampler {
    pub fn new(bx: ChartBox, seed: u64) -> Self {
        let d = bx.dim();
        // generalized golden ratio for dimension d
        let mut phi = 1.0f64;
        for _ in 0..40 {
            phi = (1.0 + phi).powf(1.0 / (d as f64 + 1.0));
        }
        let mut alphas = Vec::with_capacity(d);
        let mut a = 1.0;
        for _ in 0..d {
            a /= phi;
            alphas.push(a);
        }
        let mut st = seed ^ 0xA076_1D64_78BD_642F;
        let offsets = (0..d).map(|_| unit_f64(splitmix64(&mut st))).collect();
        BoxSampler {
            bx,
            alphas,
            offsets,
            k: 0,
        }
    }

    pub fn next_point(&mut self) -> Vec<f64> {
        self.k += 1;
        let k = self.k as f64;
        (0..self.bx.dim())
            .map(|j| {
                let u = (self.offsets[j] + k * self.alphas[j]).fract();
                self.bx.lo[j] + u * (self.bx.hi[j] - self.bx.lo[j])
            })
            .collect()
    }

    pub fn take(&mut self, n: usize) -> Vec<Vec<f64>> {
        (0..n).map(|_| self.next_point()).collect()
    }
}

/// `n` seeded points in the box; the usual entry point for checks.
pub fn sample_box(bx: &ChartBox, seed: u64, n: usize) -> Vec<Vec<f64>> {
    BoxSampler::new(bx.clone(), seed).take(n)
}

/// Seeded uniform scalars in [lo, hi); used for randomized coefficients.
pub fn sample_scalars(seed: u64, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut st = seed ^ 0x243F_6A88_85A3_08D3;
    (0..n)
        .map(|_| lo + unit_f64(splitmix64(&mut st)) * (hi - lo))
        .collect()
}
