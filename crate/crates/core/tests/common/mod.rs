//! Independent reference implementations used as test oracles. Nothing here
//! calls into the library code it checks.
#![allow(dead_code)]

/// Four-point rainflow done the slow way: reduce to turning points, then
/// repeatedly scan the whole list from the start for the first closing
/// quadruple, extract it and start over. What is left is counted as half
/// cycles. Returns (range, weight) pairs sorted.
pub fn rainflow_reference(series: &[f64]) -> Vec<(f64, f64)> {
    let mut pts: Vec<f64> = Vec::new();
    for &v in series {
        if pts.last() != Some(&v) {
            pts.push(v);
        }
    }
    // drop interior points that are not local extrema
    let mut changed = true;
    while changed {
        changed = false;
        for k in 1..pts.len().saturating_sub(1) {
            let (a, b, c) = (pts[k - 1], pts[k], pts[k + 1]);
            if (b - a) * (c - b) > 0.0 {
                pts.remove(k);
                changed = true;
                break;
            }
        }
    }
    let mut out = Vec::new();
    'scan: loop {
        if pts.len() >= 4 {
            for k in 0..pts.len() - 3 {
                let (a, b, c, d) = (pts[k], pts[k + 1], pts[k + 2], pts[k + 3]);
                let inner = (b - c).abs();
                if inner <= (a - b).abs() && inner <= (c - d).abs() {
                    out.push((inner, 1.0));
                    pts.drain(k + 1..k + 3);
                    continue 'scan;
                }
            }
        }
        break;
    }
    for w in pts.windows(2) {
        out.push(((w[1] - w[0]).abs(), 0.5));
    }
    out.sort_by(|x, y| x.partial_cmp(y).unwrap());
    out
}

pub struct LifeParams {
    pub sigma_f: f64,
    pub b: f64,
    pub eps_f: f64,
    pub c: f64,
    pub e: f64,
    pub c1: f64,
    pub c2: f64,
}

impl LifeParams {
    pub fn q235() -> Self {
        Self {
            sigma_f: 1010.0,
            b: -0.1113,
            eps_f: 2.63,
            c: -0.89,
            e: 198_000.0,
            c1: 1.65,
            c2: 1.75,
        }
    }
}

/// Bisection over log2(2Nf) in [-2, 60] for the Morrow-corrected
/// Brown-Miller equation. Returns Nf in cycles.
pub fn life_bisection(p: &LifeParams, lhs: f64, mean: f64, ksur: f64) -> f64 {
    let rhs = |y: f64| {
        let rev = 2f64.powf(y);
        p.c1 * (p.sigma_f - mean) / p.e * rev.powf(p.b) + p.c2 * p.eps_f * rev.powf(p.c)
    };
    let target = ksur * lhs;
    let (mut lo, mut hi) = (-2.0_f64, 60.0_f64);
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if rhs(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * 2f64.powf(0.5 * (lo + hi))
}

/// Every undirected edge of a triangle list with its incidence count.
pub fn edge_counts(triangles: &[[usize; 3]]) -> std::collections::HashMap<(usize, usize), usize> {
    let mut m = std::collections::HashMap::new();
    for t in triangles {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            *m.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
    }
    m
}

/// Small deterministic generator (SplitMix64) for test draws.
pub struct SplitMix(pub u64);

impl SplitMix {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}
