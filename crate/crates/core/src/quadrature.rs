//! Adaptive 21-point Gauss–Kronrod quadrature.
//!
//! Panels are kept in a max-heap keyed on their error estimate; the worst
//! panel is bisected until the summed error meets the tolerance or the
//! subdivision budget runs out. Error estimates follow the QUADPACK `qk21`
//! rescaling.

use crate::error::{Error, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Kronrod abscissae on [0, 1]; odd indices are the 10-point Gauss nodes.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_685_424_720,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum number of bisections beyond the initial partition.
    pub max_subdivisions: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig { abs_tol: 1e-13, rel_tol: 0.0, max_subdivisions: 2000 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub abs_err: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
    floor: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// One application of the 21-point rule on [a, b]: (value, error estimate).
pub fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let (value, err, _) = gk21_floor(f, a, b);
    (value, err)
}

/// As [`gk21`], also returning the roundoff floor 50·ε·∫|f| of the estimate.
fn gk21_floor<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = WGK[10] * fc;
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let scale = half.abs();
    let value = res_k * half;
    let res_abs = res_abs * scale;
    let res_asc = res_asc * scale;
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * res_abs;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(floor);
    }
    (value, err, floor)
}

/// Integrates `f` over the partition given by `breaks` (sorted, at least two
/// entries). Every initial interval is kept as a separate panel, so a
/// discontinuity placed on a break point never lands inside a panel.
pub fn integrate<F: Fn(f64) -> f64>(f: F, breaks: &[f64], cfg: &QuadConfig) -> Result<QuadResult> {
    if breaks.len() < 2 {
        return Err(Error::Precondition("quadrature needs at least one interval".into()));
    }
    let mut heap = BinaryHeap::with_capacity(breaks.len() + cfg.max_subdivisions);
    let mut total = 0.0;
    let mut total_err = 0.0;
    let mut total_floor = 0.0;
    for w in breaks.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let (value, err, floor) = gk21_floor(&f, w[0], w[1]);
        total += value;
        total_err += err;
        total_floor += floor;
        heap.push(Panel { a: w[0], b: w[1], value, err, floor });
    }
    let mut evaluations = 21 * heap.len();
    let mut splits = 0;
    loop {
        // Bisection cannot push the estimate below the accumulated roundoff floor.
        let target = cfg.abs_tol.max(cfg.rel_tol * total.abs()).max(2.0 * total_floor);
        if total_err <= target {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        // Panels narrower than a few ulps cannot be refined further.
        if mid <= worst.a || mid >= worst.b || (worst.b - worst.a) < 1e-15 * worst.b.abs().max(1.0) {
            heap.push(worst);
            return Err(Error::Quadrature { value: total, err: total_err });
        }
        if splits >= cfg.max_subdivisions {
            heap.push(worst);
            return Err(Error::Quadrature { value: total, err: total_err });
        }
        let (v1, e1, f1) = gk21_floor(&f, worst.a, mid);
        let (v2, e2, f2) = gk21_floor(&f, mid, worst.b);
        evaluations += 42;
        splits += 1;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        total_floor += f1 + f2 - worst.floor;
        heap.push(Panel { a: worst.a, b: mid, value: v1, err: e1, floor: f1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, err: e2, floor: f2 });
    }
    // Re-sum to shed the drift of the running updates.
    let (value, abs_err) = heap.iter().fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.err));
    Ok(QuadResult { value, abs_err, evaluations })
}
