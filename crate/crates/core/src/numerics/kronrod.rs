use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use super::{Estimate, QuadError, QuadratureConfig, ROUNDOFF_FLOOR};

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
pub(super) const XGK: [f64; 11] = [
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

pub(super) const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_478_312,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for XGK[1], XGK[3], ..., XGK[9].
pub(super) const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
    resabs: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    // Largest error first; ties broken by position so the order is total
    // and the subdivision sequence is deterministic.
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn qk21<F>(f: &F, a: f64, b: f64) -> Result<Panel, QuadError>
where
    F: Fn(f64) -> Complex64,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut fv = [Complex64::new(0.0, 0.0); 21];

    let eval = |x: f64| -> Result<Complex64, QuadError> {
        let v = f(x);
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(QuadError::NonFinite(x))
        }
    };

    fv[10] = eval(center)?;
    for j in 0..10 {
        let dx = half * XGK[j];
        fv[j] = eval(center - dx)?;
        fv[20 - j] = eval(center + dx)?;
    }

    let mut resk = fv[10] * WGK[10];
    let mut resg = Complex64::new(0.0, 0.0);
    let mut resabs = fv[10].norm() * WGK[10];
    for j in 0..10 {
        let pair = fv[j] + fv[20 - j];
        resk += pair * WGK[j];
        resabs += WGK[j] * (fv[j].norm() + fv[20 - j].norm());
        if j % 2 == 1 {
            resg += pair * WG[j / 2];
        }
    }
    let mean = resk * 0.5;
    let mut resasc = WGK[10] * (fv[10] - mean).norm();
    for j in 0..10 {
        resasc += WGK[j] * ((fv[j] - mean).norm() + (fv[20 - j] - mean).norm());
    }

    let abs_half = half.abs();
    let value = resk * half;
    resabs *= abs_half;
    resasc *= abs_half;
    let mut error = ((resk - resg) * half).norm();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    Ok(Panel {
        a,
        b,
        value,
        error,
        resabs,
    })
}

/// Globally adaptive 21-point Gauss–Kronrod integration of a complex
/// integrand over `[a, b]`.
///
/// Stops when the summed error estimate is at most
/// `max(abs_tol, rel_tol·|I|, 100ε·∫|f|)`; the last term is the roundoff
/// level below which the Kronrod estimate cannot fall. Returns [`QuadError::NonConvergence`] with
/// the best estimate when `max_subdivisions` is exhausted first.
pub fn integrate_adaptive<F>(
    f: F,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
) -> Result<Estimate, QuadError>
where
    F: Fn(f64) -> Complex64,
{
    integrate_adaptive_with_breaks(f, &[a, b], cfg)
}

/// Adaptive integration over `[points[0], points[last]]` with the interior
/// points used as initial panel boundaries. Points must be non-decreasing;
/// repeated points are skipped.
pub fn integrate_adaptive_with_breaks<F>(
    f: F,
    points: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Estimate, QuadError>
where
    F: Fn(f64) -> Complex64,
{
    let (&first, &last) = match (points.first(), points.last()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(QuadError::InvalidInterval { a: f64::NAN, b: f64::NAN }),
    };
    if !(first.is_finite() && last.is_finite()) || first > last {
        return Err(QuadError::InvalidInterval { a: first, b: last });
    }
    if points.windows(2).any(|w| w[1] < w[0]) {
        return Err(QuadError::InvalidInterval { a: first, b: last });
    }
    if first == last {
        return Ok(Estimate::zero());
    }

    let mut heap = BinaryHeap::new();
    let mut evaluations = 0usize;
    for w in points.windows(2) {
        if w[1] > w[0] {
            heap.push(qk21(&f, w[0], w[1])?);
            evaluations += 21;
        }
    }
    let scale = first.abs().max(last.abs());
    let min_width = 64.0 * f64::EPSILON * scale.max(f64::MIN_POSITIVE);

    let mut subdivisions = heap.len();
    let (mut value, mut error) = totals(&heap);
    let mut l1: f64 = heap.iter().map(|p| p.resabs).sum();
    loop {
        let tolerance = cfg.tolerance(value).max(ROUNDOFF_FLOOR * l1);
        if error <= tolerance {
            let (value, error) = totals(&heap);
            return Ok(Estimate {
                value,
                abs_error: error,
                evaluations,
            });
        }
        let worst = *heap.peek().expect("at least one panel");
        if subdivisions >= cfg.max_subdivisions || worst.b - worst.a <= min_width {
            let (value, error) = totals(&heap);
            return Err(QuadError::NonConvergence {
                estimate: value,
                abs_error: error,
                tolerance,
            });
        }
        heap.pop();
        let mid = 0.5 * (worst.a + worst.b);
        let left = qk21(&f, worst.a, mid)?;
        let right = qk21(&f, mid, worst.b)?;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        l1 += left.resabs + right.resabs - worst.resabs;
        if error < 0.0 {
            error = totals(&heap).1 + left.error + right.error;
        }
        heap.push(left);
        heap.push(right);
        evaluations += 42;
        subdivisions += 1;
    }
}

// Summation in position order keeps the result independent of heap layout.
fn totals(heap: &BinaryHeap<Panel>) -> (Complex64, f64) {
    let mut panels: Vec<&Panel> = heap.iter().collect();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    panels.iter().fold((Complex64::new(0.0, 0.0), 0.0), |(v, e), p| {
        (v + p.value, e + p.error)
    })
}
