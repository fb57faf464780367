//! Adaptive Gauss–Kronrod (7/15) quadrature with caller-supplied breakpoints.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Gauss weights for the nodes `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Upper limit on the number of subintervals kept by the adaptive driver.
const MAX_INTERVALS: usize = 4000;

/// `∫_a^b f(x) dx` to relative tolerance `tol`.
///
/// `breakpoints` lists interior points where `f` has kinks or jumps; those
/// outside `(a, b)` are ignored. The interval with the largest error estimate
/// is bisected until the summed Gauss/Kronrod error meets `tol` relative to
/// `∫|f|`, or the subinterval budget runs out.
pub fn integrate(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    tol: f64,
) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(Error::InvalidArgument(format!(
            "integration limits [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    let mut knots = vec![a];
    let mut inner: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&x| x > a && x < b)
        .collect();
    inner.sort_by(f64::total_cmp);
    knots.extend(inner);
    knots.push(b);

    let mut parts = Vec::with_capacity(64);
    for w in knots.windows(2) {
        parts.push(Piece::new(&f, w[0], w[1])?);
    }
    loop {
        let total_err: f64 = parts.iter().map(|p| p.err).sum();
        let scale: f64 = parts.iter().map(|p| p.abs).sum();
        if total_err <= tol * scale || parts.len() >= MAX_INTERVALS {
            break;
        }
        let (worst, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .expect("at least one piece");
        let p = parts.swap_remove(worst);
        let mid = 0.5 * (p.lo + p.hi);
        if mid <= p.lo || mid >= p.hi {
            // interval exhausted at machine precision
            parts.push(Piece { err: 0.0, ..p });
            continue;
        }
        parts.push(Piece::new(&f, p.lo, mid)?);
        parts.push(Piece::new(&f, mid, p.hi)?);
    }
    parts.sort_by(|x, y| x.lo.total_cmp(&y.lo));
    Ok(parts.iter().map(|p| p.value).sum())
}

/// `∫_a^b f(r) 2πr dr`: the integral of a radial profile over an annulus.
pub fn integrate_radial(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    tol: f64,
) -> Result<f64> {
    integrate(|r| f(r) * std::f64::consts::TAU * r, a, b, breakpoints, tol)
}

struct Piece {
    lo: f64,
    hi: f64,
    value: f64,
    err: f64,
    abs: f64,
}

impl Piece {
    fn new(f: &impl Fn(f64) -> f64, lo: f64, hi: f64) -> Result<Self> {
        let (k, g, abs) = kronrod(f, lo, hi)?;
        Ok(Piece {
            lo,
            hi,
            value: k,
            err: (k - g).abs(),
            abs,
        })
    }
}

/// Returns (Kronrod estimate, Gauss estimate, ∫|f| estimate) on `[a, b]`.
fn kronrod(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> Result<(f64, f64, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let eval = |x: f64| {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::Numeric(format!("integrand is {y} at {x}")))
        }
    };
    let fc = eval(c)?;
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    let mut abs = WGK[7] * fc.abs();
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = eval(c - dx)?;
        let f2 = eval(c + dx)?;
        k += WGK[j] * (f1 + f2);
        abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            g += WG[j / 2] * (f1 + f2);
        }
    }
    Ok((k * h, g * h, abs * h))
}
