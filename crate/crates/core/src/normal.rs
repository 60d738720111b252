#![allow(clippy::excessive_precision)]

//! Standard normal density, distribution and quantile functions.
//!
//! The distribution function follows Cody's rational Chebyshev approximations
//! (the same scheme used by R's `pnorm`), which keep full relative accuracy in
//! the lower tail down to underflow. The quantile starts from Wichura's AS241
//! approximation and takes one Halley step against [`cdf`].
//!
//! Infinite arguments follow the extended-real conventions
//! `cdf(-inf) = 0`, `cdf(inf) = 1`, `quantile(0) = -inf`, `quantile(1) = inf`.

use crate::error::{Error, Result};

/// `1 / sqrt(2 pi)`
pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_677_939_946_059_934;
const SQRT_32: f64 = 5.656_854_249_492_380_195_206_754_896_838;

/// Standard normal density.
pub fn pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Natural log of the standard normal density.
pub fn ln_pdf(x: f64) -> f64 {
    -0.5 * x * x - 0.918_938_533_204_672_741_780_329_736_406
}

const A: [f64; 5] = [
    2.235_252_035_460_683_928_7,
    161.028_231_068_555_878_81,
    1_067.689_485_460_370_958_2,
    18_154.981_253_343_561_249,
    0.065_682_337_918_207_449_113,
];
const B: [f64; 4] = [
    47.202_581_904_688_241_87,
    976.098_551_737_776_693_22,
    10_260.932_208_618_978_205,
    45_507.789_335_026_729_956,
];
const C: [f64; 9] = [
    0.398_941_512_088_134_667_64,
    8.883_149_794_388_375_941_2,
    93.506_656_132_177_855_979,
    597.270_276_394_800_262_26,
    2_494.537_585_290_372_671_1,
    6_848.190_450_536_282_332_6,
    11_602.651_437_647_350_124,
    9_842.714_838_383_978_021_8,
    1.076_557_677_372_019_231_7e-8,
];
const D: [f64; 8] = [
    22.266_688_044_328_115_691,
    235.387_901_782_624_998_61,
    1_519.377_599_407_554_805,
    6_485.558_298_266_760_755,
    18_615.571_640_885_098_091,
    34_900.952_721_145_977_266,
    38_912.003_286_093_271_411,
    19_685.429_676_859_990_727,
];
const P: [f64; 6] = [
    0.215_898_534_057_956_99,
    0.127_401_161_160_247_363_9,
    0.022_235_277_870_649_807,
    0.001_421_619_193_227_893_466,
    2.911_287_495_116_879_2e-5,
    0.023_073_441_764_940_173_03,
];
const Q: [f64; 5] = [
    1.284_260_096_144_911_21,
    0.468_238_212_480_865_118,
    0.065_988_137_868_928_551_5,
    0.003_782_396_332_027_582_44,
    7.297_515_550_839_662_05e-5,
];

/// Returns `(cdf(x), cdf(-x))`, each with full relative accuracy.
fn both_tails(x: f64) -> (f64, f64) {
    if x.is_nan() {
        return (f64::NAN, f64::NAN);
    }
    if x == f64::INFINITY {
        return (1.0, 0.0);
    }
    if x == f64::NEG_INFINITY {
        return (0.0, 1.0);
    }

    let y = x.abs();
    if y <= 0.674_489_75 {
        let xsq = if y > f64::EPSILON * 0.5 { x * x } else { 0.0 };
        let mut xnum = A[4] * xsq;
        let mut xden = xsq;
        for i in 0..3 {
            xnum = (xnum + A[i]) * xsq;
            xden = (xden + B[i]) * xsq;
        }
        let temp = x * (xnum + A[3]) / (xden + B[3]);
        return (0.5 + temp, 0.5 - temp);
    }

    let tail = if y <= SQRT_32 {
        let mut xnum = C[8] * y;
        let mut xden = y;
        for i in 0..7 {
            xnum = (xnum + C[i]) * y;
            xden = (xden + D[i]) * y;
        }
        let temp = (xnum + C[7]) / (xden + D[7]);
        split_exp(y) * temp
    } else {
        let xsq = 1.0 / (y * y);
        let mut xnum = P[5] * xsq;
        let mut xden = xsq;
        for i in 0..4 {
            xnum = (xnum + P[i]) * xsq;
            xden = (xden + Q[i]) * xsq;
        }
        let temp = xsq * (xnum + P[4]) / (xden + Q[4]);
        let temp = (FRAC_1_SQRT_2PI - temp) / y;
        split_exp(y) * temp
    };

    if x > 0.0 {
        (1.0 - tail, tail)
    } else {
        (tail, 1.0 - tail)
    }
}

/// `exp(-y^2/2)` evaluated in two pieces so the rounding of `y*y` does not
/// leak into the tail probability.
fn split_exp(y: f64) -> f64 {
    let head = (y * 16.0).trunc() / 16.0;
    let del = (y - head) * (y + head);
    (-head * head * 0.5).exp() * (-del * 0.5).exp()
}

/// Standard normal distribution function `Pr(Z <= x)`.
pub fn cdf(x: f64) -> f64 {
    both_tails(x).0
}

/// Upper tail `Pr(Z > x) = cdf(-x)`.
pub fn sf(x: f64) -> f64 {
    both_tails(x).1
}

// Wichura AS241 (PPND16).
const QN_CENTRAL: [f64; 15] = [
    3.387_132_872_796_366_608_0,
    1.331_416_678_917_843_774_5e2,
    1.971_590_950_306_551_442_7e3,
    1.373_169_376_550_946_112_5e4,
    4.592_195_393_154_987_145_7e4,
    6.726_577_092_700_870_085_3e4,
    3.343_057_558_358_812_810_5e4,
    2.509_080_928_730_122_672_7e3,
    4.231_333_070_160_091_125_2e1,
    6.871_870_074_920_579_083_0e2,
    5.394_196_021_424_751_107_7e3,
    2.121_379_430_158_659_586_7e4,
    3.930_789_580_009_271_061_0e4,
    2.872_908_573_572_194_267_4e4,
    5.226_495_278_852_854_561_0e3,
];
const QN_INTERMEDIATE: [f64; 15] = [
    1.423_437_110_749_683_577_34,
    4.630_337_846_156_545_295_90,
    5.769_497_221_460_691_405_50,
    3.647_848_324_763_204_605_04,
    1.270_458_252_452_368_382_58,
    2.417_807_251_774_506_117_70e-1,
    2.272_384_498_926_918_458_33e-2,
    7.745_450_142_783_414_076_40e-4,
    2.053_191_626_637_758_821_87,
    1.676_384_830_183_803_849_40,
    6.897_673_349_851_000_045_50e-1,
    1.481_039_764_274_800_745_90e-1,
    1.519_866_656_361_645_719_66e-2,
    5.475_938_084_995_344_946_00e-4,
    1.050_750_071_644_416_843_24e-9,
];
const QN_TAIL: [f64; 15] = [
    6.657_904_643_501_103_777_20,
    5.463_784_911_164_114_369_90,
    1.784_826_539_917_291_335_80,
    2.965_605_718_285_048_912_30e-1,
    2.653_218_952_657_612_309_30e-2,
    1.242_660_947_388_078_438_60e-3,
    2.711_555_568_743_487_578_15e-5,
    2.010_334_399_292_288_132_65e-7,
    5.998_322_065_558_879_376_90e-1,
    1.369_298_809_227_358_053_10e-1,
    1.487_536_129_085_061_485_25e-2,
    7.868_691_311_456_132_591_00e-4,
    1.846_318_317_510_054_681_80e-5,
    1.421_511_758_316_445_888_70e-7,
    2.044_263_103_389_939_785_64e-15,
];

fn ratio(z: f64, v: &[f64; 15]) -> f64 {
    let num = ((((((v[7] * z + v[6]) * z + v[5]) * z + v[4]) * z + v[3]) * z + v[2]) * z + v[1])
        * z
        + v[0];
    let den = ((((((v[14] * z + v[13]) * z + v[12]) * z + v[11]) * z + v[10]) * z + v[9]) * z
        + v[8])
        * z
        + 1.0;
    num / den
}

/// AS241 estimate of the lower-tail quantile for `0 < p <= 0.5`.
fn as241_lower(p: f64) -> f64 {
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        return q * ratio(0.180_625 - q * q, &QN_CENTRAL);
    }
    let r = (-p.ln()).sqrt();
    let z = if r <= 5.0 {
        ratio(r - 1.6, &QN_INTERMEDIATE)
    } else {
        ratio(r - 5.0, &QN_TAIL)
    };
    -z
}

/// Lower-tail quantile for `0 < p <= 0.5`, refined by one Halley step.
fn lower_quantile(p: f64) -> f64 {
    let x = as241_lower(p);
    let density = pdf(x);
    if density == 0.0 || !density.is_finite() {
        return x;
    }
    let u = (cdf(x) - p) / density;
    x - u / (1.0 + 0.5 * x * u)
}

/// Standard normal quantile function.
///
/// Returns a domain error for `p` outside `[0, 1]` (including NaN).
pub fn quantile(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!(
            "normal quantile needs p in [0, 1], got {p}"
        )));
    }
    Ok(quantile_unchecked(p))
}

/// [`quantile`] for callers that have already validated `p`; values outside
/// `[0, 1]` are clamped.
pub(crate) fn quantile_unchecked(p: f64) -> f64 {
    if p <= 0.0 {
        f64::NEG_INFINITY
    } else if p >= 1.0 {
        f64::INFINITY
    } else if p <= 0.5 {
        lower_quantile(p)
    } else {
        // 1 - p is exact here.
        -lower_quantile(1.0 - p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_values() {
        assert_eq!(pdf(0.0), FRAC_1_SQRT_2PI);
        assert!((pdf(1.0) - 0.241_970_724_519_143_37).abs() < 1e-16);
        assert_eq!(pdf(-1.0), pdf(1.0));
        assert!((ln_pdf(1.3) - pdf(1.3).ln()).abs() < 1e-15);
    }

    #[test]
    fn cdf_values() {
        assert_eq!(cdf(0.0), 0.5);
        assert_eq!(cdf(f64::INFINITY), 1.0);
        assert_eq!(cdf(f64::NEG_INFINITY), 0.0);
        assert!((cdf(1.96) - 0.975_002_104_851_779_5).abs() < 1e-15);
        assert!(cdf(f64::NAN).is_nan());
        assert_eq!(sf(f64::INFINITY), 0.0);
    }

    #[test]
    fn quantile_values() {
        assert_eq!(quantile(0.5).unwrap(), 0.0);
        assert_eq!(quantile(1.0).unwrap(), f64::INFINITY);
        assert_eq!(quantile(0.0).unwrap(), f64::NEG_INFINITY);
        assert!((quantile(0.975).unwrap() - 1.959_963_984_540_054).abs() < 1e-13);
        assert!(matches!(quantile(1.5), Err(Error::Domain(_))));
        assert!(matches!(quantile(-0.1), Err(Error::Domain(_))));
        assert!(quantile(f64::NAN).is_err());
    }

    #[test]
    fn extreme_lower_tail_round_trips() {
        for &p in &[1e-300, 1e-200, 1e-100, 1e-30, 1e-16] {
            let x = quantile(p).unwrap();
            assert!(((cdf(x) - p) / p).abs() < 1e-12, "p={p}");
        }
        // Subnormal probabilities still give a finite quantile.
        assert!(quantile(5e-324).unwrap().is_finite());
    }
}
