//! Normal distribution helpers for inverse-CDF sampling.

use rand::distributions::Open01;
use rand::Rng;

pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Quantile function of the standard normal distribution
/// (Wichura's AS 241, accurate to about 1e-16).
#[allow(clippy::inconsistent_digit_grouping)]
pub fn inverse_normal_cdf(p: f64) -> f64 {
    if p.is_nan() || p <= 0.0 || p >= 1.0 {
        return if p == 0.0 {
            f64::NEG_INFINITY
        } else if p == 1.0 {
            f64::INFINITY
        } else {
            f64::NAN
        };
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q
            * (((((((r * 2509.080_928_730_122_7 + 33_430.575_583_588_13) * r
                + 67_265.770_927_008_7)
                * r
                + 45_921.953_931_549_87)
                * r
                + 13_731.693_765_509_46)
                * r
                + 1971.590_950_306_551_3)
                * r
                + 133.141_667_891_784_38)
                * r
                + 3.387_132_872_796_366_5)
            / (((((((r * 5_226.495_278_852_545 + 28729.085_735_721_942) * r
                + 39_307.895_800_092_71)
                * r
                + 21213.794_301_586_595)
                * r
                + 5_394.196_021_424_751)
                * r
                + 687.187_007_492_057_9)
                * r
                + 42.313_330_701_600_91)
                * r
                + 1.0);
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = libm::sqrt(-libm::log(tail));
    let value = if r <= 5.0 {
        r -= 1.6;
        (((((((r * 7.745_450_142_783_414e-4 + 0.022_723_844_989_269_184) * r
            + 0.241_780_725_177_450_6)
            * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_5)
            * r
            + 5.769_497_221_460_691)
            * r
            + 4.630_337_846_156_546)
            * r
            + 1.423_437_110_749_683_5)
            / (((((((r * 1.050_750_071_644_416_9e-9 + 5.475_938_084_995_344e-4) * r
                + 0.015_198_666_563_616_457)
                * r
                + 0.148_103_976_427_480_07)
                * r
                + 0.689_767_334_985_1)
                * r
                + 1.676_384_830_183_803_8)
                * r
                + 2.053_191_626_637_759)
                * r
                + 1.0)
    } else {
        r -= 5.0;
        (((((((r * 2.010_334_399_292_288_1e-7 + 2.711_555_568_743_487_6e-5) * r
            + 0.001_242_660_947_388_078_4)
            * r
            + 0.026_532_189_526_576_123)
            * r
            + 0.296_560_571_828_504_89)
            * r
            + 1.784_826_539_917_291_3)
            * r
            + 5.463_784_911_164_114)
            * r
            + 6.657_904_643_501_104)
            / (((((((r * 2.044_263_103_389_939_7e-15 + 1.421_511_758_316_446e-7) * r
                + 1.846_318_317_510_054_8e-5)
                * r
                + 7.868_691_311_456_133e-4)
                * r
                + 0.014_875_361_290_850_615)
                * r
                + 0.136_929_880_922_735_8)
                * r
                + 0.599_832_206_555_888)
                * r
                + 1.0)
    };
    if q < 0.0 {
        -value
    } else {
        value
    }
}

/// Draws from `Normal(mu, sigma)` by inverting a uniform draw on (0, 1).
pub fn sample_normal<R: Rng + ?Sized>(rng: &mut R, mu: f64, sigma: f64) -> f64 {
    let u: f64 = rng.sample(Open01);
    mu + sigma * inverse_normal_cdf(u)
}

/// `ln N(x; mu, sigma)`.
pub fn log_pdf(x: f64, mu: f64, sigma: f64) -> f64 {
    let z = (x - mu) / sigma;
    -0.5 * z * z - libm::log(sigma) - LN_SQRT_2PI
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ContinuousCDF, Normal};

    #[test]
    fn quantiles_match_reference() {
        let reference = Normal::new(0.0, 1.0).unwrap();
        for &p in &[1e-300, 1e-12, 1e-6, 0.001, 0.02425, 0.1, 0.3, 0.5, 0.7, 0.9, 0.975, 0.999999, 1.0 - 1e-12] {
            let ours = inverse_normal_cdf(p);
            let theirs = reference.inverse_cdf(p);
            assert!((ours - theirs).abs() <= 1e-9 * theirs.abs().max(1.0), "p={p}: {ours} vs {theirs}");
            // round trip through the forward cdf
            assert!((reference.cdf(ours) - p).abs() <= 1e-12_f64.max(p * 1e-9), "p={p}");
        }
        assert_eq!(inverse_normal_cdf(0.5), 0.0);
        assert!(inverse_normal_cdf(0.0).is_infinite());
        assert!(inverse_normal_cdf(1.5).is_nan());
    }

    #[test]
    fn log_pdf_at_mode() {
        assert!((log_pdf(0.0, 0.0, 1.0) + LN_SQRT_2PI).abs() < 1e-15);
        assert!((LN_SQRT_2PI - 0.5 * libm::log(2.0 * core::f64::consts::PI)).abs() < 1e-15);
    }
}
