//! Error function after W. J. Cody's rational Chebyshev approximations
//! (ACM TOMS Algorithm 715, `CALERF`).

#![allow(clippy::excessive_precision)]

use crate::scalar::Real;

const THRESH: f64 = 0.46875;
const XBIG: f64 = 26.543;
const SQRPI: f64 = 5.641_895_835_477_562_869_5e-1;

const A: [f64; 5] = [
    3.161_123_743_870_565_6e0,
    1.138_641_541_510_501_56e2,
    3.774_852_376_853_020_21e2,
    3.209_377_589_138_469_47e3,
    1.857_777_061_846_031_53e-1,
];
const B: [f64; 4] = [
    2.360_129_095_234_412_09e1,
    2.440_246_379_344_441_73e2,
    1.282_616_526_077_372_28e3,
    2.844_236_833_439_170_62e3,
];
const C: [f64; 9] = [
    5.641_884_969_886_700_89e-1,
    8.883_149_794_388_375_94e0,
    6.611_919_063_714_162_95e1,
    2.986_351_381_974_001_31e2,
    8.819_522_212_417_690_9e2,
    1.712_047_612_634_070_58e3,
    2.051_078_377_826_071_47e3,
    1.230_339_354_797_997_25e3,
    2.153_115_354_744_038_46e-8,
];
const D: [f64; 8] = [
    1.574_492_611_070_983_47e1,
    1.176_939_508_913_124_99e2,
    5.371_811_018_620_098_58e2,
    1.621_389_574_566_690_19e3,
    3.290_799_235_733_459_63e3,
    4.362_619_090_143_247_16e3,
    3.439_367_674_143_721_64e3,
    1.230_339_354_803_749_42e3,
];
const P: [f64; 6] = [
    3.053_266_349_612_323_44e-1,
    3.603_448_999_498_044_39e-1,
    1.257_817_261_112_292_46e-1,
    1.608_378_514_874_227_66e-2,
    6.587_491_615_298_378_03e-4,
    1.631_538_713_730_209_78e-2,
];
const Q: [f64; 5] = [
    2.568_520_192_289_822_42e0,
    1.872_952_849_923_460_47e0,
    5.279_051_029_514_284_12e-1,
    6.051_834_131_244_131_91e-2,
    2.335_204_976_268_691_85e-3,
];

/// `exp(-y^2)` split as in Cody's code to avoid cancellation for large `y`.
fn exp_neg_sq<T: Real>(y: T) -> T {
    let sixteen = T::lit(16.0);
    let ysq = (y * sixteen).trunc() / sixteen;
    let del = (y - ysq) * (y + ysq);
    (-ysq * ysq).exp() * (-del).exp()
}

/// `erfc(|x|)` for `|x| > 0.46875`.
fn erfc_tail<T: Real>(y: T) -> T {
    let l = T::lit;
    if y <= l(4.0) {
        let mut num = l(C[8]) * y;
        let mut den = y;
        for i in 0..7 {
            num = (num + l(C[i])) * y;
            den = (den + l(D[i])) * y;
        }
        (num + l(C[7])) / (den + l(D[7])) * exp_neg_sq(y)
    } else if y >= l(XBIG) {
        T::zero()
    } else {
        let z = T::one() / (y * y);
        let mut num = l(P[5]) * z;
        let mut den = z;
        for i in 0..4 {
            num = (num + l(P[i])) * z;
            den = (den + l(Q[i])) * z;
        }
        let r = z * (num + l(P[4])) / (den + l(Q[4]));
        (l(SQRPI) - r) / y * exp_neg_sq(y)
    }
}

fn erf_small<T: Real>(x: T) -> T {
    let l = T::lit;
    let ysq = x * x;
    let mut num = l(A[4]) * ysq;
    let mut den = ysq;
    for i in 0..3 {
        num = (num + l(A[i])) * ysq;
        den = (den + l(B[i])) * ysq;
    }
    x * (num + l(A[3])) / (den + l(B[3]))
}

/// The error function `2/sqrt(pi) * int_0^x exp(-t^2) dt`.
pub fn erf<T: Real>(x: T) -> T {
    let y = x.abs();
    if y <= T::lit(THRESH) {
        return erf_small(x);
    }
    let r = (T::lit(0.5) - erfc_tail(y)) + T::lit(0.5);
    if x < T::zero() {
        -r
    } else {
        r
    }
}

/// The complementary error function `1 - erf(x)`, accurate in the upper tail.
pub fn erfc<T: Real>(x: T) -> T {
    let y = x.abs();
    if y <= T::lit(THRESH) {
        return T::one() - erf_small(x);
    }
    let r = erfc_tail(y);
    if x < T::zero() {
        T::lit(2.0) - r
    } else {
        r
    }
}

/// Standard normal CDF.
pub fn norm_cdf<T: Real>(z: T) -> T {
    T::lit(0.5) * erfc(-z / T::SQRT_2())
}
