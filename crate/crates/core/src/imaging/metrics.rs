//! Full-reference quality metrics on linear images with unit dynamic range.

use std::fmt;

use super::buffer::{Domain, ImageBuffer};
use crate::error::Result;

const SSIM_WINDOW: usize = 8;
const SSIM_C1: f64 = 0.01 * 0.01;
const SSIM_C2: f64 = 0.03 * 0.03;

/// Peak signal-to-noise ratio; identical inputs have no finite value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Psnr {
    Identical,
    Db(f64),
}

impl Psnr {
    /// Decibel value, with `Identical` mapped to positive infinity.
    pub fn db(self) -> f64 {
        match self {
            Psnr::Identical => f64::INFINITY,
            Psnr::Db(v) => v,
        }
    }
}

impl fmt::Display for Psnr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Psnr::Identical => f.write_str("identical"),
            Psnr::Db(v) => write!(f, "{v:.4}"),
        }
    }
}

pub fn mse(a: &ImageBuffer, b: &ImageBuffer) -> Result<f64> {
    a.check_same_size(b)?;
    a.expect_domain(Domain::Linear)?;
    b.expect_domain(Domain::Linear)?;
    let sum: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok(sum / a.len() as f64)
}

pub fn psnr_from_mse(mse: f64) -> Psnr {
    if mse == 0.0 {
        Psnr::Identical
    } else {
        Psnr::Db(10.0 * (1.0 / mse).log10())
    }
}

pub fn psnr(a: &ImageBuffer, b: &ImageBuffer) -> Result<Psnr> {
    Ok(psnr_from_mse(mse(a, b)?))
}

/// Mean SSIM over all 8x8 windows (stride 1, uniform weights, population
/// statistics). Images smaller than the window use a single window covering
/// the whole image.
pub fn ssim(a: &ImageBuffer, b: &ImageBuffer) -> Result<f64> {
    a.check_same_size(b)?;
    a.expect_domain(Domain::Linear)?;
    b.expect_domain(Domain::Linear)?;
    let (w, h) = (a.width(), a.height());
    let win_w = SSIM_WINDOW.min(w);
    let win_h = SSIM_WINDOW.min(h);
    let (da, db) = (a.data(), b.data());
    if da == db {
        return Ok(1.0);
    }
    let n = (win_w * win_h) as f64;
    let mut total = 0.0;
    let mut windows = 0usize;
    for y0 in 0..=h - win_h {
        for x0 in 0..=w - win_w {
            let (mut sa, mut sb, mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for y in y0..y0 + win_h {
                for x in x0..x0 + win_w {
                    let (p, q) = (da[y * w + x], db[y * w + x]);
                    sa += p;
                    sb += q;
                    saa += p * p;
                    sbb += q * q;
                    sab += p * q;
                }
            }
            let (ma, mb) = (sa / n, sb / n);
            let va = (saa / n - ma * ma).max(0.0);
            let vb = (sbb / n - mb * mb).max(0.0);
            let cov = sab / n - ma * mb;
            let s = ((2.0 * ma * mb + SSIM_C1) * (2.0 * cov + SSIM_C2))
                / ((ma * ma + mb * mb + SSIM_C1) * (va + vb + SSIM_C2));
            total += s;
            windows += 1;
        }
    }
    Ok(total / windows as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_images() {
        let a = ImageBuffer::from_fn(12, 10, Domain::Linear, |x, y| ((x * y) % 7) as f64 / 7.0);
        assert_eq!(psnr(&a, &a).unwrap(), Psnr::Identical);
        assert_eq!(ssim(&a, &a).unwrap(), 1.0);
        assert_eq!(Psnr::Identical.to_string(), "identical");
    }

    #[test]
    fn psnr_formula() {
        assert_eq!(psnr_from_mse(0.01), Psnr::Db(20.0));
        let a = ImageBuffer::filled(4, 4, 0.0, Domain::Linear);
        let b = ImageBuffer::filled(4, 4, 1.0, Domain::Linear);
        assert_eq!(mse(&a, &b).unwrap(), 1.0);
        assert_eq!(psnr(&a, &b).unwrap(), Psnr::Db(0.0));
    }

    #[test]
    fn ssim_bounded_and_drops_with_noise() {
        let a = ImageBuffer::from_fn(16, 16, Domain::Linear, |x, y| {
            ((x + 2 * y) % 9) as f64 / 9.0
        });
        let b = a.map(|v| (v * 0.5 + 0.2).min(1.0));
        let s = ssim(&a, &b).unwrap();
        assert!(s < 1.0 && s > -1.0, "{s}");
        let inverted = a.map(|v| 1.0 - v);
        assert!(ssim(&a, &inverted).unwrap() < 0.0);
    }

    #[test]
    fn mismatch_rejected() {
        let a = ImageBuffer::filled(4, 4, 0.0, Domain::Linear);
        let b = ImageBuffer::filled(4, 5, 0.0, Domain::Linear);
        assert!(psnr(&a, &b).is_err());
        assert!(ssim(&a, &b).is_err());
        assert!(psnr(&a, &a.to_log().unwrap()).is_err());
    }
}
