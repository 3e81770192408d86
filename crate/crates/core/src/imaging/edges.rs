use super::buffer::ImageBuffer;
use crate::error::{Error, Result};

const OTSU_BINS: usize = 256;

/// Binary edge mask.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeMap {
    width: usize,
    height: usize,
    mask: Vec<u8>,
}

impl EdgeMap {
    pub fn new(width: usize, height: usize, mask: Vec<u8>) -> Result<Self> {
        if mask.len() != width * height {
            return Err(Error::Validation(format!(
                "mask of {} entries does not match {width}x{height}",
                mask.len()
            )));
        }
        if mask.iter().any(|&m| m > 1) {
            return Err(Error::Validation("edge mask entries must be 0 or 1".into()));
        }
        Ok(Self {
            width,
            height,
            mask,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn mask(&self) -> &[u8] {
        &self.mask
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.mask[y * self.width + x]
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&m| m == 1).count()
    }
}

/// Sobel gradient magnitude with replicate-padded borders.
pub fn sobel_magnitude(img: &ImageBuffer) -> Result<Vec<f64>> {
    let (w, h) = (img.width(), img.height());
    if w < 3 || h < 3 {
        return Err(Error::Validation(format!(
            "image {w}x{h} is smaller than the 3x3 Sobel kernel"
        )));
    }
    let px = |x: isize, y: isize| {
        let xc = x.clamp(0, w as isize - 1) as usize;
        let yc = y.clamp(0, h as isize - 1) as usize;
        img.get(xc, yc)
    };
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let gx = (px(x + 1, y - 1) + 2.0 * px(x + 1, y) + px(x + 1, y + 1))
                - (px(x - 1, y - 1) + 2.0 * px(x - 1, y) + px(x - 1, y + 1));
            let gy = (px(x - 1, y + 1) + 2.0 * px(x, y + 1) + px(x + 1, y + 1))
                - (px(x - 1, y - 1) + 2.0 * px(x, y - 1) + px(x + 1, y - 1));
            out.push((gx * gx + gy * gy).sqrt());
        }
    }
    Ok(out)
}

/// Otsu threshold over a 256-bin histogram spanning `[0, max]`.
///
/// Returns the index of the last bin of the background class, or `None`
/// when every value is zero (nothing to separate).
fn otsu_bin(values: &[f64]) -> Option<(usize, f64)> {
    let max = values.iter().cloned().fold(0.0f64, f64::max);
    if !(max > 0.0) {
        return None;
    }
    let bin_of = |v: f64| (((v / max) * OTSU_BINS as f64) as usize).min(OTSU_BINS - 1);
    let mut hist = [0u64; OTSU_BINS];
    for &v in values {
        hist[bin_of(v.max(0.0))] += 1;
    }
    let total = values.len() as f64;
    let sum_all: f64 = hist
        .iter()
        .enumerate()
        .map(|(i, &c)| i as f64 * c as f64)
        .sum();
    let (mut w0, mut sum0) = (0.0, 0.0);
    let mut best = (0usize, -1.0f64);
    for (k, &count) in hist.iter().enumerate().take(OTSU_BINS - 1) {
        w0 += count as f64;
        sum0 += k as f64 * count as f64;
        let w1 = total - w0;
        if w0 == 0.0 || w1 == 0.0 {
            continue;
        }
        let mu0 = sum0 / w0;
        let mu1 = (sum_all - sum0) / w1;
        let between = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        if between > best.1 {
            best = (k, between);
        }
    }
    if best.1 < 0.0 {
        // single occupied bin
        return None;
    }
    Some((best.0, max))
}

/// Binarizes non-negative magnitudes with Otsu's threshold.
pub fn otsu_binarize(width: usize, height: usize, magnitudes: &[f64]) -> Result<EdgeMap> {
    let mask = match otsu_bin(magnitudes) {
        None => vec![0; magnitudes.len()],
        Some((k, max)) => magnitudes
            .iter()
            .map(|&v| {
                let bin = (((v.max(0.0) / max) * OTSU_BINS as f64) as usize).min(OTSU_BINS - 1);
                u8::from(bin > k)
            })
            .collect(),
    };
    EdgeMap::new(width, height, mask)
}

/// Sobel magnitude binarized by Otsu's threshold.
pub fn sobel_edges(img: &ImageBuffer) -> Result<EdgeMap> {
    let mag = sobel_magnitude(img)?;
    otsu_binarize(img.width(), img.height(), &mag)
}

/// Number of pixels set in both masks.
pub fn cross_correlation_score(a: &EdgeMap, b: &EdgeMap) -> Result<f64> {
    if a.width != b.width || a.height != b.height {
        return Err(Error::DimensionMismatch {
            left_w: a.width,
            left_h: a.height,
            right_w: b.width,
            right_h: b.height,
        });
    }
    let hits = a
        .mask
        .iter()
        .zip(&b.mask)
        .filter(|(&p, &q)| p == 1 && q == 1)
        .count();
    Ok(hits as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::Domain;
    use proptest::prelude::*;

    fn step_image(w: usize, h: usize, k: usize) -> ImageBuffer {
        ImageBuffer::from_fn(w, h, Domain::Linear, |x, _| if x >= k { 1.0 } else { 0.0 })
    }

    #[test]
    fn constant_image_has_no_edges() {
        let img = ImageBuffer::filled(9, 7, 0.4, Domain::Linear);
        assert_eq!(sobel_edges(&img).unwrap().count(), 0);
    }

    #[test]
    fn vertical_step_marks_two_columns() {
        let (w, h, k) = (10, 8, 4);
        let edges = sobel_edges(&step_image(w, h, k)).unwrap();
        for y in 1..h - 1 {
            for x in 0..w {
                let expected = u8::from(x == k - 1 || x == k);
                assert_eq!(edges.get(x, y), expected, "({x}, {y})");
            }
        }
    }

    #[test]
    fn step_magnitude_matches_hand_convolution() {
        // columns k-1 and k see 1+2+1 = 4 on the right and 0 on the left
        let mag = sobel_magnitude(&step_image(6, 5, 3)).unwrap();
        assert_eq!(mag[2 * 6 + 2], 4.0);
        assert_eq!(mag[2 * 6 + 3], 4.0);
        assert_eq!(mag[2 * 6 + 1], 0.0);
        assert_eq!(mag[2 * 6 + 4], 0.0);
    }

    #[test]
    fn too_small_rejected() {
        let img = ImageBuffer::filled(2, 5, 0.0, Domain::Linear);
        assert!(sobel_edges(&img).is_err());
    }

    #[test]
    fn correlation_examples() {
        let a = EdgeMap::new(2, 2, vec![1, 0, 1, 1]).unwrap();
        let b = EdgeMap::new(2, 2, vec![0, 1, 0, 0]).unwrap();
        assert_eq!(cross_correlation_score(&a, &a).unwrap(), 3.0);
        assert_eq!(cross_correlation_score(&a, &b).unwrap(), 0.0);
        let c = EdgeMap::new(1, 4, vec![1, 0, 1, 1]).unwrap();
        assert!(cross_correlation_score(&a, &c).is_err());
        assert!(EdgeMap::new(1, 1, vec![2]).is_err());
    }

    proptest! {
        #[test]
        fn masks_are_binary_and_offset_invariant(
            data in proptest::collection::vec(0.0f64..0.5, 36),
            offset in 0.0f64..0.5,
        ) {
            let img = ImageBuffer::linear(6, 6, data).unwrap();
            let e = sobel_edges(&img).unwrap();
            prop_assert!(e.mask().iter().all(|&m| m <= 1));
            let shifted = sobel_edges(&img.map(|v| v + offset)).unwrap();
            // offsets cancel in the kernels up to rounding; compare magnitudes too
            let m0 = sobel_magnitude(&img).unwrap();
            let m1 = sobel_magnitude(&img.map(|v| v + offset)).unwrap();
            let exact = m0.iter().zip(&m1).all(|(a, b)| a == b);
            if exact {
                prop_assert_eq!(e, shifted);
            }
        }

        #[test]
        fn correlation_symmetric(a in proptest::collection::vec(0u8..2, 30), b in proptest::collection::vec(0u8..2, 30)) {
            let a = EdgeMap::new(5, 6, a).unwrap();
            let b = EdgeMap::new(5, 6, b).unwrap();
            prop_assert_eq!(cross_correlation_score(&a, &b).unwrap(), cross_correlation_score(&b, &a).unwrap());
        }
    }

    #[test]
    fn offset_invariance_on_dyadic_image() {
        // dyadic samples keep the kernel sums exact
        let img = ImageBuffer::from_fn(8, 8, Domain::Linear, |x, y| {
            ((x * 3 + y * 5) % 7) as f64 / 16.0
        });
        let shifted = img.map(|v| v + 0.25);
        assert_eq!(sobel_edges(&img).unwrap(), sobel_edges(&shifted).unwrap());
    }
}
