use super::buffer::ImageBuffer;

/// Anisotropic total variation: sum of absolute forward differences in x and
/// y. The last column and row contribute zero forward difference.
pub fn total_variation(img: &ImageBuffer) -> f64 {
    let (w, h) = (img.width(), img.height());
    let d = img.data();
    let mut tv = 0.0;
    for y in 0..h {
        let row = &d[y * w..(y + 1) * w];
        for x in 0..w {
            if x + 1 < w {
                tv += (row[x + 1] - row[x]).abs();
            }
            if y + 1 < h {
                tv += (d[(y + 1) * w + x] - row[x]).abs();
            }
        }
    }
    tv
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::Domain;
    use proptest::prelude::*;

    #[test]
    fn constant_is_zero() {
        assert_eq!(
            total_variation(&ImageBuffer::filled(5, 4, 0.7, Domain::Linear)),
            0.0
        );
    }

    #[test]
    fn two_by_two_example() {
        let img = ImageBuffer::linear(2, 2, vec![0.0, 1.0, 0.0, 1.0]).unwrap();
        assert_eq!(total_variation(&img), 2.0);
    }

    proptest! {
        #[test]
        fn homogeneous(data in proptest::collection::vec(0.0f64..1.0, 20), alpha in 0.0f64..4.0) {
            let img = ImageBuffer::linear(5, 4, data).unwrap();
            let scaled = img.map(|v| alpha * v);
            let lhs = total_variation(&scaled);
            let rhs = alpha * total_variation(&img);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs));
        }

        #[test]
        fn triangle(a in proptest::collection::vec(-1.0f64..1.0, 20), b in proptest::collection::vec(-1.0f64..1.0, 20)) {
            let ia = ImageBuffer::linear(4, 5, a.clone()).unwrap();
            let ib = ImageBuffer::linear(4, 5, b.clone()).unwrap();
            let sum = ImageBuffer::linear(4, 5, a.iter().zip(&b).map(|(x, y)| x + y).collect()).unwrap();
            prop_assert!(total_variation(&sum) <= total_variation(&ia) + total_variation(&ib) + 1e-12);
        }
    }
}
