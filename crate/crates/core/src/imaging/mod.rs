//! Grayscale image buffers, log-domain transforms, edge maps, total
//! variation, quality metrics and PGM I/O.

mod buffer;
mod edges;
mod metrics;
mod pgm;
mod variation;

pub use buffer::{to_log_value, Domain, ImageBuffer, LOG_FLOOR};
pub use edges::{cross_correlation_score, otsu_binarize, sobel_edges, sobel_magnitude, EdgeMap};
pub use metrics::{mse, psnr, psnr_from_mse, ssim, Psnr};
pub use pgm::{decode_pgm, encode_pgm, quantize, read_pgm, write_pgm};
pub use variation::total_variation;
