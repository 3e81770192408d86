//! Multi-frame mEDI reconstruction.
//!
//! For frames `i = 1..n` at one pixel, with `a_i = ln J_i(c)` and
//! `b_i = c * E(f_i -> f_{i+1})`, the log latent values `x_i` satisfy
//!
//! ```text
//! x_i         = ln B_i - a_i      (data equations)
//! x_{i+1} - x_i = b_i             (event equations)
//! ```
//!
//! which are solved in the least-squares sense through their tridiagonal
//! normal equations.

mod ddouble;
mod tridiag;

use rayon::prelude::*;

pub use tridiag::{
    continuant, diagonal_pattern, fibonacci, solve_fibonacci_lu, solve_oracle, Solution,
    SolveRoute, TridiagonalSystem, MAX_FIBONACCI_FRAMES,
};

use crate::edi::{assemble_latent, relinearize, LatentFrame};
use crate::error::{Error, Result};
use crate::events::EventIndex;
use crate::frames::FrameRecord;
use crate::imaging::to_log_value;
use crate::integrals::{build_exposure_profile, log_double_integral, ExposureProfile};

/// Sliding window length used for long sequences.
pub const DEFAULT_WINDOW: usize = 5;

/// Per-pixel coefficients of the stacked system.
#[derive(Clone, Debug, PartialEq)]
pub struct MediCoefficients {
    /// `a_i = ln J_i(c)`, one per frame.
    pub a: Vec<f64>,
    /// `b_i = c * signed events between f_i and f_{i+1}`.
    pub b: Vec<f64>,
    /// Blurred log intensities.
    pub blurred_log: Vec<f64>,
}

impl MediCoefficients {
    pub fn n(&self) -> usize {
        self.a.len()
    }
}

/// Domain in which the re-blur residual is measured.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ResidualDomain {
    #[default]
    Log,
    Linear,
}

fn check_frames(frames: &[FrameRecord]) -> Result<()> {
    if frames.is_empty() {
        return Err(Error::Validation("mEDI needs at least one frame".into()));
    }
    if frames.windows(2).any(|w| w[1].center <= w[0].center) {
        return Err(Error::Validation(
            "frames must be strictly time ordered".into(),
        ));
    }
    Ok(())
}

pub fn assemble_coefficients(
    frames: &[FrameRecord],
    index: &EventIndex,
    (x, y): (usize, usize),
    c: f64,
) -> Result<MediCoefficients> {
    check_frames(frames)?;
    let a = frames
        .iter()
        .map(|fr| {
            log_double_integral(
                &build_exposure_profile(index, (x, y), fr.center, fr.exposure),
                c,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let b = frames
        .windows(2)
        .map(|w| c * index.events_between(x, y, w[0].center, w[1].center) as f64)
        .collect();
    let blurred_log = frames
        .iter()
        .map(|fr| to_log_value(fr.image.get(x, y)))
        .collect();
    Ok(MediCoefficients { a, b, blurred_log })
}

/// Right-hand side `Aᵀw` of the normal equations.
pub fn build_normal_system(coeffs: &MediCoefficients) -> TridiagonalSystem {
    let n = coeffs.n();
    let rhs = (0..n)
        .map(|i| {
            let mut r = coeffs.blurred_log[i] - coeffs.a[i];
            if i + 1 < n {
                r -= coeffs.b[i];
            }
            if i > 0 {
                r += coeffs.b[i - 1];
            }
            r
        })
        .collect();
    TridiagonalSystem::new(rhs)
}

/// Everything about a frame window that does not depend on `c`.
struct PixelData {
    profiles: Vec<ExposureProfile>,
    between: Vec<i64>,
}

/// Precomputed per-pixel profiles and inter-frame event counts for a set of
/// frames, evaluated repeatedly for different `c`.
pub struct MediProblem<'a> {
    frames: &'a [FrameRecord],
    pixels: Vec<PixelData>,
    blurred_log: Vec<Vec<f64>>,
    window: usize,
}

/// Reconstruction of every frame plus its residual energy.
struct Evaluation {
    // latent log value per frame, per pixel (frame-major)
    latent_log: Vec<Vec<f64>>,
    energy: f64,
}

impl<'a> MediProblem<'a> {
    /// `window` is the sliding window length; `0` or anything at least the
    /// frame count solves one system over all frames.
    pub fn new(frames: &'a [FrameRecord], index: &EventIndex, window: usize) -> Result<Self> {
        check_frames(frames)?;
        let res = frames[0].resolution();
        if let Some(bad) = frames.iter().find(|f| f.resolution() != res) {
            return Err(Error::DimensionMismatch {
                left_w: res.width,
                left_h: res.height,
                right_w: bad.image.width(),
                right_h: bad.image.height(),
            });
        }
        let w = res.width;
        let pixels = (0..res.pixel_count())
            .into_par_iter()
            .map(|p| {
                let (x, y) = (p % w, p / w);
                PixelData {
                    profiles: frames
                        .iter()
                        .map(|fr| build_exposure_profile(index, (x, y), fr.center, fr.exposure))
                        .collect(),
                    between: frames
                        .windows(2)
                        .map(|fw| index.events_between(x, y, fw[0].center, fw[1].center))
                        .collect(),
                }
            })
            .collect();
        let blurred_log = frames
            .iter()
            .map(|fr| fr.image.data().iter().map(|&v| to_log_value(v)).collect())
            .collect();
        let window = if window == 0 {
            frames.len()
        } else {
            window.min(frames.len())
        };
        Ok(Self {
            frames,
            pixels,
            blurred_log,
            window,
        })
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// First frame of the window that reconstructs frame `i`: the window
    /// centered on `i`, clamped to the sequence.
    fn window_start(&self, i: usize) -> usize {
        let n = self.frames.len();
        i.saturating_sub(self.window / 2).min(n - self.window)
    }

    /// Solves one pixel. Returns the latent log value of every frame and
    /// the pixel's residual energy.
    fn solve_pixel(&self, p: usize, c: f64, domain: ResidualDomain) -> Result<(Vec<f64>, f64)> {
        let n = self.frames.len();
        let px = &self.pixels[p];
        let a = px
            .profiles
            .iter()
            .map(|prof| log_double_integral(prof, c))
            .collect::<Result<Vec<_>>>()?;
        let b: Vec<f64> = px.between.iter().map(|&k| c * k as f64).collect();
        let blog: Vec<f64> = (0..n).map(|i| self.blurred_log[i][p]).collect();
        let mut latent = vec![0.0; n];
        let mut energy = 0.0;
        let mut last_start = usize::MAX;
        let mut solution = Vec::new();
        for (i, slot) in latent.iter_mut().enumerate() {
            let s = self.window_start(i);
            if s != last_start {
                let e = s + self.window;
                let coeffs = MediCoefficients {
                    a: a[s..e].to_vec(),
                    b: b[s..e - 1].to_vec(),
                    blurred_log: blog[s..e].to_vec(),
                };
                solution = solve_fibonacci_lu(&build_normal_system(&coeffs)).x;
                last_start = s;
            }
            *slot = solution[i - s];
            let reblurred = *slot + a[i];
            energy += match domain {
                ResidualDomain::Log => (reblurred - blog[i]).powi(2),
                ResidualDomain::Linear => {
                    (reblurred.exp() - self.frames[i].image.data()[p]).powi(2)
                }
            };
        }
        Ok((latent, energy))
    }

    fn evaluate(&self, c: f64, domain: ResidualDomain) -> Result<Evaluation> {
        let per_pixel = (0..self.pixels.len())
            .into_par_iter()
            .map(|p| self.solve_pixel(p, c, domain))
            .collect::<Result<Vec<_>>>()?;
        let n = self.frames.len();
        let mut latent_log = vec![Vec::with_capacity(per_pixel.len()); n];
        // summed in pixel order so the result does not depend on threading
        let mut energy = 0.0;
        for (values, e) in per_pixel {
            for (i, v) in values.into_iter().enumerate() {
                latent_log[i].push(v);
            }
            energy += e;
        }
        Ok(Evaluation { latent_log, energy })
    }

    /// Re-blur residual `sum_{pixels, i} (x_i + a_i - ln B_i)^2`.
    pub fn energy(&self, c: f64, domain: ResidualDomain) -> Result<f64> {
        Ok(self.evaluate(c, domain)?.energy)
    }

    pub fn reconstruct(&self, c: f64) -> Result<Vec<LatentFrame>> {
        let eval = self.evaluate(c, ResidualDomain::Log)?;
        Ok(eval
            .latent_log
            .into_iter()
            .zip(self.frames)
            .zip(&self.blurred_log)
            .map(|((log_values, fr), blog)| {
                let linear = log_values
                    .iter()
                    .zip(fr.image.data())
                    .zip(blog)
                    .map(|((&l, &b), &bl)| relinearize(b, bl, l))
                    .collect();
                assemble_latent(
                    fr.center,
                    c,
                    fr.image.width(),
                    fr.image.height(),
                    log_values,
                    linear,
                )
            })
            .collect())
    }
}

/// Reconstructs every frame from one system spanning all of them.
pub fn medi_reconstruct(
    frames: &[FrameRecord],
    index: &EventIndex,
    c: f64,
) -> Result<Vec<LatentFrame>> {
    MediProblem::new(frames, index, 0)?.reconstruct(c)
}

/// Log-domain re-blur residual of the full-sequence system.
pub fn medi_energy(frames: &[FrameRecord], index: &EventIndex, c: f64) -> Result<f64> {
    MediProblem::new(frames, index, 0)?.energy(c, ResidualDomain::Log)
}
