//! Energies minimized over the contrast threshold `c`.

use crate::edi::{EdiProblem, LatentFrame};
use crate::error::Result;
use crate::events::EventIndex;
use crate::frames::FrameRecord;
use crate::imaging::{
    cross_correlation_score, otsu_binarize, sobel_edges, total_variation, EdgeMap,
};
use crate::integrals::event_sum_signal;
use crate::medi::{MediProblem, ResidualDomain};

use super::search::{grid_search, EnergyTrace};

pub const DEFAULT_LAMBDA: f64 = -1.0;

/// Default decay rate of the event edge signal: `2 / T`.
pub fn default_decay(exposure: f64) -> f64 {
    2.0 / exposure
}

/// Regularized single-frame energy
/// `TV(L(c)) / P + lambda * edge_overlap(L(c), M) / P`, where the event edge
/// map is the Otsu-binarized `|M|` image of exponentially weighted event sums.
pub struct EdiEnergy<'a> {
    problem: EdiProblem<'a>,
    event_edges: EdgeMap,
    lambda: f64,
}

/// One evaluated energy with its two terms.
#[derive(Clone, Debug, PartialEq)]
pub struct EdiEnergyTerms {
    pub tv: f64,
    pub edge: f64,
    pub energy: f64,
}

impl<'a> EdiEnergy<'a> {
    pub fn new(
        frame: &'a FrameRecord,
        index: &EventIndex,
        lambda: f64,
        decay: f64,
    ) -> Result<Self> {
        if lambda > 0.0 {
            log::warn!("lambda = {lambda} rewards edge mismatch; expected lambda <= 0");
        }
        let (w, h) = (frame.image.width(), frame.image.height());
        let m_abs: Vec<f64> = (0..w * h)
            .map(|p| {
                event_sum_signal(index, (p % w, p / w), frame.center, frame.exposure, decay).abs()
            })
            .collect();
        let event_edges = otsu_binarize(w, h, &m_abs)?;
        Ok(Self {
            problem: EdiProblem::new(frame, index),
            event_edges,
            lambda,
        })
    }

    pub fn event_edges(&self) -> &EdgeMap {
        &self.event_edges
    }

    pub fn problem(&self) -> &EdiProblem<'a> {
        &self.problem
    }

    pub fn terms(&self, c: f64) -> Result<(EdiEnergyTerms, LatentFrame)> {
        let latent = self.problem.deblur(c)?;
        let p = latent.image.len() as f64;
        let tv = total_variation(&latent.image) / p;
        let edge = cross_correlation_score(&sobel_edges(&latent.image)?, &self.event_edges)? / p;
        Ok((
            EdiEnergyTerms {
                tv,
                edge,
                energy: tv + self.lambda * edge,
            },
            latent,
        ))
    }

    pub fn evaluate(&self, c: f64) -> Result<f64> {
        Ok(self.terms(c)?.0.energy)
    }
}

pub fn edi_energy(
    frame: &FrameRecord,
    index: &EventIndex,
    c: f64,
    lambda: f64,
    decay: f64,
) -> Result<f64> {
    EdiEnergy::new(frame, index, lambda, decay)?.evaluate(c)
}

/// Re-blur residual energy of a windowed mEDI problem.
pub struct MediEnergy<'a> {
    problem: MediProblem<'a>,
    domain: ResidualDomain,
}

impl<'a> MediEnergy<'a> {
    pub fn new(problem: MediProblem<'a>, domain: ResidualDomain) -> Self {
        Self { problem, domain }
    }

    pub fn problem(&self) -> &MediProblem<'a> {
        &self.problem
    }

    pub fn evaluate(&self, c: f64) -> Result<f64> {
        self.problem.energy(c, self.domain)
    }
}

/// Evaluates `f` on every grid point, keeping the preview frame each
/// evaluation produces.
pub fn sweep_c<F>(grid: &[f64], mut f: F) -> Result<(EnergyTrace, Vec<LatentFrame>)>
where
    F: FnMut(f64) -> Result<(f64, LatentFrame)>,
{
    let mut previews = Vec::with_capacity(grid.len());
    let trace = grid_search(
        |c| {
            let (e, frame) = f(c)?;
            previews.push(frame);
            Ok(e)
        },
        grid,
    )?;
    Ok((trace, previews))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::Resolution;
    use crate::imaging::ImageBuffer;

    #[test]
    fn zero_events_give_flat_tv_energy() {
        let img = ImageBuffer::from_fn(6, 5, crate::imaging::Domain::Linear, |x, y| {
            0.1 + 0.1 * ((x + y) % 3) as f64
        });
        let tv = total_variation(&img) / 30.0;
        let frame = FrameRecord::new(1.0, 0.1, img).unwrap();
        let idx = EventIndex::empty(Resolution::new(6, 5));
        let energy = EdiEnergy::new(&frame, &idx, DEFAULT_LAMBDA, default_decay(0.1)).unwrap();
        assert_eq!(energy.event_edges().count(), 0);
        for c in [0.05, 0.2, 0.6] {
            assert_eq!(energy.evaluate(c).unwrap(), tv);
            assert_eq!(edi_energy(&frame, &idx, c, 0.0, 20.0).unwrap(), tv);
        }
    }

    #[test]
    fn sweep_keeps_one_preview_per_point() {
        let frame = FrameRecord::new(
            1.0,
            0.1,
            ImageBuffer::filled(4, 4, 0.5, crate::imaging::Domain::Linear),
        )
        .unwrap();
        let idx = EventIndex::empty(Resolution::new(4, 4));
        let energy = EdiEnergy::new(&frame, &idx, DEFAULT_LAMBDA, 20.0).unwrap();
        let grid = [0.10, 0.22, 0.23, 0.60];
        let (trace, previews) = sweep_c(&grid, |c| {
            let (t, l) = energy.terms(c)?;
            Ok((t.energy, l))
        })
        .unwrap();
        assert_eq!(trace.evals(), 4);
        assert_eq!(previews.len(), 4);
        assert_eq!(previews[2].c, 0.23);
    }
}
