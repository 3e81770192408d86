use crate::error::{Error, Result};

/// Floor applied before taking logarithms: one 8-bit quantum.
pub const LOG_FLOOR: f64 = 1.0 / 255.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    /// Linear intensity, nominally in `[0, 1]`.
    Linear,
    /// Natural logarithm of linear intensity.
    Log,
}

impl Domain {
    fn name(self) -> &'static str {
        match self {
            Domain::Linear => "linear",
            Domain::Log => "log",
        }
    }
}

/// Row-major grayscale image of `f64` samples tagged with its intensity domain.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageBuffer {
    width: usize,
    height: usize,
    data: Vec<f64>,
    domain: Domain,
}

impl ImageBuffer {
    pub fn new(width: usize, height: usize, data: Vec<f64>, domain: Domain) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::Validation(format!(
                "buffer of {} samples does not match {width}x{height}",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
            domain,
        })
    }

    pub fn linear(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        Self::new(width, height, data, Domain::Linear)
    }

    pub fn filled(width: usize, height: usize, value: f64, domain: Domain) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
            domain,
        }
    }

    pub fn from_fn<F>(width: usize, height: usize, domain: Domain, mut f: F) -> Self
    where
        F: FnMut(usize, usize) -> f64,
    {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
            domain,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn same_size(&self, other: &ImageBuffer) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub(crate) fn check_same_size(&self, other: &ImageBuffer) -> Result<()> {
        if self.same_size(other) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                left_w: self.width,
                left_h: self.height,
                right_w: other.width,
                right_h: other.height,
            })
        }
    }

    pub(crate) fn expect_domain(&self, expected: Domain) -> Result<()> {
        if self.domain == expected {
            Ok(())
        } else {
            Err(Error::DomainMismatch {
                expected: expected.name(),
                found: self.domain.name(),
            })
        }
    }

    /// Applies `f` to every sample, keeping the domain tag.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
            domain: self.domain,
        }
    }

    pub fn clamped(&self) -> Self {
        self.map(|v| v.clamp(0.0, 1.0))
    }

    /// `v -> ln(max(v, LOG_FLOOR))`.
    pub fn to_log(&self) -> Result<Self> {
        self.expect_domain(Domain::Linear)?;
        Ok(Self {
            domain: Domain::Log,
            ..self.map(to_log_value)
        })
    }

    /// `v -> exp(v)`; the inverse of [`to_log`](Self::to_log) for samples at or above the floor.
    pub fn to_linear(&self) -> Result<Self> {
        self.expect_domain(Domain::Log)?;
        Ok(Self {
            domain: Domain::Linear,
            ..self.map(f64::exp)
        })
    }
}

pub fn to_log_value(v: f64) -> f64 {
    v.max(LOG_FLOOR).ln()
}
