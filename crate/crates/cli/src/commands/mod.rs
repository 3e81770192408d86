pub mod metrics;
pub mod reconstruct;
pub mod simulate;
pub mod sweep;

use std::fs;

use evdeblur::frames::{check_frames, load_frame_manifest};
use evdeblur::medi::ResidualDomain;
use evdeblur::optimize::default_decay;
use evdeblur::{
    manifest_exposure, parse_event_stream, EventIndex, FrameRecord, TimestampConvention,
};

use crate::args::{Convention, InputArgs, ModelArgs, Residual};
use crate::error::{CliError, CliResult};
use crate::output::RunManifest;

pub struct Inputs {
    pub frames: Vec<FrameRecord>,
    pub index: EventIndex,
    pub exposure: f64,
}

pub fn load_inputs(args: &InputArgs) -> CliResult<Inputs> {
    let manifest_text =
        fs::read_to_string(&args.frames).map_err(|e| CliError::io(&args.frames, e))?;
    let exposure =
        match args.exposure.or_else(|| manifest_exposure(&manifest_text)) {
            Some(t) if t > 0.0 && t.is_finite() => t,
            Some(t) => return Err(CliError::Usage(format!("exposure {t} must be positive"))),
            None => return Err(CliError::Usage(
                "no exposure given: pass --exposure or add `# exposure <seconds>` to the manifest"
                    .into(),
            )),
        };
    let convention = match args.timestamp_convention {
        Convention::Midpoint => TimestampConvention::Midpoint,
        Convention::ExposureStart => TimestampConvention::ExposureStart,
    };
    let frames = load_frame_manifest(&args.frames, exposure, convention)?;
    let first = frames
        .first()
        .ok_or_else(|| CliError::Usage(format!("{} lists no frames", args.frames.display())))?;
    let events_text =
        fs::read_to_string(&args.events).map_err(|e| CliError::io(&args.events, e))?;
    let index = parse_event_stream(&events_text, first.resolution())?;
    // overhang warnings are logged by the check itself
    check_frames(&frames, &index)?;
    Ok(Inputs {
        frames,
        index,
        exposure,
    })
}

pub fn residual_domain(r: Residual) -> ResidualDomain {
    match r {
        Residual::Log => ResidualDomain::Log,
        Residual::Linear => ResidualDomain::Linear,
    }
}

pub fn resolved_decay(model: &ModelArgs, exposure: f64) -> CliResult<f64> {
    match model.decay {
        Some(d) if d > 0.0 && d.is_finite() => Ok(d),
        Some(d) => Err(CliError::Usage(format!("decay {d} must be positive"))),
        None => Ok(default_decay(exposure)),
    }
}

pub fn record_inputs(
    manifest: &mut RunManifest,
    input: &InputArgs,
    model: &ModelArgs,
    inputs: &Inputs,
) {
    manifest
        .input("events", &input.events)
        .input("frames", &input.frames)
        .config("exposure", inputs.exposure)
        .config(
            "timestamp_convention",
            match input.timestamp_convention {
                Convention::Midpoint => "midpoint",
                Convention::ExposureStart => "exposure-start",
            },
        )
        .config(
            "mode",
            match model.mode {
                crate::args::Mode::Edi => "edi",
                crate::args::Mode::Medi => "medi",
            },
        )
        .config("window", model.window)
        .config("lambda", model.lambda)
        .config(
            "residual",
            match model.residual {
                Residual::Log => "log",
                Residual::Linear => "linear",
            },
        );
}
