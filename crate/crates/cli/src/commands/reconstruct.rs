use std::time::Instant;

use evdeblur::edi::expand_sequence;
use evdeblur::medi::MediProblem;
use evdeblur::optimize::{minimize, EdiEnergy, EnergyTrace, SearchConfig, SearchMethod};
use evdeblur::LatentFrame;
use serde_json::json;

use super::{load_inputs, record_inputs, residual_domain, resolved_decay};
use crate::args::{Mode, ReconstructArgs, ThresholdArg};
use crate::error::CliResult;
use crate::output::{create_dir, write_frame_dir, write_json, write_text, RunManifest};

pub fn run(args: &ReconstructArgs) -> CliResult<()> {
    let start = Instant::now();
    let inputs = load_inputs(&args.input)?;
    let (frames, index) = (&inputs.frames, &inputs.index);
    let decay = resolved_decay(&args.model, inputs.exposure)?;
    let search = SearchConfig {
        lo: args.c_lo,
        hi: args.c_hi,
        tolerance: args.tolerance,
        max_evals: args.max_evals,
        method: match args.model.mode {
            Mode::Edi => SearchMethod::Golden,
            Mode::Medi => SearchMethod::Fibonacci,
        },
        prescan: args.prescan,
    };
    if args.c == ThresholdArg::Auto {
        search.validate()?;
    }

    let (latents, trace): (Vec<LatentFrame>, Option<EnergyTrace>) = match args.model.mode {
        Mode::Edi => {
            let energies = frames
                .iter()
                .map(|f| EdiEnergy::new(f, index, args.model.lambda, decay))
                .collect::<evdeblur::Result<Vec<_>>>()?;
            let (c, trace) = match args.c {
                ThresholdArg::Fixed(c) => (c, None),
                ThresholdArg::Auto => {
                    // one threshold for the sensor: mean energy over all frames
                    let trace = minimize(
                        |c| {
                            let mut sum = 0.0;
                            for e in &energies {
                                sum += e.evaluate(c)?;
                            }
                            Ok(sum / energies.len() as f64)
                        },
                        &search,
                    )?;
                    (trace.argmin, Some(trace))
                }
            };
            let latents = energies
                .iter()
                .map(|e| e.problem().deblur(c))
                .collect::<evdeblur::Result<Vec<_>>>()?;
            (latents, trace)
        }
        Mode::Medi => {
            let problem = MediProblem::new(frames, index, args.model.window)?;
            let domain = residual_domain(args.model.residual);
            let (c, trace) = match args.c {
                ThresholdArg::Fixed(c) => (c, None),
                ThresholdArg::Auto => {
                    let trace = minimize(|c| problem.energy(c, domain), &search)?;
                    (trace.argmin, Some(trace))
                }
            };
            (problem.reconstruct(c)?, trace)
        }
    };
    let c = latents[0].c;

    create_dir(&args.out)?;
    let latent_manifest = write_frame_dir(
        &args.out.join("latent"),
        latents.iter().map(|l| (l.timestamp, &l.image)),
        4,
        &[format!("c {c}")],
    )?;
    let mut per_source = vec![0usize; latents.len()];
    let mut video_manifest = None;
    if !args.no_video {
        let video = expand_sequence(&latents, frames, index, args.events_per_frame as usize);
        for &s in &video.sources {
            per_source[s] += 1;
        }
        video_manifest = Some(write_frame_dir(
            &args.out.join("video"),
            video.frames.iter().map(|l| (l.timestamp, &l.image)),
            6,
            &[format!("c {c}")],
        )?);
    }
    let trace_path = args.out.join("trace.txt");
    if let Some(t) = &trace {
        write_text(&trace_path, &t.to_text())?;
    }

    let search_summary = trace.as_ref().map(|t| {
        json!({
            "method": format!("{:?}", search.method).to_lowercase(),
            "argmin": t.argmin,
            "min_energy": t.min_energy,
            "evals": t.evals(),
            "converged": t.converged,
            "status": t.status.to_string(),
            "final_bracket": [t.final_bracket().0, t.final_bracket().1],
        })
    });
    let summary = json!({
        "mode": match args.model.mode { Mode::Edi => "edi", Mode::Medi => "medi" },
        "c": c,
        "estimated": trace.is_some(),
        "search": search_summary,
        "latent_frames": latents.len(),
        "video_frames": per_source.iter().sum::<usize>(),
        "video_frames_per_blurred": per_source,
    });
    write_json(&args.out.join("summary.json"), &summary)?;
    match &trace {
        Some(t) => println!(
            "estimated c = {c} ({} evaluations, {})",
            t.evals(),
            t.status
        ),
        None => println!("c = {c}"),
    }
    println!(
        "{} latent frames, {} video frames written to {}",
        latents.len(),
        per_source.iter().sum::<usize>(),
        args.out.display()
    );

    let mut manifest = RunManifest::new("reconstruct");
    record_inputs(&mut manifest, &args.input, &args.model, &inputs);
    manifest
        .config("decay", decay)
        .config("events_per_frame", args.events_per_frame)
        .config("c_lo", search.lo)
        .config("c_hi", search.hi)
        .config("tolerance", search.tolerance)
        .config("max_evals", search.max_evals)
        .config("prescan", search.prescan)
        .config("video", !args.no_video)
        .output("latent", &latent_manifest)
        .output("summary", &args.out.join("summary.json"));
    if let Some(v) = &video_manifest {
        manifest.output("video", v);
    }
    manifest.c_used = Some(c);
    if trace.is_some() {
        manifest.c_estimated = Some(c);
        manifest.energy_trace = Some(trace_path.display().to_string());
    }
    manifest.finish(&args.out, start.elapsed())
}
