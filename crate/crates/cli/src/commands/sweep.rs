use std::time::Instant;

use evdeblur::imaging::write_pgm;
use evdeblur::medi::MediProblem;
use evdeblur::optimize::{sweep_c, EdiEnergy};
use serde_json::json;

use super::{load_inputs, record_inputs, residual_domain, resolved_decay};
use crate::args::{Mode, SweepArgs};
use crate::error::{CliError, CliResult};
use crate::output::{create_dir, write_json, write_text, RunManifest};

pub fn run(args: &SweepArgs) -> CliResult<()> {
    let start = Instant::now();
    let inputs = load_inputs(&args.input)?;
    let (frames, index) = (&inputs.frames, &inputs.index);
    if args.frame_index >= frames.len() {
        return Err(CliError::Usage(format!(
            "frame index {} out of range ({} frames)",
            args.frame_index,
            frames.len()
        )));
    }
    if args.grid.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
        return Err(CliError::Usage(
            "grid values must be non-negative numbers".into(),
        ));
    }
    let decay = resolved_decay(&args.model, inputs.exposure)?;
    let k = args.frame_index;
    let (trace, previews) = match args.model.mode {
        Mode::Edi => {
            let energy = EdiEnergy::new(&frames[k], index, args.model.lambda, decay)?;
            sweep_c(&args.grid, |c| {
                let (terms, latent) = energy.terms(c)?;
                Ok((terms.energy, latent))
            })?
        }
        Mode::Medi => {
            let problem = MediProblem::new(frames, index, args.model.window)?;
            let domain = residual_domain(args.model.residual);
            sweep_c(&args.grid, |c| {
                let e = problem.energy(c, domain)?;
                let mut latents = problem.reconstruct(c)?;
                Ok((e, latents.swap_remove(k)))
            })?
        }
    };

    let dir = args.out.join("previews");
    create_dir(&dir)?;
    for latent in &previews {
        write_pgm(&dir.join(format!("c_{:.6}.pgm", latent.c)), &latent.image)?;
    }
    let trace_path = args.out.join("trace.txt");
    write_text(&trace_path, &trace.to_text())?;
    write_json(
        &args.out.join("summary.json"),
        &json!({
            "argmin": trace.argmin,
            "min_energy": trace.min_energy,
            "evals": trace.evals(),
            "frame_index": k,
        }),
    )?;
    for (c, e) in &trace.evaluations {
        println!("{c:>10.6} {e:>16.8e}");
    }
    println!("lowest energy at c = {}", trace.argmin);

    let mut manifest = RunManifest::new("sweep");
    record_inputs(&mut manifest, &args.input, &args.model, &inputs);
    manifest
        .config("decay", decay)
        .config("grid", args.grid.clone())
        .config("frame_index", k)
        .output("previews", &dir)
        .output("summary", &args.out.join("summary.json"));
    manifest.energy_trace = Some(trace_path.display().to_string());
    manifest.finish(&args.out, start.elapsed())
}
