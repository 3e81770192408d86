use std::fs::File;
use std::io::BufWriter;
use std::time::Instant;

use evdeblur::simulator::{
    make_test_scene, simulate_blur, simulate_events, SceneKind, SceneSpec, SharpSequence, SimConfig,
};

use crate::args::{Scene, SimulateArgs};
use crate::error::{CliError, CliResult};
use crate::output::{create_dir, write_frame_dir, RunManifest};

fn scene_kind(s: Scene) -> SceneKind {
    match s {
        Scene::TranslatingBar => SceneKind::TranslatingBar,
        Scene::DriftingSinusoid => SceneKind::DriftingSinusoid,
        Scene::TwoLevelChecker => SceneKind::TwoLevelChecker,
    }
}

pub fn run(args: &SimulateArgs) -> CliResult<()> {
    let start = Instant::now();
    let height = args.height.unwrap_or(args.size);
    if args.size == 0 || height == 0 || args.frames == 0 {
        return Err(CliError::Usage(
            "size, height and frames must be positive".into(),
        ));
    }
    let spec = SceneSpec {
        kind: scene_kind(args.scene),
        width: args.size,
        height,
        frames: args.frames,
        speed: args.speed,
        seed: args.seed,
    };
    let config = SimConfig {
        c_true: args.c_true,
        rate: args.rate,
        blur_span: args.blur_span,
        floor: args.log_floor,
    };
    config.validate()?;
    let seq = SharpSequence::at_rate(make_test_scene(&spec), config.rate);
    let index = simulate_events(&seq, &config)?;
    let blurred = simulate_blur(&seq, &config)?;
    let exposure = blurred.frames[0].exposure;

    create_dir(&args.out)?;
    let events_path = args.out.join("events.txt");
    let file = File::create(&events_path).map_err(|e| CliError::io(&events_path, e))?;
    index
        .write_text(BufWriter::new(file))
        .map_err(|e| CliError::io(&events_path, e))?;
    let header = [format!("exposure {exposure}")];
    let blurred_manifest = write_frame_dir(
        &args.out.join("blurred"),
        blurred.frames.iter().map(|f| (f.center, &f.image)),
        4,
        &header,
    )?;
    let gt_manifest = write_frame_dir(
        &args.out.join("gt"),
        blurred
            .frames
            .iter()
            .zip(&blurred.ground_truth)
            .map(|(f, g)| (f.center, g)),
        4,
        &[],
    )?;
    println!(
        "{} events, {} blurred frames (exposure {exposure} s) written to {}",
        index.len(),
        blurred.frames.len(),
        args.out.display()
    );

    let mut manifest = RunManifest::new("simulate");
    manifest
        .config("scene", spec.kind.to_string())
        .config("width", spec.width)
        .config("height", spec.height)
        .config("frames", spec.frames)
        .config("blur_span", config.blur_span)
        .config("c_true", config.c_true)
        .config("rate", config.rate)
        .config("speed", spec.speed)
        .config("seed", spec.seed)
        .config("log_floor", config.floor)
        .config("exposure", exposure)
        .output("events", &events_path)
        .output("blurred", &blurred_manifest)
        .output("ground_truth", &gt_manifest);
    manifest.c_used = Some(config.c_true);
    manifest.finish(&args.out, start.elapsed())
}
