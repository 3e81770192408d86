use evdeblur::edi::{edi_deblur, expand_sequence};
use evdeblur::imaging::psnr;
use evdeblur::medi::{medi_reconstruct, MediProblem, ResidualDomain};
use evdeblur::optimize::{minimize, SearchConfig, SearchMethod};
use evdeblur::simulator::{
    make_test_scene, simulate_blur, simulate_events, BlurredSet, SceneKind, SceneSpec,
    SharpSequence, SimConfig,
};
use evdeblur::{EventIndex, FrameRecord, ImageBuffer, Resolution};

fn bar_scene(frames: usize) -> (EventIndex, BlurredSet) {
    let spec = SceneSpec {
        kind: SceneKind::TranslatingBar,
        width: 32,
        height: 32,
        frames,
        speed: 0.5,
        seed: 0,
    };
    let cfg = SimConfig::default();
    let seq = SharpSequence::at_rate(make_test_scene(&spec), cfg.rate);
    (
        simulate_events(&seq, &cfg).unwrap(),
        simulate_blur(&seq, &cfg).unwrap(),
    )
}

#[test]
fn edi_at_zero_threshold_returns_every_input() {
    let (idx, set) = bar_scene(44);
    for fr in &set.frames {
        assert_eq!(edi_deblur(fr, &idx, 0.0).unwrap().image, fr.image);
    }
}

#[test]
fn static_scene_is_a_fixed_point() {
    let img = ImageBuffer::from_fn(8, 6, evdeblur::Domain::Linear, |x, y| {
        (x * 6 + y) as f64 / 48.0
    });
    let frames: Vec<FrameRecord> = (0..4)
        .map(|i| FrameRecord::new(0.1 + 0.05 * i as f64, 0.04, img.clone()).unwrap())
        .collect();
    let idx = EventIndex::empty(Resolution::new(8, 6));
    for c in [0.0, 0.23, 0.9] {
        for latent in medi_reconstruct(&frames, &idx, c).unwrap() {
            assert_eq!(latent.image, img);
        }
        assert_eq!(edi_deblur(&frames[0], &idx, c).unwrap().image, img);
    }
}

#[test]
fn single_frame_medi_is_edi() {
    let (idx, set) = bar_scene(22);
    for fr in &set.frames {
        for c in [0.1, 0.23, 0.4] {
            let edi = edi_deblur(fr, &idx, c).unwrap();
            let medi = medi_reconstruct(std::slice::from_ref(fr), &idx, c).unwrap();
            for (a, b) in edi.log_image.data().iter().zip(medi[0].log_image.data()) {
                assert!((a - b).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn expanded_video_follows_events() {
    let (idx, set) = bar_scene(44);
    let c = 0.23;
    let latents = medi_reconstruct(&set.frames, &idx, c).unwrap();
    let video = expand_sequence(&latents, &set.frames, &idx, 20);
    assert!(video.len() > latents.len());
    let res = idx.resolution();
    let mut checked = 0;
    for i in 1..video.len() {
        // the identity holds between frames expanded from the same anchor
        if video.sources[i] != video.sources[i - 1] {
            continue;
        }
        let (a, b) = (&video.frames[i - 1], &video.frames[i]);
        for y in 0..res.height {
            for x in 0..res.width {
                let expected = c * idx.events_between(x, y, a.timestamp, b.timestamp) as f64;
                let got = b.log_image.get(x, y) - a.log_image.get(x, y);
                assert!((got - expected).abs() <= 1e-12);
            }
        }
        checked += 1;
    }
    assert!(checked > 0);
}

#[test]
fn medi_recovers_threshold_and_sharpens() {
    let spec = SceneSpec {
        kind: SceneKind::TranslatingBar,
        width: 64,
        height: 64,
        frames: 110,
        speed: 1.0,
        seed: 0,
    };
    let cfg = SimConfig::default();
    let seq = SharpSequence::at_rate(make_test_scene(&spec), cfg.rate);
    let idx = simulate_events(&seq, &cfg).unwrap();
    let set = simulate_blur(&seq, &cfg).unwrap();
    let problem = MediProblem::new(&set.frames, &idx, 5).unwrap();
    let trace = minimize(
        |c| problem.energy(c, ResidualDomain::Log),
        &SearchConfig {
            method: SearchMethod::Fibonacci,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(
        (trace.argmin - 0.23).abs() <= 0.15 * 0.23,
        "c* = {}",
        trace.argmin
    );
    let latents = problem.reconstruct(trace.argmin).unwrap();
    let mean = |imgs: Vec<&ImageBuffer>| {
        imgs.iter()
            .zip(&set.ground_truth)
            .map(|(a, g)| psnr(a, g).unwrap().db())
            .sum::<f64>()
            / set.ground_truth.len() as f64
    };
    let sharp = mean(latents.iter().map(|l| &l.image).collect());
    let blurred = mean(set.frames.iter().map(|f| &f.image).collect());
    assert!(sharp >= blurred + 3.0, "{sharp} vs {blurred}");
}
