//! End-to-end container tests on real files, plus sampling-plan properties.

mod common;

use faver::error::Error;
use faver::plane::Plane;
use faver::synth::noise_clip;
use faver::video::{
    build_sampling_plan, open_raw_yuv, open_y4m, write_raw_yuv, write_y4m, Framerate, PixelFormat,
    PlanarFrame, SamplingMode,
};
use proptest::prelude::*;
use tempfile::tempdir;

fn fps(num: u32, den: u32) -> Framerate {
    Framerate::new(num, den).unwrap()
}

#[test]
fn y4m_streams_round_trip() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("clip.y4m");
    let frames = noise_clip(48, 32, PixelFormat::Yuv420, 5, 12);
    write_y4m(&path, fps(30, 1), &mut frames.clone().into_iter()).unwrap();

    let source = open_y4m(&path).unwrap();
    assert_eq!((source.width, source.height), (48, 32));
    assert_eq!(source.num_frames, 5);
    assert_eq!(source.framerate, fps(30, 1));
    assert_eq!(source.pixel_format, PixelFormat::Yuv420);
    // Out-of-order lazy reads reproduce the written samples bit-exactly.
    for &idx in &[4usize, 0, 2, 1, 3] {
        let frame = source.read_frame(idx).unwrap();
        assert_eq!(frame.y, frames[idx].y, "frame {idx} luma");
        assert_eq!(frame.u, frames[idx].u);
        assert_eq!(frame.v, frames[idx].v);
    }
}

#[test]
fn y4m_444_streams_round_trip() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("clip444.y4m");
    let frames = noise_clip(20, 24, PixelFormat::Yuv444, 3, 5);
    write_y4m(&path, fps(30000, 1001), &mut frames.clone().into_iter()).unwrap();
    let source = open_y4m(&path).unwrap();
    assert_eq!(source.pixel_format, PixelFormat::Yuv444);
    assert_eq!(source.framerate, fps(30000, 1001));
    let frame = source.read_frame(2).unwrap();
    assert_eq!(frame.u, frames[2].u);
}

#[test]
fn truncated_y4m_payload_is_a_format_error() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("broken.y4m");
    let frames = noise_clip(32, 32, PixelFormat::Yuv420, 2, 3);
    write_y4m(&path, fps(24, 1), &mut frames.into_iter()).unwrap();
    let full = std::fs::read(&path).unwrap();
    std::fs::write(&path, &full[..full.len() - 100]).unwrap();
    assert!(matches!(open_y4m(&path), Err(Error::Format(_))));
}

#[test]
fn raw_yuv_frame_count_arithmetic() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("video.yuv");
    // 1920x1080 4:2:0 is 3,110,400 bytes per frame.
    std::fs::write(&path, vec![0u8; 3_110_400]).unwrap();
    let source = open_raw_yuv(&path, 1920, 1080, fps(30, 1), PixelFormat::Yuv420).unwrap();
    assert_eq!(source.num_frames, 1);

    std::fs::write(&path, vec![0u8; 6_220_800]).unwrap();
    let source = open_raw_yuv(&path, 1920, 1080, fps(30, 1), PixelFormat::Yuv420).unwrap();
    assert_eq!(source.num_frames, 2);

    std::fs::write(&path, vec![0u8; 3_110_401]).unwrap();
    assert!(matches!(
        open_raw_yuv(&path, 1920, 1080, fps(30, 1), PixelFormat::Yuv420),
        Err(Error::Format(_))
    ));
}

#[test]
fn raw_frames_decode_without_level_shift() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("video.yuv");
    let zero = vec![0u8; PixelFormat::Yuv420.frame_bytes(32, 16)];
    let mid = vec![128u8; PixelFormat::Yuv420.frame_bytes(32, 16)];
    let mut bytes = zero;
    bytes.extend(mid);
    std::fs::write(&path, bytes).unwrap();

    let source = open_raw_yuv(&path, 32, 16, fps(25, 1), PixelFormat::Yuv420).unwrap();
    let f0 = source.read_frame(0).unwrap();
    assert!(f0.y.data().iter().all(|&v| v == 0.0));
    assert!(f0.u.data().iter().all(|&v| v == 0.0));
    let f1 = source.read_frame(1).unwrap();
    assert!(f1.y.data().iter().all(|&v| v == 128.0));
    assert!(f1.v.data().iter().all(|&v| v == 128.0));

    match source.read_frame(2) {
        Err(Error::OutOfBounds(_)) => {}
        other => panic!("expected bounds error, got {other:?}"),
    }
}

#[test]
fn concurrent_reads_see_consistent_frames() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("par.y4m");
    let frames = noise_clip(32, 32, PixelFormat::Yuv420, 12, 31);
    write_y4m(&path, fps(24, 1), &mut frames.clone().into_iter()).unwrap();
    let source = std::sync::Arc::new(open_y4m(&path).unwrap());

    let handles: Vec<_> = (0..4)
        .map(|worker| {
            let src = source.clone();
            let expected = frames.clone();
            std::thread::spawn(move || {
                for round in 0..6 {
                    let idx = (worker * 7 + round * 5) % 12;
                    let frame = src.read_frame(idx).unwrap();
                    assert_eq!(frame.y, expected[idx].y);
                }
            })
        })
        .collect();
    for h in handles {
        h.join().unwrap();
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn raw_round_trip_is_bit_exact(seed in 0u64..1000, w in 16usize..40, h in 16usize..40) {
        let dir = tempdir().unwrap();
        let path = dir.path().join("rt.yuv");
        let frames = noise_clip(w, h, PixelFormat::Yuv420, 3, seed);
        write_raw_yuv(&path, &mut frames.clone().into_iter()).unwrap();
        let source = open_raw_yuv(&path, w, h, fps(30, 1), PixelFormat::Yuv420).unwrap();
        prop_assert_eq!(source.num_frames, 3);
        for (idx, frame) in frames.iter().enumerate() {
            let back = source.read_frame(idx).unwrap();
            prop_assert_eq!(&back.y, &frame.y);
            prop_assert_eq!(&back.u, &frame.u);
            prop_assert_eq!(&back.v, &frame.v);
        }
    }

    #[test]
    fn per_second_plans_stay_in_bounds(
        num_frames in 8usize..2000,
        fps_int in 1u32..240,
        filter_len in 2usize..40,
    ) {
        let plan = build_sampling_plan(
            num_frames,
            f64::from(fps_int),
            SamplingMode::PerSecond,
            filter_len,
        );
        match plan {
            Ok(plan) => {
                for &idx in &plan.spatial_frame_indices {
                    prop_assert!(idx < num_frames);
                }
                for w in &plan.temporal_windows {
                    prop_assert!(w.start + w.length <= num_frames);
                    prop_assert_eq!(w.length, filter_len);
                }
                let duration = num_frames as f64 / f64::from(fps_int);
                prop_assert!(plan.temporal_windows.len() <= duration.floor() as usize + 1);
                // Integer rates: consecutive starts differ by round(framerate).
                for pair in plan.spatial_frame_indices.windows(2) {
                    prop_assert_eq!(pair[1] - pair[0], fps_int as usize);
                }
            }
            Err(Error::EmptyPlan(_)) => prop_assert!(filter_len > num_frames),
            Err(e) => return Err(TestCaseError::fail(format!("unexpected error {e}"))),
        }
    }
}

#[test]
fn resize_then_constant_chain_is_stable() {
    // Chained rescaling must preserve constants to numeric precision.
    let p = Plane::constant(720, 1280, 63.0);
    let resized = faver::video::resize_to_height(&p, 512).unwrap();
    let half = faver::video::downscale_half(&resized).unwrap();
    assert_eq!((resized.height(), resized.width()), (512, 910));
    assert_eq!((half.height(), half.width()), (256, 455));
    for &v in half.data() {
        assert!((v - 63.0).abs() < 1e-9);
    }
}

#[test]
fn mixed_geometry_write_is_rejected() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("bad.y4m");
    let mut frames = noise_clip(32, 32, PixelFormat::Yuv420, 1, 1);
    frames.extend(noise_clip(16, 16, PixelFormat::Yuv420, 1, 2));
    assert!(write_y4m(&path, fps(30, 1), &mut frames.into_iter()).is_err());
}

#[test]
fn frame_validation_catches_bad_chroma() {
    let frame = PlanarFrame {
        y: Plane::zeros(16, 16),
        u: Plane::zeros(16, 16),
        v: Plane::zeros(8, 8),
        format: PixelFormat::Yuv420,
    };
    assert!(frame.validate().is_err());
}
