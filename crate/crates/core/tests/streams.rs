use std::io::Cursor;

use linescan::source::{
    open_stream, write_raw, FrameSource, InputFormat, RawReader, RawWriter, Y4mReader, Y4mWriter,
};
use linescan::synth::{generate_synthetic, random_traffic, TrafficParams};
use linescan::{Error, Frame};
use proptest::prelude::*;

fn small_video(seed: u64) -> linescan::synth::Generated {
    let params = TrafficParams {
        width: 320,
        height: 240,
        lambda: 150,
        vehicles: 2,
        min_width: 110,
        max_width: 140,
        min_height: 30,
        max_height: 60,
        noise_objects: 1,
        ..TrafficParams::default()
    };
    let mut s = random_traffic(&params, seed).unwrap();
    s.noise.salt_pepper = 0.02;
    generate_synthetic(&s, seed).unwrap()
}

#[test]
fn synthetic_raw_file_round_trip() {
    let g = small_video(5);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v.raw");
    let (w, h) = g.video.dimensions();
    write_raw(&path, w, h, g.video.frame_count(), g.video.frames()).unwrap();
    let back = open_stream(&path, InputFormat::RawPlanar).unwrap();
    assert_eq!(back.dimensions(), (w, h));
    assert_eq!(back.frame_count(), Some(g.video.frame_count()));
    let mut n = 0;
    for (a, b) in back.zip(g.video.frames()) {
        assert_eq!(a.unwrap(), b.unwrap());
        n += 1;
    }
    assert_eq!(n, g.video.frame_count());
}

#[test]
fn synthetic_y4m_round_trip() {
    let g = small_video(6);
    let (w, h) = g.video.dimensions();
    let mut out = Y4mWriter::new(Vec::new(), w, h, 30).unwrap();
    for f in g.video.frames() {
        out.write_frame(&f.unwrap()).unwrap();
    }
    let bytes = out.finish().unwrap();
    let back = Y4mReader::new(Cursor::new(bytes)).unwrap();
    assert_eq!(back.dimensions(), (w, h));
    let frames: Vec<Frame> = back.collect::<Result<_, _>>().unwrap();
    assert_eq!(frames.len() as u64, g.video.frame_count());
    for (a, b) in frames.iter().zip(g.video.frames()) {
        assert_eq!(*a, b.unwrap());
    }
}

#[test]
fn image_sequence_in_numeric_order() {
    let dir = tempfile::tempdir().unwrap();
    for i in [10u8, 2, 1] {
        let img = image::RgbImage::from_pixel(4, 3, image::Rgb([i * 10, 0, 0]));
        img.save(dir.path().join(format!("frame_{i}.png"))).unwrap();
    }
    let frames: Vec<Frame> = open_stream(dir.path(), InputFormat::ImageSequence)
        .unwrap()
        .collect::<Result<_, _>>()
        .unwrap();
    let firsts: Vec<(u64, u8)> = frames.iter().map(|f| (f.index, f.get(0, 0))).collect();
    // luma of (r,0,0) is round(0.299 r)
    let expect = |r: f64| (0.299 * r).round() as u8;
    assert_eq!(
        firsts,
        vec![(0, expect(10.0)), (1, expect(20.0)), (2, expect(100.0))]
    );
}

#[test]
fn image_sequence_size_change_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    image::GrayImage::new(4, 3)
        .save(dir.path().join("a1.png"))
        .unwrap();
    image::GrayImage::new(5, 3)
        .save(dir.path().join("a2.png"))
        .unwrap();
    let mut s = open_stream(dir.path(), InputFormat::ImageSequence).unwrap();
    assert!(s.next().unwrap().is_ok());
    assert!(s.next().unwrap().is_err());
}

#[test]
fn truncated_raw_names_last_complete_frame() {
    let mut buf = RawWriter::new(Vec::new(), 4, 2, 3).unwrap();
    for i in 0..3 {
        buf.write_frame(&Frame::filled(i, 4, 2, 7)).unwrap();
    }
    let mut bytes = buf.finish().unwrap();
    bytes.truncate(bytes.len() - 3);
    let results: Vec<_> = RawReader::new(Cursor::new(bytes)).unwrap().collect();
    assert_eq!(results.len(), 3);
    assert!(results[1].is_ok());
    assert!(matches!(
        results[2],
        Err(Error::Truncated {
            last_complete: Some(1)
        })
    ));
}

#[test]
fn missing_file_is_an_error() {
    assert!(open_stream(
        std::path::Path::new("/nonexistent/v.raw"),
        InputFormat::RawPlanar
    )
    .is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn raw_round_trip(w in 1usize..12, h in 1usize..9, n in 0u64..6, seed in any::<u64>()) {
        let frames: Vec<Frame> = (0..n)
            .map(|t| {
                let px = (0..w * h).map(|i| (seed.wrapping_mul(31).wrapping_add(t * 7 + i as u64) % 251) as u8).collect();
                Frame::new(t, w, h, px).unwrap()
            })
            .collect();
        let mut out = RawWriter::new(Vec::new(), w, h, n).unwrap();
        for f in &frames {
            out.write_frame(f).unwrap();
        }
        let back: Vec<Frame> = RawReader::new(Cursor::new(out.finish().unwrap())).unwrap().collect::<Result<_, _>>().unwrap();
        prop_assert_eq!(back, frames);
    }
}
