//! Synthetic top-view traffic with pixel-exact ground truth.
//!
//! Vehicles are textured rectangles moving straight down at a constant
//! speed. At `entry_frame` a vehicle's bottom edge sits at row 0; after `k`
//! more frames its top row is `floor(velocity * k) - height`. The plate is
//! drawn near the vehicle's top edge, which is its rear since it moves
//! downward, so at the crossing-complete frame the plate sits just below the
//! scan line.
//!
//! Each vehicle body carries a per-pixel random texture around its base
//! intensity. A flat-colored body would be invisible to a background model
//! that relearns every frame, except at the leading and trailing edges.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::font::{is_plate_code, plate_ink, PLATE_CHARS};
use crate::frame::Frame;
use crate::source::FrameSource;

pub const PLATE_BACKGROUND: u8 = 235;
pub const PLATE_INK: u8 = 20;
/// Smallest gap between any vehicle pixel and the scene background.
pub const MIN_CONTRAST: u8 = 25;
/// Body pixels around a plate must stay below this so plates stand out.
pub const MAX_BODY_NEAR_PLATE: u8 = 215;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlateSpec {
    /// Offset of the plate from the vehicle's top-left corner.
    pub dx: usize,
    pub dy: usize,
    pub width: usize,
    pub height: usize,
    pub code: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleSpec {
    pub x: usize,
    pub width: usize,
    pub height: usize,
    /// Pixels per frame, downward.
    pub velocity: f64,
    pub entry_frame: u64,
    pub intensity: u8,
    /// Half-range of the body texture around `intensity`.
    #[serde(default = "default_texture")]
    pub texture: u8,
    pub plate: PlateSpec,
}

/// A flat, plate-less object, typically narrower than the noise threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseObject {
    pub x: usize,
    pub width: usize,
    pub height: usize,
    pub velocity: f64,
    pub entry_frame: u64,
    pub intensity: u8,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Fraction of pixels per frame replaced by 0 or 255.
    #[serde(default)]
    pub salt_pepper: f64,
    #[serde(default)]
    pub objects: Vec<NoiseObject>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub frames: u64,
    pub width: usize,
    pub height: usize,
    #[serde(default = "default_fps")]
    pub fps: f64,
    /// Row on which ground truth is measured.
    pub lambda: usize,
    #[serde(default = "default_background")]
    pub background: u8,
    #[serde(default)]
    pub vehicles: Vec<VehicleSpec>,
    #[serde(default)]
    pub noise: NoiseSpec,
}

fn default_texture() -> u8 {
    30
}

fn default_fps() -> f64 {
    30.0
}

fn default_background() -> u8 {
    100
}

/// One vehicle's crossing of the scan line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruthRecord {
    pub id: u32,
    /// First frame at which no vehicle pixel lies on the scan line.
    pub frame: u64,
    pub x_left: u32,
    pub x_right: u32,
    pub plate: String,
}

/// A vehicle left out of the ground truth, with the reason.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Excluded {
    pub id: u32,
    pub reason: String,
}

/// Plate rectangle `[x0,x1) x [y0,y1)` visible in a rendered frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlateBox {
    pub vehicle: u32,
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
    pub code: String,
}

/// Top row of a downward-moving object at frame `t`, or `None` before it
/// enters.
pub fn top_row(velocity: f64, height: usize, entry: u64, t: u64) -> Option<i64> {
    if t < entry {
        return None;
    }
    Some((velocity * (t - entry) as f64).floor() as i64 - height as i64)
}

/// `(first frame on the line, crossing-complete frame)` for an object, or
/// `None` if it jumps over the line without ever covering it.
pub fn line_window(velocity: f64, height: usize, entry: u64, lambda: usize) -> Option<(u64, u64)> {
    let lambda = lambda as i64;
    let h = height as i64;
    // first frame where the bottom edge passes the line: floor(v*k) > lambda
    let mut k = ((lambda as f64 + 1.0) / velocity).floor().max(0.0) as u64;
    while k > 0 && (velocity * (k - 1) as f64).floor() as i64 > lambda {
        k -= 1;
    }
    while (velocity * k as f64).floor() as i64 <= lambda {
        k += 1;
    }
    let top = (velocity * k as f64).floor() as i64 - h;
    if top > lambda {
        return None;
    }
    let on = entry + k;
    let mut c = k;
    while (velocity * c as f64).floor() as i64 - h <= lambda {
        c += 1;
    }
    Some((on, entry + c))
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidScenario(msg()))
    }
}

fn far_from(lo: u8, hi: u8, v: u8) -> bool {
    (hi as i32) + (MIN_CONTRAST as i32) <= v as i32 || (lo as i32) >= v as i32 + MIN_CONTRAST as i32
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        check(self.width > 0 && self.height > 0, || {
            "empty frame size".into()
        })?;
        check(self.lambda < self.height, || {
            format!(
                "lambda {} outside frame height {}",
                self.lambda, self.height
            )
        })?;
        check(self.fps.is_finite() && self.fps > 0.0, || {
            "fps must be positive".into()
        })?;
        check((0.0..=1.0).contains(&self.noise.salt_pepper), || {
            "salt_pepper must lie in [0,1]".into()
        })?;
        for level in [PLATE_BACKGROUND, PLATE_INK] {
            check(far_from(level, level, self.background), || {
                format!(
                    "background {} too close to plate level {level}",
                    self.background
                )
            })?;
        }
        for (id, v) in self.vehicles.iter().enumerate() {
            let who = || format!("vehicle {id}");
            check(v.velocity.is_finite() && v.velocity > 0.0, || {
                format!("{}: velocity must be positive and finite", who())
            })?;
            check(v.width > 0 && v.height > 0, || {
                format!("{}: empty body", who())
            })?;
            check(v.x + v.width <= self.width, || {
                format!("{}: extends past the right frame edge", who())
            })?;
            let (lo, hi) = body_range(v.intensity, v.texture);
            check(far_from(lo, hi, self.background), || {
                format!(
                    "{}: body range {lo}..={hi} within {MIN_CONTRAST} of background",
                    who()
                )
            })?;
            check(hi < MAX_BODY_NEAR_PLATE, || {
                format!("{}: body too bright for plate contrast", who())
            })?;
            let p = &v.plate;
            check(is_plate_code(&p.code), || {
                format!("{}: plate `{}` is not 3 letters + 4 digits", who(), p.code)
            })?;
            check(p.width >= PLATE_CHARS && p.height > 0, || {
                format!("{}: plate too small", who())
            })?;
            check(
                p.dx + p.width <= v.width && p.dy + p.height <= v.height,
                || format!("{}: plate outside body", who()),
            )?;
        }
        for (i, o) in self.noise.objects.iter().enumerate() {
            check(o.velocity.is_finite() && o.velocity > 0.0, || {
                format!("noise object {i}: velocity must be positive and finite")
            })?;
            check(
                o.width > 0 && o.height > 0 && o.x + o.width <= self.width,
                || format!("noise object {i}: bad geometry"),
            )?;
        }
        Ok(())
    }

    /// Ground truth for every vehicle that completes its crossing inside
    /// the stream, sorted by crossing frame then x.
    pub fn ground_truth(&self) -> (Vec<GroundTruthRecord>, Vec<Excluded>) {
        let mut records = Vec::new();
        let mut excluded = Vec::new();
        for (id, v) in self.vehicles.iter().enumerate() {
            let id = id as u32;
            match line_window(v.velocity, v.height, v.entry_frame, self.lambda) {
                None => excluded.push(Excluded {
                    id,
                    reason: "never reaches the line".into(),
                }),
                Some((_, c)) if c >= self.frames => excluded.push(Excluded {
                    id,
                    reason: format!("crossing completes at frame {c}, after the stream ends"),
                }),
                Some((_, c)) => records.push(GroundTruthRecord {
                    id,
                    frame: c,
                    x_left: v.x as u32,
                    x_right: (v.x + v.width) as u32,
                    plate: v.plate.code.clone(),
                }),
            }
        }
        records.sort_by_key(|r| (r.frame, r.x_left, r.id));
        (records, excluded)
    }
}

fn body_range(intensity: u8, texture: u8) -> (u8, u8) {
    (
        intensity.saturating_sub(texture),
        intensity.saturating_add(texture),
    )
}

/// A validated scenario with its textures, able to render any frame.
#[derive(Debug, Clone)]
pub struct Synthetic {
    scenario: Scenario,
    seed: u64,
    /// Per vehicle: `width*height` body pixels with the plate baked in.
    bodies: Vec<Vec<u8>>,
}

/// Output of [`generate_synthetic`].
#[derive(Debug, Clone)]
pub struct Generated {
    pub video: Synthetic,
    pub truth: Vec<GroundTruthRecord>,
    pub excluded: Vec<Excluded>,
}

/// Validates `scenario`, draws its textures from `seed` and computes the
/// ground truth.
pub fn generate_synthetic(scenario: &Scenario, seed: u64) -> Result<Generated> {
    let video = Synthetic::new(scenario.clone(), seed)?;
    let (truth, excluded) = scenario.ground_truth();
    Ok(Generated {
        video,
        truth,
        excluded,
    })
}

impl Synthetic {
    pub fn new(scenario: Scenario, seed: u64) -> Result<Self> {
        scenario.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bodies = scenario
            .vehicles
            .iter()
            .map(|v| {
                let (lo, hi) = body_range(v.intensity, v.texture);
                let mut body: Vec<u8> = (0..v.width * v.height)
                    .map(|_| rng.gen_range(lo..=hi))
                    .collect();
                let p = &v.plate;
                let code: Vec<char> = p.code.chars().collect();
                let code: [char; PLATE_CHARS] = code.try_into().expect("validated plate code");
                for py in 0..p.height {
                    for px in 0..p.width {
                        body[(p.dy + py) * v.width + p.dx + px] =
                            if plate_ink(&code, p.width, p.height, px, py) {
                                PLATE_INK
                            } else {
                                PLATE_BACKGROUND
                            };
                    }
                }
                body
            })
            .collect();
        Ok(Synthetic {
            scenario,
            seed,
            bodies,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.scenario.width, self.scenario.height)
    }

    pub fn frame_count(&self) -> u64 {
        self.scenario.frames
    }

    /// Renders frame `t` into `frame`, reusing its buffer.
    pub fn render_into(&self, t: u64, frame: &mut Frame) {
        let s = &self.scenario;
        if frame.width() != s.width || frame.height() != s.height {
            *frame = Frame::filled(t, s.width, s.height, s.background);
        } else {
            frame.pixels_mut().fill(s.background);
        }
        frame.index = t;
        let (w, h) = (s.width, s.height as i64);
        let px = frame.pixels_mut();
        for (v, body) in s.vehicles.iter().zip(&self.bodies) {
            let Some(top) = top_row(v.velocity, v.height, v.entry_frame, t) else {
                continue;
            };
            for row in top.max(0)..(top + v.height as i64).min(h) {
                let src = (row - top) as usize * v.width;
                let dst = row as usize * w + v.x;
                px[dst..dst + v.width].copy_from_slice(&body[src..src + v.width]);
            }
        }
        for o in &s.noise.objects {
            let Some(top) = top_row(o.velocity, o.height, o.entry_frame, t) else {
                continue;
            };
            for row in top.max(0)..(top + o.height as i64).min(h) {
                let dst = row as usize * w + o.x;
                px[dst..dst + o.width].fill(o.intensity);
            }
        }
        if s.noise.salt_pepper > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            rng.set_stream(t + 1);
            let n = (s.noise.salt_pepper * px.len() as f64).round() as usize;
            for _ in 0..n {
                let i = rng.gen_range(0..px.len());
                px[i] = if rng.gen::<bool>() { 255 } else { 0 };
            }
        }
    }

    pub fn render(&self, t: u64) -> Frame {
        let mut f = Frame::filled(t, self.scenario.width, self.scenario.height, 0);
        self.render_into(t, &mut f);
        f
    }

    /// Plates entirely inside frame `t`.
    pub fn plate_boxes(&self, t: u64) -> Vec<PlateBox> {
        let s = &self.scenario;
        s.vehicles
            .iter()
            .enumerate()
            .filter_map(|(id, v)| {
                let top = top_row(v.velocity, v.height, v.entry_frame, t)?;
                let y0 = top + v.plate.dy as i64;
                let y1 = y0 + v.plate.height as i64;
                if y0 < 0 || y1 > s.height as i64 {
                    return None;
                }
                Some(PlateBox {
                    vehicle: id as u32,
                    x0: v.x + v.plate.dx,
                    y0: y0 as usize,
                    x1: v.x + v.plate.dx + v.plate.width,
                    y1: y1 as usize,
                    code: v.plate.code.clone(),
                })
            })
            .collect()
    }

    pub fn frames(&self) -> SyntheticFrames<'_> {
        SyntheticFrames {
            video: self,
            next: 0,
        }
    }
}

/// Frame-by-frame iterator over a [`Synthetic`] video.
pub struct SyntheticFrames<'a> {
    video: &'a Synthetic,
    next: u64,
}

impl Iterator for SyntheticFrames<'_> {
    type Item = Result<Frame>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.next >= self.video.scenario.frames {
            return None;
        }
        let f = self.video.render(self.next);
        self.next += 1;
        Some(Ok(f))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = (self.video.scenario.frames - self.next) as usize;
        (n, Some(n))
    }
}

impl FrameSource for SyntheticFrames<'_> {
    fn dimensions(&self) -> (usize, usize) {
        self.video.dimensions()
    }

    fn frame_count(&self) -> Option<u64> {
        Some(self.video.scenario.frames)
    }
}

/// Parameters for [`random_traffic`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficParams {
    pub width: usize,
    pub height: usize,
    pub lambda: usize,
    pub vehicles: usize,
    pub min_width: usize,
    pub max_width: usize,
    pub min_height: usize,
    pub max_height: usize,
    pub min_velocity: f64,
    pub max_velocity: f64,
    /// Largest pause between consecutive entries, in frames.
    pub max_entry_gap: u64,
    /// Sub-threshold objects mixed into the traffic.
    pub noise_objects: usize,
    pub max_noise_width: usize,
}

impl Default for TrafficParams {
    fn default() -> Self {
        TrafficParams {
            width: 640,
            height: 480,
            lambda: 300,
            vehicles: 5,
            min_width: 150,
            max_width: 260,
            min_height: 60,
            max_height: 160,
            min_velocity: 1.0,
            max_velocity: 8.0,
            max_entry_gap: 30,
            noise_objects: 0,
            max_noise_width: 40,
        }
    }
}

const PLATE_W: usize = 98;
const PLATE_H: usize = 18;
/// Horizontal clearance between objects that share the line at the same time.
const X_CLEARANCE: usize = 24;
/// Temporal guard added around each object's time on the line.
const T_GUARD: u64 = 4;

fn random_code(rng: &mut ChaCha8Rng) -> String {
    let mut s = String::with_capacity(7);
    for _ in 0..3 {
        s.push(rng.gen_range(b'A'..=b'Z') as char);
    }
    for _ in 0..4 {
        s.push(rng.gen_range(b'0'..=b'9') as char);
    }
    s
}

/// Draws a scenario of plated vehicles that never share the line with an
/// x-overlapping neighbor, plus optional narrow noise objects placed clear
/// of the vehicles.
pub fn random_traffic(params: &TrafficParams, seed: u64) -> Result<Scenario> {
    let p = params;
    if p.min_width < PLATE_W + 2
        || p.max_width < p.min_width
        || p.max_width + 2 * X_CLEARANCE > p.width
    {
        return Err(Error::InvalidParameter("vehicle widths do not fit".into()));
    }
    if p.min_height < PLATE_H + 8 || p.max_height < p.min_height || p.lambda >= p.height {
        return Err(Error::InvalidParameter("vehicle heights do not fit".into()));
    }
    if !(p.min_velocity > 0.0 && p.max_velocity >= p.min_velocity) {
        return Err(Error::InvalidParameter("bad velocity range".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let background = 100u8;
    // (x0, x1, on, off) for everything already placed
    let mut occupied: Vec<(usize, usize, u64, u64)> = Vec::new();
    let clash = |occ: &[(usize, usize, u64, u64)], x0: usize, x1: usize, on: u64, off: u64| {
        occ.iter().any(|&(a0, a1, t0, t1)| {
            on <= t1 + T_GUARD
                && t0 <= off + T_GUARD
                && x0 < a1 + X_CLEARANCE
                && a0 < x1 + X_CLEARANCE
        })
    };
    let mut vehicles = Vec::with_capacity(p.vehicles);
    let mut entry = 0u64;
    let mut last_off = 0u64;
    for _ in 0..p.vehicles {
        entry += rng.gen_range(0..=p.max_entry_gap);
        let width = rng.gen_range(p.min_width..=p.max_width);
        let height = rng.gen_range(p.min_height..=p.max_height);
        let velocity = if p.max_velocity > p.min_velocity {
            rng.gen_range(p.min_velocity..p.max_velocity)
        } else {
            p.min_velocity
        };
        let (x, on, off) = loop {
            let Some((on, off)) = line_window(velocity, height, entry, p.lambda) else {
                return Err(Error::InvalidParameter(format!(
                    "velocity {velocity} skips a {height}px body over the line"
                )));
            };
            let found = (0..64).find_map(|_| {
                let x = rng.gen_range(0..=p.width - width);
                (!clash(&occupied, x, x + width, on, off)).then_some(x)
            });
            match found {
                Some(x) => break (x, on, off),
                None => entry += 5,
            }
        };
        occupied.push((x, x + width, on, off));
        last_off = last_off.max(off);
        let bright = rng.gen_bool(0.5);
        let intensity = if bright {
            rng.gen_range(160..=180)
        } else {
            rng.gen_range(35..=50)
        };
        vehicles.push(VehicleSpec {
            x,
            width,
            height,
            velocity,
            entry_frame: entry,
            intensity,
            texture: if bright { 30 } else { 20 },
            plate: PlateSpec {
                dx: (width - PLATE_W) / 2,
                dy: 6,
                width: PLATE_W,
                height: PLATE_H,
                code: random_code(&mut rng),
            },
        });
    }
    let mut objects = Vec::with_capacity(p.noise_objects);
    let horizon = last_off.max(1);
    for _ in 0..p.noise_objects {
        for _attempt in 0..256 {
            let width = rng.gen_range(2..=p.max_noise_width.max(2));
            let height = rng.gen_range(4..=40);
            let velocity = rng.gen_range(1.0..6.0);
            let entry_frame = rng.gen_range(0..horizon);
            let Some((on, off)) = line_window(velocity, height, entry_frame, p.lambda) else {
                continue;
            };
            let x = rng.gen_range(0..=p.width - width);
            if clash(&occupied, x, x + width, on, off) {
                continue;
            }
            occupied.push((x, x + width, on, off));
            last_off = last_off.max(off);
            objects.push(NoiseObject {
                x,
                width,
                height,
                velocity,
                entry_frame,
                intensity: if rng.gen_bool(0.5) { 20 } else { 200 },
            });
            break;
        }
    }
    Ok(Scenario {
        frames: last_off + 16,
        width: p.width,
        height: p.height,
        fps: 30.0,
        lambda: p.lambda,
        background,
        vehicles,
        noise: NoiseSpec {
            salt_pepper: 0.0,
            objects,
        },
    })
}
