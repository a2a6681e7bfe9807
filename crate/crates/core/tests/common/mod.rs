#![allow(dead_code)]

use mvquad::{Frame, GridGeometry, MergePolicy, MixedForest, Mode, MotionField, MotionVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Grid shapes the round-trip suites sweep.
pub fn geometry_classes() -> Vec<GridGeometry> {
    [(64, 64, 16, 64), (256, 128, 16, 64), (128, 128, 8, 64), (64, 64, 8, 32), (64, 32, 32, 32)]
        .into_iter()
        .map(|(w, h, min, max)| GridGeometry::new(w, h, min, max).unwrap())
        .collect()
}

pub fn random_vector(rng: &mut ChaCha8Rng, d: i32) -> MotionVector {
    MotionVector::new(rng.gen_range(-d..=d), rng.gen_range(-d..=d))
}

/// Blocky random field: each cell becomes uniform with probability
/// `p_stop`, otherwise it recurses. A few base blocks then get jittered by
/// ±1 so relaxed merging has something to do.
pub fn random_field(rng: &mut ChaCha8Rng, geom: &GridGeometry, d_max: u32) -> MotionField {
    let d = d_max as i32;
    let bw = geom.blocks_x();
    let mut vs = vec![MotionVector::ZERO; geom.base_blocks()];
    let p_stop = rng.gen_range(0.0..0.9);
    #[allow(clippy::too_many_arguments)]
    fn fill(
        rng: &mut ChaCha8Rng,
        vs: &mut [MotionVector],
        bw: usize,
        bx: usize,
        by: usize,
        span: usize,
        p_stop: f64,
        d: i32,
    ) {
        if span == 1 || rng.gen_bool(p_stop) {
            let v = random_vector(rng, d);
            for y in by..by + span {
                vs[y * bw + bx..y * bw + bx + span].fill(v);
            }
            return;
        }
        let h = span / 2;
        for (x, y) in [(bx, by), (bx + h, by), (bx, by + h), (bx + h, by + h)] {
            fill(rng, vs, bw, x, y, h, p_stop, d);
        }
    }
    let span = geom.root_span();
    for ry in 0..geom.roots_y() {
        for rx in 0..geom.roots_x() {
            fill(rng, &mut vs, bw, rx * span, ry * span, span, p_stop, d);
        }
    }
    let jitter = rng.gen_range(0..=geom.base_blocks() / 4);
    for _ in 0..jitter {
        let i = rng.gen_range(0..vs.len());
        let v = vs[i];
        vs[i] = MotionVector::new(
            (v.dx + rng.gen_range(-1..=1)).clamp(-d, d),
            (v.dy + rng.gen_range(-1..=1)).clamp(-d, d),
        );
    }
    MotionField::new(*geom, d_max, vs).unwrap()
}

pub fn random_modes(rng: &mut ChaCha8Rng, geom: &GridGeometry, d_max: u32) -> Vec<Mode> {
    let field = random_field(rng, geom, d_max);
    let p_intra = rng.gen_range(0.0..1.0);
    // Intra decisions arrive in 2x2-aligned patches so they can merge.
    let bw = geom.blocks_x();
    let mut patch_intra = vec![false; geom.base_blocks()];
    for py in (0..geom.blocks_y()).step_by(2.min(geom.blocks_y())) {
        for px in (0..bw).step_by(2.min(bw)) {
            let intra = rng.gen_bool(p_intra);
            for y in py..(py + 2).min(geom.blocks_y()) {
                for x in px..(px + 2).min(bw) {
                    patch_intra[y * bw + x] = intra;
                }
            }
        }
    }
    field
        .vectors()
        .iter()
        .zip(patch_intra)
        .map(|(v, intra)| if intra { Mode::Intra } else { Mode::Inter(*v) })
        .collect()
}

pub fn random_mixed_forest(rng: &mut ChaCha8Rng, geom: &GridGeometry) -> MixedForest {
    let modes = random_modes(rng, geom, 7);
    let merge = if rng.gen_bool(0.5) { MergePolicy::Exact } else { MergePolicy::relaxed(1) };
    MixedForest::from_modes(geom, 7, &modes, merge).unwrap()
}

pub fn noise_frame(rng: &mut ChaCha8Rng, w: usize, h: usize) -> Frame {
    Frame::from_fn(w, h, |_, _| rng.gen()).unwrap()
}

/// Smooth texture: a sum of a few low-frequency waves.
pub fn smooth_frame(rng: &mut ChaCha8Rng, w: usize, h: usize) -> Frame {
    let waves: Vec<(f64, f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.gen_range(0.02..0.2),
                rng.gen_range(0.02..0.2),
                rng.gen_range(0.0..std::f64::consts::TAU),
                rng.gen_range(10.0..40.0),
            )
        })
        .collect();
    Frame::from_fn(w, h, |x, y| {
        let v: f64 = waves
            .iter()
            .map(|(fx, fy, ph, a)| a * (fx * x as f64 + fy * y as f64 + ph).sin())
            .sum();
        (128.0 + v).clamp(0.0, 255.0) as u8
    })
    .unwrap()
}

/// `target(x, y) = reference(x - sx, y - sy)` with edge clamping.
pub fn shifted(reference: &Frame, sx: i32, sy: i32) -> Frame {
    let (w, h) = (reference.width() as i32, reference.height() as i32);
    Frame::from_fn(w as usize, h as usize, |x, y| {
        let ux = (x as i32 - sx).clamp(0, w - 1) as usize;
        let uy = (y as i32 - sy).clamp(0, h - 1) as usize;
        reference.get(ux, uy)
    })
    .unwrap()
}
