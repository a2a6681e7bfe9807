//! Exit criteria. Each check prints one PASS/FAIL line; any failure makes
//! the binary exit non-zero.

#![allow(clippy::type_complexity, clippy::neg_cmp_op_on_partial_ord)]

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use mvquad::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn encode_pipeline(field: &MotionField) -> Result<(CostReport, Bitstream, Duration), String> {
    let start = Instant::now();
    let forest = build_bottom_up(field, field.geom(), MergePolicy::Exact).map_err(|e| e.to_string())?;
    let bits = encode_interframe(&forest, false).map_err(|e| e.to_string())?;
    let back = decode_interframe(&bits, field.geom(), 7, false).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure!(back == forest, "decode mismatch");
    Ok((cost_report(&forest, false), bits, elapsed))
}

fn coarse() -> Outcome {
    let field = synthetic::coarse_field(2024);
    let (r, bits, t) = encode_pipeline(&field)?;
    let counts: Vec<_> = r.counts.iter().map(|(a, b)| (*a, *b)).collect();
    ensure!(counts == synthetic::COARSE, "composition {counts:?}");
    ensure!(r.equivalent_total() == 256, "subimages {}", r.equivalent_total());
    ensure!(r.tree_bits == 48, "tree bits {}", r.tree_bits);
    ensure!(r.vector_bytes == 91, "vector bytes {}", r.vector_bytes);
    ensure!(r.total_bytes == 97 && bits.byte_len() == 97, "total {} / stream {}", r.total_bytes, bits.byte_len());
    ensure!((r.ratio_percent - 37.9).abs() <= 0.05, "ratio {}", r.ratio_percent);
    ensure!(r.ratio_decimal() == "100:37.9", "{}", r.ratio_decimal());
    ensure!(t < Duration::from_secs(1), "took {t:?}");
    Ok(format!("48 tree bits + 91 vector bytes = 97 bytes, {:.2}% of 256, {t:?}", r.ratio_percent))
}

fn fine() -> Outcome {
    let field = synthetic::fine_field(2024);
    let (r, bits, t) = encode_pipeline(&field)?;
    let counts: Vec<_> = r.counts.iter().map(|(a, b)| (*a, *b)).collect();
    ensure!(counts == synthetic::FINE, "composition {counts:?}");
    ensure!(r.equivalent_total() == 1024, "subimages {}", r.equivalent_total());
    ensure!(r.tree_bits == 268, "tree bits {}", r.tree_bits);
    ensure!(r.vector_bytes == 514, "vector bytes {}", r.vector_bytes);
    ensure!((53.0..=54.0).contains(&r.ratio_percent), "ratio {}", r.ratio_percent);
    ensure!(bits.byte_len() == r.total_bytes, "stream {} vs report {}", bits.byte_len(), r.total_bytes);
    ensure!(t < Duration::from_secs(1), "took {t:?}");
    Ok(format!("268 tree bits, 514 vector bytes, {} bytes = {:.2}% of 1024, {t:?}", r.total_bytes, r.ratio_percent))
}

fn bounds_interframe() -> Outcome {
    let g = GridGeometry::new(256, 128, 16, 64).unwrap();
    let (best, worst) = theoretical_bounds(&g, false);
    let (best_f, worst_f) = theoretical_bounds(&g, true);
    ensure!(best.total_bytes == 9, "best {}", best.total_bytes);
    ensure!(worst.total_bytes == 133, "worst {}", worst.total_bytes);
    ensure!(best_f.total_bytes == 10, "best with flag {}", best_f.total_bytes);
    ensure!(best.ratio_integer() == "100:7", "{}", best.ratio_integer());
    ensure!(worst.ratio_integer() == "100:104", "{}", worst.ratio_integer());
    ensure!(best_f.ratio_integer() == "100:8", "{}", best_f.ratio_integer());
    Ok(format!(
        "N:{} N:{} N:{} (worst with flag N:{} documented)",
        best.total_bytes, worst.total_bytes, best_f.total_bytes, worst_f.total_bytes
    ))
}

fn bounds_mixed() -> Outcome {
    let g = GridGeometry::new(64, 64, 16, 64).unwrap();
    let (best, worst) = mixed_bounds(&g, false);
    let (best_f, worst_f) = mixed_bounds(&g, true);
    ensure!(best.fraction() == "16:2", "{}", best.fraction());
    ensure!(worst.fraction() == "16:21", "{}", worst.fraction());
    ensure!(best_f.fraction() == "16:3", "{}", best_f.fraction());
    ensure!(best.ratio_integer() == "100:12", "{}", best.ratio_integer());
    ensure!(worst.ratio_integer() == "100:131", "{}", worst.ratio_integer());
    ensure!(best_f.ratio_integer() == "100:19", "{}", best_f.ratio_integer());
    // The streams themselves have those lengths.
    let modes = vec![Mode::Inter(MotionVector::ZERO); 16];
    let root = MixedForest::from_modes(&g, 7, &modes, MergePolicy::Exact).unwrap();
    let split = MixedForest::unmerged(&g, 7, &modes).unwrap();
    ensure!(encode_mixed(&root, false).unwrap().bit_len() == 2 + 8, "best stream");
    ensure!(encode_mixed(&split, false).unwrap().bit_len() == 21 + 16 * 8, "worst stream");
    Ok(format!(
        "{} {} {} (worst with flag {} documented)",
        best.fraction(),
        worst.fraction(),
        best_f.fraction(),
        worst_f.fraction()
    ))
}

fn codec_inverse() -> Outcome {
    let mut checked = 0;
    for (gi, g) in geometry_classes().iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + gi as u64);
        for i in 0..1000 {
            let field = random_field(&mut rng, g, 7);
            let forest = build_bottom_up(&field, g, MergePolicy::Exact).unwrap();
            ensure!(flatten(&forest) == field, "flatten mismatch, class {gi} case {i}");
            let flag = i % 2 == 0;
            let bits = encode_interframe(&forest, flag).unwrap();
            let back = decode_interframe(&bits, g, 7, flag).map_err(|e| format!("class {gi} case {i}: {e}"))?;
            ensure!(back == forest, "decode mismatch, class {gi} case {i}");
            ensure!(encode_interframe(&back, flag).unwrap() == bits, "re-encode differs, class {gi} case {i}");
            checked += 1;
        }
    }
    Ok(format!("{checked} fields over {} grid classes, 0 failures", geometry_classes().len()))
}

fn construction_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let classes = geometry_classes();
    for i in 0..1000 {
        let g = &classes[i % classes.len()];
        let field = random_field(&mut rng, g, 7);
        let up = build_bottom_up(&field, g, MergePolicy::Exact).unwrap();
        let down = build_top_down(&field, g).unwrap();
        ensure!(up == down, "case {i} differs");
    }
    Ok("1000 fields, top-down == bottom-up".into())
}

fn search_dominance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let params = SearchParams::default();
    let mut blocks = 0;
    let mut strictly_worse = 0;
    for i in 0..200 {
        let reference = match i % 3 {
            0 => noise_frame(&mut rng, 64, 64),
            _ => smooth_frame(&mut rng, 64, 64),
        };
        let target = if i % 4 == 3 {
            noise_frame(&mut rng, 64, 64)
        } else {
            shifted(&reference, rng.gen_range(-7..=7), rng.gen_range(-7..=7))
        };
        for y in (0..64).step_by(16) {
            for x in (0..64).step_by(16) {
                let full = full_search(&reference, &target, (x, y), 16, &params).unwrap();
                let cds = conjugate_direction_search(&reference, &target, (x, y), 16, &params).unwrap();
                ensure!(cds.mad >= full.mad, "pair {i} block ({x},{y}): {} < {}", cds.mad, full.mad);
                strictly_worse += (cds.mad > full.mad) as usize;
                blocks += 1;
            }
        }
    }

    // Separable, per-axis unimodal surfaces: ramps with a shift the descent
    // can follow axis by axis.
    let ramps: [(fn(i32, i32) -> i32, i32, i32); 4] = [
        (|x, _| 3 * x + 20, 5, -2),
        (|_, y| 3 * y + 20, -4, 6),
        (|x, y| x + y + 20, 3, 4),
        (|x, y| x + y + 20, -6, -1),
    ];
    let mut equal = 0;
    for (ramp, sx, sy) in ramps {
        let reference = Frame::from_fn(64, 64, |x, y| ramp(x as i32, y as i32) as u8).unwrap();
        let target = Frame::from_fn(64, 64, |x, y| ramp(x as i32 - sx, y as i32 - sy) as u8).unwrap();
        for y in [8, 16, 24, 32, 40] {
            for x in [8, 16, 24, 32, 40] {
                let full = full_search(&reference, &target, (x, y), 16, &params).unwrap();
                let cds = conjugate_direction_search(&reference, &target, (x, y), 16, &params).unwrap();
                ensure!(cds.mad == full.mad, "ramp shift ({sx},{sy}) block ({x},{y})");
                equal += 1;
            }
        }
    }
    Ok(format!(
        "{blocks} blocks, 0 violations ({strictly_worse} where descent is strictly worse); {equal} unimodal blocks equal"
    ))
}

fn relaxed_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let classes = geometry_classes();
    for i in 0..100 {
        let g = &classes[i % classes.len()];
        let field = random_field(&mut rng, g, 7);
        let mut last = usize::MAX;
        for t in 0..=2u32 {
            let forest = build_bottom_up(&field, g, MergePolicy::relaxed(t)).unwrap();
            let bound = t * (g.levels() as u32 - 1);
            let out = flatten(&decode_interframe(&encode_interframe(&forest, false).unwrap(), g, 7, false).unwrap());
            for (a, b) in out.vectors().iter().zip(field.vectors()) {
                ensure!(a.distance(*b) <= bound, "field {i}, T={t}: {a} vs {b}");
            }
            let bytes = cost_report(&forest, false).total_bytes;
            ensure!(bytes <= last, "field {i}: T={t} costs {bytes} > {last}");
            last = bytes;
        }
    }
    Ok("100 fields, T in {1,2}: error within T*(levels-1), bytes non-increasing".into())
}

fn reconstruction_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let g = GridGeometry::new(256, 256, 16, 64).unwrap();
    let f = noise_frame(&mut rng, 256, 256);
    let pred = write_prediction(&f, &MotionField::zero(g, 7)).unwrap();
    ensure!(pred.hole_count == 0, "holes {}", pred.hole_count);
    let out = fill_holes(&pred, &f).unwrap();
    ensure!(out.samples() == f.samples(), "not bit-exact");
    let mad = frame_mad(&out, &f).unwrap();
    ensure!(mad == 0.0, "mad {mad}");
    Ok("bit-exact, MAD 0".into())
}

fn mixed_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let classes = geometry_classes();
    let mut flat = 0;
    for i in 0..1000 {
        let g = &classes[i % classes.len()];
        let forest = random_mixed_forest(&mut rng, g);
        let flag = i % 2 == 0;
        let bits = encode_mixed(&forest, flag).unwrap();
        ensure!(decode_mixed(&bits, g, 7, flag).unwrap() == forest, "quadtree path, case {i}");
        // Flat path: decodes to the unmerged forest over the same blocks.
        let unmerged = MixedForest::unmerged(g, 7, &forest.flatten()).unwrap();
        let flat_bits = encode_mixed_flat(&forest).unwrap();
        ensure!(decode_mixed(&flat_bits, g, 7, true).unwrap() == unmerged, "flat path, case {i}");
        ensure!(decode_mixed(&encode_mixed_flat(&unmerged).unwrap(), g, 7, true).unwrap() == unmerged, "flat identity, case {i}");
        let auto = encode_mixed_auto(&forest).unwrap();
        flat += (auto.bytes()[0] & 0x80 == 0) as usize;
        ensure!(decode_mixed(&auto, g, 7, true).unwrap().flatten() == forest.flatten(), "auto, case {i}");
    }

    let grid: Vec<f64> = (0..40).map(|k| 1.0 + 0.05 * (k + 1) as f64).collect();
    for _ in 0..10_000 {
        let inter: f64 = rng.gen_range(0.0..50.0);
        let intra: f64 = rng.gen_range(0.0..50.0);
        let mut seen_inter = false;
        for &p in &grid {
            let k = decide_block(inter, intra, p).unwrap();
            ensure!(!(seen_inter && k == PredictorKind::Intra), "not monotone at P={p} ({inter}, {intra})");
            seen_inter |= k == PredictorKind::Inter;
        }
    }
    Ok(format!("1000 forests ({flat} chose the flat path automatically); decisions monotone over a 40-point P grid"))
}

fn temporal() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let classes = geometry_classes();
    for i in 0..200 {
        let g = &classes[i % classes.len()];
        let e = random_field(&mut rng, g, 7);
        let corr = rng.gen_range(0.0..1.0);
        let l: Vec<_> = e
            .vectors()
            .iter()
            .map(|v| if rng.gen_bool(corr) { *v } else { random_vector(&mut rng, 7) })
            .collect();
        let pair = FieldPair::new(e, MotionField::new(*g, 7, l).unwrap()).unwrap();
        let forest = build_3d(&pair, g, MergePolicy::Exact).unwrap();
        ensure!(flatten_3d(&forest) == pair, "round trip, case {i}");
        let bits = encode_3d(&forest, false).unwrap();
        ensure!(decode_3d(&bits, g, 7, false).unwrap() == forest, "stream round trip, case {i}");
    }

    let g = synthetic::coarse_geometry();
    let constant = MotionField::uniform(g, 7, MotionVector::new(2, -3)).unwrap();
    let c3 = cost_report_3d(&build_3d(&FieldPair::new(constant.clone(), constant.clone()).unwrap(), &g, MergePolicy::Exact).unwrap());
    let c2 = cost_report(&build_bottom_up(&constant, &g, MergePolicy::Exact).unwrap(), false);
    ensure!(c3.total_bits() < 2 * c2.total_bits(), "constant: {} vs 2 x {}", c3.total_bits(), c2.total_bits());

    let e = synthetic::coarse_field(1);
    let l: Vec<_> = e
        .vectors()
        .iter()
        .map(|v| MotionVector::new(if v.dx >= 0 { v.dx - 7 } else { v.dx + 7 }.clamp(-7, 7), v.dy))
        .collect();
    let l = MotionField::new(g, 7, l).unwrap();
    ensure!(e.vectors().iter().zip(l.vectors()).all(|(a, b)| a != b), "pair not uncorrelated");
    let u3 = cost_report_3d(&build_3d(&FieldPair::new(e.clone(), l).unwrap(), &g, MergePolicy::Exact).unwrap());
    let single = cost_report(&build_bottom_up(&e, &g, MergePolicy::Exact).unwrap(), false);
    ensure!(u3.vector_bytes >= 2 * single.vector_bytes, "uncorrelated: {} < 2 x {}", u3.vector_bytes, single.vector_bytes);
    Ok(format!(
        "200 pairs round-trip; constant {} bits < 2 x {}; uncorrelated {} vector bytes >= 2 x {}",
        c3.total_bits(),
        c2.total_bits(),
        u3.vector_bytes,
        single.vector_bytes
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("1  coarse composition, min 16", coarse),
        ("2  fine composition, min 8", fine),
        ("3  interframe bounds N=128", bounds_interframe),
        ("4  inter/intra bounds 16 blocks", bounds_mixed),
        ("5  codec inverse", codec_inverse),
        ("6  construction equivalence", construction_equivalence),
        ("7  search oracle dominance", search_dominance),
        ("8  relaxed merge bound", relaxed_bound),
        ("9  reconstruction identity", reconstruction_identity),
        ("10 mixed round trip + monotone P", mixed_round_trip),
        ("11 temporal round trip + savings", temporal),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match std::panic::catch_unwind(check) {
            Ok(Ok(detail)) => println!("PASS  {name}: {detail}"),
            Ok(Err(why)) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
            Err(_) => {
                failed += 1;
                println!("FAIL  {name}: panicked");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
