//! Forward ("writing") prediction: every reference block is copied to its
//! displaced address in the predicted frame.
//!
//! Blocks are written in row-major order and a later write overwrites an
//! earlier one. Pixels that would land outside the frame are dropped.
//! Positions nobody writes to are holes; [`fill_holes`] patches them with
//! the co-located reference pixel.

use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::motion::MotionField;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Prediction {
    /// Written pixels; holes hold 0.
    pub predicted: Frame,
    /// Row-major, true where at least one write landed.
    pub coverage: Vec<bool>,
    /// Pixel writes that landed on an already written position.
    pub overlap_count: usize,
    pub hole_count: usize,
}

pub fn write_prediction(reference: &Frame, field: &MotionField) -> Result<Prediction> {
    let geom = field.geom();
    if reference.width() != geom.width() || reference.height() != geom.height() {
        return Err(Error::GeometryMismatch(format!(
            "reference is {}x{}, field grid is {}x{}",
            reference.width(),
            reference.height(),
            geom.width(),
            geom.height()
        )));
    }
    let (w, h) = (reference.width(), reference.height());
    let size = geom.min_block();
    let mut predicted = Frame::filled(w, h, 0)?;
    let mut coverage = vec![false; w * h];
    let mut overlap_count = 0;

    for ((ox, oy), v) in geom.block_origins().zip(field.vectors()) {
        for y in oy..oy + size {
            let ty = y as i64 + v.dy as i64;
            if ty < 0 || ty >= h as i64 {
                continue;
            }
            for x in ox..ox + size {
                let tx = x as i64 + v.dx as i64;
                if tx < 0 || tx >= w as i64 {
                    continue;
                }
                let (tx, ty) = (tx as usize, ty as usize);
                let idx = ty * w + tx;
                if coverage[idx] {
                    overlap_count += 1;
                }
                coverage[idx] = true;
                predicted.set(tx, ty, reference.get(x, y));
            }
        }
    }
    let hole_count = coverage.iter().filter(|c| !**c).count();
    Ok(Prediction {
        predicted: predicted.with_index(reference.index + 1),
        coverage,
        overlap_count,
        hole_count,
    })
}

/// Replaces uncovered pixels with the co-located reference pixel.
pub fn fill_holes(pred: &Prediction, reference: &Frame) -> Result<Frame> {
    pred.predicted.same_dims(reference)?;
    let samples = pred
        .predicted
        .samples()
        .iter()
        .zip(reference.samples())
        .zip(&pred.coverage)
        .map(|((&p, &r), &c)| if c { p } else { r })
        .collect();
    Ok(Frame::new(reference.width(), reference.height(), samples)?.with_index(pred.predicted.index))
}

/// Mean absolute difference over whole frames.
pub fn frame_mad(a: &Frame, b: &Frame) -> Result<f64> {
    a.same_dims(b)?;
    let sad: u64 = a
        .samples()
        .iter()
        .zip(b.samples())
        .map(|(&x, &y)| x.abs_diff(y) as u64)
        .sum();
    Ok(sad as f64 / a.samples().len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::GridGeometry;
    use crate::motion::MotionVector;

    fn ramp(w: usize, h: usize) -> Frame {
        Frame::from_fn(w, h, |x, y| (x * 7 + y * 13) as u8).unwrap()
    }

    #[test]
    fn zero_field_copies_reference() {
        let g = GridGeometry::new(32, 32, 8, 32).unwrap();
        let f = ramp(32, 32);
        let p = write_prediction(&f, &MotionField::zero(g, 7)).unwrap();
        assert_eq!(p.predicted.samples(), f.samples());
        assert!(p.coverage.iter().all(|c| *c));
        assert_eq!((p.hole_count, p.overlap_count), (0, 0));
    }

    #[test]
    fn single_block_shift_leaves_one_column_hole() {
        // 4x2 base grid of 4x4 blocks; block (1,0) moves right by one.
        let g = GridGeometry::new(16, 8, 4, 4).unwrap();
        let f = ramp(16, 8);
        let mut v = vec![MotionVector::ZERO; 8];
        v[1] = MotionVector::new(1, 0);
        let p = write_prediction(&f, &MotionField::new(g, 7, v).unwrap()).unwrap();

        // Independent simulation of the write order.
        let mut expect = vec![None; 16 * 8];
        for (i, (ox, oy)) in g.block_origins().enumerate() {
            let dx = if i == 1 { 1 } else { 0 };
            for y in oy..oy + 4 {
                for x in ox..ox + 4 {
                    expect[y * 16 + x + dx] = Some(f.get(x, y));
                }
            }
        }
        let holes = expect.iter().filter(|e| e.is_none()).count();
        assert_eq!(holes, 4);
        assert_eq!(p.hole_count, holes);
        // Block 2 is written after block 1 and reclaims column 8.
        assert_eq!(p.overlap_count, 4);
        for (i, e) in expect.iter().enumerate() {
            assert_eq!(p.coverage[i], e.is_some());
            if let Some(val) = e {
                assert_eq!(p.predicted.samples()[i], *val);
            }
        }
    }

    #[test]
    fn later_block_wins_collision() {
        // Blocks 0 and 1 (2x2 each) both land on columns 2..4.
        let g = GridGeometry::new(4, 2, 2, 2).unwrap();
        let f = Frame::new(4, 2, vec![1, 2, 3, 4, 5, 6, 7, 8]).unwrap();
        let field = MotionField::new(g, 7, vec![MotionVector::new(2, 0), MotionVector::ZERO]).unwrap();
        let p = write_prediction(&f, &field).unwrap();
        assert_eq!(&p.predicted.samples()[2..4], &[3, 4]);
        assert_eq!(&p.predicted.samples()[6..8], &[7, 8]);
        assert_eq!(p.hole_count, 4);
        assert_eq!(p.overlap_count, 4);
    }

    #[test]
    fn clipped_writes() {
        let g = GridGeometry::new(4, 4, 4, 4).unwrap();
        let f = ramp(4, 4);
        let field = MotionField::new(g, 7, vec![MotionVector::new(-2, 3)]).unwrap();
        let p = write_prediction(&f, &field).unwrap();
        assert_eq!(p.hole_count, 16 - 2);
        assert_eq!(p.predicted.get(0, 3), f.get(2, 0));
    }

    #[test]
    fn fill_holes_selects() {
        let reference = Frame::new(2, 2, vec![10, 20, 30, 40]).unwrap();
        let pred = Prediction {
            predicted: Frame::new(2, 2, vec![1, 2, 3, 4]).unwrap(),
            coverage: vec![true, false, false, true],
            overlap_count: 0,
            hole_count: 2,
        };
        assert_eq!(fill_holes(&pred, &reference).unwrap().samples(), &[1, 20, 30, 4]);

        let all = Prediction {
            coverage: vec![true; 4],
            ..pred.clone()
        };
        assert_eq!(fill_holes(&all, &reference).unwrap(), all.predicted);
        let none = Prediction {
            coverage: vec![false; 4],
            ..pred
        };
        assert_eq!(fill_holes(&none, &reference).unwrap().samples(), reference.samples());
    }

    #[test]
    fn frame_mad_examples() {
        let a = Frame::new(2, 1, vec![0, 10]).unwrap();
        let b = Frame::new(2, 1, vec![4, 2]).unwrap();
        assert_eq!(frame_mad(&a, &b).unwrap(), 6.0);
        assert_eq!(frame_mad(&a, &a).unwrap(), 0.0);
        let z = Frame::filled(3, 3, 0).unwrap();
        let o = Frame::filled(3, 3, 255).unwrap();
        assert_eq!(frame_mad(&z, &o).unwrap(), 255.0);
        assert!(frame_mad(&a, &z).is_err());
    }
}
