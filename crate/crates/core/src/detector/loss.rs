//! Box geometry and the grid-detector training loss.
//!
//! The loss is a weighted sum of squared errors over the 32 × 7 prediction
//! grid. For a cell holding an object, four groups contribute: center
//! coordinates, square-rooted extents, confidence against the (boosted) IOU
//! between the truth box and the decoded predicted box, and the two class
//! probabilities. Empty cells contribute only a confidence-toward-zero term.
//! The IOU inside the confidence target is a snapshot of the forward pass:
//! no gradient flows through it into the box coordinates, which keeps the
//! confidence head from fighting the coordinate head. [`yolo_loss_frozen`]
//! evaluates the loss at caller-supplied IOUs so finite-difference oracles
//! can probe exactly the function the gradient describes.
//!
//! # Example
//!
//! ```
//! use specsense::detector::{yolo_loss, yolo_loss_grad};
//! use specsense::io::LossConfig;
//! use specsense::nn::Tensor;
//! use specsense::types::{GridTarget, GRID_CELLS, GRID_FIELDS};
//!
//! // Empty scene, every confidence at 0.5: only the no-object term fires.
//! let p: Tensor<f64> = Tensor::from_vec(
//!     &[GRID_CELLS, GRID_FIELDS],
//!     vec![0.5; GRID_CELLS * GRID_FIELDS],
//! ).unwrap();
//! let hyp = LossConfig::default();
//! let loss = yolo_loss(&p, &GridTarget::empty(), &hyp).unwrap();
//! assert_eq!(loss, hyp.lambda_nobj * 32.0 * 0.25);
//! let (value, grad, _) = yolo_loss_grad(&p, &GridTarget::empty(), &hyp).unwrap();
//! assert_eq!(value, loss);
//! assert_eq!(grad.shape, p.shape);
//! ```

use crate::error::{Error, Result};
use crate::io::config::LossConfig;
use crate::nn::{Scalar, Tensor};
use crate::types::{Box, GridTarget, ObjClass, GRID_CELLS, GRID_FIELDS};

use super::grid::{cell_box_to_global, F_CONF, F_H, F_P_INTERFERENCE, F_P_RADAR, F_W, F_X, F_Y};

/// Extent floor inside the square roots, so the size-term gradient stays
/// finite if a sigmoid saturates toward zero.
const SQRT_FLOOR: f64 = 1e-12;

// ─── box geometry ────────────────────────────────────────────────────────────

/// Intersection-over-union of two boxes. Zero-area union (both boxes
/// degenerate) yields 0.
pub fn iou(a: &Box, b: &Box) -> f64 {
    let fx = span_overlap(a.freq_span(), b.freq_span());
    let ft = span_overlap(a.time_span(), b.time_span());
    let inter = fx * ft;
    let union = a.area() + b.area() - inter;
    if union > 0.0 {
        inter / union
    } else {
        0.0
    }
}

fn span_overlap((a0, a1): (f64, f64), (b0, b1): (f64, f64)) -> f64 {
    (a1.min(b1) - a0.max(b0)).max(0.0)
}

/// IOU with a small-object boost: when the truth box's time extent is below
/// `height_frac` (window fraction), add `boost` and clamp to 1. Radar pulses
/// are tens of microseconds against a 16 ms window, so their plain IOU is
/// tiny even for good predictions; the boost keeps the confidence target
/// informative for them.
pub fn boosted_iou(truth: &Box, pred: &Box, height_frac: f64, boost: f64) -> f64 {
    let base = iou(truth, pred);
    if truth.h < height_frac {
        (base + boost).min(1.0)
    } else {
        base
    }
}

// ─── loss ────────────────────────────────────────────────────────────────────

fn field<S: Scalar>(p: &Tensor<S>, cell: usize, f: usize) -> f64 {
    p.data[cell * GRID_FIELDS + f].to_f64()
}

fn check_grid_shape<S: Scalar>(p: &Tensor<S>, target: &GridTarget) -> Result<()> {
    if p.len() != GRID_CELLS * GRID_FIELDS {
        return Err(Error::InvalidArgument(format!(
            "prediction grid needs {} values, got {}",
            GRID_CELLS * GRID_FIELDS,
            p.len()
        )));
    }
    if target.cells.len() != GRID_CELLS {
        return Err(Error::InvalidArgument(format!(
            "grid target needs {} cells, got {}",
            GRID_CELLS,
            target.cells.len()
        )));
    }
    Ok(())
}

/// Boosted IOU per cell between the truth box and the decoded predicted box,
/// both mapped to window-global coordinates; 0 for empty cells. This is the
/// snapshot the confidence term trains toward.
fn cell_ious<S: Scalar>(p: &Tensor<S>, target: &GridTarget, hyp: &LossConfig) -> Vec<f64> {
    (0..GRID_CELLS)
        .map(|i| match &target.cells[i] {
            None => 0.0,
            Some(t) => {
                let truth = cell_box_to_global(i, t.x, t.y, t.w, t.h);
                let pred = cell_box_to_global(
                    i,
                    field(p, i, F_X),
                    field(p, i, F_Y),
                    field(p, i, F_W),
                    field(p, i, F_H),
                );
                boosted_iou(&truth, &pred, hyp.boost_height_frac, hyp.boost_amount)
            }
        })
        .collect()
}

/// Loss value and gradient with the confidence-target IOUs frozen at the
/// given values. `grad` is `None` to skip gradient assembly.
fn loss_at_ious<S: Scalar>(
    p: &Tensor<S>,
    target: &GridTarget,
    hyp: &LossConfig,
    ious: &[f64],
    mut grad: Option<&mut [S]>,
) -> f64 {
    let mut loss = 0.0;
    let add_grad = |g: &mut Option<&mut [S]>, cell: usize, f: usize, v: f64| {
        if let Some(g) = g {
            g[cell * GRID_FIELDS + f] = S::from_f64(v);
        }
    };
    for i in 0..GRID_CELLS {
        let c_hat = field(p, i, F_CONF);
        match &target.cells[i] {
            None => {
                // No object: push confidence toward 0.
                loss += hyp.lambda_nobj * c_hat * c_hat;
                add_grad(&mut grad, i, F_CONF, 2.0 * hyp.lambda_nobj * c_hat);
            }
            Some(t) => {
                let (x_hat, y_hat) = (field(p, i, F_X), field(p, i, F_Y));
                let (w_hat, h_hat) = (field(p, i, F_W), field(p, i, F_H));
                let (pr_hat, pi_hat) =
                    (field(p, i, F_P_RADAR), field(p, i, F_P_INTERFERENCE));

                // Center coordinates.
                loss += hyp.lambda_coord * ((t.x - x_hat).powi(2) + (t.y - y_hat).powi(2));
                add_grad(&mut grad, i, F_X, -2.0 * hyp.lambda_coord * (t.x - x_hat));
                add_grad(&mut grad, i, F_Y, -2.0 * hyp.lambda_coord * (t.y - y_hat));

                // Square-rooted extents.
                let sw = w_hat.max(SQRT_FLOOR).sqrt();
                let sh = h_hat.max(SQRT_FLOOR).sqrt();
                let (dw, dh) = (t.w.sqrt() - sw, t.h.sqrt() - sh);
                loss += hyp.lambda_coord * (dw * dw + dh * dh);
                add_grad(&mut grad, i, F_W, -hyp.lambda_coord * dw / sw);
                add_grad(&mut grad, i, F_H, -hyp.lambda_coord * dh / sh);

                // Confidence toward the frozen IOU snapshot.
                let dc = ious[i] - c_hat;
                loss += hyp.lambda_obj * dc * dc;
                add_grad(&mut grad, i, F_CONF, -2.0 * hyp.lambda_obj * dc);

                // Class probabilities (one-hot truth).
                let (tr, ti) = match t.class {
                    ObjClass::Radar => (1.0, 0.0),
                    ObjClass::Interference => (0.0, 1.0),
                };
                loss += hyp.lambda_class * ((tr - pr_hat).powi(2) + (ti - pi_hat).powi(2));
                add_grad(&mut grad, i, F_P_RADAR, -2.0 * hyp.lambda_class * (tr - pr_hat));
                add_grad(
                    &mut grad,
                    i,
                    F_P_INTERFERENCE,
                    -2.0 * hyp.lambda_class * (ti - pi_hat),
                );
            }
        }
    }
    loss
}

/// Training loss of a prediction grid against its target.
pub fn yolo_loss<S: Scalar>(p: &Tensor<S>, target: &GridTarget, hyp: &LossConfig) -> Result<f64> {
    check_grid_shape(p, target)?;
    let ious = cell_ious(p, target, hyp);
    Ok(loss_at_ious(p, target, hyp, &ious, None))
}

/// Loss with the confidence-target IOUs supplied by the caller instead of
/// recomputed from `p`. Finite-difference gradient checks must perturb this
/// function (with the IOUs captured once) to match the training gradient,
/// which treats the IOU snapshot as a constant.
pub fn yolo_loss_frozen<S: Scalar>(
    p: &Tensor<S>,
    target: &GridTarget,
    hyp: &LossConfig,
    ious: &[f64],
) -> Result<f64> {
    check_grid_shape(p, target)?;
    if ious.len() != GRID_CELLS {
        return Err(Error::InvalidArgument(format!(
            "need {} frozen IOUs, got {}",
            GRID_CELLS,
            ious.len()
        )));
    }
    Ok(loss_at_ious(p, target, hyp, ious, None))
}

/// Loss value, gradient with respect to every grid entry, and the IOU
/// snapshot the confidence term used.
pub fn yolo_loss_grad<S: Scalar>(
    p: &Tensor<S>,
    target: &GridTarget,
    hyp: &LossConfig,
) -> Result<(f64, Tensor<S>, Vec<f64>)> {
    check_grid_shape(p, target)?;
    let ious = cell_ious(p, target, hyp);
    let mut grad = vec![S::ZERO; p.len()];
    let loss = loss_at_ious(p, target, hyp, &ious, Some(&mut grad));
    Ok((loss, Tensor { shape: p.shape.clone(), data: grad }, ious))
}
