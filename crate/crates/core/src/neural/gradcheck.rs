//! Central finite-difference verification of analytic gradients.

use super::dropout::DropoutMasks;
use super::model::ModelParams;
use super::NeuralError;

/// Denominator floor for the relative error, so gradients that are
/// essentially zero are compared in absolute terms.
pub const REL_ERROR_FLOOR: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    /// (tensor index, element index) of the worst parameter.
    pub worst: (usize, usize),
    pub checked: usize,
    pub max_input_rel_error: f64,
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_ERROR_FLOOR)
}

fn loss_with(
    model: &ModelParams,
    xs: &[Vec<f64>],
    label: usize,
    masks: Option<&DropoutMasks>,
) -> Result<f64, NeuralError> {
    Ok(model.forward(xs, masks)?.loss(label))
}

/// Compares the backward pass against central differences with step `eps`
/// for every scalar parameter and every input component.
pub fn check_gradients(
    model: &ModelParams,
    xs: &[Vec<f64>],
    label: usize,
    masks: Option<&DropoutMasks>,
    eps: f64,
) -> Result<GradCheckReport, NeuralError> {
    let pass = model.forward(xs, masks)?;
    let mut grads = model.zeros_like();
    let dxs = model.backward(&pass, label, 1.0, &mut grads)?;

    let mut probe = model.clone();
    let analytic: Vec<Vec<f64>> = grads.tensors().iter().map(|t| t.to_vec()).collect();
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst: (0, 0),
        checked: 0,
        max_input_rel_error: 0.0,
    };

    for (ti, tensor) in analytic.iter().enumerate() {
        for (j, &a) in tensor.iter().enumerate() {
            let orig = probe.tensors()[ti][j];
            probe.tensors_mut()[ti][j] = orig + eps;
            let plus = loss_with(&probe, xs, label, masks)?;
            probe.tensors_mut()[ti][j] = orig - eps;
            let minus = loss_with(&probe, xs, label, masks)?;
            probe.tensors_mut()[ti][j] = orig;

            let numeric = (plus - minus) / (2.0 * eps);
            let err = relative_error(a, numeric);
            if err > report.max_rel_error {
                report.max_rel_error = err;
                report.worst = (ti, j);
            }
            report.checked += 1;
        }
    }

    let mut xs_probe = xs.to_vec();
    for k in 0..xs.len() {
        for j in 0..xs[k].len() {
            let orig = xs[k][j];
            xs_probe[k][j] = orig + eps;
            let plus = loss_with(model, &xs_probe, label, masks)?;
            xs_probe[k][j] = orig - eps;
            let minus = loss_with(model, &xs_probe, label, masks)?;
            xs_probe[k][j] = orig;
            let numeric = (plus - minus) / (2.0 * eps);
            report.max_input_rel_error = report.max_input_rel_error.max(relative_error(dxs[k][j], numeric));
        }
    }
    Ok(report)
}
