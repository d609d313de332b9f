//! g-factors from the field dependence of the four optical transitions.

use serde::{Deserialize, Serialize};

use crate::constants::MU_B_OVER_H_GHZ_PER_T;
use crate::error::{ensure, Result};

/// Transition frequencies (any common offset, GHz) measured at one field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldTransitions {
    pub field_t: f64,
    /// Centers of A, B, C, D in that order.
    pub centers_ghz: [f64; 4],
    /// Optional 1σ of each center; when absent all separations get equal
    /// weight and the slope errors come from the residual scatter.
    #[serde(default)]
    pub sigmas_ghz: Option<[f64; 4]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GFactorFit {
    pub g_ground: f64,
    pub g_excited: f64,
    pub sigma_ground: f64,
    pub sigma_excited: f64,
    /// d|A − B|/dB in GHz/T.
    pub slope_conserving: f64,
    /// d|C − D|/dB in GHz/T.
    pub slope_flip: f64,
    pub sigma_slope_conserving: f64,
    pub sigma_slope_flip: f64,
}

/// Maps four centers sorted ascending onto transition labels `[A, B, C, D]`.
/// With both g-factors positive the ascending order is D, A, B, C.
pub fn label_sorted_centers(mut centers: [f64; 4]) -> [f64; 4] {
    centers.sort_by(f64::total_cmp);
    [centers[1], centers[2], centers[3], centers[0]]
}

/// Weighted straight-line fit returning `(slope, σ_slope)`.
fn weighted_slope(x: &[f64], y: &[f64], w: Option<&[f64]>) -> (f64, f64) {
    let wi = |i: usize| w.map_or(1.0, |w| w[i]);
    let (mut s, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..x.len() {
        let k = wi(i);
        s += k;
        sx += k * x[i];
        sy += k * y[i];
        sxx += k * x[i] * x[i];
        sxy += k * x[i] * y[i];
    }
    let delta = s * sxx - sx * sx;
    let slope = (s * sxy - sx * sy) / delta;
    let intercept = (sxx * sy - sx * sxy) / delta;
    let var = if w.is_some() {
        s / delta
    } else if x.len() > 2 {
        let chi2: f64 = (0..x.len()).map(|i| (y[i] - intercept - slope * x[i]).powi(2)).sum();
        chi2 / (x.len() - 2) as f64 * s / delta
    } else {
        0.0
    };
    (slope, var.sqrt())
}

/// Regresses |A − B| and |C − D| against the field and converts the slopes
/// into ground and excited g-factors.
pub fn fit_gfactors(data: &[FieldTransitions]) -> Result<GFactorFit> {
    let mut fields: Vec<f64> = data.iter().map(|d| d.field_t).collect();
    fields.sort_by(f64::total_cmp);
    fields.dedup();
    ensure(fields.len() >= 2, || format!("need at least 2 distinct fields, got {}", fields.len()))?;
    for d in data {
        ensure(d.field_t.is_finite() && d.centers_ghz.iter().all(|c| c.is_finite()), || {
            "non-finite field or transition frequency".to_string()
        })?;
    }
    let weighted = data.iter().all(|d| d.sigmas_ghz.is_some());
    let x: Vec<f64> = data.iter().map(|d| d.field_t).collect();
    let ab: Vec<f64> = data.iter().map(|d| (d.centers_ghz[0] - d.centers_ghz[1]).abs()).collect();
    let cd: Vec<f64> = data.iter().map(|d| (d.centers_ghz[2] - d.centers_ghz[3]).abs()).collect();
    let weights = |i: usize, j: usize| -> Result<Vec<f64>> {
        data.iter()
            .map(|d| {
                let s = d.sigmas_ghz.unwrap();
                let var = s[i] * s[i] + s[j] * s[j];
                ensure(var > 0.0 && var.is_finite(), || "center sigmas must be positive and finite".to_string())?;
                Ok(1.0 / var)
            })
            .collect()
    };
    let (w_ab, w_cd) = if weighted { (Some(weights(0, 1)?), Some(weights(2, 3)?)) } else { (None, None) };
    let (d_slope, d_sigma) = weighted_slope(&x, &ab, w_ab.as_deref());
    let (s_slope, s_sigma) = weighted_slope(&x, &cd, w_cd.as_deref());
    let k = MU_B_OVER_H_GHZ_PER_T;
    let combined = (s_sigma.powi(2) + d_sigma.powi(2)).sqrt() / (2.0 * k);
    Ok(GFactorFit {
        g_ground: (s_slope - d_slope) / (2.0 * k),
        g_excited: (s_slope + d_slope) / (2.0 * k),
        sigma_ground: combined,
        sigma_excited: combined,
        slope_conserving: d_slope,
        slope_flip: s_slope,
        sigma_slope_conserving: d_sigma,
        sigma_slope_flip: s_sigma,
    })
}
