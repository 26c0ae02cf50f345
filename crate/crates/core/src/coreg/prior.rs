use super::{CoregError, Result, ShiftPrior};
use crate::georef::{ecef_to_geodetic, enu_basis, AcqMetadata, GeorefError, Georeferencer};
use crate::raster::BandId;

/// Expected shift of `target` relative to `reference` from the focal-plane
/// row separation projected through the acquisition geometry at `t_line`
/// (scene center column). The result is expressed in output pixels: columns
/// for `dx`, lines for `dy`.
pub fn predict_shift_prior(
    metadata: &AcqMetadata,
    reference: BandId,
    target: BandId,
    t_line: f64,
    gate: f64,
) -> Result<ShiftPrior> {
    if metadata.attitude.is_empty() {
        return Err(CoregError::MissingAttitude);
    }
    let geo = Georeferencer::new(metadata)?;
    let imager = geo.imager();
    let col = (imager.columns as f64 - 1.0) / 2.0;
    let rows = &imager.band_row_offset;
    let g_ref = geo.ground_point(t_line, col, rows.get(reference))?;
    let g_tgt = geo.ground_point(t_line, col, rows.get(target))?;
    let next_line = geo.ground_point(t_line + geo.line_period_s(), col, rows.get(reference))?;
    let next_col = geo.ground_point(t_line, col + 1.0, rows.get(reference))?;

    // Project onto the local horizontal plane before decomposing.
    let up = enu_basis(&ecef_to_geodetic(&g_ref))[2];
    let flat = |v: nalgebra::Vector3<f64>| v - up * v.dot(&up);
    let line_step = flat(next_line - g_ref);
    let col_step = flat(next_col - g_ref);
    let d = flat(g_ref - g_tgt);
    // Solve d = dx·col_step + dy·line_step in the plane.
    let (a, b, c) = (col_step.dot(&col_step), col_step.dot(&line_step), line_step.dot(&line_step));
    let (p, q) = (d.dot(&col_step), d.dot(&line_step));
    let det = a * c - b * b;
    if !(det.abs() > 0.0) {
        return Err(CoregError::Geometry(GeorefError::Metadata("degenerate pixel footprint".into())));
    }
    ShiftPrior::new((p * c - q * b) / det, (q * a - p * b) / det, gate)
}
