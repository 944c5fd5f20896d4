use rayon::prelude::*;

use crate::color::{lab_distance, ColorTheme, Lab};
use crate::error::ClusterError;

/// Average within-cluster sum: `(1/K) Σ_i ||x_i - m(x_i)||`, with `m(x_i)` the
/// theme color nearest to pixel `x_i`, all in CIELab.
///
/// Distances are summed as plain norms, not squared.
pub fn acs(pixels: &[Lab], theme: &ColorTheme) -> Result<f64, ClusterError> {
    acs_centers(pixels, &theme.lab_colors())
}

pub fn acs_centers(pixels: &[Lab], centers: &[Lab]) -> Result<f64, ClusterError> {
    if pixels.is_empty() || centers.is_empty() {
        return Err(ClusterError::EmptyPixelSet);
    }
    let dists: Vec<f64> = pixels
        .par_iter()
        .map(|x| {
            centers
                .iter()
                .map(|m| lab_distance(x, m))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    Ok(dists.iter().sum::<f64>() / centers.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::color::ColorRGB;

    fn theme() -> ColorTheme {
        ColorTheme::uniform(
            [
                ColorRGB::BLACK,
                ColorRGB::WHITE,
                ColorRGB::new(1.0, 0.0, 0.0),
                ColorRGB::new(0.0, 1.0, 0.0),
                ColorRGB::new(0.0, 0.0, 1.0),
            ],
            "t",
        )
    }

    #[test]
    fn exact_members_give_zero() {
        let t = theme();
        let px: Vec<Lab> = t.lab_colors().iter().cycle().take(23).copied().collect();
        assert!(acs(&px, &t).unwrap() < 1e-9);
    }

    #[test]
    fn single_pixel_arithmetic() {
        let t = theme();
        let black = t.lab_colors()[0];
        let px = [[black[0] + 3.0, black[1] + 4.0, black[2]]];
        assert!((acs(&px, &t).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn empty_pixels() {
        assert!(matches!(
            acs(&[], &theme()),
            Err(ClusterError::EmptyPixelSet)
        ));
    }

    #[test]
    fn order_invariant() {
        let t = theme();
        let px: Vec<Lab> = (0..50)
            .map(|i| [i as f64 * 2.0, (i % 7) as f64 * 10.0 - 30.0, 5.0])
            .collect();
        let r = t.reordered(&[3, 1, 4, 0, 2]);
        assert!((acs(&px, &t).unwrap() - acs(&px, &r).unwrap()).abs() < 1e-9);
    }
}
