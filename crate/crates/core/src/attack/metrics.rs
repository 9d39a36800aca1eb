use crate::error::{Error, Result};
use crate::model::{ImageBuffer, WatermarkSpec};
use crate::spectral::{carrier_magnitude, sample_cells, CellGrid};

/// `10 log10(mean E(1-cells) / mean E(0-cells))` on the carrier magnitude.
///
/// The 0-bit cells are the noise floor. Fails with [`Error::Degenerate`]
/// when they carry no energy; callers wanting a value use `+inf`.
pub fn spectrum_snr(photo: &ImageBuffer, spec: &WatermarkSpec) -> Result<f64> {
    let grid = sample_cells(&carrier_magnitude(photo), spec.layout())?;
    snr_from_grid(&grid, spec)
}

pub(crate) fn snr_from_grid(grid: &CellGrid, spec: &WatermarkSpec) -> Result<f64> {
    let (mut s1, mut n1, mut s0, mut n0) = (0.0, 0usize, 0.0, 0usize);
    for (e, b) in grid.flat().into_iter().zip(spec.cell_bits()) {
        if b {
            s1 += e;
            n1 += 1;
        } else {
            s0 += e;
            n0 += 1;
        }
    }
    if n1 == 0 || n0 == 0 {
        return Err(Error::Degenerate("SNR needs both 1-bit and 0-bit cells".into()));
    }
    let (m1, m0) = (s1 / n1 as f64, s0 / n0 as f64);
    if m0 == 0.0 {
        return Err(Error::Degenerate("0-bit cells carry no energy".into()));
    }
    Ok(10.0 * (m1 / m0).log10())
}

/// Bins below this fraction of `|DC| + 1` count as transform round-off.
const ROUNDOFF: f64 = 1e-10;

/// `(mean E1 - mean E0) / (mean E1 + mean E0)` over a spec's cells, 0 when
/// both means vanish.
pub fn cell_separation(photo: &ImageBuffer, spec: &WatermarkSpec) -> Result<f64> {
    let mag = carrier_magnitude(photo);
    let dc = mag.get(mag.width() / 2, mag.height() / 2);
    let floor = ROUNDOFF * (dc + 1.0);
    let grid = sample_cells(&mag.map(|v| if v < floor { 0.0 } else { v }), spec.layout())?;
    let (mut s1, mut n1, mut s0, mut n0) = (0.0, 0usize, 0.0, 0usize);
    for (e, b) in grid.flat().into_iter().zip(spec.cell_bits()) {
        if b {
            s1 += e;
            n1 += 1;
        } else {
            s0 += e;
            n0 += 1;
        }
    }
    let m1 = if n1 > 0 { s1 / n1 as f64 } else { 0.0 };
    let m0 = if n0 > 0 { s0 / n0 as f64 } else { 0.0 };
    Ok(if m1 + m0 == 0.0 { 0.0 } else { (m1 - m0) / (m1 + m0) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Payload, RingLayout};
    use crate::spectral::CellGrid;

    #[test]
    fn equal_energies_give_zero_db() {
        let l = RingLayout::new(0.1, 0.3, 3, 16).unwrap();
        let spec = WatermarkSpec::new(l, "101010101010101010101010".parse::<Payload>().unwrap(), 1.0, 0).unwrap();
        let grid = CellGrid { layout: l, energies: vec![vec![2.0; 16]; 3], bin_counts: vec![vec![10; 16]; 3] };
        assert_eq!(snr_from_grid(&grid, &spec).unwrap(), 0.0);
        let zero = CellGrid { energies: vec![vec![0.0; 16]; 3], ..grid };
        assert!(matches!(snr_from_grid(&zero, &spec), Err(Error::Degenerate(_))));
    }

    #[test]
    fn flat_image_has_no_separation() {
        let spec =
            WatermarkSpec::new(RingLayout::default(), "101010101010101010101010".parse::<Payload>().unwrap(), 1.0, 0)
                .unwrap();
        let flat = ImageBuffer::filled(120, 90, &[0.9, 0.9, 0.9]).unwrap();
        assert_eq!(cell_separation(&flat, &spec).unwrap(), 0.0);
    }
}
