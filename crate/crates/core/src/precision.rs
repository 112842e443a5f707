//! Output precision: angles to 0.001 degree, intensities and other derived
//! quantities to six significant figures, wavelengths to 0.001 nm.

pub fn angle(deg: f64) -> String {
    format!("{deg:.3}")
}

pub fn wavelength(nm: f64) -> String {
    format!("{nm:.3}")
}

/// Six significant figures in scientific notation.
pub fn sig6(x: f64) -> String {
    format!("{x:.5e}")
}

/// `x` rounded to six significant figures, for structured output.
pub fn round_sig6(x: f64) -> f64 {
    if x.is_finite() {
        sig6(x).parse().unwrap_or(x)
    } else {
        x
    }
}

pub fn round_angle(deg: f64) -> f64 {
    angle(deg).parse().unwrap_or(deg)
}

pub fn round_wavelength(nm: f64) -> f64 {
    wavelength(nm).parse().unwrap_or(nm)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_precision() {
        assert_eq!(angle(8.263037888), "8.263");
        assert_eq!(sig6(0.0123456789), "1.23457e-2");
        assert_eq!(round_sig6(-1234567.0), -1234570.0);
        assert_eq!(round_angle(20.77951), 20.78);
    }
}
