//! Decibel and power-unit conversions. Everything inside the crate is linear
//! and in Watts; dB and dBm only appear at the I/O boundary.

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm) * 1e-3
}

pub fn watts_to_dbm(w: f64) -> f64 {
    linear_to_db(w * 1e3)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dbm_round_trip() {
        for dbm in [-86.46, 0.0, 30.0, 39.0] {
            assert!((watts_to_dbm(dbm_to_watts(dbm)) - dbm).abs() < 1e-12);
        }
        assert!((dbm_to_watts(30.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn default_power_levels() {
        // 38.13 dBm is about 6.5 W and 39 dBm about 7.9 W (7.94 exactly).
        assert!((dbm_to_watts(38.13) - 6.5).abs() / 6.5 < 5e-3);
        assert!((dbm_to_watts(39.0) - 7.9).abs() / 7.9 < 1e-2);
    }
}
