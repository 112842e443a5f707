use pdcsim_core::dispersion::{
    default_database, parse_crystal_database, to_database_string, SellmeierFit, SellmeierForm,
    WavelengthRange,
};
use pdcsim_core::CrystalDispersion;
use proptest::prelude::*;

fn crystals() -> Vec<CrystalDispersion> {
    default_database()
}

proptest! {
    #[test]
    fn on_axis_extraordinary_is_ordinary(frac in 0.0f64..=1.0) {
        for c in crystals() {
            let r = c.valid_range();
            let wl = r.min_nm + frac * (r.max_nm - r.min_nm);
            let n_o = c.index_ordinary(wl).unwrap();
            let n_e0 = c.index_extraordinary_effective(wl, 0.0).unwrap();
            prop_assert!(((n_e0 - n_o) / n_o).abs() <= 1e-12);
        }
    }

    #[test]
    fn effective_index_is_monotone_in_angle(frac in 0.0f64..=1.0) {
        for c in crystals() {
            let r = c.valid_range();
            let wl = r.min_nm + frac * (r.max_nm - r.min_nm);
            let ns: Vec<f64> = (0..=90)
                .map(|d| c.index_extraordinary_effective(wl, d as f64).unwrap())
                .collect();
            let n_o = ns[0];
            let n_e = ns[90];
            // both crystals are negative uniaxial
            prop_assert!(n_e < n_o);
            prop_assert!(ns.windows(2).all(|w| w[1] <= w[0]));
            prop_assert!(ns.iter().all(|&n| n <= n_o && n >= n_e));
        }
    }

    #[test]
    fn database_round_trip_is_bit_exact(
        b1 in 0.1f64..2.0, c1 in 0.0f64..0.03, b2 in 0.0f64..1.0, c2 in 50.0f64..150.0,
        e1 in 0.1f64..1.8, cut in 0.0f64..=90.0,
    ) {
        let range = WavelengthRange::new(300.0, 1200.0);
        let o = SellmeierFit::new(SellmeierForm::Standard, vec![b1, c1, b2, c2], range).unwrap();
        let e = SellmeierFit::new(SellmeierForm::Standard, vec![e1, c1, b2, c2], range).unwrap();
        if let Ok(c) = CrystalDispersion::new("Random", o, e, cut) {
            let mut all = crystals();
            all.push(c);
            let text = to_database_string(&all);
            let again = parse_crystal_database(&text).unwrap();
            prop_assert_eq!(&again, &all);
            prop_assert_eq!(to_database_string(&again), text);
        }
    }
}
