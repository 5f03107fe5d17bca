use std::f64::consts::PI;

use chansim::antenna::{
    apply_orientation, db_to_linear, read_ant3d, read_plane_cut_csv, reconstruct_from_cuts, synthesize_3gpp,
    write_ant3d, AntennaPattern, CutPlane, PlaneCut, Polarization, ThreeGppParams,
};
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn normalized_3gpp_integrates_to_4pi_at_two_resolutions() {
    let coarse = synthesize_3gpp(&ThreeGppParams::default(), 1.0).unwrap().normalize_to_4pi().unwrap();
    let fine = synthesize_3gpp(&ThreeGppParams::default(), 0.25).unwrap().normalize_to_4pi().unwrap();
    assert!(rel(coarse.spherical_integral(), 4.0 * PI) < 1e-6);
    assert!(rel(fine.spherical_integral(), 4.0 * PI) < 1e-6);
    // The normalization constant is itself a quadrature result; refining the
    // grid must barely move it.
    assert!(rel(db_to_linear(coarse.peak_gain_dbi()), db_to_linear(fine.peak_gain_dbi())) < 1e-4);
    let raw1 = synthesize_3gpp(&ThreeGppParams::default(), 1.0).unwrap().spherical_integral();
    let raw4 = synthesize_3gpp(&ThreeGppParams::default(), 0.25).unwrap().spherical_integral();
    assert!(rel(raw1, raw4) < 1e-4, "{raw1} vs {raw4}");
}

#[test]
fn normalization_preserves_shape() {
    let p = synthesize_3gpp(&ThreeGppParams::default(), 2.0).unwrap();
    let n = p.normalize_to_4pi().unwrap();
    assert_eq!(p.gain_db(), n.gain_db());
}

#[test]
fn ant3d_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.ant3d");
    let mut p = synthesize_3gpp(&ThreeGppParams::default(), 1.0).unwrap();
    p.frequency_ghz = Some(6.75);
    p.polarization = Polarization::Horizontal;
    write_ant3d(&p, &path).unwrap();
    let back = read_ant3d(&path).unwrap();
    assert_eq!(back.peak_gain_dbi(), p.peak_gain_dbi());
    assert_eq!(back.frequency_ghz, p.frequency_ghz);
    assert_eq!(back.polarization, p.polarization);
    assert_eq!(back.source, p.source);
    assert_eq!(back.mount, p.mount);
    assert_eq!(back.grid_step_deg(), p.grid_step_deg());
    for (a, b) in back.gain_db().iter().zip(p.gain_db()) {
        assert!((a - b).abs() < 1e-9);
    }

    let iso = AntennaPattern::isotropic(0.0, 5.0).unwrap();
    write_ant3d(&iso, &path).unwrap();
    assert_eq!(read_ant3d(&path).unwrap(), iso);
}

#[test]
fn cut_files_reconstruct_3gpp() {
    let params = ThreeGppParams::default();
    let dir = tempfile::tempdir().unwrap();
    let vpath = dir.path().join("v.csv");
    let hpath = dir.path().join("h.csv");
    // Vertical cut on elevation, horizontal on azimuth, both with headers.
    let mut v = String::from("angle_deg,gain_dbi\n");
    for k in 0..=180 {
        let el = -90.0 + k as f64;
        let _ = std::fmt::Write::write_fmt(
            &mut v,
            format_args!("{el},{}\n", 8.0 + params.vertical_cut_db(90.0 - el)),
        );
    }
    let mut h = String::from("angle_deg,gain_dbi\n");
    for k in 0..360 {
        let az = k as f64;
        let signed = if az >= 180.0 { az - 360.0 } else { az };
        let _ = std::fmt::Write::write_fmt(&mut h, format_args!("{az},{}\n", 8.0 + params.horizontal_cut_db(signed)));
    }
    std::fs::write(&vpath, v).unwrap();
    std::fs::write(&hpath, h).unwrap();
    let vc = read_plane_cut_csv(&vpath, CutPlane::Vertical).unwrap();
    let hc = read_plane_cut_csv(&hpath, CutPlane::Horizontal).unwrap();
    let rec = reconstruct_from_cuts(&vc, &hc, 8.0, 1.0).unwrap();
    let syn = synthesize_3gpp(&params, 1.0).unwrap();
    let grid = *syn.grid();
    let mut compared = 0;
    for i in 0..grid.n_elevation() {
        let zen = 90.0 - grid.elevation_deg(i);
        for j in 0..grid.n_azimuth() {
            let az = grid.azimuth_deg(j);
            let signed = if az >= 180.0 { az - 360.0 } else { az };
            let av = params.vertical_cut_db(zen);
            let ah = params.horizontal_cut_db(signed);
            let clamped = -av >= params.sla_v_db || -ah >= params.a_max_db || -(av + ah) >= params.a_max_db;
            if clamped {
                continue;
            }
            compared += 1;
            let d = (rec.absolute_dbi_at_node(i, j) - syn.absolute_dbi_at_node(i, j)).abs();
            assert!(d < 1e-9, "el index {i}, az index {j}: {d}");
        }
    }
    assert!(compared > 1000);
}

#[test]
fn oriented_lookup_rotates_peak() {
    let p = synthesize_3gpp(&ThreeGppParams::with_beam(20.0, 18.0), 1.0).unwrap();
    let o = apply_orientation(&p, 135.0, -25.0);
    assert!((o.gain_at(-25.0, 135.0) - 18.0).abs() < 1e-9);
    assert!(o.gain_at(0.0, 0.0) < 0.0);
}

fn cut_strategy(plane: CutPlane, lo: f64, hi: f64) -> impl Strategy<Value = PlaneCut> {
    prop::collection::vec((lo..hi, -40.0f64..10.0), 1..30).prop_map(move |s| PlaneCut::new(plane, s))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn reconstruction_bounded_by_peak(
        v in cut_strategy(CutPlane::Vertical, -90.0, 90.0),
        h in cut_strategy(CutPlane::Horizontal, 0.0, 360.0),
    ) {
        let p = reconstruct_from_cuts(&v, &h, 10.0, 5.0).unwrap();
        let peak = db_to_linear(10.0);
        for i in 0..p.grid().n_elevation() {
            for j in 0..p.grid().n_azimuth() {
                let g = p.linear_at_node(i, j);
                prop_assert!(g >= 0.0 && g <= peak * (1.0 + 1e-12));
            }
        }
        prop_assert!(p.gain_db().iter().all(|g| *g <= 0.0 && g.is_finite()));
        prop_assert_eq!(p.gain_db().iter().cloned().fold(f64::NEG_INFINITY, f64::max), 0.0);
    }

    #[test]
    fn interpolation_exact_at_nodes_and_continuous_at_seam(
        hpbw in 10.0f64..120.0,
        i in 0usize..37,
        el in -89.0f64..89.0,
    ) {
        let p = synthesize_3gpp(&ThreeGppParams::with_beam(hpbw, 12.0), 5.0).unwrap();
        for j in 0..p.grid().n_azimuth() {
            let e = p.grid().elevation_deg(i);
            let a = p.grid().azimuth_deg(j);
            prop_assert_eq!(p.gain_at(e, a), p.absolute_dbi_at_node(i, j));
        }
        let left = p.gain_at(el, 360.0 - 1e-12);
        let right = p.gain_at(el, 0.0);
        prop_assert!((left - right).abs() < 1e-9);
    }

    #[test]
    fn attenuation_never_exceeds_floor(theta3 in 5.0f64..120.0, phi3 in 5.0f64..120.0, amax in 5.0f64..40.0) {
        let params = ThreeGppParams { theta_3db_deg: theta3, phi_3db_deg: phi3, sla_v_db: amax, a_max_db: amax, element_peak_gain_dbi: 8.0 };
        let p = synthesize_3gpp(&params, 5.0).unwrap();
        prop_assert!(p.gain_db().iter().all(|g| *g >= -amax - 1e-12));
    }
}
