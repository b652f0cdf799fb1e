use alkit::pipeline::{run_pipeline, IsotopyConfig, ScenarioConfig};
use alkit::Error;
use num_complex::Complex64 as C;

fn cheap(magnitude: f64) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::default();
    cfg.steps = 8;
    cfg.resolution.fit_spacing = 1e-2;
    cfg.resolution.report_spacing = 2e-2;
    cfg.resolution.k_samples = 50;
    let IsotopyConfig::Bump { magnitude: m, .. } = &mut cfg.isotopy;
    *m = magnitude;
    cfg
}

#[test]
fn identity_isotopy_gives_identity_word() {
    let out = run_pipeline(&cheap(0.0)).unwrap();
    let r = &out.report;
    assert!(r.pass);
    assert!(r.window_max_error <= 1e-8, "{}", r.window_max_error);
    assert!(r.outside.value <= 1e-8);
    assert!(r.k_set.value <= 1e-8);
    for x in [-7.0, -1.0, 0.0, 2.5, 6.0, 11.0] {
        let w = out.word.eval(&[C::new(x, 0.0), C::new(0.0, 0.0)]).unwrap();
        assert!((w[0] - x).norm() <= 1e-8 && w[1].norm() <= 1e-8);
    }
}

#[test]
fn small_bump_meets_all_criteria() {
    let cfg = cheap(0.02);
    let out = run_pipeline(&cfg).unwrap();
    let r = &out.report;
    assert!(r.pass, "{r:?}");
    assert_eq!(r.steps, 8);
    assert!(r.window.value <= 1.0);
    assert!(r.outside.value <= r.outside.bound);
    assert!(r.k_set.value <= cfg.mu);
    assert!(r.injectivity.value >= r.injectivity.bound);
    assert!(r.annulus_increment <= cfg.eps2);
    assert!(r.cutoff_constant.is_finite() && r.cutoff_constant > 0.0);

    // The word moves the bump region and fixes the far line.
    let x = 2.5;
    let w = out.word.eval(&[C::new(x, 0.0), C::new(0.0, 0.0)]).unwrap();
    assert!((w[1] - C::new(0.0, 0.8 * 0.02)).norm() < 1e-3, "{w:?}");
    let far = out
        .word
        .eval(&[C::new(-9.0, 0.0), C::new(0.0, 0.0)])
        .unwrap();
    assert!((far[0] - C::new(-9.0, 0.0)).norm() <= r.outside.bound);

    let csv = r.window_csv();
    assert!(csv.starts_with("x,error,eps,verdict\n"));
    assert_eq!(csv.lines().count(), r.window.points + 1);
    assert!(r.outside_csv().starts_with("x,deviation,budget,verdict\n"));
    assert!(r
        .k_csv()
        .starts_with("re_z1,im_z1,re_z2,im_z2,error,mu,verdict\n"));
}

#[test]
fn report_rows_use_the_outside_region() {
    let cfg = cheap(0.02);
    let out = run_pipeline(&cfg).unwrap();
    let rows: Vec<f64> = out
        .report
        .outside_csv()
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|x| x.abs() >= cfg.radii[2] + 1.0));
}

#[test]
fn invalid_configs_are_rejected() {
    let mut cfg = ScenarioConfig::default();
    cfg.radii = [5.0, 5.0, 6.0];
    assert!(matches!(run_pipeline(&cfg), Err(Error::Config(_))));
    let mut cfg = ScenarioConfig::default();
    let IsotopyConfig::Bump { center, .. } = &mut cfg.isotopy;
    *center = 4.0;
    assert!(matches!(run_pipeline(&cfg), Err(Error::Config(_))));
    let mut cfg = ScenarioConfig::default();
    cfg.k = 3;
    assert!(matches!(run_pipeline(&cfg), Err(Error::Config(_))));
}

#[test]
fn config_round_trips_through_json() {
    let cfg = ScenarioConfig::default();
    let s = serde_json::to_string(&cfg).unwrap();
    let back: ScenarioConfig = serde_json::from_str(&s).unwrap();
    assert_eq!(serde_json::to_string(&back).unwrap(), s);
    let mut v: serde_json::Value = serde_json::from_str(&s).unwrap();
    v["surprise"] = serde_json::json!(true);
    assert!(serde_json::from_value::<ScenarioConfig>(v).is_err());
}

#[test]
fn inactive_cutoff_leaves_the_word_unchanged() {
    let cfg = cheap(0.02);
    let mut wide = cfg.clone();
    wide.radii = [cfg.radii[0], 40.0, 50.0];
    let a = run_pipeline(&cfg).unwrap().word;
    let b = run_pipeline(&wide).unwrap().word;
    let r1 = cfg.radii[0];
    let mut worst = 0.0f64;
    for i in 0..=40 {
        let x = -r1 + 2.0 * r1 * i as f64 / 40.0;
        for z in [
            vec![C::new(x, 0.0), C::new(0.0, 0.0)],
            vec![C::new(0.6 * x, 0.1), C::new(0.2, -0.3)],
        ] {
            let (p, q) = (a.eval(&z).unwrap(), b.eval(&z).unwrap());
            worst = worst.max(
                p.iter()
                    .zip(&q)
                    .map(|(s, t)| (s - t).norm())
                    .fold(0.0, f64::max),
            );
        }
    }
    assert!(worst <= 1e-10, "{worst}");
}

#[test]
fn refining_steps_and_tolerance_does_not_increase_error() {
    let coarse = cheap(0.02);
    let mut fine = coarse.clone();
    fine.steps *= 2;
    fine.tolerance = fine.tolerance.scaled(0.5);
    let a = run_pipeline(&coarse).unwrap().report.window_max_error;
    let b = run_pipeline(&fine).unwrap().report.window_max_error;
    assert!(b <= 1.1 * a, "{b} vs {a}");
}
