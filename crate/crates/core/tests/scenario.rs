use approx::assert_abs_diff_eq;
use pole_assist::control::ModeSwitch;
use pole_assist::geometry::{InfrastructureModel, SensorModel};
use pole_assist::scenario::*;
use std::path::PathBuf;

fn repo(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn fixture(name: &str) -> SceneConfig {
    SceneConfig::load(repo(&format!("scenes/{name}.json"))).unwrap()
}

#[test]
fn fixtures_are_canonical_and_round_trip() {
    for entry in std::fs::read_dir(repo("scenes")).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        let scene = SceneConfig::parse(&text).unwrap();
        let once = to_canonical_json(&scene);
        assert_eq!(once, text, "{} is not in canonical form", path.display());
        let twice = to_canonical_json(&SceneConfig::parse(&once).unwrap());
        assert_eq!(once, twice);
    }
    for entry in std::fs::read_dir(repo("traces")).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        let trace = TraceFile::load(&path).unwrap();
        assert_eq!(to_canonical_json(&trace), text, "{}", path.display());
    }
}

#[test]
fn reference_matches_reference_models() {
    let scene = fixture("reference");
    assert_eq!(scene.infrastructure(), InfrastructureModel::reference());
    let s = scene.sensor();
    let r = SensorModel::single_wide();
    assert_eq!(s.cameras.len(), 1);
    assert_abs_diff_eq!(s.cameras[0].h_half_angle, r.cameras[0].h_half_angle, epsilon = 1e-15);
    assert_eq!(s.cameras[0].range, 4.0);
    let c = scene.control();
    assert_eq!((c.kp, c.kd, c.rz, c.dt_high), (3.0, 4.0, 2.0, 1.0));
    assert_abs_diff_eq!(c.yaw_rate_max, 30f64.to_radians(), epsilon = 1e-15);
}

#[test]
fn dual_rig_fixture_matches_reference_rig() {
    let s = fixture("dual_camera_rig").sensor();
    let r = SensorModel::dual_rig();
    for (a, b) in s.cameras.iter().zip(&r.cameras) {
        assert_abs_diff_eq!(a.yaw_offset, b.yaw_offset, epsilon = 1e-15);
        assert_abs_diff_eq!(a.v_half_angle, b.v_half_angle, epsilon = 1e-15);
    }
}

fn with(edit: impl Fn(&mut serde_json::Value)) -> Result<SceneConfig, ScenarioError> {
    let text = std::fs::read_to_string(repo("scenes/reference.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    edit(&mut v);
    SceneConfig::parse(&v.to_string())
}

#[test]
fn malformed_scenes_are_rejected() {
    assert!(matches!(SceneConfig::parse("{"), Err(ScenarioError::Json(_))));
    assert!(matches!(
        with(|v| v["infrastructure"]["pole_height"] = 6.0.into()),
        Err(ScenarioError::Json(_))
    ));
    assert!(matches!(
        with(|v| v["infrastructure"]["protection_zone"]["cylinder_radius_m"] = 0.1.into()),
        Err(ScenarioError::Invalid(_))
    ));
    assert!(matches!(
        with(|v| v["sensor"]["cameras"][0]["range_m"] = 1.5.into()),
        Err(ScenarioError::Invalid(_))
    ));
    assert!(matches!(
        with(|v| v["sim"]["f_low_hz"] = 401.5.into()),
        Err(ScenarioError::Invalid(_))
    ));
    assert!(matches!(
        SceneConfig::load(repo("scenes/missing.json")),
        Err(ScenarioError::Io { .. })
    ));
}

#[test]
fn optional_sections_take_defaults() {
    let scene = with(|v| {
        let o = v.as_object_mut().unwrap();
        o.remove("coverage");
        o.remove("platform");
        o["sim"].as_object_mut().unwrap().remove("range_bias");
    })
    .unwrap();
    assert_eq!(scene.coverage, CoverageConfig::default());
    assert!(scene.sim().range_bias.is_empty());
}

#[test]
fn trace_units_and_default_mode_event() {
    let t: TraceFile = serde_json::from_str(
        r#"{"segments":[{"t_start_s":0,"duration_s":2,"ux_mps":0.5,"uy_mps":0,"uz_mps":0,"uw_dps":90}]}"#,
    )
    .unwrap();
    let tr = t.trace();
    assert_eq!(tr.mode_events.len(), 1);
    assert_eq!(tr.mode_events[0].mode, ModeSwitch::Inspect);
    assert_abs_diff_eq!(tr.segments[0].input.uw, std::f64::consts::FRAC_PI_2, epsilon = 1e-15);

    let bad: TraceFile = serde_json::from_str(
        r#"{"segments":[{"t_start_s":5,"duration_s":2,"ux_mps":0,"uy_mps":0,"uz_mps":0,"uw_dps":0},
                        {"t_start_s":1,"duration_s":2,"ux_mps":0,"uy_mps":0,"uz_mps":0,"uw_dps":0}]}"#,
    )
    .unwrap();
    assert!(bad.validate().is_err());
}
