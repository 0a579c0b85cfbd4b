use popweave_web::{error_curve_json, generate_json, posterior_json, variables_json};
use serde_json::Value;

fn parse(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn lists_agent_variables() {
    let v = parse(&variables_json());
    let names: Vec<&str> = v.as_array().unwrap().iter().map(|x| x["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"ageSlices") && names.contains(&"RC_spouses"));
}

#[test]
fn posterior_given_evidence() {
    let v = parse(&posterior_json(r#"{"gender": "female", "married": "yes"}"#));
    let rc = v["marginals"]["RC_spouses"].as_array().unwrap();
    assert!((rc[1].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let age = v["marginals"]["ageSlices"].as_array().unwrap();
    assert!(age[..3].iter().all(|p| p.as_f64() == Some(0.0)));

    assert!(parse(&posterior_json(r#"{"gender": "robot"}"#))["error"].is_string());
    assert!(parse(&posterior_json(r#"{"ageSlices": "0-4", "married": "yes"}"#))["error"].is_string());
    assert!(parse(&posterior_json("[1]"))["error"].is_string());
}

#[test]
fn generates_a_network_with_an_ego_view() {
    let v = parse(&generate_json(1500, 3, usize::MAX));
    assert_eq!(v["n"], 1500);
    assert!(v["stats"]["density"].as_f64().unwrap() < 0.05);
    assert_eq!(v["matching"].as_array().unwrap().len(), 4);
    let nodes = v["ego"]["nodes"].as_array().unwrap();
    assert!(!nodes.is_empty() && nodes.len() <= 80);
    assert_eq!(nodes.iter().filter(|n| n["hop"] == 0).count(), 1);
    assert_eq!(v, parse(&generate_json(1500, 3, usize::MAX)));
    assert!(parse(&generate_json(1, 0, 0))["error"].is_string());
}

#[test]
fn error_curve_has_one_point_per_size() {
    let v = parse(&error_curve_json(&[300, 3000], 2));
    let points = v.as_array().unwrap();
    assert_eq!(points.len(), 2);
    let e = |i: usize| points[i]["matching_error"].as_f64().unwrap();
    assert!(e(1) < e(0));
    assert!(parse(&error_curve_json(&[], 1))["error"].is_string());
}
