use cellprobe::brackets::unmatched_open_prob;
use cellprobe_wasm::{ballot_curve, entropy_sum, stretch};
use serde_json::Value;

fn parse(s: &str) -> Value {
    serde_json::from_str(s).expect("valid JSON")
}

#[test]
fn ballot_curve_matches_enumeration() {
    let v = parse(&ballot_curve(12));
    let points = v["points"].as_array().unwrap();
    assert_eq!(points.len(), 12);
    for (k, point) in points.iter().enumerate() {
        let d = k + 1;
        let exact = unmatched_open_prob(d).unwrap();
        assert_eq!(point["open"].as_str().unwrap(), cellprobe::entropy_sum::show_ratio(&exact));
    }
    assert_eq!(points[2]["open"].as_str().unwrap(), "1/4 (0.250000)");
}

#[test]
fn ballot_curve_rejects_range() {
    assert!(parse(&ballot_curve(0))["error"].is_string());
    assert!(parse(&ballot_curve(21))["error"].is_string());
}

#[test]
fn entropy_sum_uniform() {
    let v = parse(&entropy_sum(0, 256, 4, 64.0));
    assert_eq!(v["j"], 260);
    assert_eq!(v["upper_holds"], true);
    assert_eq!(v["lower_holds"], true);
    assert_eq!(v["joint_holds"], true);
    assert!(parse(&entropy_sum(0, 0, 4, 64.0))["error"].is_string());
}

#[test]
fn stretch_pairs() {
    let v = parse(&stretch("1, 2, 3, 5, 8, 13, 21, 34, 55", 64, 2.0));
    assert_eq!(v["gaps_hold"], true);
    let len = v["v_prime"].as_array().unwrap().len();
    assert!(len >= v["guaranteed"].as_u64().unwrap() as usize);
    assert!(parse(&stretch("3 x", 8, 2.0))["error"].is_string());
}
