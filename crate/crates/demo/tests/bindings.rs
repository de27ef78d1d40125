use divergence_demo::{check_document, explore_comb, explore_unfold};
use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).expect("bindings return JSON")
}

#[test]
fn string_entry_points_return_json() {
    let v = parse(check_document("x: leaf(A:1/2, B:0.25);\nroot = x;"));
    assert_eq!(v["ok"], true);
    assert_eq!(v["predicates"]["spe"], "true");
    assert_eq!(v["predicates"]["conv"], "true");

    let v = parse(explore_comb("zero_one", "", "bothpush", 4));
    assert_eq!(v["ratinf"]["verdict"], "true");
    assert_eq!(v["certificate"]["always_convergent"], false);

    let v = parse(explore_comb("dollar_auction", "pot=100&step=5", "(p)", 6));
    assert_eq!(v["stages"].as_array().unwrap().len(), 6);
    assert_eq!(v["divergent"], "true");

    let v = parse(explore_unfold("infpede", "", 6, "choice2b"));
    assert_eq!(v["bi_count"], 1);
    assert!(v["first_bi_layout"]["nodes"].is_array());
}

#[test]
fn bad_input_is_reported_not_thrown() {
    for s in [
        check_document("n: A choose 9 -> n, n;"),
        explore_comb("nosuch", "", "(t)", 3),
        explore_comb("omegapede", "omega", "(t)", 3),
        explore_unfold("infpede", "", 5, "sideways"),
    ] {
        assert_eq!(parse(s)["ok"], false);
    }
}
